use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qcsynth_core::build_pipeline;
use qcsynth_core::config::{self, QConfig};
use qcsynth_core::decomp::CompileError;
use qcsynth_core::emit::{qasm_gate_line, to_qasm};
use qcsynth_core::gates::{grain_of, GateGrain};
use qcsynth_core::ir::{
    deserialize, format_path, serialize, ByteCode, Compiled, NodePath, Payload,
};
use qcsynth_core::numerics::{parse_matrix, UnitaryM};
use qcsynth_core::pipeline::PipelineError;
use qcsynth_core::sknet::cache_dir;

/// Compiles unitary matrices into traceable quantum circuits.
#[derive(Parser)]
#[command(name = "qcsynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a `.um` matrix into a `.qco` circuit.
    Compile(CompileArgs),
    /// Render a `.qco` circuit as OpenQASM.
    Render(RenderArgs),
    /// Check a `.qco` circuit against a matrix.
    Verify(VerifyArgs),
    /// Show the lineage of one gate.
    Trace(TraceArgs),
    /// Build or inspect the cached Solovay-Kitaev net.
    Net(NetArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file of configuration overrides.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Set a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CompileArgs {
    input: PathBuf,
    /// Output path; defaults to the input with a `.qco` extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Target granularity, `unitary` through `clifford_t`.
    #[arg(long)]
    granularity: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    opt: Option<u8>,
    #[arg(long)]
    sk_depth: Option<usize>,
    #[arg(long)]
    sk_epsilon: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    ancilla_budget: Option<usize>,
    /// Verify the result against the input matrix.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Qasm3,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "qasm3")]
    format: Format,
    /// Output path; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Add lineage comments to gate lines.
    #[arg(long)]
    annotate: bool,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long, value_name = "UM")]
    against: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct TraceArgs {
    input: PathBuf,
    /// Leaf index in application order.
    #[arg(long)]
    gate: usize,
    /// Count tombstoned leaves too.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct NetArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

enum Failure {
    Input(String),
    Compile(String),
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compile(_) => 3,
            Failure::Verify => 4,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(path))
}

fn read_unitary(path: &Path) -> Result<UnitaryM, Failure> {
    let m = parse_matrix(&read_text(path)?).map_err(input(path))?;
    UnitaryM::deflate(&m).map_err(input(path))
}

fn read_qco(path: &Path) -> Result<Compiled, Failure> {
    let bytes = fs::read(path).map_err(input(path))?;
    deserialize(&bytes).map_err(input(path))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Merges the config file, `--set` pairs and dedicated flags. A key given
/// twice on the command line is rejected.
fn load_config(args: &ConfigArgs, flags: Vec<(&str, Value)>) -> Result<QConfig, Failure> {
    let doc = match &args.config {
        Some(p) => Some(serde_json::from_str::<Value>(&read_text(p)?).map_err(input(p))?),
        None => None,
    };
    let mut pairs = BTreeMap::new();
    let assignments = args.set.iter().map(|s| config::parse_assignment(s));
    let flags = flags.into_iter().map(|(k, v)| Ok((k.to_string(), v)));
    for pair in assignments.chain(flags) {
        let (k, v) = pair.map_err(|e| Failure::Input(e.to_string()))?;
        if pairs.insert(k.clone(), v).is_some() {
            return Err(Failure::Input(format!(
                "configuration key `{k}` given more than once"
            )));
        }
    }
    let pairs: Vec<(String, Value)> = pairs.into_iter().collect();
    config::load(None, doc.as_ref(), &pairs)
        .map(|(c, _)| c)
        .map_err(|e| Failure::Input(format!("config: {e}")))
}

fn compile(a: CompileArgs) -> Outcome {
    let mut flags: Vec<(&str, Value)> = Vec::new();
    if let Some(g) = &a.granularity {
        flags.push(("granularity", g.as_str().into()));
    }
    if let Some(v) = a.opt {
        flags.push(("optimization_level", v.into()));
    }
    if let Some(v) = a.sk_depth {
        flags.push(("sk_depth", v.into()));
    }
    if let Some(v) = a.sk_epsilon {
        flags.push(("sk_epsilon", v.into()));
    }
    if let Some(v) = a.window {
        flags.push(("window_size", v.into()));
    }
    if let Some(v) = a.ancilla_budget {
        flags.push(("ancilla_budget", v.into()));
    }
    let cfg = load_config(&a.config, flags)?;
    let u = read_unitary(&a.input)?;
    let pipeline = build_pipeline(&cfg);
    let out = pipeline.compile(&u).map_err(|e| match e {
        PipelineError::Compile(CompileError::Input(m)) => {
            Failure::Input(format!("{}: {m}", a.input.display()))
        }
        e => Failure::Compile(format!("{}: {e}", a.input.display())),
    })?;
    let path = a.output.unwrap_or_else(|| a.input.with_extension("qco"));
    write(&path, &serialize(&out.compiled))?;

    let c = &out.compiled;
    let gates = c
        .tree
        .leaf_gates()
        .map_err(|e| Failure::Compile(e.to_string()))?;
    let mut by_grain: BTreeMap<GateGrain, usize> = BTreeMap::new();
    for g in &gates {
        *by_grain.entry(grain_of(g)).or_default() += 1;
    }
    println!("input: {} ({} qubits)", a.input.display(), c.data_qubits);
    println!("granularity: {}", cfg.granularity);
    println!("gates: {}", gates.len());
    for (grain, n) in &by_grain {
        println!("  {grain}: {n}");
    }
    println!("ancillas: {}", c.ancilla_qubits());
    if out.passes.is_empty() {
        println!("optimizer: none");
    }
    for p in &out.passes {
        println!("optimizer: {p}");
    }
    println!("wrote {}", path.display());
    if a.verify {
        let report = pipeline.verify(c, &u);
        println!("{report}");
        if !report.passed() {
            return Err(Failure::Verify);
        }
    }
    Ok(())
}

fn render(a: RenderArgs) -> Outcome {
    let c = read_qco(&a.input)?;
    let text = match a.format {
        Format::Qasm3 => to_qasm(&c, a.annotate).map_err(input(&a.input))?,
    };
    match &a.output {
        Some(p) => write(p, text.as_bytes()),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(Failure::Input(format!("stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn verify(a: VerifyArgs) -> Outcome {
    let cfg = load_config(&a.config, Vec::new())?;
    let c = read_qco(&a.input)?;
    let u = read_unitary(&a.against)?;
    if u.dimension() != 1 << c.data_qubits {
        return Err(Failure::Input(format!(
            "dimension mismatch: circuit acts on {} qubits ({}), matrix is {}x{}",
            c.data_qubits,
            1usize << c.data_qubits,
            u.dimension(),
            u.dimension()
        )));
    }
    let report = build_pipeline(&cfg).verify(&c, &u);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

/// Leaf paths in application order, tombstoned ones included.
fn all_leaves(tree: &ByteCode) -> Vec<NodePath> {
    tree.preorder()
        .filter(|(n, _)| n.is_leaf())
        .map(|(_, p)| p)
        .collect()
}

fn trace(a: TraceArgs) -> Outcome {
    let c = read_qco(&a.input)?;
    let leaves = if a.all {
        all_leaves(&c.tree)
    } else {
        c.tree.leaf_paths()
    };
    let path = leaves.get(a.gate).ok_or_else(|| {
        Failure::Input(format!(
            "gate {} out of range ({} gates)",
            a.gate,
            leaves.len()
        ))
    })?;
    let hops = c.tree.trace_path(path).map_err(input(&a.input))?;
    for depth in 0..=path.len() {
        let p = &path[..depth];
        let node = c.tree.node_at(p).expect("prefix of a leaf path");
        let l = &hops[depth];
        let mut line = format!("{} {}@{}", format_path(p), l.producer, l.ordinal);
        if node.tombstone {
            line.push_str(" [tombstone]");
        }
        if !l.notes.is_empty() {
            line.push_str(&format!(" ({})", l.notes));
        }
        println!("{line}");
    }
    if let Payload::Gate(g) = &c.tree.node_at(path).expect("leaf").payload {
        let text = qasm_gate_line(g, c.data_qubits).map_err(input(&a.input))?;
        for l in text.lines() {
            println!("  {l}");
        }
    }
    Ok(())
}

fn net(a: NetArgs) -> Outcome {
    let cfg = load_config(&a.config, Vec::new())?;
    let pipeline = build_pipeline(&cfg);
    let net = pipeline
        .net()
        .map_err(|e| Failure::Compile(format!("net: {e}")))?;
    let alphabet: Vec<&str> = net.alphabet().iter().map(|g| g.name()).collect();
    println!("cache: {}", cache_dir().display());
    println!("alphabet: {}", alphabet.join(" "));
    println!("max length: {}", net.max_length());
    println!("entries: {}", net.len());
    println!("longest word: {}", net.longest_word());
    println!("epsilon0: {:.4}", net.epsilon0());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => compile(a),
        Command::Render(a) => render(a),
        Command::Verify(a) => verify(a),
        Command::Trace(a) => trace(a),
        Command::Net(a) => net(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) | Failure::Compile(m) => eprintln!("error: {m}"),
                Failure::Verify => eprintln!("error: verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
