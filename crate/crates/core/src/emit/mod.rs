//! Rendering compiled trees to backend formats.
//!
//! [`render`] walks the live leaves in application order and hands each to
//! a [`CircuitBuilder`]. [`QasmBuilder`] produces OpenQASM 3.0 text.

pub mod interp;

use std::f64::consts::PI;

use thiserror::Error;

use crate::decomp::euler_decompose;
use crate::gates::{CoreOp, CtrlGate, NamedGate};
use crate::ir::{format_path, Compiled, IrError, Payload};
use crate::qspace::{QType, Qubit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmitError {
    #[error("gate {0} has a multi-target core with no OpenQASM form")]
    MultiTarget(String),
    #[error("leaf {0} is an unplaced unitary; compile to at least multi_target first")]
    Unplaced(String),
    #[error("{0}")]
    Ir(#[from] IrError),
    #[error("cannot decompose core of {0}")]
    Core(String),
}

pub type Result<T> = std::result::Result<T, EmitError>;

/// Receives a circuit gate by gate. `finish` consumes the builder.
pub trait CircuitBuilder {
    type Artifact;

    fn declare_qubits(&mut self, data: usize, ancilla: usize);
    fn add_gate(&mut self, g: &CtrlGate, lineage_comment: &str) -> Result<()>;
    fn finish(self) -> Self::Artifact;
}

/// Feeds every live leaf of `c` to `builder`, with its path and lineage
/// chain as the comment.
pub fn render<B: CircuitBuilder>(c: &Compiled, mut builder: B) -> Result<B::Artifact> {
    builder.declare_qubits(c.data_qubits, c.ancilla_qubits());
    for path in c.tree.leaf_paths() {
        let node = c.tree.node_at(&path).expect("leaf path resolves");
        let g = match &node.payload {
            Payload::Gate(g) => g,
            Payload::Unitary(u) if u.is_identity() => continue,
            Payload::Unitary(_) => return Err(EmitError::Unplaced(format_path(&path))),
        };
        let hops = c.tree.trace_path(&path)?;
        let chain: Vec<String> = hops[1..]
            .iter()
            .map(|l| format!("{}@{}", l.producer, l.ordinal))
            .collect();
        builder.add_gate(g, &format!("{} {}", format_path(&path), chain.join(" > ")))?;
    }
    Ok(builder.finish())
}

fn qref(q: Qubit, data: usize) -> String {
    let id = q.id as usize;
    if id < data {
        format!("q[{id}]")
    } else {
        format!("anc[{}]", id - data)
    }
}

fn core_name(core: &CoreOp) -> Option<String> {
    Some(match core {
        CoreOp::Named(NamedGate::SD) => "sdg".into(),
        CoreOp::Named(NamedGate::TD) => "tdg".into(),
        CoreOp::Named(n) => n.name().into(),
        CoreOp::Rotation { axis, angle } => {
            format!("r{}({angle})", axis.name().to_ascii_lowercase())
        }
        CoreOp::Generic(_) => return None,
    })
}

/// One line for a named or rotation core on `target` under `controls`.
fn line(name: &str, controls: &[(Qubit, QType)], target: Qubit, data: usize) -> String {
    if name == "x" && matches!(controls, [(_, QType::Control1)]) {
        return format!("cx {}, {};", qref(controls[0].0, data), qref(target, data));
    }
    let mut s = String::new();
    for (_, kind) in controls {
        s.push_str(if *kind == QType::Control0 {
            "negctrl @ "
        } else {
            "ctrl @ "
        });
    }
    s.push_str(name);
    s.push(' ');
    let operands: Vec<String> = controls
        .iter()
        .map(|&(q, _)| q)
        .chain([target])
        .map(|q| qref(q, data))
        .collect();
    s.push_str(&operands.join(", "));
    s.push(';');
    s
}

/// Phase `e^{iα}` applied when every control is active, as a chain of
/// controlled `rz` gates. Returns the unconditional phase left over.
fn controlled_phase(
    alpha: f64,
    controls: &[(Qubit, QType)],
    data: usize,
    out: &mut Vec<String>,
) -> f64 {
    let Some((&(last, kind), rest)) = controls.split_last() else {
        return alpha;
    };
    // diag(1, e^{iα}) = e^{iα/2}·Rz(α); on |0⟩ activation the sign flips.
    let angle = if kind == QType::Control0 {
        -alpha
    } else {
        alpha
    };
    if angle != 0.0 {
        out.push(line(&format!("rz({angle})"), rest, last, data));
    }
    controlled_phase(alpha / 2.0, rest, data, out)
}

/// OpenQASM lines for `g` and the global phase they omit.
///
/// Generic single-target cores become `rz, ry, rz` under the same controls
/// followed by a controlled-phase chain.
pub fn qasm_gate_lines(g: &CtrlGate, data: usize) -> Result<(Vec<String>, f64)> {
    let targets = g.targets();
    if targets.len() != 1 {
        return Err(EmitError::MultiTarget(g.to_string()));
    }
    let t = targets[0];
    let controls = g.controls();
    if let Some(name) = core_name(g.core()) {
        return Ok((vec![line(&name, &controls, t, data)], g.phase()));
    }
    let e = euler_decompose(&g.core().matrix()).map_err(|_| EmitError::Core(g.to_string()))?;
    let mut out = Vec::new();
    for (axis, angle) in [("rz", e.delta), ("ry", e.gamma), ("rz", e.beta)] {
        if angle != 0.0 {
            out.push(line(&format!("{axis}({angle})"), &controls, t, data));
        }
    }
    let rest = controlled_phase(e.alpha, &controls, data, &mut out);
    Ok((out, g.phase() + rest))
}

/// Single-string form of [`qasm_gate_lines`], lines joined by `\n`.
pub fn qasm_gate_line(g: &CtrlGate, data: usize) -> Result<String> {
    Ok(qasm_gate_lines(g, data)?.0.join("\n"))
}

fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// OpenQASM 3.0 text builder.
#[derive(Debug, Clone, Default)]
pub struct QasmBuilder {
    annotate: bool,
    data: usize,
    lines: Vec<String>,
    phase: f64,
}

impl QasmBuilder {
    /// With `annotate`, every gate line carries its lineage as a trailing
    /// comment.
    pub fn new(annotate: bool) -> Self {
        QasmBuilder {
            annotate,
            ..Self::default()
        }
    }
}

impl CircuitBuilder for QasmBuilder {
    type Artifact = String;

    fn declare_qubits(&mut self, data: usize, ancilla: usize) {
        self.data = data;
        self.lines.push("OPENQASM 3.0;".into());
        self.lines.push("include \"stdgates.inc\";".into());
        self.lines.push(format!("qubit[{data}] q;"));
        if ancilla > 0 {
            self.lines.push(format!("qubit[{ancilla}] anc;"));
        }
    }

    fn add_gate(&mut self, g: &CtrlGate, lineage_comment: &str) -> Result<()> {
        let (lines, phase) = qasm_gate_lines(g, self.data)?;
        self.phase += phase;
        for l in lines {
            self.lines.push(if self.annotate {
                format!("{l} // {lineage_comment}")
            } else {
                l
            });
        }
        Ok(())
    }

    fn finish(mut self) -> String {
        self.lines
            .push(format!("// global phase: {}", wrap_phase(self.phase)));
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Renders `c` as OpenQASM 3.0.
pub fn to_qasm(c: &Compiled, annotate: bool) -> Result<String> {
    render(c, QasmBuilder::new(annotate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{circuit_matrix, zero_block};
    use crate::ir::{ByteCode, Lineage, Producer};
    use crate::numerics::{distance, haar_unitary, UnitaryM};
    use crate::qspace::data_register;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circuit(n: usize, total: usize, gates: Vec<CtrlGate>) -> Compiled {
        let kids = gates
            .into_iter()
            .enumerate()
            .map(|(i, g)| ByteCode::gate(g, Lineage::new(Producer::Gray, i as u32)))
            .collect();
        Compiled {
            tree: ByteCode::unitary(UnitaryM::identity(1 << n), Lineage::root())
                .with_children(kids),
            data_qubits: n,
            total_qubits: total,
            granularity: crate::gates::GateGrain::CtrlPruned,
            flags: 0,
        }
    }

    #[test]
    fn line_examples() {
        let q = |i| Qubit::data(i);
        assert_eq!(
            qasm_gate_line(&CtrlGate::named(NamedGate::H, q(0)), 1).unwrap(),
            "h q[0];"
        );
        let neg = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[(q(1), QType::Control0)],
            q(0),
        )
        .unwrap();
        assert_eq!(qasm_gate_line(&neg, 2).unwrap(), "negctrl @ x q[1], q[0];");
        let rz = CtrlGate::single(CoreOp::rz(0.5), Qubit::ancilla(3));
        assert_eq!(qasm_gate_line(&rz, 3).unwrap(), "rz(0.5) anc[0];");
        assert_eq!(
            qasm_gate_line(&CtrlGate::cnot(q(2), q(0)), 3).unwrap(),
            "cx q[2], q[0];"
        );
        assert_eq!(
            qasm_gate_line(&CtrlGate::named(NamedGate::SD, q(0)), 1).unwrap(),
            "sdg q[0];"
        );
        let ch = CtrlGate::controlled(
            CoreOp::Named(NamedGate::TD),
            &[(q(0), QType::Control1), (q(2), QType::Control0)],
            q(1),
        )
        .unwrap();
        assert_eq!(
            qasm_gate_line(&ch, 3).unwrap(),
            "ctrl @ negctrl @ tdg q[0], q[2], q[1];"
        );
        let two = CtrlGate::new(
            vec![q(0), q(1)],
            vec![QType::Target, QType::Target],
            CoreOp::Generic(crate::numerics::Matrix::identity(4)),
        )
        .unwrap();
        assert!(matches!(
            qasm_gate_line(&two, 2),
            Err(EmitError::MultiTarget(_))
        ));
    }

    #[test]
    fn empty_and_single() {
        let text = to_qasm(&circuit(2, 2, vec![]), false).unwrap();
        assert_eq!(
            text,
            "OPENQASM 3.0;\ninclude \"stdgates.inc\";\nqubit[2] q;\n// global phase: 0\n"
        );
        let text = to_qasm(
            &circuit(1, 2, vec![CtrlGate::named(NamedGate::H, Qubit::data(0))]),
            false,
        )
        .unwrap();
        assert!(text.contains("qubit[1] anc;\nh q[0];\n"));
        let annotated = to_qasm(
            &circuit(1, 1, vec![CtrlGate::named(NamedGate::H, Qubit::data(0))]),
            true,
        )
        .unwrap();
        assert!(annotated.contains("h q[0]; // /0 gray_decompose@0"));
    }

    #[test]
    fn generic_cores_round_trip_through_interpreter() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let q = data_register(3);
        let kinds = [QType::Control1, QType::Control0];
        let mut gates = Vec::new();
        for i in 0..12 {
            let core = CoreOp::Generic(haar_unitary(2, &mut rng));
            let ctrl: Vec<(Qubit, QType)> = match i % 3 {
                0 => vec![],
                1 => vec![(q[(i + 1) % 3], kinds[i % 2])],
                _ => vec![
                    (q[(i + 1) % 3], kinds[i % 2]),
                    (q[(i + 2) % 3], kinds[(i / 2) % 2]),
                ],
            };
            gates.push(
                CtrlGate::controlled(core, &ctrl, q[i % 3])
                    .unwrap()
                    .with_phase(0.1 * i as f64),
            );
        }
        let c = circuit(3, 3, gates.clone());
        let text = to_qasm(&c, false).unwrap();
        let prog = interp::run(&text).unwrap();
        let want = circuit_matrix(&gates, &q).unwrap();
        assert!(distance(&prog.matrix, &want).unwrap() < 1e-9);
        // The trailing comment restores the exact phase.
        let phase = prog.global_phase.unwrap();
        let exact = prog
            .matrix
            .scale(crate::numerics::C64::from_polar(1.0, phase));
        assert!(exact.max_abs_diff(&want).unwrap() < 1e-9);
    }

    #[test]
    fn ancilla_register_is_separate() {
        let d = data_register(2);
        let a = Qubit::ancilla(2);
        let gates = vec![
            CtrlGate::controlled(
                CoreOp::Named(NamedGate::X),
                &[(d[0], QType::Control1), (d[1], QType::Control1)],
                a,
            )
            .unwrap(),
            CtrlGate::controlled(CoreOp::Named(NamedGate::Z), &[(a, QType::Control1)], d[0])
                .unwrap(),
            CtrlGate::controlled(
                CoreOp::Named(NamedGate::X),
                &[(d[0], QType::Control1), (d[1], QType::Control1)],
                a,
            )
            .unwrap(),
        ];
        let text = to_qasm(&circuit(2, 3, gates.clone()), false).unwrap();
        assert!(text.contains("ctrl @ z anc[0], q[0];"));
        let prog = interp::run(&text).unwrap();
        assert_eq!((prog.data, prog.ancilla), (2, 1));
        let mut all = d.clone();
        all.push(a);
        let want = zero_block(&circuit_matrix(&gates, &all).unwrap(), &all, &[a]).unwrap();
        assert!(distance(&prog.data_block().unwrap(), &want).unwrap() < 1e-12);
    }
}
