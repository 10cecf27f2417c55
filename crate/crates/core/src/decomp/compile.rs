use thiserror::Error;

use super::{
    cliffordt_decompose, ctrl_decompose, euler_gates, gray_decompose, tl_decompose, DecompError,
};
use crate::config::QConfig;
use crate::gates::{convert, grain_of, CtrlGate, GateGrain};
use crate::ir::{format_path, ByteCode, Compiled, Lineage, NodePath, Producer, FLAG_SK};
use crate::numerics::{distance, UnitaryM, C64};
use crate::qspace::QDevice;
use crate::sknet::{sk_decompose, SU2Net};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("at {}: {source}", format_path(.path))]
    Stage {
        path: NodePath,
        #[source]
        source: DecompError,
    },
    #[error("at {}: granularity {0} needs a Solovay-Kitaev net", format_path(.1))]
    MissingNet(GateGrain, NodePath),
    #[error("at {}: approximation error {error:.3e} exceeds sk_epsilon {budget}", format_path(.path))]
    SkBudget {
        path: NodePath,
        error: f64,
        budget: f64,
    },
}

struct Ctx<'a> {
    cfg: &'a QConfig,
    net: Option<&'a SU2Net>,
    device: QDevice,
    used_sk: bool,
}

fn at(path: &[usize]) -> impl FnOnce(DecompError) -> CompileError + '_ {
    move |source| CompileError::Stage {
        path: path.to_vec(),
        source,
    }
}

/// Compiles `u` down to `cfg.granularity`.
///
/// The root holds `u`. Above `MULTI_TARGET` the tree is
/// root → two-level factors → gray gates, and each gate coarser than the
/// target is refined in place: control pruning, then Euler angles, then
/// Solovay-Kitaev words, then the Clifford+T table. A stage that reduces a
/// gate to nothing tombstones it. `net` is needed only when rotations must
/// become discrete gates.
pub fn compile(
    u: &UnitaryM,
    cfg: &QConfig,
    net: Option<&SU2Net>,
) -> Result<Compiled, CompileError> {
    let n = u.qubit_count().filter(|&n| n > 0).ok_or_else(|| {
        CompileError::Input(format!(
            "dimension {} is not a power of two ≥ 2",
            u.dimension()
        ))
    })?;
    let mut ctx = Ctx {
        cfg,
        net,
        device: QDevice::new(cfg.ancilla_budget),
        used_sk: false,
    };
    let data = ctx.device.allocate_data(n).expect("fresh device");
    let mut root = ByteCode::unitary(u.clone(), Lineage::root());

    if !u.is_identity() {
        if cfg.granularity <= GateGrain::MultiTarget {
            let g = convert(u, &data).map_err(|e| at(&[])(e.into()))?;
            root.children
                .push(ByteCode::gate(g, Lineage::new(Producer::Convert, 0)));
        } else {
            let factors = tl_decompose(u).map_err(at(&[]))?;
            for (i, f) in factors.into_iter().enumerate() {
                let gates = gray_decompose(&f, &data).map_err(at(&[i]))?;
                let mut node = ByteCode::unitary(f, Lineage::new(Producer::Tl, i as u32));
                node.children = gates
                    .into_iter()
                    .enumerate()
                    .map(|(j, g)| ByteCode::gate(g, Lineage::new(Producer::Gray, j as u32)))
                    .collect();
                if node.children.is_empty() {
                    node.tombstone = true;
                    node.lineage.note("identity elided");
                }
                root.children.push(node);
            }
            let mut path = Vec::new();
            for i in 0..root.children.len() {
                path.push(i);
                for j in 0..root.children[i].children.len() {
                    path.push(j);
                    refine(&mut root.children[i].children[j], &mut path, &mut ctx)?;
                    path.pop();
                }
                path.pop();
            }
        }
    }

    Ok(Compiled {
        tree: root,
        data_qubits: n,
        total_qubits: ctx.device.total_qubits(),
        granularity: cfg.granularity,
        flags: if ctx.used_sk { FLAG_SK } else { 0 },
    })
}

fn refine(node: &mut ByteCode, path: &mut NodePath, ctx: &mut Ctx) -> Result<(), CompileError> {
    let g = node
        .payload
        .as_gate()
        .expect("refinement only visits gate nodes")
        .clone();
    let grain = grain_of(&g);
    let target = ctx.cfg.granularity;
    if grain >= target {
        return Ok(());
    }
    let (children, producer) = match grain {
        GateGrain::Singlet => (
            ctrl_decompose(&g, &mut ctx.device).map_err(at(path))?,
            Producer::Ctrl,
        ),
        GateGrain::CtrlPruned => (euler_gates(&g).map_err(at(path))?, Producer::Euler),
        GateGrain::Principal => {
            let net = ctx
                .net
                .ok_or_else(|| CompileError::MissingNet(target, path.clone()))?;
            let (gates, error) = approximate(&g, net, ctx.cfg.sk_depth);
            if error > ctx.cfg.sk_epsilon {
                return Err(CompileError::SkBudget {
                    path: path.clone(),
                    error,
                    budget: ctx.cfg.sk_epsilon,
                });
            }
            ctx.used_sk = true;
            node.lineage.note(&format!(
                "sk depth {} error {:.3e}",
                ctx.cfg.sk_depth, error
            ));
            (gates, Producer::Sk)
        }
        GateGrain::UnivGate => {
            let (gates, phase) = cliffordt_decompose(&g).map_err(at(path))?;
            if phase != 0.0 {
                node.lineage.note(&format!("phase {phase}"));
            }
            (gates, Producer::CliffordT)
        }
        other => {
            return Err(at(path)(DecompError::Precondition(format!(
                "no refinement from {other} towards {target}"
            ))))
        }
    };
    if children.is_empty() {
        node.tombstone = true;
        node.lineage.note("identity elided");
        return Ok(());
    }
    node.children = children
        .into_iter()
        .enumerate()
        .map(|(i, c)| ByteCode::gate(c, Lineage::new(producer, i as u32)))
        .collect();
    for i in 0..node.children.len() {
        path.push(i);
        refine(&mut node.children[i], path, ctx)?;
        path.pop();
    }
    Ok(())
}

/// Solovay-Kitaev word for an uncontrolled rotation, with the global phase
/// that best aligns it folded into the first gate.
fn approximate(g: &CtrlGate, net: &SU2Net, depth: usize) -> (Vec<CtrlGate>, f64) {
    let u = g.core().matrix();
    let word = sk_decompose(net, &u, depth);
    let error = distance(word.matrix(), &u).expect("2x2");
    let t = g.targets()[0];
    let mut gates: Vec<CtrlGate> = word
        .letters()
        .iter()
        .map(|&l| CtrlGate::named(l, t))
        .collect();
    if let Some(first) = gates.first_mut() {
        // e^{iφ}·W ≈ U for φ = arg tr(W†U).
        let overlap: C64 = (&word.matrix().adjoint() * &u).trace();
        *first = first.clone().with_phase(g.phase() + overlap.arg());
    }
    (gates, error)
}
