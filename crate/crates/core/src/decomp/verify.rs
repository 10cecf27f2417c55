use std::fmt;

use crate::gates::{circuit_matrix, gate_matrix, zero_block, GateError};
use crate::ir::{format_path, ByteCode, Compiled, NodePath, Payload, Producer};
use crate::numerics::{distance, Matrix, UnitaryM};
use crate::qspace::{data_register, Qubit};

/// Child-product reconstruction at one interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCheck {
    pub path: NodePath,
    pub distance: f64,
    pub tol: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitCheck {
    pub distance: f64,
    pub tol: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub nodes: Vec<NodeCheck>,
    pub circuit: CircuitCheck,
    /// Ancillas return to |0⟩ on every data input.
    pub ancilla_clean: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.circuit.passed && self.ancilla_clean && self.nodes.iter().all(|n| n.passed)
    }

    pub fn failed_nodes(&self) -> impl Iterator<Item = &NodeCheck> {
        self.nodes.iter().filter(|n| !n.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.failed_nodes().count();
        writeln!(
            f,
            "node checks: {} of {} passed",
            self.nodes.len() - failed,
            self.nodes.len()
        )?;
        for n in self.failed_nodes() {
            write!(
                f,
                "  FAIL {} distance {:.3e} > {:.1e}",
                format_path(&n.path),
                n.distance,
                n.tol
            )?;
            if let Some(d) = &n.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "circuit: distance {:.3e} (tol {:.1e}) {}",
            self.circuit.distance,
            self.circuit.tol,
            if self.circuit.passed { "pass" } else { "FAIL" }
        )?;
        if let Some(d) = &self.circuit.detail {
            write!(f, " ({d})")?;
        }
        write!(
            f,
            "\nancilla clean: {}",
            if self.ancilla_clean { "yes" } else { "NO" }
        )
    }
}

/// Checks a compiled tree against `u`.
///
/// Every interior node must equal the product of its children up to phase.
/// The check is structural: tombstoned children still count and nodes
/// inserted by consolidation are skipped, so it holds before and after
/// optimization. Optimizer rewrites are covered by the whole-circuit check
/// on the live leaves. Nodes refined by Solovay-Kitaev, and the whole
/// circuit when any were, use `sk_budget` instead of `tol`.
pub fn verify(c: &Compiled, u: &UnitaryM, tol: f64, sk_budget: f64) -> VerifyReport {
    let data = data_register(c.data_qubits);
    let mut nodes = Vec::new();
    for (node, path) in c.tree.preorder() {
        if node.is_leaf() {
            continue;
        }
        let uses_sk = node
            .children
            .iter()
            .any(|ch| ch.lineage.producer == Producer::Sk);
        let tol = if uses_sk { sk_budget } else { tol };
        let (distance, detail) = match node_distance(node, &data) {
            Ok(d) => (d, None),
            Err(e) => (f64::INFINITY, Some(e)),
        };
        nodes.push(NodeCheck {
            path,
            passed: distance < tol,
            distance,
            tol,
            detail,
        });
    }

    let tol = if c.uses_sk() { sk_budget } else { tol };
    let (circuit, ancilla_clean) = match circuit_distance(c, u) {
        Ok(d) => (
            CircuitCheck {
                distance: d,
                tol,
                passed: d < tol,
                detail: None,
            },
            true,
        ),
        Err((msg, clean)) => (
            CircuitCheck {
                distance: f64::INFINITY,
                tol,
                passed: false,
                detail: Some(msg),
            },
            clean,
        ),
    };
    VerifyReport {
        nodes,
        circuit,
        ancilla_clean,
    }
}

fn payload_space(p: &Payload, data: &[Qubit]) -> Vec<Qubit> {
    match p {
        Payload::Unitary(_) => data.to_vec(),
        Payload::Gate(g) => {
            let mut qs = g.qubits().to_vec();
            qs.sort_by_key(|q| q.id);
            qs
        }
    }
}

fn payload_matrix(p: &Payload, space: &[Qubit]) -> Result<Matrix, String> {
    match p {
        Payload::Unitary(u) if 1usize << space.len() == u.dimension() => Ok(u.inflate()),
        Payload::Unitary(u) => Err(format!(
            "unitary of dimension {} on {} qubits",
            u.dimension(),
            space.len()
        )),
        Payload::Gate(g) => gate_matrix(g, space).map_err(|e| e.to_string()),
    }
}

fn node_distance(node: &ByteCode, data: &[Qubit]) -> Result<f64, String> {
    let base = payload_space(&node.payload, data);
    let kids: Vec<&ByteCode> = node
        .children
        .iter()
        .filter(|ch| ch.lineage.producer != Producer::Consolidate)
        .collect();
    let mut space = base.clone();
    for ch in &kids {
        for q in payload_space(&ch.payload, data) {
            if !space.iter().any(|s| s.id == q.id) {
                space.push(q);
            }
        }
    }
    space.sort_by_key(|q| q.id);
    let extra: Vec<Qubit> = space
        .iter()
        .copied()
        .filter(|q| !base.iter().any(|b| b.id == q.id))
        .collect();
    let mut product = Matrix::identity(1 << space.len());
    for ch in kids {
        let m = payload_matrix(&ch.payload, &space)?;
        product = &m * &product;
    }
    let block = zero_block(&product, &space, &extra).map_err(|e| e.to_string())?;
    let want = payload_matrix(&node.payload, &base)?;
    distance(&block, &want).map_err(|e| e.to_string())
}

/// Distance of the traced live circuit from `u`. Errors carry whether the
/// ancillas were still found clean.
fn circuit_distance(c: &Compiled, u: &UnitaryM) -> Result<f64, (String, bool)> {
    if u.dimension() != 1 << c.data_qubits {
        return Err((
            format!(
                "matrix dimension {} does not match {} data qubits",
                u.dimension(),
                c.data_qubits
            ),
            true,
        ));
    }
    let gates = c.tree.leaf_gates().map_err(|e| (e.to_string(), true))?;
    let mut all = data_register(c.data_qubits);
    all.extend((c.data_qubits..c.total_qubits).map(|i| Qubit::ancilla(i as u32)));
    let anc = &all[c.data_qubits..];
    let m = circuit_matrix(&gates, &all).map_err(|e| (e.to_string(), true))?;
    let block = zero_block(&m, &all, anc).map_err(|e| {
        let clean = !matches!(e, GateError::NotClean(_));
        (e.to_string(), clean)
    })?;
    distance(&block, &u.inflate()).map_err(|e| (e.to_string(), true))
}
