//! `ByteCode`: the compilation tree.
//!
//! Every interior node equals the ordered product of its live children, with
//! `children[0]` applied first. Leaves hold placed gates; optimizers mark
//! leaves dead with a tombstone instead of removing them, so lineage can
//! always be traced back through the tree.

mod qco;

use std::fmt;

use thiserror::Error;

use crate::gates::{CtrlGate, GateGrain};
use crate::numerics::UnitaryM;

pub use qco::{deserialize, serialize, QcoError, FLAG_OPTIMIZED, FLAG_SK, QCO_MAGIC, QCO_VERSION};

/// Index path from the root: `path[k]` is a child index at depth `k + 1`.
pub type NodePath = Vec<usize>;

/// Slash-separated path, `/` for the root.
pub fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".into();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("leaf at {0:?} still holds a unitary (compilation incomplete)")]
    Incomplete(NodePath),
    #[error("no node at path {0:?}")]
    Unreachable(NodePath),
    #[error("node is not reachable from this tree")]
    NotInTree,
}

/// Which stage created a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Producer {
    Root,
    Tl,
    Gray,
    Ctrl,
    Euler,
    CliffordT,
    Sk,
    Annihilate,
    Consolidate,
    Convert,
}

impl Producer {
    pub const ALL: [Producer; 10] = [
        Producer::Root,
        Producer::Tl,
        Producer::Gray,
        Producer::Ctrl,
        Producer::Euler,
        Producer::CliffordT,
        Producer::Sk,
        Producer::Annihilate,
        Producer::Consolidate,
        Producer::Convert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Producer::Root => "root",
            Producer::Tl => "tl_decompose",
            Producer::Gray => "gray_decompose",
            Producer::Ctrl => "ctrl_decompose",
            Producer::Euler => "euler_decompose",
            Producer::CliffordT => "cliffordt_decompose",
            Producer::Sk => "sk_decompose",
            Producer::Annihilate => "annihilate",
            Producer::Consolidate => "consolidate",
            Producer::Convert => "convert",
        }
    }

    pub fn to_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Producer> {
        Producer::ALL.get(v as usize).copied()
    }
}

impl fmt::Display for Producer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lineage {
    pub producer: Producer,
    /// Position among siblings at creation time.
    pub ordinal: u32,
    pub notes: String,
}

impl Lineage {
    pub fn new(producer: Producer, ordinal: u32) -> Self {
        Lineage {
            producer,
            ordinal,
            notes: String::new(),
        }
    }

    pub fn root() -> Self {
        Lineage::new(Producer::Root, 0)
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// Appends a `;`-separated note.
    pub fn note(&mut self, text: &str) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text);
    }
}

impl fmt::Display for Lineage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.producer, self.ordinal)?;
        if !self.notes.is_empty() {
            write!(f, " ({})", self.notes)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Unitary(UnitaryM),
    Gate(CtrlGate),
}

impl Payload {
    pub fn as_gate(&self) -> Option<&CtrlGate> {
        match self {
            Payload::Gate(g) => Some(g),
            Payload::Unitary(_) => None,
        }
    }

    pub fn as_unitary(&self) -> Option<&UnitaryM> {
        match self {
            Payload::Unitary(u) => Some(u),
            Payload::Gate(_) => None,
        }
    }

    pub fn adjoint(&self) -> Payload {
        match self {
            Payload::Unitary(u) => Payload::Unitary(u.adjoint()),
            Payload::Gate(g) => Payload::Gate(g.inverse()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ByteCode {
    pub payload: Payload,
    pub children: Vec<ByteCode>,
    pub lineage: Lineage,
    pub tombstone: bool,
}

impl ByteCode {
    pub fn new(payload: Payload, lineage: Lineage) -> Self {
        ByteCode {
            payload,
            children: Vec::new(),
            lineage,
            tombstone: false,
        }
    }

    pub fn unitary(u: UnitaryM, lineage: Lineage) -> Self {
        ByteCode::new(Payload::Unitary(u), lineage)
    }

    pub fn gate(g: CtrlGate, lineage: Lineage) -> Self {
        ByteCode::new(Payload::Gate(g), lineage)
    }

    pub fn with_children(mut self, children: Vec<ByteCode>) -> Self {
        self.children = children;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Conjugate transpose: adjoint payloads, children reversed.
    pub fn herm(&self) -> ByteCode {
        ByteCode {
            payload: self.payload.adjoint(),
            children: self.children.iter().rev().map(ByteCode::herm).collect(),
            lineage: self.lineage.clone(),
            tombstone: self.tombstone,
        }
    }

    pub fn preorder(&self) -> Preorder<'_> {
        Preorder {
            stack: vec![(self, Vec::new())],
        }
    }

    /// Exact reverse of [`ByteCode::preorder`].
    pub fn reverse_preorder(&self) -> ReversePreorder<'_> {
        ReversePreorder {
            stack: vec![(self, Vec::new(), false)],
        }
    }

    pub fn node_count(&self) -> usize {
        self.preorder().count()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ByteCode::depth).max().unwrap_or(0)
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&ByteCode> {
        path.iter().try_fold(self, |n, &i| n.children.get(i))
    }

    pub fn node_at_mut(&mut self, path: &[usize]) -> Option<&mut ByteCode> {
        path.iter().try_fold(self, |n, &i| n.children.get_mut(i))
    }

    /// Paths of the live leaves in application order. A tombstone hides
    /// its whole subtree.
    pub fn leaf_paths(&self) -> Vec<NodePath> {
        self.preorder()
            .filter(|(n, path)| n.is_leaf() && !self.hidden(path))
            .map(|(_, path)| path)
            .collect()
    }

    fn hidden(&self, path: &[usize]) -> bool {
        let mut node = self;
        if node.tombstone {
            return true;
        }
        for &i in path {
            node = &node.children[i];
            if node.tombstone {
                return true;
            }
        }
        false
    }

    /// The executable circuit: live leaf gates in application order.
    /// Identity unitaries at leaves contribute nothing.
    pub fn leaf_gates(&self) -> Result<Vec<CtrlGate>, IrError> {
        let mut out = Vec::new();
        for path in self.leaf_paths() {
            match &self.node_at(&path).expect("leaf path resolves").payload {
                Payload::Gate(g) => out.push(g.clone()),
                Payload::Unitary(u) if u.is_identity() => {}
                Payload::Unitary(_) => return Err(IrError::Incomplete(path)),
            }
        }
        Ok(out)
    }

    /// Lineage records from the root down to the node at `path`, inclusive.
    pub fn trace_path(&self, path: &[usize]) -> Result<Vec<Lineage>, IrError> {
        let mut node = self;
        let mut out = vec![node.lineage.clone()];
        for &i in path {
            node = node
                .children
                .get(i)
                .ok_or_else(|| IrError::Unreachable(path.to_vec()))?;
            out.push(node.lineage.clone());
        }
        Ok(out)
    }

    /// Path of `node`, identified by address, within this tree.
    pub fn path_of(&self, node: &ByteCode) -> Option<NodePath> {
        self.preorder()
            .find(|(n, _)| std::ptr::eq(*n, node))
            .map(|(_, p)| p)
    }

    /// Lineage from the root to `leaf`, which must be a node of this tree.
    pub fn trace_gate(&self, leaf: &ByteCode) -> Result<Vec<Lineage>, IrError> {
        let path = self.path_of(leaf).ok_or(IrError::NotInTree)?;
        self.trace_path(&path)
    }

    /// Finest grain among live leaves' minimum, i.e. the circuit's grain.
    pub fn min_leaf_grain(&self) -> Option<GateGrain> {
        self.leaf_gates()
            .ok()?
            .iter()
            .map(crate::gates::grain_of)
            .min()
    }
}

/// Depth-first, node before children. Yields each node with its path.
pub struct Preorder<'a> {
    stack: Vec<(&'a ByteCode, NodePath)>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = (&'a ByteCode, NodePath);

    fn next(&mut self) -> Option<Self::Item> {
        let (node, path) = self.stack.pop()?;
        for (i, c) in node.children.iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(i);
            self.stack.push((c, p));
        }
        Some((node, path))
    }
}

/// Children last-to-first, each subtree reversed, then the node.
pub struct ReversePreorder<'a> {
    stack: Vec<(&'a ByteCode, NodePath, bool)>,
}

impl<'a> Iterator for ReversePreorder<'a> {
    type Item = (&'a ByteCode, NodePath);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (node, path, expanded) = self.stack.pop()?;
            if expanded || node.is_leaf() {
                return Some((node, path));
            }
            self.stack.push((node, path.clone(), true));
            for (i, c) in node.children.iter().enumerate() {
                let mut p = path.clone();
                p.push(i);
                self.stack.push((c, p, false));
            }
        }
    }
}

/// A compiled tree with the device facts needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub tree: ByteCode,
    pub data_qubits: usize,
    pub total_qubits: usize,
    pub granularity: GateGrain,
    pub flags: u16,
}

impl Compiled {
    pub fn ancilla_qubits(&self) -> usize {
        self.total_qubits - self.data_qubits
    }

    pub fn uses_sk(&self) -> bool {
        self.flags & FLAG_SK != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{circuit_matrix, NamedGate};
    use crate::numerics::{distance, Matrix};
    use crate::qspace::Qubit;

    fn leaf(g: NamedGate, ordinal: u32) -> ByteCode {
        ByteCode::gate(
            CtrlGate::named(g, Qubit::data(0)),
            Lineage::new(Producer::Gray, ordinal),
        )
    }

    fn inner(children: Vec<ByteCode>, ordinal: u32) -> ByteCode {
        let gates: Vec<CtrlGate> = children
            .iter()
            .flat_map(|c| c.leaf_gates().unwrap())
            .collect();
        let m = circuit_matrix(&gates, &[Qubit::data(0)]).unwrap();
        ByteCode::unitary(
            UnitaryM::new(2, vec![0, 1], m).unwrap(),
            Lineage::new(Producer::Tl, ordinal),
        )
        .with_children(children)
    }

    /// 7 nodes, depth 3.
    fn sample() -> ByteCode {
        let a = inner(vec![leaf(NamedGate::H, 0), leaf(NamedGate::T, 1)], 0);
        let b = inner(vec![leaf(NamedGate::S, 0), leaf(NamedGate::X, 1)], 1);
        let mut root = inner(vec![a, b], 0);
        root.lineage = Lineage::root();
        root
    }

    #[test]
    fn leaf_predicates() {
        let l = leaf(NamedGate::H, 0);
        assert!(l.is_leaf());
        let mut t = l.clone();
        t.tombstone = true;
        assert!(t.is_leaf());
        assert!(!sample().is_leaf());
    }

    #[test]
    fn preorder_and_reverse() {
        let single = leaf(NamedGate::H, 0);
        assert_eq!(single.preorder().count(), 1);
        assert_eq!(single.reverse_preorder().count(), 1);

        let two = ByteCode::gate(
            CtrlGate::named(NamedGate::H, Qubit::data(0)),
            Lineage::root(),
        )
        .with_children(vec![leaf(NamedGate::X, 0), leaf(NamedGate::Y, 1)]);
        let fwd: Vec<NodePath> = two.preorder().map(|(_, p)| p).collect();
        assert_eq!(fwd, vec![vec![], vec![0], vec![1]]);
        let rev: Vec<NodePath> = two.reverse_preorder().map(|(_, p)| p).collect();
        assert_eq!(rev, vec![vec![1], vec![0], vec![]]);

        let t = sample();
        let fwd: Vec<NodePath> = t.preorder().map(|(_, p)| p).collect();
        let mut rev: Vec<NodePath> = t.reverse_preorder().map(|(_, p)| p).collect();
        assert_eq!(fwd.len(), 7);
        rev.reverse();
        assert_eq!(fwd, rev);
        for (i, p) in fwd.iter().enumerate() {
            for q in &fwd[i + 1..] {
                assert!(
                    !(q.len() < p.len() && p.starts_with(q)),
                    "descendant before parent"
                );
            }
        }
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn leaf_gates_skip_tombstones() {
        let mut t = sample();
        let names = |t: &ByteCode| -> Vec<String> {
            t.leaf_gates()
                .unwrap()
                .iter()
                .map(|g| g.core().to_string())
                .collect()
        };
        assert_eq!(names(&t), vec!["H", "T", "S", "X"]);
        t.node_at_mut(&[0, 1]).unwrap().tombstone = true;
        assert_eq!(names(&t), vec!["H", "S", "X"]);
        t.node_at_mut(&[1]).unwrap().tombstone = true;
        assert_eq!(names(&t), vec!["H"]);

        let x = UnitaryM::deflate(&crate::gates::NamedGate::X.matrix()).unwrap();
        let unfinished = ByteCode::unitary(x, Lineage::root());
        assert!(matches!(
            unfinished.leaf_gates(),
            Err(IrError::Incomplete(_))
        ));
        let empty = ByteCode::unitary(UnitaryM::identity(2), Lineage::root());
        assert!(empty.leaf_gates().unwrap().is_empty());
    }

    #[test]
    fn herm_reverses_and_conjugates() {
        let s = leaf(NamedGate::S, 0);
        assert_eq!(s.herm().payload.as_gate().unwrap().core().to_string(), "SD");

        let t = sample();
        let h = t.herm();
        let q = [Qubit::data(0)];
        let fwd = circuit_matrix(&t.leaf_gates().unwrap(), &q).unwrap();
        let back = circuit_matrix(&h.leaf_gates().unwrap(), &q).unwrap();
        assert!(distance(&back, &fwd.adjoint()).unwrap() < 1e-12);
        // Each interior node of the conjugate still matches its children.
        for (node, _) in h.preorder().filter(|(n, _)| !n.is_leaf()) {
            let prod = circuit_matrix(&node.leaf_gates().unwrap(), &q).unwrap();
            let own = node.payload.as_unitary().unwrap().inflate();
            assert!(distance(&prod, &own).unwrap() < 1e-12);
        }
        assert_eq!(h.herm(), t);
        assert!(Matrix::identity(2).is_identity(0.0));
    }

    #[test]
    fn trace_records_root_to_leaf() {
        let t = sample();
        assert_eq!(t.trace_path(&[]).unwrap(), vec![Lineage::root()]);
        let trail = t.trace_path(&[1, 0]).unwrap();
        let producers: Vec<Producer> = trail.iter().map(|l| l.producer).collect();
        assert_eq!(
            producers,
            vec![Producer::Root, Producer::Tl, Producer::Gray]
        );
        assert_eq!(trail[1].ordinal, 1);
        assert!(matches!(t.trace_path(&[5]), Err(IrError::Unreachable(_))));

        let leaf_ref = t.node_at(&[0, 1]).unwrap();
        assert_eq!(t.trace_gate(leaf_ref).unwrap().len(), 3);
        let stranger = leaf(NamedGate::H, 0);
        assert_eq!(t.trace_gate(&stranger), Err(IrError::NotInTree));

        let mut t = t;
        let n = t.node_at_mut(&[0, 0]).unwrap();
        n.tombstone = true;
        n.lineage.note("annihilate: paired with [0, 1]");
        let trail = t.trace_path(&[0, 0]).unwrap();
        assert!(trail.last().unwrap().notes.contains("annihilate"));
    }

    #[test]
    fn producer_codes_round_trip() {
        for p in Producer::ALL {
            assert_eq!(Producer::from_u8(p.to_u8()), Some(p));
        }
        assert_eq!(Producer::from_u8(10), None);
    }
}
