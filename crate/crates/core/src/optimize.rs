//! Sliding-window recombination over the live leaves of a compiled tree.
//!
//! Rewrites never delete nodes: consumed leaves are tombstoned and merged
//! gates are inserted as new siblings, so every gate keeps its lineage.

use std::f64::consts::PI;
use std::fmt;

use crate::gates::{grain_of, matmul, sorted, CoreOp, CtrlGate, GateGrain};
use crate::ir::{format_path, ByteCode, Compiled, Lineage, NodePath, Producer, FLAG_OPTIMIZED};
use crate::numerics::{Matrix, C64};

/// Rotation angles within this of a full period are dropped.
pub const ANGLE_TOL: f64 = 1e-12;
const TOL_TRIVIAL: f64 = 1e-12;

/// A rewrite of window positions `first < second`. `merged`, when present,
/// takes the place of `second`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub first: usize,
    pub second: usize,
    pub merged: Option<CtrlGate>,
}

pub trait WindowOperator {
    fn name(&self) -> &'static str;
    fn producer(&self) -> Producer;
    fn examine(&self, window: &[CtrlGate]) -> Option<Rewrite>;
}

/// Both gates block-diagonal on every shared qubit (or no shared qubits).
pub fn commutes(a: &CtrlGate, b: &CtrlGate) -> bool {
    a.qubits()
        .iter()
        .filter(|q| b.role_of(**q).is_some())
        .all(|&q| a.is_diagonal_on(q) && b.is_diagonal_on(q))
}

fn same_signature(a: &CtrlGate, b: &CtrlGate) -> bool {
    a.qubits() == b.qubits() && a.qtypes() == b.qtypes()
}

/// Whether the core is the identity, up to phase when uncontrolled.
fn trivial_core(core: &CoreOp, controlled: bool) -> bool {
    match core {
        CoreOp::Rotation { angle, .. } => {
            let period = if controlled { 4.0 * PI } else { 2.0 * PI };
            let r = angle.rem_euclid(period);
            r.min(period - r) < ANGLE_TOL
        }
        other => {
            let m = other.matrix();
            let scale = if controlled {
                C64::new(1.0, 0.0)
            } else {
                let tr = m.trace();
                tr / tr.norm().max(f64::MIN_POSITIVE)
            };
            let id = Matrix::identity(m.rows()).scale(scale);
            m.max_abs_diff(&id).is_ok_and(|d| d < TOL_TRIVIAL)
        }
    }
}

/// `b · a` when the pair shares a signature.
fn product(a: &CtrlGate, b: &CtrlGate) -> Option<CtrlGate> {
    let (a, b) = (sorted(a), sorted(b));
    if !same_signature(&a, &b) {
        return None;
    }
    matmul(&b, &a).ok()
}

fn is_trivial(g: &CtrlGate) -> bool {
    trivial_core(g.core(), !g.controls().is_empty())
}

/// Earliest `(i, j)` with every gate strictly between commuting with
/// `window[i]`, for which `accept` returns a rewrite.
fn scan<F>(window: &[CtrlGate], mut accept: F) -> Option<Rewrite>
where
    F: FnMut(&CtrlGate, &CtrlGate) -> Option<Option<CtrlGate>>,
{
    for i in 0..window.len() {
        for j in i + 1..window.len() {
            if let Some(merged) = accept(&window[i], &window[j]) {
                return Some(Rewrite {
                    first: i,
                    second: j,
                    merged,
                });
            }
            if !commutes(&window[i], &window[j]) {
                break;
            }
        }
    }
    None
}

/// Removes `g, g†` pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Annihilation;

impl WindowOperator for Annihilation {
    fn name(&self) -> &'static str {
        "annihilation"
    }

    fn producer(&self) -> Producer {
        Producer::Annihilate
    }

    fn examine(&self, window: &[CtrlGate]) -> Option<Rewrite> {
        scan(window, |a, b| match product(a, b) {
            Some(p) if is_trivial(&p) => Some(None),
            _ => None,
        })
    }
}

/// Merges gates with identical qubit signatures when the result stays at
/// or above the target granularity.
#[derive(Debug, Clone, Copy)]
pub struct Consolidation {
    pub granularity: GateGrain,
}

impl WindowOperator for Consolidation {
    fn name(&self) -> &'static str {
        "consolidation"
    }

    fn producer(&self) -> Producer {
        Producer::Consolidate
    }

    fn examine(&self, window: &[CtrlGate]) -> Option<Rewrite> {
        scan(window, |a, b| {
            let p = product(a, b)?;
            if is_trivial(&p) {
                Some(None)
            } else if grain_of(&p) >= self.granularity {
                Some(Some(p))
            } else {
                None
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PassReport {
    pub name: &'static str,
    pub rewrites: usize,
    pub tombstoned: usize,
    pub inserted: usize,
    /// Set when the step budget ran out before a fixpoint.
    pub exhausted: bool,
}

impl fmt::Display for PassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} rewrites, {} tombstoned, {} inserted",
            self.name, self.rewrites, self.tombstoned, self.inserted
        )?;
        if self.exhausted {
            write!(f, " (step budget exhausted)")?;
        }
        Ok(())
    }
}

fn live_gates(tree: &ByteCode, paths: &[NodePath]) -> Vec<CtrlGate> {
    paths
        .iter()
        .map(|p| {
            tree.node_at(p)
                .and_then(|n| n.payload.as_gate())
                .expect("live leaves hold gates")
                .clone()
        })
        .collect()
}

/// Slides a `window_size` window over the live leaves, applying the first
/// rewrite any operator offers, until a full slide changes nothing.
pub fn run_pass(tree: &mut ByteCode, op: &dyn WindowOperator, window_size: usize) -> PassReport {
    let mut report = PassReport {
        name: op.name(),
        ..PassReport::default()
    };
    let k = window_size.max(2);
    let mut paths = tree.leaf_paths();
    let budget = 10 * paths.len();
    let mut pos = 0;
    while pos + 1 < paths.len() {
        let end = (pos + k).min(paths.len());
        let window = live_gates(tree, &paths[pos..end]);
        let Some(rw) = op.examine(&window) else {
            if end == paths.len() {
                break;
            }
            pos += 1;
            continue;
        };
        if report.rewrites == budget {
            report.exhausted = true;
            break;
        }
        report.rewrites += 1;
        let (pa, pb) = (
            paths[pos + rw.first].clone(),
            paths[pos + rw.second].clone(),
        );
        apply(tree, op, &pa, &pb, rw.merged, report.rewrites, &mut report);
        paths = tree.leaf_paths();
        pos = (pos + rw.first).saturating_sub(k - 1);
    }
    report
}

fn apply(
    tree: &mut ByteCode,
    op: &dyn WindowOperator,
    pa: &[usize],
    pb: &[usize],
    merged: Option<CtrlGate>,
    ordinal: usize,
    report: &mut PassReport,
) {
    let verb = if merged.is_some() {
        "merged"
    } else {
        "cancelled"
    };
    for (p, other) in [(pa, pb), (pb, pa)] {
        let node = tree.node_at_mut(p).expect("live leaf");
        node.tombstone = true;
        node.lineage
            .note(&format!("{} {verb} with {}", op.name(), format_path(other)));
    }
    report.tombstoned += 2;
    if let Some(g) = merged {
        let (parent, idx) = pb.split_at(pb.len() - 1);
        let lineage = Lineage::new(op.producer(), ordinal as u32).with_notes(format!(
            "{} + {}",
            format_path(pa),
            format_path(pb)
        ));
        tree.node_at_mut(parent)
            .expect("parent exists")
            .children
            .insert(idx[0] + 1, ByteCode::gate(g, lineage));
        report.inserted += 1;
    }
}

/// Optimizers for a level: 0 none, 1 annihilation, 2 annihilation and
/// consolidation.
pub fn optimizers_for_level(
    level: u8,
    granularity: GateGrain,
) -> Vec<Box<dyn WindowOperator + Send + Sync>> {
    let mut ops: Vec<Box<dyn WindowOperator + Send + Sync>> = Vec::new();
    if level >= 1 {
        ops.push(Box::new(Annihilation));
    }
    if level >= 2 {
        ops.push(Box::new(Consolidation { granularity }));
    }
    ops
}

/// Runs each optimizer to a fixpoint in order. With more than one, the
/// first runs once more at the end, since merges can expose new pairs.
pub fn run_passes(
    c: &mut Compiled,
    ops: &[Box<dyn WindowOperator + Send + Sync>],
    window_size: usize,
) -> Vec<PassReport> {
    let mut reports: Vec<PassReport> = ops
        .iter()
        .map(|op| run_pass(&mut c.tree, op.as_ref(), window_size))
        .collect();
    if ops.len() > 1 {
        reports.push(run_pass(&mut c.tree, ops[0].as_ref(), window_size));
    }
    if !ops.is_empty() {
        c.flags |= FLAG_OPTIMIZED;
    }
    reports
}

/// Runs the passes of an optimization level over `c`.
pub fn optimize(c: &mut Compiled, level: u8, window_size: usize) -> Vec<PassReport> {
    let ops = optimizers_for_level(level, c.granularity);
    run_passes(c, &ops, window_size)
}
