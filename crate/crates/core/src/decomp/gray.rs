use super::{DecompError, Result};
use crate::gates::{CoreOp, CtrlGate, NamedGate};
use crate::numerics::{Matrix, UnitaryM, C64, ONE, TOL_IDENTITY};
use crate::qspace::{QType, Qubit};

/// Turns a two-level factor into gates over `space` (application order).
///
/// A generic factor on indices `(i, j)` walks `i` towards `j` along a Gray
/// path flipping differing bits from the least significant upward; each step
/// but the last is a fully controlled X. The core then acts on the final
/// differing qubit, after which the ladder is undone. Diagonal factors skip
/// the ladder and become one controlled phase per index.
pub fn gray_decompose(f: &UnitaryM, space: &[Qubit]) -> Result<Vec<CtrlGate>> {
    let k = space.len();
    if f.dimension() != 1 << k {
        return Err(DecompError::Shape(format!(
            "factor of dimension {} on {k} qubits",
            f.dimension()
        )));
    }
    let idx = f.core_indices();
    let core = f.core();
    match idx.len() {
        0 => Ok(Vec::new()),
        1 => Ok(phase_gate(idx[0], core[(0, 0)], space)
            .into_iter()
            .collect()),
        2 if core.is_diagonal(TOL_IDENTITY) => Ok([(idx[0], core[(0, 0)]), (idx[1], core[(1, 1)])]
            .into_iter()
            .filter_map(|(i, d)| phase_gate(i, d, space))
            .collect()),
        2 => ladder(idx[0], idx[1], core, space),
        n => Err(DecompError::Shape(format!("factor with {n} core indices"))),
    }
}

fn bit(i: usize, p: usize, k: usize) -> usize {
    (i >> (k - 1 - p)) & 1
}

/// Controls on every qubit except `target`, activated by the bits of `state`.
fn controls_for(state: usize, target: usize, space: &[Qubit]) -> Vec<(Qubit, QType)> {
    let k = space.len();
    (0..k)
        .filter(|&p| p != target)
        .map(|p| {
            let t = if bit(state, p, k) == 1 {
                QType::Control1
            } else {
                QType::Control0
            };
            (space[p], t)
        })
        .collect()
}

/// `|index⟩ ↦ d|index⟩`, as a controlled diagonal on the last qubit.
fn phase_gate(index: usize, d: C64, space: &[Qubit]) -> Option<CtrlGate> {
    if (d - ONE).norm() <= TOL_IDENTITY {
        return None;
    }
    let k = space.len();
    let t = k - 1;
    let core = if bit(index, t, k) == 1 {
        Matrix::diag(&[ONE, d])
    } else {
        Matrix::diag(&[d, ONE])
    };
    let g = CtrlGate::controlled(
        CoreOp::from_matrix(core),
        &controls_for(index, t, space),
        space[t],
    )
    .expect("controls are distinct from the target");
    Some(g)
}

fn ladder(i: usize, j: usize, core: &Matrix, space: &[Qubit]) -> Result<Vec<CtrlGate>> {
    let k = space.len();
    let diff: Vec<usize> = (0..k).rev().filter(|&p| bit(i ^ j, p, k) == 1).collect();
    let (&last, steps) = diff.split_last().expect("i != j");
    let mut state = i;
    let mut up = Vec::with_capacity(steps.len());
    for &p in steps {
        let g = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &controls_for(state, p, space),
            space[p],
        )
        .expect("controls are distinct from the target");
        up.push(g);
        state ^= 1 << (k - 1 - p);
    }
    // `state` now plays the role of `i` and differs from `j` only at `last`.
    let oriented = if bit(state, last, k) == 0 {
        core.clone()
    } else {
        let x = NamedGate::X.matrix();
        &(&x * core) * &x
    };
    let mid = CtrlGate::controlled(
        CoreOp::from_matrix(oriented),
        &controls_for(state, last, space),
        space[last],
    )
    .expect("controls are distinct from the target");
    let mut out = up.clone();
    out.push(mid);
    out.extend(up.into_iter().rev());
    Ok(out)
}
