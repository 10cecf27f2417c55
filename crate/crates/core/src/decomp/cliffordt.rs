use std::f64::consts::FRAC_PI_2;

use super::{DecompError, Result};
use crate::gates::{grain_of, CoreOp, CtrlGate, GateGrain, NamedGate};

/// Rewrites a named single-qubit gate into `{H, S, T}`; CNOT and gates
/// already in the alphabet pass through. The returned phase satisfies
/// `g = e^{i·phase} · product(gates)`; it is also folded into the first gate.
pub fn cliffordt_decompose(g: &CtrlGate) -> Result<(Vec<CtrlGate>, f64)> {
    if grain_of(g) == GateGrain::CliffordT {
        return Ok((vec![g.clone()], 0.0));
    }
    let name = match (g.core(), g.controls().is_empty()) {
        (CoreOp::Named(n), true) => *n,
        _ => {
            return Err(DecompError::Precondition(format!(
                "{g} is not a named single-qubit gate"
            )))
        }
    };
    use NamedGate::*;
    let (word, phase): (&[NamedGate], f64) = match name {
        X => (&[H, S, S, H], 0.0),
        // H·S²·H·S² = X·Z = −iY.
        Y => (&[S, S, H, S, S, H], FRAC_PI_2),
        Z => (&[S, S], 0.0),
        SD => (&[S, S, S], 0.0),
        TD => (&[T, T, T, T, T, T, T], 0.0),
        H | S | T => unreachable!(),
    };
    let t = g.targets()[0];
    let mut gates: Vec<CtrlGate> = word.iter().map(|&n| CtrlGate::named(n, t)).collect();
    gates[0] = gates[0].clone().with_phase(g.phase() + phase);
    Ok((gates, phase))
}
