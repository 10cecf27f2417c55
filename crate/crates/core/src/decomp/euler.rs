use std::f64::consts::PI;

use super::{DecompError, Result};
use crate::gates::{CoreOp, CtrlGate, NamedGate};
use crate::numerics::{Matrix, C64, TOL_UNITARY};
use crate::qspace::QType;

/// Below this, a rotation angle is dropped from emitted sequences.
pub const ANGLE_TOL: f64 = 1e-12;
const GIMBAL_TOL: f64 = 1e-12;

/// `U = e^{iα} · Rz(β) · Ry(γ) · Rz(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl EulerAngles {
    pub fn matrix(&self) -> Matrix {
        let rz = |t: f64| CoreOp::rz(t).matrix();
        let ry = CoreOp::ry(self.gamma).matrix();
        let m = &(&rz(self.beta) * &ry) * &rz(self.delta);
        m.scale(C64::from_polar(1.0, self.alpha))
    }
}

/// Maps `x` into (−π, π], returning the number of 2π shifts applied.
fn wrap(x: f64) -> (f64, u32) {
    let mut x = x;
    let mut flips = 0;
    while x > PI {
        x -= 2.0 * PI;
        flips += 1;
    }
    while x <= -PI {
        x += 2.0 * PI;
        flips += 1;
    }
    (x, flips)
}

/// ZYZ angles with γ ∈ [0, π] and β, δ ∈ (−π, π]. When γ is 0 or π only
/// one of β, δ is determined and δ is set to 0.
pub fn euler_decompose(u: &Matrix) -> Result<EulerAngles> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(DecompError::Shape(format!(
            "{}x{} is not 2x2",
            u.rows(),
            u.cols()
        )));
    }
    let defect = u.unitarity_defect().unwrap_or(f64::INFINITY);
    if defect > TOL_UNITARY {
        return Err(DecompError::NotUnitary(defect));
    }
    let mut alpha = u.det2().arg() / 2.0;
    let w = u.scale(C64::from_polar(1.0, -alpha));
    let (c, s) = (w[(0, 0)].norm(), w[(1, 0)].norm());
    let gamma = 2.0 * s.atan2(c);
    let (beta, delta) = if s <= GIMBAL_TOL {
        (2.0 * w[(1, 1)].arg(), 0.0)
    } else if c <= GIMBAL_TOL {
        (2.0 * w[(1, 0)].arg(), 0.0)
    } else {
        let (p, q) = (w[(1, 1)].arg(), w[(1, 0)].arg());
        (p + q, p - q)
    };
    // Each 2π shift of β or δ negates the rotation; compensate in α.
    let (beta, fb) = wrap(beta);
    let (delta, fd) = wrap(delta);
    alpha += PI * (fb + fd) as f64;
    let (alpha, _) = wrap(alpha);
    Ok(EulerAngles {
        alpha,
        beta,
        gamma,
        delta,
    })
}

/// Rewrites a gate with at most one control into rotations, CNOTs and X.
///
/// Uncontrolled: `Rz(δ), Ry(γ), Rz(β)` with phase α. One control:
/// `C, CNOT, B, CNOT, A` with `A·B·C = I`, then `Rz(α)` on the control
/// (plus phase α/2) to restore the controlled phase. A `CONTROL0` control
/// is conjugated by X. Zero rotations are dropped, so an identity gate
/// yields an empty list.
pub fn euler_gates(g: &CtrlGate) -> Result<Vec<CtrlGate>> {
    let targets = g.targets();
    let controls = g.controls();
    if targets.len() != 1 || controls.len() > 1 {
        return Err(DecompError::Precondition(format!(
            "euler stage needs one target and at most one control, got {g}"
        )));
    }
    let t = targets[0];
    let mut out = Vec::new();
    let mut phase = g.phase();
    let push_rot = |out: &mut Vec<CtrlGate>, core: CoreOp| {
        if let CoreOp::Rotation { angle, .. } = core {
            if angle.abs() > ANGLE_TOL {
                out.push(CtrlGate::single(core, t));
            }
        }
    };
    match controls.as_slice() {
        [] => {
            let e = euler_decompose(&g.core().matrix())?;
            push_rot(&mut out, CoreOp::rz(e.delta));
            push_rot(&mut out, CoreOp::ry(e.gamma));
            push_rot(&mut out, CoreOp::rz(e.beta));
            phase += e.alpha;
        }
        &[(c, qt)] => {
            let flip = qt == QType::Control0;
            let x_c = CtrlGate::named(NamedGate::X, c);
            if flip {
                out.push(x_c.clone());
            }
            if g.core() == &CoreOp::Named(NamedGate::X) {
                out.push(CtrlGate::cnot(c, t));
            } else {
                let e = euler_decompose(&g.core().matrix())?;
                let (b, gm, d) = (e.beta, e.gamma, e.delta);
                push_rot(&mut out, CoreOp::rz((d - b) / 2.0));
                out.push(CtrlGate::cnot(c, t));
                push_rot(&mut out, CoreOp::rz(-(d + b) / 2.0));
                push_rot(&mut out, CoreOp::ry(-gm / 2.0));
                out.push(CtrlGate::cnot(c, t));
                push_rot(&mut out, CoreOp::ry(gm / 2.0));
                push_rot(&mut out, CoreOp::rz(b));
                if e.alpha.abs() > ANGLE_TOL {
                    out.push(CtrlGate::single(CoreOp::rz(e.alpha), c));
                    phase += e.alpha / 2.0;
                }
            }
            if flip {
                out.push(x_c);
            }
        }
        _ => unreachable!(),
    }
    if let Some(first) = out.first_mut() {
        *first = first.clone().with_phase(first.phase() + phase);
    }
    Ok(out)
}
