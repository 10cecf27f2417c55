use std::f64::consts::PI;

use super::{DecompError, Result};
use crate::gates::{CoreOp, CtrlGate, NamedGate};
use crate::numerics::{su2_from_quaternion, su2_to_quaternion, Matrix, C64};
use crate::qspace::{QDevice, QType, Qubit};

/// A square root `V` of a 2x2 unitary: `U = e^{iα}R_n(θ)` gives
/// `V = e^{iα/2}R_n(θ/2)`.
pub fn sqrt_unitary(u: &Matrix) -> Matrix {
    let det = u.det2();
    // Keep det = −1 on the +π branch so √Z is S.
    let arg = if det.re < 0.0 && det.im.abs() < 1e-15 {
        PI
    } else {
        det.arg()
    };
    let alpha = arg / 2.0;
    let w = u.scale(C64::from_polar(1.0, -alpha));
    let [a, b, c, d] = su2_to_quaternion(&w);
    let norm = (b * b + c * c + d * d).sqrt();
    let half = norm.atan2(a);
    let (nx, ny, nz) = if norm > 1e-15 {
        (b / norm, c / norm, d / norm)
    } else {
        (0.0, 0.0, 1.0)
    };
    let (s, co) = (half / 2.0).sin_cos();
    su2_from_quaternion([co, nx * s, ny * s, nz * s]).scale(C64::from_polar(1.0, alpha / 2.0))
}

/// Rewrites a single-target gate into gates with at most one control.
///
/// `CONTROL0` controls are conjugated by X. Two controls use the five-gate
/// `C-V, CNOT, C-V†, CNOT, C-V` identity with `V² = U`; more controls AND
/// pairs of controls into `c − 1` borrowed ancillas with Toffolis (each
/// expanded the same way), apply the core controlled by the last ancilla,
/// and uncompute. Ancillas return to the pool clean.
pub fn ctrl_decompose(g: &CtrlGate, device: &mut QDevice) -> Result<Vec<CtrlGate>> {
    let targets = g.targets();
    if targets.len() != 1 {
        return Err(DecompError::Precondition(format!(
            "{g} is not single-target"
        )));
    }
    let t = targets[0];
    let controls = g.controls();
    if controls.len() <= 1 {
        return Ok(vec![g.clone()]);
    }
    let flipped: Vec<Qubit> = controls
        .iter()
        .filter(|(_, qt)| *qt == QType::Control0)
        .map(|(q, _)| *q)
        .collect();
    let cs: Vec<Qubit> = controls.iter().map(|(q, _)| *q).collect();
    let core = g.core().clone();

    let mut body = Vec::new();
    if cs.len() == 2 {
        body.extend(barenco(&core, cs[0], cs[1], t));
    } else {
        let anc = device.borrow_ancilla(cs.len() - 1)?;
        let x = CoreOp::Named(NamedGate::X);
        let mut ladder = barenco(&x, cs[0], cs[1], anc[0]);
        for k in 1..anc.len() {
            ladder.extend(barenco(&x, anc[k - 1], cs[k + 1], anc[k]));
        }
        let last = *anc.last().unwrap();
        body.extend(ladder.iter().cloned());
        body.push(CtrlGate::controlled(core, &[(last, QType::Control1)], t)?);
        // The ladder is a product of involutions; undo it in reverse with
        // each gate inverted.
        body.extend(ladder.iter().rev().map(CtrlGate::inverse));
        device.release_ancilla(&anc)?;
    }

    let mut out: Vec<CtrlGate> = flipped
        .iter()
        .map(|&q| CtrlGate::named(NamedGate::X, q))
        .collect();
    out.extend(body);
    out.extend(flipped.iter().map(|&q| CtrlGate::named(NamedGate::X, q)));
    out[0] = out[0].clone().with_phase(out[0].phase() + g.phase());
    Ok(out)
}

/// Doubly controlled `core` on `t` (both controls active on |1⟩).
fn barenco(core: &CoreOp, a: Qubit, b: Qubit, t: Qubit) -> Vec<CtrlGate> {
    let v = CoreOp::from_matrix(sqrt_unitary(&core.matrix()));
    let vd = v.inverse();
    let on = |q: Qubit, c: CoreOp| {
        CtrlGate::controlled(c, &[(q, QType::Control1)], t).expect("distinct qubits")
    };
    vec![
        on(b, v.clone()),
        CtrlGate::cnot(a, b),
        on(b, vd),
        CtrlGate::cnot(a, b),
        on(a, v),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{circuit_matrix, gate_matrix, zero_block};
    use crate::numerics::haar_unitary;
    use crate::qspace::data_register;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn device(n: usize) -> QDevice {
        let mut d = QDevice::new(None);
        d.allocate_data(n).unwrap();
        d
    }

    /// Product over data + ancilla, restricted to ancillas in |0⟩.
    fn traced(gates: &[CtrlGate], dev: &QDevice) -> Matrix {
        let all = dev.qubits();
        let anc: Vec<Qubit> = all.iter().copied().filter(Qubit::is_ancilla).collect();
        let m = circuit_matrix(gates, &all).unwrap();
        zero_block(&m, &all, &anc).unwrap()
    }

    #[test]
    fn square_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut cases: Vec<Matrix> = (0..200).map(|_| haar_unitary(2, &mut rng)).collect();
        cases.extend(NamedGate::ALL.iter().map(|g| g.matrix()));
        cases.push(Matrix::identity(2).scale(C64::new(-1.0, 0.0)));
        for u in cases {
            let v = sqrt_unitary(&u);
            assert!((&v * &v).max_abs_diff(&u).unwrap() < 1e-12);
        }
        assert_eq!(
            CoreOp::from_matrix(sqrt_unitary(&NamedGate::Z.matrix())),
            CoreOp::Named(NamedGate::S)
        );
    }

    #[test]
    fn single_control_is_unchanged() {
        let cx = CtrlGate::cnot(Qubit::data(0), Qubit::data(1));
        assert_eq!(ctrl_decompose(&cx, &mut device(2)).unwrap(), vec![cx]);
    }

    #[test]
    fn toffoli() {
        let q = data_register(3);
        let ccx = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[(q[0], QType::Control1), (q[1], QType::Control1)],
            q[2],
        )
        .unwrap();
        let mut dev = device(3);
        let out = ctrl_decompose(&ccx, &mut dev).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|g| g.controls().len() <= 1));
        assert_eq!(dev.ancilla_count(), 0);
        let want = gate_matrix(&ccx, &q).unwrap();
        assert!(
            circuit_matrix(&out, &q)
                .unwrap()
                .max_abs_diff(&want)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn many_controls_with_ancilla() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for c in 2..=4usize {
            for _ in 0..10 {
                let q = data_register(c + 1);
                let controls: Vec<(Qubit, QType)> = q[..c]
                    .iter()
                    .map(|&x| {
                        (
                            x,
                            if rng.gen_bool(0.5) {
                                QType::Control1
                            } else {
                                QType::Control0
                            },
                        )
                    })
                    .collect();
                let core = CoreOp::Generic(haar_unitary(2, &mut rng));
                let g = CtrlGate::controlled(core, &controls, q[c])
                    .unwrap()
                    .with_phase(0.7);
                let mut dev = device(c + 1);
                let out = ctrl_decompose(&g, &mut dev).unwrap();
                assert!(out.iter().all(|x| x.controls().len() <= 1));
                assert_eq!(dev.ancilla_count(), if c > 2 { c - 1 } else { 0 });
                let want = gate_matrix(&g, &q).unwrap();
                let got = traced(&out, &dev);
                assert!(got.max_abs_diff(&want).unwrap() < 1e-10, "c = {c}");
                // Borrowing again reuses the same ancillas.
                let again = ctrl_decompose(&g, &mut dev).unwrap();
                assert_eq!(again, out);
            }
        }
    }

    #[test]
    fn cccx_uses_two_ancillas() {
        let q = data_register(4);
        let g = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[
                (q[0], QType::Control1),
                (q[1], QType::Control1),
                (q[2], QType::Control1),
            ],
            q[3],
        )
        .unwrap();
        let mut dev = device(4);
        let out = ctrl_decompose(&g, &mut dev).unwrap();
        assert_eq!(dev.ancilla_count(), 2);
        let want = gate_matrix(&g, &q).unwrap();
        assert!(traced(&out, &dev).max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let q = data_register(4);
        let g = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[
                (q[0], QType::Control1),
                (q[1], QType::Control1),
                (q[2], QType::Control1),
            ],
            q[3],
        )
        .unwrap();
        let mut dev = QDevice::new(Some(1));
        dev.allocate_data(4).unwrap();
        assert!(matches!(
            ctrl_decompose(&g, &mut dev),
            Err(DecompError::QSpace(_))
        ));
    }
}
