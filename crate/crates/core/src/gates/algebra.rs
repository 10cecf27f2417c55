use super::{CoreOp, CtrlGate, GateError, Result};
use crate::numerics::{Matrix, UnitaryM, C64};
use crate::qspace::{QType, Qubit};

/// Cleanliness tolerance when tracing out non-idler qubits.
const TOL_CLEAN: f64 = 1e-9;

struct Layout {
    ctrl_mask: usize,
    ctrl_val: usize,
    /// Bit masks of the targets, first target = most significant core bit.
    target_masks: Vec<usize>,
    all_targets: usize,
}

fn position(space: &[Qubit], q: Qubit) -> Option<usize> {
    space.iter().position(|p| p.id == q.id)
}

fn layout(g: &CtrlGate, space: &[Qubit]) -> Result<Layout> {
    let k = space.len();
    let mut l = Layout {
        ctrl_mask: 0,
        ctrl_val: 0,
        target_masks: Vec::new(),
        all_targets: 0,
    };
    for (&q, &t) in g.qubits.iter().zip(&g.qtypes) {
        if t == QType::Idler {
            continue;
        }
        let p = position(space, q).ok_or(GateError::MissingQubit(q))?;
        let mask = 1usize << (k - 1 - p);
        match t {
            QType::Target => {
                l.target_masks.push(mask);
                l.all_targets |= mask;
            }
            QType::Control1 => {
                l.ctrl_mask |= mask;
                l.ctrl_val |= mask;
            }
            QType::Control0 => l.ctrl_mask |= mask,
            QType::Idler => unreachable!(),
        }
    }
    Ok(l)
}

/// Left-multiplies `m` (rows indexed over `space`) by the gate: `m ← G·m`.
pub fn apply_gate(g: &CtrlGate, m: &mut Matrix, space: &[Qubit]) -> Result<()> {
    let dim = 1usize << space.len();
    if m.rows() != dim {
        return Err(GateError::Invalid(format!(
            "matrix has {} rows for a {}-qubit space",
            m.rows(),
            space.len()
        )));
    }
    let l = layout(g, space)?;
    let core = g.core.matrix();
    let sub = 1usize << l.target_masks.len();
    let offsets: Vec<usize> = (0..sub)
        .map(|c| {
            l.target_masks
                .iter()
                .enumerate()
                .filter(|(b, _)| c >> (l.target_masks.len() - 1 - b) & 1 == 1)
                .fold(0, |acc, (_, &mask)| acc | mask)
        })
        .collect();
    let mut gathered = vec![C64::new(0.0, 0.0); sub];
    for col in 0..m.cols() {
        for base in 0..dim {
            if base & l.all_targets != 0 || base & l.ctrl_mask != l.ctrl_val {
                continue;
            }
            for (c, &off) in offsets.iter().enumerate() {
                gathered[c] = m[(base | off, col)];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, &v) in gathered.iter().enumerate() {
                    acc += core[(r, c)] * v;
                }
                m[(base | off, col)] = acc;
            }
        }
    }
    if g.phase != 0.0 {
        *m = m.scale(C64::from_polar(1.0, g.phase));
    }
    Ok(())
}

/// Dense matrix of `g` over the ordered `space`.
pub fn gate_matrix(g: &CtrlGate, space: &[Qubit]) -> Result<Matrix> {
    let mut m = Matrix::identity(1 << space.len());
    apply_gate(g, &mut m, space)?;
    Ok(m)
}

/// Product of gates in application order: `gates[0]` is applied first.
pub fn circuit_matrix<'a, I>(gates: I, space: &[Qubit]) -> Result<Matrix>
where
    I: IntoIterator<Item = &'a CtrlGate>,
{
    let mut m = Matrix::identity(1 << space.len());
    for g in gates {
        apply_gate(g, &mut m, space)?;
    }
    Ok(m)
}

fn union_space(a: &CtrlGate, b: &CtrlGate) -> Vec<Qubit> {
    let mut qs: Vec<Qubit> = a.qubits.iter().chain(&b.qubits).copied().collect();
    qs.sort();
    qs.dedup_by_key(|q| q.id);
    qs
}

/// `a · b` as matrices (`b` applied first).
pub fn matmul(a: &CtrlGate, b: &CtrlGate) -> Result<CtrlGate> {
    if a.qubits == b.qubits && a.qtypes == b.qtypes {
        let core = match (&a.core, &b.core) {
            (CoreOp::Rotation { axis: ax, angle: x }, CoreOp::Rotation { axis: bx, angle: y })
                if ax == bx =>
            {
                CoreOp::Rotation {
                    axis: *ax,
                    angle: x + y,
                }
            }
            _ => CoreOp::from_matrix(&a.core.matrix() * &b.core.matrix()),
        };
        return Ok(CtrlGate {
            qubits: a.qubits.clone(),
            qtypes: a.qtypes.clone(),
            core,
            phase: a.phase + b.phase,
        });
    }
    let space = union_space(a, b);
    let m = &gate_matrix(a, &space)? * &gate_matrix(b, &space)?;
    convert(&UnitaryM::deflate(&m)?, &space)
}

/// Adds `extra` qubits as idlers.
pub fn expand(g: &CtrlGate, extra: &[Qubit]) -> Result<CtrlGate> {
    let mut out = g.clone();
    for &q in extra {
        if out.qubits.iter().any(|p| p.id == q.id) {
            return Err(GateError::Overlap(q));
        }
        out.qubits.push(q);
        out.qtypes.push(QType::Idler);
    }
    Ok(out)
}

/// Removes `removed` qubits, keeping the block where they are |0⟩.
///
/// Idlers drop out directly. Any other removed qubit must be ancilla-clean:
/// the gate may not move amplitude out of (or into) its |0⟩ subspace.
pub fn trace(g: &CtrlGate, removed: &[Qubit]) -> Result<CtrlGate> {
    for &q in removed {
        if g.role_of(q).is_none() {
            return Err(GateError::MissingQubit(q));
        }
    }
    let is_removed = |q: &Qubit| removed.iter().any(|r| r.id == q.id);
    let active: Vec<Qubit> = removed
        .iter()
        .copied()
        .filter(|&q| g.role_of(q) != Some(QType::Idler))
        .collect();
    if active.is_empty() {
        let (qubits, qtypes): (Vec<Qubit>, Vec<QType>) = g
            .qubits
            .iter()
            .zip(&g.qtypes)
            .filter(|(q, _)| !is_removed(q))
            .map(|(&q, &t)| (q, t))
            .unzip();
        return CtrlGate::new(qubits, qtypes, g.core.clone()).map(|c| c.with_phase(g.phase));
    }
    let space: Vec<Qubit> = g.qubits.clone();
    let remaining: Vec<Qubit> = space.iter().copied().filter(|q| !is_removed(q)).collect();
    let unphased = CtrlGate {
        phase: 0.0,
        ..g.clone()
    };
    let block = zero_block(&gate_matrix(&unphased, &space)?, &space, &active)?;
    if remaining.is_empty() {
        return Err(GateError::Invalid("cannot trace out every qubit".into()));
    }
    let mut out = convert(&UnitaryM::deflate(&block)?, &remaining)?;
    out.phase = g.phase;
    Ok(out)
}

/// Restricts `m` (over `space`) to the block where every `removed` qubit is
/// |0⟩, failing if amplitude leaks between that block and its complement.
pub fn zero_block(m: &Matrix, space: &[Qubit], removed: &[Qubit]) -> Result<Matrix> {
    let k = space.len();
    let masks: Vec<(Qubit, usize)> = removed
        .iter()
        .map(|&q| {
            position(space, q)
                .map(|p| (q, 1usize << (k - 1 - p)))
                .ok_or(GateError::MissingQubit(q))
        })
        .collect::<Result<_>>()?;
    let removed_mask = masks.iter().fold(0, |acc, (_, m)| acc | m);
    let kept: Vec<usize> = (0..1usize << k).filter(|i| i & removed_mask == 0).collect();
    for &(q, mask) in &masks {
        for &c in &kept {
            let leak: f64 = (0..1usize << k)
                .filter(|r| r & mask != 0)
                .map(|r| m[(r, c)].norm_sqr())
                .sum();
            if leak.sqrt() > TOL_CLEAN {
                return Err(GateError::NotClean(q));
            }
        }
    }
    let mut block = Matrix::zeros(kept.len(), kept.len());
    for (a, &r) in kept.iter().enumerate() {
        for (b, &c) in kept.iter().enumerate() {
            block[(a, b)] = m[(r, c)];
        }
    }
    Ok(block)
}

/// Reorders qubits by ascending id, permuting a multi-target core to match.
pub fn sorted(g: &CtrlGate) -> CtrlGate {
    let mut order: Vec<usize> = (0..g.qubits.len()).collect();
    order.sort_by_key(|&i| g.qubits[i].id);
    let qubits: Vec<Qubit> = order.iter().map(|&i| g.qubits[i]).collect();
    let qtypes: Vec<QType> = order.iter().map(|&i| g.qtypes[i]).collect();
    let old_targets = g.targets();
    let core = match &g.core {
        CoreOp::Generic(m) if old_targets.len() > 1 => {
            let t = old_targets.len();
            let new_targets: Vec<Qubit> = qubits
                .iter()
                .zip(&qtypes)
                .filter(|(_, &ty)| ty == QType::Target)
                .map(|(&q, _)| q)
                .collect();
            // new target position j holds old target position src[j]
            let src: Vec<usize> = new_targets
                .iter()
                .map(|q| old_targets.iter().position(|p| p.id == q.id).unwrap())
                .collect();
            let remap = |new_idx: usize| -> usize {
                (0..t).fold(0, |acc, j| {
                    let bit = new_idx >> (t - 1 - j) & 1;
                    acc | bit << (t - 1 - src[j])
                })
            };
            let n = m.rows();
            let mut out = Matrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] = m[(remap(r), remap(c))];
                }
            }
            CoreOp::Generic(out)
        }
        other => other.clone(),
    };
    CtrlGate {
        qubits,
        qtypes,
        core,
        phase: g.phase,
    }
}

/// Places a unitary on `space`, inferring a control pattern when the core
/// indices are exactly the indices with fixed bits outside a target subset.
pub fn convert(u: &UnitaryM, space: &[Qubit]) -> Result<CtrlGate> {
    let dim = u.dimension();
    if !dim.is_power_of_two() {
        return Err(GateError::NotPowerOfTwo(dim));
    }
    let k = space.len();
    if dim != 1 << k {
        return Err(GateError::Invalid(format!(
            "dimension {dim} does not match a {k}-qubit space"
        )));
    }
    if k == 0 {
        return Err(GateError::Invalid("empty qubit space".into()));
    }
    let idx = u.core_indices();
    if idx.is_empty() {
        let qtypes = (0..k)
            .map(|p| if p == 0 { QType::Target } else { QType::Idler })
            .collect();
        return CtrlGate::new(space.to_vec(), qtypes, CoreOp::Generic(Matrix::identity(2)));
    }
    let bit = |i: usize, p: usize| i >> (k - 1 - p) & 1;
    let first = idx[0];
    let mut varying: Vec<usize> = (0..k)
        .filter(|&p| idx.iter().any(|&i| bit(i, p) != bit(first, p)))
        .collect();
    let (indices, core) = if varying.is_empty() {
        // Single index: diagonal phase on the last qubit, controlled by the rest.
        let p = k - 1;
        varying.push(p);
        let partner = first ^ (1 << (k - 1 - p));
        let mut both = vec![first, partner];
        both.sort_unstable();
        let m = u.embed(&both);
        (both, m)
    } else if idx.len() == 1 << varying.len() {
        (idx.to_vec(), u.core().clone())
    } else {
        let qtypes = vec![QType::Target; k];
        return CtrlGate::new(space.to_vec(), qtypes, CoreOp::Generic(u.inflate()));
    };
    debug_assert_eq!(indices.len(), 1 << varying.len());
    let qtypes: Vec<QType> = (0..k)
        .map(|p| {
            if varying.contains(&p) {
                QType::Target
            } else if bit(indices[0], p) == 1 {
                QType::Control1
            } else {
                QType::Control0
            }
        })
        .collect();
    CtrlGate::new(space.to_vec(), qtypes, CoreOp::from_matrix(core))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{grain_of, GateGrain, NamedGate};
    use crate::numerics::{distance, haar_unitary, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(i: u32) -> Qubit {
        Qubit::data(i)
    }

    fn named(g: NamedGate, t: u32) -> CtrlGate {
        CtrlGate::named(g, q(t))
    }

    /// Independent oracle: builds the gate matrix by brute force over basis
    /// states, without the masking tricks of `apply_gate`.
    fn oracle(g: &CtrlGate, space: &[Qubit]) -> Matrix {
        let k = space.len();
        let n = 1 << k;
        let bit_of = |i: usize, q: Qubit| {
            let p = space.iter().position(|s| s.id == q.id).unwrap();
            (i >> (k - 1 - p)) & 1
        };
        let targets = g.targets();
        let core = g.core().matrix();
        let mut m = Matrix::zeros(n, n);
        for col in 0..n {
            let active = g
                .controls()
                .iter()
                .all(|&(c, t)| bit_of(col, c) == if t == QType::Control1 { 1 } else { 0 });
            if !active {
                m[(col, col)] = ONE;
                continue;
            }
            for row in 0..n {
                let same_rest = space
                    .iter()
                    .filter(|s| !targets.iter().any(|t| t.id == s.id))
                    .all(|&s| bit_of(row, s) == bit_of(col, s));
                if !same_rest {
                    continue;
                }
                let sub = |i: usize| targets.iter().fold(0, |acc, &t| acc << 1 | bit_of(i, t));
                m[(row, col)] = core[(sub(row), sub(col))];
            }
        }
        m.scale(C64::from_polar(1.0, g.phase()))
    }

    fn random_gate(rng: &mut ChaCha8Rng, n: u32) -> CtrlGate {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut ids: Vec<u32> = (0..n).collect();
        ids.shuffle(rng);
        let t = rng.gen_range(1..=2.min(n as usize));
        let c = rng.gen_range(0..=(n as usize - t));
        let mut qubits = Vec::new();
        let mut qtypes = Vec::new();
        for (i, &id) in ids.iter().take(t + c).enumerate() {
            qubits.push(q(id));
            qtypes.push(if i < t {
                QType::Target
            } else if rng.gen_bool(0.5) {
                QType::Control1
            } else {
                QType::Control0
            });
        }
        let core = CoreOp::Generic(haar_unitary(1 << t, rng));
        CtrlGate::new(qubits, qtypes, core)
            .unwrap()
            .with_phase(rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn gate_matrix_examples() {
        let x = named(NamedGate::X, 0);
        assert_eq!(gate_matrix(&x, &[q(0)]).unwrap(), NamedGate::X.matrix());
        let cnot = CtrlGate::cnot(q(0), q(1));
        let expect = Matrix::from_real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(gate_matrix(&cnot, &[q(0), q(1)]).unwrap(), expect);
        let neg = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[(q(0), QType::Control0)],
            q(1),
        )
        .unwrap();
        let expect = Matrix::from_real(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(gate_matrix(&neg, &[q(0), q(1)]).unwrap(), expect);
        assert!(matches!(
            gate_matrix(&cnot, &[q(0)]),
            Err(GateError::MissingQubit(_))
        ));
    }

    #[test]
    fn gate_matrix_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = random_gate(&mut rng, 4);
            let space: Vec<Qubit> = (0..4).map(q).collect();
            let d = gate_matrix(&g, &space)
                .unwrap()
                .max_abs_diff(&oracle(&g, &space))
                .unwrap();
            assert!(d < 1e-12, "{g}");
            // Permuted space.
            let space = [q(2), q(0), q(3), q(1)];
            let d = gate_matrix(&g, &space)
                .unwrap()
                .max_abs_diff(&oracle(&g, &space))
                .unwrap();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn matmul_examples() {
        let hh = matmul(&named(NamedGate::H, 0), &named(NamedGate::H, 0)).unwrap();
        assert!(gate_matrix(&hh, &[q(0)]).unwrap().is_identity(1e-15));
        assert_eq!(hh.qubits(), &[q(0)]);

        let a = CtrlGate::single(CoreOp::rz(0.3), q(0));
        let b = CtrlGate::single(CoreOp::rz(0.4), q(0));
        let ab = matmul(&a, &b).unwrap();
        assert_eq!(ab.core(), &CoreOp::rz(0.3 + 0.4));

        let tt = matmul(&named(NamedGate::T, 0), &named(NamedGate::T, 0)).unwrap();
        assert_eq!(tt.core(), &CoreOp::Named(NamedGate::S));

        let cx = CtrlGate::cnot(q(0), q(1));
        let x2 = named(NamedGate::X, 2);
        let prod = matmul(&cx, &x2).unwrap();
        assert_eq!(prod.qubits().len(), 3);
        let space = [q(0), q(1), q(2)];
        let dense = &gate_matrix(&cx, &space).unwrap() * &gate_matrix(&x2, &space).unwrap();
        assert!(
            gate_matrix(&prod, &space)
                .unwrap()
                .max_abs_diff(&dense)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn matmul_matches_dense_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let space: Vec<Qubit> = (0..4).map(q).collect();
        for _ in 0..100 {
            let a = random_gate(&mut rng, 4);
            let b = random_gate(&mut rng, 4);
            let p = matmul(&a, &b).unwrap();
            let dense = &gate_matrix(&a, &space).unwrap() * &gate_matrix(&b, &space).unwrap();
            let got = gate_matrix(&p, &space).unwrap();
            assert!(got.max_abs_diff(&dense).unwrap() < 1e-10);
        }
    }

    #[test]
    fn expand_examples() {
        let x = named(NamedGate::X, 0);
        let e = expand(&x, &[q(1)]).unwrap();
        assert_eq!(e.role_of(q(1)), Some(QType::Idler));
        let expect = NamedGate::X.matrix().kron(&Matrix::identity(2));
        assert_eq!(gate_matrix(&e, &[q(0), q(1)]).unwrap(), expect);
        assert_eq!(expand(&x, &[]).unwrap(), x);
        assert!(matches!(expand(&x, &[q(0)]), Err(GateError::Overlap(_))));

        // CNOT(q0 -> q2) with q1 idling in the middle: permute the 4x4 CNOT
        // embedding (q0, q2, q1) into (q0, q1, q2) order.
        let cx = CtrlGate::cnot(q(0), q(2));
        let e = expand(&cx, &[q(1)]).unwrap();
        let got = gate_matrix(&e, &[q(0), q(1), q(2)]).unwrap();
        let cnot4 = gate_matrix(&CtrlGate::cnot(q(0), q(1)), &[q(0), q(1)]).unwrap();
        let embedded = cnot4.kron(&Matrix::identity(2)); // basis (c, t, idle)
        let swap12 = |i: usize| (i & 0b100) | ((i & 0b010) >> 1) | ((i & 0b001) << 1);
        let mut expect = Matrix::zeros(8, 8);
        for r in 0..8 {
            for c in 0..8 {
                expect[(swap12(r), swap12(c))] = embedded[(r, c)];
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn trace_examples() {
        let x = named(NamedGate::X, 0);
        let e = expand(&x, &[q(1)]).unwrap();
        assert_eq!(trace(&e, &[q(1)]).unwrap(), x);
        assert!(matches!(trace(&x, &[q(0)]), Err(GateError::NotClean(_))));
        assert!(matches!(
            trace(&x, &[q(3)]),
            Err(GateError::MissingQubit(_))
        ));

        // A control qubit held at |0⟩ leaves the rest untouched.
        let cx = CtrlGate::cnot(q(0), q(1));
        let t = trace(&cx, &[q(0)]).unwrap();
        assert!(gate_matrix(&t, &[q(1)]).unwrap().is_identity(1e-12));
        let neg = CtrlGate::controlled(
            CoreOp::Named(NamedGate::X),
            &[(q(0), QType::Control0)],
            q(1),
        )
        .unwrap();
        let t = trace(&neg, &[q(0)]).unwrap();
        assert_eq!(gate_matrix(&t, &[q(1)]).unwrap(), NamedGate::X.matrix());
    }

    #[test]
    fn sorted_preserves_matrix() {
        let g = CtrlGate::new(
            vec![q(1), q(0)],
            vec![QType::Target, QType::Control1],
            CoreOp::Named(NamedGate::H),
        )
        .unwrap();
        let s = sorted(&g);
        assert_eq!(s.qubits(), &[q(0), q(1)]);
        let space = [q(0), q(1)];
        assert_eq!(
            gate_matrix(&s, &space).unwrap(),
            gate_matrix(&g, &space).unwrap()
        );
        assert_eq!(sorted(&s), s);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let core = CoreOp::Generic(haar_unitary(8, &mut rng));
        let g = CtrlGate::new(vec![q(2), q(0), q(1)], vec![QType::Target; 3], core).unwrap();
        let s = sorted(&g);
        assert_eq!(s.qubits(), &[q(0), q(1), q(2)]);
        let space = [q(0), q(1), q(2)];
        let d = gate_matrix(&s, &space)
            .unwrap()
            .max_abs_diff(&gate_matrix(&g, &space).unwrap())
            .unwrap();
        assert!(d < 1e-15);
    }

    #[test]
    fn convert_examples() {
        let xu = UnitaryM::new(4, vec![2, 3], NamedGate::X.matrix()).unwrap();
        let g = convert(&xu, &[q(0), q(1)]).unwrap();
        assert_eq!(g.qtypes(), &[QType::Control1, QType::Target]);
        assert_eq!(g.core(), &CoreOp::Named(NamedGate::X));
        assert_eq!(gate_matrix(&g, &[q(0), q(1)]).unwrap(), xu.inflate());

        let id = convert(&UnitaryM::identity(8), &[q(0), q(1), q(2)]).unwrap();
        assert_eq!(id.qtypes(), &[QType::Target, QType::Idler, QType::Idler]);
        assert!(gate_matrix(&id, &[q(0), q(1), q(2)])
            .unwrap()
            .is_identity(0.0));

        let two = UnitaryM::new(8, vec![0, 7], NamedGate::X.matrix()).unwrap();
        let g = convert(&two, &[q(0), q(1), q(2)]).unwrap();
        assert_eq!(grain_of(&g), GateGrain::MultiTarget);
        assert_eq!(g.targets().len(), 3);
        assert_eq!(gate_matrix(&g, &[q(0), q(1), q(2)]).unwrap(), two.inflate());

        let phase = UnitaryM::new(4, vec![1], Matrix::diag(&[-ONE])).unwrap();
        let g = convert(&phase, &[q(0), q(1)]).unwrap();
        assert_eq!(g.qtypes(), &[QType::Control0, QType::Target]);
        assert_eq!(gate_matrix(&g, &[q(0), q(1)]).unwrap(), phase.inflate());

        assert!(matches!(
            convert(&UnitaryM::identity(6), &[q(0), q(1)]),
            Err(GateError::NotPowerOfTwo(6))
        ));
    }

    #[test]
    fn convert_random_controlled_gates_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space: Vec<Qubit> = (0..4).map(q).collect();
        for _ in 0..100 {
            let g = random_gate(&mut rng, 4).with_phase(0.0);
            let m = gate_matrix(&g, &space).unwrap();
            let c = convert(&UnitaryM::deflate(&m).unwrap(), &space).unwrap();
            let back = gate_matrix(&c, &space).unwrap();
            assert!(distance(&back, &m).unwrap() < 1e-12);
            assert!(back.max_abs_diff(&m).unwrap() < 1e-12);
        }
    }
}
