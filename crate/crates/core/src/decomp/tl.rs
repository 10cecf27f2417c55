use super::{DecompError, Result};
use crate::numerics::{Matrix, UnitaryM, ONE, TOL_IDENTITY, TOL_UNITARY};

/// Factors `u` into two-level unitaries, returned in application order
/// (`factors[0]` applied first).
///
/// Columns of the core are cleared left to right, rows bottom-up. Each step
/// left-multiplies by a two-level `G` mixing the pivot row with the row being
/// cleared; `u = G_1† ⋯ G_k† · D` and the diagonal remainder `D` is folded
/// into the first-applied factor when they share an index.
pub fn tl_decompose(u: &UnitaryM) -> Result<Vec<UnitaryM>> {
    let defect = u.core().unitarity_defect().unwrap_or(f64::INFINITY);
    if defect > TOL_UNITARY {
        return Err(DecompError::NotUnitary(defect));
    }
    let u = u.normalized();
    let idx = u.core_indices();
    let n = u.dimension();
    if idx.len() <= 2 {
        return Ok(if u.is_identity() { Vec::new() } else { vec![u] });
    }
    let k = idx.len();
    let mut m = u.core().clone();
    // (row a, row b, 2x2 G) in elimination order, local indices.
    let mut steps: Vec<(usize, usize, Matrix)> = Vec::new();
    for j in 0..k - 1 {
        for i in (j + 1..k).rev() {
            let a = m[(j, j)];
            let b = m[(i, j)];
            let g = if b.norm() > TOL_IDENTITY {
                let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
                Matrix::from_rows(&[[a.conj() / r, b.conj() / r], [b / r, -a / r]]).unwrap()
            } else if i == j + 1 && (a - ONE).norm() > TOL_IDENTITY {
                let p = a.conj() / a.norm();
                Matrix::diag(&[p, ONE])
            } else {
                continue;
            };
            apply_rows(&mut m, j, i, &g);
            steps.push((j, i, g));
        }
    }
    // Application order: G_k† first, ..., G_1† last; D precedes them all.
    let d = m[(k - 1, k - 1)];
    let mut factors: Vec<UnitaryM> = steps
        .iter()
        .rev()
        .map(|(a, b, g)| two_level(n, idx[*a], idx[*b], g.adjoint()))
        .collect::<Result<_>>()?;
    if (d - ONE).norm() > TOL_IDENTITY {
        let last = idx[k - 1];
        let dm = UnitaryM::new(n, vec![last], Matrix::diag(&[d]))?;
        match factors.first_mut() {
            Some(f) if f.core_indices().contains(&last) => *f = f.matmul(&dm)?,
            _ => factors.insert(0, dm),
        }
    }
    factors.retain(|f| !f.is_identity());
    Ok(factors)
}

fn apply_rows(m: &mut Matrix, r0: usize, r1: usize, g: &Matrix) {
    for c in 0..m.cols() {
        let x = m[(r0, c)];
        let y = m[(r1, c)];
        m[(r0, c)] = g[(0, 0)] * x + g[(0, 1)] * y;
        m[(r1, c)] = g[(1, 0)] * x + g[(1, 1)] * y;
    }
}

fn two_level(n: usize, a: usize, b: usize, core: Matrix) -> Result<UnitaryM> {
    let u = UnitaryM::new(n, vec![a, b], core)?;
    Ok(u.normalized())
}

/// Dense product of factors in application order.
pub fn product(n: usize, factors: &[UnitaryM]) -> Matrix {
    let mut p = Matrix::identity(n);
    for f in factors {
        p = &f.inflate() * &p;
    }
    p
}
