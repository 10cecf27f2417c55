//! Dense complex matrices, the sparse-aware [`UnitaryM`] and the
//! phase-invariant distance used by every verification path.

mod text;
mod unitary;

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

pub use num_complex::Complex64 as C64;
use rand::Rng;
use thiserror::Error;

pub use text::{format_complex, parse_complex, parse_matrix, write_matrix};
pub use unitary::UnitaryM;

/// Tolerance for `M†M = I` when admitting a matrix as unitary.
pub const TOL_UNITARY: f64 = 1e-9;
/// Entries within this distance of the identity pattern count as identity.
pub const TOL_IDENTITY: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not unitary (max |M†M - I| = {0:e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("invalid core indices: {0}")]
    InvalidCore(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NumericsError::InvalidCore(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(NumericsError::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(NumericsError::ShapeMismatch(r, c, 1, row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    /// Real-valued convenience constructor, mostly for tests and fixtures.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let data: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&data).expect("well-formed real matrix")
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(NumericsError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |M†M - I|`, or `None` for a non-square matrix.
    pub fn unitarity_defect(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let g = self.adjoint().matmul(self).ok()?;
        g.max_abs_diff(&Matrix::identity(self.rows)).ok()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect().is_some_and(|d| d <= tol)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .max_abs_diff(&Matrix::identity(self.rows))
                .is_ok_and(|d| d <= tol)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn det2(&self) -> C64 {
        debug_assert!(self.rows == 2 && self.cols == 2);
        self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shapes agree")
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&z| format_complex(z)).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Phase-invariant distance `sqrt(1 - |tr(a†b)| / n)`.
///
/// Equals `min_φ ‖a − e^{iφ} b‖_F / sqrt(2n)` for unitaries, so it is a
/// metric on unitaries modulo global phase.
pub fn distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    a.check_same_shape(b)?;
    if !a.is_square() {
        return Err(NumericsError::NotSquare(a.rows, a.cols));
    }
    let n = a.rows as f64;
    // tr(a†b) = Σ conj(a_ij) b_ij
    let tr: C64 = a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum();
    // Sum the residual directly instead of forming 1 - |tr|/n, which loses
    // half the mantissa near zero.
    let phase = if tr.norm() > 0.0 {
        tr.conj() / tr.norm()
    } else {
        ONE
    };
    let resid: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum();
    Ok((resid / (2.0 * n)).sqrt())
}

/// Haar-random `n x n` unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| C64::new(gauss(rng), gauss(rng))).collect();
        for _ in 0..2 {
            for c in &cols {
                let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, &y) in v.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut m = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &z) in c.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    m
}

/// Haar-random element of SU(2), drawn as a uniform unit quaternion.
pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> Matrix {
    loop {
        let q = [gauss(rng), gauss(rng), gauss(rng), gauss(rng)];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            let [a, b, c, d] = q.map(|x| x / n);
            return su2_from_quaternion([a, b, c, d]);
        }
    }
}

/// `a·I − i(b·X + c·Y + d·Z)` for a unit quaternion `(a, b, c, d)`.
pub fn su2_from_quaternion([a, b, c, d]: [f64; 4]) -> Matrix {
    let m = [
        [C64::new(a, -d), C64::new(-c, -b)],
        [C64::new(c, -b), C64::new(a, d)],
    ];
    Matrix::from_rows(&m).expect("2x2")
}

/// Inverse of [`su2_from_quaternion`] for an SU(2) matrix.
pub fn su2_to_quaternion(u: &Matrix) -> [f64; 4] {
    let a = (u[(0, 0)].re + u[(1, 1)].re) / 2.0;
    let d = (u[(1, 1)].im - u[(0, 0)].im) / 2.0;
    let b = -(u[(0, 1)].im + u[(1, 0)].im) / 2.0;
    let c = (u[(1, 0)].re - u[(0, 1)].re) / 2.0;
    [a, b, c, d]
}

/// Rescales a 2x2 unitary to determinant one.
pub fn to_special_unitary(u: &Matrix) -> Matrix {
    let det = u.det2();
    u.scale(C64::from_polar(1.0, -det.arg() / 2.0))
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; avoids pulling rand_distr for two call sites.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn x() -> Matrix {
        Matrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn distance_basic_values() {
        let h = Matrix::from_real(&[&[1.0, 1.0], &[1.0, -1.0]]).scale(C64::new(0.5f64.sqrt(), 0.0));
        assert!(distance(&h, &h).unwrap() < 1e-15);
        let i2 = Matrix::identity(2);
        let phased = i2.scale(C64::from_polar(1.0, PI / 7.0));
        assert!(distance(&i2, &phased).unwrap() < 1e-14);
        assert!((distance(&i2, &x()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_shape_mismatch() {
        assert!(matches!(
            distance(&Matrix::identity(2), &Matrix::identity(4)),
            Err(NumericsError::ShapeMismatch(..))
        ));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 4, 8, 16] {
            assert!(haar_unitary(n, &mut rng).is_unitary(1e-12));
        }
    }

    #[test]
    fn quaternion_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u = haar_su2(&mut rng);
            assert!((u.det2() - ONE).norm() < 1e-12);
            let back = su2_from_quaternion(su2_to_quaternion(&u));
            assert!(u.max_abs_diff(&back).unwrap() < 1e-14);
        }
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 8] {
            for _ in 0..100 {
                let a = haar_unitary(n, &mut rng);
                let b = haar_unitary(n, &mut rng);
                let c = haar_unitary(n, &mut rng);
                let ab = distance(&a, &b).unwrap();
                let bc = distance(&b, &c).unwrap();
                let ac = distance(&a, &c).unwrap();
                assert!(ac <= ab + bc + 1e-12);
                assert!((ab - distance(&b, &a).unwrap()).abs() < 1e-12);
                assert!(ab >= 0.0);
            }
        }
    }
}
