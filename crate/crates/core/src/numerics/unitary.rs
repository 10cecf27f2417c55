use super::{Matrix, NumericsError, Result, ONE, TOL_IDENTITY, TOL_UNITARY, ZERO};

/// A unitary stored as a core submatrix against an implicit identity.
///
/// `core_indices` are strictly increasing row/column indices into the full
/// `dimension`-sized space; `core` holds the submatrix on those indices.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryM {
    dimension: usize,
    core_indices: Vec<usize>,
    core: Matrix,
}

impl UnitaryM {
    /// Validating constructor. The core must be unitary within
    /// [`TOL_UNITARY`]; indices are sorted together with the core if needed.
    pub fn new(dimension: usize, core_indices: Vec<usize>, core: Matrix) -> Result<Self> {
        let k = core_indices.len();
        if core.rows() != k || core.cols() != k {
            return Err(NumericsError::InvalidCore(format!(
                "{} indices for a {}x{} core",
                k,
                core.rows(),
                core.cols()
            )));
        }
        if let Some(&bad) = core_indices.iter().find(|&&i| i >= dimension) {
            return Err(NumericsError::InvalidCore(format!(
                "index {bad} out of range for dimension {dimension}"
            )));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&p| core_indices[p]);
        if order
            .windows(2)
            .any(|w| core_indices[w[0]] == core_indices[w[1]])
        {
            return Err(NumericsError::InvalidCore("duplicate index".into()));
        }
        let defect = core.unitarity_defect().unwrap_or(f64::INFINITY);
        if defect > TOL_UNITARY {
            return Err(NumericsError::NotUnitary(defect));
        }
        let mut sorted_core = Matrix::zeros(k, k);
        for (a, &pa) in order.iter().enumerate() {
            for (b, &pb) in order.iter().enumerate() {
                sorted_core[(a, b)] = core[(pa, pb)];
            }
        }
        let core_indices = order.iter().map(|&p| core_indices[p]).collect();
        Ok(UnitaryM {
            dimension,
            core_indices,
            core: sorted_core,
        })
    }

    pub fn identity(dimension: usize) -> Self {
        UnitaryM {
            dimension,
            core_indices: Vec::new(),
            core: Matrix::zeros(0, 0),
        }
    }

    /// Extracts the minimal core of a dense unitary.
    pub fn deflate(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare(a.rows(), a.cols()));
        }
        let defect = a.unitarity_defect().unwrap_or(f64::INFINITY);
        if defect > TOL_UNITARY {
            return Err(NumericsError::NotUnitary(defect));
        }
        Ok(Self::deflate_unchecked(a))
    }

    fn deflate_unchecked(a: &Matrix) -> Self {
        let n = a.rows();
        let off_identity = |i: usize, j: usize| {
            let expect = if i == j { ONE } else { ZERO };
            (a[(i, j)] - expect).norm() > TOL_IDENTITY
        };
        let core_indices: Vec<usize> = (0..n)
            .filter(|&i| (0..n).any(|j| off_identity(i, j) || off_identity(j, i)))
            .collect();
        let k = core_indices.len();
        let mut core = Matrix::zeros(k, k);
        for (a_i, &i) in core_indices.iter().enumerate() {
            for (b_i, &j) in core_indices.iter().enumerate() {
                core[(a_i, b_i)] = a[(i, j)];
            }
        }
        UnitaryM {
            dimension: n,
            core_indices,
            core,
        }
    }

    /// Dense `dimension x dimension` form.
    pub fn inflate(&self) -> Matrix {
        let mut m = Matrix::identity(self.dimension);
        for (a, &i) in self.core_indices.iter().enumerate() {
            for (b, &j) in self.core_indices.iter().enumerate() {
                m[(i, j)] = self.core[(a, b)];
            }
        }
        m
    }

    /// `self · other`, re-deflated to the minimal core.
    pub fn matmul(&self, other: &UnitaryM) -> Result<UnitaryM> {
        if self.dimension != other.dimension {
            return Err(NumericsError::DimensionMismatch(
                self.dimension,
                other.dimension,
            ));
        }
        let mut union: Vec<usize> = self
            .core_indices
            .iter()
            .chain(&other.core_indices)
            .copied()
            .collect();
        union.sort_unstable();
        union.dedup();
        let a = self.embed(&union);
        let b = other.embed(&union);
        let prod = &a * &b;
        // Deflate the product on the union, then map back to global indices.
        let local = Self::deflate_unchecked(&prod);
        let core_indices = local.core_indices.iter().map(|&p| union[p]).collect();
        Ok(UnitaryM {
            dimension: self.dimension,
            core_indices,
            core: local.core,
        })
    }

    /// Core expressed on a superset `indices` of the core indices.
    pub fn embed(&self, indices: &[usize]) -> Matrix {
        let k = indices.len();
        let mut m = Matrix::identity(k);
        let pos: Vec<Option<usize>> = indices
            .iter()
            .map(|i| self.core_indices.iter().position(|c| c == i))
            .collect();
        for a in 0..k {
            for b in 0..k {
                if let (Some(pa), Some(pb)) = (pos[a], pos[b]) {
                    m[(a, b)] = self.core[(pa, pb)];
                }
            }
        }
        m
    }

    /// Drops core rows/columns that match the identity pattern.
    pub fn normalized(&self) -> UnitaryM {
        let local = Self::deflate_unchecked(&self.core);
        UnitaryM {
            dimension: self.dimension,
            core_indices: local
                .core_indices
                .iter()
                .map(|&p| self.core_indices[p])
                .collect(),
            core: local.core,
        }
    }

    pub fn adjoint(&self) -> UnitaryM {
        UnitaryM {
            dimension: self.dimension,
            core_indices: self.core_indices.clone(),
            core: self.core.adjoint(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn core_indices(&self) -> &[usize] {
        &self.core_indices
    }

    pub fn core(&self) -> &Matrix {
        &self.core
    }

    /// True when the core is empty or matches identity within `TOL_IDENTITY`.
    pub fn is_identity(&self) -> bool {
        self.core.is_identity(TOL_IDENTITY)
    }

    /// Number of qubits when `dimension` is a power of two.
    pub fn qubit_count(&self) -> Option<usize> {
        self.dimension
            .is_power_of_two()
            .then(|| self.dimension.trailing_zeros() as usize)
    }
}
