//! The `CtrlGate` representation, the standard gate library and the
//! granularity lattice.

mod algebra;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use thiserror::Error;

use crate::numerics::{Matrix, NumericsError, UnitaryM, C64, TOL_UNITARY};
use crate::qspace::{QType, Qubit};

pub use algebra::{
    apply_gate, circuit_matrix, convert, expand, gate_matrix, matmul, sorted, trace, zero_block,
};

/// Exact-match tolerance when recognising named gates from matrices.
pub const TOL_NAMED: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("qubit {0} is not in the target space")]
    MissingQubit(Qubit),
    #[error("qubit {0} already present in gate")]
    Overlap(Qubit),
    #[error("qubit {0} is not returned to |0⟩ (not ancilla-clean)")]
    NotClean(Qubit),
    #[error("invalid gate: {0}")]
    Invalid(String),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, GateError>;

/// Fixed single-qubit gates. `SD = S†`, `TD = T†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedGate {
    X,
    Y,
    Z,
    H,
    S,
    T,
    SD,
    TD,
}

impl NamedGate {
    pub const ALL: [NamedGate; 8] = [
        NamedGate::X,
        NamedGate::Y,
        NamedGate::Z,
        NamedGate::H,
        NamedGate::S,
        NamedGate::T,
        NamedGate::SD,
        NamedGate::TD,
    ];

    pub fn matrix(self) -> Matrix {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let t = C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let rows = match self {
            NamedGate::X => [[z, o], [o, z]],
            NamedGate::Y => [[z, -i], [i, z]],
            NamedGate::Z => [[o, z], [z, -o]],
            NamedGate::H => [[h, h], [h, -h]],
            NamedGate::S => [[o, z], [z, i]],
            NamedGate::T => [[o, z], [z, t]],
            NamedGate::SD => [[o, z], [z, -i]],
            NamedGate::TD => [[o, z], [z, t.conj()]],
        };
        Matrix::from_rows(&rows).expect("2x2")
    }

    pub fn inverse(self) -> NamedGate {
        match self {
            NamedGate::S => NamedGate::SD,
            NamedGate::SD => NamedGate::S,
            NamedGate::T => NamedGate::TD,
            NamedGate::TD => NamedGate::T,
            g => g,
        }
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, NamedGate::X | NamedGate::Y | NamedGate::H)
    }

    /// Lower-case mnemonic, also the OpenQASM name except for `SD`/`TD`.
    pub fn name(self) -> &'static str {
        match self {
            NamedGate::X => "x",
            NamedGate::Y => "y",
            NamedGate::Z => "z",
            NamedGate::H => "h",
            NamedGate::S => "s",
            NamedGate::T => "t",
            NamedGate::SD => "sd",
            NamedGate::TD => "td",
        }
    }

    pub fn from_name(s: &str) -> Option<NamedGate> {
        NamedGate::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
    }

    /// Exact-match recognition against the named table.
    pub fn recognize(m: &Matrix) -> Option<NamedGate> {
        if m.rows() != 2 || m.cols() != 2 {
            return None;
        }
        NamedGate::ALL
            .into_iter()
            .find(|g| g.matrix().max_abs_diff(m).is_ok_and(|d| d <= TOL_NAMED))
    }

    pub fn to_u8(self) -> u8 {
        NamedGate::ALL.iter().position(|&g| g == self).unwrap() as u8
    }

    pub fn from_u8(v: u8) -> Option<NamedGate> {
        NamedGate::ALL.get(v as usize).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// `R_axis(θ) = exp(−iθσ/2)`.
pub fn rotation_matrix(axis: Axis, theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let rows = match axis {
        Axis::X => [
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ],
        Axis::Y => [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ],
        Axis::Z => [
            [C64::new(c, -s), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(c, s)],
        ],
    };
    Matrix::from_rows(&rows).expect("2x2")
}

/// The operator a gate applies to its target qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreOp {
    Named(NamedGate),
    Rotation {
        axis: Axis,
        angle: f64,
    },
    /// `2^t x 2^t` unitary on `t` targets.
    Generic(Matrix),
}

impl CoreOp {
    pub fn rx(angle: f64) -> Self {
        CoreOp::Rotation {
            axis: Axis::X,
            angle,
        }
    }

    pub fn ry(angle: f64) -> Self {
        CoreOp::Rotation {
            axis: Axis::Y,
            angle,
        }
    }

    pub fn rz(angle: f64) -> Self {
        CoreOp::Rotation {
            axis: Axis::Z,
            angle,
        }
    }

    /// Named gate when the matrix matches one exactly, generic otherwise.
    pub fn from_matrix(m: Matrix) -> Self {
        match NamedGate::recognize(&m) {
            Some(g) => CoreOp::Named(g),
            None => CoreOp::Generic(m),
        }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            CoreOp::Named(g) => g.matrix(),
            CoreOp::Rotation { axis, angle } => rotation_matrix(*axis, *angle),
            CoreOp::Generic(m) => m.clone(),
        }
    }

    pub fn target_count(&self) -> usize {
        match self {
            CoreOp::Generic(m) => m.rows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn inverse(&self) -> CoreOp {
        match self {
            CoreOp::Named(g) => CoreOp::Named(g.inverse()),
            CoreOp::Rotation { axis, angle } => CoreOp::Rotation {
                axis: *axis,
                angle: -angle,
            },
            CoreOp::Generic(m) => CoreOp::Generic(m.adjoint()),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            CoreOp::Named(g) => g.is_diagonal(),
            CoreOp::Rotation { axis, angle } => *axis == Axis::Z || *angle == 0.0,
            CoreOp::Generic(m) => m.is_diagonal(TOL_NAMED),
        }
    }
}

impl fmt::Display for CoreOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreOp::Named(g) => write!(f, "{}", g.name().to_uppercase()),
            CoreOp::Rotation { axis, angle } => write!(f, "R{}({})", axis.name(), angle),
            CoreOp::Generic(m) => write!(f, "U{}", m.rows()),
        }
    }
}

/// A gate: core operator applied to the TARGET qubits when every control
/// qubit holds its activation value, times a global phase `e^{i·phase}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrlGate {
    qubits: Vec<Qubit>,
    qtypes: Vec<QType>,
    core: CoreOp,
    phase: f64,
}

impl CtrlGate {
    pub fn new(qubits: Vec<Qubit>, qtypes: Vec<QType>, core: CoreOp) -> Result<Self> {
        if qubits.len() != qtypes.len() {
            return Err(GateError::Invalid(format!(
                "{} qubits but {} roles",
                qubits.len(),
                qtypes.len()
            )));
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].iter().any(|p| p.id == q.id) {
                return Err(GateError::Overlap(*q));
            }
        }
        let targets = qtypes.iter().filter(|&&t| t == QType::Target).count();
        if targets == 0 {
            return Err(GateError::Invalid("gate has no target".into()));
        }
        if let CoreOp::Generic(m) = &core {
            if !m.is_square() || !m.rows().is_power_of_two() {
                return Err(GateError::Invalid(format!(
                    "generic core of shape {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            let defect = m.unitarity_defect().unwrap_or(f64::INFINITY);
            if defect > TOL_UNITARY {
                return Err(NumericsError::NotUnitary(defect).into());
            }
        }
        if core.target_count() != targets {
            return Err(GateError::Invalid(format!(
                "core acts on {} qubits but gate has {} targets",
                core.target_count(),
                targets
            )));
        }
        Ok(CtrlGate {
            qubits,
            qtypes,
            core,
            phase: 0.0,
        })
    }

    /// Uncontrolled single-qubit gate.
    pub fn single(core: CoreOp, target: Qubit) -> Self {
        CtrlGate::new(vec![target], vec![QType::Target], core).expect("single-qubit gate")
    }

    pub fn named(g: NamedGate, target: Qubit) -> Self {
        Self::single(CoreOp::Named(g), target)
    }

    /// Single-target gate with the given controls (each `Control0`/`Control1`).
    pub fn controlled(core: CoreOp, controls: &[(Qubit, QType)], target: Qubit) -> Result<Self> {
        let mut qubits: Vec<Qubit> = controls.iter().map(|c| c.0).collect();
        let mut qtypes: Vec<QType> = controls.iter().map(|c| c.1).collect();
        if let Some(bad) = qtypes.iter().position(|t| !t.is_control()) {
            return Err(GateError::Invalid(format!(
                "qubit {} listed as control with role {:?}",
                qubits[bad], qtypes[bad]
            )));
        }
        qubits.push(target);
        qtypes.push(QType::Target);
        CtrlGate::new(qubits, qtypes, core)
    }

    pub fn cnot(control: Qubit, target: Qubit) -> Self {
        Self::controlled(
            CoreOp::Named(NamedGate::X),
            &[(control, QType::Control1)],
            target,
        )
        .expect("distinct qubits")
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn qtypes(&self) -> &[QType] {
        &self.qtypes
    }

    pub fn core(&self) -> &CoreOp {
        &self.core
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn role_of(&self, q: Qubit) -> Option<QType> {
        self.qubits
            .iter()
            .position(|p| p.id == q.id)
            .map(|i| self.qtypes[i])
    }

    pub fn targets(&self) -> Vec<Qubit> {
        self.with_role(|t| t == QType::Target)
    }

    /// Control qubits paired with their activation role.
    pub fn controls(&self) -> Vec<(Qubit, QType)> {
        self.qubits
            .iter()
            .zip(&self.qtypes)
            .filter(|(_, t)| t.is_control())
            .map(|(&q, &t)| (q, t))
            .collect()
    }

    /// Non-idler qubits.
    pub fn support(&self) -> Vec<Qubit> {
        self.with_role(|t| t != QType::Idler)
    }

    fn with_role(&self, pred: impl Fn(QType) -> bool) -> Vec<Qubit> {
        self.qubits
            .iter()
            .zip(&self.qtypes)
            .filter(|(_, &t)| pred(t))
            .map(|(&q, _)| q)
            .collect()
    }

    /// Hermitian conjugate.
    pub fn inverse(&self) -> CtrlGate {
        CtrlGate {
            qubits: self.qubits.clone(),
            qtypes: self.qtypes.clone(),
            core: self.core.inverse(),
            phase: -self.phase,
        }
    }

    /// Whether the gate is block-diagonal in the computational basis of `q`.
    pub fn is_diagonal_on(&self, q: Qubit) -> bool {
        match self.role_of(q) {
            None | Some(QType::Idler | QType::Control0 | QType::Control1) => true,
            Some(QType::Target) => self.core.is_diagonal(),
        }
    }

    pub fn grain(&self) -> GateGrain {
        grain_of(self)
    }
}

impl fmt::Display for CtrlGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.core)?;
        let mut first = true;
        for (q, t) in self.qubits.iter().zip(&self.qtypes) {
            let tag = match t {
                QType::Target => "t",
                QType::Control0 => "c0",
                QType::Control1 => "c1",
                QType::Idler => continue,
            };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{tag}:{q}")?;
        }
        write!(f, "]")
    }
}

/// Granularity lattice, in increasing order of fineness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateGrain {
    Unitary,
    TwoLevel,
    MultiTarget,
    Singlet,
    CtrlPruned,
    Principal,
    UnivGate,
    CliffordT,
}

impl GateGrain {
    pub const ALL: [GateGrain; 8] = [
        GateGrain::Unitary,
        GateGrain::TwoLevel,
        GateGrain::MultiTarget,
        GateGrain::Singlet,
        GateGrain::CtrlPruned,
        GateGrain::Principal,
        GateGrain::UnivGate,
        GateGrain::CliffordT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateGrain::Unitary => "unitary",
            GateGrain::TwoLevel => "two_level",
            GateGrain::MultiTarget => "multi_target",
            GateGrain::Singlet => "singlet",
            GateGrain::CtrlPruned => "ctrl_pruned",
            GateGrain::Principal => "principal",
            GateGrain::UnivGate => "univ_gate",
            GateGrain::CliffordT => "clifford_t",
        }
    }

    /// Case-insensitive parse of the snake-case name.
    pub fn from_name(s: &str) -> Option<GateGrain> {
        GateGrain::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
    }

    pub fn to_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<GateGrain> {
        GateGrain::ALL.get(v as usize).copied()
    }
}

impl fmt::Display for GateGrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The finest grain whose definition `g` satisfies.
pub fn grain_of(g: &CtrlGate) -> GateGrain {
    let targets = g.qtypes.iter().filter(|&&t| t == QType::Target).count();
    if targets >= 2 {
        return GateGrain::MultiTarget;
    }
    let controls = g.controls();
    match (controls.as_slice(), &g.core) {
        ([], CoreOp::Named(NamedGate::H | NamedGate::S | NamedGate::T)) => GateGrain::CliffordT,
        ([], CoreOp::Named(_)) => GateGrain::UnivGate,
        ([], CoreOp::Rotation { .. }) => GateGrain::Principal,
        ([(_, QType::Control1)], CoreOp::Named(NamedGate::X)) => GateGrain::CliffordT,
        (cs, _) if cs.len() <= 1 => GateGrain::CtrlPruned,
        _ => GateGrain::Singlet,
    }
}

/// Grain of a not-yet-placed unitary.
pub fn grain_of_unitary(u: &UnitaryM) -> GateGrain {
    if u.core_indices().len() <= 2 {
        GateGrain::TwoLevel
    } else {
        GateGrain::Unitary
    }
}
