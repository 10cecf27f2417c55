//! Decomposition passes and the compile driver.

mod cliffordt;
mod compile;
mod ctrl;
mod euler;
mod gray;
mod tl;
mod verify;

use thiserror::Error;

use crate::gates::GateError;
use crate::numerics::NumericsError;
use crate::qspace::QSpaceError;

pub use cliffordt::cliffordt_decompose;
pub use compile::{compile, CompileError};
pub use ctrl::{ctrl_decompose, sqrt_unitary};
pub use euler::{euler_decompose, euler_gates, EulerAngles, ANGLE_TOL};
pub use gray::gray_decompose;
pub use tl::{product, tl_decompose};
pub use verify::{verify, CircuitCheck, NodeCheck, VerifyReport};

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("input is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    QSpace(#[from] QSpaceError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DecompError>;
