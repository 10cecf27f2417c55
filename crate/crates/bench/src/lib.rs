//! Inputs shared by the benchmarks.

use qcsynth_core::config::QConfig;
use qcsynth_core::gates::{CoreOp, GateGrain};
use qcsynth_core::numerics::{Matrix, UnitaryM, C64};
use qcsynth_core::sknet::SU2Net;

/// The 8x8 cyclic permutation fixing |0⟩.
pub fn cyclic8() -> UnitaryM {
    let mut m = Matrix::zeros(8, 8);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 7)] = C64::new(1.0, 0.0);
    for i in 2..8 {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    UnitaryM::deflate(&m).unwrap()
}

/// A rotation with no short exact word over the default alphabet.
pub fn rotation() -> Matrix {
    let a = CoreOp::rz(0.7).matrix();
    let b = CoreOp::ry(1.3).matrix();
    &a * &b
}

pub fn config(granularity: GateGrain, level: u8) -> QConfig {
    QConfig {
        granularity,
        optimization_level: level,
        ..QConfig::default()
    }
}

pub fn default_net() -> SU2Net {
    let c = QConfig::default();
    SU2Net::build(&c.sk_alphabet, c.sk_net_length).unwrap()
}
