#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use qcsynth_core::build_pipeline;
use qcsynth_core::config::QConfig;
use qcsynth_core::gates::{CoreOp, GateGrain};
use qcsynth_core::numerics::{haar_unitary, Matrix, UnitaryM, C64};
use qcsynth_core::pipeline::Output;
use qcsynth_core::sknet::SU2Net;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const EXACT_TOL: f64 = 1e-8;

/// The 8x8 cyclic permutation: |0⟩ fixed, |7⟩ → |1⟩, |i−1⟩ → |i⟩ otherwise.
pub fn cyclic8_matrix() -> Matrix {
    let mut m = Matrix::zeros(8, 8);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 7)] = C64::new(1.0, 0.0);
    for i in 2..8 {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    m
}

pub fn cyclic8() -> UnitaryM {
    UnitaryM::deflate(&cyclic8_matrix()).unwrap()
}

/// The cyclic shift |i⟩ → |i+1 mod n⟩.
pub fn shift(n: usize) -> UnitaryM {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[((i + 1) % n, i)] = C64::new(1.0, 0.0);
    }
    UnitaryM::deflate(&m).unwrap()
}

pub fn haar(n: usize, seed: u64) -> UnitaryM {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    UnitaryM::deflate(&haar_unitary(n, &mut rng)).unwrap()
}

pub fn single(m: Matrix) -> UnitaryM {
    UnitaryM::deflate(&m).unwrap()
}

/// The default net, built once per test binary.
pub fn net() -> &'static SU2Net {
    static NET: OnceLock<SU2Net> = OnceLock::new();
    NET.get_or_init(|| {
        let c = QConfig::default();
        SU2Net::build(&c.sk_alphabet, c.sk_net_length).unwrap()
    })
}

pub fn config(granularity: GateGrain, level: u8) -> QConfig {
    QConfig {
        granularity,
        optimization_level: level,
        ..QConfig::default()
    }
}

pub fn compile(u: &UnitaryM, cfg: &QConfig) -> Output {
    build_pipeline(cfg)
        .with_net(net().clone())
        .compile(u)
        .unwrap()
}

pub struct Fixture {
    pub name: &'static str,
    pub unitary: UnitaryM,
    pub config: QConfig,
}

/// Circuits on at most four data qubits, locked as golden `.qco` files.
pub fn fixtures() -> Vec<Fixture> {
    use GateGrain::*;
    let h = single(qcsynth_core::gates::NamedGate::H.matrix());
    let rz = single(CoreOp::rz(0.7).matrix());
    let mut swap = Matrix::identity(4);
    swap[(1, 1)] = C64::new(0.0, 0.0);
    swap[(2, 2)] = C64::new(0.0, 0.0);
    swap[(1, 2)] = C64::new(1.0, 0.0);
    swap[(2, 1)] = C64::new(1.0, 0.0);
    let f = |name, unitary, granularity, level| Fixture {
        name,
        unitary,
        config: config(granularity, level),
    };
    vec![
        f("identity", UnitaryM::identity(4), Principal, 1),
        f("h_clifford_t", h, CliffordT, 1),
        f("rz_principal", rz, Principal, 0),
        f("swap_singlet", single(swap), Singlet, 1),
        f("cyclic8_multi_target", cyclic8(), MultiTarget, 0),
        f("cyclic8_singlet", cyclic8(), Singlet, 1),
        f("cyclic8_ctrl_pruned", cyclic8(), CtrlPruned, 1),
        f("cyclic8_principal", cyclic8(), Principal, 2),
        f("cyclic8_clifford_t", cyclic8(), CliffordT, 2),
        f("haar2_principal", haar(4, 404), Principal, 2),
        f("shift16_ctrl_pruned", shift(16), CtrlPruned, 1),
    ]
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.qco"))
}
