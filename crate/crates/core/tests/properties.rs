mod common;

use proptest::prelude::*;
use qcsynth_core::config::{self, QConfig};
use qcsynth_core::decomp::verify;
use qcsynth_core::gates::GateGrain;
use qcsynth_core::ir::{deserialize, serialize};
use qcsynth_core::numerics::{
    distance, parse_matrix, to_special_unitary, write_matrix, Matrix, C64,
};
use qcsynth_core::sknet::sk_decompose;
use serde_json::json;

use common::{compile, config, haar, net, EXACT_TOL};

fn exact_grain() -> impl Strategy<Value = GateGrain> {
    prop_oneof![
        Just(GateGrain::MultiTarget),
        Just(GateGrain::Singlet),
        Just(GateGrain::CtrlPruned),
        Just(GateGrain::Principal),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_text_round_trips(n in 1usize..6, entries in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 36)) {
        let data: Vec<C64> = entries.iter().take(n * n).map(|&(re, im)| C64::new(re, im)).collect();
        let m = Matrix::from_vec(n, n, data).unwrap();
        prop_assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn compiled_unitaries_verify(qubits in 1usize..4, seed in any::<u64>(), grain in exact_grain(), level in 0u8..3) {
        let u = haar(1 << qubits, seed);
        let out = compile(&u, &config(grain, level));
        let r = verify(&out.compiled, &u, EXACT_TOL, 0.3);
        prop_assert!(r.passed(), "{}", r);
        let bytes = serialize(&out.compiled);
        let back = deserialize(&bytes).unwrap();
        prop_assert_eq!(&back, &out.compiled);
        prop_assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn sk_error_never_grows_with_depth(seed in any::<u64>()) {
        let u = to_special_unitary(haar(2, seed).core());
        let errs: Vec<f64> = (0..4)
            .map(|d| distance(sk_decompose(net(), &u, d).matrix(), &u).unwrap())
            .collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", errs);
    }

    #[test]
    fn command_line_overrides_file(file_window in 2usize..32, cli_window in 2usize..32) {
        let doc = json!({ "window_size": file_window, "optimization_level": 2 });
        let pairs = vec![config::parse_assignment(&format!("window_size={cli_window}")).unwrap()];
        let (c, prov) = config::load(None, Some(&doc), &pairs).unwrap();
        prop_assert_eq!(c.window_size, cli_window);
        prop_assert_eq!(c.optimization_level, 2);
        prop_assert_eq!(prov.source("window_size"), Some(config::Source::CommandLine));
        prop_assert_eq!(prov.source("optimization_level"), Some(config::Source::Override));
        prop_assert_eq!(c.sk_depth, QConfig::default().sk_depth);
    }
}
