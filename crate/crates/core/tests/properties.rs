use proptest::prelude::*;

use stabent::bounds::round_up_one_decimal;
use stabent::entropy::{stabilizer_entropy, stabilizer_purity, RenyiIndex};
use stabent::protocol::{random_protocol, run_protocol_with, ProtocolProgram, RunOptions};
use stabent::verify::{lemma2_bounds, split_state, trial_state};
use stabent::{apply_clifford, char_spectrum, haar_state, random_clifford};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_a_distribution(n in 1usize..=6, seed in any::<u64>()) {
        let psi = haar_state(n, seed).unwrap();
        let spec = char_spectrum(&psi).unwrap();
        prop_assert!((spec.total() - 1.0).abs() < 1e-12);
        prop_assert!(spec.xi().iter().all(|&x| x >= 0.0));
        prop_assert!((spec.xi()[0] - 1.0 / psi.dim() as f64).abs() < 1e-15);
    }

    #[test]
    fn entropies_are_bounded(n in 1usize..=5, seed in any::<u64>(), a in 2u32..=4) {
        let psi = trial_state(n, seed).unwrap();
        let p = stabilizer_purity(&psi, a.into()).unwrap();
        let m = stabilizer_entropy(&psi, a.into()).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        prop_assert!(m >= -1e-12 && m <= n as f64 + 1e-9);
    }

    #[test]
    fn clifford_invariance(n in 1usize..=4, seed in any::<u64>(), cseed in any::<u64>()) {
        let psi = haar_state(n, seed).unwrap();
        let phi = apply_clifford(&psi, &random_clifford(n, cseed).unwrap()).unwrap();
        for a in [1.0, 2.0, 3.0] {
            let idx = RenyiIndex::new(a).unwrap();
            let d = stabilizer_entropy(&psi, idx).unwrap() - stabilizer_entropy(&phi, idx).unwrap();
            prop_assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn protocol_weights_sum_to_one(n in 1usize..=3, depth in 1usize..=6, seed in any::<u64>(), dens in any::<bool>()) {
        let psi = trial_state(n, seed).unwrap();
        let prog = random_protocol(n, depth, seed).unwrap();
        let out_n = prog.validate(n).unwrap();
        let opts = RunOptions { density_trace_out: dens, ..RunOptions::default() };
        let out = run_protocol_with(&psi, &prog, &opts).unwrap();
        prop_assert!((out.total_weight() - 1.0).abs() < 1e-9);
        prop_assert!(out.entries().iter().all(|e| e.weight >= 1e-12 && e.state.num_qubits() == out_n));
        prop_assert!(dens || out.all_pure());
    }

    #[test]
    fn programs_round_trip_through_json(n in 1usize..=3, depth in 1usize..=6, seed in any::<u64>()) {
        let prog = random_protocol(n, depth, seed).unwrap();
        let text = serde_json::to_string(&prog).unwrap();
        prop_assert_eq!(ProtocolProgram::from_json(&text).unwrap(), prog);
    }

    #[test]
    fn lemma2_forms_coincide(p in 0.0f64..=1.0, p1 in 0.01f64..=1.0, p2 in 0.01f64..=1.0, a in 2u32..=5) {
        let (r1, r2) = lemma2_bounds(p, p1, p2, a);
        prop_assert!((r1 - r2).abs() <= 1e-12 * r1.max(1.0));
    }

    #[test]
    fn split_bound_holds(p in 0.0f64..=1.0, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (phi1, phi2) = (trial_state(2, s1).unwrap(), trial_state(2, s2).unwrap());
        let psi = split_state(p, &phi1, &phi2).unwrap();
        let lhs = stabilizer_purity(&psi, 2.into()).unwrap();
        let rhs = p * stabilizer_purity(&phi1, 2.into()).unwrap() + (1.0 - p) * stabilizer_purity(&phi2, 2.into()).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn rounding_up_is_tight(x in 0.0f64..100.0) {
        let r = round_up_one_decimal(x);
        prop_assert!(r >= x - 1e-9);
        prop_assert!(r - x < 0.1 + 1e-9);
        prop_assert!(((r * 10.0).round() - r * 10.0).abs() < 1e-9);
    }
}
