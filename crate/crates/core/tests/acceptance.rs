use std::process::ExitCode;
use std::time::{Duration, Instant};

use stabent::bounds::{bound_report, round_up_one_decimal, StateRef};
use stabent::entropy::{closed_form_purity, stabilizer_entropy, stabilizer_purity, to_f64, ClosedFormFamily};
use stabent::protocol::StateCollection;
use stabent::roof::{extended_entropy, extended_purity, roof_oracle_rank2, OptimizerOptions};
use stabent::spectrum::char_spectrum_with_limit;
use stabent::verify::{
    check_counterexample, check_lemma2, check_min_corollary, check_property_chain, check_strong_purity_corollary,
    check_theorem1, check_theorem2, enumerate_stabilizer_states, SuiteOptions,
};
use stabent::{apply_clifford, haar_state, make_named_state, CliffordCircuit, DensityState, Gate, NamedState, PureState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn state(n: NamedState) -> PureState {
    make_named_state(&n).unwrap()
}

fn closed_forms() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("P2(T)", NamedState::T, ClosedFormFamily::T, 0.75),
        ("P2(CS)", NamedState::Cks(2), ClosedFormFamily::Cks(2), 7.0 / 16.0),
        ("P2(CCZ)", NamedState::Ckz(3), ClosedFormFamily::Ckz(3), 11.0 / 32.0),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, named, family, want) in cases {
        let brute = stabilizer_purity(&state(named), 2.into()).unwrap();
        let exact = to_f64(&closed_form_purity(family, 2));
        worst = worst.max((brute - exact).abs()).max((exact - want).abs());
        parts.push(format!("{label}={brute:.12}"));
    }
    let m2t = stabilizer_entropy(&state(NamedState::T), 2.into()).unwrap();
    worst = worst.max((m2t - (4.0f64 / 3.0).log2()).abs());
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("{}, M2(T)={m2t:.12}, max deviation {worst:.1e}, {elapsed:.2?}", parts.join(", ")),
    )
}

fn headline_table() -> Outcome {
    let start = Instant::now();
    let ccz: StateRef = NamedState::Ckz(3).into();
    let rows = [
        (NamedState::Ckz(4), 0.9),
        (NamedState::Ckz(5), 0.5),
        (NamedState::Cks(3), 0.8),
        (NamedState::Cks(4), 0.5),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (src, quoted) in rows {
        let r = bound_report(&src.into(), &ccz, 2).unwrap();
        let rounded = round_up_one_decimal(r.rate_bound);
        ok &= rounded == quoted && r.rate_bound <= quoted;
        parts.push(format!(
            "{}->CCZ {:.6} -> {rounded} (P2 {} / {})",
            r.source,
            r.rate_bound,
            r.source_purity.unwrap_or_default(),
            r.target_purity.unwrap_or_default()
        ));
    }
    let elapsed = start.elapsed();
    outcome(ok && elapsed < Duration::from_secs(1), format!("{}; {elapsed:.2?}", parts.join("; ")))
}

fn decay() -> Outcome {
    let two = 2.into();
    let ccz = state(NamedState::Ckz(3));
    let (m_ccz, lin_ccz) = (stabilizer_entropy(&ccz, two).unwrap(), 1.0 - stabilizer_purity(&ccz, two).unwrap());
    let mut rate = Vec::new();
    let mut lin = Vec::new();
    let mut agree: f64 = 0.0;
    for m in 4..=10 {
        let s = state(NamedState::Ckz(m));
        let p = stabilizer_purity(&s, two).unwrap();
        agree = agree.max((p - to_f64(&closed_form_purity(ClosedFormFamily::Ckz(m), 2))).abs());
        rate.push(stabilizer_entropy(&s, two).unwrap() / m_ccz);
        lin.push((1.0 - p) / lin_ccz);
    }
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    // index 3 is m = 7
    let steps: Vec<f64> = rate[3..].windows(2).map(|w| w[0].log2() - w[1].log2()).collect();
    let lin_steps: Vec<f64> = lin[3..].windows(2).map(|w| w[0].log2() - w[1].log2()).collect();
    let min_step = steps.iter().chain(&lin_steps).copied().fold(f64::INFINITY, f64::min);
    outcome(
        monotone(&rate) && monotone(&lin) && min_step >= 0.8 && agree <= 1e-10,
        format!(
            "rate ratios m=4..10 {:?}; smallest log2 drop for m>=7 {min_step:.4}; spectrum vs closed form {agree:.1e}",
            rate.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>()
        ),
    )
}

fn theorem_suite(which: u8) -> Outcome {
    let start = Instant::now();
    let opts = SuiteOptions {
        trials: 500,
        seed: 1,
        alphas: vec![2, 3],
    };
    let r = if which == 1 {
        check_theorem1(3, &opts).unwrap()
    } else {
        check_theorem2(3, &opts).unwrap()
    };
    let elapsed = start.elapsed();
    outcome(
        r.passed() && elapsed < Duration::from_secs(300),
        format!(
            "{} trials, {} violations beyond {:.0e}, worst margin {:.3e}, {elapsed:.2?}",
            r.trials,
            r.failures.len(),
            r.tolerance,
            r.worst_margin
        ),
    )
}

fn split_inequalities() -> Outcome {
    let opts = SuiteOptions {
        trials: 1000,
        seed: 1,
        alphas: vec![2, 3],
    };
    let reports = [
        check_lemma2(&opts).unwrap(),
        check_min_corollary(&opts).unwrap(),
        check_strong_purity_corollary(&opts).unwrap(),
    ];
    let detail = reports
        .iter()
        .map(|r| format!("{}: {} violations, worst margin {:.3e}", r.suite, r.failures.len(), r.worst_margin))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(reports.iter().all(|r| r.passed() && r.tolerance == 1e-9), detail)
}

fn counterexample() -> Outcome {
    let (report, hits) = check_counterexample(13, 10, 1).unwrap();
    let found: Vec<String> = hits
        .iter()
        .map(|h| h.as_ref().map_or("none".into(), |h| h.n.to_string()))
        .collect();
    let count = hits.iter().flatten().count();
    outcome(
        count >= 9 && report.passed(),
        format!("{count}/10 seeds reproduce; smallest n per seed {}", found.join(",")),
    )
}

fn convex_roof() -> Outcome {
    let start = Instant::now();
    let opts = OptimizerOptions::default();
    // (a) pure inputs
    let mut pure_gap: f64 = 0.0;
    for seed in 0..5 {
        let psi = haar_state(2, seed).unwrap();
        let c = StateCollection::from_pure(psi.clone());
        for a in [2u32, 3] {
            let roof = extended_purity(&c, a, &opts).unwrap().value;
            pure_gap = pure_gap.max((roof - stabilizer_purity(&psi, a.into()).unwrap()).abs());
        }
    }
    // (b) dephased T
    let t = state(NamedState::T);
    let zt = apply_clifford(&t, &CliffordCircuit::new(1, vec![Gate::PauliZ(0)]).unwrap()).unwrap();
    let rho = DensityState::mixture(&[(0.5, t), (0.5, zt)]).unwrap();
    let dephased = extended_entropy(&StateCollection::from_density(rho), 2, &opts).unwrap().value;
    // (c) rank-2 oracle
    let mut oracle_gap: f64 = 0.0;
    for seed in 0..20u64 {
        let (a, b) = (haar_state(1, 2 * seed).unwrap(), haar_state(1, 2 * seed + 1).unwrap());
        let p = 0.1 + 0.8 * (seed as f64 / 19.0);
        let rho = DensityState::mixture(&[(p, a), (1.0 - p, b)]).unwrap();
        let o = OptimizerOptions { seed, ..opts.clone() };
        let opt = extended_purity(&StateCollection::from_density(rho.clone()), 2, &o).unwrap().value;
        let oracle = roof_oracle_rank2(&rho, 2, 360).unwrap();
        oracle_gap = oracle_gap.max((opt - oracle).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        pure_gap <= 1e-14 && dephased <= 1e-6 && oracle_gap <= 1e-4 && elapsed < Duration::from_secs(600),
        format!(
            "(a) pure gap {pure_gap:.1e}; (b) dephased T M2 {dephased:.3e}; (c) max optimizer-oracle gap {oracle_gap:.3e} on 20 instances; {elapsed:.2?}"
        ),
    )
}

fn property_chain() -> Outcome {
    let counts: Vec<usize> = (1..=3).map(|n| enumerate_stabilizer_states(n).unwrap().len()).collect();
    let r = check_property_chain(&SuiteOptions {
        trials: 200,
        seed: 1,
        alphas: vec![2, 3],
    })
    .unwrap();
    outcome(
        counts == [6, 60, 1080] && r.passed(),
        format!(
            "stabilizer counts {counts:?}; {} violations over {} instances, worst margin {:.3e}",
            r.failures.len(),
            r.trials,
            r.worst_margin
        ),
    )
}

fn performance() -> Outcome {
    let psi = haar_state(12, 7).unwrap();
    let start = Instant::now();
    let spec = char_spectrum_with_limit(&psi, 12).unwrap();
    let elapsed = start.elapsed();
    let total = spec.total();
    outcome(
        spec.xi().len() == 1 << 24 && (total - 1.0).abs() < 1e-9 && elapsed < Duration::from_secs(60),
        format!("n=12: {} entries summing to {total:.12} in {elapsed:.2?}", spec.xi().len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form purities", closed_forms),
        ("conversion-rate table", headline_table),
        ("exponential decay of rates", decay),
        ("protocol monotonicity (min over branches)", || theorem_suite(1)),
        ("protocol monotonicity (average linear)", || theorem_suite(2)),
        ("split-state inequalities", split_inequalities),
        ("counterexample to strong monotonicity", counterexample),
        ("convex roof", convex_roof),
        ("property chain", property_chain),
        ("n=12 spectrum performance", performance),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
