//! Randomized and targeted certification of the stabilizer-entropy inequalities.
//!
//! Every suite is a pure function of its [`SuiteOptions`]; trials run in
//! parallel but reports are assembled in seed order.

use std::collections::{HashSet, VecDeque};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{apply_clifford, apply_gate, random_clifford, Gate};
use crate::entropy::{
    closed_form_purity, stabilizer_entropy, stabilizer_nullity, stabilizer_purity, to_f64,
    ClosedFormFamily, RenyiIndex, DEFAULT_NULLITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::named::{haar_state, haar_state_from, make_named_state, NamedState};
use crate::protocol::{is_deterministic_pure, random_protocol, run_protocol_with, ProtocolProgram, ProtocolStep, RunOptions, StateCollection};
use crate::roof::{extended_purity, OptimizerOptions};
use crate::spectrum::char_spectrum;
use crate::state::PureState;
use crate::util;

/// Tolerance for the pure-state inequalities on `n ≤ 5`.
pub const PURE_TOLERANCE: f64 = 1e-8;
/// Tolerance for the split-state inequalities.
pub const SPLIT_TOLERANCE: f64 = 1e-9;
/// Tolerance when the convex-roof optimizer participates.
pub const ROOF_TOLERANCE: f64 = 1e-6;

/// Restart ladder for convex-roof trials that fail at first.
const ROOF_RESTARTS: [usize; 4] = [8, 32, 64, 128];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub inputs: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub suite: String,
    pub trials: usize,
    /// Smallest signed slack over all checks; negative means the inequality was violated.
    pub worst_margin: f64,
    pub failures: Vec<Failure>,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One evaluated inequality `rhs - lhs ≥ -tol`.
#[derive(Clone, Debug)]
struct Check {
    seed: u64,
    margin: f64,
    inputs: String,
    values: Vec<f64>,
    /// Overrides the suite tolerance.
    tol: Option<f64>,
}

impl Check {
    fn new(seed: u64, inputs: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            seed,
            margin: rhs - lhs,
            inputs: inputs.into(),
            values: vec![lhs, rhs],
            tol: None,
        }
    }

    /// `|deviation| ≤ tol`.
    fn near_zero(seed: u64, inputs: impl Into<String>, deviation: f64, tol: f64) -> Self {
        Self {
            tol: Some(tol),
            ..Self::new(seed, inputs, deviation.abs(), 0.0)
        }
    }
}

fn tally(suite: &str, trials: usize, tolerance: f64, checks: Vec<Check>, notes: Vec<String>) -> TrialReport {
    let worst_margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, |a, m| if m.is_nan() { f64::NEG_INFINITY } else { a.min(m) });
    let mut failures: Vec<Failure> = checks
        .into_iter()
        .filter(|c| c.margin.is_nan() || c.margin < -c.tol.unwrap_or(tolerance))
        .map(|c| Failure {
            seed: c.seed,
            inputs: c.inputs,
            values: c.values,
        })
        .collect();
    failures.sort_by_key(|f| f.seed);
    TrialReport {
        suite: suite.to_string(),
        trials,
        worst_margin,
        failures,
        tolerance,
        notes,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    /// Integer Rényi indices `≥ 2` for the monotonicity suites.
    pub alphas: Vec<u32>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 1,
            alphas: vec![2, 3],
        }
    }
}

fn check_alphas(alphas: &[u32]) -> Result<()> {
    if alphas.is_empty() || alphas.iter().any(|&a| a < 2) {
        return Err(Error::InvalidArgument(format!(
            "monotonicity suites need integer alphas >= 2, got {alphas:?}"
        )));
    }
    Ok(())
}

/// Trial input: Haar, or a stabilizer state perturbed by `ε·Haar` with `ε ∈ {1e-3, 1e-1}`.
pub fn trial_state(num_qubits: usize, seed: u64) -> Result<PureState> {
    let mut rng = util::rng_from_seed(seed);
    let kind = rng.random_range(0..3);
    let haar = haar_state_from(&mut rng, num_qubits)?;
    if kind == 0 {
        return Ok(haar);
    }
    let eps = if kind == 1 { 1e-3 } else { 1e-1 };
    let stab = apply_clifford(&PureState::zeros(num_qubits)?, &random_clifford(num_qubits, rng.random())?)?;
    PureState::normalized(
        stab.amplitudes()
            .iter()
            .zip(haar.amplitudes())
            .map(|(s, h)| s + h * eps)
            .collect(),
    )
}

/// `√p|0⟩φ₁ + √(1-p)|1⟩φ₂`.
pub fn split_state(p: f64, phi1: &PureState, phi2: &PureState) -> Result<PureState> {
    if phi1.num_qubits() != phi2.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: phi1.num_qubits(),
            actual: phi2.num_qubits(),
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("split weight {p} outside [0, 1]")));
    }
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let amps = phi1
        .amplitudes()
        .iter()
        .map(|x| x * a)
        .chain(phi2.amplitudes().iter().map(|x| x * b))
        .collect();
    PureState::new(amps)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Both printed right-hand sides of the split-state purity bound.
///
/// Binomial form: `Σ_i C(2α,2i) p^{2i}(1-p)^{2(α-i)} P₁^{i/α} P₂^{(α-i)/α} + 2^{2α-1}p^α(1-p)^α√(P₁P₂)`.
/// Summed form: `Σ_± ½(pP₁^{1/2α} ± (1-p)P₂^{1/2α})^{2α} + 2^{2α-1}p^α(1-p)^α√(P₁P₂)`.
pub fn lemma2_bounds(p: f64, p1: f64, p2: f64, alpha: u32) -> (f64, f64) {
    let a = alpha as f64;
    let cross = 2f64.powi(2 * alpha as i32 - 1) * p.powf(a) * (1.0 - p).powf(a) * (p1 * p2).sqrt();
    let binomial_form: f64 = (0..=alpha)
        .map(|i| {
            binomial(2 * alpha, 2 * i)
                * p.powi(2 * i as i32)
                * (1.0 - p).powi(2 * (alpha - i) as i32)
                * p1.powf(i as f64 / a)
                * p2.powf((alpha - i) as f64 / a)
        })
        .sum();
    let (x, y) = (p * p1.powf(0.5 / a), (1.0 - p) * p2.powf(0.5 / a));
    let summed = 0.5 * (x + y).powi(2 * alpha as i32) + 0.5 * (x - y).powi(2 * alpha as i32);
    (binomial_form + cross, summed + cross)
}

struct SplitTrial {
    p: f64,
    phi1: PureState,
    phi2: PureState,
    label: String,
}

/// Fixed edge cases followed by `trials` seeded triples with `n - 1 ∈ {2, 3}`.
fn split_trials(trials: usize, seed: u64) -> Result<Vec<(u64, SplitTrial)>> {
    let t = make_named_state(&NamedState::T)?;
    let mut out = vec![
        (
            u64::MAX - 2,
            SplitTrial {
                p: 1.0,
                phi1: haar_state(2, seed)?,
                phi2: haar_state(2, seed ^ 1)?,
                label: "p=1".into(),
            },
        ),
        (
            u64::MAX - 1,
            SplitTrial {
                p: 0.0,
                phi1: haar_state(2, seed)?,
                phi2: haar_state(2, seed ^ 1)?,
                label: "p=0".into(),
            },
        ),
        (
            u64::MAX,
            SplitTrial {
                p: 0.5,
                phi1: t.clone(),
                phi2: t,
                label: "p=1/2, T, T".into(),
            },
        ),
    ];
    for i in 0..trials as u64 {
        let s = util::derive_seed(seed, i);
        let mut rng = util::rng_from_seed(s);
        let n1 = 2 + (i % 2) as usize;
        let p = rng.random::<f64>();
        let (phi1, phi2) = (trial_state(n1, rng.random())?, trial_state(n1, rng.random())?);
        out.push((
            s,
            SplitTrial {
                p,
                phi1,
                phi2,
                label: format!("p={p:.6}, n-1={n1}"),
            },
        ));
    }
    Ok(out)
}

fn split_suite<F>(name: &str, opts: &SuiteOptions, check: F) -> Result<TrialReport>
where
    F: Fn(u64, &SplitTrial, &PureState, u32) -> Result<Vec<Check>> + Sync,
{
    check_alphas(&opts.alphas)?;
    let trials = split_trials(opts.trials, opts.seed)?;
    let checks: Vec<Vec<Check>> = trials
        .par_iter()
        .map(|(s, t)| {
            let psi = split_state(t.p, &t.phi1, &t.phi2)?;
            let mut v = Vec::new();
            for &a in &opts.alphas {
                v.extend(check(*s, t, &psi, a)?);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(tally(
        name,
        trials.len(),
        SPLIT_TOLERANCE,
        checks.into_iter().flatten().collect(),
        vec!["includes the p=1, p=0 and p=1/2 (T, T) edge cases".into()],
    ))
}

/// Split-state purity bound, both printed forms.
pub fn check_lemma2(opts: &SuiteOptions) -> Result<TrialReport> {
    split_suite("lemma2", opts, |s, t, psi, a| {
        let idx = RenyiIndex::from(a);
        let lhs = stabilizer_purity(psi, idx)?;
        let (p1, p2) = (stabilizer_purity(&t.phi1, idx)?, stabilizer_purity(&t.phi2, idx)?);
        let (r1, r2) = lemma2_bounds(t.p, p1, p2, a);
        Ok(vec![
            Check::new(s, format!("{}, alpha={a}, binomial form", t.label), lhs, r1),
            Check::new(s, format!("{}, alpha={a}, summed form", t.label), lhs, r2),
        ])
    })
}

/// `M_α(ψ) ≥ min{M_α(φ₁), M_α(φ₂)}`.
pub fn check_min_corollary(opts: &SuiteOptions) -> Result<TrialReport> {
    split_suite("min_corollary", opts, |s, t, psi, a| {
        let idx = RenyiIndex::from(a);
        let m = stabilizer_entropy(psi, idx)?;
        let m1 = stabilizer_entropy(&t.phi1, idx)?;
        let m2 = stabilizer_entropy(&t.phi2, idx)?;
        Ok(vec![Check::new(s, format!("{}, alpha={a}", t.label), m1.min(m2), m)])
    })
}

/// `P_α(ψ) ≤ pP_α(φ₁) + (1-p)P_α(φ₂)`.
pub fn check_strong_purity_corollary(opts: &SuiteOptions) -> Result<TrialReport> {
    split_suite("strong_purity", opts, |s, t, psi, a| {
        let idx = RenyiIndex::from(a);
        let lhs = stabilizer_purity(psi, idx)?;
        let rhs = t.p * stabilizer_purity(&t.phi1, idx)? + (1.0 - t.p) * stabilizer_purity(&t.phi2, idx)?;
        Ok(vec![Check::new(s, format!("{}, alpha={a}", t.label), lhs, rhs)])
    })
}

/// `(state, protocol)` pairs for the protocol suites: depth cycles through `1..=max_depth`.
fn protocol_trials(n: usize, trials: usize, seed: u64, max_depth: usize) -> Result<Vec<(u64, PureState, ProtocolProgram)>> {
    (0..trials as u64)
        .map(|i| {
            let s = util::derive_seed(seed, i);
            let depth = 1 + (i as usize % max_depth);
            Ok((s, trial_state(n, s)?, random_protocol(n, depth, s ^ 0x5eed)?))
        })
        .collect()
}

/// Deterministic outputs lose no magic; branching outputs keep `M_α(in) ≥ min_i M_α(φ_i)`.
pub fn check_theorem1(n: usize, opts: &SuiteOptions) -> Result<TrialReport> {
    protocol_suite("theorem1", n, opts, |s, psi, out, a| {
        let idx = RenyiIndex::from(a);
        let m_in = stabilizer_entropy(psi, idx)?;
        let branches = out.pure_branches().expect("forgetful semantics keeps branches pure");
        let m_out = branches
            .iter()
            .map(|(_, b)| stabilizer_entropy(b, idx))
            .collect::<Result<Vec<_>>>()?;
        let min_out = m_out.iter().copied().fold(f64::INFINITY, f64::min);
        let kind = if is_deterministic_pure(out, 1e-9) { "deterministic" } else { "branching" };
        Ok(Check::new(s, format!("alpha={a}, {kind}, {} branches", branches.len()), min_out, m_in))
    })
}

/// `M_α^lin(in) ≥ Σ_i p_i M_α^lin(φ_i)`.
pub fn check_theorem2(n: usize, opts: &SuiteOptions) -> Result<TrialReport> {
    protocol_suite("theorem2", n, opts, |s, psi, out, a| {
        let idx = RenyiIndex::from(a);
        let lin_in = 1.0 - stabilizer_purity(psi, idx)?;
        let branches = out.pure_branches().expect("forgetful semantics keeps branches pure");
        let avg = branches
            .iter()
            .map(|(w, b)| Ok(w * (1.0 - stabilizer_purity(b, idx)?)))
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>();
        Ok(Check::new(s, format!("alpha={a}, {} branches", branches.len()), avg, lin_in))
    })
}

fn protocol_suite<F>(name: &str, n: usize, opts: &SuiteOptions, check: F) -> Result<TrialReport>
where
    F: Fn(u64, &PureState, &StateCollection, u32) -> Result<Check> + Sync,
{
    check_alphas(&opts.alphas)?;
    if n == 0 || n > 5 {
        return Err(Error::InvalidArgument(format!("protocol suites need 1 <= n <= 5, got {n}")));
    }
    let trials = protocol_trials(n, opts.trials, opts.seed, 8)?;
    let results: Vec<(Vec<Check>, usize)> = trials
        .par_iter()
        .map(|(s, psi, prog)| {
            let out = run_protocol_with(psi, prog, &RunOptions::default())?;
            let mut v = Vec::new();
            for &a in &opts.alphas {
                v.push(check(*s, psi, &out, a)?);
            }
            Ok((v, out.events().len()))
        })
        .collect::<Result<_>>()?;
    let dropped: usize = results.iter().map(|r| r.1).sum();
    let mut notes = vec![format!("n={n}, depth 1..=8, alphas {:?}", opts.alphas)];
    if dropped > 0 {
        notes.push(format!("{dropped} branches dropped below the weight threshold"));
    }
    Ok(tally(
        name,
        trials.len(),
        PURE_TOLERANCE,
        results.into_iter().flat_map(|r| r.0).collect(),
        notes,
    ))
}

/// `P̂_α(E(ψ)) ≥ P_α(ψ)` with genuine partial traces, so mixed branches reach the optimizer.
///
/// Each protocol opens by tracing out a random qubit of the input and continues
/// with a random program on the rest. A trial that fails is re-run with 32, 64
/// and 128 restarts before it counts.
pub fn check_theorem3(n: usize, max_depth: usize, opts: &SuiteOptions) -> Result<TrialReport> {
    check_alphas(&opts.alphas)?;
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("convex-roof suite needs 2 <= n <= 4, got {n}")));
    }
    let run = RunOptions {
        density_trace_out: true,
        ..RunOptions::default()
    };
    let trials: Vec<(u64, PureState, ProtocolProgram)> = protocol_trials(n - 1, opts.trials, opts.seed, max_depth.max(1))?
        .into_iter()
        .map(|(s, _, tail)| {
            let mut steps = vec![ProtocolStep::TraceOut {
                qubit: (s % n as u64) as usize,
            }];
            steps.extend(tail.steps);
            Ok((s, trial_state(n, s)?, ProtocolProgram::new(steps)))
        })
        .collect::<Result<_>>()?;
    let results: Vec<(Vec<Check>, usize)> = trials
        .iter()
        .map(|(s, psi, prog)| {
            let out = run_protocol_with(psi, prog, &run)?;
            let mixed = out.entries().iter().filter(|e| e.state.as_pure().is_none()).count();
            let mut checks = Vec::new();
            let mut escalations = 0;
            for &a in &opts.alphas {
                let p_in = stabilizer_purity(psi, RenyiIndex::from(a))?;
                let mut best = f64::NEG_INFINITY;
                for &restarts in &ROOF_RESTARTS {
                    let o = OptimizerOptions {
                        restarts,
                        seed: *s,
                        ..OptimizerOptions::default()
                    };
                    best = best.max(extended_purity(&out, a, &o)?.value);
                    if best >= p_in - ROOF_TOLERANCE || out.all_pure() {
                        break;
                    }
                    escalations += 1;
                }
                checks.push(Check::new(*s, format!("alpha={a}, {} branches, {mixed} mixed", out.len()), p_in, best));
            }
            Ok((checks, escalations))
        })
        .collect::<Result<_>>()?;
    let escalations: usize = results.iter().map(|r| r.1).sum();
    Ok(tally(
        "theorem3",
        trials.len(),
        ROOF_TOLERANCE,
        results.into_iter().flat_map(|r| r.0).collect(),
        vec![format!(
            "n={n}, depth 1..={max_depth}, density-matrix partial traces; {escalations} restart escalations"
        )],
    ))
}

/// A reproduction of the strong-monotonicity counterexample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleHit {
    pub seed: u64,
    pub n: usize,
    pub m2_input: f64,
    /// `½·M₂(|0…0⟩) + ½·M₂(φ)` over the measurement branches.
    pub average_after: f64,
}

/// Smallest `n ≤ n_max` where measuring qubit 0 of `(|0ⁿ⟩ + |1⟩φ)/√2` raises the average `M₂`.
pub fn find_counterexample(n_max: usize, seed: u64) -> Result<Option<CounterexampleHit>> {
    if n_max > crate::spectrum::DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: n_max,
            max: crate::spectrum::DEFAULT_MAX_QUBITS,
        });
    }
    let two = RenyiIndex::from(2);
    let measure = ProtocolProgram::new(vec![ProtocolStep::Measure {
        qubit: 0,
        keep: false,
        then_branch: ProtocolProgram::default(),
        else_branch: ProtocolProgram::default(),
    }]);
    for n in 2..=n_max {
        let phi = haar_state(n - 1, util::derive_seed(seed, n as u64))?;
        let psi = split_state(0.5, &PureState::zeros(n - 1)?, &phi)?;
        let out = run_protocol_with(&psi, &measure, &RunOptions::default())?;
        let mut average_after = 0.0;
        for (w, b) in out.pure_branches().expect("pure input") {
            average_after += w * stabilizer_entropy(b, two)?;
        }
        let m2_input = stabilizer_entropy(&psi, two)?;
        if average_after > m2_input {
            return Ok(Some(CounterexampleHit {
                seed,
                n,
                m2_input,
                average_after,
            }));
        }
    }
    Ok(None)
}

/// Runs [`find_counterexample`] for `seeds` Haar seeds; passes when at least 90% reproduce.
pub fn check_counterexample(n_max: usize, seeds: usize, seed: u64) -> Result<(TrialReport, Vec<Option<CounterexampleHit>>)> {
    let hits: Vec<Option<CounterexampleHit>> = (0..seeds as u64)
        .map(|i| find_counterexample(n_max, util::derive_seed(seed, i)))
        .collect::<Result<_>>()?;
    let found = hits.iter().flatten().count();
    let mut notes: Vec<String> = hits
        .iter()
        .zip(0..)
        .map(|(h, i)| match h {
            Some(h) => format!(
                "seed {}: n={} average after {:.6} > M2(input) {:.6}",
                h.seed, h.n, h.average_after, h.m2_input
            ),
            None => format!("seed {}: no violation up to n={n_max}", util::derive_seed(seed, i)),
        })
        .collect();
    notes.push(format!("{found}/{seeds} seeds reproduce"));
    let worst_margin = hits
        .iter()
        .flatten()
        .map(|h| h.average_after - h.m2_input)
        .fold(f64::INFINITY, f64::min);
    let failures = if found * 10 >= seeds * 9 {
        Vec::new()
    } else {
        vec![Failure {
            seed,
            inputs: format!("n_max={n_max}, seeds={seeds}"),
            values: vec![found as f64, seeds as f64],
        }]
    };
    Ok((
        TrialReport {
            suite: "counterexample".into(),
            trials: seeds,
            worst_margin,
            failures,
            tolerance: 0.0,
            notes,
        },
        hits,
    ))
}

/// All `n`-qubit pure stabilizer states up to global phase, `n ≤ 3`.
///
/// Breadth-first orbit of `|0…0⟩` under H, S and CNOT with phase-canonical dedup.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<PureState>> {
    if n == 0 || n > 3 {
        return Err(Error::TooManyQubits { num_qubits: n, max: 3 });
    }
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::Hadamard(q));
        gates.push(Gate::Phase(q));
        for t in 0..n {
            if t != q {
                gates.push(Gate::Cnot { control: q, target: t });
            }
        }
    }
    let canon = |amps: &mut Vec<Complex64>| -> Vec<(i64, i64)> {
        let lead = *amps.iter().find(|a| a.norm() > 1e-9).expect("nonzero state");
        let phase = lead.conj() / lead.norm();
        for a in amps.iter_mut() {
            *a *= phase;
        }
        amps.iter()
            .map(|a| ((a.re * 1e6).round() as i64, (a.im * 1e6).round() as i64))
            .collect()
    };
    let mut start = PureState::zeros(n)?.into_amplitudes();
    let mut seen = HashSet::new();
    seen.insert(canon(&mut start));
    let mut queue = VecDeque::from([start.clone()]);
    let mut states = vec![start];
    while let Some(amps) = queue.pop_front() {
        for g in &gates {
            let mut next = amps.clone();
            apply_gate(&mut next, n, g);
            if seen.insert(canon(&mut next)) {
                queue.push_back(next.clone());
                states.push(next);
            }
        }
    }
    states.into_iter().map(PureState::new).collect()
}

/// `2ⁿ Π_{k=1..n}(2ᵏ + 1)`.
pub fn stabilizer_state_count(n: usize) -> usize {
    (1..=n).fold(1usize << n, |acc, k| acc * ((1usize << k) + 1))
}

/// `-log₂ max_σ |⟨σ|ψ⟩|²` over enumerated stabilizer states.
pub fn min_relative_entropy(psi: &PureState, stabs: &[PureState]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for s in stabs {
        best = best.max(s.fidelity(psi)?);
    }
    Ok(-best.min(1.0).log2())
}

/// Fannes-type right-hand side for `|M₁(ψ) - M₁(φ)|` at trace distance `t`.
pub fn fannes_bound(t: f64, num_qubits: usize) -> f64 {
    let d2 = (1u64 << (2 * num_qubits)) as f64;
    let base = t * (d2 - 1.0).log2();
    if t <= 0.5 {
        let h = if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
        };
        base + h
    } else {
        base + 1.0
    }
}

/// Additivity, ordering, Clifford invariance, upper bounds, nullity, `D_min`,
/// faithfulness, closed forms and the Fannes bound.
pub fn check_property_chain(opts: &SuiteOptions) -> Result<TrialReport> {
    let mut notes = Vec::new();
    let mut checks = Vec::new();
    let stabs: Vec<Vec<PureState>> = (1..=3).map(enumerate_stabilizer_states).collect::<Result<_>>()?;
    for (n, list) in (1..=3).zip(&stabs) {
        checks.push(Check::near_zero(0, format!("stabilizer count n={n}"), list.len() as f64 - stabilizer_state_count(n) as f64, 0.0));
        notes.push(format!("{} stabilizer states on {n} qubits", list.len()));
        let worst = list
            .iter()
            .map(|s| stabilizer_entropy(s, 2.into()).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::near_zero(0, format!("faithfulness: M2 of stabilizer states, n={n}"), worst, 1e-10));
    }
    for named in [NamedState::T, NamedState::Cks(2), NamedState::Ckz(3)] {
        let m = stabilizer_entropy(&make_named_state(&named)?, 2.into())?;
        checks.push(Check::new(0, format!("faithfulness: M2({named}) > 1e-6"), 1e-6, m));
    }
    for m in 2..=6 {
        for family in [ClosedFormFamily::Ckz(m), ClosedFormFamily::Cks(m)] {
            for a in [2u32, 3] {
                let exact = to_f64(&closed_form_purity(family, a));
                let numeric = stabilizer_purity(&make_named_state(&family.named_state())?, a.into())?;
                checks.push(Check::near_zero(0, format!("closed form {family}, alpha={a}"), exact - numeric, 1e-10));
            }
        }
    }

    let per_trial: Vec<Vec<Check>> = (0..opts.trials as u64)
        .into_par_iter()
        .map(|i| property_trial(util::derive_seed(opts.seed, i), i, &stabs))
        .collect::<Result<_>>()?;
    checks.extend(per_trial.into_iter().flatten());
    notes.push(format!(
        "{} random instances; Fannes checked on {} pairs",
        opts.trials, opts.trials
    ));
    Ok(tally("property_chain", opts.trials, SPLIT_TOLERANCE, checks, notes))
}

fn property_trial(s: u64, i: u64, stabs: &[Vec<PureState>]) -> Result<Vec<Check>> {
    let mut rng = util::rng_from_seed(s);
    let n = 1 + (i % 4) as usize;
    let psi = trial_state(n, rng.random())?;
    let alphas: Vec<RenyiIndex> = [1.0, 2.0, 3.0, 4.0].map(|a| RenyiIndex::new(a).expect("valid")).to_vec();
    let m: Vec<f64> = alphas.iter().map(|&a| stabilizer_entropy(&psi, a)).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    let tag = |what: &str| format!("n={n}: {what}");

    // additivity with an independent factor and with a stabilizer factor
    let n2 = 1 + (i / 4 % 4) as usize;
    let phi = trial_state(n2, rng.random())?;
    let sigma = apply_clifford(&PureState::zeros(n2)?, &random_clifford(n2, rng.random())?)?;
    for (k, &a) in alphas.iter().enumerate() {
        let joint = stabilizer_entropy(&psi.tensor(&phi), a)?;
        let sum = m[k] + stabilizer_entropy(&phi, a)?;
        checks.push(Check::near_zero(s, tag(&format!("additivity alpha={}", a.value())), joint - sum, PURE_TOLERANCE));
        let with_stab = stabilizer_entropy(&psi.tensor(&sigma), a)?;
        checks.push(Check::near_zero(s, tag(&format!("stabilizer factor alpha={}", a.value())), with_stab - m[k], PURE_TOLERANCE));
    }
    for k in 1..m.len() {
        checks.push(Check::new(s, tag(&format!("ordering M{} >= M{}", k, k + 1)), m[k], m[k - 1]));
    }

    let u = random_clifford(n, rng.random())?;
    let rotated = apply_clifford(&psi, &u)?;
    let (a, b) = (char_spectrum(&psi)?.sorted(), char_spectrum(&rotated)?.sorted());
    let dist = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    checks.push(Check::near_zero(s, tag("Clifford invariance of the spectrum"), dist, 1e-9));

    let d = (1u64 << n) as f64;
    for (k, &a) in alphas.iter().enumerate() {
        checks.push(Check::new(s, tag(&format!("M{} <= n", a.value())), m[k], n as f64));
        if a.value() >= 2.0 {
            checks.push(Check::new(s, tag(&format!("M{} <= log2(d+1)-1", a.value())), m[k], (d + 1.0).log2() - 1.0));
        }
    }

    // nullity: use a product with T so it is nontrivial
    let t = make_named_state(&NamedState::T)?;
    let sparse = if n > 1 {
        t.tensor(&apply_clifford(&PureState::zeros(n - 1)?, &random_clifford(n - 1, rng.random())?)?)
    } else {
        t
    };
    for candidate in [&psi, &sparse] {
        if let Ok(nu) = stabilizer_nullity(candidate, DEFAULT_NULLITY_TOLERANCE) {
            for &a in &alphas[1..] {
                let ma = stabilizer_entropy(candidate, a)?;
                checks.push(Check::new(s, tag(&format!("M{} <= nullity {nu}", a.value())), ma, nu as f64));
            }
        }
    }

    if n <= 3 {
        let dmin = min_relative_entropy(&psi, &stabs[n - 1])?;
        for (k, &a) in alphas.iter().enumerate().skip(1) {
            let av = a.value();
            checks.push(Check::new(s, tag(&format!("M{av} <= (2a/(a-1)) Dmin")), m[k], 2.0 * av / (av - 1.0) * dmin));
        }
    }

    // Fannes: a nearby state for small distances, an independent one otherwise
    let delta = [1e-4, 1e-2, 0.1, 1.0][(i % 4) as usize];
    let other = trial_state(n, rng.random())?;
    let near = PureState::normalized(
        psi.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(x, y)| x + y * delta)
            .collect(),
    )?;
    let tdist = psi.trace_norm_distance(&near)?;
    let m1_near = stabilizer_entropy(&near, alphas[0])?;
    checks.push(Check::new(s, tag(&format!("Fannes at trace distance {tdist:.3e}")), (m[0] - m1_near).abs(), fannes_bound(tdist, n)));
    checks.push(Check::new(s, tag("Fannes at zero distance"), 0.0, fannes_bound(0.0, n)));
    Ok(checks)
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 8] = [
    "lemma2",
    "min_corollary",
    "strong_purity",
    "theorem1",
    "theorem2",
    "theorem3",
    "counterexample",
    "property_chain",
];

/// Trials used by the costlier suites when run from [`run_suite`].
pub const THEOREM3_MAX_TRIALS: usize = 20;
pub const COUNTEREXAMPLE_MAX_SEEDS: usize = 10;

/// Runs one named suite, or every suite for `"all"`.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<TrialReport>> {
    let names: Vec<&str> = if name == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&name) {
        vec![name]
    } else {
        return Err(Error::InvalidArgument(format!(
            "unknown suite {name:?}; expected one of {} or all",
            SUITES.join(", ")
        )));
    };
    names
        .into_iter()
        .map(|s| match s {
            "lemma2" => check_lemma2(opts),
            "min_corollary" => check_min_corollary(opts),
            "strong_purity" => check_strong_purity_corollary(opts),
            "theorem1" => check_theorem1(3, opts),
            "theorem2" => check_theorem2(3, opts),
            "theorem3" => check_theorem3(
                3,
                4,
                &SuiteOptions {
                    trials: opts.trials.min(THEOREM3_MAX_TRIALS),
                    ..opts.clone()
                },
            ),
            "counterexample" => Ok(check_counterexample(13, opts.trials.min(COUNTEREXAMPLE_MAX_SEEDS), opts.seed)?.0),
            "property_chain" => check_property_chain(opts),
            _ => unreachable!("filtered above"),
        })
        .collect()
}
