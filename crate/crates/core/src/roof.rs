//! Convex-roof extensions over pure-state decompositions.
//!
//! Every decomposition `ρ = Σ_j q_j |φ_j⟩⟨φ_j|` of a rank-`r` state arises from
//! an `m × r` isometry `V` through `√q_j φ_j = Σ_k V_jk √λ_k e_k`, with
//! `(λ_k, e_k)` the eigenpairs of `ρ`. The optimizer runs Riemannian gradient
//! ascent on the set of such isometries from seeded random starts.
//!
//! Values are one-sided: [`extended_purity`] is a lower bound on the supremum,
//! [`collection_min_entropy`] an upper bound on the infimum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_from_purity, purity_serial, RenyiIndex};
use crate::error::{Error, Result};
use crate::io::StateFile;
use crate::protocol::{BranchState, StateCollection};
use crate::spectrum::{SpectrumWorkspace, DEFAULT_MAX_QUBITS};
use crate::state::{max_entry_distance, DensityState, PureState};
use crate::util;

/// Largest register accepted for mixed entries.
pub const MAX_ROOF_QUBITS: usize = 8;

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const STATIONARY_NORM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub restarts: usize,
    /// Largest number of decomposition terms; `None` means `2r`.
    pub m_max: Option<usize>,
    pub max_iterations: usize,
    pub seed: u64,
    /// Stop once an iteration improves the value by less than this.
    pub tol: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            m_max: None,
            max_iterations: 500,
            seed: 0,
            tol: 1e-10,
            fd_step: 1e-6,
        }
    }
}

/// A pure-state decomposition of one collection entry, weights scaled by the entry weight.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionCandidate {
    pub weights: Vec<f64>,
    #[serde(serialize_with = "serialize_states")]
    pub states: Vec<PureState>,
    /// Max-entry distance between the rebuilt and the target density matrix.
    pub reconstruction_error: f64,
}

fn serialize_states<S: serde::Serializer>(states: &[PureState], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(states.iter().map(StateFile::from))
}

impl DecompositionCandidate {
    /// `Σ_j q_j P_α(φ_j)`.
    pub fn average_purity(&self, alpha: RenyiIndex) -> f64 {
        let mut ws = SpectrumWorkspace::new();
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(q, s)| q * purity_serial(s.amplitudes(), alpha, &mut ws))
            .sum()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OptimizerTrace {
    /// Restarts per term count, summed over the sweep and over entries.
    pub restarts: usize,
    /// Total ascent iterations across all runs.
    pub iterations: usize,
    pub converged: bool,
    /// Final Riemannian gradient norm of the winning run for each optimized entry.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoofResult {
    pub value: f64,
    pub decompositions: Vec<DecompositionCandidate>,
    pub trace: OptimizerTrace,
}

fn check_alpha(alpha: u32) -> Result<RenyiIndex> {
    if alpha < 2 {
        return Err(Error::InvalidArgument(format!(
            "convex-roof quantities need an integer alpha >= 2, got {alpha}"
        )));
    }
    Ok(RenyiIndex::from(alpha))
}

fn check_density(rho: &DensityState) -> Result<()> {
    if rho.num_qubits() > MAX_ROOF_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: rho.num_qubits(),
            max: MAX_ROOF_QUBITS,
        });
    }
    Ok(())
}

/// Columns `√λ_k e_k`.
fn weighted_eigenbasis(rho: &DensityState) -> DMatrix<Complex64> {
    let pairs = rho.eigen_pairs();
    DMatrix::from_fn(rho.dim(), pairs.len(), |i, k| pairs[k].1[i] * pairs[k].0.sqrt())
}

/// `q · P_α(ψ̃/√q)` for the unnormalized term `ψ̃ = B v`.
fn term_value(b: &DMatrix<Complex64>, v: &[Complex64], alpha: RenyiIndex, ws: &mut SpectrumWorkspace, buf: &mut Vec<Complex64>) -> f64 {
    unnormalized_term(b, v, buf);
    let q = util::norm_sqr(buf);
    if q < 1e-300 {
        return 0.0;
    }
    let s = q.sqrt().recip();
    buf.iter_mut().for_each(|a| *a *= s);
    q * purity_serial(buf, alpha, ws)
}

fn unnormalized_term(b: &DMatrix<Complex64>, v: &[Complex64], out: &mut Vec<Complex64>) {
    out.clear();
    out.resize(b.nrows(), Complex64::new(0.0, 0.0));
    for (k, vk) in v.iter().enumerate() {
        for (o, bik) in out.iter_mut().zip(b.column(k).iter()) {
            *o += bik * vk;
        }
    }
}

/// Objective on `rows × cols` isometries.
trait StiefelObjective: Sync {
    fn value(&self, x: &DMatrix<Complex64>, ws: &mut SpectrumWorkspace) -> f64;

    /// Euclidean gradient `∂f/∂Re + i ∂f/∂Im` by central differences.
    fn gradient(&self, x: &DMatrix<Complex64>, h: f64, ws: &mut SpectrumWorkspace) -> DMatrix<Complex64> {
        let mut g = DMatrix::zeros(x.nrows(), x.ncols());
        let mut y = x.clone();
        for idx in 0..x.len() {
            let mut parts = [0.0; 2];
            for (part, dir) in parts.iter_mut().zip([Complex64::new(h, 0.0), Complex64::new(0.0, h)]) {
                y[idx] = x[idx] + dir;
                let up = self.value(&y, ws);
                y[idx] = x[idx] - dir;
                let down = self.value(&y, ws);
                y[idx] = x[idx];
                *part = (up - down) / (2.0 * h);
            }
            g[idx] = Complex64::new(parts[0], parts[1]);
        }
        g
    }
}

/// `Σ_j q_j P_α(φ_j)` for the decomposition generated by the rows of `V`.
struct RoofObjective {
    b: DMatrix<Complex64>,
    alpha: RenyiIndex,
}

impl RoofObjective {
    fn row(x: &DMatrix<Complex64>, j: usize) -> Vec<Complex64> {
        x.row(j).iter().copied().collect()
    }
}

impl StiefelObjective for RoofObjective {
    fn value(&self, x: &DMatrix<Complex64>, ws: &mut SpectrumWorkspace) -> f64 {
        let mut buf = Vec::new();
        let terms: Vec<f64> = (0..x.nrows())
            .map(|j| term_value(&self.b, &Self::row(x, j), self.alpha, ws, &mut buf))
            .collect();
        util::pairwise_sum(&terms)
    }

    // separable over rows, so each perturbation re-evaluates one term only
    fn gradient(&self, x: &DMatrix<Complex64>, h: f64, ws: &mut SpectrumWorkspace) -> DMatrix<Complex64> {
        let mut g = DMatrix::zeros(x.nrows(), x.ncols());
        let mut buf = Vec::new();
        for j in 0..x.nrows() {
            let mut v = Self::row(x, j);
            for k in 0..v.len() {
                let orig = v[k];
                let mut parts = [0.0; 2];
                for (part, dir) in parts.iter_mut().zip([Complex64::new(h, 0.0), Complex64::new(0.0, h)]) {
                    v[k] = orig + dir;
                    let up = term_value(&self.b, &v, self.alpha, ws, &mut buf);
                    v[k] = orig - dir;
                    let down = term_value(&self.b, &v, self.alpha, ws, &mut buf);
                    *part = (up - down) / (2.0 * h);
                }
                v[k] = orig;
                g[(j, k)] = Complex64::new(parts[0], parts[1]);
            }
        }
        g
    }
}

/// `P_α` of the normalized range vector `B u`.
struct RangeObjective {
    b: DMatrix<Complex64>,
    alpha: RenyiIndex,
}

impl StiefelObjective for RangeObjective {
    fn value(&self, x: &DMatrix<Complex64>, ws: &mut SpectrumWorkspace) -> f64 {
        let mut buf = Vec::new();
        unnormalized_term(&self.b, x.as_slice(), &mut buf);
        let q = util::norm_sqr(&buf);
        let s = q.sqrt().recip();
        buf.iter_mut().for_each(|a| *a *= s);
        purity_serial(&buf, self.alpha, ws)
    }
}

/// QR retraction with the phases of `R`'s diagonal moved into `Q`.
fn retract(y: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = y.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..q.ncols() {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..q.nrows() {
            q[(i, k)] *= phase;
        }
    }
    q
}

fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| util::complex_gaussian(rng));
    retract(g)
}

struct RunOutcome {
    value: f64,
    x: DMatrix<Complex64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

/// Armijo-backtracked Riemannian gradient ascent from `x`.
fn ascend(obj: &dyn StiefelObjective, mut x: DMatrix<Complex64>, opts: &OptimizerOptions) -> RunOutcome {
    let mut ws = SpectrumWorkspace::new();
    let mut f = obj.value(&x, &mut ws);
    let mut step = 1.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let g = obj.gradient(&x, opts.fd_step, &mut ws);
        let xg = x.adjoint() * &g;
        let sym = (&xg + xg.adjoint()).scale(0.5);
        let xi = &g - &x * sym;
        let norm2 = xi.norm_squared();
        residual = norm2.sqrt();
        if residual < STATIONARY_NORM {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = retract(&x + xi.scale(step));
            let fc = obj.value(&cand, &mut ws);
            if fc >= f + ARMIJO_C * step * norm2 {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let gain = fc - f;
        x = cand;
        f = fc;
        step = (step * 2.0).min(1e3);
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    RunOutcome {
        value: f,
        x,
        iterations,
        converged,
        residual,
    }
}

/// Best run over seeded starts; ties go to the earliest start in `(shape, restart)` order.
fn best_of(obj: &dyn StiefelObjective, shapes: &[(usize, usize)], opts: &OptimizerOptions) -> (RunOutcome, usize) {
    let restarts = opts.restarts.max(1);
    let jobs: Vec<(usize, usize)> = shapes
        .iter()
        .enumerate()
        .flat_map(|(s, _)| (0..restarts).map(move |r| (s, r)))
        .collect();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let (rows, cols) = shapes[s];
            let x0 = if r == 0 {
                // the eigen decomposition (padded with zero rows) as the first start
                DMatrix::from_fn(rows, cols, |i, k| Complex64::new((i == k) as u8 as f64, 0.0))
            } else {
                let mut rng = util::rng_from_seed(util::derive_seed(opts.seed, (s * restarts + r) as u64));
                random_isometry(&mut rng, rows, cols)
            };
            ascend(obj, x0, opts)
        })
        .collect();
    let total_iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one run");
    (best, total_iterations)
}

/// The decomposition generated by the rows of the isometry `v`.
pub fn decomposition_from_isometry(rho: &DensityState, v: &DMatrix<Complex64>, entry_weight: f64) -> DecompositionCandidate {
    let b = weighted_eigenbasis(rho);
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut rebuilt = DMatrix::<Complex64>::zeros(rho.dim(), rho.dim());
    let mut buf = Vec::new();
    for j in 0..v.nrows() {
        let row: Vec<Complex64> = v.row(j).iter().copied().collect();
        unnormalized_term(&b, &row, &mut buf);
        let q = util::norm_sqr(&buf);
        let col = DVector::from_column_slice(&buf);
        rebuilt += &col * col.adjoint();
        if q < 1e-14 {
            continue;
        }
        let s = q.sqrt().recip();
        let amps: Vec<Complex64> = buf.iter().map(|a| a * s).collect();
        weights.push(q * entry_weight);
        states.push(PureState::from_raw(rho.num_qubits(), amps));
    }
    DecompositionCandidate {
        weights,
        states,
        reconstruction_error: max_entry_distance(&rebuilt, rho.matrix()),
    }
}

/// A decomposition into `m ≥ rank` terms from a seeded random isometry.
pub fn random_decomposition(rho: &DensityState, m: usize, seed: u64) -> Result<DecompositionCandidate> {
    if m < rho.rank() {
        return Err(Error::InvalidArgument(format!(
            "{m} terms cannot decompose a rank-{} state",
            rho.rank()
        )));
    }
    let mut rng = util::rng_from_seed(seed);
    let v = random_isometry(&mut rng, m, rho.rank());
    Ok(decomposition_from_isometry(rho, &v, 1.0))
}

/// Lower bound on `sup Σ_j q_j P_α(φ_j)` for one density matrix, with its certificate.
fn optimize_entry(rho: &DensityState, alpha: RenyiIndex, opts: &OptimizerOptions) -> (f64, DMatrix<Complex64>, usize, bool, f64) {
    let r = rho.rank();
    let m_max = opts.m_max.unwrap_or(2 * r).max(r);
    let shapes: Vec<(usize, usize)> = (r..=m_max).map(|m| (m, r)).collect();
    let obj = RoofObjective {
        b: weighted_eigenbasis(rho),
        alpha,
    };
    let (best, iterations) = best_of(&obj, &shapes, opts);
    (best.value, best.x, iterations, best.converged, best.residual)
}

/// `P̂_α(C) = sup Σ_ij q_ij P_α(φ_ij)`, reported as a lower bound.
///
/// Pure entries contribute `P_α` directly; mixed entries are optimized.
pub fn extended_purity(collection: &StateCollection, alpha: u32, opts: &OptimizerOptions) -> Result<RoofResult> {
    let a = check_alpha(alpha)?;
    let mut value = 0.0;
    let mut decompositions = Vec::new();
    let mut trace = OptimizerTrace {
        converged: true,
        ..OptimizerTrace::default()
    };
    let mut ws = SpectrumWorkspace::new();
    for entry in collection.entries() {
        match &entry.state {
            BranchState::Pure(s) => {
                check_pure(s)?;
                value += entry.weight * purity_serial(s.amplitudes(), a, &mut ws);
                decompositions.push(DecompositionCandidate {
                    weights: vec![entry.weight],
                    states: vec![s.clone()],
                    reconstruction_error: 0.0,
                });
            }
            BranchState::Mixed(rho) => {
                check_density(rho)?;
                let (v, x, iterations, converged, residual) = optimize_entry(rho, a, opts);
                value += entry.weight * v;
                decompositions.push(decomposition_from_isometry(rho, &x, entry.weight));
                let m_max = opts.m_max.unwrap_or(2 * rho.rank()).max(rho.rank());
                trace.restarts += opts.restarts.max(1) * (m_max - rho.rank() + 1);
                trace.iterations += iterations;
                trace.converged &= converged;
                trace.residuals.push(residual);
            }
        }
    }
    Ok(RoofResult {
        value,
        decompositions,
        trace,
    })
}

fn check_pure(s: &PureState) -> Result<()> {
    if s.num_qubits() > DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: s.num_qubits(),
            max: DEFAULT_MAX_QUBITS,
        });
    }
    Ok(())
}

/// `M̂_α = log₂(P̂_α)/(1-α)`, an upper bound since `P̂_α` is a lower bound.
pub fn extended_entropy(collection: &StateCollection, alpha: u32, opts: &OptimizerOptions) -> Result<RoofResult> {
    let mut res = extended_purity(collection, alpha, opts)?;
    res.value = entropy_from_purity(res.value, RenyiIndex::from(alpha)).max(0.0);
    Ok(res)
}

/// `M̂_α^lin = 1 - P̂_α`.
pub fn extended_linear(collection: &StateCollection, alpha: u32, opts: &OptimizerOptions) -> Result<RoofResult> {
    let mut res = extended_purity(collection, alpha, opts)?;
    res.value = (1.0 - res.value).max(0.0);
    Ok(res)
}

/// `M^min = inf min_ij M_α(φ_ij)`, reported as an upper bound.
///
/// Every unit vector in the range of `ρ` occurs in some decomposition, so the
/// optimizer maximizes `P_α` over that range and the certificate completes the
/// best vector to a unitary.
pub fn collection_min_entropy(collection: &StateCollection, alpha: u32, opts: &OptimizerOptions) -> Result<RoofResult> {
    let a = check_alpha(alpha)?;
    let mut value = f64::INFINITY;
    let mut decompositions = Vec::new();
    let mut trace = OptimizerTrace {
        converged: true,
        ..OptimizerTrace::default()
    };
    let mut ws = SpectrumWorkspace::new();
    for entry in collection.entries() {
        let decomposition = match &entry.state {
            BranchState::Pure(s) => {
                check_pure(s)?;
                DecompositionCandidate {
                    weights: vec![entry.weight],
                    states: vec![s.clone()],
                    reconstruction_error: 0.0,
                }
            }
            BranchState::Mixed(rho) => {
                check_density(rho)?;
                let r = rho.rank();
                let obj = RangeObjective {
                    b: weighted_eigenbasis(rho),
                    alpha: a,
                };
                let (best, iterations) = best_of(&obj, &[(r, 1)], opts);
                trace.restarts += opts.restarts.max(1);
                trace.iterations += iterations;
                trace.converged &= best.converged;
                trace.residuals.push(best.residual);
                decomposition_from_isometry(rho, &complete_to_unitary(&best.x), entry.weight)
            }
        };
        for s in &decomposition.states {
            let p = purity_serial(s.amplitudes(), a, &mut ws);
            value = value.min(entropy_from_purity(p, a).max(0.0));
        }
        decompositions.push(decomposition);
    }
    Ok(RoofResult {
        value,
        decompositions,
        trace,
    })
}

/// Unitary `V` whose first row is proportional to `uᵀ`.
fn complete_to_unitary(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let r = u.nrows();
    let mut basis = DMatrix::<Complex64>::identity(r, r);
    basis.set_column(0, &u.column(0));
    // swap in a standard vector if u is parallel to a later column
    let mut qr = basis.clone().qr();
    if qr.r()[(r - 1, r - 1)].norm() < 1e-8 {
        basis = DMatrix::from_fn(r, r, |i, k| {
            if k == 0 {
                u[(i, 0)]
            } else {
                Complex64::new(((i + 1) % r == k) as u8 as f64, 0.0)
            }
        });
        qr = basis.qr();
    }
    let q = qr.q();
    q.transpose()
}

/// Brute-force lower-bound oracle for `P̂_α` of a rank-2 state.
///
/// Scans every two-term decomposition on a `grid × grid` mesh over the rows
/// `(cos θ, e^{iφ} sin θ)` and `(sin θ, -e^{iφ} cos θ)`, zooms in on the best
/// cell, then hill-climbs random three- and four-term decompositions.
/// Resolution error is `O(1/grid)` before refinement.
pub fn roof_oracle_rank2(rho: &DensityState, alpha: u32, grid: usize) -> Result<f64> {
    let a = check_alpha(alpha)?;
    check_density(rho)?;
    if rho.rank() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the rank-2 oracle needs a rank-2 state, got rank {}",
            rho.rank()
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("oracle grid must be at least 2".into()));
    }
    let b = weighted_eigenbasis(rho);
    let eval = |theta: f64, phi: f64, ws: &mut SpectrumWorkspace, buf: &mut Vec<Complex64>| {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        term_value(&b, &[Complex64::new(c, 0.0), e * s], a, ws, buf)
            + term_value(&b, &[Complex64::new(s, 0.0), -e * c], a, ws, buf)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = std::f64::consts::TAU;
    let (mut best, mut bt, mut bp) = (0..=grid)
        .into_par_iter()
        .map_init(
            || (SpectrumWorkspace::new(), Vec::new()),
            |(ws, buf), i| {
                let theta = half_pi * i as f64 / grid as f64;
                (0..grid)
                    .map(|j| {
                        let phi = two_pi * j as f64 / grid as f64;
                        (eval(theta, phi, ws, buf), theta, phi)
                    })
                    .fold((f64::NEG_INFINITY, 0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc })
            },
        )
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });

    let mut ws = SpectrumWorkspace::new();
    let mut buf = Vec::new();
    let (mut dt, mut dp) = (half_pi / grid as f64, two_pi / grid as f64);
    for _ in 0..12 {
        let (ct, cp) = (bt, bp);
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                let theta = (ct + dt * i as f64 / 5.0).clamp(0.0, half_pi);
                let phi = cp + dp * j as f64 / 5.0;
                let v = eval(theta, phi, &mut ws, &mut buf);
                if v > best {
                    (best, bt, bp) = (v, theta, phi);
                }
            }
        }
        dt /= 4.0;
        dp /= 4.0;
    }

    let obj = RoofObjective { b: b.clone(), alpha: a };
    let mut rng = util::rng_from_seed(0x0a11_ce5e_ed00_0002);
    for m in 3..=4 {
        for _ in 0..4 {
            let mut x = random_isometry(&mut rng, m, 2);
            let mut fx = obj.value(&x, &mut ws);
            let mut sigma = 0.3;
            for _ in 0..4000 {
                let trial = retract(&x + DMatrix::from_fn(m, 2, |_, _| util::complex_gaussian(&mut rng) * sigma));
                let ft = obj.value(&trial, &mut ws);
                if ft > fx {
                    x = trial;
                    fx = ft;
                } else {
                    sigma = (sigma * 0.995).max(1e-7);
                }
            }
            best = best.max(fx);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{haar_state, make_named_state, NamedState};

    fn t_state() -> PureState {
        make_named_state(&NamedState::T).unwrap()
    }

    fn quick() -> OptimizerOptions {
        OptimizerOptions {
            restarts: 8,
            ..OptimizerOptions::default()
        }
    }

    #[test]
    fn pure_entries_bypass_optimization() {
        let c = StateCollection::from_pure(t_state());
        let res = extended_purity(&c, 2, &quick()).unwrap();
        assert!((res.value - 0.75).abs() < 1e-14);
        assert_eq!(res.trace.iterations, 0);
        let m = extended_entropy(&c, 2, &quick()).unwrap().value;
        assert!((m - (4.0f64 / 3.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_is_free() {
        let c = StateCollection::from_density(DensityState::maximally_mixed(1).unwrap());
        let res = extended_purity(&c, 2, &quick()).unwrap();
        assert!((res.value - 1.0).abs() < 1e-9, "{}", res.value);
        assert!(res.decompositions[0].reconstruction_error < 1e-8);
        assert!(extended_entropy(&c, 2, &quick()).unwrap().value < 1e-9);
    }

    #[test]
    fn dephased_t_is_maximally_mixed() {
        let t = t_state();
        let mut zt = t.amplitudes().to_vec();
        zt[1] = -zt[1];
        let rho = DensityState::mixture(&[(0.5, t.clone()), (0.5, PureState::new(zt).unwrap())]).unwrap();
        let c = StateCollection::from_density(rho);
        assert!(extended_entropy(&c, 2, &quick()).unwrap().value <= 1e-6);
    }

    #[test]
    fn certificates_reconstruct_the_target() {
        let rho = DensityState::mixture(&[(0.7, haar_state(2, 1).unwrap()), (0.3, haar_state(2, 2).unwrap())]).unwrap();
        let c = StateCollection::from_density(rho);
        let res = extended_purity(&c, 2, &quick()).unwrap();
        let d = &res.decompositions[0];
        assert!(d.reconstruction_error < 1e-8);
        assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((d.average_purity(2.into()) - res.value).abs() < 1e-9);
    }

    #[test]
    fn retraction_is_isometric() {
        let mut rng = util::rng_from_seed(4);
        let v = random_isometry(&mut rng, 4, 2);
        let gram = v.adjoint() * &v;
        assert!((gram - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn unitary_completion_keeps_first_row() {
        let u = DMatrix::from_column_slice(3, 1, &[Complex64::new(0.0, 0.6), Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.0)]);
        let v = complete_to_unitary(&u);
        assert!((v.adjoint() * &v - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-12);
        let overlap: Complex64 = (0..3).map(|k| v[(0, k)].conj() * u[(k, 0)]).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let e = DMatrix::from_column_slice(2, 1, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let w = complete_to_unitary(&e);
        assert!((w.adjoint() * &w - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn min_entropy_cases() {
        let c = StateCollection::new(vec![
            (0.5, BranchState::Pure(PureState::zeros(1).unwrap())),
            (0.5, BranchState::Pure(t_state())),
        ])
        .unwrap();
        assert_eq!(collection_min_entropy(&c, 2, &quick()).unwrap().value, 0.0);
        let mixed = StateCollection::from_density(DensityState::maximally_mixed(1).unwrap());
        let res = collection_min_entropy(&mixed, 2, &quick()).unwrap();
        assert!(res.value < 1e-9, "{}", res.value);
        assert!(res.decompositions[0].reconstruction_error < 1e-8);
    }

    #[test]
    fn oracle_rejects_rank_one() {
        let rho = DensityState::from_pure(&t_state());
        assert!(roof_oracle_rank2(&rho, 2, 32).is_err());
        let mm = DensityState::maximally_mixed(1).unwrap();
        assert!((roof_oracle_rank2(&mm, 2, 64).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn optimizer_matches_oracle_on_t_mixture() {
        let rho = DensityState::mixture(&[(0.9, t_state()), (0.1, PureState::zeros(1).unwrap())]).unwrap();
        let c = StateCollection::from_density(rho.clone());
        let opt = extended_purity(&c, 2, &OptimizerOptions::default()).unwrap().value;
        let oracle = roof_oracle_rank2(&rho, 2, 720).unwrap();
        assert!((opt - oracle).abs() < 1e-4, "optimizer {opt} oracle {oracle}");
    }

    #[test]
    fn alpha_below_two_rejected() {
        let c = StateCollection::from_pure(t_state());
        assert!(extended_purity(&c, 1, &quick()).is_err());
    }
}
