//! Interpreter for stabilizer protocols with exhaustive branching.
//!
//! A program is a list of steps. Measurements and random splits fork the
//! current branch; each fork runs its conditional sub-program and then the
//! remaining steps of the enclosing program. Output branches appear in
//! depth-first order with outcome 0 (or branch `a`) first.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{apply_gate, random_gate, Gate};
use crate::error::{Error, Result};
use crate::io::{DensityFile, StateFile};
use crate::state::{DensityState, PureState};
use crate::util;

/// Branches lighter than this are discarded.
pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-12;

/// Fidelity above which two pure branches are merged.
const COALESCE_FIDELITY: f64 = 1.0 - 1e-12;

/// Registers are never grown beyond the input size plus this many qubits by [`random_protocol`].
const RANDOM_EXTRA_QUBITS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolStep {
    Clifford {
        gates: Vec<Gate>,
    },
    /// Computational-basis measurement; outcome 0 runs `then`, outcome 1 runs `else`.
    Measure {
        qubit: usize,
        #[serde(default)]
        keep: bool,
        #[serde(default, rename = "then")]
        then_branch: ProtocolProgram,
        #[serde(default, rename = "else")]
        else_branch: ProtocolProgram,
    },
    TraceOut {
        qubit: usize,
    },
    /// Appends `count` qubits in `|0⟩` after the last qubit.
    AppendZero {
        count: usize,
    },
    /// Runs `a` with probability `p` and `b` otherwise.
    RandomSplit {
        p: f64,
        #[serde(default)]
        a: ProtocolProgram,
        #[serde(default)]
        b: ProtocolProgram,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProtocolProgram {
    pub steps: Vec<ProtocolStep>,
}

impl ProtocolProgram {
    pub fn new(steps: Vec<ProtocolStep>) -> Self {
        Self { steps }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks every branch path and returns the output qubit count.
    pub fn validate(&self, num_qubits: usize) -> Result<usize> {
        validate_steps(&self.steps, num_qubits, "")
    }
}

fn step_path(prefix: &str, index: usize) -> String {
    if prefix.is_empty() {
        format!("step {index}")
    } else {
        format!("{prefix} > step {index}")
    }
}

fn validate_steps(steps: &[ProtocolStep], mut n: usize, prefix: &str) -> Result<usize> {
    for (i, step) in steps.iter().enumerate() {
        let path = step_path(prefix, i);
        let ill = |reason: String| Error::IllTyped {
            path: path.clone(),
            reason,
        };
        let check_qubit = |q: usize, n: usize| {
            if q >= n {
                Err(ill(format!("qubit {q} out of range for {n} qubits")))
            } else {
                Ok(())
            }
        };
        n = match step {
            ProtocolStep::Clifford { gates } => {
                for g in gates {
                    g.validate(n).map_err(|e| ill(e.to_string()))?;
                }
                n
            }
            ProtocolStep::Measure {
                qubit,
                keep,
                then_branch,
                else_branch,
            } => {
                check_qubit(*qubit, n)?;
                let after = if *keep { n } else { n - 1 };
                if after == 0 {
                    return Err(ill("discarding the last qubit".into()));
                }
                let n0 = validate_steps(&then_branch.steps, after, &format!("{path} > then"))?;
                let n1 = validate_steps(&else_branch.steps, after, &format!("{path} > else"))?;
                if n0 != n1 {
                    return Err(ill(format!("then ends with {n0} qubits but else with {n1}")));
                }
                n0
            }
            ProtocolStep::TraceOut { qubit } => {
                check_qubit(*qubit, n)?;
                if n == 1 {
                    return Err(ill("tracing out the last qubit".into()));
                }
                n - 1
            }
            ProtocolStep::AppendZero { count } => {
                if *count == 0 {
                    return Err(ill("append_zero needs count >= 1".into()));
                }
                n + count
            }
            ProtocolStep::RandomSplit { p, a, b } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(ill(format!("split probability {p} outside (0, 1)")));
                }
                let na = validate_steps(&a.steps, n, &format!("{path} > a"))?;
                let nb = validate_steps(&b.steps, n, &format!("{path} > b"))?;
                if na != nb {
                    return Err(ill(format!("branch a ends with {na} qubits but b with {nb}")));
                }
                na
            }
        };
    }
    Ok(n)
}

/// The state held by one output branch.
#[derive(Clone, Debug)]
pub enum BranchState {
    Pure(PureState),
    Mixed(DensityState),
}

impl BranchState {
    pub fn num_qubits(&self) -> usize {
        match self {
            BranchState::Pure(s) => s.num_qubits(),
            BranchState::Mixed(r) => r.num_qubits(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            BranchState::Pure(s) => Some(s),
            BranchState::Mixed(_) => None,
        }
    }

    pub fn to_density(&self) -> DensityState {
        match self {
            BranchState::Pure(s) => DensityState::from_pure(s),
            BranchState::Mixed(r) => r.clone(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BranchRepr {
    Pure(StateFile),
    Mixed(DensityFile),
}

impl Serialize for BranchState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BranchState::Pure(s) => BranchRepr::Pure(s.into()),
            BranchState::Mixed(r) => BranchRepr::Mixed(r.into()),
        }
        .serialize(serializer)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CollectionEntry {
    pub weight: f64,
    pub state: BranchState,
}

/// A branch dropped for falling under the threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenormalizationEvent {
    pub path: String,
    pub dropped_weight: f64,
}

/// Weighted output collection `{(p_i, ρ_i)}`.
#[derive(Clone, Debug, Serialize)]
pub struct StateCollection {
    entries: Vec<CollectionEntry>,
    events: Vec<RenormalizationEvent>,
}

impl StateCollection {
    /// Validates positivity and unit total weight (within 1e-9).
    pub fn new(entries: Vec<(f64, BranchState)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty collection".into()));
        }
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 || entries.iter().any(|(w, _)| w.is_nan() || *w <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "collection weights must be positive and sum to 1, got total {total}"
            )));
        }
        Ok(Self {
            entries: entries
                .into_iter()
                .map(|(weight, state)| CollectionEntry { weight, state })
                .collect(),
            events: Vec::new(),
        })
    }

    pub fn from_pure(state: PureState) -> Self {
        Self {
            entries: vec![CollectionEntry {
                weight: 1.0,
                state: BranchState::Pure(state),
            }],
            events: Vec::new(),
        }
    }

    pub fn from_density(rho: DensityState) -> Self {
        Self {
            entries: vec![CollectionEntry {
                weight: 1.0,
                state: BranchState::Mixed(rho),
            }],
            events: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[CollectionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn events(&self) -> &[RenormalizationEvent] {
        &self.events
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn all_pure(&self) -> bool {
        self.entries.iter().all(|e| e.state.as_pure().is_some())
    }

    /// `(p_i, ψ_i)` pairs when every branch is pure.
    pub fn pure_branches(&self) -> Option<Vec<(f64, &PureState)>> {
        self.entries
            .iter()
            .map(|e| e.state.as_pure().map(|s| (e.weight, s)))
            .collect()
    }
}

/// Execution switches for [`run_protocol_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Trace out into a density matrix instead of splitting a pure branch.
    pub density_trace_out: bool,
    pub drop_threshold: f64,
    /// Merge branches holding the same state.
    pub coalesce: bool,
    /// Follow one sampled outcome per fork instead of all of them.
    pub sample_seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            density_trace_out: false,
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            coalesce: true,
            sample_seed: None,
        }
    }
}

#[derive(Clone, Debug)]
enum Work {
    Pure(Vec<Complex64>),
    Mixed(DMatrix<Complex64>),
}

struct Runner<'a> {
    options: &'a RunOptions,
    rng: Option<ChaCha8Rng>,
    out: Vec<(f64, usize, Work)>,
    events: Vec<RenormalizationEvent>,
}

/// Runs `program` on `input` with default options.
pub fn run_protocol(input: &PureState, program: &ProtocolProgram, seed: Option<u64>) -> Result<StateCollection> {
    let options = RunOptions {
        sample_seed: seed,
        ..RunOptions::default()
    };
    run_protocol_with(input, program, &options)
}

pub fn run_protocol_with(input: &PureState, program: &ProtocolProgram, options: &RunOptions) -> Result<StateCollection> {
    program.validate(input.num_qubits())?;
    let mut runner = Runner {
        options,
        rng: options.sample_seed.map(util::rng_from_seed),
        out: Vec::new(),
        events: Vec::new(),
    };
    runner.exec(
        vec![(&program.steps[..], String::new())],
        1.0,
        input.num_qubits(),
        Work::Pure(input.amplitudes().to_vec()),
    );
    let total: f64 = runner.out.iter().map(|(w, _, _)| w).sum();
    if runner.out.is_empty() || total <= 0.0 {
        return Err(Error::BranchUnderflow);
    }
    let mut entries: Vec<(f64, usize, Work)> = Vec::with_capacity(runner.out.len());
    for (w, n, work) in runner.out {
        let w = w / total;
        if options.coalesce {
            if let Some(slot) = entries.iter_mut().find(|(_, m, other)| *m == n && same_state(other, &work)) {
                slot.0 += w;
                continue;
            }
        }
        entries.push((w, n, work));
    }
    let entries = entries
        .into_iter()
        .map(|(weight, n, work)| {
            let state = match work {
                Work::Pure(amps) => BranchState::Pure(PureState::from_raw(n, amps)),
                Work::Mixed(m) => BranchState::Mixed(DensityState::new(m)?),
            };
            Ok(CollectionEntry { weight, state })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateCollection {
        entries,
        events: runner.events,
    })
}

fn same_state(a: &Work, b: &Work) -> bool {
    match (a, b) {
        (Work::Pure(x), Work::Pure(y)) => {
            let ov: Complex64 = x.iter().zip(y).map(|(u, v)| u.conj() * v).sum();
            ov.norm_sqr() >= COALESCE_FIDELITY
        }
        (Work::Mixed(x), Work::Mixed(y)) => crate::state::max_entry_distance(x, y) < 1e-12,
        _ => false,
    }
}

impl Runner<'_> {
    /// `frames` is a stack of (remaining steps, path prefix); the top runs first.
    fn exec(&mut self, mut frames: Vec<(&[ProtocolStep], String)>, weight: f64, n: usize, mut work: Work) {
        loop {
            let Some((steps, prefix)) = frames.last_mut() else {
                self.out.push((weight, n, work));
                return;
            };
            let Some((step, rest)) = steps.split_first() else {
                frames.pop();
                continue;
            };
            *steps = rest;
            let prefix = prefix.clone();
            match step {
                ProtocolStep::Clifford { gates } => {
                    for g in gates {
                        apply_gate_work(&mut work, n, g);
                    }
                }
                ProtocolStep::AppendZero { count } => {
                    work = append_zero(&work, *count);
                    return self.exec(frames, weight, n + count, work);
                }
                ProtocolStep::TraceOut { qubit } => match work {
                    Work::Mixed(ref m) => {
                        work = Work::Mixed(partial_trace(m, n, *qubit));
                        return self.exec(frames, weight, n - 1, work);
                    }
                    Work::Pure(ref amps) if self.options.density_trace_out => {
                        let v = nalgebra::DVector::from_column_slice(amps);
                        let rho = &v * v.adjoint();
                        work = Work::Mixed(partial_trace(&rho, n, *qubit));
                        return self.exec(frames, weight, n - 1, work);
                    }
                    Work::Pure(_) => {
                        let empty = ProtocolProgram::default();
                        return self.fork_measure(frames, &prefix, weight, n, &work, *qubit, false, &empty, &empty);
                    }
                },
                ProtocolStep::Measure {
                    qubit,
                    keep,
                    then_branch,
                    else_branch,
                } => {
                    return self.fork_measure(frames, &prefix, weight, n, &work, *qubit, *keep, then_branch, else_branch);
                }
                ProtocolStep::RandomSplit { p, a, b } => {
                    let forks = [(*p, a, "a"), (1.0 - *p, b, "b")];
                    let chosen = self.choose(&[*p, 1.0 - *p]);
                    for (k, (pk, prog, tag)) in forks.into_iter().enumerate() {
                        if chosen.is_some_and(|c| c != k) {
                            continue;
                        }
                        let w = if chosen.is_some() { weight } else { weight * pk };
                        let path = format!("{prefix}{tag}");
                        if w < self.options.drop_threshold {
                            self.events.push(RenormalizationEvent {
                                path,
                                dropped_weight: w,
                            });
                            continue;
                        }
                        let mut f = frames.clone();
                        f.push((&prog.steps[..], format!("{path} > ")));
                        self.exec(f, w, n, work.clone());
                    }
                    return;
                }
            }
        }
    }

    /// Index of the sampled outcome in sampling mode, `None` when branching exhaustively.
    fn choose(&mut self, probs: &[f64]) -> Option<usize> {
        let rng = self.rng.as_mut()?;
        let total: f64 = probs.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (k, p) in probs.iter().enumerate() {
            if u < *p {
                return Some(k);
            }
            u -= p;
        }
        Some(probs.len() - 1)
    }

    #[allow(clippy::too_many_arguments)]
    fn fork_measure<'p>(
        &mut self,
        frames: Vec<(&'p [ProtocolStep], String)>,
        prefix: &str,
        weight: f64,
        n: usize,
        work: &Work,
        qubit: usize,
        keep: bool,
        then_branch: &'p ProtocolProgram,
        else_branch: &'p ProtocolProgram,
    ) {
        let outcomes: Vec<(f64, Work)> = (0..2).map(|o| project(work, n, qubit, o, keep)).collect();
        let chosen = self.choose(&[outcomes[0].0, outcomes[1].0]);
        let n_after = if keep { n } else { n - 1 };
        for (o, ((prob, post), prog)) in outcomes.into_iter().zip([then_branch, else_branch]).enumerate() {
            if chosen.is_some_and(|c| c != o) {
                continue;
            }
            let w = if chosen.is_some() { weight } else { weight * prob };
            let path = format!("{prefix}q{qubit}={o}");
            if w < self.options.drop_threshold || prob <= 0.0 {
                if w > 0.0 {
                    self.events.push(RenormalizationEvent {
                        path,
                        dropped_weight: w,
                    });
                }
                continue;
            }
            let mut f = frames.clone();
            f.push((&prog.steps[..], format!("{path} > ")));
            self.exec(f, w, n_after, post);
        }
    }
}

fn apply_gate_work(work: &mut Work, n: usize, gate: &Gate) {
    match work {
        Work::Pure(amps) => apply_gate(amps, n, gate),
        Work::Mixed(m) => {
            // U ρ U† = (U (U ρ)†)†, applying U column by column
            let d = m.nrows();
            for col in m.as_mut_slice().chunks_mut(d) {
                apply_gate(col, n, gate);
            }
            let mut t = m.adjoint();
            for col in t.as_mut_slice().chunks_mut(d) {
                apply_gate(col, n, gate);
            }
            *m = t.adjoint();
        }
    }
}

fn append_zero(work: &Work, count: usize) -> Work {
    match work {
        Work::Pure(amps) => {
            let mut out = vec![Complex64::new(0.0, 0.0); amps.len() << count];
            for (i, a) in amps.iter().enumerate() {
                out[i << count] = *a;
            }
            Work::Pure(out)
        }
        Work::Mixed(m) => {
            let d = m.nrows() << count;
            let mut out = DMatrix::zeros(d, d);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out[(i << count, j << count)] = m[(i, j)];
                }
            }
            Work::Mixed(out)
        }
    }
}

fn partial_trace(m: &DMatrix<Complex64>, n: usize, qubit: usize) -> DMatrix<Complex64> {
    let pos = util::bit_of(n, qubit);
    let d = m.nrows() / 2;
    DMatrix::from_fn(d, d, |i, j| {
        (0..2)
            .map(|b| m[(util::insert_bit(i, pos, b), util::insert_bit(j, pos, b))])
            .sum()
    })
}

/// Born probability of `outcome` and the renormalized post-measurement state.
fn project(work: &Work, n: usize, qubit: usize, outcome: usize, keep: bool) -> (f64, Work) {
    let pos = util::bit_of(n, qubit);
    let mask = 1usize << pos;
    let hit = |i: usize| (i & mask != 0) as usize == outcome;
    match work {
        Work::Pure(amps) => {
            let prob: f64 = amps
                .iter()
                .enumerate()
                .filter(|(i, _)| hit(*i))
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let scale = if prob > 0.0 { prob.sqrt().recip() } else { 0.0 };
            let post = if keep {
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| if hit(i) { a * scale } else { Complex64::new(0.0, 0.0) })
                    .collect()
            } else {
                (0..amps.len() / 2)
                    .map(|i| amps[util::insert_bit(i, pos, outcome)] * scale)
                    .collect()
            };
            (prob, Work::Pure(post))
        }
        Work::Mixed(m) => {
            let prob: f64 = (0..m.nrows()).filter(|&i| hit(i)).map(|i| m[(i, i)].re).sum();
            let scale = if prob > 0.0 { prob.recip() } else { 0.0 };
            let post = if keep {
                DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                    if hit(i) && hit(j) {
                        m[(i, j)] * scale
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            } else {
                let d = m.nrows() / 2;
                DMatrix::from_fn(d, d, |i, j| {
                    m[(util::insert_bit(i, pos, outcome), util::insert_bit(j, pos, outcome))] * scale
                })
            };
            (prob, Work::Mixed(post))
        }
    }
}

/// One branch of weight 1 (within `tol`) holding a pure state.
pub fn is_deterministic_pure(result: &StateCollection, tol: f64) -> bool {
    match result.entries() {
        [only] => {
            (only.weight - 1.0).abs() <= tol
                && match &only.state {
                    BranchState::Pure(_) => true,
                    BranchState::Mixed(r) => r.max_eigenvalue() >= 1.0 - tol,
                }
        }
        _ => false,
    }
}

/// Seeded random program of `depth` top-level steps drawn from every step kind.
///
/// The register never drops below one qubit or grows past `n + 2`.
/// Conditional sub-programs leave the qubit count unchanged.
pub fn random_protocol(n: usize, depth: usize, seed: u64) -> Result<ProtocolProgram> {
    if depth == 0 {
        return Err(Error::InvalidArgument("random_protocol needs depth >= 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("random_protocol needs n >= 1".into()));
    }
    let mut rng = util::rng_from_seed(seed);
    let max_n = n + RANDOM_EXTRA_QUBITS;
    let mut cur = n;
    let mut steps = Vec::with_capacity(depth);
    while steps.len() < depth {
        let step = match rng.random_range(0..5) {
            0 => random_clifford_step(&mut rng, cur),
            1 => {
                let keep = cur == 1 || rng.random_bool(0.5);
                let after = if keep { cur } else { cur - 1 };
                let step = ProtocolStep::Measure {
                    qubit: rng.random_range(0..cur),
                    keep,
                    then_branch: random_subprogram(&mut rng, after, 1),
                    else_branch: random_subprogram(&mut rng, after, 1),
                };
                cur = after;
                step
            }
            2 if cur > 1 => {
                let qubit = rng.random_range(0..cur);
                cur -= 1;
                ProtocolStep::TraceOut { qubit }
            }
            3 if cur < max_n => {
                let count = rng.random_range(1..=(max_n - cur).min(2));
                cur += count;
                ProtocolStep::AppendZero { count }
            }
            4 => ProtocolStep::RandomSplit {
                p: rng.random_range(0.05..0.95),
                a: random_subprogram(&mut rng, cur, 1),
                b: random_subprogram(&mut rng, cur, 1),
            },
            _ => continue,
        };
        steps.push(step);
    }
    Ok(ProtocolProgram::new(steps))
}

fn random_clifford_step<R: Rng>(rng: &mut R, n: usize) -> ProtocolStep {
    let len = rng.random_range(1..=4);
    let gates = (0..len)
        .map(|_| {
            if rng.random_bool(0.2) {
                let q = rng.random_range(0..n);
                [Gate::PauliX(q), Gate::PauliY(q), Gate::PauliZ(q)][rng.random_range(0..3)]
            } else {
                random_gate(rng, n)
            }
        })
        .collect();
    ProtocolStep::Clifford { gates }
}

/// Count-preserving sub-program of up to two steps.
fn random_subprogram<R: Rng>(rng: &mut R, n: usize, nesting: usize) -> ProtocolProgram {
    let len = rng.random_range(0..=2);
    let steps = (0..len)
        .map(|_| match rng.random_range(0..4) {
            0 if nesting > 0 => ProtocolStep::Measure {
                qubit: rng.random_range(0..n),
                keep: true,
                then_branch: random_subprogram(rng, n, nesting - 1),
                else_branch: random_subprogram(rng, n, nesting - 1),
            },
            1 if nesting > 0 => ProtocolStep::RandomSplit {
                p: rng.random_range(0.05..0.95),
                a: random_subprogram(rng, n, nesting - 1),
                b: random_subprogram(rng, n, nesting - 1),
            },
            _ => random_clifford_step(rng, n),
        })
        .collect();
    ProtocolProgram::new(steps)
}

/// CNOT from the `|T⟩` qubit onto the data qubit, measure the data qubit, correct with `S·X`.
///
/// On `|T⟩⊗|ψ⟩` the output is `T|ψ⟩` on the remaining qubit for every `ψ`.
pub fn injection_program() -> ProtocolProgram {
    ProtocolProgram::new(vec![
        ProtocolStep::Clifford {
            gates: vec![Gate::Cnot { control: 0, target: 1 }],
        },
        ProtocolStep::Measure {
            qubit: 1,
            keep: false,
            then_branch: ProtocolProgram::default(),
            else_branch: ProtocolProgram::new(vec![ProtocolStep::Clifford {
                gates: vec![Gate::PauliX(0), Gate::Phase(0)],
            }]),
        },
    ])
}
