//! Full Pauli spectrum of a pure state.
//!
//! For a fixed X-part `x` the expectations of all `2^n` Paulis `i^{x·z}X^xZ^z`
//! are one Walsh-Hadamard transform of `v_b = conj(ψ_{b⊕x}) ψ_b`, so the whole
//! spectrum costs `O(4^n n)` time and `O(2^n)` scratch per sector.
//!
//! Reductions are deterministic: each sector is summed pairwise and the
//! per-sector partial sums are combined pairwise in sector order, whatever the
//! number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{i_power, PauliLabel};
use crate::state::PureState;
use crate::util::pairwise_sum;

/// Default cap on the register size accepted by spectrum-based routines.
pub const DEFAULT_MAX_QUBITS: usize = 13;

/// Registers of at least this many qubits are processed in parallel.
const PARALLEL_MIN_QUBITS: usize = 7;

/// Characteristic distribution `Ξ_P = tr²(Pψ)/d` over all `4^n` Paulis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharSpectrum {
    num_qubits: usize,
    xi: Vec<f64>,
}

impl CharSpectrum {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Entries indexed by [`PauliLabel::index`].
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn get(&self, p: &PauliLabel) -> f64 {
        self.xi[p.index()]
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.xi)
    }

    /// Entries in ascending order, for multiset comparisons.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.xi.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `(label, Ξ_P)` for every entry above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<(PauliLabel, f64)> {
        self.xi
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(i, &v)| (PauliLabel::from_index(self.num_qubits, i).expect("in range"), v))
            .collect()
    }
}

/// Per-thread buffers for the sector transform.
#[derive(Clone, Debug, Default)]
pub struct SpectrumWorkspace {
    scratch: Vec<Complex64>,
    sector: Vec<f64>,
    partials: Vec<f64>,
}

impl SpectrumWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, dim: usize) {
        self.scratch.resize(dim, Complex64::new(0.0, 0.0));
        self.sector.resize(dim, 0.0);
    }
}

/// In-place unnormalized Walsh-Hadamard transform; `buf.len()` must be a power of two.
pub fn fwht(buf: &mut [Complex64]) {
    let len = buf.len();
    let mut half = 1;
    while half < len {
        for block in buf.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

/// Writes `⟨ψ|i^{x·z}X^xZ^z|ψ⟩` for every `z` into `out`.
fn sector_expectations(amps: &[Complex64], x: usize, scratch: &mut [Complex64], out: &mut [f64]) {
    for (b, slot) in scratch.iter_mut().enumerate() {
        *slot = amps[b ^ x].conj() * amps[b];
    }
    fwht(scratch);
    for (z, (w, e)) in scratch.iter().zip(out.iter_mut()).enumerate() {
        *e = (w * i_power(((x & z) as u64).count_ones())).re;
    }
}

fn check_size(state: &PureState, max_qubits: usize) -> Result<()> {
    if state.num_qubits() > max_qubits {
        return Err(Error::TooManyQubits {
            num_qubits: state.num_qubits(),
            max: max_qubits,
        });
    }
    Ok(())
}

/// `Σ_P g(tr(Pψ))` with the deterministic sector reduction, single-threaded.
pub fn expectation_sum_serial<G>(amps: &[Complex64], g: G, ws: &mut SpectrumWorkspace) -> f64
where
    G: Fn(f64) -> f64,
{
    let dim = amps.len();
    ws.ensure(dim);
    ws.partials.clear();
    for x in 0..dim {
        sector_expectations(amps, x, &mut ws.scratch, &mut ws.sector);
        for e in ws.sector.iter_mut() {
            *e = g(*e);
        }
        let s = pairwise_sum(&ws.sector);
        ws.partials.push(s);
    }
    pairwise_sum(&ws.partials)
}

/// `Σ_P g(tr(Pψ))` over the full Pauli group, parallel over sectors for large registers.
pub fn expectation_sum<G>(state: &PureState, max_qubits: usize, g: G) -> Result<f64>
where
    G: Fn(f64) -> f64 + Sync,
{
    check_size(state, max_qubits)?;
    let amps = state.amplitudes();
    if state.num_qubits() < PARALLEL_MIN_QUBITS {
        return Ok(expectation_sum_serial(amps, g, &mut SpectrumWorkspace::new()));
    }
    let dim = amps.len();
    let partials: Vec<f64> = (0..dim)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); dim], vec![0.0; dim]),
            |(scratch, sector), x| {
                sector_expectations(amps, x, scratch, sector);
                for e in sector.iter_mut() {
                    *e = g(*e);
                }
                pairwise_sum(sector)
            },
        )
        .collect();
    Ok(pairwise_sum(&partials))
}

/// Full characteristic distribution with the default qubit cap.
pub fn char_spectrum(state: &PureState) -> Result<CharSpectrum> {
    char_spectrum_with_limit(state, DEFAULT_MAX_QUBITS)
}

pub fn char_spectrum_with_limit(state: &PureState, max_qubits: usize) -> Result<CharSpectrum> {
    check_size(state, max_qubits)?;
    let amps = state.amplitudes();
    let dim = amps.len();
    let inv_dim = 1.0 / dim as f64;
    let mut xi = vec![0.0; dim * dim];
    let fill = |x: usize, chunk: &mut [f64], scratch: &mut Vec<Complex64>| {
        sector_expectations(amps, x, scratch, chunk);
        for e in chunk.iter_mut() {
            *e = *e * *e * inv_dim;
        }
    };
    if state.num_qubits() < PARALLEL_MIN_QUBITS {
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for (x, chunk) in xi.chunks_mut(dim).enumerate() {
            fill(x, chunk, &mut scratch);
        }
    } else {
        xi.par_chunks_mut(dim).enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |scratch, (x, chunk)| fill(x, chunk, scratch),
        );
    }
    Ok(CharSpectrum {
        num_qubits: state.num_qubits(),
        xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{make_named_state, NamedState};

    #[test]
    fn fwht_of_delta_is_flat() {
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(1.0, 0.0);
        fwht(&mut v);
        assert!(v.iter().all(|c| (c.re - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_state_spectrum() {
        let s = char_spectrum(&PureState::zeros(1).unwrap()).unwrap();
        assert_eq!(s.get(&"I".parse().unwrap()), 0.5);
        assert_eq!(s.get(&"Z".parse().unwrap()), 0.5);
        assert_eq!(s.get(&"X".parse().unwrap()), 0.0);
        assert_eq!(s.get(&"Y".parse().unwrap()), 0.0);
    }

    #[test]
    fn t_state_spectrum() {
        let t = make_named_state(&NamedState::T).unwrap();
        let s = char_spectrum(&t).unwrap();
        for (label, want) in [("I", 0.5), ("X", 0.25), ("Y", 0.25), ("Z", 0.0)] {
            assert!((s.get(&label.parse().unwrap()) - want).abs() < 1e-15, "{label}");
        }
    }

    #[test]
    fn ccz_spectrum_has_29_entries() {
        let ccz = make_named_state(&NamedState::Ckz(3)).unwrap();
        let s = char_spectrum(&ccz).unwrap();
        let support = s.support(1e-12);
        assert_eq!(support.len(), 29);
        let quarter = support.iter().filter(|(_, v)| (v - 1.0 / 32.0).abs() < 1e-14).count();
        assert_eq!(quarter, 28);
        assert!((s.get(&"III".parse().unwrap()) - 0.125).abs() < 1e-15);
        assert!((s.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversize_register_names_the_cost() {
        let s = PureState::zeros(3).unwrap();
        let err = char_spectrum_with_limit(&s, 2).unwrap_err();
        assert!(err.to_string().contains("4^3"));
    }

    #[test]
    fn serial_and_parallel_reductions_agree_bitwise() {
        let s = make_named_state(&NamedState::Haar { num_qubits: 8, seed: 3 }).unwrap();
        let par = expectation_sum(&s, DEFAULT_MAX_QUBITS, |e| e.powi(4)).unwrap();
        let ser = expectation_sum_serial(s.amplitudes(), |e| e.powi(4), &mut SpectrumWorkspace::new());
        assert_eq!(par.to_bits(), ser.to_bits());
    }
}
