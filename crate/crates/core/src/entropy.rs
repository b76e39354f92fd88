//! Stabilizer purities and stabilizer entropies of pure states.
//!
//! `P_α(ψ) = d⁻¹ Σ_P |⟨ψ|P|ψ⟩|^{2α}` is evaluated from the Pauli spectrum as
//! `d^{α-1} Σ_P Ξ_P^α`; `M_α = log₂(P_α)/(1-α)` in bits, with `α = 1` taken as
//! the Shannon limit `H(Ξ) - n`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{self, SpectrumWorkspace, DEFAULT_MAX_QUBITS};
use crate::state::PureState;

/// Rényi index `α ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RenyiIndex(f64);

impl RenyiIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Renyi index must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_shannon(&self) -> bool {
        self.0 == 1.0
    }

    /// `Some(k)` when the index is a small non-negative integer.
    pub fn as_integer(&self) -> Option<u32> {
        (self.0.fract() == 0.0 && self.0 <= 1024.0).then_some(self.0 as u32)
    }
}

impl TryFrom<f64> for RenyiIndex {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RenyiIndex> for f64 {
    fn from(a: RenyiIndex) -> f64 {
        a.0
    }
}

impl From<u32> for RenyiIndex {
    fn from(k: u32) -> Self {
        Self(k as f64)
    }
}

/// `|e|^{2α}` for an expectation value `e`.
fn moment(alpha: RenyiIndex) -> impl Fn(f64) -> f64 + Sync + Copy {
    let a = alpha.0;
    let int = alpha.as_integer();
    move |e: f64| {
        let sq = e * e;
        match int {
            // 0^0 is taken as 0: only Paulis with non-vanishing expectation count
            Some(0) => (sq > 1e-24) as u8 as f64,
            Some(k) => sq.powi(k as i32),
            None => sq.powf(a),
        }
    }
}

pub fn stabilizer_purity(state: &PureState, alpha: RenyiIndex) -> Result<f64> {
    stabilizer_purity_with_limit(state, alpha, DEFAULT_MAX_QUBITS)
}

pub fn stabilizer_purity_with_limit(state: &PureState, alpha: RenyiIndex, max_qubits: usize) -> Result<f64> {
    let total = spectrum::expectation_sum(state, max_qubits, moment(alpha))?;
    Ok(total / state.dim() as f64)
}

/// Single-threaded purity for small registers in optimizer inner loops.
pub fn purity_serial(amplitudes: &[Complex64], alpha: RenyiIndex, ws: &mut SpectrumWorkspace) -> f64 {
    spectrum::expectation_sum_serial(amplitudes, moment(alpha), ws) / amplitudes.len() as f64
}

/// `M_α(ψ)` in bits.
pub fn stabilizer_entropy(state: &PureState, alpha: RenyiIndex) -> Result<f64> {
    if alpha.is_shannon() {
        let d = state.dim() as f64;
        let h = spectrum::expectation_sum(state, DEFAULT_MAX_QUBITS, move |e| {
            let xi = e * e / d;
            if xi > 1e-300 {
                -xi * xi.log2()
            } else {
                0.0
            }
        })?;
        return Ok(h - state.num_qubits() as f64);
    }
    Ok(entropy_from_purity(stabilizer_purity(state, alpha)?, alpha))
}

/// `log₂(P)/(1-α)`; not defined at `α = 1`.
pub fn entropy_from_purity(purity: f64, alpha: RenyiIndex) -> f64 {
    purity.log2() / (1.0 - alpha.0) + 0.0
}

/// `M_α^lin(ψ) = 1 - P_α(ψ)`.
pub fn linear_stabilizer_entropy(state: &PureState, alpha: RenyiIndex) -> Result<f64> {
    Ok(1.0 - stabilizer_purity(state, alpha)?)
}

pub const DEFAULT_NULLITY_TOLERANCE: f64 = 1e-8;

/// `ν(ψ) = n - log₂|{P : |⟨ψ|P|ψ⟩| ≥ 1 - tol}|`.
///
/// The counted set is the unsigned stabilizer group, so its size must be a
/// power of two; anything else means `tol` straddles a near-unit expectation.
pub fn stabilizer_nullity(state: &PureState, tol: f64) -> Result<usize> {
    let cutoff = 1.0 - tol;
    let count = spectrum::expectation_sum(state, DEFAULT_MAX_QUBITS, move |e| {
        (e.abs() >= cutoff) as u8 as f64
    })?;
    let count = count.round() as u64;
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::Degenerate(format!(
            "{count} Paulis have |expectation| >= 1 - {tol:e}, not a group size; use a tighter tolerance"
        )));
    }
    let dim = count.trailing_zeros() as usize;
    Ok(state.num_qubits().saturating_sub(dim))
}

/// All pure-state quantities at one Rényi index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub alpha: RenyiIndex,
    pub purity: f64,
    pub entropy_bits: f64,
    pub linear: f64,
    pub nullity: usize,
}

pub fn entropy_report(state: &PureState, alpha: RenyiIndex) -> Result<EntropyReport> {
    let purity = stabilizer_purity(state, alpha)?;
    let entropy_bits = if alpha.is_shannon() {
        stabilizer_entropy(state, alpha)?
    } else {
        entropy_from_purity(purity, alpha)
    };
    Ok(EntropyReport {
        alpha,
        purity,
        entropy_bits,
        linear: 1.0 - purity,
        nullity: stabilizer_nullity(state, DEFAULT_NULLITY_TOLERANCE)?,
    })
}

/// State families with exact purity formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClosedFormFamily {
    T,
    /// `m`-qubit `|C^{m-1}Z⟩`.
    Ckz(usize),
    /// `m`-qubit `|C^{m-1}S⟩`.
    Cks(usize),
}

impl ClosedFormFamily {
    pub fn named_state(&self) -> crate::named::NamedState {
        match *self {
            ClosedFormFamily::T => crate::named::NamedState::T,
            ClosedFormFamily::Ckz(m) => crate::named::NamedState::Ckz(m),
            ClosedFormFamily::Cks(m) => crate::named::NamedState::Cks(m),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.named_state().num_qubits()
    }
}

impl std::fmt::Display for ClosedFormFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.named_state().fmt(f)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow(base: &BigRational, exp: u32) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Exact `P_α` for the named families, `α ≥ 1` integer.
///
/// With `d = 2^m`:
/// * T: `(2^α + 2) / 2^{α+1}`
/// * CkZ: `d⁻¹[1 + (d-1)(1-4/d)^{2α} + ((d-1)(d-2)/2)(4/d)^{2α}]`
/// * CkS: `d⁻¹[1 + (d-1)(1-2/d)^{2α} + (2/d)^{2α}(d-1)²]`
///
/// The CkZ coefficient `(d-1)(d-2)/2` matches brute force; see
/// [`printed_ckz_purity`] for the variant with `2^{α-1}/d^{2α}` that does not.
pub fn closed_form_purity(family: ClosedFormFamily, alpha: u32) -> BigRational {
    let one = BigRational::one();
    match family {
        ClosedFormFamily::T => {
            let two = rat(2);
            (pow(&two, alpha) + rat(2)) / pow(&two, alpha + 1)
        }
        ClosedFormFamily::Ckz(m) => {
            let d = pow(&rat(2), m as u32);
            let four_over_d = rat(4) / &d;
            let pairs = (&d - &one) * (&d - rat(2)) / rat(2);
            (&one
                + (&d - &one) * pow(&(&one - &four_over_d), 2 * alpha)
                + pairs * pow(&four_over_d, 2 * alpha))
                / d
        }
        ClosedFormFamily::Cks(m) => {
            let d = pow(&rat(2), m as u32);
            let two_over_d = rat(2) / &d;
            let dm1 = &d - &one;
            (&one + &dm1 * pow(&(&one - &two_over_d), 2 * alpha) + pow(&two_over_d, 2 * alpha) * &dm1 * &dm1)
                / d
        }
    }
}

/// The CkZ purity with third-term coefficient `2^{α-1}/d^{2α}·(d²-3d+2)`.
///
/// Kept for comparison only: it gives 0.1823 for CCZ at α = 2 where the
/// spectrum gives 11/32.
pub fn printed_ckz_purity(m: usize, alpha: u32) -> BigRational {
    let one = BigRational::one();
    let d = pow(&rat(2), m as u32);
    let third = pow(&rat(2), alpha - 1) / pow(&d, 2 * alpha) * (&d * &d - rat(3) * &d + rat(2));
    (&one + pow(&(&one - rat(4) / &d), 2 * alpha) * (&d - &one) + third) / d
}

/// `-log₂(P)/(α-1)` evaluated from `1 - P` to keep precision when `P ≈ 1`.
pub fn entropy_from_exact_purity(purity: &BigRational, alpha: u32) -> f64 {
    let deficit = BigRational::one() - purity;
    let deficit = to_f64(&deficit);
    let ln_p = (-deficit).ln_1p();
    -ln_p / std::f64::consts::LN_2 / (alpha as f64 - 1.0)
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{apply_clifford, random_clifford};
    use crate::named::{make_named_state, NamedState};

    fn named(n: NamedState) -> PureState {
        make_named_state(&n).unwrap()
    }

    #[test]
    fn t_state_values() {
        let t = named(NamedState::T);
        assert!((stabilizer_purity(&t, 2.into()).unwrap() - 0.75).abs() < 1e-14);
        assert!((stabilizer_entropy(&t, 2.into()).unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!((linear_stabilizer_entropy(&t, 2.into()).unwrap() - 0.25).abs() < 1e-14);
        assert_eq!(stabilizer_nullity(&t, 1e-8).unwrap(), 1);
    }

    #[test]
    fn ccz_values() {
        let ccz = named(NamedState::Ckz(3));
        assert!((stabilizer_purity(&ccz, 2.into()).unwrap() - 11.0 / 32.0).abs() < 1e-14);
        assert!((linear_stabilizer_entropy(&ccz, 2.into()).unwrap() - 21.0 / 32.0).abs() < 1e-14);
        assert!((stabilizer_purity(&ccz, 3.into()).unwrap() - 23.0 / 128.0).abs() < 1e-14);
        assert_eq!(stabilizer_nullity(&ccz, 1e-8).unwrap(), 3);
    }

    #[test]
    fn cs_entropy() {
        let cs = named(NamedState::Cks(2));
        let m2 = stabilizer_entropy(&cs, 2.into()).unwrap();
        assert!((m2 - (16.0f64 / 7.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_states_have_zero_entropy() {
        for seed in 0..10 {
            let c = random_clifford(3, seed).unwrap();
            let s = apply_clifford(&PureState::zeros(3).unwrap(), &c).unwrap();
            for alpha in [0.5, 1.0, 2.0, 3.0] {
                let m = stabilizer_entropy(&s, RenyiIndex::new(alpha).unwrap()).unwrap();
                assert!(m.abs() < 1e-9, "seed {seed} alpha {alpha}: {m}");
            }
            assert_eq!(stabilizer_nullity(&s, 1e-8).unwrap(), 0);
        }
        let z = PureState::zeros(4).unwrap();
        assert_eq!(stabilizer_purity(&z, 7.into()).unwrap(), 1.0);
    }

    #[test]
    fn zero_index_counts_support() {
        // P_0 = |support|/d; the T state has 3 nonzero expectations
        let t = named(NamedState::T);
        assert_eq!(stabilizer_purity(&t, 0.into()).unwrap(), 1.5);
    }

    #[test]
    fn closed_forms_exact() {
        let r = |s: &str| s.parse::<BigRational>().unwrap();
        assert_eq!(closed_form_purity(ClosedFormFamily::T, 2), r("3/4"));
        assert_eq!(closed_form_purity(ClosedFormFamily::Cks(2), 2), r("7/16"));
        assert_eq!(closed_form_purity(ClosedFormFamily::Ckz(3), 2), r("11/32"));
        assert_eq!(closed_form_purity(ClosedFormFamily::Ckz(4), 2), r("25216/65536"));
        assert_eq!(closed_form_purity(ClosedFormFamily::Ckz(2), 3), r("1"));
    }

    #[test]
    fn printed_ckz_form_disagrees_at_ccz() {
        let printed = to_f64(&printed_ckz_purity(3, 2));
        assert!((printed - 0.1823).abs() < 1e-4, "{printed}");
        assert!((printed - 11.0 / 32.0).abs() > 0.1);
    }

    #[test]
    fn exact_entropy_matches_float_path() {
        let p = closed_form_purity(ClosedFormFamily::Ckz(3), 2);
        assert!((entropy_from_exact_purity(&p, 2) - (32.0f64 / 11.0).log2()).abs() < 1e-14);
    }

    #[test]
    fn report_fields_are_consistent() {
        let ccz = named(NamedState::Ckz(3));
        let rep = entropy_report(&ccz, 2.into()).unwrap();
        assert!((rep.linear - (1.0 - rep.purity)).abs() < 1e-15);
        assert!(rep.entropy_bits <= rep.nullity as f64 + 1e-9);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.starts_with(r#"{"alpha":2.0,"purity":"#), "{json}");
        assert!(RenyiIndex::new(-1.0).is_err());
        assert!(serde_json::from_str::<RenyiIndex>("-2.0").is_err());
    }
}
