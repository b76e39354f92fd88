//! Conversion-rate and conversion-probability bounds between magic states.
//!
//! With an additive monotone `M`, `r[R₁ → R₂] ≤ M(R₁)/M(R₂)`; with a strong
//! monotone, the success probability of a one-shot conversion obeys
//! `π ≤ M^lin(R₁)/M^lin(R₂)`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::entropy::{
    closed_form_purity, entropy_from_exact_purity, stabilizer_purity, to_f64, ClosedFormFamily, RenyiIndex,
};
use crate::error::{Error, Result};
use crate::named::NamedState;
use crate::state::PureState;

/// Entropies below this are treated as zero.
const FREE_THRESHOLD: f64 = 1e-12;

/// A conversion endpoint.
#[derive(Clone, Debug)]
pub enum StateRef {
    Named(NamedState),
    Explicit(PureState),
}

impl StateRef {
    fn family(&self) -> Option<ClosedFormFamily> {
        match self {
            StateRef::Named(NamedState::T) => Some(ClosedFormFamily::T),
            StateRef::Named(NamedState::Ckz(m)) if *m >= 1 => Some(ClosedFormFamily::Ckz(*m)),
            StateRef::Named(NamedState::Cks(m)) if *m >= 1 => Some(ClosedFormFamily::Cks(*m)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateRef::Named(n) => n.to_string(),
            StateRef::Explicit(s) => format!("explicit({} qubits)", s.num_qubits()),
        }
    }
}

impl From<NamedState> for StateRef {
    fn from(n: NamedState) -> Self {
        StateRef::Named(n)
    }
}

impl From<PureState> for StateRef {
    fn from(s: PureState) -> Self {
        StateRef::Explicit(s)
    }
}

/// `P_α`, exact when the state has a closed form.
enum Purity {
    Exact(BigRational),
    Float(f64),
}

impl Purity {
    fn of(state: &StateRef, alpha: u32) -> Result<Self> {
        if let Some(f) = state.family() {
            return Ok(Purity::Exact(closed_form_purity(f, alpha)));
        }
        let owned;
        let s = match state {
            StateRef::Explicit(s) => s,
            StateRef::Named(n) => {
                owned = crate::named::make_named_state(n)?;
                &owned
            }
        };
        Ok(Purity::Float(stabilizer_purity(s, RenyiIndex::from(alpha))?))
    }

    fn entropy(&self, alpha: u32) -> f64 {
        match self {
            Purity::Exact(p) => entropy_from_exact_purity(p, alpha),
            Purity::Float(p) => (-(-(1.0 - p)).ln_1p() / std::f64::consts::LN_2 / (alpha as f64 - 1.0)).max(0.0),
        }
    }

    fn linear(&self) -> f64 {
        match self {
            Purity::Exact(p) => to_f64(&(BigRational::one() - p)),
            Purity::Float(p) => 1.0 - p,
        }
    }

    fn exact(&self) -> Option<&BigRational> {
        match self {
            Purity::Exact(p) => Some(p),
            Purity::Float(_) => None,
        }
    }
}

fn check_alpha(alpha: u32) -> Result<()> {
    if alpha < 2 {
        return Err(Error::InvalidArgument(format!("conversion bounds need alpha >= 2, got {alpha}")));
    }
    Ok(())
}

/// `M_α(source)/M_α(target)`.
pub fn rate_bound(source: &StateRef, target: &StateRef, alpha: u32) -> Result<f64> {
    check_alpha(alpha)?;
    let t = Purity::of(target, alpha)?.entropy(alpha);
    if t < FREE_THRESHOLD {
        return Err(Error::FreeTarget);
    }
    Ok(Purity::of(source, alpha)?.entropy(alpha) / t)
}

/// `min(1, M_α^lin(source)/M_α^lin(target))`.
pub fn prob_bound(source: &StateRef, target: &StateRef, alpha: u32) -> Result<f64> {
    check_alpha(alpha)?;
    let (s, t) = (Purity::of(source, alpha)?, Purity::of(target, alpha)?);
    if let (Some(ps), Some(pt)) = (s.exact(), t.exact()) {
        let lt = BigRational::one() - pt;
        if lt.is_zero() {
            return Err(Error::FreeTarget);
        }
        return Ok(to_f64(&((BigRational::one() - ps) / lt)).min(1.0));
    }
    let lt = t.linear();
    if lt < FREE_THRESHOLD {
        return Err(Error::FreeTarget);
    }
    Ok((s.linear() / lt).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub source: String,
    pub target: String,
    pub alpha: u32,
    pub rate_bound: f64,
    pub prob_bound: f64,
    /// Exact purities used, as `num/den` strings, when both endpoints have closed forms.
    pub source_purity: Option<String>,
    pub target_purity: Option<String>,
    /// The rate rounded up at one decimal, for rows quoted as headline numbers.
    pub headline: Option<f64>,
    /// Cited lower bound `m/3` on the reverse rate, for `C^{m-1}Z → CCZ` rows.
    pub backward_lower_bound: Option<f64>,
}

pub fn bound_report(source: &StateRef, target: &StateRef, alpha: u32) -> Result<BoundReport> {
    let (s, t) = (Purity::of(source, alpha)?, Purity::of(target, alpha)?);
    let backward_lower_bound = match (source, target) {
        (StateRef::Named(NamedState::Ckz(m)), StateRef::Named(NamedState::Ckz(3))) => Some(*m as f64 / 3.0),
        _ => None,
    };
    Ok(BoundReport {
        source: source.label(),
        target: target.label(),
        alpha,
        rate_bound: rate_bound(source, target, alpha)?,
        prob_bound: prob_bound(source, target, alpha)?,
        source_purity: s.exact().map(|p| p.to_string()),
        target_purity: t.exact().map(|p| p.to_string()),
        headline: None,
        backward_lower_bound,
    })
}

/// Rounds up at the first decimal, ignoring float noise below 1e-12.
pub fn round_up_one_decimal(x: f64) -> f64 {
    ((x * 10.0) - 1e-9).ceil() / 10.0
}

/// Sources whose rate into CCZ is quoted as a rounded headline value.
pub const HEADLINE_SOURCES: [NamedState; 4] = [
    NamedState::Ckz(4),
    NamedState::Ckz(5),
    NamedState::Cks(3),
    NamedState::Cks(4),
];

/// `C^{n-1}Z` and `C^{n-1}S` for `n = 3…8` into T, CS and CCZ.
///
/// At `α = 2` the four [`HEADLINE_SOURCES`] rows into CCZ carry their rounded value.
pub fn appendix_table(alpha: u32) -> Result<Vec<BoundReport>> {
    check_alpha(alpha)?;
    let targets = [NamedState::T, NamedState::Cks(2), NamedState::Ckz(3)];
    let mut rows = Vec::new();
    for make in [NamedState::Ckz as fn(usize) -> NamedState, NamedState::Cks] {
        for n in 3..=8 {
            let source = make(n);
            for target in targets {
                let mut row = bound_report(&source.into(), &target.into(), alpha)?;
                if alpha == 2 && target == NamedState::Ckz(3) && HEADLINE_SOURCES.contains(&source) {
                    row.headline = Some(round_up_one_decimal(row.rate_bound));
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
