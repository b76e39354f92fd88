//! Constructors for the named magic-state families and seeded Haar states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::PureState;
use crate::util;

/// Largest register the constructors will allocate.
pub const MAX_NAMED_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedState {
    /// `T|+⟩ = (|0⟩ + e^{iπ/4}|1⟩)/√2`.
    T,
    /// `m`-qubit `|C^{m-1}Z⟩ ∝ Σ_b (-1)^{b_1⋯b_m}|b⟩`.
    Ckz(usize),
    /// `m`-qubit `|C^{m-1}S⟩ ∝ Σ_b i^{b_1⋯b_m}|b⟩`.
    Cks(usize),
    Zeros(usize),
    Haar { num_qubits: usize, seed: u64 },
}

impl NamedState {
    pub fn num_qubits(&self) -> usize {
        match *self {
            NamedState::T => 1,
            NamedState::Ckz(m) | NamedState::Cks(m) | NamedState::Zeros(m) => m,
            NamedState::Haar { num_qubits, .. } => num_qubits,
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NamedState::T => write!(f, "T"),
            NamedState::Ckz(2) => write!(f, "CZ"),
            NamedState::Ckz(3) => write!(f, "CCZ"),
            NamedState::Ckz(m) => write!(f, "C^{}Z", m - 1),
            NamedState::Cks(2) => write!(f, "CS"),
            NamedState::Cks(m) => write!(f, "C^{}S", m - 1),
            NamedState::Zeros(n) => write!(f, "zeros:{n}"),
            NamedState::Haar { num_qubits, seed } => write!(f, "haar:{num_qubits}:{seed}"),
        }
    }
}

/// Shorthands: `T`, `cs`, `ccz`, `ckz:m`, `cks:m`, `zeros:n`, `haar:n:seed`.
impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split(':').collect();
        let num = |p: &str| {
            p.parse::<u64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number {p:?} in state {s:?}")))
        };
        let named = match parts.as_slice() {
            ["t"] => NamedState::T,
            ["cs"] => NamedState::Cks(2),
            ["ccz"] => NamedState::Ckz(3),
            ["ckz", m] => NamedState::Ckz(num(m)? as usize),
            ["cks", m] => NamedState::Cks(num(m)? as usize),
            ["zeros", n] => NamedState::Zeros(num(n)? as usize),
            ["haar", n, seed] => NamedState::Haar {
                num_qubits: num(n)? as usize,
                seed: num(seed)?,
            },
            _ => return Err(Error::InvalidArgument(format!("unknown state shorthand {s:?}"))),
        };
        Ok(named)
    }
}

pub fn make_named_state(name: &NamedState) -> Result<PureState> {
    let n = name.num_qubits();
    if n == 0 || n > MAX_NAMED_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "{name} needs between 1 and {MAX_NAMED_QUBITS} qubits"
        )));
    }
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let state = match *name {
        NamedState::T => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            PureState::from_raw(
                1,
                vec![
                    Complex64::new(h, 0.0),
                    Complex64::from_polar(h, std::f64::consts::FRAC_PI_4),
                ],
            )
        }
        NamedState::Ckz(_) | NamedState::Cks(_) => {
            // the product b_1⋯b_m is 1 only on the all-ones string
            let mut amps = vec![Complex64::new(amp, 0.0); dim];
            amps[dim - 1] = match name {
                NamedState::Ckz(_) => Complex64::new(-amp, 0.0),
                _ => Complex64::new(0.0, amp),
            };
            PureState::from_raw(n, amps)
        }
        NamedState::Zeros(_) => PureState::zeros(n)?,
        NamedState::Haar { seed, .. } => haar_state(n, seed)?,
    };
    Ok(state)
}

/// I.i.d. standard complex Gaussian amplitudes from a seeded ChaCha8 stream, normalized.
pub fn haar_state(num_qubits: usize, seed: u64) -> Result<PureState> {
    let mut rng = util::rng_from_seed(seed);
    haar_state_from(&mut rng, num_qubits)
}

pub(crate) fn haar_state_from<R: rand::Rng + ?Sized>(rng: &mut R, num_qubits: usize) -> Result<PureState> {
    if num_qubits == 0 {
        return Err(Error::BadLength(1));
    }
    let amps = (0..1usize << num_qubits)
        .map(|_| util::complex_gaussian(rng))
        .collect();
    PureState::normalized(amps)
}
