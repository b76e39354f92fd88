//! Hermitian Pauli labels in the symplectic `(x, z)` encoding.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::PureState;

/// The Hermitian Pauli operator `i^{x·z} X^x Z^z` on `num_qubits` qubits.
///
/// Bits follow the basis-index convention of [`PureState`]: qubit `q` is bit
/// `num_qubits - 1 - q` of both `x` and `z`. On a single qubit `(1, 1)` is `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    num_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliLabel {
    pub fn new(num_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 32 {
            return Err(Error::InvalidArgument(format!(
                "Pauli labels support 1..=32 qubits, got {num_qubits}"
            )));
        }
        let mask = (1u64 << num_qubits) - 1;
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidArgument(format!(
                "bit strings x={x:#b}, z={z:#b} exceed {num_qubits} qubits"
            )));
        }
        Ok(Self { num_qubits, x, z })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, 0, 0)
    }

    /// Label stored at position `index = (x << n) | z` of a [`CharSpectrum`](crate::CharSpectrum).
    pub fn from_index(num_qubits: usize, index: usize) -> Result<Self> {
        let mask = (1usize << num_qubits) - 1;
        Self::new(num_qubits, (index >> num_qubits) as u64, (index & mask) as u64)
    }

    pub fn index(&self) -> usize {
        ((self.x as usize) << self.num_qubits) | self.z as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliLabel) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Single-qubit factor on qubit `q` as one of `I`, `X`, `Y`, `Z`.
    pub fn factor(&self, qubit: usize) -> char {
        let bit = self.num_qubits - 1 - qubit;
        match ((self.x >> bit) & 1, (self.z >> bit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            write!(f, "{}", self.factor(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in s.chars().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown Pauli factor {other:?} in {s:?}"
                    )))
                }
            }
        }
        Self::new(n, x, z)
    }
}

/// `⟨ψ|P|ψ⟩` before discarding the imaginary residue.
pub fn pauli_expectation_complex(state: &PureState, p: &PauliLabel) -> Result<Complex64> {
    if state.num_qubits() != p.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: state.num_qubits(),
            actual: p.num_qubits,
        });
    }
    let amps = state.amplitudes();
    let (x, z) = (p.x as usize, p.z as usize);
    let sum: Complex64 = amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let term = amps[b ^ x].conj() * a;
            if (z & b).count_ones() % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum();
    Ok(sum * i_power((p.x & p.z).count_ones()))
}

/// Real expectation value `tr(Pψ)` of a Hermitian Pauli.
pub fn pauli_expectation(state: &PureState, p: &PauliLabel) -> Result<f64> {
    let value = pauli_expectation_complex(state, p)?;
    debug_assert!(value.im.abs() < 1e-9, "imaginary residue {}", value.im);
    Ok(value.re)
}

/// `i^k`.
#[inline]
pub(crate) fn i_power(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["I", "XYZ", "ZIIY", "YY"] {
            assert_eq!(s.parse::<PauliLabel>().unwrap().to_string(), s);
        }
        assert!("XQ".parse::<PauliLabel>().is_err());
    }

    #[test]
    fn index_round_trip() {
        let p: PauliLabel = "XZY".parse().unwrap();
        assert_eq!(PauliLabel::from_index(3, p.index()).unwrap(), p);
    }

    #[test]
    fn commutation() {
        let x: PauliLabel = "X".parse().unwrap();
        let z: PauliLabel = "Z".parse().unwrap();
        let xx: PauliLabel = "XX".parse().unwrap();
        let zz: PauliLabel = "ZZ".parse().unwrap();
        assert!(!x.commutes_with(&z));
        assert!(xx.commutes_with(&zz));
    }

    #[test]
    fn expectation_examples() {
        let zero = PureState::zeros(1).unwrap();
        assert_eq!(pauli_expectation(&zero, &"Z".parse().unwrap()).unwrap(), 1.0);
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let t = PureState::new(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            w * FRAC_1_SQRT_2,
        ])
        .unwrap();
        let ex = pauli_expectation(&t, &"X".parse().unwrap()).unwrap();
        assert!((ex - FRAC_1_SQRT_2).abs() < 1e-14);
        let ey = pauli_expectation(&t, &"Y".parse().unwrap()).unwrap();
        assert!((ey - FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn mismatched_width_is_an_error() {
        let zero = PureState::zeros(2).unwrap();
        assert!(matches!(
            pauli_expectation(&zero, &"Z".parse().unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
