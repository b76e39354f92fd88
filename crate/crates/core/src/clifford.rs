//! Clifford gates acting on dense state vectors.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::state::PureState;
use crate::util;

/// Elementary Clifford gate. Qubit indices are 0-based from the most significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Hadamard(usize),
    /// `diag(1, i)`.
    Phase(usize),
    Cnot { control: usize, target: usize },
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Hadamard(q) | Gate::Phase(q) | Gate::PauliX(q) | Gate::PauliY(q) | Gate::PauliZ(q) => {
                vec![q]
            }
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidArgument(format!(
                "CNOT control and target coincide on qubit {}",
                qs[0]
            )));
        }
        Ok(())
    }

    fn mnemonic(&self) -> &'static str {
        match self {
            Gate::Hadamard(_) => "H",
            Gate::Phase(_) => "S",
            Gate::Cnot { .. } => "CNOT",
            Gate::PauliX(_) => "X",
            Gate::PauliY(_) => "Y",
            Gate::PauliZ(_) => "Z",
        }
    }
}

/// Applies `gate` in place to the columns-of-length-`2^n` vector `amps`.
///
/// Indices are assumed valid; see [`Gate::validate`].
pub fn apply_gate(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) {
    let i = Complex64::new(0.0, 1.0);
    match *gate {
        Gate::Hadamard(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for_pairs(amps, num_qubits, q, |a, b| {
                let (u, v) = (*a, *b);
                *a = (u + v) * s;
                *b = (u - v) * s;
            });
        }
        Gate::Phase(q) => for_pairs(amps, num_qubits, q, |_, b| *b *= i),
        Gate::PauliX(q) => for_pairs(amps, num_qubits, q, std::mem::swap),
        Gate::PauliY(q) => for_pairs(amps, num_qubits, q, |a, b| {
            let (u, v) = (*a, *b);
            *a = -i * v;
            *b = i * u;
        }),
        Gate::PauliZ(q) => for_pairs(amps, num_qubits, q, |_, b| *b = -*b),
        Gate::Cnot { control, target } => {
            let cbit = 1usize << util::bit_of(num_qubits, control);
            let tbit = 1usize << util::bit_of(num_qubits, target);
            for idx in 0..amps.len() {
                if idx & cbit != 0 && idx & tbit == 0 {
                    amps.swap(idx, idx | tbit);
                }
            }
        }
    }
}

/// Calls `f(amp[..0..], amp[..1..])` for every index pair differing in qubit `q`.
fn for_pairs<F>(amps: &mut [Complex64], num_qubits: usize, qubit: usize, mut f: F)
where
    F: FnMut(&mut Complex64, &mut Complex64),
{
    let stride = 1usize << util::bit_of(num_qubits, qubit);
    for block in amps.chunks_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// An ordered list of Clifford gates on a fixed register size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(num_qubits)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn apply_in_place(&self, amps: &mut [Complex64]) {
        for g in &self.gates {
            apply_gate(amps, self.num_qubits, g);
        }
    }
}

/// `U|ψ⟩` for the circuit `U`.
pub fn apply_clifford(state: &PureState, circuit: &CliffordCircuit) -> Result<PureState> {
    if circuit.num_qubits != state.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.num_qubits(),
            actual: circuit.num_qubits,
        });
    }
    for g in &circuit.gates {
        g.validate(state.num_qubits())?;
    }
    let mut amps = state.amplitudes().to_vec();
    circuit.apply_in_place(&mut amps);
    Ok(PureState::from_raw(state.num_qubits(), amps))
}

/// Seeded sequence of `20·n` gates drawn uniformly from {H, S, CNOT} on uniform qubits.
///
/// This samples gate words, not the Haar measure on the Clifford group.
pub fn random_clifford(num_qubits: usize, seed: u64) -> Result<CliffordCircuit> {
    if num_qubits == 0 {
        return Err(Error::InvalidArgument("random_clifford needs n >= 1".into()));
    }
    let mut rng = util::rng_from_seed(seed);
    let gates = (0..20 * num_qubits)
        .map(|_| random_gate(&mut rng, num_qubits))
        .collect();
    CliffordCircuit::new(num_qubits, gates)
}

pub(crate) fn random_gate<R: Rng + ?Sized>(rng: &mut R, num_qubits: usize) -> Gate {
    let kinds = if num_qubits > 1 { 3 } else { 2 };
    match rng.random_range(0..kinds) {
        0 => Gate::Hadamard(rng.random_range(0..num_qubits)),
        1 => Gate::Phase(rng.random_range(0..num_qubits)),
        _ => {
            let control = rng.random_range(0..num_qubits);
            let mut target = rng.random_range(0..num_qubits - 1);
            if target >= control {
                target += 1;
            }
            Gate::Cnot { control, target }
        }
    }
}

// Scripts spell gates as arrays: ["H", 0], ["CNOT", 0, 1].
impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let qs = self.qubits();
        let mut seq = serializer.serialize_seq(Some(1 + qs.len()))?;
        seq.serialize_element(self.mnemonic())?;
        for q in qs {
            seq.serialize_element(&q)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct GateVisitor;

        impl<'de> Visitor<'de> for GateVisitor {
            type Value = Gate;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(r#"a gate array such as ["H", 0] or ["CNOT", 0, 1]"#)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Gate, A::Error> {
                let name: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let first: usize = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let second: Option<usize> = seq.next_element()?;
                let gate = match (name.to_ascii_uppercase().as_str(), second) {
                    ("H", None) => Gate::Hadamard(first),
                    ("S", None) => Gate::Phase(first),
                    ("X", None) => Gate::PauliX(first),
                    ("Y", None) => Gate::PauliY(first),
                    ("Z", None) => Gate::PauliZ(first),
                    ("CNOT" | "CX", Some(target)) => Gate::Cnot {
                        control: first,
                        target,
                    },
                    _ => {
                        return Err(de::Error::custom(format!(
                            "unknown gate {name:?} with {} qubit argument(s)",
                            1 + second.is_some() as usize
                        )))
                    }
                };
                if seq.next_element::<serde::de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom(format!("too many arguments for gate {name:?}")));
                }
                Ok(gate)
            }
        }

        deserializer.deserialize_seq(GateVisitor)
    }
}
