//! Stabilizer entropies, their convex-roof extensions, and magic-state
//! conversion bounds.

pub mod bounds;
pub mod clifford;
pub mod entropy;
pub mod error;
pub mod io;
pub mod named;
pub mod pauli;
pub mod protocol;
pub mod roof;
pub mod spectrum;
pub mod state;
pub(crate) mod util;
pub mod verify;

pub use clifford::{apply_clifford, random_clifford, CliffordCircuit, Gate};
pub use entropy::{
    linear_stabilizer_entropy, stabilizer_entropy, stabilizer_nullity, stabilizer_purity, RenyiIndex,
};
pub use error::{Error, Result};
pub use named::{haar_state, make_named_state, NamedState};
pub use pauli::{pauli_expectation, PauliLabel};
pub use spectrum::{char_spectrum, CharSpectrum};
pub use state::{DensityState, PureState};
