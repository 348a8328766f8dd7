//! Statevector simulation of excited-state adiabatic preparation.
//!
//! An electronic ground state is tensored with a single photon qubit in `|1⟩`
//! and carried along a schedule of photon frequency `ω(s)` and light–matter
//! coupling `λ(s)` into the lowest dipole-allowed excited state with the
//! photon in vacuum.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod ground_state;
pub mod krylov;
pub mod models;
pub mod operator;
pub mod pathway;
pub mod pauli;
pub mod pauli_fierz;
pub mod propagator;
pub mod statevector;

pub use error::{Error, Result};
pub use operator::PauliOperator;
pub use pauli::{FermionOp, Pauli, PauliString, PauliSum};
pub use statevector::StateVector;

// Guide chapters and the README are compiled as doctests so their examples
// track the API.
#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../", $path))]
            pub struct $name;
        };
    }
    chapter!(Readme, "README.md");
    chapter!(Introduction, "book/src/introduction.md");
    chapter!(Pauli, "book/src/pauli.md");
    chapter!(Models, "book/src/models.md");
    chapter!(Pathway, "book/src/pathway.md");
    chapter!(Propagation, "book/src/propagation.md");
    chapter!(GroundState, "book/src/ground_state.md");
    chapter!(Circuits, "book/src/circuits.md");
    chapter!(Cli, "book/src/cli.md");
    chapter!(Validation, "book/src/validation.md");
}
