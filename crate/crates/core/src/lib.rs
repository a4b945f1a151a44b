pub mod bench;
pub mod error;
pub mod hamiltonian;
pub mod pauli;
pub mod postprocess;
pub mod resource;
pub mod rng;
pub mod sim;
pub mod spe;
pub mod spectral;
pub mod vqe;

pub use error::{Error, Result};
pub use hamiltonian::{PauliHamiltonian, PauliTerm};
pub use pauli::{Pauli, PauliString};

/// Guide chapters, compiled here so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/filters.md")]
    mod filters {}
    #[doc = include_str!("../../../book/src/signals.md")]
    mod signals {}
    #[doc = include_str!("../../../book/src/postprocessing.md")]
    mod postprocessing {}
    #[doc = include_str!("../../../book/src/vqe.md")]
    mod vqe {}
    #[doc = include_str!("../../../book/src/resources.md")]
    mod resources {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
