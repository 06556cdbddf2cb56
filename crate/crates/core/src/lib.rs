//! Numerics for the Gaussian Sachdev–Ye–Kitaev model.
//!
//! * [`majorana`]: Majorana operators as Pauli strings with exact phases.
//! * [`hamiltonian`]: Gaussian couplings and dense Hamiltonian assembly.
//! * [`spectrum`]: eigensolves, empirical measures and the exactly solvable
//!   `q = 2` pathway through antisymmetric Gaussian matrices.
//! * [`ldp`]: the auxiliary space, the rate function, the map to laws on the
//!   line and its inverse, and small-ball rate estimation.
//! * [`measures`]: the bounded-Lipschitz distance and the limiting laws.
//! * [`montecarlo`]: audits of moment-generating-function, shell, Lipschitz
//!   and concentration bounds.
//! * [`cli`]: the `syk` command-line front end.

pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod ldp;
pub mod majorana;
pub mod measures;
pub mod montecarlo;
pub mod rng;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
pub use hamiltonian::{assemble, hs_distance, sample_couplings, CouplingVector, SykHamiltonian};
pub use ldp::{char_fn, j_functional, metric_d, rate_i, CharFn, ExtReal};

pub use majorana::{majorana_operator, psi_product, IndexSet, PauliString};
pub use measures::{dbl_exact, limit_law, LawKind, LimitLaw};
pub use spectrum::{
    eigenvalues, empirical_measure, gamma_n, mu_spectrum, q2_spectrum, sample_antisymmetric,
    AuxPoint, DiscreteMeasure, MuSpectrum, Q2Mode,
};

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}
