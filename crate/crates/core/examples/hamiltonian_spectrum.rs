//! Assemble a Hamiltonian, diagonalize it, look at its spectral moments.

use syk::measures::moments;
use syk::{assemble, eigenvalues, empirical_measure, sample_couplings};

fn main() -> syk::Result<()> {
    for (n, q) in [(8, 2), (10, 3), (12, 4)] {
        let h = assemble(&sample_couplings(n, q, 7)?)?;
        let rho = empirical_measure(&eigenvalues(&h)?)?;
        println!(
            "n={n:2} q={q} dim={:4}  m1={:+.2e}  m2={:.4}  m4={:.4}",
            h.dimension(),
            moments(&rho, 1),
            moments(&rho, 2),
            moments(&rho, 4)
        );
    }
    Ok(())
}
