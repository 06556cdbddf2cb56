//! q = 2: the spectrum from the singular values of an antisymmetric matrix,
//! compared with a direct eigensolve.

use syk::hamiltonian::CouplingVector;
use syk::spectrum::sign_sums;
use syk::{assemble, eigenvalues, gamma_n, mu_spectrum, q2_spectrum, sample_antisymmetric, Q2Mode};

fn main() -> syk::Result<()> {
    let n = 10;
    let j = sample_antisymmetric(n, 11)?;
    let mu = mu_spectrum(&j)?;
    println!("mu = {:?}", mu.mu);

    let exact = q2_spectrum(&mu, Q2Mode::Exhaustive)?;
    println!("{} distinct atoms", exact.len());

    let mut closed = sign_sums(&mu.mu, 1.0 / syk::binomial(n, 2).sqrt());
    closed.sort_by(f64::total_cmp);
    let mut direct = eigenvalues(&assemble(&CouplingVector::from_antisymmetric(&j)?)?)?;
    direct.sort_by(f64::total_cmp);
    let err = closed.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |closed form - eigensolve| = {err:.2e}");

    let g = gamma_n(&mu);
    println!("gamma_n: x0 = {:.4}, x1 = {:.4}", g.x0(), g.coord(1));

    let sampled = q2_spectrum(&mu, Q2Mode::Sampled { samples: 10_000, seed: 3 })?;
    println!("sampled mode: {} atoms", sampled.len());
    Ok(())
}
