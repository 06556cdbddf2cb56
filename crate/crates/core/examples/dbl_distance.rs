//! Exact bounded-Lipschitz distance with its dual certificate.

use syk::measures::dbl_bruteforce;
use syk::{dbl_exact, empirical_measure, limit_law, DiscreteMeasure, LawKind};

fn main() -> syk::Result<()> {
    for t in [0.1, 1.0, 2.0, 3.0] {
        let d = dbl_exact(&DiscreteMeasure::dirac(0.0), &DiscreteMeasure::dirac(t))?;
        println!("d_BL(delta_0, delta_{t}) = {}", d.distance);
    }

    let mu = DiscreteMeasure::new(vec![-1.0, 0.3, 2.0], vec![0.2, 0.5, 0.3])?;
    let nu = DiscreteMeasure::uniform(&[-0.5, 0.0, 1.5])?;
    let r = dbl_exact(&mu, &nu)?;
    println!("exact {:.6}, grid {:.6}, certificate ok: {}",
        r.distance, dbl_bruteforce(&mu, &nu, 41)?, r.certificate.verify(1e-9));

    // An empirical measure against the discretized semicircle.
    let semi = limit_law(LawKind::Semicircle, None)?.discretize(4096)?;
    let pts: Vec<f64> = (0..200).map(|k| -2.0 + 4.0 * (k as f64 + 0.5) / 200.0).collect();
    let d = dbl_exact(&empirical_measure(&pts)?, &semi.measure)?;
    println!("uniform[-2,2] vs semicircle: {:.4} (discretization error <= {:.1e})",
        d.distance, semi.error_bound);
    Ok(())
}
