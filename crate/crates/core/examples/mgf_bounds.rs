//! Moment generating function of the squared singular values and the shell
//! probability, against their closed forms and bounds.

use syk::montecarlo::{mgf_estimate, shell_probability};

fn main() -> syk::Result<()> {
    for (n, k, a, b) in [(4, 0, 0.0, 0.1), (6, 0, 0.0, 0.25), (6, 1, 0.25, 0.0), (8, 1, 0.25, 0.0)] {
        let r = mgf_estimate(n, k, a, b, 20_000, 1, 4)?;
        println!(
            "n={n} k={k} a={a} b={b}: {:.4} [{:.4}, {:.4}] exact={:?} bound={:.4} -> {}",
            r.estimate, r.ci_low, r.ci_high, r.exact, r.bound, r.verdict
        );
    }
    let s = shell_probability(20, 0.5, 1.5, 5_000, 1, 4)?;
    println!("shell n=20: {:.4} (ci_low {:.6}) bound {:.6} -> {}", s.estimate, s.ci_low, s.bound, s.verdict);
    Ok(())
}
