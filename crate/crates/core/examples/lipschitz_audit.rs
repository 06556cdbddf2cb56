//! Empirical Lipschitz ratios of spectral functionals in the couplings.

use syk::montecarlo::{lipschitz_audit, TestFn};

fn main() -> syk::Result<()> {
    for (n, q) in [(8, 2), (8, 3)] {
        let r = lipschitz_audit(n, q, 100, 1, 4, &TestFn::DEFAULT_FAMILY)?;
        for f in &r.functionals {
            println!("(n,q)=({n},{q}) {:<12} max ratio {:.4}", f.f.name(), f.max_ratio);
        }
        println!("(n,q)=({n},{q}) d_BL         max ratio {:.4}", r.dbl_max_ratio);
    }
    Ok(())
}
