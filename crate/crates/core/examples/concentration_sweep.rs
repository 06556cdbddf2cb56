//! Variance of a spectral average across system sizes, scaled by C(n,q).

use syk::montecarlo::{concentration_sweep, TestFn};

fn main() -> syk::Result<()> {
    let plans = [(8, 2), (10, 2), (12, 2), (10, 3)];
    for f in [TestFn::Tanh, TestFn::ClippedAbs] {
        let r = concentration_sweep(&plans, f, 200, 1, 4)?;
        println!("f = {}", f.name());
        for row in &r.rows {
            println!(
                "  n={:2} q={} mean={:+.4} var*C={:.4} median d_BL={:.4}",
                row.n, row.q, row.mean, row.scaled_var, row.dbl_median
            );
        }
        println!("  max/min scaled variance: {:.3}", r.scaled_var_ratio);
    }
    Ok(())
}
