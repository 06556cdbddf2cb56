//! Monte Carlo small-ball probabilities for gamma_n and the implied rates.

use syk::ldp::small_ball_rates;
use syk::{rate_i, AuxPoint};

fn main() -> syk::Result<()> {
    let n = 20;
    let x = AuxPoint::x_min();
    let eps = [0.5, 0.75, 1.0];
    for r in small_ball_rates(&x, &eps, n, 20_000, 5, 4)? {
        println!(
            "eps={:<4} hits={:<6} p={:.4} [{:.4}, {:.4}] rate={}",
            r.epsilon, r.hits, r.p_hat, r.ci_low, r.ci_high, r.rate
        );
    }
    println!("I(x_min) = {}", rate_i(&x));
    Ok(())
}
