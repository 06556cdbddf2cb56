//! The law phi(x): characteristic function, grid inversion, sampling, and
//! recovery of x from the characteristic function.

use syk::ldp::{phi_grid, phi_sample, reconstruct};
use syk::measures::moments;
use syk::{char_fn, metric_d, AuxPoint};

fn main() -> syk::Result<()> {
    let x = AuxPoint::new(1.5, vec![0.6, 0.6, 0.3])?;
    let cf = char_fn(&x);
    for s in [0.0, 0.5, 1.0, 2.0] {
        println!("E exp(isX) at s={s}: {:.6}", cf.eval(s));
    }

    let grid = phi_grid(&x, 10.0, 2048)?;
    let sampled = phi_sample(&x, 50_000, 1)?;
    println!("second moment: grid {:.4}, sampled {:.4}, x0 {}",
        moments(&grid, 2), moments(&sampled, 2), x.x0());

    let back = reconstruct(|s| cf.eval(s), 8, 1e-12)?;
    println!("recovered x0={:.10} tail={:?}", back.x0(), back.tail());
    println!("d(x, recovered) = {:.2e}", metric_d(&x, &back));
    Ok(())
}
