//! J, I and the metric on the auxiliary space.

use syk::{j_functional, metric_d, rate_i, AuxPoint};

fn main() -> syk::Result<()> {
    let points = [
        AuxPoint::x_min(),
        AuxPoint::new(1.2, vec![])?,
        AuxPoint::new(1.25, vec![0.5, 0.25])?,
        AuxPoint::new(0.5, vec![0.5, 0.5])?,
        AuxPoint::new(3.0, vec![1.0])?,
    ];
    for x in &points {
        println!(
            "x0={:<5} tail={:<12} J={:<8.4} I={}  d(x, x_min)={:.3}",
            x.x0(),
            format!("{:?}", x.tail()),
            j_functional(x),
            rate_i(x),
            metric_d(x, &AuxPoint::x_min())
        );
    }
    Ok(())
}
