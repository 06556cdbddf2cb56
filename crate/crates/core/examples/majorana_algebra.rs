//! Majorana operators as Pauli strings: anticommutators, products, traces.

use syk::majorana::{dense, pauli_trace, string_product};
use syk::{majorana_operator, psi_product, IndexSet};

fn main() -> syk::Result<()> {
    let n = 6;
    for i in 1..=n {
        println!("psi_{i} = {}", majorana_operator(n, i)?);
    }

    let a = IndexSet::new(n, vec![1, 2, 5])?;
    let b = IndexSet::new(n, vec![2, 3])?;
    let (pa, pb) = (psi_product(n, &a)?, psi_product(n, &b)?);
    let prod = string_product(&pa, &pb)?;
    let sym = psi_product(n, &a.symmetric_difference(&b)?)?;
    println!("Psi_A Psi_B = {prod}");
    println!("Psi_(A^B)   = {sym}  (equal up to sign: {})", prod.equals_up_to_sign(&sym));
    println!("Tr Psi_A = {}", pauli_trace(&pa));

    // Dense check of psi_1 psi_2 + psi_2 psi_1 = 0.
    let (d1, d2) = (dense(&majorana_operator(4, 1)?)?, dense(&majorana_operator(4, 2)?)?);
    let anti = &d1 * &d2 + &d2 * &d1;
    println!("{{psi_1, psi_2}} is zero: {}", anti.iter().all(|z| z.re == 0 && z.im == 0));
    Ok(())
}
