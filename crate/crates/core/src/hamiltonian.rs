//! Gaussian couplings and the dense Hamiltonian
//! `H = i^{⌊q/2⌋} C(n,q)^{-1/2} Σ_R J_R Ψ_R`.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::{psi_product, IndexSet, PauliString};
use crate::rng::keyed_normal;

/// Largest Hilbert-space dimension [`assemble`] accepts by default.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingVector {
    pub n: usize,
    pub q: usize,
    /// `J_R`, with `R` running over `q`-subsets in lexicographic order.
    pub entries: Vec<f64>,
    /// Seed the entries were drawn from, if they were sampled.
    pub seed: Option<u64>,
}

pub(crate) fn check_order(n: usize, q: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddModes(n));
    }
    if q == 0 || q > n / 2 {
        return Err(Error::OrderOutOfRange { n, q });
    }
    Ok(())
}

/// The `q`-subsets of `{1..n}` in lexicographic order.
pub fn index_sets(n: usize, q: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=n).combinations(q)
}

/// Lexicographic position of the pair `(i, j)`, `1 ≤ i < j ≤ n`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    let i0 = i - 1;
    i0 * n - i0 * (i0 + 1) / 2 + (j - i - 1)
}

impl CouplingVector {
    pub fn from_values(n: usize, q: usize, entries: Vec<f64>) -> Result<Self> {
        check_order(n, q)?;
        let expected = crate::binomial(n, q) as usize;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected C({n},{q}) = {expected} couplings, got {}",
                entries.len()
            )));
        }
        Ok(Self {
            n,
            q,
            entries,
            seed: None,
        })
    }

    /// Couplings `J_{ij}`, `i < j`, read from the upper triangle of an
    /// antisymmetric matrix.
    pub fn from_antisymmetric(j: &DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                entries.push(j[(a, b)]);
            }
        }
        Self::from_values(n, 2, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `α·self + β·other`, entrywise.
    pub fn combine(&self, alpha: f64, other: &CouplingVector, beta: f64) -> Result<Self> {
        if (self.n, self.q) != (other.n, other.q) {
            return Err(Error::DimensionMismatch(format!(
                "(n,q) = ({},{}) vs ({},{})",
                self.n, self.q, other.n, other.q
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::from_values(self.n, self.q, entries)
    }

    pub fn euclidean_distance(&self, other: &CouplingVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// `C(n,q)` i.i.d. standard normals; entry `k` is a pure function of `(seed, k)`.
pub fn sample_couplings(n: usize, q: usize, seed: u64) -> Result<CouplingVector> {
    check_order(n, q)?;
    let count = crate::binomial(n, q) as usize;
    let entries = (0..count as u64).map(|k| keyed_normal(seed, k)).collect();
    Ok(CouplingVector {
        n,
        q,
        entries,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SykHamiltonian {
    pub n: usize,
    pub q: usize,
    pub matrix: DMatrix<Complex64>,
    pub couplings: CouplingVector,
}

impl SykHamiltonian {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn assemble(couplings: &CouplingVector) -> Result<SykHamiltonian> {
    assemble_with_cap(couplings, DEFAULT_DIM_CAP)
}

pub fn assemble_with_cap(couplings: &CouplingVector, dim_cap: usize) -> Result<SykHamiltonian> {
    let (n, q) = (couplings.n, couplings.q);
    check_order(n, q)?;
    if n / 2 >= usize::BITS as usize - 1 || (1usize << (n / 2)) > dim_cap {
        return Err(Error::DenseCapExceeded {
            dim: 1usize.checked_shl((n / 2) as u32).unwrap_or(usize::MAX),
            cap: dim_cap,
        });
    }
    let dim = 1usize << (n / 2);
    let scale = 1.0 / crate::binomial(n, q).sqrt();
    let prefix = (q / 2) as u8;

    let terms: Vec<(PauliString, f64)> = index_sets(n, q)
        .zip(&couplings.entries)
        .map(|(r, &j)| {
            let set = IndexSet::new(n, r)?;
            Ok((psi_product(n, &set)?.with_phase_shift(prefix), j * scale))
        })
        .collect::<Result<_>>()?;

    // Column-major storage: each column is accumulated independently, in the
    // lexicographic order of R, so the result does not depend on threading.
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(col, column)| {
        for (p, c) in &terms {
            let (row, e) = p.column_entry(col);
            let z = &mut column[row];
            match e {
                0 => z.re += c,
                1 => z.im += c,
                2 => z.re -= c,
                _ => z.im -= c,
            }
        }
    });
    Ok(SykHamiltonian {
        n,
        q,
        matrix: DMatrix::from_vec(dim, dim, data),
        couplings: couplings.clone(),
    })
}

/// Hilbert–Schmidt (Frobenius) norm of `H − H'`.
pub fn hs_distance(h: &SykHamiltonian, h2: &SykHamiltonian) -> Result<f64> {
    if (h.n, h.q) != (h2.n, h2.q) {
        return Err(Error::DimensionMismatch(format!(
            "(n,q) = ({},{}) vs ({},{})",
            h.n, h.q, h2.n, h2.q
        )));
    }
    Ok((&h.matrix - &h2.matrix).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 7;
        for (k, r) in index_sets(n, 2).enumerate() {
            assert_eq!(pair_index(n, r[0], r[1]), k);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_couplings(4, 2, 9).unwrap();
        let b = sample_couplings(4, 2, 9).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a, b);
        assert_eq!(sample_couplings(4, 3, 9), Err(Error::OrderOutOfRange { n: 4, q: 3 }));
        assert_eq!(sample_couplings(5, 2, 9), Err(Error::OddModes(5)));
    }

    #[test]
    fn zero_couplings_give_zero_matrix() {
        let c = CouplingVector::from_values(6, 3, vec![0.0; 20]).unwrap();
        let h = assemble(&c).unwrap();
        assert!(h.matrix.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dense_cap() {
        let c = CouplingVector::from_values(8, 2, vec![0.0; 28]).unwrap();
        assert!(matches!(
            assemble_with_cap(&c, 8),
            Err(Error::DenseCapExceeded { dim: 16, cap: 8 })
        ));
    }

    #[test]
    fn single_shift_distance() {
        // n=4, q=2: one coupling shifted by t gives ‖ΔH‖² = 4 t² / 6.
        let x = sample_couplings(4, 2, 3).unwrap();
        let mut y = x.clone();
        let t = 0.7;
        y.entries[2] += t;
        let d = hs_distance(&assemble(&x).unwrap(), &assemble(&y).unwrap()).unwrap();
        assert!((d * d - 4.0 * t * t / 6.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_and_traceless() {
        for (n, q) in [(4, 2), (6, 3), (8, 4), (8, 3), (10, 5)] {
            let h = assemble(&sample_couplings(n, q, 1).unwrap()).unwrap();
            let herm = (&h.matrix - h.matrix.adjoint()).camax();
            assert_eq!(herm, 0.0, "(n,q)=({n},{q})");
            assert!(h.matrix.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_distance() {
        let a = assemble(&sample_couplings(6, 2, 1).unwrap()).unwrap();
        let b = assemble(&sample_couplings(6, 3, 1).unwrap()).unwrap();
        assert!(hs_distance(&a, &b).is_err());
    }
}
