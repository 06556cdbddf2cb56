//! Majorana operators as Pauli strings.
//!
//! A [`PauliString`] stores `i^phase · Π_k X_k^{x_k} Z_k^{z_k}`, with qubit `k`
//! mapped to bit `k` of both masks and of the computational basis index. The
//! Majorana modes use the Jordan–Wigner layout
//!
//! ```text
//! ψ_{2k-1} = Z ⊗ … ⊗ Z ⊗ X ⊗ I ⊗ … ⊗ I
//! ψ_{2k}   = Z ⊗ … ⊗ Z ⊗ Y ⊗ I ⊗ … ⊗ I      (k-1 leading Z factors)
//! ```
//!
//! Products only XOR the masks and count a phase, so every identity in this
//! module is exact integer arithmetic.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};

/// Maximum number of qubits for which [`dense`] will materialize a matrix.
pub const DEFAULT_DENSE_QUBIT_CAP: usize = 15;

/// Maximum number of qubits a mask can hold.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase: u8,
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, phase: u8) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let valid = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        if x_mask & !valid != 0 || z_mask & !valid != 0 {
            return Err(Error::InvalidParameter(format!(
                "mask has bits beyond {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
            phase: phase & 3,
        })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, 0, 0, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Exponent `p` of the global factor `i^p`, in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn dimension(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Self-adjointness: `i^p X^x Z^z` is Hermitian iff `p ≡ |x ∧ z| (mod 2)`.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + (self.x_mask & self.z_mask).count_ones()) % 2 == 0
    }

    /// Returns `+1` or `-1` such that `P² = sign · I`.
    pub fn square_sign(&self) -> i32 {
        let e = (2 * self.phase as u32 + 2 * (self.x_mask & self.z_mask).count_ones()) % 4;
        if e == 0 {
            1
        } else {
            -1
        }
    }

    /// Equality up to a factor `±1`.
    pub fn equals_up_to_sign(&self, other: &PauliString) -> bool {
        self.n_qubits == other.n_qubits
            && self.x_mask == other.x_mask
            && self.z_mask == other.z_mask
            && (self.phase + 4 - other.phase) % 2 == 0
    }

    /// The single nonzero entry of column `b`: its row and the exponent `e`
    /// such that the entry equals `i^e`.
    #[inline]
    pub fn column_entry(&self, b: usize) -> (usize, u8) {
        let row = b ^ self.x_mask as usize;
        let parity = (self.z_mask & b as u64).count_ones() as u8 & 1;
        (row, (self.phase + 2 * parity) & 3)
    }

    pub fn with_phase_shift(&self, k: u8) -> Self {
        Self {
            phase: (self.phase + k) & 3,
            ..*self
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        // X^x Z^z per qubit; XZ is written as "XZ" to keep the phase convention visible.
        for k in 0..self.n_qubits {
            let x = self.x_mask >> k & 1 == 1;
            let z = self.z_mask >> k & 1 == 1;
            let s = match (x, z) {
                (false, false) => "I",
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "(XZ)",
            };
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Sorted, strictly increasing subset of `{1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    n: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        check_modes(n)?;
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidIndexSet(format!(
                    "not strictly increasing: {:?}",
                    indices
                )));
            }
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(Self { n, indices })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Builds the set whose bit `i-1` is set in `mask`.
    pub fn from_mask(n: usize, mask: u128) -> Result<Self> {
        check_modes(n)?;
        if n < 128 && mask >> n != 0 {
            return Err(Error::InvalidIndexSet(format!("mask {mask:#b} exceeds n={n}")));
        }
        let indices = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        Ok(Self { n, indices })
    }

    pub fn mask(&self) -> u128 {
        self.indices.iter().fold(0u128, |m, &i| m | 1u128 << (i - 1))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn symmetric_difference(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "index sets over n={} and n={}",
                self.n, other.n
            )));
        }
        IndexSet::from_mask(self.n, self.mask() ^ other.mask())
    }
}

fn check_modes(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 || n / 2 > MAX_QUBITS {
        return Err(Error::OddModes(n));
    }
    Ok(())
}

/// The Majorana operator `ψ_i` on `n/2` qubits.
pub fn majorana_operator(n: usize, i: usize) -> Result<PauliString> {
    check_modes(n)?;
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let k = (i - 1) / 2; // qubit carrying the X or Y
    let string = 1u64 << k;
    let z_chain = string - 1;
    if i % 2 == 1 {
        PauliString::new(n / 2, string, z_chain, 0)
    } else {
        // Y = i·XZ
        PauliString::new(n / 2, string, z_chain | string, 1)
    }
}

/// Exact product `P·Q` with the phase tracked modulo 4.
pub fn string_product(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.n_qubits != q.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "Pauli strings on {} and {} qubits",
            p.n_qubits, q.n_qubits
        )));
    }
    // Z^{z1} X^{x2} = (-1)^{|z1 ∧ x2|} X^{x2} Z^{z1}
    let swaps = (p.z_mask & q.x_mask).count_ones() as u8 & 1;
    Ok(PauliString {
        n_qubits: p.n_qubits,
        x_mask: p.x_mask ^ q.x_mask,
        z_mask: p.z_mask ^ q.z_mask,
        phase: (p.phase + q.phase + 2 * swaps) & 3,
    })
}

/// Ordered product `Ψ_A = ψ_{i_1} ⋯ ψ_{i_m}`, with `Ψ_∅ = I`.
pub fn psi_product(n: usize, a: &IndexSet) -> Result<PauliString> {
    if a.n() != n {
        return Err(Error::InvalidIndexSet(format!(
            "index set over n={} used with n={n}",
            a.n()
        )));
    }
    let mut acc = PauliString::identity(n / 2)?;
    for &i in a.as_slice() {
        acc = string_product(&acc, &majorana_operator(n, i)?)?;
    }
    Ok(acc)
}

/// Trace of the represented matrix: `i^p · 2^{n_qubits}` for the identity
/// string, zero otherwise.
pub fn pauli_trace(p: &PauliString) -> Complex<f64> {
    if !p.is_identity_up_to_phase() {
        return Complex::new(0.0, 0.0);
    }
    let dim = (p.n_qubits as f64).exp2();
    let z = i_pow(p.phase);
    Complex::new(z.re as f64 * dim, z.im as f64 * dim)
}

/// `i^e` as an exact Gaussian integer.
pub fn i_pow(e: u8) -> Complex<i32> {
    match e & 3 {
        0 => Complex::new(1, 0),
        1 => Complex::new(0, 1),
        2 => Complex::new(-1, 0),
        _ => Complex::new(0, -1),
    }
}

/// Dense matrix with exact `0, ±1, ±i` entries.
pub fn dense(p: &PauliString) -> Result<DMatrix<Complex<i32>>> {
    dense_with_cap(p, DEFAULT_DENSE_QUBIT_CAP)
}

pub fn dense_with_cap(p: &PauliString, max_qubits: usize) -> Result<DMatrix<Complex<i32>>> {
    if p.n_qubits > max_qubits {
        return Err(Error::DenseCapExceeded {
            dim: p.dimension(),
            cap: 1usize << max_qubits,
        });
    }
    let dim = p.dimension();
    let mut m = DMatrix::from_element(dim, dim, Complex::new(0, 0));
    for b in 0..dim {
        let (row, e) = p.column_entry(b);
        m[(row, b)] = i_pow(e);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i32, im: i32) -> Complex<i32> {
        Complex::new(re, im)
    }

    fn dagger(m: &DMatrix<Complex<i32>>) -> DMatrix<Complex<i32>> {
        m.map(|z| z.conj()).transpose()
    }

    #[test]
    fn two_modes_are_x_and_y() {
        let x = dense(&majorana_operator(2, 1).unwrap()).unwrap();
        let y = dense(&majorana_operator(2, 2).unwrap()).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[c(0, 0), c(1, 0), c(1, 0), c(0, 0)]));
        assert_eq!(y, DMatrix::from_row_slice(2, 2, &[c(0, 0), c(0, -1), c(0, 1), c(0, 0)]));
        let id = DMatrix::identity(2, 2);
        assert_eq!(&x * &x, id);
        assert_eq!(&y * &y, id);
        assert_eq!(&x * &y + &y * &x, DMatrix::from_element(2, 2, c(0, 0)));
    }

    #[test]
    fn dense_of_simple_strings() {
        let id = PauliString::identity(1).unwrap();
        assert_eq!(dense(&id).unwrap(), DMatrix::identity(2, 2));
        let x = PauliString::new(1, 1, 0, 0).unwrap();
        assert_eq!(
            dense(&x).unwrap(),
            DMatrix::from_row_slice(2, 2, &[c(0, 0), c(1, 0), c(1, 0), c(0, 0)])
        );
        // i·XZ is Y: unitary and Hermitian
        let y = dense(&PauliString::new(1, 1, 1, 1).unwrap()).unwrap();
        assert_eq!(dagger(&y), y);
        assert_eq!(&y * dagger(&y), DMatrix::identity(2, 2));
    }

    #[test]
    fn errors() {
        assert_eq!(majorana_operator(3, 1), Err(Error::OddModes(3)));
        assert!(matches!(
            majorana_operator(4, 5),
            Err(Error::IndexOutOfRange { index: 5, n: 4 })
        ));
        assert!(IndexSet::new(4, vec![2, 1]).is_err());
        assert!(IndexSet::new(4, vec![0]).is_err());
        let p = PauliString::identity(1).unwrap();
        let q = PauliString::identity(2).unwrap();
        assert!(string_product(&p, &q).is_err());
        assert!(matches!(
            dense_with_cap(&q, 1),
            Err(Error::DenseCapExceeded { dim: 4, cap: 2 })
        ));
    }

    #[test]
    fn empty_product_is_identity() {
        let p = psi_product(6, &IndexSet::empty(6).unwrap()).unwrap();
        assert!(p.is_identity_up_to_phase());
        assert_eq!(p.phase(), 0);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(pauli_trace(&PauliString::identity(2).unwrap()), Complex::new(4.0, 0.0));
        let a = IndexSet::new(4, vec![1, 2]).unwrap();
        assert_eq!(pauli_trace(&psi_product(4, &a).unwrap()), Complex::new(0.0, 0.0));
    }

    #[test]
    fn majoranas_are_hermitian() {
        for n in (2..=16).step_by(2) {
            for i in 1..=n {
                let p = majorana_operator(n, i).unwrap();
                assert!(p.is_hermitian());
                assert_eq!(p.square_sign(), 1);
            }
        }
    }

    #[test]
    fn square_of_q_products() {
        // Ψ_R² = (-1)^{⌊q/2⌋} I
        let n = 8;
        for mask in 1u128..(1 << n) {
            let r = IndexSet::from_mask(n, mask).unwrap();
            let q = r.len() as i32;
            let p = psi_product(n, &r).unwrap();
            let expected = if (q / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(p.square_sign(), expected, "R = {:?}", r.as_slice());
        }
    }

    #[test]
    fn string_product_matches_dense() {
        // all 4^3 · 4 strings on 3 qubits, pairwise
        let strings: Vec<PauliString> = (0..8u64)
            .flat_map(|x| (0..8u64).flat_map(move |z| (0..4u8).map(move |p| (x, z, p))))
            .map(|(x, z, p)| PauliString::new(3, x, z, p).unwrap())
            .collect();
        let denses: Vec<_> = strings.iter().map(|s| dense(s).unwrap()).collect();
        for (i, p) in strings.iter().enumerate().step_by(3) {
            for (j, q) in strings.iter().enumerate() {
                let pq = string_product(p, q).unwrap();
                assert_eq!(dense(&pq).unwrap(), &denses[i] * &denses[j]);
            }
        }
    }

    #[test]
    fn trace_matches_dense() {
        for x in 0..8u64 {
            for z in 0..8u64 {
                for ph in 0..4u8 {
                    let p = PauliString::new(3, x, z, ph).unwrap();
                    let m = dense(&p).unwrap();
                    let tr = m.diagonal().iter().fold(c(0, 0), |a, b| a + b);
                    let expected = pauli_trace(&p);
                    assert_eq!(tr.re as f64, expected.re);
                    assert_eq!(tr.im as f64, expected.im);
                }
            }
        }
    }

    #[test]
    fn index_set_masks_round_trip() {
        let a = IndexSet::new(6, vec![1, 4, 6]).unwrap();
        assert_eq!(IndexSet::from_mask(6, a.mask()).unwrap(), a);
        let b = IndexSet::new(6, vec![4, 5]).unwrap();
        assert_eq!(a.symmetric_difference(&b).unwrap().as_slice(), &[1, 5, 6]);
    }
}
