//! Spectra, empirical measures and the exactly solvable `q = 2` model.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{pair_index, SykHamiltonian};
use crate::rng::{keyed_normal, TrialStream};
use crate::stats::compensated_sum;

const EIGEN_MAX_ITER: usize = 10_000;

/// Exhaustive `q = 2` spectra are limited to `2^24` atoms.
pub const EXHAUSTIVE_HALF_MODES_CAP: usize = 24;

/// Relative gap allowed inside a pair of eigenvalues of `−J²`.
pub const PAIR_GAP_TOL: f64 = 1e-6;

/// Full spectrum of a Hamiltonian, descending.
pub fn eigenvalues(h: &SykHamiltonian) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&h.matrix)
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.0)
}

/// Eigenvalues (descending) and the matching unit eigenvectors as columns.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence(dim))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Probability measure with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Sorts the atoms, merges exactly equal positions, and checks that the
    /// weights are positive and sum to one within `1e-12`.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if let Some(s) = support.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {s}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::merge_sorted(pairs))
    }

    fn merge_sorted(pairs: Vec<(f64, f64)>) -> Self {
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (s, w) in pairs {
            if support.last() == Some(&s) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(s);
                weights.push(w);
            }
        }
        Self { support, weights }
    }

    /// Uniform measure on a list of points (repeated points accumulate mass).
    pub fn uniform(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if let Some(s) = points.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {s}")));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let total = sorted.len() as f64;
        let mut support: Vec<f64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for s in sorted {
            if support.last() == Some(&s) {
                *counts.last_mut().unwrap() += 1;
            } else {
                support.push(s);
                counts.push(1);
            }
        }
        let weights = counts.into_iter().map(|c| c as f64 / total).collect();
        Ok(Self { support, weights })
    }

    pub fn dirac(at: f64) -> Self {
        Self {
            support: vec![at],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `Σ w_i f(s_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.support.iter().zip(&self.weights).map(|(&s, &w)| w * f(s)))
    }

    /// Cumulative mass of atoms `≤ t`.
    pub fn cdf(&self, t: f64) -> f64 {
        let k = self.support.partition_point(|&s| s <= t);
        compensated_sum(self.weights[..k].iter().copied())
    }
}

/// `ρ = L^{-1} Σ δ_{λ_i}`.
pub fn empirical_measure(eigs: &[f64]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::uniform(eigs)
}

/// Decreasing nonnegative `μ_1 ≥ … ≥ μ_{n/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSpectrum {
    pub n: usize,
    pub mu: Vec<f64>,
}

impl MuSpectrum {
    pub fn new(n: usize, mu: Vec<f64>) -> Result<Self> {
        if n == 0 || n % 2 == 1 {
            return Err(Error::OddModes(n));
        }
        if mu.len() != n / 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                n / 2,
                mu.len()
            )));
        }
        if mu.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) || mu.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "mu must be finite, nonnegative and decreasing".into(),
            ));
        }
        Ok(Self { n, mu })
    }
}

/// Real antisymmetric matrix with i.i.d. standard normal upper entries.
/// Entry `(i, j)` uses the same draw as coupling `J_{ij}` of
/// [`crate::hamiltonian::sample_couplings`] with `q = 2`.
pub fn sample_antisymmetric(n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddModes(n));
    }
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let g = keyed_normal(seed, pair_index(n, a + 1, b + 1) as u64);
            j[(a, b)] = g;
            j[(b, a)] = -g;
        }
    }
    Ok(j)
}

/// Antisymmetric Gaussian matrix drawn sequentially from a trial stream
/// (upper triangle, row by row).
pub fn sample_antisymmetric_from(n: usize, stream: &mut TrialStream) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let g = stream.normal();
            j[(a, b)] = g;
            j[(b, a)] = -g;
        }
    }
    j
}

pub fn antisymmetry_defect(j: &DMatrix<f64>) -> f64 {
    (j + j.transpose()).amax()
}

/// The values `μ_j` with `±iμ_j` the eigenvalues of `J`, from the symmetric
/// eigenproblem of `−J² = JᵀJ` with adjacent eigenvalues collapsed in pairs.
pub fn mu_spectrum(j: &DMatrix<f64>) -> Result<MuSpectrum> {
    let n = j.nrows();
    if j.ncols() != n {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddModes(n));
    }
    let defect = antisymmetry_defect(j);
    if defect > 1e-12 {
        return Err(Error::NotAntisymmetric(defect));
    }
    let m = j.transpose() * j;
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence(n))?;
    let mut lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    let floor = 1e-8 * lam[0].max(0.0);
    let mut mu = Vec::with_capacity(n / 2);
    for (index, pair) in lam.chunks(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let scale = a.abs().max(b.abs()).max(floor);
        let gap = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        if gap > PAIR_GAP_TOL {
            return Err(Error::PairingFailed { index, gap });
        }
        mu.push((0.5 * (a + b)).max(0.0).sqrt());
    }
    // Averaging neighbours can break ties in the wrong direction by an ulp.
    for k in 1..mu.len() {
        if mu[k] > mu[k - 1] {
            mu[k] = mu[k - 1];
        }
    }
    Ok(MuSpectrum { n, mu })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Q2Mode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

/// Law of `C(n,2)^{-1/2} Σ_j a_j μ_j` over uniform sign vectors `a`.
pub fn q2_spectrum(mu: &MuSpectrum, mode: Q2Mode) -> Result<DiscreteMeasure> {
    let scale = 1.0 / crate::binomial(mu.n, 2).sqrt();
    match mode {
        Q2Mode::Exhaustive => {
            let m = mu.mu.len();
            if m > EXHAUSTIVE_HALF_MODES_CAP {
                return Err(Error::EnumerationCapExceeded {
                    exponent: m,
                    cap: EXHAUSTIVE_HALF_MODES_CAP,
                });
            }
            let values = sign_sums(&mu.mu, scale);
            DiscreteMeasure::uniform(&values)
        }
        Q2Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("sample count must be positive".into()));
            }
            let mut stream = TrialStream::new(seed, 0);
            let values: Vec<f64> = (0..samples)
                .map(|_| mu.mu.iter().map(|m| stream.sign() * m * scale).sum())
                .collect();
            DiscreteMeasure::uniform(&values)
        }
    }
}

/// All `2^m` values `Σ ±c·μ_j`, built by doubling.
pub fn sign_sums(mu: &[f64], c: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(1usize << mu.len());
    values.push(0.0);
    for &m in mu {
        let m = m * c;
        let len = values.len();
        for k in 0..len {
            let v = values[k];
            values[k] = v + m;
            values.push(v - m);
        }
    }
    values
}

/// Element of the auxiliary space: `x0` plus a finite decreasing tail, with
/// `x0 ≥ Σ x_j²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxPoint {
    x0: f64,
    tail: Vec<f64>,
}

/// `Σ x_j²`, always summed in the same order so that `J(γ_n)` is exactly 0.
pub(crate) fn tail_square_sum(tail: &[f64]) -> f64 {
    tail.iter().map(|t| t * t).sum()
}

impl AuxPoint {
    pub fn new(x0: f64, tail: Vec<f64>) -> Result<Self> {
        if !x0.is_finite() || x0 < 0.0 {
            return Err(Error::NotInSpace(format!("x0 = {x0} must be finite and >= 0")));
        }
        if let Some(t) = tail.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::NotInSpace(format!("tail entry {t} must be finite and >= 0")));
        }
        if let Some(w) = tail.windows(2).find(|w| w[0] < w[1]) {
            return Err(Error::NotInSpace(format!(
                "tail must be decreasing, found {} < {}",
                w[0], w[1]
            )));
        }
        let sq = tail_square_sum(&tail);
        if x0 < sq {
            return Err(Error::NotInSpace(format!(
                "x0 = {x0} < sum of squared tail = {sq}"
            )));
        }
        Ok(Self { x0, tail })
    }

    /// The minimizer of the rate function, `(1, ())`.
    pub fn x_min() -> Self {
        Self {
            x0: 1.0,
            tail: Vec::new(),
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// Coordinate `j ≥ 0`, with zeros past the stored tail.
    pub fn coord(&self, j: usize) -> f64 {
        if j == 0 {
            self.x0
        } else {
            self.tail.get(j - 1).copied().unwrap_or(0.0)
        }
    }
}

/// `γ_n = (C^{-1}Σμ_j², C^{-1/2}μ)` with `C = C(n,2)`.
pub fn gamma_n(mu: &MuSpectrum) -> AuxPoint {
    let scale = 1.0 / crate::binomial(mu.n, 2).sqrt();
    let tail: Vec<f64> = mu.mu.iter().map(|m| m * scale).collect();
    let x0 = tail_square_sum(&tail);
    AuxPoint { x0, tail }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_measure_examples() {
        let m = empirical_measure(&[0.0; 4]).unwrap();
        assert_eq!(m.support(), &[0.0]);
        assert_eq!(m.weights(), &[1.0]);
        let m = empirical_measure(&[1.0, -1.0]).unwrap();
        assert_eq!(m.support(), &[-1.0, 1.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        let m = DiscreteMeasure::new(vec![1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(m.support(), &[0.0, 1.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert_eq!(m.cdf(0.5), 0.5);
    }

    #[test]
    fn two_by_two_mu() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        assert_eq!(mu_spectrum(&j).unwrap().mu, vec![3.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        assert!(matches!(mu_spectrum(&bad), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn antisymmetric_sample_shape() {
        let j = sample_antisymmetric(2, 5).unwrap();
        assert_eq!(j[(0, 0)], 0.0);
        assert_eq!(j[(0, 1)], -j[(1, 0)]);
        assert_eq!(antisymmetry_defect(&sample_antisymmetric(10, 5).unwrap()), 0.0);
        assert!(sample_antisymmetric(3, 5).is_err());
    }

    #[test]
    fn n4_atoms() {
        let mu = MuSpectrum::new(4, vec![2.0, 0.5]).unwrap();
        let m = q2_spectrum(&mu, Q2Mode::Exhaustive).unwrap();
        let s = 6f64.sqrt();
        let expected = [-2.5 / s, -1.5 / s, 1.5 / s, 2.5 / s];
        for (a, b) in m.support().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(m.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn gamma_of_zero_spectrum() {
        let g = gamma_n(&MuSpectrum::new(6, vec![0.0; 3]).unwrap());
        assert_eq!(g.x0(), 0.0);
        assert_eq!(g.tail(), &[0.0; 3]);
    }

    #[test]
    fn aux_point_validation() {
        assert!(AuxPoint::new(1.0, vec![0.9, 0.8]).is_err());
        assert!(AuxPoint::new(1.0, vec![0.1, 0.2]).is_err());
        assert!(AuxPoint::new(-1.0, vec![]).is_err());
        assert!(AuxPoint::new(1.25, vec![0.5, 0.25]).is_ok());
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let mu = MuSpectrum::new(8, vec![3.0, 2.0, 1.0, 0.5]).unwrap();
        let mode = Q2Mode::Sampled { samples: 1000, seed: 4 };
        assert_eq!(q2_spectrum(&mu, mode).unwrap(), q2_spectrum(&mu, mode).unwrap());
    }
}
