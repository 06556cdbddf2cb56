//! Bounded-Lipschitz distance between discrete laws, and the limiting laws.
//!
//! `d_BL(μ, ν) = sup { Σ f (μ − ν) : |f| ≤ 1, |f(x) − f(y)| ≤ |x − y| }`.
//! On the merged sorted support this is a chain LP. [`dbl_exact`] solves it
//! with a concave piecewise-linear dynamic program (value function kept as
//! slope segments on both sides of its argmax) and returns a witness.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::TrialStream;
use crate::spectrum::DiscreteMeasure;
use crate::stats::compensated_sum;

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
pub const BRUTEFORCE_MAX_SUPPORT: usize = 7;
pub const BRUTEFORCE_MAX_LEVELS: usize = 41;
pub const DEFAULT_DISCRETIZATION: usize = 4096;

/// Optimal witness of the chain LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BLCertificate {
    pub support: Vec<f64>,
    /// `μ_i − ν_i` on the merged support.
    pub signed_weights: Vec<f64>,
    pub witness: Vec<f64>,
    pub objective: f64,
}

impl BLCertificate {
    /// Feasibility of the witness and consistency of the objective.
    pub fn verify(&self, tol: f64) -> bool {
        let m = self.support.len();
        if self.witness.len() != m || self.signed_weights.len() != m {
            return false;
        }
        if self.witness.iter().any(|f| f.abs() > 1.0 + tol) {
            return false;
        }
        for i in 1..m {
            let gap = self.support[i] - self.support[i - 1];
            if (self.witness[i] - self.witness[i - 1]).abs() > gap + tol {
                return false;
            }
        }
        let obj = compensated_sum(self.witness.iter().zip(&self.signed_weights).map(|(f, w)| f * w));
        (obj - self.objective).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DblResult {
    pub distance: f64,
    pub certificate: BLCertificate,
}

fn merge(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let (a, wa) = (mu.support(), mu.weights());
    let (b, wb) = (nu.support(), nu.weights());
    let mut s = Vec::with_capacity(a.len() + b.len());
    let mut w = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            s.push(a[i]);
            w.push(wa[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            s.push(b[j]);
            w.push(-wb[j]);
            j += 1;
        } else {
            s.push(a[i]);
            w.push(wa[i] - wb[j]);
            i += 1;
            j += 1;
        }
    }
    (s, w)
}

pub fn dbl_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DblResult> {
    dbl_exact_with_cap(mu, nu, DEFAULT_SUPPORT_CAP)
}

pub fn dbl_exact_with_cap(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cap: usize,
) -> Result<DblResult> {
    let size = mu.len() + nu.len();
    if size > cap {
        return Err(Error::SupportCapExceeded { size, cap });
    }
    let (support, w) = merge(mu, nu);
    let imbalance = compensated_sum(w.iter().copied());
    if imbalance.abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("weight imbalance {imbalance:e}")));
    }
    let witness = chain_argmax(&support, &w);
    let objective = compensated_sum(witness.iter().zip(&w).map(|(f, w)| f * w));
    Ok(DblResult {
        distance: objective.max(0.0),
        certificate: BLCertificate {
            support,
            signed_weights: w,
            witness,
            objective,
        },
    })
}

#[derive(Clone, Copy)]
struct Seg {
    len: f64,
    raw: f64,
}

/// Maximizer of `Σ f_i w_i` over `|f_i| ≤ 1`, `|f_{i+1} − f_i| ≤ s_{i+1} − s_i`.
fn chain_argmax(s: &[f64], w: &[f64]) -> Vec<f64> {
    let m = s.len();
    // V_i is concave on [-1, 1]. `left` holds its segments left of the argmax
    // `a` (nearest first), `right` those to the right. Actual slope = raw + off.
    let mut left: VecDeque<Seg> = VecDeque::new();
    let mut right: VecDeque<Seg> = VecDeque::from([Seg { len: 2.0, raw: 0.0 }]);
    let mut off = 0.0f64;
    let mut a = -1.0f64;
    let mut argmax = Vec::with_capacity(m);

    for i in 0..m {
        if i > 0 {
            // max over a window of half-width g: a flat top of width 2g
            // appears at a, both flanks move outwards, then the domain is cut
            // back to [-1, 1].
            let g = s[i] - s[i - 1];
            if g > 0.0 {
                left.push_front(Seg { len: g, raw: -off });
                right.push_front(Seg { len: g, raw: -off });
                trim_back(&mut left, g);
                trim_back(&mut right, g);
            }
        }
        off += w[i];
        while let Some(&seg) = right.front() {
            if seg.raw + off > 0.0 {
                a += seg.len;
                left.push_front(right.pop_front().unwrap());
            } else {
                break;
            }
        }
        while let Some(&seg) = left.front() {
            if seg.raw + off < 0.0 {
                a -= seg.len;
                right.push_front(left.pop_front().unwrap());
            } else {
                break;
            }
        }
        a = a.clamp(-1.0, 1.0);
        argmax.push(a);
    }

    let mut f = vec![0.0; m];
    if m == 0 {
        return f;
    }
    f[m - 1] = argmax[m - 1];
    for i in (0..m - 1).rev() {
        let g = s[i + 1] - s[i];
        f[i] = argmax[i].clamp(f[i + 1] - g, f[i + 1] + g).clamp(-1.0, 1.0);
    }
    f
}

fn trim_back(dq: &mut VecDeque<Seg>, mut amount: f64) {
    while amount > 0.0 {
        let Some(back) = dq.back_mut() else { return };
        if back.len <= amount {
            amount -= back.len;
            dq.pop_back();
        } else {
            back.len -= amount;
            return;
        }
    }
}

/// Best objective over witnesses taking values on the grid
/// `-1 + 2k/(levels-1)`, found by exhaustive dynamic programming over the
/// grid states. A lower bound on [`dbl_exact`].
pub fn dbl_bruteforce(mu: &DiscreteMeasure, nu: &DiscreteMeasure, levels: usize) -> Result<f64> {
    if !(2..=BRUTEFORCE_MAX_LEVELS).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "levels must be in 2..={BRUTEFORCE_MAX_LEVELS}, got {levels}"
        )));
    }
    let (s, w) = merge(mu, nu);
    if s.len() > BRUTEFORCE_MAX_SUPPORT {
        return Err(Error::SupportCapExceeded {
            size: s.len(),
            cap: BRUTEFORCE_MAX_SUPPORT,
        });
    }
    let grid: Vec<f64> = (0..levels)
        .map(|k| -1.0 + 2.0 * k as f64 / (levels - 1) as f64)
        .collect();
    let mut best: Vec<f64> = grid.iter().map(|v| w[0] * v).collect();
    for i in 1..s.len() {
        let g = s[i] - s[i - 1];
        best = grid
            .iter()
            .map(|&v| {
                let prev = grid
                    .iter()
                    .zip(&best)
                    .filter(|(u, _)| (v - **u).abs() <= g + 1e-12)
                    .map(|(_, b)| *b)
                    .fold(f64::NEG_INFINITY, f64::max);
                w[i] * v + prev
            })
            .collect();
    }
    Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `Σ w_i s_i^k`.
pub fn moments(m: &DiscreteMeasure, k: u32) -> f64 {
    m.integrate(|s| s.powi(k as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Gaussian,
    Semicircle,
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(LawKind::Gaussian),
            "semicircle" | "wigner" => Ok(LawKind::Semicircle),
            other => Err(Error::UnsupportedLaw(other.to_string())),
        }
    }
}

/// Unit-variance limiting law of the empirical spectral measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLaw {
    kind: LawKind,
    normal: Normal,
}

/// `q_ratio_hint` is the limit of `q²/n`: `0` selects the Gaussian, `∞` the
/// semicircle. Finite positive values belong to the q-Hermite family, which
/// is not provided.
pub fn limit_law(kind: LawKind, q_ratio_hint: Option<f64>) -> Result<LimitLaw> {
    if let Some(r) = q_ratio_hint {
        let implied = if r == 0.0 {
            LawKind::Gaussian
        } else if r == f64::INFINITY {
            LawKind::Semicircle
        } else {
            return Err(Error::UnsupportedLaw(format!(
                "q-Hermite interpolating law for q^2/n -> {r}"
            )));
        };
        if implied != kind {
            return Err(Error::InvalidParameter(format!(
                "q^2/n -> {r} selects {implied:?}, not {kind:?}"
            )));
        }
    }
    Ok(LimitLaw {
        kind,
        normal: Normal::new(0.0, 1.0).expect("standard normal"),
    })
}

/// A discretized law and a bound on its distance to the continuous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub measure: DiscreteMeasure,
    /// Exact Wasserstein-1 distance to the continuous law (an upper bound
    /// for `d_BL`).
    pub error_bound: f64,
}

impl LimitLaw {
    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => self.normal.pdf(x),
            LawKind::Semicircle => {
                if x.abs() >= 2.0 {
                    0.0
                } else {
                    (4.0 - x * x).sqrt() / (2.0 * PI)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => self.normal.cdf(x),
            LawKind::Semicircle => {
                if x <= -2.0 {
                    0.0
                } else if x >= 2.0 {
                    1.0
                } else {
                    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
                }
            }
        }
    }

    /// `∫_{-∞}^x t dP(t)`.
    fn partial_mean(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => -self.normal.pdf(x),
            LawKind::Semicircle => {
                let r = (4.0 - x * x).max(0.0);
                -r * r.sqrt() / (6.0 * PI)
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => self.normal.inverse_cdf(p),
            LawKind::Semicircle => {
                let (mut lo, mut hi) = (-2.0f64, 2.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn sample(&self, stream: &mut TrialStream) -> f64 {
        match self.kind {
            LawKind::Gaussian => stream.normal(),
            LawKind::Semicircle => {
                // x-coordinate of a uniform point in the disc of radius 2
                let r = 2.0 * stream.uniform().sqrt();
                r * (2.0 * PI * stream.uniform()).cos()
            }
        }
    }

    /// `M` equal atoms at the quantiles `(k − ½)/M`.
    pub fn discretize(&self, m: usize) -> Result<Discretization> {
        if m == 0 {
            return Err(Error::InvalidParameter("discretization needs M >= 1".into()));
        }
        let mf = m as f64;
        let points: Vec<f64> = (1..=m).map(|k| self.quantile((k as f64 - 0.5) / mf)).collect();
        let edges: Vec<f64> = (0..=m)
            .map(|k| match k {
                0 => f64::NEG_INFINITY,
                k if k == m => f64::INFINITY,
                k => self.quantile(k as f64 / mf),
            })
            .collect();
        let g = |x: f64| {
            if x.is_infinite() {
                0.0
            } else {
                self.partial_mean(x)
            }
        };
        // Monotone coupling of each quantile cell onto its atom.
        let half = 0.5 / mf;
        let w1 = compensated_sum((0..m).map(|k| {
            let (lo, c, hi) = (edges[k], points[k], edges[k + 1]);
            c * half - (g(c) - g(lo)) + (g(hi) - g(c)) - c * half
        }));
        let measure = DiscreteMeasure::uniform(&points)?;
        Ok(Discretization {
            measure,
            error_bound: w1.max(0.0).min(2.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(t: f64) -> DiscreteMeasure {
        DiscreteMeasure::dirac(t)
    }

    #[test]
    fn dirac_family() {
        for t in [0.0, 0.1, 0.5, 1.0, 1.9, 2.0, 3.0, 17.0] {
            let r = dbl_exact(&dirac(0.0), &dirac(t)).unwrap();
            assert!((r.distance - t.min(2.0)).abs() < 1e-12, "t={t}: {}", r.distance);
            assert!(r.certificate.verify(1e-9));
        }
    }

    #[test]
    fn identical_measures() {
        let m = DiscreteMeasure::new(vec![0.0, 1.0, 2.5], vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(dbl_exact(&m, &m).unwrap().distance, 0.0);
    }

    #[test]
    fn bruteforce_dirac() {
        assert!(dbl_bruteforce(&dirac(0.0), &dirac(1.0), 41).unwrap() >= 0.95);
        assert!(dbl_bruteforce(&dirac(0.0), &dirac(1.0), 1).is_err());
    }

    #[test]
    fn support_cap() {
        let m = DiscreteMeasure::uniform(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            dbl_exact_with_cap(&m, &m, 5),
            Err(Error::SupportCapExceeded { size: 6, cap: 5 })
        ));
    }

    #[test]
    fn limit_law_basics() {
        let g = limit_law(LawKind::Gaussian, None).unwrap();
        assert_eq!(g.cdf(0.0), 0.5);
        let s = limit_law(LawKind::Semicircle, Some(f64::INFINITY)).unwrap();
        assert_eq!(s.density(2.0), 0.0);
        assert_eq!(s.density(-2.0), 0.0);
        assert!((s.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((s.quantile(s.cdf(0.7)) - 0.7).abs() < 1e-12);
        assert!(matches!(limit_law(LawKind::Gaussian, Some(0.5)), Err(Error::UnsupportedLaw(_))));
        assert!(matches!("q-hermite".parse::<LawKind>(), Err(Error::UnsupportedLaw(_))));
    }

    #[test]
    fn discretization_bound_shrinks() {
        let g = limit_law(LawKind::Gaussian, None).unwrap();
        let coarse = g.discretize(64).unwrap().error_bound;
        let fine = g.discretize(4096).unwrap().error_bound;
        assert!(fine < coarse && fine > 0.0 && fine < 1e-2, "{coarse} {fine}");
    }

    #[test]
    fn moments_of_symmetric_measure() {
        let m = DiscreteMeasure::uniform(&[-1.5, -0.2, 0.2, 1.5]).unwrap();
        assert_eq!(moments(&m, 0), 1.0);
        assert!(moments(&m, 1).abs() < 1e-12);
    }
}
