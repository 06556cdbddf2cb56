//! Monte Carlo audits: Selberg normalization, moment-generating-function and
//! shell bounds for the antisymmetric Gaussian ensemble, Lipschitz ratios of
//! spectral functionals, and the variance scaling behind concentration.
//!
//! Every trial draws from its own `(seed, trial)` substream and results are
//! reduced in trial order, so `workers` never changes a number.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, check_order, CouplingVector};
use crate::measures::{dbl_exact, limit_law, LawKind, DEFAULT_DISCRETIZATION};
use crate::rng::{map_trials, TrialStream};
use crate::spectrum::{
    eigenvalues, empirical_measure, mu_spectrum, sample_antisymmetric_from, DiscreteMeasure,
};
use crate::stats::{mean_estimate, median, pairwise_sum, sample_variance, wilson_interval, CI_SIGMAS};

/// Above this the MGF estimator is heavy-tailed enough to warrant a warning.
pub const MGF_SOFT_CAP: f64 = 0.3;

fn check_even(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        Err(Error::OddModes(n))
    } else {
        Ok(())
    }
}

/// `ln Z_n`, `Z_n = (π/2)^{n/4} Π_{j=0}^{n/2-1} (2j)!`.
pub fn selberg_log_z(n: usize) -> Result<f64> {
    check_even(n)?;
    let head = n as f64 / 4.0 * (std::f64::consts::FRAC_PI_2).ln();
    let tail: f64 = (0..n / 2).map(|j| ln_gamma(2.0 * j as f64 + 1.0)).sum();
    Ok(head + tail)
}

fn check_mgf(n: usize, k: usize, a: f64, b: f64) -> Result<()> {
    check_even(n)?;
    if k > n / 2 {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n/2 = {}", n / 2)));
    }
    if !(a < 0.5) || !(b < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "a = {a}, b = {b}: both must be < 1/2 for the expectation to exist"
        )));
    }
    Ok(())
}

/// Log of `2^{nk} (1−2a)^{−k(n−k−½)} (1−2b)^{−(n/2−k)((n−1)/2−k)}`.
pub fn mgf_log_bound(n: usize, k: usize, a: f64, b: f64) -> Result<f64> {
    check_mgf(n, k, a, b)?;
    let (nf, kf) = (n as f64, k as f64);
    let mut v = nf * kf * std::f64::consts::LN_2;
    if k > 0 {
        v -= kf * (nf - kf - 0.5) * (-2.0 * a).ln_1p();
    }
    v -= (nf / 2.0 - kf) * ((nf - 1.0) / 2.0 - kf) * (-2.0 * b).ln_1p();
    Ok(v)
}

pub fn mgf_bound(n: usize, k: usize, a: f64, b: f64) -> Result<f64> {
    Ok(mgf_log_bound(n, k, a, b)?.exp())
}

/// `E e^{bΣμ_j²} = (1−2b)^{−n(n−1)/4}`, the `k = 0` case in closed form.
pub fn mgf_exact_k0(n: usize, b: f64) -> f64 {
    (-(n as f64) * (n as f64 - 1.0) / 4.0 * (-2.0 * b).ln_1p()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    /// The bound is trivially true (e.g. a probability bound `≤ 0`).
    Vacuous,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous bound",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub verdict: Verdict,
    pub trials: u64,
    /// Closed-form value of the estimated quantity, when one is known.
    pub exact: Option<f64>,
}

/// Monte Carlo `E exp(a Σ_{j≤k} μ_j² + b Σ_{j>k} μ_j²)` against its bound.
pub fn mgf_estimate(
    n: usize,
    k: usize,
    a: f64,
    b: f64,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    check_mgf(n, k, a, b)?;
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 trials, got {trials}")));
    }
    if a > MGF_SOFT_CAP || b > MGF_SOFT_CAP {
        log::warn!("a = {a}, b = {b} above {MGF_SOFT_CAP}: the estimator is heavy-tailed");
    }
    let samples = map_trials(trials, workers, |t| -> Result<f64> {
        let mut stream = TrialStream::new(seed, t);
        let mu = mu_spectrum(&sample_antisymmetric_from(n, &mut stream))?;
        let head: f64 = mu.mu[..k].iter().map(|m| m * m).sum();
        let tail: f64 = mu.mu[k..].iter().map(|m| m * m).sum();
        Ok((a * head + b * tail).exp())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let est = mean_estimate(&samples);
    let bound = mgf_bound(n, k, a, b)?;
    let satisfied = est.ci_high <= bound;
    Ok(BoundReport {
        estimate: est.mean,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        bound,
        satisfied,
        verdict: if satisfied { Verdict::Satisfied } else { Verdict::Violated },
        trials,
        exact: (k == 0).then(|| mgf_exact_k0(n, b)),
    })
}

/// `1 − (a e^{1−a})^{n(n−1)/4} − (b e^{1−b})^{n(n−1)/4}`.
pub fn shell_bound(n: usize, a: f64, b: f64) -> f64 {
    let e = n as f64 * (n as f64 - 1.0) / 4.0;
    let term = |t: f64| (e * (t.ln() + 1.0 - t)).exp();
    1.0 - term(a) - term(b)
}

/// Monte Carlo `P(a·C(n,2) < Σ μ_j² < b·C(n,2))` against its lower bound.
pub fn shell_probability(
    n: usize,
    a: f64,
    b: f64,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    check_even(n)?;
    if !(0.0 < a && a < 1.0 && 1.0 < b && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < a < 1 < b, got a = {a}, b = {b}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let c = crate::binomial(n, 2);
    let inside = map_trials(trials, workers, |t| -> Result<bool> {
        let mut stream = TrialStream::new(seed, t);
        let mu = mu_spectrum(&sample_antisymmetric_from(n, &mut stream))?;
        let s: f64 = mu.mu.iter().map(|m| m * m).sum();
        Ok(a * c < s && s < b * c)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    let hits = inside.iter().filter(|&&h| h).count() as u64;
    let (lo, hi) = wilson_interval(hits, trials, CI_SIGMAS);
    let bound = shell_bound(n, a, b);
    let satisfied = lo >= bound;
    let verdict = if bound <= 0.0 {
        Verdict::Vacuous
    } else if satisfied {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    Ok(BoundReport {
        estimate: hits as f64 / trials as f64,
        ci_low: lo,
        ci_high: hi,
        bound,
        satisfied,
        verdict,
        trials,
        exact: None,
    })
}

/// Test functions with known Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFn {
    Identity,
    Tanh,
    /// `min(|λ|, 1)`
    ClippedAbs,
    Constant,
}

impl TestFn {
    pub const DEFAULT_FAMILY: [TestFn; 3] = [TestFn::Identity, TestFn::Tanh, TestFn::ClippedAbs];

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFn::Identity => x,
            TestFn::Tanh => x.tanh(),
            TestFn::ClippedAbs => x.abs().min(1.0),
            TestFn::Constant => 1.0,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            TestFn::Constant => 0.0,
            _ => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFn::Identity => "identity",
            TestFn::Tanh => "tanh",
            TestFn::ClippedAbs => "clipped-abs",
            TestFn::Constant => "constant",
        }
    }
}

impl FromStr for TestFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "lambda" => Ok(TestFn::Identity),
            "tanh" => Ok(TestFn::Tanh),
            "clipped-abs" | "abs" => Ok(TestFn::ClippedAbs),
            "constant" => Ok(TestFn::Constant),
            other => Err(Error::InvalidParameter(format!("unknown test function {other:?}"))),
        }
    }
}

fn couplings_from_stream(n: usize, q: usize, stream: &mut TrialStream) -> Result<CouplingVector> {
    let count = crate::binomial(n, q) as usize;
    CouplingVector::from_values(n, q, (0..count).map(|_| stream.normal()).collect())
}

fn spectral_measure(c: &CouplingVector) -> Result<DiscreteMeasure> {
    empirical_measure(&eigenvalues(&assemble(c)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnRatio {
    pub f: TestFn,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub n: usize,
    pub q: usize,
    pub pairs: u64,
    pub functionals: Vec<FnRatio>,
    /// Same ratio for `x ↦ d_BL(ρ_n(x), ρ)` with `ρ` the discretized Gaussian.
    pub dbl_max_ratio: f64,
    pub max_ratio: f64,
}

/// Perturbation scales cycled through by the audit pairs.
pub const AUDIT_SCALES: [f64; 3] = [1.0, 0.1, 0.01];

/// Ratios `|F(x) − F(x')| / (C(n,q)^{-1/2} Lip(f) ‖x − x'‖)` over random pairs
/// `x' = x + σz`, for `F = ⟨f, ρ_n⟩` and `F = d_BL(ρ_n, ρ)`.
pub fn lipschitz_audit(
    n: usize,
    q: usize,
    trials: u64,
    seed: u64,
    workers: usize,
    family: &[TestFn],
) -> Result<LipschitzReport> {
    check_order(n, q)?;
    let scale = 1.0 / crate::binomial(n, q).sqrt();
    let target = limit_law(LawKind::Gaussian, None)?.discretize(DEFAULT_DISCRETIZATION)?.measure;
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    let rows = map_trials(trials, workers, |t| -> Result<Vec<f64>> {
        let mut stream = TrialStream::new(seed, t);
        let x = couplings_from_stream(n, q, &mut stream)?;
        let z = couplings_from_stream(n, q, &mut stream)?;
        let sigma = AUDIT_SCALES[(t % AUDIT_SCALES.len() as u64) as usize];
        let x2 = x.combine(1.0, &z, sigma)?;
        let dist = x.euclidean_distance(&x2);
        let (rho, rho2) = (spectral_measure(&x)?, spectral_measure(&x2)?);
        let mut out: Vec<f64> = family
            .iter()
            .map(|f| {
                let diff = (rho.integrate(|l| f.eval(l)) - rho2.integrate(|l| f.eval(l))).abs();
                ratio(diff, scale * f.lipschitz() * dist)
            })
            .collect();
        let d1 = dbl_exact(&rho, &target)?.distance;
        let d2 = dbl_exact(&rho2, &target)?.distance;
        out.push(ratio((d1 - d2).abs(), scale * dist));
        Ok(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let col_max = |c: usize| rows.iter().map(|r| r[c]).fold(0.0, f64::max);
    let functionals: Vec<FnRatio> = family
        .iter()
        .enumerate()
        .map(|(i, f)| FnRatio {
            f: *f,
            max_ratio: col_max(i),
        })
        .collect();
    let dbl_max_ratio = col_max(family.len());
    let max_ratio = functionals.iter().map(|r| r.max_ratio).fold(dbl_max_ratio, f64::max);
    Ok(LipschitzReport {
        n,
        q,
        pairs: trials,
        functionals,
        dbl_max_ratio,
        max_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub q: usize,
    pub c_nq: f64,
    pub mean: f64,
    pub var_hat: f64,
    /// `var_hat · C(n,q)`; bounded across plans under Gaussian concentration.
    pub scaled_var: f64,
    pub dbl_median: f64,
    /// Empirical `P(d_BL(ρ_n, ρ_∞) > 2·median)`; reported, not asserted.
    pub dbl_tail_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub f: TestFn,
    pub trials: u64,
    pub rows: Vec<SweepRow>,
    /// `max/min` of `scaled_var` over the plans (NaN when some variance is 0).
    pub scaled_var_ratio: f64,
}

fn plan_seed(seed: u64, n: usize, q: usize) -> u64 {
    seed ^ ((n as u64) << 40) ^ ((q as u64) << 32)
}

pub fn concentration_sweep(
    plans: &[(usize, usize)],
    f: TestFn,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SweepReport> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let target = limit_law(LawKind::Gaussian, None)?.discretize(DEFAULT_DISCRETIZATION)?.measure;
    let mut rows = Vec::with_capacity(plans.len());
    for &(n, q) in plans {
        check_order(n, q)?;
        let pseed = plan_seed(seed, n, q);
        let samples = map_trials(trials, workers, |t| -> Result<(f64, f64)> {
            let mut stream = TrialStream::new(pseed, t);
            let rho = spectral_measure(&couplings_from_stream(n, q, &mut stream)?)?;
            Ok((rho.integrate(|l| f.eval(l)), dbl_exact(&rho, &target)?.distance))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let dists: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let c = crate::binomial(n, q);
        let var_hat = sample_variance(&values);
        let med = median(&dists);
        let tail = dists.iter().filter(|&&d| d > 2.0 * med).count() as f64 / trials as f64;
        rows.push(SweepRow {
            n,
            q,
            c_nq: c,
            mean: pairwise_sum(&values) / trials as f64,
            var_hat,
            scaled_var: var_hat * c,
            dbl_median: med,
            dbl_tail_prob: tail,
        });
    }
    let max = rows.iter().map(|r| r.scaled_var).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.scaled_var).fold(f64::INFINITY, f64::min);
    let scaled_var_ratio = if min > 0.0 { max / min } else { f64::NAN };
    Ok(SweepReport {
        f,
        trials,
        rows,
        scaled_var_ratio,
    })
}
