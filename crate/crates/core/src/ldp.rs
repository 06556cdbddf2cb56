//! The auxiliary space `X`, the rate function, the map `φ: X → M₁(ℝ)` and its
//! inverse, and Monte Carlo small-ball estimates for `γ_n`.
//!
//! `φ(x)` is the law of `Y = a_0 + Σ_j x_j a_j` with `a_0 ~ N(0, J(x))` and
//! independent Rademacher `a_j`; its characteristic function is
//! `e^{-J(x)s²/2} Π_j cos(s x_j)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{map_trials, TrialStream};
use crate::spectrum::{
    gamma_n, mu_spectrum, sample_antisymmetric_from, tail_square_sum, AuxPoint, DiscreteMeasure,
};
use crate::stats::{wilson_interval, CI_SIGMAS};

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInfinity
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::PosInfinity)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PosInfinity => None,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInfinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInfinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) if s == "inf" || s == "+inf" => Ok(ExtReal::PosInfinity),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("not an extended real: {s}"))),
        }
    }
}

/// `sup_j |x_j − y_j|` over `j ≥ 0`.
pub fn metric_d(x: &AuxPoint, y: &AuxPoint) -> f64 {
    let k = x.tail().len().max(y.tail().len());
    (0..=k)
        .map(|j| (x.coord(j) - y.coord(j)).abs())
        .fold(0.0, f64::max)
}

/// `J(x) = x0 − Σ x_j²`.
pub fn j_functional(x: &AuxPoint) -> f64 {
    x.x0() - tail_square_sum(x.tail())
}

/// `I(x) = x0 − 1 − ln J(x)` when `J(x) > 0`, `+∞` otherwise.
pub fn rate_i(x: &AuxPoint) -> ExtReal {
    let j = j_functional(x);
    if j <= 0.0 {
        ExtReal::PosInfinity
    } else {
        ExtReal::Finite((x.x0() - 1.0 - j.ln()).max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFn {
    pub gaussian_variance: f64,
    pub cosine_freqs: Vec<f64>,
}

impl CharFn {
    pub fn eval(&self, s: f64) -> f64 {
        let g = (-0.5 * self.gaussian_variance * s * s).exp();
        self.cosine_freqs.iter().fold(g, |acc, x| acc * (s * x).cos())
    }
}

pub fn char_fn(x: &AuxPoint) -> CharFn {
    CharFn {
        gaussian_variance: j_functional(x),
        cosine_freqs: x.tail().to_vec(),
    }
}

/// Empirical law of `samples` independent copies of `Y`.
pub fn phi_sample(x: &AuxPoint, samples: u64, seed: u64) -> Result<DiscreteMeasure> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let sd = j_functional(x).sqrt();
    let mut stream = TrialStream::new(seed, 0);
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let a0 = if sd > 0.0 { sd * stream.normal() } else { 0.0 };
            x.tail().iter().fold(a0, |acc, t| acc + t * stream.sign())
        })
        .collect();
    DiscreteMeasure::uniform(&values)
}

/// Largest admissible bound on the mass of `φ(x)` outside the grid window.
pub const WINDOW_MASS_TOL: f64 = 1e-6;

/// Cell masses of `φ(x)` on `bins` equal cells covering `[−hw, hw]`, placed
/// at the cell centres, obtained by Fourier inversion of the characteristic
/// function.
pub fn phi_grid(x: &AuxPoint, half_width: f64, bins: usize) -> Result<DiscreteMeasure> {
    if bins < 2 || !bins.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("bins must be a power of two >= 2, got {bins}")));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidParameter(format!("half width must be positive, got {half_width}")));
    }
    let cf = char_fn(x);
    let jv = cf.gaussian_variance;
    if x.x0() == 0.0 {
        return Err(Error::AtomicLaw);
    }
    // Y is sub-Gaussian with variance proxy x0.
    let bound = 2.0 * (-half_width * half_width / (2.0 * x.x0())).exp();
    if bound >= WINDOW_MASS_TOL {
        return Err(Error::WindowTooSmall { half_width, bound });
    }
    let period = 2.0 * half_width;
    let cell = period / bins as f64;
    let ds = 2.0 * PI / period;
    let nyquist = PI / cell;
    if (-0.5 * jv * nyquist * nyquist).exp() >= 1e-12 {
        return Err(Error::AtomicLaw);
    }
    // Terms beyond exp(-J s²/2) < 1e-20 are dropped.
    let m_max = ((2.0 * 46.0 / jv).sqrt() / ds).ceil() as i64;

    let mut acc = vec![Complex64::new(0.0, 0.0); bins];
    for m in -m_max..=m_max {
        let s = m as f64 * ds;
        let weight = if m == 0 { cell } else { 2.0 * (0.5 * s * cell).sin() / s };
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let phase = Complex64::from_polar(1.0, -PI * m as f64 / bins as f64);
        acc[m.rem_euclid(bins as i64) as usize] += phase * (sign * cf.eval(s) * weight / period);
    }
    FftPlanner::new().plan_fft_forward(bins).process(&mut acc);

    let (mut support, mut weights) = (Vec::with_capacity(bins), Vec::with_capacity(bins));
    for (k, z) in acc.iter().enumerate() {
        let p = z.re;
        if p > 0.0 {
            support.push(-half_width + (k as f64 + 0.5) * cell);
            weights.push(p);
        }
    }
    let total: f64 = crate::stats::compensated_sum(weights.iter().copied());
    for w in &mut weights {
        *w /= total;
    }
    DiscreteMeasure::new(support, weights)
}

/// Scan limit for zeros of the residual characteristic function.
pub const RECONSTRUCT_HORIZON: f64 = 64.0 * PI;
/// Below this `ln|f|` the input has underflowed and zeros are unresolvable.
const UNDERFLOW_LN: f64 = -600.0;
/// Minimum depth, in `ln|f|`, of a dip accepted as an even-order zero.
const DIP_DEPTH: f64 = 10.0;

struct Residual<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    xs: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Residual<'_, F> {
    fn raw(&self, s: f64) -> f64 {
        self.xs.iter().fold((self.f)(s), |acc, x| acc / (s * x).cos())
    }

    /// `f(s) / Π cos(s x_j)`, extended continuously across removed zeros.
    fn eval(&self, s: f64) -> f64 {
        let worst = self
            .xs
            .iter()
            .copied()
            .min_by(|a, b| (s * a).cos().abs().total_cmp(&(s * b).cos().abs()));
        match worst {
            Some(x) if (s * x).cos().abs() < 1e-9 => {
                let d = 1e-5 / x;
                let avg = |h: f64| 0.5 * (self.raw(s + h) + self.raw(s - h));
                (4.0 * avg(0.5 * d) - avg(d)) / 3.0
            }
            _ => self.raw(s),
        }
    }

    fn first_zero(&self, step: f64, zero_tol: f64) -> Option<f64> {
        let lnabs = |s: f64| self.eval(s).abs().ln();
        let mut prev2_s = 0.0;
        let (mut prev_s, mut prev_v) = (0.0, self.eval(0.0));
        let mut prev_l = prev_v.abs().ln();
        let mut i = 1u64;
        loop {
            let s = i as f64 * step;
            if s > RECONSTRUCT_HORIZON || (self.f)(s).abs().ln() < UNDERFLOW_LN {
                return None;
            }
            let v = self.eval(s);
            if v == 0.0 {
                return Some(s);
            }
            if v.signum() != prev_v.signum() {
                return Some(bisect(|t| self.eval(t), prev_s, s, prev_v, zero_tol));
            }
            let l = v.abs().ln();
            if l >= prev_l {
                let (lo, hi) = (prev2_s, s);
                let (t, lmin) = minimize(lnabs, lo, hi, zero_tol);
                if lmin <= lnabs(lo).min(lnabs(hi)) - DIP_DEPTH {
                    return Some(t);
                }
            }
            prev2_s = prev_s;
            prev_s = s;
            prev_v = v;
            prev_l = l;
            i += 1;
        }
    }
}

fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, mut g_lo: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == g_lo.signum() {
            lo = mid;
            g_lo = v;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimum of a unimodal function.
fn minimize<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut ga, mut gb) = (g(a), g(b));
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        if ga <= gb {
            hi = b;
            b = a;
            gb = ga;
            a = hi - r * (hi - lo);
            ga = g(a);
        } else {
            lo = a;
            a = b;
            ga = gb;
            b = lo + r * (hi - lo);
            gb = g(b);
        }
    }
    if ga <= gb {
        (a, ga)
    } else {
        (b, gb)
    }
}

/// The residual must be `exp(−J s²/2)` on the whole representable range.
/// Catches tail coordinates whose first zero lies beyond underflow: their
/// quartic signature is still visible here even though the zero is not.
fn check_gaussian_residual<F: Fn(f64) -> f64>(res: &Residual<'_, F>, jv: f64) -> Result<()> {
    let s_end = if jv > 0.0 {
        (-2.0 * (UNDERFLOW_LN + 50.0) / jv).sqrt().min(RECONSTRUCT_HORIZON)
    } else {
        RECONSTRUCT_HORIZON
    };
    for k in 1..=64 {
        let s = s_end * k as f64 / 64.0;
        if (res.f)(s).abs().ln() < UNDERFLOW_LN || res.xs.iter().any(|x| (s * x).cos().abs() < 1e-3) {
            continue;
        }
        let r = res.eval(s);
        let expect = 0.5 * jv * s * s;
        if !(r > 0.0) || (r.ln() + expect).abs() > 1e-9 * expect.max(1.0) {
            return Err(Error::Reconstruction(format!(
                "residual at s = {s} is {r:e}, not Gaussian with variance {jv}; \
                 a tail coordinate is below the resolvable scale"
            )));
        }
    }
    Ok(())
}

/// Recovers `x` from `f = char_fn(x)` by chasing the first positive zero of
/// the residual: `x_{k+1} = π / (2 t_k)`, then dividing out `cos(s x_{k+1})`.
/// The Gaussian part `J` is read off the residual after all zeros are
/// removed and `x0 = J + Σ x_j²`.
pub fn reconstruct<F: Fn(f64) -> f64>(f: F, k_max: usize, zero_tol: f64) -> Result<AuxPoint> {
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidParameter("zero tolerance must be positive".into()));
    }
    let f0 = f(0.0);
    if (f0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("f(0) = {f0}, expected 1")));
    }
    let h = 1e-4;
    let x0_fd = (2.0 * f0 - f(h) - f(-h)) / (h * h);
    if !x0_fd.is_finite() || x0_fd < -1e-6 {
        return Err(Error::Reconstruction(format!("second moment estimate {x0_fd} is invalid")));
    }
    let step = PI / (64.0 * x0_fd.max(1e-4).sqrt());

    let mut res = Residual { f: &f, xs: Vec::new() };
    while let Some(t) = res.first_zero(step, zero_tol) {
        if res.xs.len() == k_max {
            return Err(Error::KMaxExceeded(k_max));
        }
        // Close zeros can be found out of order, so sort afterwards.
        res.xs.push(PI / (2.0 * t));
    }
    res.xs.sort_by(|a, b| b.total_cmp(a));

    let s1 = res.xs.first().map_or(1.0, |x| (PI / (4.0 * x)).min(1.0));
    let j_at = |s: f64| -> Result<f64> {
        let r = res.eval(s);
        if !(r > 0.0) {
            return Err(Error::Reconstruction(format!("residual {r} at s = {s} is not positive")));
        }
        Ok(-2.0 * r.ln() / (s * s))
    };
    let (j1, j2) = (j_at(s1)?, j_at(0.5 * s1)?);
    if (j1 - j2).abs() > 1e-6 * j1.abs().max(1.0) || j1 < -1e-9 {
        return Err(Error::Reconstruction(format!(
            "residual factor is not Gaussian (variance {j1} vs {j2})"
        )));
    }
    let jv = j1.max(0.0);
    check_gaussian_residual(&res, jv)?;
    let x0 = jv + tail_square_sum(&res.xs);
    if (x0 - x0_fd).abs() > 1e-4 * x0.max(1.0) {
        return Err(Error::Reconstruction(format!(
            "recovered x0 = {x0} disagrees with the second moment {x0_fd}"
        )));
    }
    AuxPoint::new(x0, res.xs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallReport {
    pub n: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `−(4/n²) ln p̂`.
    pub rate: ExtReal,
    pub rate_ci_low: ExtReal,
    pub rate_ci_high: ExtReal,
    pub zero_hits: bool,
    /// Smallest `d(γ_n, x)` seen, or a lower bound on it when no trial came
    /// within the largest requested radius.
    pub closest_distance: f64,
}

/// Lower bound on `d(γ_n, x)` that avoids the eigensolve, or the exact
/// distance when the bound does not already exclude the largest ball.
fn trial_distance(x: &AuxPoint, n: usize, eps_max: f64, seed: u64, trial: u64) -> f64 {
    let mut stream = TrialStream::new(seed, trial);
    let j = sample_antisymmetric_from(n, &mut stream);
    let c = crate::binomial(n, 2);
    let mut sq = 0.0;
    let mut max_col = 0.0f64;
    for col in 0..n {
        let norm2: f64 = j.column(col).iter().map(|v| v * v).sum();
        max_col = max_col.max(norm2);
        sq += norm2;
    }
    // Σ_{i<j} J_ij² = ‖J‖²/2 = Σ μ_j², and μ_1 ≥ every column norm.
    let x0_gamma = 0.5 * sq / c;
    let bound_head = (x0_gamma - x.x0()).abs() - 1e-9;
    let bound_tail = (max_col.sqrt() / c.sqrt()) * (1.0 - 1e-12) - x.coord(1);
    let bound = bound_head.max(bound_tail);
    if bound >= eps_max {
        return bound;
    }
    match mu_spectrum(&j) {
        Ok(mu) => metric_d(&gamma_n(&mu), x),
        Err(e) => {
            log::warn!("trial {trial}: {e}; counted as a miss");
            f64::INFINITY
        }
    }
}

/// Estimates `P(d(γ_n, x) < ε)` for several radii on common random numbers.
pub fn small_ball_rates(
    x: &AuxPoint,
    epsilons: &[f64],
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<SmallBallReport>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddModes(n));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let eps_max = epsilons.iter().copied().fold(0.0, f64::max);
    let distances = map_trials(trials, workers, |t| trial_distance(x, n, eps_max, seed, t));
    let closest = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let speed = 4.0 / (n as f64 * n as f64);
    let to_rate = |p: f64| {
        if p > 0.0 {
            ExtReal::Finite((-speed * p.ln()).max(0.0))
        } else {
            ExtReal::PosInfinity
        }
    };
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let hits = distances.iter().filter(|&&d| d < eps).count() as u64;
            let p_hat = hits as f64 / trials as f64;
            let (lo, hi) = wilson_interval(hits, trials, CI_SIGMAS);
            SmallBallReport {
                n,
                epsilon: eps,
                trials,
                hits,
                p_hat,
                ci_low: lo,
                ci_high: hi,
                rate: to_rate(p_hat),
                rate_ci_low: to_rate(hi),
                rate_ci_high: to_rate(lo),
                zero_hits: hits == 0,
                closest_distance: closest,
            }
        })
        .collect())
}

pub fn small_ball_rate(
    x: &AuxPoint,
    epsilon: f64,
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SmallBallReport> {
    Ok(small_ball_rates(x, &[epsilon], n, trials, seed, workers)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x0: f64, tail: &[f64]) -> AuxPoint {
        AuxPoint::new(x0, tail.to_vec()).unwrap()
    }

    #[test]
    fn metric_examples() {
        let x = pt(1.0, &[]);
        assert_eq!(metric_d(&x, &x), 0.0);
        assert_eq!(metric_d(&x, &pt(1.0, &[0.3])), 0.3);
    }

    #[test]
    fn functional_examples() {
        assert_eq!(j_functional(&AuxPoint::x_min()), 1.0);
        assert_eq!(j_functional(&pt(1.25, &[0.5, 0.25])), 0.9375);
        assert_eq!(rate_i(&AuxPoint::x_min()), ExtReal::Finite(0.0));
        let r = rate_i(&pt(1.2, &[])).finite().unwrap();
        assert!((r - (0.2 - 1.2f64.ln())).abs() < 1e-15);
        assert_eq!(rate_i(&pt(1.0, &[1.0])), ExtReal::PosInfinity);
    }

    #[test]
    fn ext_real_json() {
        let v = serde_json::to_string(&[ExtReal::Finite(0.5), ExtReal::PosInfinity]).unwrap();
        assert_eq!(v, r#"[0.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![ExtReal::Finite(0.5), ExtReal::PosInfinity]);
        assert!(ExtReal::PosInfinity > ExtReal::Finite(1e300));
    }

    #[test]
    fn rademacher_char_fn() {
        let cf = char_fn(&pt(1.0, &[1.0]));
        for s in [0.0, 0.3, 2.0, -5.0] {
            assert_eq!(cf.eval(s), s.cos());
        }
    }

    #[test]
    fn phi_sample_rademacher() {
        let m = phi_sample(&pt(1.0, &[1.0]), 1000, 2).unwrap();
        assert_eq!(m.support(), &[-1.0, 1.0]);
    }

    #[test]
    fn phi_grid_errors() {
        assert!(matches!(
            phi_grid(&AuxPoint::x_min(), 3.0, 1024),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(matches!(phi_grid(&pt(1.0, &[1.0]), 10.0, 1024), Err(Error::AtomicLaw)));
        assert!(phi_grid(&AuxPoint::x_min(), 8.0, 1000).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let x = pt(1.0, &[]);
        let cf = char_fn(&x);
        let r = reconstruct(|s| cf.eval(s), 8, 1e-12).unwrap();
        assert!(r.tail().is_empty());
        assert!((r.x0() - 1.0).abs() < 1e-8);

        let x = pt(1.25, &[0.5, 0.25]);
        let cf = char_fn(&x);
        let r = reconstruct(|s| cf.eval(s), 8, 1e-12).unwrap();
        assert!(metric_d(&r, &x) < 1e-8, "{r:?}");

        let x = pt(1.0, &[0.5, 0.5]);
        let cf = char_fn(&x);
        let r = reconstruct(|s| cf.eval(s), 8, 1e-12).unwrap();
        assert_eq!(r.tail().len(), 2);
        assert!(metric_d(&r, &x) < 1e-8, "{r:?}");
    }

    #[test]
    fn reconstruct_k_max() {
        let cf = char_fn(&pt(1.0, &[0.5, 0.4, 0.3]));
        assert_eq!(reconstruct(|s| cf.eval(s), 2, 1e-12), Err(Error::KMaxExceeded(2)));
    }

    #[test]
    fn small_ball_typical_point() {
        // at n = 20 the largest tail coordinate of γ_n sits near 0.6
        let r = small_ball_rate(&AuxPoint::x_min(), 1.0, 20, 200, 1, 1).unwrap();
        assert!(r.p_hat > 0.9, "{r:?}");
        let e = small_ball_rates(&AuxPoint::x_min(), &[0.6, 0.7], 20, 200, 1, 1).unwrap();
        assert!(e[0].hits <= e[1].hits);
    }
}
