//! The `syk` command line.
//!
//! Every subcommand writes a JSON envelope
//! `{schema_version, tool_version, command, config, payload}` (plus
//! `timestamp` with `--timestamp`) or, with `--format csv`, a table view of
//! the payload. `--plot FILE` writes whitespace-delimited columns under a
//! `#` header. Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, hs_distance, sample_couplings};
use crate::ldp::{
    char_fn, j_functional, metric_d, phi_grid, phi_sample, rate_i, reconstruct, small_ball_rates,
};
use crate::majorana::{majorana_operator, string_product};
use crate::measures::{dbl_bruteforce, dbl_exact, limit_law, moments, LawKind};
use crate::montecarlo::{
    concentration_sweep, lipschitz_audit, mgf_bound, mgf_estimate, selberg_log_z,
    shell_probability, TestFn,
};
use crate::rng::DEFAULT_SEED;
use crate::spectrum::{
    eigenvalues, empirical_measure, gamma_n, mu_spectrum, q2_spectrum, sample_antisymmetric,
    AuxPoint, DiscreteMeasure, Q2Mode,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser, Serialize)]
#[command(name = "syk", version, about = "Gaussian SYK spectra, rate functions and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct Output {
    /// Write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write plot-ready columns to this file
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Record the wall-clock time in the envelope
    #[arg(long)]
    timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PhiMode {
    Grid,
    Sampled,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Full spectrum of an assembled Hamiltonian
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Exact q = 2 spectrum from an antisymmetric Gaussian matrix
    Q2 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        /// Sign vectors drawn in sampled mode
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Rate function and J at a point of the auxiliary space
    Rate {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Bounded-Lipschitz distance between two discrete laws
    Dbl {
        /// Atoms as `point:weight,...` (or bare points for equal weights)
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        /// Second law; defaults to the discretized limit law
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        #[arg(long, default_value = "gaussian")]
        law: String,
        /// Atoms used to discretize the limit law
        #[arg(long, default_value_t = 4096)]
        grid_bins: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// The law φ(x), by grid inversion or sampling
    Phi {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum, default_value_t = PhiMode::Grid)]
        mode: PhiMode,
        #[arg(long, default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 2048)]
        grid_bins: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Recover x from the characteristic function of φ(x)
    Reconstruct {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 16)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-12)]
        zero_tol: f64,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Monte Carlo small-ball probability and rate for γ_n
    Smallball {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// One or more radii, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Moment generating function estimate against its bound
    Mgf {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Probability of the shell a·C(n,2) < Σμ² < b·C(n,2) against its bound
    Shell {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Lipschitz ratios of spectral functionals over random coupling pairs
    Lipschitz {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Test functions: identity, tanh, clipped-abs, constant
        #[arg(long, value_delimiter = ',', default_value = "identity,tanh,clipped-abs")]
        f: Vec<String>,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Variance of ⟨f, ρ_n⟩ across (n, q) plans
    Sweep {
        /// Plans as `n:q,...`
        #[arg(long, default_value = "10:2,12:2,14:2,10:3,12:3,12:4")]
        plans: String,
        #[arg(long, default_value = "identity")]
        f: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
    /// Quick oracle-equivalence battery
    Selftest {
        #[command(flatten)]
        #[serde(skip)]
        output: Output,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Q2 { .. } => "q2",
            Command::Rate { .. } => "rate",
            Command::Dbl { .. } => "dbl",
            Command::Phi { .. } => "phi",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Smallball { .. } => "smallball",
            Command::Mgf { .. } => "mgf",
            Command::Shell { .. } => "shell",
            Command::Lipschitz { .. } => "lipschitz",
            Command::Sweep { .. } => "sweep",
            Command::Selftest { .. } => "selftest",
        }
    }

    fn output(&self) -> &Output {
        match self {
            Command::Spectrum { output, .. }
            | Command::Q2 { output, .. }
            | Command::Rate { output, .. }
            | Command::Dbl { output, .. }
            | Command::Phi { output, .. }
            | Command::Reconstruct { output, .. }
            | Command::Smallball { output, .. }
            | Command::Mgf { output, .. }
            | Command::Shell { output, .. }
            | Command::Lipschitz { output, .. }
            | Command::Sweep { output, .. }
            | Command::Selftest { output } => output,
        }
    }
}

/// Result of a subcommand before serialization.
struct Outcome {
    payload: Value,
    /// Name of the payload array rendered by `--format csv`.
    table: Option<&'static str>,
    plot: Option<Plot>,
    /// Selftest reports failures through the exit code.
    failed: bool,
}

struct Plot {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Outcome {
    fn new(payload: Value) -> Self {
        Self {
            payload,
            table: None,
            plot: None,
            failed: false,
        }
    }
}

/// Parses `x0,x1,...,xk` into a point of the auxiliary space.
pub fn parse_aux_point(text: &str) -> Result<AuxPoint> {
    let values = parse_reals(text)?;
    let Some((&x0, tail)) = values.split_first() else {
        return Err(Error::InvalidParameter("empty point".into()));
    };
    AuxPoint::new(x0, tail.to_vec())
}

fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse {s:?} as a number")))
        })
        .collect()
}

/// `p:w,p:w,...` or `p,p,...` (equal weights).
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.iter().all(|s| !s.contains(':')) {
        return DiscreteMeasure::uniform(&parse_reals(text)?);
    }
    let mut support = Vec::with_capacity(items.len());
    let mut weights = Vec::with_capacity(items.len());
    for item in items {
        let (p, w) = item
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("expected point:weight, got {item:?}")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse {s:?} as a number")))
        };
        support.push(parse(p)?);
        weights.push(parse(w)?);
    }
    DiscreteMeasure::new(support, weights)
}

fn parse_plans(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || Error::InvalidParameter(format!("expected n:q, got {item:?}"));
            let (n, q) = item.split_once(':').ok_or_else(bad)?;
            Ok((n.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable payload")
}

fn measure_plot(m: &DiscreteMeasure) -> Plot {
    Plot {
        columns: vec!["support", "weight"],
        rows: m.support().iter().zip(m.weights()).map(|(s, w)| vec![*s, *w]).collect(),
    }
}

fn atoms(m: &DiscreteMeasure) -> Value {
    let rows: Vec<Value> = m
        .support()
        .iter()
        .zip(m.weights())
        .map(|(s, w)| json!({"support": s, "weight": w}))
        .collect();
    Value::Array(rows)
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Spectrum { n, q, seed, .. } => {
            let h = assemble(&sample_couplings(*n, *q, *seed)?)?;
            let eigs = eigenvalues(&h)?;
            let rho = empirical_measure(&eigs)?;
            let rows: Vec<Value> = eigs
                .iter()
                .enumerate()
                .map(|(i, l)| json!({"index": i, "eigenvalue": l}))
                .collect();
            let mut out = Outcome::new(json!({
                "n": n, "q": q, "seed": seed, "dimension": h.dimension(),
                "first_moment": moments(&rho, 1), "second_moment": moments(&rho, 2),
                "eigenvalues": rows,
            }));
            out.table = Some("eigenvalues");
            out.plot = Some(Plot {
                columns: vec!["index", "eigenvalue"],
                rows: eigs.iter().enumerate().map(|(i, l)| vec![i as f64, *l]).collect(),
            });
            Ok(out)
        }
        Command::Q2 {
            n,
            seed,
            mode,
            trials,
            ..
        } => {
            let mu = mu_spectrum(&sample_antisymmetric(*n, *seed)?)?;
            let q2mode = match mode {
                ModeArg::Exhaustive => Q2Mode::Exhaustive,
                ModeArg::Sampled => Q2Mode::Sampled {
                    samples: *trials,
                    seed: *seed,
                },
            };
            let m = q2_spectrum(&mu, q2mode)?;
            let g = gamma_n(&mu);
            let mut out = Outcome::new(json!({
                "n": n, "seed": seed, "mu": mu.mu,
                "gamma_n": {"x0": g.x0(), "tail": g.tail()},
                "second_moment": moments(&m, 2),
                "atoms": atoms(&m),
            }));
            out.table = Some("atoms");
            out.plot = Some(measure_plot(&m));
            Ok(out)
        }
        Command::Rate { x, .. } => {
            let p = parse_aux_point(x)?;
            Ok(Outcome::new(json!({
                "x0": p.x0(), "tail": p.tail(),
                "J": j_functional(&p), "I": to_value(&rate_i(&p)),
            })))
        }
        Command::Dbl {
            mu,
            nu,
            law,
            grid_bins,
            ..
        } => {
            let m1 = parse_measure(mu)?;
            let (m2, error_bound, against) = match nu {
                Some(text) => (parse_measure(text)?, 0.0, "discrete".to_string()),
                None => {
                    let kind: LawKind = law.parse()?;
                    let d = limit_law(kind, None)?.discretize(*grid_bins)?;
                    (d.measure, d.error_bound, law.to_lowercase())
                }
            };
            let r = dbl_exact(&m1, &m2)?;
            let witness: Vec<Value> = r
                .certificate
                .support
                .iter()
                .zip(&r.certificate.witness)
                .map(|(s, f)| json!({"support": s, "witness": f}))
                .collect();
            let mut out = Outcome::new(json!({
                "distance": r.distance, "against": against,
                "discretization_error_bound": error_bound,
                "certificate_feasible": r.certificate.verify(1e-9),
                "objective": r.certificate.objective,
                "witness": witness,
            }));
            out.table = Some("witness");
            out.plot = Some(Plot {
                columns: vec!["support", "witness"],
                rows: r
                    .certificate
                    .support
                    .iter()
                    .zip(&r.certificate.witness)
                    .map(|(s, f)| vec![*s, *f])
                    .collect(),
            });
            Ok(out)
        }
        Command::Phi {
            x,
            mode,
            half_width,
            grid_bins,
            trials,
            seed,
            ..
        } => {
            let p = parse_aux_point(x)?;
            let m = match mode {
                PhiMode::Grid => phi_grid(&p, *half_width, *grid_bins)?,
                PhiMode::Sampled => phi_sample(&p, *trials, *seed)?,
            };
            let mut out = Outcome::new(json!({
                "x0": p.x0(), "tail": p.tail(), "J": j_functional(&p),
                "first_moment": moments(&m, 1), "second_moment": moments(&m, 2),
                "atoms": atoms(&m),
            }));
            out.table = Some("atoms");
            out.plot = Some(measure_plot(&m));
            Ok(out)
        }
        Command::Reconstruct {
            x, kmax, zero_tol, ..
        } => {
            let p = parse_aux_point(x)?;
            let cf = char_fn(&p);
            let r = reconstruct(|s| cf.eval(s), *kmax, *zero_tol)?;
            Ok(Outcome::new(json!({
                "input": {"x0": p.x0(), "tail": p.tail()},
                "recovered": {"x0": r.x0(), "tail": r.tail()},
                "distance": metric_d(&p, &r),
            })))
        }
        Command::Smallball {
            x,
            epsilon,
            n,
            trials,
            seed,
            workers,
            ..
        } => {
            let p = parse_aux_point(x)?;
            let reports = small_ball_rates(&p, epsilon, *n, *trials, *seed, *workers)?;
            let bracket: Vec<Value> = epsilon
                .iter()
                .map(|&e| {
                    let lo = AuxPoint::new(p.x0() + e, p.tail().to_vec()).map(|q| rate_i(&q));
                    let hi = AuxPoint::new((p.x0() - e).max(0.0), p.tail().to_vec()).map(|q| rate_i(&q));
                    json!({"epsilon": e,
                           "rate_at_x0_plus_eps": lo.ok().map(|v| to_value(&v)),
                           "rate_at_x0_minus_eps": hi.ok().map(|v| to_value(&v))})
                })
                .collect();
            let mut out = Outcome::new(json!({
                "x0": p.x0(), "tail": p.tail(), "rate_at_x": to_value(&rate_i(&p)),
                "reports": to_value(&reports), "rate_function_at_ball_edges": bracket,
            }));
            out.table = Some("reports");
            Ok(out)
        }
        Command::Mgf {
            n,
            k,
            a,
            b,
            trials,
            seed,
            workers,
            ..
        } => Ok(Outcome::new(to_value(&mgf_estimate(*n, *k, *a, *b, *trials, *seed, *workers)?))),
        Command::Shell {
            n,
            a,
            b,
            trials,
            seed,
            workers,
            ..
        } => Ok(Outcome::new(to_value(&shell_probability(*n, *a, *b, *trials, *seed, *workers)?))),
        Command::Lipschitz {
            n,
            q,
            trials,
            seed,
            workers,
            f,
            ..
        } => {
            let family = f.iter().map(|s| s.parse()).collect::<Result<Vec<TestFn>>>()?;
            let r = lipschitz_audit(*n, *q, *trials, *seed, *workers, &family)?;
            let mut out = Outcome::new(to_value(&r));
            out.table = Some("functionals");
            Ok(out)
        }
        Command::Sweep {
            plans,
            f,
            trials,
            seed,
            workers,
            ..
        } => {
            let plans = parse_plans(plans)?;
            let r = concentration_sweep(&plans, f.parse()?, *trials, *seed, *workers)?;
            let mut out = Outcome::new(to_value(&r));
            out.table = Some("rows");
            out.plot = Some(Plot {
                columns: vec!["c_nq", "scaled_var"],
                rows: r.rows.iter().map(|row| vec![row.c_nq, row.scaled_var]).collect(),
            });
            Ok(out)
        }
        Command::Selftest { .. } => {
            let checks = selftest();
            let failed = checks.iter().any(|c| !c.passed);
            let mut out = Outcome::new(json!({"passed": !failed, "checks": to_value(&checks)}));
            out.table = Some("checks");
            out.failed = failed;
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn selftest() -> Vec<Check> {
    vec![
        check("majorana anticommutation n=8", || {
            let n = 8;
            let mut ok = true;
            for i in 1..=n {
                for j in 1..=n {
                    let (a, b) = (majorana_operator(n, i)?, majorana_operator(n, j)?);
                    let (ab, ba) = (string_product(&a, &b)?, string_product(&b, &a)?);
                    let anti = ab.equals_up_to_sign(&ba) && ab.phase() != ba.phase();
                    let expect = if i == j { ab.is_identity_up_to_phase() && ab.phase() == 0 } else { anti };
                    ok &= expect;
                }
            }
            Ok((ok, "string-level products".into()))
        }),
        check("hermitian traceless H (n=8, q=3)", || {
            let h = assemble(&sample_couplings(8, 3, DEFAULT_SEED)?)?;
            let herm = (&h.matrix - h.matrix.adjoint()).camax();
            let tr = h.matrix.trace().norm();
            Ok((herm <= 1e-12 && tr <= 1e-9 * 16.0, format!("max|H-H*| = {herm:e}, |Tr H| = {tr:e}")))
        }),
        check("Hilbert-Schmidt identity (n=6, q=3)", || {
            let x = sample_couplings(6, 3, 1)?;
            let y = sample_couplings(6, 3, 2)?;
            let d = hs_distance(&assemble(&x)?, &assemble(&y)?)?;
            let rhs = 8.0 / 20.0 * x.euclidean_distance(&y).powi(2);
            let rel = (d * d - rhs).abs() / rhs;
            Ok((rel <= 1e-10, format!("relative error {rel:e}")))
        }),
        check("q=2 closed form vs eigensolve (n=8)", || {
            let j = sample_antisymmetric(8, DEFAULT_SEED)?;
            let exact = q2_spectrum(&mu_spectrum(&j)?, Q2Mode::Exhaustive)?;
            let c = crate::hamiltonian::CouplingVector::from_antisymmetric(&j)?;
            let mut e = eigenvalues(&assemble(&c)?)?;
            e.sort_by(f64::total_cmp);
            let mut sorted: Vec<f64> = crate::spectrum::sign_sums(&mu_spectrum(&j)?.mu, 1.0 / 28f64.sqrt());
            sorted.sort_by(f64::total_cmp);
            let err = e.iter().zip(&sorted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok((err <= 1e-8 && exact.len() <= 16, format!("max deviation {err:e}")))
        }),
        check("rate function at the minimizer", || {
            let r = rate_i(&AuxPoint::x_min());
            Ok((r == crate::ldp::ExtReal::Finite(0.0), format!("I(x_min) = {r}")))
        }),
        check("reconstruction round trip", || {
            let x = AuxPoint::new(1.25, vec![0.5, 0.25])?;
            let cf = char_fn(&x);
            let r = reconstruct(|s| cf.eval(s), 8, 1e-12)?;
            let d = metric_d(&x, &r);
            Ok((d <= 1e-8, format!("d = {d:e}")))
        }),
        check("grid inversion vs normal cdf", || {
            let m = phi_grid(&AuxPoint::x_min(), 8.0, 2048)?;
            let law = limit_law(LawKind::Gaussian, None)?;
            let half = 8.0 / 2048.0;
            let mut acc = 0.0;
            let mut worst = 0.0f64;
            for (s, w) in m.support().iter().zip(m.weights()) {
                acc += w;
                worst = worst.max((acc - law.cdf(s + half)).abs());
            }
            Ok((worst <= 1e-4, format!("sup cdf error {worst:e}")))
        }),
        check("d_BL exact vs grid brute force", || {
            let mu = DiscreteMeasure::new(vec![-0.7, 0.2, 1.4], vec![0.5, 0.3, 0.2])?;
            let nu = DiscreteMeasure::new(vec![-0.1, 0.9, 3.0], vec![0.25, 0.25, 0.5])?;
            let exact = dbl_exact(&mu, &nu)?;
            let brute = dbl_bruteforce(&mu, &nu, 41)?;
            let ok = exact.certificate.verify(1e-9) && brute <= exact.distance + 1e-12
                && exact.distance - brute <= 4.0 / 41.0;
            Ok((ok, format!("exact {} brute {}", exact.distance, brute)))
        }),
        check("Selberg constant n=4", || {
            let v = selberg_log_z(4)?;
            Ok(((v - std::f64::consts::PI.ln()).abs() <= 1e-12, format!("ln Z_4 = {v}")))
        }),
        check("MGF bound n=4, k=0, b=1/4", || {
            let v = mgf_bound(4, 0, 0.0, 0.25)?;
            Ok(((v - 8.0).abs() <= 1e-12, format!("bound = {v}")))
        }),
    ]
}

fn envelope(cmd: &Command, payload: Value) -> Value {
    let mut env = json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": config_of(cmd),
        "payload": payload,
    });
    if cmd.output().timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        env["timestamp"] = json!(secs);
    }
    env
}

fn config_of(cmd: &Command) -> Value {
    // Externally tagged: {"q2": {...}} -> {...}
    match to_value(cmd) {
        Value::Object(map) => map.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn to_csv(payload: &Value, table: Option<&str>) -> Result<String> {
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    let rows = table.and_then(|t| payload.get(t)).and_then(Value::as_array);
    match rows {
        Some(rows) if rows.iter().all(Value::is_object) && !rows.is_empty() => {
            let header: Vec<String> = rows[0].as_object().unwrap().keys().cloned().collect();
            w.write_record(&header).map_err(io)?;
            for row in rows {
                let rec: Vec<String> = header.iter().map(|k| csv_cell(&row[k])).collect();
                w.write_record(&rec).map_err(io)?;
            }
        }
        _ => {
            w.write_record(["key", "value"]).map_err(io)?;
            if let Some(map) = payload.as_object() {
                for (k, v) in map {
                    if !v.is_array() && !v.is_object() {
                        w.write_record([k.as_str(), &csv_cell(v)]).map_err(io)?;
                    }
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

fn plot_text(plot: &Plot) -> String {
    let mut s = format!("# {}\n", plot.columns.join(" "));
    for row in &plot.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn write_target(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cmd = &cli.command;
    let outcome = match execute(cmd) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("syk {}: {e}", cmd.name());
            return if e.is_usage() { 1 } else { 2 };
        }
    };
    let output = cmd.output();
    let text = match output.format {
        Format::Json => {
            let env = envelope(cmd, outcome.payload);
            serde_json::to_string_pretty(&env).expect("serializable envelope") + "\n"
        }
        Format::Csv => match to_csv(&outcome.payload, outcome.table) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("syk {}: {e}", cmd.name());
                return 2;
            }
        },
    };
    if let Err(e) = write_target(output.out.as_ref(), &text) {
        eprintln!("syk {}: cannot write output: {e}", cmd.name());
        return 2;
    }
    if let Some(path) = &output.plot {
        match &outcome.plot {
            Some(plot) => {
                if let Err(e) = std::fs::write(path, plot_text(plot)) {
                    eprintln!("syk {}: cannot write plot data: {e}", cmd.name());
                    return 2;
                }
            }
            None => log::warn!("{} has no plot view; --plot ignored", cmd.name()),
        }
    }
    if outcome.failed {
        2
    } else {
        0
    }
}
