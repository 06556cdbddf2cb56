use proptest::prelude::*;

use syk::ldp::reconstruct;
use syk::majorana::string_product;
use syk::rng::map_trials;
use syk::stats::wilson_interval;
use syk::*;

fn measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-4.0f64..4.0, 0.05f64..1.0), 1..7).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let (s, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().map(|(s, w)| (s, w / total)).unzip();
        DiscreteMeasure::new(s, w).unwrap()
    })
}

/// Random point of the auxiliary space with a decreasing tail of length ≤ 5.
fn aux_point(min_j: f64) -> impl Strategy<Value = AuxPoint> {
    (prop::collection::vec(0.0f64..1.5, 0..=5), min_j..3.0, any::<bool>()).prop_map(
        |(mut tail, extra, repeat)| {
            tail.sort_by(|a, b| b.total_cmp(a));
            if repeat && tail.len() >= 2 {
                tail[1] = tail[0];
            }
            let sq: f64 = tail.iter().map(|t| t * t).sum();
            AuxPoint::new(sq + extra, tail).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn string_products_associate(n in (1usize..=6).prop_map(|k| 2 * k), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let m = (1u128 << n) - 1;
        let (a, b, c) = [a, b, c].map(|v| psi_product(n, &IndexSet::from_mask(n, v as u128 & m).unwrap()).unwrap()).into();
        let left = string_product(&string_product(&a, &b).unwrap(), &c).unwrap();
        let right = string_product(&a, &string_product(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn products_collapse_to_symmetric_difference(a in 0u128..4096, b in 0u128..4096) {
        let n = 12;
        let (sa, sb) = (IndexSet::from_mask(n, a).unwrap(), IndexSet::from_mask(n, b).unwrap());
        let prod = string_product(&psi_product(n, &sa).unwrap(), &psi_product(n, &sb).unwrap()).unwrap();
        let sym = psi_product(n, &sa.symmetric_difference(&sb).unwrap()).unwrap();
        prop_assert!(prod.equals_up_to_sign(&sym));
    }

    #[test]
    fn dbl_metric_axioms(mu in measure(), nu in measure(), eta in measure()) {
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| dbl_exact(a, b).unwrap();
        let (ab, ba, ac, cb) = (d(&mu, &nu), d(&nu, &mu), d(&mu, &eta), d(&eta, &nu));
        prop_assert!((ab.distance - ba.distance).abs() < 1e-12);
        prop_assert!(ab.distance <= ac.distance + cb.distance + 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab.distance));
        prop_assert!(d(&mu, &mu).distance.abs() < 1e-12);
        prop_assert!(ab.certificate.verify(1e-9));
    }

    #[test]
    fn dbl_dominates_admissible_functions(mu in measure(), nu in measure(), c in -3.0f64..3.0) {
        let d = dbl_exact(&mu, &nu).unwrap().distance;
        for f in [|x: f64| x.tanh(), |x: f64| x.clamp(-1.0, 1.0), |x: f64| x.abs().min(1.0)] {
            let g = |x: f64| f(x - c);
            prop_assert!((mu.integrate(g) - nu.integrate(g)).abs() <= d + 1e-12);
        }
    }

    #[test]
    fn rate_level_set_bound(x in aux_point(0.0)) {
        let i = rate_i(&x);
        let j = j_functional(&x);
        prop_assert_eq!(i.is_infinite(), j <= 0.0);
        prop_assert!(i.as_f64() >= 0.0);
        prop_assert!(i.as_f64() >= x.x0() / 2.0 - std::f64::consts::LN_2 - 1e-12);
    }

    #[test]
    fn metric_axioms(x in aux_point(0.0), y in aux_point(0.0), z in aux_point(0.0)) {
        prop_assert_eq!(metric_d(&x, &x), 0.0);
        prop_assert_eq!(metric_d(&x, &y), metric_d(&y, &x));
        prop_assert!(metric_d(&x, &z) <= metric_d(&x, &y) + metric_d(&y, &z) + 1e-15);
    }

    #[test]
    fn wilson_contains_point_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let hits = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(hits, trials, 3.0);
        let p = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
    }
}

/// Like [`aux_point`], but every tail coordinate has its first cosine zero
/// before `exp(−J s²/2)` underflows, so `char_fn` still carries it.
fn resolvable_point() -> impl Strategy<Value = AuxPoint> {
    (prop::collection::vec(0.0f64..1.5, 0..=5), 0.05f64..3.0, any::<bool>()).prop_map(
        |(mut tail, j, repeat)| {
            let floor = std::f64::consts::FRAC_PI_2 * (j / 1000.0).sqrt();
            tail.sort_by(|a, b| b.total_cmp(a));
            if repeat && tail.len() >= 2 {
                tail[1] = tail[0];
            }
            let tail: Vec<f64> = tail.into_iter().map(|t| t.max(floor)).collect();
            let sq: f64 = tail.iter().map(|t| t * t).sum();
            AuxPoint::new(sq + j, tail).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reconstruction_round_trip(x in resolvable_point()) {
        let cf = char_fn(&x);
        let back = reconstruct(|s| cf.eval(s), 8, 1e-12).unwrap();
        prop_assert!(metric_d(&x, &back) < 1e-8, "x={:?} back={:?}", x, back);
    }

    #[test]
    fn gamma_n_lies_in_x0(n in (1usize..=20).prop_map(|k| 2 * k), seed in any::<u64>()) {
        let j = sample_antisymmetric(n, seed).unwrap();
        let mu = mu_spectrum(&j).unwrap();
        prop_assert!(mu.mu.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(mu.mu.iter().all(|m| *m >= 0.0));
        let frob: f64 = j.iter().map(|v| v * v).sum::<f64>() / 2.0;
        let sq: f64 = mu.mu.iter().map(|m| m * m).sum();
        prop_assert!((frob - sq).abs() <= 1e-10 * frob);
        prop_assert_eq!(j_functional(&gamma_n(&mu)), 0.0);
    }

    #[test]
    fn hs_identity(nq in prop::sample::select(vec![(4, 2), (6, 2), (6, 3), (8, 2), (8, 3), (8, 4)]), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (n, q) = nq;
        let (x, y) = (sample_couplings(n, q, s1).unwrap(), sample_couplings(n, q, s2).unwrap());
        let d = hs_distance(&assemble(&x).unwrap(), &assemble(&y).unwrap()).unwrap();
        let rhs = (1u64 << (n / 2)) as f64 / binomial(n, q) * x.euclidean_distance(&y).powi(2);
        prop_assert!((d * d - rhs).abs() <= 1e-10 * rhs.max(1e-300));
    }

    #[test]
    fn trial_map_ignores_worker_count(trials in 0u64..500, workers in 1usize..9, seed in any::<u64>()) {
        let f = |t: u64| syk::rng::TrialStream::new(seed, t).normal();
        prop_assert_eq!(map_trials(trials, 1, f), map_trials(trials, workers, f));
    }
}
