use homoclinic::sampling::{random_path, random_path_of, random_smooth_path, PathKind};
use homoclinic::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(8.0, 801, n).unwrap()
}

fn sample(seed: u64, n: usize) -> Path {
    random_path(&grid(n), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn weights() -> Vec<WeightProfile> {
    vec![
        WeightProfile::gaussian(1.0, 1.0).unwrap(),
        WeightProfile::sech_squared(1.0, 1.0).unwrap(),
        WeightProfile::rational(1.0).unwrap(),
        WeightProfile::gaussian(2.5, 0.4).unwrap(),
        WeightProfile::sech_squared(0.3, 3.0).unwrap(),
        WeightProfile::rational(0.2).unwrap(),
    ]
}

fn add(p: &Path, q: &Path) -> Path {
    let v = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| a + b)
        .collect();
    Path::from_values(*p.grid(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h1_norm_is_homogeneous(seed in any::<u64>(), c in -50.0f64..50.0, n in 1usize..4) {
        let p = sample(seed, n);
        let lhs = h1_norm_sq(&p.scaled(c).unwrap());
        let rhs = c * c * h1_norm_sq(&p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn h1_norm_triangle_inequality(a in any::<u64>(), b in any::<u64>(), n in 1usize..4) {
        let (p, q) = (sample(a, n), sample(b, n));
        let sum = h1_norm_sq(&add(&p, &q)).sqrt();
        prop_assert!(sum <= (h1_norm_sq(&p).sqrt() + h1_norm_sq(&q).sqrt()) * (1.0 + 1e-12));
    }

    #[test]
    fn embedding_holds_for_every_path_kind(seed in any::<u64>(), k in 0usize..5, n in 1usize..3) {
        let g = grid(n);
        let p = random_path_of(&g, PathKind::ALL[k], &mut ChaCha8Rng::seed_from_u64(seed));
        let e = check_embedding(&p).unwrap();
        prop_assert!(e.sqrt_pi_ok && e.sharp_ok, "ratio {}", e.ratio);
    }

    #[test]
    fn action_parts_are_consistent(seed in any::<u64>(), alpha in 1.01f64..1.99, w in 0usize..6) {
        let p = sample(seed, 2);
        let spec = ProblemSpec::new(alpha, 2, weights()[w]).unwrap();
        let a = action(&p, &spec).unwrap();
        prop_assert!(a.i1 >= 0.0 && a.i2 >= 0.0 && a.total.is_finite());
        prop_assert!((a.total - (a.i1 - a.i2)).abs() <= 1e-12 * a.i1.max(a.i2).max(1.0));
        prop_assert!((a.i1 - 0.5 * h1_norm_sq(&p)).abs() <= 1e-14 * a.i1);
    }

    #[test]
    fn action_is_bounded_below_by_phi(seed in any::<u64>(), alpha in 1.01f64..1.99, w in 0usize..6) {
        let p = sample(seed, 1);
        let spec = ProblemSpec::new(alpha, 1, weights()[w]).unwrap();
        let b = coercivity_bound(&spec);
        let x = h1_norm_sq(&p).sqrt();
        let total = action(&p, &spec).unwrap().total;
        prop_assert!(total >= b.phi(x) - 1e-12 * b.phi(x).abs());
        prop_assert!(total >= b.phi_min);
        // Sharp embedding constant.
        let s = sharp_coercivity_bound(&spec);
        prop_assert!(total >= s.phi(x) - 1e-12 * s.phi(x).abs());
    }

    #[test]
    fn euler_identity(seed in any::<u64>(), alpha in 1.01f64..1.99, w in 0usize..6) {
        let p = sample(seed, 2);
        let spec = ProblemSpec::new(alpha, 2, weights()[w]).unwrap();
        let a = action(&p, &spec).unwrap();
        let g = action_gradient(&p, &spec).unwrap();
        let lhs: f64 = g.iter().zip(p.values()).map(|(g, q)| g * q).sum();
        let rhs = 2.0 * a.i1 - alpha * a.i2;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn witness_is_negative_and_scale_invariant(seed in any::<u64>(), alpha in 1.01f64..1.99, c in 0.01f64..100.0) {
        let g = grid(2);
        let q0 = random_smooth_path(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        let spec = ProblemSpec::new(alpha, 2, WeightProfile::gaussian(1.0, 1.0).unwrap()).unwrap();
        let w = optimal_scaling(&q0, &spec).unwrap();
        prop_assert!(w.witness_action < 0.0);
        let direct = action(&w.witness_path(&q0).unwrap(), &spec).unwrap().total;
        prop_assert!((direct - w.witness_action).abs() <= 1e-9 * w.witness_action.abs());
        let wc = optimal_scaling(&q0.scaled(c).unwrap(), &spec).unwrap();
        prop_assert!((wc.witness_action - w.witness_action).abs() <= 1e-9 * w.witness_action.abs());
        prop_assert!((wc.r_star * c - w.r_star).abs() <= 1e-9 * w.r_star);
    }

    #[test]
    fn witness_scales_with_amplitude(seed in any::<u64>(), alpha in 1.05f64..1.95, c in 0.01f64..10.0) {
        let g = grid(1);
        let q0 = random_smooth_path(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        let w = WeightProfile::sech_squared(1.0, 1.0).unwrap();
        let spec = ProblemSpec::new(alpha, 1, w).unwrap();
        let scaled = spec.with_weight(w.with_amplitude(c).unwrap());
        let base = optimal_scaling(&q0, &spec).unwrap().witness_action;
        let got = optimal_scaling(&q0, &scaled).unwrap().witness_action;
        let expect = c.powf(2.0 / (2.0 - alpha)) * base;
        prop_assert!((got - expect).abs() <= 1e-9 * expect.abs());
    }

    #[test]
    fn growth_beyond_threshold(seed in any::<u64>(), alpha in 1.05f64..1.95, s in 1.0f64..10.0) {
        let p = sample(seed, 1);
        let spec = ProblemSpec::new(alpha, 1, WeightProfile::rational(1.0).unwrap()).unwrap();
        let b = coercivity_bound(&spec);
        let far = p.scaled(s * b.growth_threshold() / h1_norm_sq(&p).sqrt()).unwrap();
        let x2 = h1_norm_sq(&far);
        prop_assert!(action(&far, &spec).unwrap().total >= 0.25 * x2);
    }
}

#[test]
fn potential_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ws = weights();
    for k in 0..200 {
        let n = 1 + k % 3;
        let alpha = rng.random_range(1.01..1.99);
        let spec = ProblemSpec::new(alpha, n, ws[k % ws.len()]).unwrap();
        let t = rng.random_range(-5.0..5.0);
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        if q.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-2 {
            continue;
        }
        let g = spec.potential_gradient(t, &q);
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let step = 1e-6 * norm.max(1.0);
        for j in 0..n {
            let mut plus = q.clone();
            let mut minus = q.clone();
            plus[j] += step;
            minus[j] -= step;
            let fd =
                (spec.potential_value(t, &plus) - spec.potential_value(t, &minus)) / (2.0 * step);
            let err = (fd - g[j]).abs() / g[j].abs().max(1.0);
            assert!(err < 1e-6, "sample {k} coord {j}: fd {fd} vs {}", g[j]);
        }
        // |V_q + q| = α a |q|^{α-1}
        let lhs = g
            .iter()
            .zip(&q)
            .map(|(g, x)| (g + x).powi(2))
            .sum::<f64>()
            .sqrt();
        let rhs = alpha * spec.weight().at(t) * norm.powf(alpha - 1.0);
        assert!((lhs - rhs).abs() <= 1e-14 * (norm + rhs), "{lhs} vs {rhs}");
    }
}

#[test]
fn weights_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for w in weights() {
        // e^{-(t/σ)²} leaves the f64 range near |t| = 27σ.
        let reach = 25.0 * w.width().unwrap_or(1.0);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(-reach..reach);
            assert!(w.at(t) > 0.0, "{w:?} at {t}");
        }
    }
}

#[test]
fn closed_form_integrals_match_quadrature() {
    let g = GridSpec::with_spacing(40.0, 0.001, 1).unwrap();
    let t = g.times();
    for w in weights() {
        let a: Vec<f64> = t.iter().map(|&t| w.at(t)).collect();
        let a2: Vec<f64> = a.iter().map(|x| x * x).collect();
        let (mut l1, mut l2) = (g.trapezoid(&a), g.trapezoid(&a2));
        if w.family() == WeightFamily::Rational {
            // Tails beyond |t| = 40 are not negligible for 1/(1+t²).
            let c = w.amplitude();
            let big_t: f64 = 40.0;
            let rest = std::f64::consts::FRAC_PI_2 - big_t.atan();
            l1 += 2.0 * c * rest;
            l2 += c * c * (rest - big_t / (1.0 + big_t * big_t));
        }
        assert!(
            (l1 - w.l1()).abs() <= 1e-6 * w.l1(),
            "{w:?}: {l1} vs {}",
            w.l1()
        );
        assert!(
            (l2 - w.l2_sq()).abs() <= 1e-6 * w.l2_sq(),
            "{w:?}: {l2} vs {}",
            w.l2_sq()
        );
    }
}

#[test]
fn initial_guess_is_negative_everywhere() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let cfg = SolverConfig::default();
    for alpha in [1.1, 1.3, 1.5, 1.7, 1.9] {
        for w in weights().into_iter().take(3) {
            let spec = ProblemSpec::new(alpha, 1, w).unwrap();
            let q = initial_guess(&spec, &g, &cfg).unwrap();
            assert!(
                action(&q, &spec).unwrap().total < 0.0,
                "alpha {alpha} {w:?}"
            );
        }
    }
}
