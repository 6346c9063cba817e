use homoclinic::verifier::grid_l2_distance;
use homoclinic::*;

fn gauss() -> WeightProfile {
    WeightProfile::gaussian(1.0, 1.0).unwrap()
}

fn spec(alpha: f64, n: usize, w: WeightProfile) -> ProblemSpec {
    ProblemSpec::new(alpha, n, w).unwrap()
}

#[test]
fn converged_reports_satisfy_invariants() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let cfg = SolverConfig::default();
    for w in [
        gauss(),
        WeightProfile::sech_squared(1.0, 1.0).unwrap(),
        WeightProfile::rational(1.0).unwrap(),
    ] {
        for alpha in [1.1, 1.5, 1.9] {
            let r = minimize(&spec(alpha, 1, w), &g, &cfg).unwrap();
            assert!(r.converged && r.grad_norm <= cfg.grad_tol);
            assert!(r.action.total < 0.0 && r.action.total <= r.witness_action);
            assert!(sup_norm(&r.orbit) > 1e-3);
            assert!(
                r.trace.windows(2).all(|p| p[1] <= p[0]),
                "non-monotone trace"
            );
            assert!(verify(&r.orbit, &r.spec, cfg.grad_tol).unwrap().all_pass());
        }
    }
}

#[test]
fn regression_value_gaussian_one_and_a_half() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let r = minimize(&spec(1.5, 1, gauss()), &g, &SolverConfig::default()).unwrap();
    assert!(
        (r.action.total - -0.158_739_900_9).abs() < 1e-9,
        "{}",
        r.action.total
    );
    assert!(r.action.total <= -0.1446);
}

#[test]
fn identical_inputs_give_identical_reports() {
    let g = GridSpec::new(10.0, 1001, 2).unwrap();
    let cfg = SolverConfig {
        init_strategy: InitStrategy::ScaledBumpPerturbed,
        seed: 42,
        ..SolverConfig::default()
    };
    let s = spec(1.3, 2, gauss());
    let a = minimize(&s, &g, &cfg).unwrap();
    let b = minimize(&s, &g, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn perturbation_seeds_reach_the_same_value() {
    let g = GridSpec::new(20.0, 4001, 2).unwrap();
    let s = spec(1.5, 2, gauss());
    let mut values = Vec::new();
    let mut orbits = Vec::new();
    for seed in 0..10 {
        let cfg = SolverConfig {
            init_strategy: InitStrategy::ScaledBumpPerturbed,
            seed,
            ..SolverConfig::default()
        };
        let r = minimize(&s, &g, &cfg).unwrap();
        assert!(r.converged);
        values.push(r.action.total);
        orbits.push(r.orbit);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo < 1e-6, "spread {}", hi - lo);
    // After orientation normalization the orbits coincide too.
    for o in &orbits[1..] {
        let d = o
            .values()
            .iter()
            .zip(orbits[0].values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-4, "orbit spread {d}");
    }
}

#[test]
fn zero_start_is_a_trivial_critical_point() {
    let g = GridSpec::new(10.0, 1001, 1).unwrap();
    let r = minimize_from(
        &spec(1.5, 1, gauss()),
        Path::zeros(g),
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.action.total, 0.0);
}

#[test]
fn max_iters_one_does_not_converge() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let cfg = SolverConfig {
        max_iters: 1,
        ..SolverConfig::default()
    };
    let r = minimize(&spec(1.5, 1, gauss()), &g, &cfg).unwrap();
    assert!(!r.converged);
    assert_eq!(r.stop_reason, StopReason::MaxIterations);
    assert!(r.action.total <= r.witness_action);
}

fn gaussian_refinement() -> Vec<SolveReport> {
    let base = GridSpec::new(10.0, 1001, 1).unwrap();
    refine_domain(
        &spec(1.5, 1, gauss()),
        &SolverConfig::default(),
        &base,
        1e-8,
        2,
    )
    .unwrap()
}

#[test]
fn refinement_deltas_shrink() {
    let levels = gaussian_refinement();
    assert!(levels.len() >= 2 && levels.last().unwrap().grid.half_length() <= 40.0);
    let deltas: Vec<f64> = levels
        .windows(2)
        .map(|p| (p[1].action.total - p[0].action.total).abs())
        .collect();
    assert!(deltas.windows(2).all(|d| d[1] < d[0]), "{deltas:?}");
    let last = levels.last().unwrap();
    assert!(last.decay.endpoint_q <= 1e-6 && last.decay.endpoint_qdot <= 1e-6);
}

#[test]
fn orbit_stabilizes_between_last_two_refinements() {
    let levels = gaussian_refinement();
    let (a, b) = (&levels[levels.len() - 2], levels.last().unwrap());
    let offset = (b.grid.n_points() - a.grid.n_points()) / 2;
    let sup = (0..a.grid.n_points())
        .map(|i| (a.orbit.node(i)[0] - b.orbit.node(i + offset)[0]).abs())
        .fold(0.0, f64::max);
    assert!(
        sup < 1e-6,
        "sup change {sup} between T = {} and T = {}",
        a.grid.half_length(),
        b.grid.half_length()
    );
}

#[test]
fn slow_tails_need_a_longer_domain() {
    let base = GridSpec::new(5.0, 501, 1).unwrap();
    let cfg = SolverConfig::default();
    let final_t = |w| {
        let levels = refine_domain(&spec(1.5, 1, w), &cfg, &base, 1e-8, 5).unwrap();
        levels.last().unwrap().grid.half_length()
    };
    let g = final_t(gauss());
    let r = final_t(WeightProfile::rational(1.0).unwrap());
    assert!(r > g, "rational {r} vs gaussian {g}");
}

#[test]
fn minimized_action_scales_with_amplitude() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let cfg = SolverConfig {
        grad_tol: 1e-12,
        ..SolverConfig::default()
    };
    for alpha in [1.3, 1.5, 1.7] {
        let base = minimize(&spec(alpha, 1, gauss()), &g, &cfg)
            .unwrap()
            .action
            .total;
        for c in [0.5, 2.0] {
            let w = WeightProfile::gaussian(c, 1.0).unwrap();
            let got = minimize(&spec(alpha, 1, w), &g, &cfg).unwrap().action.total;
            let expect = c.powf(2.0 / (2.0 - alpha)) * base;
            assert!(
                (got - expect).abs() <= 1e-6 * expect.abs(),
                "alpha {alpha} c {c}: {got} vs {expect}"
            );
        }
    }
}

#[test]
fn residual_converges_at_second_order() {
    let s = spec(1.5, 1, gauss());
    let cfg = SolverConfig {
        grad_tol: 1e-12,
        ..SolverConfig::default()
    };
    let solve = |h: f64| {
        minimize(&s, &GridSpec::with_spacing(20.0, h, 1).unwrap(), &cfg)
            .unwrap()
            .orbit
    };
    let reference = solve(0.005);
    let e1 = grid_l2_distance(&solve(0.04), &reference).unwrap();
    let e2 = grid_l2_distance(&solve(0.02), &reference).unwrap();
    let ratio = e1 / e2;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio} ({e1} vs {e2})");
}

#[test]
fn two_dimensional_orbit_lies_on_first_axis() {
    let g = GridSpec::new(20.0, 4001, 2).unwrap();
    let cfg = SolverConfig {
        init_strategy: InitStrategy::ScaledBumpPerturbed,
        seed: 3,
        ..SolverConfig::default()
    };
    let r = minimize(&spec(1.5, 2, gauss()), &g, &cfg).unwrap();
    let mid = r.orbit.node(g.mid_index());
    assert!(mid[0] > 0.0);
    let off = (0..g.n_points())
        .map(|i| r.orbit.node(i)[1].abs())
        .fold(0.0, f64::max);
    assert!(off < 1e-4 * sup_norm(&r.orbit), "off-axis {off}");
}
