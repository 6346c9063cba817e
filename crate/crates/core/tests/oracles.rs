use std::f64::consts::PI;

use homoclinic::sampling::random_path;
use homoclinic::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `Σ_k |Σ_j h q_j e^{-2πi s_k t_j}|² Δs` by direct summation.
fn brute_force_freq_l2(path: &Path) -> f64 {
    let g = path.grid();
    let (np, n, h) = (g.n_points(), g.dim(), g.spacing());
    let ds = 1.0 / (np as f64 * h);
    let mut total = 0.0;
    for k in 0..np {
        let s = (k as f64 - (np / 2) as f64) * ds;
        for c in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..np {
                let phase = -2.0 * PI * s * g.time(j);
                let q = path.node(j)[c];
                re += h * q * phase.cos();
                im += h * q * phase.sin();
            }
            total += (re * re + im * im) * ds;
        }
    }
    total
}

#[test]
fn fft_plancherel_matches_direct_transform() {
    let g = GridSpec::new(3.0, 121, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let p = random_path(&g, &mut rng);
        let check = plancherel_check(&p);
        let oracle = brute_force_freq_l2(&p);
        assert!(
            (check.freq_l2_sq - oracle).abs() <= 1e-10 * oracle,
            "{} vs {oracle}",
            check.freq_l2_sq
        );
        assert!(check.rel_err < 1e-10);
    }
}

#[test]
fn gaussian_closed_forms() {
    let g = GridSpec::new(20.0, 4001, 1).unwrap();
    let q0 = Path::from_scalar(g, |t| (-0.5 * t * t).exp()).unwrap();
    let sqrt_pi = PI.sqrt();
    // ∫e^{-t²} = √π, ∫t² e^{-t²} = √π/2.
    assert!((h1_norm_sq(&q0) - 1.5 * sqrt_pi).abs() < 1e-4);
    let spec = ProblemSpec::new(1.5, 1, WeightProfile::gaussian(1.0, 1.0).unwrap()).unwrap();
    let a = action(&q0, &spec).unwrap();
    // ∫e^{-t²} e^{-3t²/4} = √(4π/7).
    let expect = 0.75 * sqrt_pi - (4.0 * PI / 7.0).sqrt();
    assert!((a.total - expect).abs() < 5e-4, "{} vs {expect}", a.total);
    let w = optimal_scaling(&q0, &spec).unwrap();
    let big_a = 1.5 * sqrt_pi;
    let big_b = (4.0 * PI / 7.0).sqrt();
    let r = (1.5 * big_b / big_a).powi(2);
    assert!((w.h1_sq - big_a).abs() < 1e-3);
    assert!((w.weight_term - big_b).abs() < 1e-3);
    assert!((w.r_star - r).abs() < 1e-3);
    assert!((w.witness_action - big_a * r * r * (0.5 - 1.0 / 1.5)).abs() < 1e-3);
}
