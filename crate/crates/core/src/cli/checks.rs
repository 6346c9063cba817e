//! Seeded property batteries behind `homoclinic check`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{
    check_embedding, h1_norm_sq, plancherel_check, GridSpec, Path, SHARP_EMBEDDING_CONSTANT,
    SQRT_PI_EMBEDDING_CONSTANT,
};
use crate::functional::{action, action_gradient, coercivity_bound, optimal_scaling};
use crate::potential::ProblemSpec;
use crate::sampling::{random_path, random_smooth_path};
use crate::verifier::gradient_fd_check_with;

/// Directional-derivative and witness batteries use this many samples.
pub const PAIRS: usize = 100;
pub const FD_EPS: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const PLANCHEREL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Embedding,
    Gradient,
    Coercivity,
    Scaling,
    Plancherel,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Embedding,
        Suite::Gradient,
        Suite::Coercivity,
        Suite::Scaling,
        Suite::Plancherel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Embedding => "embedding",
            Suite::Gradient => "gradient",
            Suite::Coercivity => "coercivity",
            Suite::Scaling => "scaling",
            Suite::Plancherel => "plancherel",
        }
    }

    fn stream(&self) -> u64 {
        *self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub rows: Vec<CheckRow>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Runs one battery on `grid` with `samples` random paths where the battery
/// is sample-driven. The random stream depends only on `seed` and the suite.
pub fn run_suite(
    suite: Suite,
    spec: &ProblemSpec,
    grid: &GridSpec,
    samples: usize,
    seed: u64,
) -> Result<SuiteOutcome> {
    let grid = grid.with_dim(spec.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.stream());
    let rows = match suite {
        Suite::Embedding => embedding(&grid, samples, &mut rng)?,
        Suite::Gradient => gradient(spec, &grid, &mut rng, seed)?,
        Suite::Coercivity => coercivity(spec, &grid, samples, &mut rng)?,
        Suite::Scaling => scaling(spec, &grid, &mut rng)?,
        Suite::Plancherel => plancherel(&grid, samples, &mut rng),
    };
    Ok(SuiteOutcome { suite, rows })
}

fn embedding(grid: &GridSpec, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<CheckRow>> {
    let mut max_ratio: f64 = 0.0;
    let (mut loose, mut sharp) = (0, 0);
    for _ in 0..samples {
        let e = check_embedding(&random_path(grid, rng))?;
        max_ratio = max_ratio.max(e.ratio);
        loose += usize::from(!e.sqrt_pi_ok);
        sharp += usize::from(!e.sharp_ok);
    }
    let constants = format!(
        "max ratio {max_ratio:.6} over {samples} paths; sqrt(pi) = {SQRT_PI_EMBEDDING_CONSTANT:.6}, 2^(-1/2) = {SHARP_EMBEDDING_CONSTANT:.6}"
    );
    Ok(vec![
        CheckRow::new(
            "ratio <= sqrt(pi)",
            loose == 0,
            format!("{loose} violations; {constants}"),
        ),
        CheckRow::new(
            "ratio <= 2^(-1/2) + 10h",
            sharp == 0,
            format!("{sharp} violations, slack {:.3e}", 10.0 * grid.spacing()),
        ),
    ])
}

fn gradient(
    spec: &ProblemSpec,
    grid: &GridSpec,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<Vec<CheckRow>> {
    let mut worst_fd: f64 = 0.0;
    for k in 0..PAIRS {
        let q = random_smooth_path(grid, rng);
        let dir_seed = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(k as u64);
        worst_fd = worst_fd.max(gradient_fd_check_with(&q, spec, FD_EPS, 1, dir_seed)?);
    }
    let mut worst_euler: f64 = 0.0;
    for _ in 0..PAIRS {
        let q = random_path(grid, rng);
        let a = action(&q, spec)?;
        let g = action_gradient(&q, spec)?;
        let lhs: f64 = g.iter().zip(q.values()).map(|(g, q)| g * q).sum();
        let rhs = 2.0 * a.i1 - spec.alpha() * a.i2;
        worst_euler = worst_euler.max(rel(lhs, rhs));
    }
    Ok(vec![
        CheckRow::new(
            "central differences",
            worst_fd < FD_TOL,
            format!("worst rel err {worst_fd:.3e} over {PAIRS} pairs at eps {FD_EPS:e}"),
        ),
        CheckRow::new(
            "<grad I(q), q> = 2 I1 - alpha I2",
            worst_euler < IDENTITY_TOL,
            format!("worst rel err {worst_euler:.3e} over {PAIRS} paths"),
        ),
    ])
}

fn coercivity(
    spec: &ProblemSpec,
    grid: &GridSpec,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckRow>> {
    let b = coercivity_bound(spec);
    let stationary = b.phi_prime(b.x_star).abs() / b.x_star;
    let closed = b.x_star * b.x_star * (0.5 - 1.0 / spec.alpha());
    let identity = rel(b.phi_min, closed);
    let threshold = b.growth_threshold();
    let (mut below_phi, mut below_min, mut below_growth, mut growth_tested) = (0, 0, 0, 0);
    let mut worst_gap = f64::INFINITY;
    for _ in 0..samples {
        let q = random_path(grid, rng);
        let norm = h1_norm_sq(&q).sqrt();
        let total = action(&q, spec)?.total;
        let lower = b.phi(norm);
        worst_gap = worst_gap.min(total - lower);
        below_phi += usize::from(total < lower);
        below_min += usize::from(total < b.phi_min);
        let far = q.scaled(2.0 * threshold / norm)?;
        for p in [&q, &far] {
            let x2 = h1_norm_sq(p);
            if x2.sqrt() >= threshold {
                growth_tested += 1;
                below_growth += usize::from(action(p, spec)?.total < 0.25 * x2);
            }
        }
    }
    Ok(vec![
        CheckRow::new(
            "phi'(x*) = 0",
            stationary < IDENTITY_TOL,
            format!("|phi'(x*)|/x* = {stationary:.3e}, x* = {:.6}", b.x_star),
        ),
        CheckRow::new(
            "phi(x*) = x*^2 (1/2 - 1/alpha)",
            identity < IDENTITY_TOL,
            format!("phi(x*) = {:.6}, rel err {identity:.3e}", b.phi_min),
        ),
        CheckRow::new(
            "I(q) >= phi(|q|)",
            below_phi == 0,
            format!("{below_phi} violations over {samples} paths, min gap {worst_gap:.3e}"),
        ),
        CheckRow::new(
            "I(q) >= phi(x*)",
            below_min == 0,
            format!("{below_min} violations over {samples} paths"),
        ),
        CheckRow::new(
            "I(q) >= |q|^2/4 beyond threshold",
            below_growth == 0 && growth_tested > 0,
            format!(
                "{below_growth} violations over {growth_tested} paths, threshold {threshold:.6}"
            ),
        ),
    ])
}

fn scaling(spec: &ProblemSpec, grid: &GridSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckRow>> {
    let (mut positive, mut worst_value, mut worst_invariance, mut worst_r) =
        (0, 0.0f64, 0.0f64, 0.0f64);
    let alphas = [1.1, 1.5, 1.9];
    for _ in 0..PAIRS {
        let q0 = random_smooth_path(grid, rng);
        let doubled = q0.scaled(2.0)?;
        for alpha in alphas {
            let s = ProblemSpec::new(alpha, spec.dim(), *spec.weight())?;
            let w = optimal_scaling(&q0, &s)?;
            positive += usize::from(!(w.witness_action < 0.0));
            let direct = action(&w.witness_path(&q0)?, &s)?.total;
            worst_value = worst_value.max(rel(direct, w.witness_action));
            let w2 = optimal_scaling(&doubled, &s)?;
            worst_invariance = worst_invariance.max(rel(w2.witness_action, w.witness_action));
            worst_r = worst_r.max(rel(w2.r_star, 0.5 * w.r_star));
        }
    }
    let cases = PAIRS * alphas.len();
    Ok(vec![
        CheckRow::new(
            "witness action < 0",
            positive == 0,
            format!("{positive} non-negative over {cases} (path, alpha) cases"),
        ),
        CheckRow::new(
            "witness = I(r* q0)",
            worst_value < IDENTITY_TOL,
            format!("worst rel err {worst_value:.3e}"),
        ),
        CheckRow::new(
            "q0 -> 2 q0 leaves r* q0 unchanged",
            worst_invariance < IDENTITY_TOL && worst_r < IDENTITY_TOL,
            format!("witness rel err {worst_invariance:.3e}, r* ratio rel err {worst_r:.3e}"),
        ),
    ])
}

fn plancherel(grid: &GridSpec, samples: usize, rng: &mut ChaCha8Rng) -> Vec<CheckRow> {
    let mut worst: f64 = plancherel_check(&Path::zeros(*grid)).rel_err;
    for _ in 0..samples {
        worst = worst.max(plancherel_check(&random_path(grid, rng)).rel_err);
    }
    vec![CheckRow::new(
        "time and frequency L2 norms agree",
        worst < PLANCHEREL_TOL,
        format!("worst rel err {worst:.3e} over {samples} paths"),
    )]
}
