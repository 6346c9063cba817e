//! Direct minimization of the discrete action.
//!
//! The seed is the negative-action multiple `r* q₀` of a Gaussian bump, so
//! the descent can never fall back to the trivial critical point `q = 0`.
//! Steps follow the negative gradient, by default taken in the discrete H¹
//! inner product (the Riesz representative of `I'(q)`), with Armijo
//! backtracking on the interior node values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{norm_sq, GridSpec, Path};
use crate::functional::{optimal_scaling, ActionBreakdown, ActionEvaluator};
use crate::potential::ProblemSpec;
use crate::verifier::{decay_stats, el_residual, DecayStats, ResidualStats};

/// Smallest trial step before the line search gives up.
const MIN_STEP: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    ScaledBump,
    ScaledBumpPerturbed,
}

/// Inner product in which the steepest-descent direction is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentMetric {
    /// Discrete H¹ Gram matrix `h I + L/h` on interior nodes.
    Sobolev,
    /// Plain coordinate gradient.
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Threshold on the Euclidean norm of the discrete gradient.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub init_strategy: InitStrategy,
    pub perturb_scale: f64,
    pub seed: u64,
    pub metric: DescentMetric,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-9,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            init_strategy: InitStrategy::ScaledBump,
            perturb_scale: 0.05,
            seed: 0,
            metric: DescentMetric::Sobolev,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSolver(m));
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad(format!(
                "armijo_c must lie in (0, 1), got {}",
                self.armijo_c
            ));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            ));
        }
        if !(self.perturb_scale.is_finite() && self.perturb_scale >= 0.0) {
            return bad(format!(
                "perturb_scale must be non-negative, got {}",
                self.perturb_scale
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step down to `1e-20` satisfied the Armijo condition.
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub spec: ProblemSpec,
    pub grid: GridSpec,
    pub orbit: Path,
    pub action: ActionBreakdown,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Action of the starting path.
    pub witness_action: f64,
    /// Action after every accepted step, starting with the seed value.
    pub trace: Vec<f64>,
    pub residual: ResidualStats,
    pub decay: DecayStats,
}

/// Gaussian bump `e^{-t²/2} e₁` on the grid, boundary zeroed.
pub fn seed_bump(grid: &GridSpec) -> Path {
    Path::from_scalar(*grid, |t| (-0.5 * t * t).exp()).expect("bump is finite")
}

/// Starting path with negative action.
pub fn initial_guess(spec: &ProblemSpec, grid: &GridSpec, config: &SolverConfig) -> Result<Path> {
    Ok(initial_guess_with_witness(spec, grid, config)?.0)
}

fn initial_guess_with_witness(
    spec: &ProblemSpec,
    grid: &GridSpec,
    config: &SolverConfig,
) -> Result<(Path, f64)> {
    let mut q0 = seed_bump(grid);
    if config.init_strategy == InitStrategy::ScaledBumpPerturbed && config.perturb_scale > 0.0 {
        let n = grid.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut values = q0.into_values();
        for i in 1..grid.n_points() - 1 {
            let size = config.perturb_scale * values[i * n].abs();
            for k in 0..n {
                let xi: f64 = StandardNormal.sample(&mut rng);
                values[i * n + k] += size * xi;
            }
        }
        q0 = Path::from_values(*grid, values)?;
    }
    let w = optimal_scaling(&q0, spec)?;
    Ok((w.witness_path(&q0)?, w.witness_action))
}

/// `LDLᵀ` factors of the interior H¹ Gram matrix `h I + tridiag(-1, 2, -1)/h`.
#[derive(Clone, Debug)]
struct SobolevPreconditioner {
    off: f64,
    /// Pivots of the forward elimination.
    pivots: Vec<f64>,
}

impl SobolevPreconditioner {
    fn new(grid: &GridSpec) -> Self {
        let h = grid.spacing();
        let diag = h + 2.0 / h;
        let off = -1.0 / h;
        let m = grid.n_points() - 2;
        let mut pivots = Vec::with_capacity(m);
        pivots.push(diag);
        for i in 1..m {
            pivots.push(diag - off * off / pivots[i - 1]);
        }
        Self { off, pivots }
    }

    /// Solves `M x = rhs` for every component; boundary rows stay zero.
    fn solve_into(&self, rhs: &[f64], dim: usize, out: &mut [f64]) {
        let m = self.pivots.len();
        out.fill(0.0);
        for k in 0..dim {
            let at = |i: usize| (i + 1) * dim + k;
            // Forward: y_i = rhs_i - off * y_{i-1} / pivot_{i-1}.
            out[at(0)] = rhs[at(0)];
            for i in 1..m {
                out[at(i)] = rhs[at(i)] - self.off * out[at(i - 1)] / self.pivots[i - 1];
            }
            out[at(m - 1)] /= self.pivots[m - 1];
            for i in (0..m - 1).rev() {
                out[at(i)] = (out[at(i)] - self.off * out[at(i + 1)]) / self.pivots[i];
            }
        }
    }
}

/// Runs the descent from the negative-action seed.
pub fn minimize(spec: &ProblemSpec, grid: &GridSpec, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    ActionEvaluator::new(grid, spec)?;
    let (start, witness) = initial_guess_with_witness(spec, grid, config)?;
    descend(spec, start, witness, config)
}

/// Runs the descent from an arbitrary starting path. The starting action is
/// reported as `witness_action`.
pub fn minimize_from(
    spec: &ProblemSpec,
    start: Path,
    config: &SolverConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let witness = ActionEvaluator::new(start.grid(), spec)?
        .action(start.values())
        .total;
    descend(spec, start, witness, config)
}

fn descend(
    spec: &ProblemSpec,
    start: Path,
    witness_action: f64,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let grid = *start.grid();
    let n = grid.dim();
    let eval = ActionEvaluator::new(&grid, spec)?;
    let precond = match config.metric {
        DescentMetric::Sobolev => Some(SobolevPreconditioner::new(&grid)),
        DescentMetric::Euclidean => None,
    };

    let mut x = start.into_values();
    let mut grad = vec![0.0; x.len()];
    let mut dir = vec![0.0; x.len()];
    eval.gradient_into(&x, &mut grad);
    let mut grad_norm = norm_sq(&grad).sqrt();
    let mut value = eval.action(&x).total;
    let mut trace = vec![value];
    let mut step = 1.0;
    let mut iterations = 0;

    let stop_reason = loop {
        if grad_norm <= config.grad_tol {
            break StopReason::Converged;
        }
        if iterations >= config.max_iters {
            break StopReason::MaxIterations;
        }
        match &precond {
            Some(p) => p.solve_into(&grad, n, &mut dir),
            None => dir.copy_from_slice(&grad),
        }
        dir.iter_mut().for_each(|d| *d = -*d);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            break StopReason::LineSearchFailed;
        }

        let mut trial = (step / config.backtrack_factor).min(1.0);
        let delta = loop {
            let delta = eval.action_delta(&x, &dir, trial);
            if delta <= config.armijo_c * trial * slope {
                break Some(delta);
            }
            trial *= config.backtrack_factor;
            if trial < MIN_STEP {
                break None;
            }
        };
        let Some(delta) = delta else {
            break StopReason::LineSearchFailed;
        };
        debug_assert!(delta < 0.0);

        x.iter_mut()
            .zip(&dir)
            .for_each(|(xi, di)| *xi += trial * di);
        value += delta;
        trace.push(value);
        step = trial;
        iterations += 1;
        eval.gradient_into(&x, &mut grad);
        grad_norm = norm_sq(&grad).sqrt();
    };

    let orbit = normalize_orientation(&Path::from_values(grid, x)?)?;
    let action = eval.action(orbit.values());
    Ok(SolveReport {
        spec: *spec,
        grid,
        residual: el_residual(&orbit, spec)?,
        decay: decay_stats(&orbit)?,
        orbit,
        action,
        grad_norm,
        iterations,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        witness_action,
        trace,
    })
}

/// Solves on `[-T₀, T₀]`, then on `2T₀, 4T₀, …` with the same spacing, each
/// level warm-started from the previous orbit padded with zeros. Stops once
/// the action changes by less than `tol` or after `max_doublings` doublings.
pub fn refine_domain(
    spec: &ProblemSpec,
    config: &SolverConfig,
    base: &GridSpec,
    tol: f64,
    max_doublings: usize,
) -> Result<Vec<SolveReport>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidSolver(format!(
            "refinement tol must be positive, got {tol}"
        )));
    }
    let mut reports = vec![minimize(spec, base, config)?];
    for _ in 0..max_doublings {
        let prev = reports.last().expect("nonempty");
        if reports.len() >= 2 {
            let before = &reports[reports.len() - 2];
            if (prev.action.total - before.action.total).abs() < tol {
                break;
            }
        }
        let old = prev.grid;
        let grid = GridSpec::new(2.0 * old.half_length(), 2 * old.n_points() - 1, old.dim())?;
        let offset = (old.n_points() - 1) / 2 * old.dim();
        let mut values = vec![0.0; grid.n_points() * grid.dim()];
        values[offset..offset + prev.orbit.values().len()].copy_from_slice(prev.orbit.values());
        let start = Path::from_values(grid, values)?;
        config.validate()?;
        let (_, witness) = initial_guess_with_witness(spec, &grid, config)?;
        let report = descend(spec, start, witness, config)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Orthogonal change of coordinates taking the largest node to the positive
/// `e₁` axis (a rotation for `n ≥ 2`, a sign flip for `n = 1`). The action and
/// every verifier statistic are invariant under it.
pub fn normalize_orientation(path: &Path) -> Result<Path> {
    let n = path.dim();
    let peak = (0..path.n_points())
        .max_by(|&a, &b| norm_sq(path.node(a)).total_cmp(&norm_sq(path.node(b))))
        .expect("grid has nodes");
    let u = path.node(peak);
    let r = norm_sq(u).sqrt();
    if r == 0.0 || (u[0] > 0.0 && u[1..].iter().all(|&v| v == 0.0)) {
        return Ok(path.clone());
    }
    if n == 1 {
        return path.scaled(-1.0);
    }
    // Householder reflection u/|u| -> e₁, then reflect the last axis back.
    let mut v: Vec<f64> = u.iter().map(|x| x / r).collect();
    v[0] -= 1.0;
    let vv = norm_sq(&v);
    let mut out = path.values().to_vec();
    for node in out.chunks_exact_mut(n) {
        let c = 2.0 * node.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / vv;
        node.iter_mut().zip(&v).for_each(|(x, vk)| *x -= c * vk);
        node[n - 1] = -node[n - 1];
    }
    Path::from_values(*path.grid(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::action;
    use crate::potential::WeightProfile;

    fn spec(alpha: f64, dim: usize) -> ProblemSpec {
        ProblemSpec::new(alpha, dim, WeightProfile::gaussian(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn preconditioner_solves_gram_system() {
        let g = GridSpec::new(3.0, 31, 2).unwrap();
        let p = SobolevPreconditioner::new(&g);
        let rhs: Vec<f64> = (0..62)
            .map(|j| {
                if j < 2 || j >= 60 {
                    0.0
                } else {
                    (j as f64 * 0.37).sin()
                }
            })
            .collect();
        let mut x = vec![0.0; 62];
        p.solve_into(&rhs, 2, &mut x);
        let h = g.spacing();
        for i in 1..30 {
            for k in 0..2 {
                let j = i * 2 + k;
                let mx = (h + 2.0 / h) * x[j] - (x[j - 2] + x[j + 2]) / h;
                assert!((mx - rhs[j]).abs() < 1e-10, "row {i}: {mx} vs {}", rhs[j]);
            }
        }
    }

    #[test]
    fn initial_guess_has_negative_action() {
        let g = GridSpec::new(20.0, 4001, 1).unwrap();
        let s = spec(1.5, 1);
        let q = initial_guess(&s, &g, &SolverConfig::default()).unwrap();
        let a = action(&q, &s).unwrap().total;
        assert!((a + 0.1446).abs() < 1e-2, "{a}");
    }

    #[test]
    fn zero_perturbation_equals_plain_bump() {
        let g = GridSpec::new(10.0, 1001, 2).unwrap();
        let s = spec(1.5, 2);
        let plain = SolverConfig::default();
        let pert = SolverConfig {
            init_strategy: InitStrategy::ScaledBumpPerturbed,
            perturb_scale: 0.0,
            seed: 9,
            ..plain
        };
        assert_eq!(
            initial_guess(&s, &g, &plain).unwrap(),
            initial_guess(&s, &g, &pert).unwrap()
        );
    }

    #[test]
    fn zero_start_is_a_critical_point() {
        let g = GridSpec::new(10.0, 1001, 1).unwrap();
        let r = minimize_from(&spec(1.5, 1), Path::zeros(g), &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.action.total, 0.0);
    }

    #[test]
    fn small_solve_converges_and_descends() {
        let g = GridSpec::new(10.0, 501, 1).unwrap();
        let r = minimize(&spec(1.5, 1), &g, &SolverConfig::default()).unwrap();
        assert!(r.converged, "{:?} after {}", r.stop_reason, r.iterations);
        assert!(r.grad_norm <= 1e-9);
        assert!(r.action.total <= r.witness_action);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn euclidean_metric_descends() {
        let g = GridSpec::new(8.0, 161, 1).unwrap();
        let cfg = SolverConfig {
            metric: DescentMetric::Euclidean,
            max_iters: 200,
            ..SolverConfig::default()
        };
        let r = minimize(&spec(1.5, 1), &g, &cfg).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.action.total < r.witness_action);
    }

    #[test]
    fn invalid_solver_config() {
        let g = GridSpec::new(5.0, 51, 1).unwrap();
        for cfg in [
            SolverConfig {
                armijo_c: 1.0,
                ..Default::default()
            },
            SolverConfig {
                backtrack_factor: 0.0,
                ..Default::default()
            },
            SolverConfig {
                grad_tol: -1.0,
                ..Default::default()
            },
            SolverConfig {
                max_iters: 0,
                ..Default::default()
            },
        ] {
            assert!(minimize(&spec(1.5, 1), &g, &cfg).is_err());
        }
    }

    #[test]
    fn orientation_normalization() {
        let g = GridSpec::new(4.0, 41, 3).unwrap();
        let p = Path::from_fn(g, |t, o| {
            let b = (-t * t).exp();
            o[0] = -0.3 * b;
            o[1] = 0.5 * b;
            o[2] = 0.8 * b;
        })
        .unwrap();
        let q = normalize_orientation(&p).unwrap();
        let mid = q.node(g.mid_index());
        assert!(mid[0] > 0.0 && mid[1].abs() < 1e-15 && mid[2].abs() < 1e-15);
        for i in 0..g.n_points() {
            assert!((norm_sq(q.node(i)) - norm_sq(p.node(i))).abs() < 1e-14);
        }
        let s = ProblemSpec::new(1.4, 3, WeightProfile::rational(1.0).unwrap()).unwrap();
        let (a, b) = (action(&p, &s).unwrap(), action(&q, &s).unwrap());
        assert!((a.total - b.total).abs() < 1e-14);
    }
}
