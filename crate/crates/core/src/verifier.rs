//! Checks that a computed orbit solves `q̈ + V_q(t, q) = 0` and satisfies
//! the decay and residual inequalities that force `q(±∞) = 0`, `q̇(±∞) = 0`.
//!
//! Every inequality carries an explicit grid-slack term.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{central_velocity, dist_sq, norm_sq, second_difference, Path};
use crate::functional::{action, action_gradient};
use crate::potential::ProblemSpec;

/// Floor below which tail values are not used in the rate fit.
pub const TAIL_FLOOR: f64 = 1e-14;
const TAIL_MIN_NODES: usize = 10;

/// Fraction of nodes on each side treated as the endpoint band.
const ENDPOINT_FRACTION: f64 = 0.05;
/// Fraction of nodes on each side treated as the tail.
const TAIL_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub l2: f64,
    pub linf: f64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayStats {
    pub endpoint_q: f64,
    pub endpoint_qdot: f64,
    pub window_bound_ok: bool,
    /// `None` when the tail is below [`TAIL_FLOOR`].
    pub tail_rate: Option<f64>,
}

fn check_dim(path: &Path, spec: &ProblemSpec) -> Result<()> {
    if path.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            path: path.dim(),
            problem: spec.dim(),
        });
    }
    Ok(())
}

/// `R_i = (q_{i+1} - 2q_i + q_{i-1})/h² + V_q(t_i, q_i)` at interior nodes.
pub fn residual_field(path: &Path, spec: &ProblemSpec) -> Result<Vec<f64>> {
    check_dim(path, spec)?;
    let n = path.dim();
    let mut r = second_difference(path);
    let mut vq = vec![0.0; n];
    for (j, row) in r.chunks_exact_mut(n).enumerate() {
        let i = j + 1;
        spec.potential_gradient_into(path.grid().time(i), path.node(i), &mut vq);
        row.iter_mut().zip(&vq).for_each(|(a, b)| *a += b);
    }
    Ok(r)
}

pub fn el_residual(path: &Path, spec: &ProblemSpec) -> Result<ResidualStats> {
    let r = residual_field(path, spec)?;
    let h = path.grid().spacing();
    let mut sum = 0.0;
    let mut linf: f64 = 0.0;
    for row in r.chunks_exact(path.dim()) {
        let s = norm_sq(row);
        sum += h * s;
        linf = linf.max(s.sqrt());
    }
    Ok(ResidualStats {
        l2: sum.sqrt(),
        linf,
        h,
    })
}

/// One evaluated node of the window inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowMargin {
    pub t: f64,
    /// `|q(t)|`.
    pub lhs: f64,
    /// `2 [∫_{t-½}^{t+½} (|q̇|² + |q|²)]^{1/2}`.
    pub rhs: f64,
}

impl WindowMargin {
    pub fn margin(&self, slack: f64) -> f64 {
        self.rhs + slack - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowDecayCheck {
    pub holds: bool,
    pub slack: f64,
    pub margins: Vec<WindowMargin>,
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of node samples.
fn integrate_linear(samples: &[f64], t0: f64, h: f64, a: f64, b: f64) -> f64 {
    let last = (samples.len() - 1) as f64;
    let xa = ((a - t0) / h).clamp(0.0, last);
    let xb = ((b - t0) / h).clamp(0.0, last);
    let (ja, jb) = (
        xa.floor() as usize,
        (xb.ceil() as usize).min(samples.len() - 1),
    );
    let mut total = 0.0;
    for j in ja..jb {
        let lo = xa.max(j as f64);
        let hi = xb.min((j + 1) as f64);
        if hi <= lo {
            continue;
        }
        let at = |x: f64| samples[j] + (x - j as f64) * (samples[j + 1] - samples[j]);
        total += h * (hi - lo) * 0.5 * (at(lo) + at(hi));
    }
    total
}

/// `|q(t)| ≤ 2 [∫_{t-½}^{t+½} (|q̇|² + |q|²) ds]^{1/2}` at every node with
/// `t ∈ [-T+½, T-½]`, with additive slack `10h²`.
pub fn window_decay_check(path: &Path) -> Result<WindowDecayCheck> {
    let grid = path.grid();
    let big_t = grid.half_length();
    if big_t < 1.0 {
        return Err(Error::DomainTooSmall(big_t));
    }
    let h = grid.spacing();
    let n = path.dim();
    let vel = central_velocity(path);
    let density: Vec<f64> = (0..path.n_points())
        .map(|i| norm_sq(&vel[i * n..(i + 1) * n]) + norm_sq(path.node(i)))
        .collect();
    let slack = 10.0 * h * h;
    let edge = big_t - 0.5 + 1e-9 * big_t;
    let margins: Vec<WindowMargin> = (0..path.n_points())
        .filter_map(|i| {
            let t = grid.time(i);
            if t.abs() > edge {
                return None;
            }
            let energy = integrate_linear(&density, -big_t, h, t - 0.5, t + 0.5);
            Some(WindowMargin {
                t,
                lhs: norm_sq(path.node(i)).sqrt(),
                rhs: 2.0 * energy.sqrt(),
            })
        })
        .collect();
    Ok(WindowDecayCheck {
        holds: margins.iter().all(|m| m.margin(slack) >= 0.0),
        slack,
        margins,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QdotBoundCheck {
    pub holds: bool,
    /// Smallest `rhs + slack - |q̈|²` over interior nodes.
    pub worst_margin: f64,
    pub worst_t: f64,
}

/// `|q̈|² ≤ 2(|q|² + α² a² |q|^{2(α-1)})` at interior nodes with `q̈` the
/// second difference. `residual_allowance` is the equation residual `ε`
/// tolerated for an accepted orbit; the slack is `2ε(|q̈| + ε)`.
pub fn qdot_residual_bound_check(
    path: &Path,
    spec: &ProblemSpec,
    residual_allowance: f64,
) -> Result<QdotBoundCheck> {
    check_dim(path, spec)?;
    let n = path.dim();
    let alpha = spec.alpha();
    let eps = residual_allowance.max(0.0);
    let d2 = second_difference(path);
    let mut worst = QdotBoundCheck {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_t: 0.0,
    };
    for (j, row) in d2.chunks_exact(n).enumerate() {
        let i = j + 1;
        let t = path.grid().time(i);
        let acc2 = norm_sq(row);
        let r2 = norm_sq(path.node(i));
        let a = spec.weight().at(t);
        let rhs = 2.0 * (r2 + alpha * alpha * a * a * r2.powf(alpha - 1.0));
        let slack = 2.0 * eps * (acc2.sqrt() + eps);
        let margin = rhs + slack - acc2;
        if margin < worst.worst_margin {
            worst.worst_margin = margin;
            worst.worst_t = t;
        }
    }
    worst.holds = worst.worst_margin >= 0.0;
    Ok(worst)
}

/// Least-squares fit of `log|q|` against `|t|` on both tails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    /// Mean fitted slope over the sides with enough nodes.
    pub rate: f64,
    /// Worst coefficient of determination over the fitted sides.
    pub r_squared: f64,
    /// `|slope(inner half) - slope(outer half)| / |rate|`, worst side.
    pub drift: f64,
    /// `drift ≤ 0.1` and `r_squared ≥ 0.999`.
    pub exponential: bool,
    pub nodes_used: usize,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

/// Fits the decay rate on the outer 25% of nodes on each side, excluding
/// the outer 5% boundary band and values at or below [`TAIL_FLOOR`].
pub fn tail_rate(path: &Path) -> Result<TailFit> {
    let np = path.n_points();
    let grid = path.grid();
    let tail = ((np as f64) * TAIL_FRACTION).floor() as usize;
    let band = ((np as f64) * ENDPOINT_FRACTION).ceil() as usize;
    let sides = [
        (np - tail..np - band).collect::<Vec<_>>(),
        (band..tail).collect::<Vec<_>>(),
    ];
    let mut slopes = Vec::new();
    let mut r2_min: f64 = 1.0;
    let mut drift_max: f64 = 0.0;
    let mut used = 0;
    for idx in &sides {
        let (xs, ys): (Vec<f64>, Vec<f64>) = idx
            .iter()
            .filter_map(|&i| {
                let r = norm_sq(path.node(i)).sqrt();
                (r > TAIL_FLOOR).then(|| (grid.time(i).abs(), r.ln()))
            })
            .unzip();
        if xs.len() < TAIL_MIN_NODES {
            continue;
        }
        let (slope, r2) = linear_fit(&xs, &ys);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let half = order.len() / 2;
        let pick =
            |ix: &[usize]| -> (Vec<f64>, Vec<f64>) { ix.iter().map(|&k| (xs[k], ys[k])).unzip() };
        let (x1, y1) = pick(&order[..half]);
        let (x2, y2) = pick(&order[half..]);
        let (s1, _) = linear_fit(&x1, &y1);
        let (s2, _) = linear_fit(&x2, &y2);
        drift_max = drift_max.max((s1 - s2).abs() / slope.abs());
        r2_min = r2_min.min(r2);
        slopes.push(slope);
        used += xs.len();
    }
    if slopes.is_empty() {
        return Err(Error::TailBelowFloor {
            floor: TAIL_FLOOR,
            min_nodes: TAIL_MIN_NODES,
        });
    }
    let rate = slopes.iter().sum::<f64>() / slopes.len() as f64;
    Ok(TailFit {
        rate,
        r_squared: r2_min,
        drift: drift_max,
        exponential: drift_max <= 0.1 && r2_min >= 0.999,
        nodes_used: used,
    })
}

/// Largest `|q|` and `|q̇|` in the outer 5% of nodes on either side, the
/// window bound, and the tail rate.
pub fn decay_stats(path: &Path) -> Result<DecayStats> {
    let np = path.n_points();
    let n = path.dim();
    let band = ((np as f64) * ENDPOINT_FRACTION).ceil() as usize;
    let vel = central_velocity(path);
    let outer = (0..band).chain(np - band..np);
    let (mut eq, mut ev): (f64, f64) = (0.0, 0.0);
    for i in outer {
        eq = eq.max(norm_sq(path.node(i)).sqrt());
        ev = ev.max(norm_sq(&vel[i * n..(i + 1) * n]).sqrt());
    }
    let window_bound_ok = match window_decay_check(path) {
        Ok(w) => w.holds,
        Err(Error::DomainTooSmall(_)) => false,
        Err(e) => return Err(e),
    };
    let tail_rate = match tail_rate(path) {
        Ok(fit) => Some(fit.rate),
        Err(Error::TailBelowFloor { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DecayStats {
        endpoint_q: eq,
        endpoint_qdot: ev,
        window_bound_ok,
        tail_rate,
    })
}

/// Worst relative mismatch between central differences of the action and
/// the analytic directional derivative, over 20 seeded unit directions.
pub fn gradient_fd_check(path: &Path, spec: &ProblemSpec, eps: f64) -> Result<f64> {
    gradient_fd_check_with(path, spec, eps, 20, 0)
}

pub fn gradient_fd_check_with(
    path: &Path,
    spec: &ProblemSpec,
    eps: f64,
    directions: usize,
    seed: u64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidSolver(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let grad = action_gradient(path, spec)?;
    let n = path.dim();
    let np = path.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let mut v = vec![0.0; np * n];
        for x in &mut v[n..(np - 1) * n] {
            *x = StandardNormal.sample(&mut rng);
        }
        let len = norm_sq(&v).sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        let shifted = |s: f64| -> Result<f64> {
            let vals = path
                .values()
                .iter()
                .zip(&v)
                .map(|(q, d)| q + s * d)
                .collect();
            Ok(action(&Path::from_values(*path.grid(), vals)?, spec)?.total)
        };
        let fd = (shifted(eps)? - shifted(-eps)?) / (2.0 * eps);
        let exact: f64 = grad.iter().zip(&v).map(|(g, d)| g * d).sum();
        worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
    }
    Ok(worst)
}

/// Grid L² distance between `coarse` and `fine` at the coarse nodes. The
/// fine grid must cover the same interval with a spacing that divides the
/// coarse one.
pub fn grid_l2_distance(coarse: &Path, fine: &Path) -> Result<f64> {
    let (gc, gf) = (coarse.grid(), fine.grid());
    let same_interval = (gc.half_length() - gf.half_length()).abs() <= 1e-12 * gc.half_length();
    let cells_c = gc.n_points() - 1;
    let cells_f = gf.n_points() - 1;
    if !same_interval || gc.dim() != gf.dim() || cells_f % cells_c != 0 {
        return Err(Error::InvalidGrid(
            "reference grid must refine the coarse grid on the same interval".into(),
        ));
    }
    let ratio = cells_f / cells_c;
    let sum: f64 = (0..gc.n_points())
        .map(|i| dist_sq(coarse.node(i), fine.node(i * ratio)))
        .sum();
    Ok((gc.spacing() * sum).sqrt())
}

/// Pass/fail flags used to accept a converged solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// `linf · h ≤ 10 · grad_tol`.
    pub residual_ok: bool,
    pub window_bound_ok: bool,
    pub qdot_bound_ok: bool,
}

impl Verdict {
    pub fn all_pass(&self) -> bool {
        self.residual_ok && self.window_bound_ok && self.qdot_bound_ok
    }
}

/// Residual allowed for an orbit solved to gradient norm `grad_tol`.
pub fn residual_allowance(grad_tol: f64, h: f64) -> f64 {
    10.0 * grad_tol / h
}

pub fn verify(path: &Path, spec: &ProblemSpec, grad_tol: f64) -> Result<Verdict> {
    let h = path.grid().spacing();
    let allowance = residual_allowance(grad_tol, h);
    let residual = el_residual(path, spec)?;
    let window_bound_ok = match window_decay_check(path) {
        Ok(w) => w.holds,
        Err(Error::DomainTooSmall(_)) => false,
        Err(e) => return Err(e),
    };
    Ok(Verdict {
        residual_ok: residual.linf <= allowance,
        window_bound_ok,
        qdot_bound_ok: qdot_residual_bound_check(path, spec, allowance)?.holds,
    })
}
