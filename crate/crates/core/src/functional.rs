//! The action `I(q) = ½∫(|q|² + |q̇|²) - ∫ a(t)|q|^α`, its exact discrete
//! gradient, and the closed-form bounds derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{
    dist_sq, h1_norm_sq, norm_sq, GridSpec, Path, SQRT_PI_EMBEDDING_CONSTANT,
};
use crate::potential::{nonlinear_factor, ProblemSpec};

/// `I = I₁ - I₂` split into its quadratic and weight parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionBreakdown {
    pub i1: f64,
    pub i2: f64,
    pub total: f64,
}

fn check_dim(grid: &GridSpec, spec: &ProblemSpec) -> Result<()> {
    if grid.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            path: grid.dim(),
            problem: spec.dim(),
        });
    }
    Ok(())
}

/// Discrete action on a fixed grid with the weight samples cached.
#[derive(Clone, Debug)]
pub(crate) struct ActionEvaluator {
    grid: GridSpec,
    alpha: f64,
    /// `h w_i` (trapezoid).
    quad: Vec<f64>,
    /// `h w_i a(t_i)`.
    weighted: Vec<f64>,
}

impl ActionEvaluator {
    pub(crate) fn new(grid: &GridSpec, spec: &ProblemSpec) -> Result<Self> {
        check_dim(grid, spec)?;
        let h = grid.spacing();
        let quad: Vec<f64> = (0..grid.n_points())
            .map(|i| h * grid.trapezoid_weight(i))
            .collect();
        let weighted = quad
            .iter()
            .enumerate()
            .map(|(i, w)| w * spec.weight().at(grid.time(i)))
            .collect();
        Ok(Self {
            grid: *grid,
            alpha: spec.alpha(),
            quad,
            weighted,
        })
    }

    pub(crate) fn action(&self, values: &[f64]) -> ActionBreakdown {
        let n = self.grid.dim();
        let h = self.grid.spacing();
        let (mut zeroth, mut first, mut i2) = (0.0, 0.0, 0.0);
        for i in 0..self.grid.n_points() {
            let qi = &values[i * n..(i + 1) * n];
            let r2 = norm_sq(qi);
            zeroth += self.quad[i] * r2;
            if r2 > 0.0 {
                i2 += self.weighted[i] * r2.sqrt().powf(self.alpha);
            }
            if i + 1 < self.grid.n_points() {
                first += dist_sq(&values[(i + 1) * n..(i + 2) * n], qi);
            }
        }
        let i1 = 0.5 * (zeroth + first / h);
        ActionBreakdown {
            i1,
            i2,
            total: i1 - i2,
        }
    }

    /// Gradient with respect to all node values; boundary rows are zero.
    pub(crate) fn gradient_into(&self, values: &[f64], out: &mut [f64]) {
        let n = self.grid.dim();
        let np = self.grid.n_points();
        let inv_h = 1.0 / self.grid.spacing();
        out[..n].fill(0.0);
        out[(np - 1) * n..].fill(0.0);
        for i in 1..np - 1 {
            let qi = &values[i * n..(i + 1) * n];
            let s = self.weighted[i] * nonlinear_factor(self.alpha, norm_sq(qi));
            for k in 0..n {
                let j = i * n + k;
                let lap = values[j + n] - 2.0 * values[j] + values[j - n];
                out[j] = self.quad[i] * values[j] - s * values[j] - lap * inv_h;
            }
        }
    }

    /// `I(q + s d) - I(q)` evaluated term by term so that tiny decreases are
    /// not lost to cancellation against `I(q)`.
    pub(crate) fn action_delta(&self, values: &[f64], dir: &[f64], step: f64) -> f64 {
        let n = self.grid.dim();
        let np = self.grid.n_points();
        let inv_h = 1.0 / self.grid.spacing();
        let alpha = self.alpha;
        let mut quad_part = 0.0;
        let mut grad_part = 0.0;
        let mut weight_part = 0.0;
        for i in 0..np {
            let (q, d) = (&values[i * n..(i + 1) * n], &dir[i * n..(i + 1) * n]);
            let qd: f64 = q.iter().zip(d).map(|(a, b)| a * b).sum();
            let dd = norm_sq(d);
            // |q + s d|² - |q|²
            let change = step * (2.0 * qd + step * dd);
            quad_part += self.quad[i] * 0.5 * change;

            let r2 = norm_sq(q);
            let w = self.weighted[i];
            if w > 0.0 {
                let diff = if r2 > 0.0 {
                    let rel = change / r2;
                    if rel <= -1.0 {
                        -r2.sqrt().powf(alpha)
                    } else {
                        r2.sqrt().powf(alpha) * ((0.5 * alpha) * rel.ln_1p()).exp_m1()
                    }
                } else if change > 0.0 {
                    change.sqrt().powf(alpha)
                } else {
                    0.0
                };
                weight_part += w * diff;
            }

            if i + 1 < np {
                let mut dot = 0.0;
                let mut dd2 = 0.0;
                for k in 0..n {
                    let dq = values[(i + 1) * n + k] - values[i * n + k];
                    let ddir = dir[(i + 1) * n + k] - dir[i * n + k];
                    dot += dq * ddir;
                    dd2 += ddir * ddir;
                }
                grad_part += 0.5 * inv_h * step * (2.0 * dot + step * dd2);
            }
        }
        quad_part + grad_part - weight_part
    }
}

/// `I(q)` on the path's grid.
pub fn action(path: &Path, spec: &ProblemSpec) -> Result<ActionBreakdown> {
    Ok(ActionEvaluator::new(path.grid(), spec)?.action(path.values()))
}

/// Exact gradient of the discrete action with respect to node values,
/// row-major `N × n`, zero at the two boundary nodes:
/// `g_i = h w_i (q_i - α a(t_i)|q_i|^{α-2} q_i) - (q_{i+1} - 2q_i + q_{i-1})/h`.
pub fn action_gradient(path: &Path, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let eval = ActionEvaluator::new(path.grid(), spec)?;
    let mut g = vec![0.0; path.values().len()];
    eval.gradient_into(path.values(), &mut g);
    Ok(g)
}

/// Lower bound `φ(x) = ½x² - C x^α` for `I(q)` in terms of `x = ‖q‖_{H¹}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoercivityBound {
    pub alpha: f64,
    /// `C = κ^α ∫a`, with `κ` the embedding constant used.
    pub c_const: f64,
    /// Minimizer of `φ`: `(Cα)^{1/(2-α)}`.
    pub x_star: f64,
    pub phi_min: f64,
}

impl CoercivityBound {
    pub fn with_embedding_constant(spec: &ProblemSpec, kappa: f64) -> Self {
        let alpha = spec.alpha();
        let c_const = kappa.powf(alpha) * spec.weight().l1();
        let x_star = (c_const * alpha).powf(1.0 / (2.0 - alpha));
        let phi_min = 0.5 * x_star * x_star - c_const * x_star.powf(alpha);
        Self {
            alpha,
            c_const,
            x_star,
            phi_min,
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        0.5 * x * x - self.c_const * x.powf(self.alpha)
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        x - self.c_const * self.alpha * x.powf(self.alpha - 1.0)
    }

    /// Beyond this norm `φ(x) ≥ x²/4`.
    pub fn growth_threshold(&self) -> f64 {
        (4.0 * self.c_const).powf(1.0 / (2.0 - self.alpha))
    }
}

/// The bound with embedding constant `√π`, i.e. `C = π^{α/2} ∫a`.
pub fn coercivity_bound(spec: &ProblemSpec) -> CoercivityBound {
    CoercivityBound::with_embedding_constant(spec, SQRT_PI_EMBEDDING_CONSTANT)
}

/// The same bound with the sharp constant `2^{-α/2}`.
pub fn sharp_coercivity_bound(spec: &ProblemSpec) -> CoercivityBound {
    CoercivityBound::with_embedding_constant(spec, crate::function_space::SHARP_EMBEDDING_CONSTANT)
}

/// Best multiple `r* q₀` of a fixed direction and its (negative) action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingWitness {
    /// `A = ‖q₀‖²_{H¹}`.
    pub h1_sq: f64,
    /// `B = ∫ a |q₀|^α`.
    pub weight_term: f64,
    pub r_star: f64,
    pub witness_action: f64,
}

impl ScalingWitness {
    pub fn witness_path(&self, q0: &Path) -> Result<Path> {
        q0.scaled(self.r_star)
    }
}

/// `I(r q₀) = ½r²A - r^α B` is minimized at `r* = (αB/A)^{1/(2-α)}` with
/// value `A r*² (½ - 1/α) < 0`.
pub fn optimal_scaling(q0: &Path, spec: &ProblemSpec) -> Result<ScalingWitness> {
    if q0.is_zero() {
        return Err(Error::ZeroPath("optimal scaling undefined"));
    }
    let alpha = spec.alpha();
    let a = h1_norm_sq(q0);
    let b = action(q0, spec)?.i2;
    let r_star = (alpha * b / a).powf(1.0 / (2.0 - alpha));
    Ok(ScalingWitness {
        h1_sq: a,
        weight_term: b,
        r_star,
        witness_action: a * r_star * r_star * (0.5 - 1.0 / alpha),
    })
}
