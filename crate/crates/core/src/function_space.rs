//! Discretized H¹(ℝ, ℝⁿ) on a truncated uniform grid.
//!
//! The real line is replaced by `[-T, T]` with homogeneous Dirichlet values
//! at both ends. Zeroth-order integrals use the trapezoid rule; the
//! derivative term is the exact H¹ seminorm of the piecewise-linear
//! interpolant, i.e. a sum of squared forward differences.

use std::io::{BufRead, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedding constant obtained in the existence argument: `‖q‖∞ ≤ √π ‖q‖_{H¹}`.
pub const SQRT_PI_EMBEDDING_CONSTANT: f64 = 1.772_453_850_905_516;

/// Sharp constant for H¹(ℝ): `‖q‖∞ ≤ 2^{-1/2} ‖q‖_{H¹}`.
pub const SHARP_EMBEDDING_CONSTANT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Uniform grid on `[-T, T]` with an odd number of nodes, so `t = 0` is a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_length: f64,
    n_points: usize,
    dim: usize,
    spacing: f64,
}

impl GridSpec {
    pub fn new(half_length: f64, n_points: usize, dim: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be finite and positive, got {half_length}"
            )));
        }
        if n_points < 5 || n_points % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "number of points must be odd and at least 5, got {n_points}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        Ok(Self {
            half_length,
            n_points,
            dim,
            spacing: 2.0 * half_length / (n_points - 1) as f64,
        })
    }

    /// Grid with the requested spacing (rounded so that `2T/h` is an even
    /// integer and the point count is odd).
    pub fn with_spacing(half_length: f64, spacing: f64, dim: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be finite and positive, got {spacing}"
            )));
        }
        let half_cells = (half_length / spacing).round().max(2.0) as usize;
        Self::new(half_length, 2 * half_cells + 1, dim)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn mid_index(&self) -> usize {
        (self.n_points - 1) / 2
    }

    /// Same grid with a different target dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.half_length, self.n_points, dim)
    }

    /// Node time `t_i`. Computed symmetrically so that both endpoints and
    /// the midpoint are exact.
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        let m = (self.n_points - 1) as f64;
        (2.0 * i as f64 - m) * self.half_length / m
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }

    /// Trapezoid weight (without the factor `h`).
    #[inline]
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5
        } else {
            1.0
        }
    }

    /// Trapezoid rule for samples of a scalar function on this grid.
    pub fn trapezoid(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n_points);
        let inner: f64 = samples[1..self.n_points - 1].iter().sum();
        self.spacing * (inner + 0.5 * (samples[0] + samples[self.n_points - 1]))
    }
}

/// A candidate orbit sampled on a [`GridSpec`], with zero boundary values.
///
/// Values are stored row-major: node `i` occupies `values[i*n .. (i+1)*n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Path {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.n_points * grid.dim],
            grid,
        }
    }

    /// Wraps raw node values, rejecting wrong lengths, non-finite entries
    /// and nonzero boundary values.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let n = grid.dim;
        let expected = grid.n_points * n;
        if values.len() != expected {
            return Err(Error::InvalidPath(format!(
                "expected {expected} values ({} nodes x {n}), got {}",
                grid.n_points,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!(
                "non-finite value {} at node {} component {}",
                values[pos],
                pos / n,
                pos % n + 1
            )));
        }
        let last = (grid.n_points - 1) * n;
        if values[..n].iter().chain(&values[last..]).any(|&v| v != 0.0) {
            return Err(Error::InvalidPath(
                "boundary values must be zero (Dirichlet truncation)".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(t, out)` at every node; boundary nodes are forced to zero.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, &mut [f64])) -> Result<Self> {
        let n = grid.dim;
        let mut values = vec![0.0; grid.n_points * n];
        for i in 1..grid.n_points - 1 {
            f(grid.time(i), &mut values[i * n..(i + 1) * n]);
        }
        Self::from_values(grid, values)
    }

    /// Samples a scalar profile along the first coordinate direction.
    pub fn from_scalar(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |t, out| out[0] = f(t))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.grid.dim;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_values(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// Writes `t,q_1,...,q_n`, one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for k in 1..=self.dim() {
            write!(w, ",q_{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.n_points() {
            write!(w, "{:e}", self.grid.time(i))?;
            for v in self.node(i) {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`Path::write_csv`]. Extra columns that are
    /// not named `q_<k>` (e.g. velocities) are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty input".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") {
            return Err(Error::Csv(format!(
                "first column must be `t`, got {header:?}"
            )));
        }
        let q_cols: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| c.starts_with("q_"))
            .map(|(j, _)| j)
            .collect();
        for (k, &j) in q_cols.iter().enumerate() {
            if cols[j] != format!("q_{}", k + 1) {
                return Err(Error::Csv(format!("unexpected column {:?}", cols[j])));
            }
        }
        let dim = q_cols.len();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Csv(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: {e}: {s:?}", lineno + 2)))
            };
            times.push(parse(fields[0])?);
            for &j in &q_cols {
                values.push(parse(fields[j])?);
            }
        }
        let n_points = times.len();
        let half_length = *times
            .last()
            .ok_or_else(|| Error::Csv("no data rows".into()))?;
        let grid = GridSpec::new(half_length, n_points, dim)?;
        for (i, &t) in times.iter().enumerate() {
            if (t - grid.time(i)).abs() > 1e-9 * half_length.max(1.0) {
                return Err(Error::Csv(format!(
                    "row {} has t = {t}, expected uniform node {}",
                    i + 2,
                    grid.time(i)
                )));
            }
        }
        Path::from_values(grid, values)
    }
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
pub(crate) fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Discrete `‖q‖²_{H¹}`: trapezoid `∫|q|²` plus `Σ h |(q_{i+1}-q_i)/h|²`.
pub fn h1_norm_sq(path: &Path) -> f64 {
    h1_norm_sq_raw(path.grid(), path.values())
}

pub(crate) fn h1_norm_sq_raw(grid: &GridSpec, values: &[f64]) -> f64 {
    let n = grid.dim;
    let h = grid.spacing;
    let mut zeroth = 0.0;
    let mut first = 0.0;
    for i in 0..grid.n_points {
        let qi = &values[i * n..(i + 1) * n];
        zeroth += grid.trapezoid_weight(i) * norm_sq(qi);
        if i + 1 < grid.n_points {
            first += dist_sq(&values[(i + 1) * n..(i + 2) * n], qi);
        }
    }
    h * zeroth + first / h
}

/// `max_i |q_i|` with the Euclidean norm at each node.
pub fn sup_norm(path: &Path) -> f64 {
    (0..path.n_points())
        .map(|i| norm_sq(path.node(i)))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Ratio `‖q‖∞ / ‖q‖_{H¹}` against both embedding constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingCheck {
    pub sup: f64,
    pub h1_norm_sq: f64,
    pub ratio: f64,
    /// `ratio ≤ √π`.
    pub sqrt_pi_ok: bool,
    /// `ratio ≤ 2^{-1/2} + 10h`.
    pub sharp_ok: bool,
}

pub fn check_embedding(path: &Path) -> Result<EmbeddingCheck> {
    if path.is_zero() {
        return Err(Error::ZeroPath("embedding ratio undefined"));
    }
    let sup = sup_norm(path);
    let h1 = h1_norm_sq(path);
    let ratio = sup / h1.sqrt();
    Ok(EmbeddingCheck {
        sup,
        h1_norm_sq: h1,
        ratio,
        sqrt_pi_ok: ratio <= SQRT_PI_EMBEDDING_CONSTANT,
        sharp_ok: ratio <= SHARP_EMBEDDING_CONSTANT + 10.0 * path.grid().spacing(),
    })
}

/// `(q_{i+1} - 2q_i + q_{i-1}) / h²` at interior nodes, `(N-2) × n` row-major.
pub fn second_difference(path: &Path) -> Vec<f64> {
    let n = path.dim();
    let h2 = path.grid().spacing().powi(2);
    let v = path.values();
    (1..path.n_points() - 1)
        .flat_map(|i| {
            (0..n).map(move |k| (v[(i + 1) * n + k] - 2.0 * v[i * n + k] + v[(i - 1) * n + k]) / h2)
        })
        .collect()
}

/// Node velocities: central differences inside, one-sided at the ends.
pub fn central_velocity(path: &Path) -> Vec<f64> {
    let n = path.dim();
    let np = path.n_points();
    let h = path.grid().spacing();
    let v = path.values();
    let mut out = vec![0.0; np * n];
    for k in 0..n {
        out[k] = (v[n + k] - v[k]) / h;
        out[(np - 1) * n + k] = (v[(np - 1) * n + k] - v[(np - 2) * n + k]) / h;
    }
    for i in 1..np - 1 {
        for k in 0..n {
            out[i * n + k] = (v[(i + 1) * n + k] - v[(i - 1) * n + k]) / (2.0 * h);
        }
    }
    out
}

/// Discrete Plancherel comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlancherelCheck {
    pub time_l2_sq: f64,
    pub freq_l2_sq: f64,
    pub rel_err: f64,
}

/// Transforms each component with kernel `e^{-2πi s t}` sampled on the grid,
/// `q̂(s_k) = h Σ_j q_j e^{-2πi s_k t_j}` at `s_k = k/(N h)`, and compares
/// `Σ_k |q̂(s_k)|² Δs` with `h Σ_j |q_j|²`.
pub fn plancherel_check(path: &Path) -> PlancherelCheck {
    let n = path.dim();
    let np = path.n_points();
    let h = path.grid().spacing();
    let ds = 1.0 / (np as f64 * h);
    let time_l2_sq = h * norm_sq(path.values());

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(np);
    let mut buf = vec![Complex::new(0.0, 0.0); np];
    let mut freq_l2_sq = 0.0;
    for k in 0..n {
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(path.values()[j * n + k], 0.0);
        }
        fft.process(&mut buf);
        // The offset t_0 = -T only contributes a unimodular phase.
        freq_l2_sq += buf.iter().map(|z| (h * z).norm_sqr()).sum::<f64>() * ds;
    }
    let rel_err = (time_l2_sq - freq_l2_sq).abs() / time_l2_sq.max(f64::MIN_POSITIVE);
    PlancherelCheck {
        time_l2_sq,
        freq_l2_sq,
        rel_err: if time_l2_sq == 0.0 && freq_l2_sq == 0.0 {
            0.0
        } else {
            rel_err
        },
    }
}
