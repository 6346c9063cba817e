//! Seeded families of boundary-zero test paths.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::function_space::{GridSpec, Path};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Independent normal values at interior nodes.
    WhiteNoise,
    /// Sum of a few Gaussian bumps with random centers and widths.
    Bumps,
    /// A single interior node.
    Spike,
    /// `sin(ωt + φ)` under a smooth envelope.
    Oscillation,
    /// Smooth profile that is largest right next to the boundary.
    EdgeHugging,
}

impl PathKind {
    pub const ALL: [PathKind; 5] = [
        PathKind::WhiteNoise,
        PathKind::Bumps,
        PathKind::Spike,
        PathKind::Oscillation,
        PathKind::EdgeHugging,
    ];
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Random nonzero path of the given kind, scaled by `10^u`, `u ∈ [-3, 2]`.
pub fn random_path_of<R: Rng>(grid: &GridSpec, kind: PathKind, rng: &mut R) -> Path {
    let n = grid.dim();
    let np = grid.n_points();
    let big_t = grid.half_length();
    let mut values = vec![0.0; np * n];
    match kind {
        PathKind::WhiteNoise => {
            for x in &mut values[n..(np - 1) * n] {
                *x = normal(rng);
            }
        }
        PathKind::Bumps => {
            let count = rng.random_range(1..=4);
            for _ in 0..count {
                let center = rng.random_range(-0.8..0.8) * big_t;
                let width = rng.random_range(0.2..3.0f64).min(big_t / 2.0);
                let amp: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
                for i in 1..np - 1 {
                    let z = (grid.time(i) - center) / width;
                    let b = (-0.5 * z * z).exp();
                    for k in 0..n {
                        values[i * n + k] += amp[k] * b;
                    }
                }
            }
        }
        PathKind::Spike => {
            let i = rng.random_range(1..np - 1);
            for k in 0..n {
                values[i * n + k] = normal(rng);
            }
        }
        PathKind::Oscillation => {
            let omega = rng.random_range(0.5..20.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            for i in 1..np - 1 {
                let t = grid.time(i);
                let env = (1.0 - (t / big_t).powi(2)).max(0.0);
                for k in 0..n {
                    values[i * n + k] = env * (omega * t + phase + k as f64).sin();
                }
            }
        }
        PathKind::EdgeHugging => {
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let width = rng.random_range(0.05..1.0f64);
            for i in 1..np - 1 {
                let t = grid.time(i);
                let d = big_t - side * t;
                let b = (d / width) * (-d / width).exp();
                for k in 0..n {
                    values[i * n + k] = if k == 0 { b } else { 0.3 * b };
                }
            }
        }
    }
    if values.iter().all(|&v| v == 0.0) {
        values[grid.mid_index() * n] = 1.0;
    }
    let scale = 10f64.powf(rng.random_range(-3.0..2.0));
    values.iter_mut().for_each(|v| *v *= scale);
    Path::from_values(*grid, values).expect("finite boundary-zero sample")
}

/// Random nonzero path, kind chosen uniformly.
pub fn random_path<R: Rng>(grid: &GridSpec, rng: &mut R) -> Path {
    let kind = PathKind::ALL[rng.random_range(0..PathKind::ALL.len())];
    random_path_of(grid, kind, rng)
}

/// Smooth random path without near-zero interior nodes away from the ends:
/// a positive bump profile along a random unit direction.
pub fn random_smooth_path<R: Rng>(grid: &GridSpec, rng: &mut R) -> Path {
    let n = grid.dim();
    let mut dir: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|x| *x /= len);
    let width = rng.random_range(0.5..2.0);
    let center = rng.random_range(-1.0..1.0);
    let amp = rng.random_range(0.2..3.0);
    Path::from_fn(*grid, |t, out| {
        let z = (t - center) / width;
        let b = amp * (-0.5 * z * z).exp();
        out.iter_mut().zip(&dir).for_each(|(o, d)| *o = b * d);
    })
    .expect("finite sample")
}

/// Copy of `path` with one interior node overwritten by `10` in every component.
pub fn corrupted_orbit(path: &Path) -> Path {
    let n = path.dim();
    let i = path.grid().mid_index() + path.n_points() / 8;
    let mut values = path.values().to_vec();
    values[i * n..(i + 1) * n].fill(10.0);
    Path::from_values(*path.grid(), values).expect("interior node")
}
