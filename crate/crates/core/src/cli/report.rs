//! `report.json` and `orbit.csv`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{central_velocity, Path};
use crate::functional::ActionBreakdown;
use crate::minimizer::{SolveReport, StopReason};
use crate::potential::WeightFamily;
use crate::verifier::{DecayStats, ResidualStats, Verdict};

/// JSON schema every `report.json` validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightJson {
    pub family: WeightFamily,
    pub amplitude: f64,
    pub width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecJson {
    pub alpha: f64,
    pub dim: usize,
    pub weight: WeightJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    #[serde(rename = "T")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub h: f64,
}

/// One domain-doubling level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    #[serde(rename = "T")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub action: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: SpecJson,
    pub grid: GridJson,
    pub action: ActionBreakdown,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub witness_action: f64,
    pub residual: ResidualStats,
    pub decay: DecayStats,
    pub stop_reason: StopReason,
    pub checks: Verdict,
    pub refinement: Vec<LevelJson>,
}

impl Report {
    /// Built from the last level of `levels`.
    pub fn new(levels: &[SolveReport], checks: Verdict) -> Self {
        let last = levels.last().expect("at least one refinement level");
        let w = last.spec.weight();
        Self {
            spec: SpecJson {
                alpha: last.spec.alpha(),
                dim: last.spec.dim(),
                weight: WeightJson {
                    family: w.family(),
                    amplitude: w.amplitude(),
                    width: w.width(),
                },
            },
            grid: GridJson {
                half_length: last.grid.half_length(),
                n_points: last.grid.n_points(),
                h: last.grid.spacing(),
            },
            action: last.action,
            grad_norm: last.grad_norm,
            iterations: last.iterations,
            converged: last.converged,
            witness_action: last.witness_action,
            residual: last.residual,
            decay: last.decay,
            stop_reason: last.stop_reason,
            checks,
            refinement: levels
                .iter()
                .map(|r| LevelJson {
                    half_length: r.grid.half_length(),
                    n_points: r.grid.n_points(),
                    action: r.action.total,
                    grad_norm: r.grad_norm,
                    iterations: r.iterations,
                    converged: r.converged,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid report: {e}")))
    }
}

/// Writes `t,q_1..q_n,qdot_1..qdot_n` with central-difference velocities.
pub fn write_orbit_csv<W: Write>(path: &Path, mut w: W) -> Result<()> {
    let n = path.dim();
    let mut header = String::from("t");
    for k in 1..=n {
        header.push_str(&format!(",q_{k}"));
    }
    for k in 1..=n {
        header.push_str(&format!(",qdot_{k}"));
    }
    writeln!(w, "{header}")?;
    let v = central_velocity(path);
    let grid = path.grid();
    for i in 0..path.n_points() {
        let mut line = format!("{:e}", grid.time(i));
        for x in path.node(i).iter().chain(&v[i * n..(i + 1) * n]) {
            line.push_str(&format!(",{x:e}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
