//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! alpha = 1.5
//! dim = 1
//!
//! [weight]
//! family = "gaussian"
//! amplitude = 1.0
//! width = 1.0
//!
//! [grid]
//! half_length = 20.0
//! n_points = 4001
//! ```
//!
//! Every block and key is optional; unknown keys are rejected.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::checks::Suite;
use crate::error::{Error, Result};
use crate::function_space::GridSpec;
use crate::minimizer::SolverConfig;
use crate::potential::{ProblemSpec, WeightFamily, WeightProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemBlock {
    pub alpha: f64,
    pub dim: usize,
}

impl Default for ProblemBlock {
    fn default() -> Self {
        Self { alpha: 1.5, dim: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightBlock {
    pub family: WeightFamily,
    pub amplitude: f64,
    /// Ignored by the rational family.
    pub width: f64,
}

impl Default for WeightBlock {
    fn default() -> Self {
        Self {
            family: WeightFamily::Gaussian,
            amplitude: 1.0,
            width: 1.0,
        }
    }
}

impl WeightBlock {
    pub fn profile(&self, family: WeightFamily, amplitude: f64) -> Result<WeightProfile> {
        let width = match family {
            WeightFamily::Rational => None,
            _ => Some(self.width),
        };
        WeightProfile::new(family, amplitude, width)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    #[serde(alias = "T")]
    pub half_length: f64,
    #[serde(alias = "N")]
    pub n_points: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            half_length: 20.0,
            n_points: 4001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineBlock {
    /// Stop doubling once the action changes by less than this.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for RefineBlock {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_doublings: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// Write `orbit.csv` next to each `report.json`.
    pub write_orbit: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            write_orbit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub alphas: Vec<f64>,
    pub families: Vec<WeightFamily>,
    pub amplitudes: Vec<f64>,
    pub workers: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            alphas: vec![1.1, 1.5, 1.9],
            families: WeightFamily::ALL.to_vec(),
            amplitudes: vec![1.0],
            workers: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckBlock {
    pub suites: Vec<Suite>,
    /// Number of random paths per randomized battery.
    pub samples: usize,
}

impl Default for CheckBlock {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    pub weight: WeightBlock,
    pub grid: GridBlock,
    pub solver: SolverConfig,
    pub refine: RefineBlock,
    pub output: OutputBlock,
    pub sweep: SweepBlock,
    pub check: CheckBlock,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let weight = self
            .weight
            .profile(self.weight.family, self.weight.amplitude)?;
        ProblemSpec::new(self.problem.alpha, self.problem.dim, weight)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.half_length, self.grid.n_points, self.problem.dim)
    }

    /// Checks every range used by `solve`.
    pub fn validate(&self) -> Result<()> {
        self.problem_spec()?;
        self.grid_spec()?;
        self.solver.validate()?;
        if self.solver.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed must be at most {}", i64::MAX)));
        }
        if !(self.refine.tol > 0.0) {
            return Err(Error::Config(format!(
                "refine.tol must be positive, got {}",
                self.refine.tol
            )));
        }
        Ok(())
    }

    /// Checks the sweep block in addition to [`RunConfig::validate`].
    pub fn validate_sweep(&self) -> Result<()> {
        self.validate()?;
        let s = &self.sweep;
        if s.alphas.is_empty() {
            return Err(Error::Config("sweep.alphas must not be empty".into()));
        }
        if s.families.is_empty() {
            return Err(Error::Config("sweep.families must not be empty".into()));
        }
        if s.amplitudes.is_empty() {
            return Err(Error::Config("sweep.amplitudes must not be empty".into()));
        }
        if s.workers == 0 {
            return Err(Error::Config("sweep.workers must be at least 1".into()));
        }
        for &alpha in &s.alphas {
            for &family in &s.families {
                for &amp in &s.amplitudes {
                    let w = self.weight.profile(family, amp)?;
                    ProblemSpec::new(alpha, self.problem.dim, w)?;
                }
            }
        }
        Ok(())
    }

    pub fn validate_check(&self) -> Result<()> {
        self.validate()?;
        if self.check.suites.is_empty() {
            return Err(Error::Config("check.suites must not be empty".into()));
        }
        if self.check.samples == 0 {
            return Err(Error::Config("check.samples must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate_sweep().unwrap();
        c.validate_check().unwrap();
        assert_eq!(c.grid_spec().unwrap().spacing(), 0.01);
    }

    #[test]
    fn parses_partial_file() {
        let c = RunConfig::from_toml_str(
            "[problem]\nalpha = 1.3\n[weight]\nfamily = \"sech2\"\n[grid]\nT = 10.0\nN = 1001\n",
        )
        .unwrap();
        assert_eq!(c.problem.alpha, 1.3);
        assert_eq!(c.weight.family, WeightFamily::SechSquared);
        assert_eq!(c.grid.n_points, 1001);
        assert_eq!(c.solver, SolverConfig::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::from_toml_str("[problem]\nbeta = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        assert!(RunConfig::from_toml_str("[solver]\nlbfgs = true\n").is_err());
        assert!(RunConfig::from_toml_str("[nope]\n").is_err());
    }

    #[test]
    fn rejects_out_of_range_values() {
        let c = RunConfig::from_toml_str("[problem]\nalpha = 2.5\n").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("1 < alpha < 2"), "{msg}");
        let c = RunConfig::from_toml_str("[grid]\nn_points = 4000\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml_str("[grid]\nhalf_length = -1.0\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml_str("[sweep]\nalphas = []\n").unwrap();
        assert!(c.validate().is_ok());
        assert!(c.validate_sweep().is_err());
        let c = RunConfig::from_toml_str("[sweep]\nalphas = [1.5, 2.0]\n").unwrap();
        assert!(c.validate_sweep().is_err());
    }

    #[test]
    fn round_trip_default() {
        let c = RunConfig::default();
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }
}
