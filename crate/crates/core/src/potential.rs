//! Coefficient `a(t)` and the potential `V(t, q) = -½|q|² + a(t)|q|^α`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::norm_sq;

/// Below this norm `|q|^{α-2} q` is replaced by its continuous extension 0.
pub const ZERO_NORM_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightFamily {
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "sech2")]
    SechSquared,
    #[serde(rename = "rational")]
    Rational,
}

impl WeightFamily {
    pub const ALL: [WeightFamily; 3] = [
        WeightFamily::Gaussian,
        WeightFamily::SechSquared,
        WeightFamily::Rational,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WeightFamily::Gaussian => "gaussian",
            WeightFamily::SechSquared => "sech2",
            WeightFamily::Rational => "rational",
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(WeightFamily::Gaussian),
            "sech2" => Ok(WeightFamily::SechSquared),
            "rational" => Ok(WeightFamily::Rational),
            other => Err(Error::InvalidProblem(format!(
                "unknown weight family {other:?} (expected gaussian, sech2 or rational)"
            ))),
        }
    }
}

/// A continuous, strictly positive `a ∈ L¹ ∩ L²`.
///
/// * Gaussian: `c e^{-(t/σ)²}`
/// * SechSquared: `c sech²(t/σ)`
/// * Rational: `c / (1 + t²)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightProfile {
    family: WeightFamily,
    amplitude: f64,
    width: Option<f64>,
    l1: f64,
    l2_sq: f64,
}

impl WeightProfile {
    /// `width` is required for Gaussian and SechSquared and ignored for Rational.
    pub fn new(family: WeightFamily, amplitude: f64, width: Option<f64>) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "weight amplitude must be finite and positive, got {amplitude}"
            )));
        }
        let c = amplitude;
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let width_of = |w: Option<f64>| match w {
            Some(s) if s.is_finite() && s > 0.0 => Ok(s),
            Some(s) => Err(Error::InvalidProblem(format!(
                "weight width must be finite and positive, got {s}"
            ))),
            None => Err(Error::InvalidProblem(format!(
                "weight family {family} requires a width"
            ))),
        };
        let (width, l1, l2_sq) = match family {
            WeightFamily::Gaussian => {
                let s = width_of(width)?;
                (
                    Some(s),
                    c * s * sqrt_pi,
                    c * c * s * (std::f64::consts::PI / 2.0).sqrt(),
                )
            }
            WeightFamily::SechSquared => {
                let s = width_of(width)?;
                (Some(s), 2.0 * c * s, 4.0 / 3.0 * c * c * s)
            }
            WeightFamily::Rational => (
                None,
                c * std::f64::consts::PI,
                c * c * std::f64::consts::PI / 2.0,
            ),
        };
        Ok(Self {
            family,
            amplitude,
            width,
            l1,
            l2_sq,
        })
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        Self::new(WeightFamily::Gaussian, amplitude, Some(width))
    }

    pub fn sech_squared(amplitude: f64, width: f64) -> Result<Self> {
        Self::new(WeightFamily::SechSquared, amplitude, Some(width))
    }

    pub fn rational(amplitude: f64) -> Result<Self> {
        Self::new(WeightFamily::Rational, amplitude, None)
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> Option<f64> {
        self.width
    }

    /// Same family and width, different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.family, amplitude, self.width)
    }

    /// `a(t)`.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        match self.family {
            WeightFamily::Gaussian => {
                let x = t / self.width.unwrap_or(1.0);
                self.amplitude * (-x * x).exp()
            }
            WeightFamily::SechSquared => {
                // sech² x = 4e^{-2|x|} / (1 + e^{-2|x|})², finite for all x.
                let e = (-2.0 * (t / self.width.unwrap_or(1.0)).abs()).exp();
                self.amplitude * 4.0 * e / ((1.0 + e) * (1.0 + e))
            }
            WeightFamily::Rational => self.amplitude / (1.0 + t * t),
        }
    }

    /// `∫ a dt` in closed form.
    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// `∫ a² dt` in closed form.
    pub fn l2_sq(&self) -> f64 {
        self.l2_sq
    }
}

/// One instance of the subquadratic problem: exponent, dimension, weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    alpha: f64,
    dim: usize,
    weight: WeightProfile,
}

impl ProblemSpec {
    pub fn new(alpha: f64, dim: usize, weight: WeightProfile) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidProblem(format!(
                "alpha must satisfy the hypothesis 1 < alpha < 2, got {alpha}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidProblem("dimension must be at least 1".into()));
        }
        Ok(Self { alpha, dim, weight })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> &WeightProfile {
        &self.weight
    }

    pub fn with_weight(&self, weight: WeightProfile) -> Self {
        Self { weight, ..*self }
    }

    /// `V(t, q) = -½|q|² + a(t)|q|^α`.
    pub fn potential_value(&self, t: f64, q: &[f64]) -> f64 {
        let r2 = norm_sq(q);
        -0.5 * r2 + self.weight.at(t) * r2.sqrt().powf(self.alpha)
    }

    /// `V_q(t, q) = -q + α a(t) |q|^{α-2} q`, extended by zero at `q = 0`.
    pub fn potential_gradient(&self, t: f64, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; q.len()];
        self.potential_gradient_into(t, q, &mut out);
        out
    }

    pub fn potential_gradient_into(&self, t: f64, q: &[f64], out: &mut [f64]) {
        let s = self.weight.at(t) * nonlinear_factor(self.alpha, norm_sq(q));
        for (o, &x) in out.iter_mut().zip(q) {
            *o = -x + s * x;
        }
    }
}

/// `α |q|^{α-2}` from `|q|²`, zero below [`ZERO_NORM_FLOOR`].
#[inline]
pub(crate) fn nonlinear_factor(alpha: f64, r2: f64) -> f64 {
    let r = r2.sqrt();
    if r < ZERO_NORM_FLOOR {
        0.0
    } else {
        alpha * r.powf(alpha - 2.0)
    }
}
