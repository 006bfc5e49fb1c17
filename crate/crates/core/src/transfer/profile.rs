use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature::{integrate_pieces, QuadOptions};

/// A radial, compactly supported, piecewise-linear profile
/// `φ(z) = f(|z|)`, with `f` interpolating `(knots[i], values[i])` and
/// vanishing from the last knot on.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    name: String,
    knots: Vec<f64>,
    values: Vec<f64>,
    critical: Vec<f64>,
}

/// `"tent"` or `{"custom": {"knots": [...], "values": [...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSpec {
    Tent,
    Custom { knots: Vec<f64>, values: Vec<f64> },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Tent
    }
}

impl ProfileSpec {
    pub fn build(&self) -> Result<RadialProfile> {
        match self {
            ProfileSpec::Tent => Ok(RadialProfile::tent()),
            ProfileSpec::Custom { knots, values } => RadialProfile::piecewise_linear(knots.clone(), values.clone()),
        }
    }
}

impl RadialProfile {
    /// `max(0, 1 − |z|)`.
    pub fn tent() -> Self {
        let mut p = Self::piecewise_linear(vec![0.0, 1.0], vec![1.0, 0.0]).expect("valid");
        p.name = "tent".into();
        p
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(LabError::Shape {
                expected: knots.len(),
                actual: values.len(),
            });
        }
        if knots.len() < 2 || knots[0] != 0.0 {
            return Err(LabError::InvalidInput("profile knots must start at 0 and have length ≥ 2".into()));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(LabError::InvalidInput("profile knots and values must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidInput("profile knots must be strictly increasing".into()));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(LabError::InvalidInput("profile must vanish at its last knot".into()));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(LabError::InvalidInput("profile is identically zero".into()));
        }
        let mut critical = knots.clone();
        for i in 0..knots.len() - 1 {
            let (a, b) = (values[i], values[i + 1]);
            if a * b < 0.0 {
                critical.push(knots[i] + (knots[i + 1] - knots[i]) * a / (a - b));
            }
        }
        critical.sort_by(f64::total_cmp);
        Ok(Self {
            name: "custom".into(),
            knots,
            values,
            critical,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Knots together with sign changes of the profile.
    pub fn critical_radii(&self) -> &[f64] {
        &self.critical
    }

    /// Support radius `R`.
    pub fn radius(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Lipschitz constant `K`.
    pub fn lipschitz(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]).abs() / (k[1] - k[0]))
            .fold(0.0, f64::max)
    }

    /// `M = sup |φ|`.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Lebesgue measure `S` of the support disk.
    pub fn support_measure(&self) -> f64 {
        std::f64::consts::PI * self.radius().powi(2)
    }

    /// `f(r)` for `r ≥ 0`.
    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        let k = &self.knots;
        if r >= k[k.len() - 1] {
            return 0.0;
        }
        // Profiles have a handful of knots; a linear scan beats bisection.
        let mut i = 0;
        while r > k[i + 1] {
            i += 1;
        }
        let t = (r - k[i]) / (k[i + 1] - k[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    /// `f(rho) − f(r)` given `delta = rho − r` computed independently, so
    /// that the difference keeps relative accuracy when `rho ≈ r`.
    #[inline]
    pub fn increment(&self, r: f64, rho: f64, delta: f64) -> f64 {
        let k = &self.knots;
        let last = k[k.len() - 1];
        if r >= last && rho >= last {
            return 0.0;
        }
        let (lo, hi) = if r <= rho { (r, rho) } else { (rho, r) };
        if hi < last {
            let mut i = 0;
            while lo > k[i + 1] {
                i += 1;
            }
            if hi <= k[i + 1] {
                return delta * (self.values[i + 1] - self.values[i]) / (k[i + 1] - k[i]);
            }
        }
        // Straddling knots: integrate the slope over [r, r + delta], with
        // knot positions taken relative to r so nothing cancels.
        let (a, b) = if delta < 0.0 { (delta, 0.0) } else { (0.0, delta) };
        let mut sum = 0.0;
        for i in 0..k.len() - 1 {
            let len = (b.min(k[i + 1] - r) - a.max(k[i] - r)).max(0.0);
            if len > 0.0 {
                sum += len * (self.values[i + 1] - self.values[i]) / (k[i + 1] - k[i]);
            }
        }
        if delta < 0.0 {
            -sum
        } else {
            sum
        }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.radial(z.norm())
    }

    /// `s·φ`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let mut p = Self::piecewise_linear(self.knots.clone(), self.values.iter().map(|v| v * s).collect())?;
        p.name = format!("{}*{s}", self.name);
        Ok(p)
    }

    /// `z ↦ φ(z / t)`.
    pub fn dilated(&self, t: f64) -> Result<Self> {
        let mut p = Self::piecewise_linear(self.knots.iter().map(|k| k * t).collect(), self.values.clone())?;
        p.name = format!("{}(z/{t})", self.name);
        Ok(p)
    }

    /// `‖φ‖_q^q = 2π ∫₀^R r |f(r)|^q dr`.
    pub fn power_integral(&self, q: f64) -> Result<f64> {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_intervals: 2000,
            smooth_endpoints: true,
        };
        let r = integrate_pieces(|r| r * self.radial(r).abs().powf(q), &self.critical, &opts)?;
        Ok(std::f64::consts::TAU * r.value)
    }
}
