use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered step parameters of a chain: angles in radians, Euclidean step
/// lengths, or hyperbolic arcs depending on the geometry that consumes it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepSchedule(Vec<f64>);

impl StepSchedule {
    pub fn new(steps: Vec<f64>) -> Self {
        StepSchedule(steps)
    }

    /// Angles given in degrees, stored in radians.
    pub fn from_degrees(degrees: &[f64]) -> Self {
        StepSchedule(degrees.iter().map(|d| d.to_radians()).collect())
    }

    pub fn repeated(value: f64, count: usize) -> Self {
        StepSchedule(vec![value; count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    /// Repeats the pattern cyclically (or truncates it) to exactly `m` steps.
    pub fn cycled(&self, m: usize) -> Result<Self> {
        if self.0.is_empty() && m > 0 {
            return Err(Error::invalid(
                "schedule",
                "cannot extend an empty schedule",
            ));
        }
        Ok(StepSchedule(
            self.0.iter().copied().cycle().take(m).collect(),
        ))
    }

    /// Every step must be an angle in `[0, π]`.
    pub fn validate_angles(&self) -> Result<()> {
        for &t in &self.0 {
            if !(0.0..=PI).contains(&t) {
                return Err(Error::param("angle", t, "must lie in [0, pi] radians"));
            }
        }
        Ok(())
    }

    /// Every step must be a finite length `>= 0`.
    pub fn validate_lengths(&self) -> Result<()> {
        for &d in &self.0 {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::param("step length", d, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Every step must be a finite hyperbolic arc `>= 0`.
    pub fn validate_arcs(&self) -> Result<()> {
        for &x in &self.0 {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::param("hyperbolic arc", x, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

impl From<Vec<f64>> for StepSchedule {
    fn from(v: Vec<f64>) -> Self {
        StepSchedule(v)
    }
}

impl FromIterator<f64> for StepSchedule {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        StepSchedule(iter.into_iter().collect())
    }
}
