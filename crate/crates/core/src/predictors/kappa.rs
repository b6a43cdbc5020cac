use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::pnorm_pi;

/// One step of length `d` with the principal curvatures met along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureStep {
    pub d: f64,
    pub kappas: Vec<f64>,
}

impl CurvatureStep {
    pub fn new(d: f64, kappas: Vec<f64>) -> Self {
        CurvatureStep { d, kappas }
    }
}

/// A sequence of steps, all with the same number of curvatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CurvatureStep>", into = "Vec<CurvatureStep>")]
pub struct CurvaturePath {
    steps: Vec<CurvatureStep>,
}

impl CurvaturePath {
    pub fn new(steps: Vec<CurvatureStep>) -> Result<Self> {
        let width = steps.first().map_or(0, |s| s.kappas.len());
        for (k, step) in steps.iter().enumerate() {
            if !(step.d.is_finite() && step.d >= 0.0) {
                return Err(Error::param(
                    "step length",
                    step.d,
                    "must be finite and >= 0",
                ));
            }
            if step.kappas.is_empty() {
                return Err(Error::invalid("curvatures", format!("step {k} has none")));
            }
            if step.kappas.len() != width {
                return Err(Error::DimensionMismatch {
                    left: width,
                    right: step.kappas.len(),
                });
            }
            for (l, &kappa) in step.kappas.iter().enumerate() {
                if !kappa.is_finite() {
                    return Err(Error::param("curvature", kappa, "must be finite"));
                }
                let w = 1.0 + step.d * kappa;
                if w == 0.0 {
                    return Err(Error::Singular { step: k, entry: l });
                }
                if w < 0.0 {
                    return Err(Error::invalid(
                        "curvatures",
                        format!("1 + d*kappa = {w} < 0 at step {k}, entry {l}"),
                    ));
                }
            }
        }
        Ok(CurvaturePath { steps })
    }

    pub fn steps(&self) -> &[CurvatureStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The step factors `v_ℓ = (1 + d κ_ℓ)⁻¹`, one vector per step.
    pub fn factors(&self) -> Vec<Vec<f64>> {
        self.steps
            .iter()
            .map(|s| s.kappas.iter().map(|k| 1.0 / (1.0 + s.d * k)).collect())
            .collect()
    }
}

impl TryFrom<Vec<CurvatureStep>> for CurvaturePath {
    type Error = Error;

    fn try_from(steps: Vec<CurvatureStep>) -> Result<Self> {
        CurvaturePath::new(steps)
    }
}

impl From<CurvaturePath> for Vec<CurvatureStep> {
    fn from(path: CurvaturePath) -> Self {
        path.steps
    }
}

/// `Π_k ‖v^(k)‖₂^(π)`.
pub fn kappa_norm_product(path: &CurvaturePath) -> Result<f64> {
    path.factors().iter().map(|v| pnorm_pi(v, 2.0)).product()
}

/// `Π_k ‖v^(k)‖₁^(π) / ‖v^(k)‖₂^(π)`, never above 1.
pub fn kappa_cosine_product(path: &CurvaturePath) -> Result<f64> {
    let mut total = 1.0;
    for v in path.factors() {
        let ratio = pnorm_pi(&v, 1.0)? / pnorm_pi(&v, 2.0)?;
        total *= ratio.min(1.0);
    }
    Ok(total)
}

/// The two-sided bounds on `‖v‖₁^(π)` and on `‖v‖₁^(π)/‖v‖₂^(π)` for
/// `v ∈ (0,1]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropositionBounds {
    /// `(‖v‖₂^(π))²`
    pub lower: f64,
    /// `‖v‖₁^(π)`
    pub value: f64,
    /// `((‖v‖₂^(π))² + 1)/2`
    pub upper: f64,
    /// `‖v‖₂^(π)`
    pub ratio_lower: f64,
    /// `(‖v‖₂^(π) + 1/‖v‖₂^(π))/2`
    pub ratio_upper: f64,
    /// `‖v‖₂^(π)`, kept for the ratio.
    pub norm2: f64,
}

impl PropositionBounds {
    pub fn ratio(&self) -> f64 {
        self.value / self.norm2
    }

    /// All inequalities, each allowed `tol` of relative slack.
    pub fn holds(&self, tol: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + tol * b.abs().max(1.0);
        let r = self.ratio();
        le(self.lower, self.value)
            && le(self.value, self.upper)
            && le(self.ratio_lower, r)
            && le(r, self.ratio_upper)
    }
}

pub fn pnorm_proposition_bounds(v: &[f64]) -> Result<PropositionBounds> {
    if v.is_empty() {
        return Err(Error::invalid("vector", "empty"));
    }
    if let Some(&x) = v.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::param("entry", x, "must lie in (0, 1]"));
    }
    let norm2 = pnorm_pi(v, 2.0)?;
    let lower = norm2 * norm2;
    Ok(PropositionBounds {
        lower,
        value: pnorm_pi(v, 1.0)?,
        upper: (lower + 1.0) / 2.0,
        ratio_lower: norm2,
        ratio_upper: (norm2 + 1.0 / norm2) / 2.0,
        norm2,
    })
}
