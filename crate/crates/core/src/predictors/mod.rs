//! Closed-form expectations, exact standard deviations and bounds.
//!
//! Standard deviations come from linear recursions on the polynomial families
//! that the step-averaging operators preserve. For the sphere and the
//! hyperboloid, the recursion runs on the variance itself, so no large terms
//! cancel.

mod flat;
mod hyperbolic;
mod integrals;
mod kappa;
mod operator;
mod sphere;

use serde::{Deserialize, Serialize};

pub use flat::{
    flat_expected_norm, flat_expected_sq_norm, flat_fourth_moment, flat_norm_prediction,
    flat_prediction, flat_sigma, flat_sigma_bound,
};
pub use hyperbolic::{
    hyperbolic_expected_cosh, hyperbolic_prediction, hyperbolic_sigma, hyperbolic_sigma_bound,
    ln_cosh, CoshProduct, HyperbolicSigma,
};
pub use integrals::{
    coordinate_marginal_density, gaussian_abs_moment, gaussian_sq_std, marginal_normalizer,
    monomial_integral, sphere_monomial_moment, MonomialKind,
};
pub use kappa::{
    kappa_cosine_product, kappa_norm_product, pnorm_proposition_bounds, CurvaturePath,
    CurvatureStep, PropositionBounds,
};
pub use operator::{
    operator_expected_cosine, operator_norm_multiplier, operator_product_cosine,
    operator_product_norm,
};
pub use sphere::{
    snapped_cos, sphere_expected_cosine, sphere_prediction, sphere_sigma, sphere_sigma_bound,
};

/// Whether an order-of-magnitude statement is about absolute or relative
/// deviation from the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deviation {
    Absolute,
    Relative,
}

impl Deviation {
    pub fn as_str(self) -> &'static str {
        match self {
            Deviation::Absolute => "absolute",
            Deviation::Relative => "relative",
        }
    }
}

/// Expectation of an observable with its exact standard deviation and upper
/// bound where these are known in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub sigma_exact: Option<f64>,
    pub sigma_bound: Option<f64>,
    pub deviation: Deviation,
    pub order: String,
}

impl Prediction {
    pub fn new(mean: f64, deviation: Deviation, order: impl Into<String>) -> Self {
        Prediction {
            mean,
            sigma_exact: None,
            sigma_bound: None,
            deviation,
            order: order.into(),
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma_exact = Some(sigma);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.sigma_bound = Some(bound);
        self
    }

    /// `sigma_exact ≤ sigma_bound + 1e−12` whenever both are present.
    pub fn is_consistent(&self) -> bool {
        match (self.sigma_exact, self.sigma_bound) {
            (Some(s), Some(b)) => s <= b + 1e-12 * b.max(1.0),
            _ => true,
        }
    }
}

pub(crate) fn check_dim(n: usize, min: usize) -> crate::Result<()> {
    if n < min {
        return Err(crate::Error::InvalidParameter {
            name: "dimension",
            value: n as f64,
            reason: match min {
                2 => "must be >= 2",
                3 => "must be >= 3",
                _ => "too small",
            },
        });
    }
    Ok(())
}
