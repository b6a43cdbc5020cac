use std::f64::consts::FRAC_PI_2;

use super::{check_dim, Deviation, Prediction};
use crate::error::Result;
use crate::schedule::StepSchedule;

/// `cos θ`, returning exactly 0 at the right angle.
pub fn snapped_cos(theta: f64) -> f64 {
    if (theta - FRAC_PI_2).abs() <= 4.0 * f64::EPSILON {
        0.0
    } else {
        theta.cos()
    }
}

/// `Π cos θᵢ`; the empty product is 1.
pub fn sphere_expected_cosine(thetas: &StepSchedule) -> Result<f64> {
    thetas.validate_angles()?;
    Ok(thetas.iter().map(snapped_cos).product())
}

/// Exact standard deviation of `⟨u_M,u₀⟩`.
///
/// With `c_k = cos²θ_k − sin²θ_k/(n−1)`, `s_k = sin²θ_k/(n−1)` and
/// `q_k = 1 − Π_{i≤k} cos²θ_i`, the variance obeys
/// `V_k = c_k·V_{k−1} + s_k·q_{k−1}`, `V_0 = 0`. This is the two-coefficient
/// recursion `a_k = c_k a_{k−1}`, `b_k = s_k a_{k−1} + b_{k−1}` rewritten for
/// `V = a + b − (Π cos θ)²`.
pub fn sphere_sigma(thetas: &StepSchedule, n: usize) -> Result<f64> {
    thetas.validate_angles()?;
    check_dim(n, 3)?;
    if thetas.len() <= 1 {
        return Ok(0.0);
    }
    let inv = 1.0 / (n as f64 - 1.0);
    let mut var = 0.0;
    let mut q = 0.0;
    for theta in thetas.iter() {
        let cos2 = snapped_cos(theta).powi(2);
        let sin2 = theta.sin().powi(2);
        var = (cos2 - sin2 * inv) * var + sin2 * inv * q;
        q = sin2 + cos2 * q;
    }
    Ok(var.max(0.0).sqrt())
}

/// `(1/√(n−1))·‖(sin θ₁,…,sin θ_{M−1})‖₂`; zero for `M ≤ 1`.
pub fn sphere_sigma_bound(thetas: &StepSchedule, n: usize) -> Result<f64> {
    thetas.validate_angles()?;
    check_dim(n, 3)?;
    let m = thetas.len();
    if m <= 1 {
        return Ok(0.0);
    }
    let sum: f64 = thetas.as_slice()[..m - 1]
        .iter()
        .map(|t| t.sin().powi(2))
        .sum();
    Ok((sum / (n as f64 - 1.0)).sqrt())
}

pub fn sphere_prediction(thetas: &StepSchedule, n: usize) -> Result<Prediction> {
    Ok(Prediction::new(
        sphere_expected_cosine(thetas)?,
        Deviation::Absolute,
        "O((1/sqrt(N))*||(sin theta_1,...,sin theta_{M-1})||_2)",
    )
    .with_sigma(sphere_sigma(thetas, n)?)
    .with_bound(sphere_sigma_bound(thetas, n)?))
}
