//! Reference computations that do not share code paths with the predictors.
//! They are slow and less stable, and are meant only for cross-checking.

use std::f64::consts::PI;

use crate::numeric::integrate;

/// Sphere variance as the explicit sum
/// `(1/(n−1)) Σ_{k<M} sin²θ_k (1 − Π_{i>k} cos²θ_i) Π_{i<k} (cos²θ_i − sin²θ_i/(n−1))`.
pub fn sphere_sigma_sq_expanded(thetas: &[f64], n: usize) -> f64 {
    let inv = 1.0 / (n as f64 - 1.0);
    let m = thetas.len();
    let mut total = 0.0;
    for k in 0..m.saturating_sub(1) {
        let tail: f64 = thetas[k + 1..].iter().map(|t| t.cos().powi(2)).product();
        let head: f64 = thetas[..k]
            .iter()
            .map(|t| t.cos().powi(2) - inv * t.sin().powi(2))
            .product();
        total += thetas[k].sin().powi(2) * (1.0 - tail) * head;
    }
    inv * total
}

/// Hyperbolic variance by enumerating subsets:
/// `Σ_{|S|≥2} ((n/(n−1))^(|S|−1) − 1) Π_{i∈S} sinh²ξᵢ`.
pub fn hyperbolic_sigma_sq_subsets(xis: &[f64], n: usize) -> f64 {
    assert!(xis.len() < 31, "subset enumeration is limited to 30 arcs");
    let m = xis.len();
    let ratio = n as f64 / (n as f64 - 1.0);
    let sinh2: Vec<f64> = xis.iter().map(|x| x.sinh().powi(2)).collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let size = mask.count_ones() as i32;
        if size < 2 {
            continue;
        }
        let prod: f64 = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| sinh2[i])
            .product();
        total += (ratio.powi(size - 1) - 1.0) * prod;
    }
    total
}

/// `Σdᵢ⁴ + (2 + 4/n) Σ_{i<j} dᵢ²dⱼ²` by explicit double sum.
pub fn flat_fourth_moment_double_sum(ds: &[f64], n: usize) -> f64 {
    let mut quartic = 0.0;
    let mut pairs = 0.0;
    for i in 0..ds.len() {
        quartic += ds[i].powi(4);
        for j in i + 1..ds.len() {
            pairs += (ds[i] * ds[j]).powi(2);
        }
    }
    quartic + (2.0 + 4.0 / n as f64) * pairs
}

/// `E|x|^p` for `x ~ N(0,1)` by quadrature of the defining integral.
pub fn gaussian_abs_moment_quadrature(p: f64) -> f64 {
    let c = 2.0 / (2.0 * PI).sqrt();
    integrate(
        |x: f64| c * x.powf(p) * (-0.5 * x * x).exp(),
        0.0,
        40.0,
        1e-13,
    )
}

/// `∫ t^p (1 − t²)^((n−3)/2) dt / ∫ (1 − t²)^((n−3)/2) dt` by quadrature,
/// without the closed-form normalizer.
pub fn marginal_moment_quadrature(n: usize, p: u32) -> f64 {
    let e = (n as f64 - 3.0) / 2.0;
    let w = |t: f64| (1.0 - t * t).max(0.0).powf(e);
    let num = integrate(|t| t.powi(p as i32) * w(t), -1.0, 1.0, 1e-15);
    let den = integrate(w, -1.0, 1.0, 1e-15);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(sphere_sigma_sq_expanded(&[1.0], 10), 0.0);
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!((sphere_sigma_sq_expanded(&[half_pi, half_pi], 11) - 0.1).abs() < 1e-15);
        assert!((hyperbolic_sigma_sq_subsets(&[0.0, 0.0], 101)).abs() < 1e-15);
        assert!((flat_fourth_moment_double_sum(&[1.0, 1.0], 4) - 5.0).abs() < 1e-15);
        assert!((gaussian_abs_moment_quadrature(2.0) - 1.0).abs() < 1e-10);
        assert!((marginal_moment_quadrature(3, 2) - 1.0 / 3.0).abs() < 1e-10);
    }
}
