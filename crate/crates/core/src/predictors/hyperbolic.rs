use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{check_dim, Deviation, Prediction};
use crate::error::Result;
use crate::schedule::StepSchedule;

/// `ln cosh ξ` without overflow for large arcs.
pub fn ln_cosh(xi: f64) -> f64 {
    let x = xi.abs();
    if x < 1.0 {
        x.cosh().ln()
    } else {
        x + (-2.0 * x).exp().ln_1p() - LN_2
    }
}

/// `Π cosh ξᵢ` together with its logarithm. `value` overflows to infinity
/// for very long schedules; `ln` stays finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoshProduct {
    pub value: f64,
    pub ln: f64,
}

pub fn hyperbolic_expected_cosh(xis: &StepSchedule) -> Result<CoshProduct> {
    xis.validate_arcs()?;
    let ln = xis.iter().map(ln_cosh).fold(0.0, |acc, x| acc + x);
    Ok(CoshProduct {
        value: ln.exp(),
        ln,
    })
}

/// Exact standard deviation of `⟨u_M,u₀⟩_H`, scaled by the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSigma {
    pub sigma: f64,
    /// `ln σ`; `-inf` when σ = 0.
    pub ln_sigma: f64,
    /// `σ / Π cosh ξᵢ`.
    pub relative: f64,
}

impl HyperbolicSigma {
    pub fn overflowed(&self) -> bool {
        !self.sigma.is_finite()
    }
}

/// The second-moment recursion with `c_k = cosh²ξ_k + sinh²ξ_k/(n−1)`,
/// `s_k = sinh²ξ_k/(n−1)`, `a_k = c_k a_{k−1}`, `b_k = b_{k−1} − s_k a_{k−1}`,
/// run on the variance divided by `(Π cosh ξ)²`:
///
/// ```text
/// ρ_k = (1 + t_k/(n−1))·ρ_{k−1} + (t_k/(n−1))·r_{k−1}
/// r_k = t_k + (1 − t_k)·r_{k−1}
/// ```
///
/// with `t_k = tanh²ξ_k` and `r_k = 1 − 1/Π_{i≤k} cosh²ξ_i`. Every term is
/// nonnegative, so nothing cancels and nothing overflows.
pub fn hyperbolic_sigma(xis: &StepSchedule, n: usize) -> Result<HyperbolicSigma> {
    xis.validate_arcs()?;
    check_dim(n, 3)?;
    let inv = 1.0 / (n as f64 - 1.0);
    let mut rho = 0.0;
    let mut r = 0.0;
    for xi in xis.iter() {
        let t = xi.tanh().powi(2);
        rho = (1.0 + t * inv) * rho + t * inv * r;
        r = t + (1.0 - t) * r;
    }
    let mean = hyperbolic_expected_cosh(xis)?;
    let relative = rho.sqrt();
    let ln_sigma = mean.ln + relative.ln();
    Ok(HyperbolicSigma {
        sigma: ln_sigma.exp(),
        ln_sigma,
        relative,
    })
}

/// `√((n/(n−1))^(M−1) − 1)·Π cosh ξᵢ`.
pub fn hyperbolic_sigma_bound(xis: &StepSchedule, n: usize) -> Result<f64> {
    check_dim(n, 3)?;
    let m = xis.len();
    let mean = hyperbolic_expected_cosh(xis)?;
    if m <= 1 {
        return Ok(0.0);
    }
    let relative = ((m as f64 - 1.0) * (1.0 / (n as f64 - 1.0)).ln_1p())
        .exp_m1()
        .sqrt();
    Ok((mean.ln + relative.ln()).exp())
}

pub fn hyperbolic_prediction(xis: &StepSchedule, n: usize) -> Result<Prediction> {
    let mean = hyperbolic_expected_cosh(xis)?;
    Ok(
        Prediction::new(mean.value, Deviation::Relative, "O(sqrt(M)/sqrt(N))")
            .with_sigma(hyperbolic_sigma(xis, n)?.sigma)
            .with_bound(hyperbolic_sigma_bound(xis, n)?),
    )
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sched(v: &[f64]) -> StepSchedule {
        StepSchedule::new(v.to_vec())
    }

    /// `Σ_{|S|≥2} [(n/(n−1))^{|S|−1} − 1] Π_{i∈S} sinh²ξᵢ` by enumerating
    /// subsets.
    fn sigma_sq_subsets(xis: &[f64], n: usize) -> f64 {
        let m = xis.len();
        let ratio = n as f64 / (n as f64 - 1.0);
        let mut total = 0.0;
        for mask in 0u32..(1 << m) {
            let size = mask.count_ones() as i32;
            if size < 2 {
                continue;
            }
            let prod: f64 = (0..m)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| xis[i].sinh().powi(2))
                .product();
            total += (ratio.powi(size - 1) - 1.0) * prod;
        }
        total
    }

    #[test]
    fn expected_cosh_examples() {
        let e = hyperbolic_expected_cosh(&sched(&[])).unwrap();
        assert_eq!((e.value, e.ln), (1.0, 0.0));
        assert_eq!(
            hyperbolic_expected_cosh(&sched(&[0.0, 0.0])).unwrap().value,
            1.0
        );
        let v = hyperbolic_expected_cosh(&sched(&[1.0, 1.0])).unwrap().value;
        assert!((v - 2.381098).abs() < 1e-6);
        assert!((v - 1f64.cosh().powi(2)).abs() < 1e-14);
        assert!(hyperbolic_expected_cosh(&sched(&[-1.0])).is_err());
    }

    #[test]
    fn ln_cosh_is_accurate() {
        for x in [0.0, 1e-3, 0.5, 0.999, 1.0, 3.0, 20.0] {
            let direct = f64::cosh(x).ln();
            assert!((ln_cosh(x) - direct).abs() <= 1e-15 * direct.max(1.0));
        }
        assert!((ln_cosh(1000.0) - (1000.0 - LN_2)).abs() < 1e-12);
    }

    #[test]
    fn long_schedules_stay_finite_in_log_space() {
        let xis = StepSchedule::repeated(50.0, 20);
        let e = hyperbolic_expected_cosh(&xis).unwrap();
        assert!(e.value.is_infinite());
        assert!((e.ln - 20.0 * (50.0 - LN_2)).abs() < 1e-9);
        let s = hyperbolic_sigma(&xis, 100).unwrap();
        assert!(s.overflowed());
        assert!(s.ln_sigma.is_finite());
        assert!(s.relative > 0.0 && s.relative < 1.0);
    }

    #[test]
    fn single_step_is_deterministic() {
        for n in [3, 50] {
            assert_eq!(hyperbolic_sigma(&sched(&[2.0]), n).unwrap().sigma, 0.0);
            assert_eq!(hyperbolic_sigma_bound(&sched(&[2.0]), n).unwrap(), 0.0);
        }
    }

    #[test]
    fn bound_example() {
        let b = hyperbolic_sigma_bound(&sched(&[0.0, 0.0]), 101).unwrap();
        assert!((b - 0.1).abs() < 1e-14);
    }

    #[test]
    fn sigma_matches_subset_form_for_acceptance_schedule() {
        let xis = [1.0, 1.0, 1.0];
        let s = hyperbolic_sigma(&sched(&xis), 300).unwrap().sigma;
        let oracle = sigma_sq_subsets(&xis, 300);
        assert!((s * s - oracle).abs() <= 1e-12 * oracle);
    }

    proptest! {
        #[test]
        fn recursion_matches_subsets(
            xis in prop::collection::vec(0.0..3.0f64, 0..=8),
            n in 3usize..2000,
        ) {
            let s = hyperbolic_sigma(&sched(&xis), n).unwrap().sigma;
            let oracle = sigma_sq_subsets(&xis, n);
            prop_assert!((s * s - oracle).abs() <= 1e-10 * oracle.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn sigma_within_bound(
            xis in prop::collection::vec(0.0..6.0f64, 0..15),
            n in 3usize..5000,
        ) {
            let s = sched(&xis);
            let sigma = hyperbolic_sigma(&s, n).unwrap();
            let bound = hyperbolic_sigma_bound(&s, n).unwrap();
            prop_assert!(sigma.sigma <= bound * (1.0 + 1e-12));
            let m = xis.len().max(1) as f64;
            let rel = ((n as f64 / (n as f64 - 1.0)).powf(m - 1.0) - 1.0).sqrt();
            prop_assert!(sigma.relative <= rel * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn large_arcs_add(
            xis in prop::collection::vec(2.0..40.0f64, 1..10),
        ) {
            let ln = hyperbolic_expected_cosh(&sched(&xis)).unwrap().ln;
            let m = xis.len() as f64;
            let sum: f64 = xis.iter().sum();
            let min = xis.iter().cloned().fold(f64::INFINITY, f64::min);
            let rounding = 8.0 * f64::EPSILON * m * sum;
            prop_assert!((ln - sum + m * LN_2).abs() <= m * (-2.0 * min).exp() + rounding);
        }
    }
}
