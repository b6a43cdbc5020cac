//! The Markov chains whose expectations the predictors compute.
//!
//! Each chain tracks its observable through the step decomposition
//! `u_k = c·u_{k−1} + s·w_k` rather than re-measuring it from the final
//! point. The two agree to rounding; the running form is exact for a single
//! step, since `w₁ ⊥ u₀` by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, mdot, norm, HyperboloidPoint, UnitVector};
use crate::sampling::{
    flat_step_with_direction, hyperbolic_step_with_direction, sphere_step_with_direction,
    HaarRotation, RandomStream, Spectrum,
};
use crate::schedule::StepSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub observable: f64,
    /// Only populated when the chain is run with tracing enabled.
    pub final_point: Option<Vec<f64>>,
}

impl ChainResult {
    fn new(observable: f64, final_point: Option<Vec<f64>>) -> Result<Self> {
        if !observable.is_finite() {
            return Err(Error::Overflow("chain observable"));
        }
        Ok(ChainResult {
            observable,
            final_point,
        })
    }
}

/// Cosine `⟨u_M, u₀⟩` after stepping through `thetas` on the sphere.
pub fn run_sphere_chain(
    u0: &UnitVector,
    thetas: &StepSchedule,
    rng: &mut RandomStream,
) -> Result<ChainResult> {
    sphere_chain(u0, thetas, rng, false)
}

pub fn run_sphere_chain_traced(
    u0: &UnitVector,
    thetas: &StepSchedule,
    rng: &mut RandomStream,
) -> Result<ChainResult> {
    sphere_chain(u0, thetas, rng, true)
}

fn sphere_chain(
    u0: &UnitVector,
    thetas: &StepSchedule,
    rng: &mut RandomStream,
    trace: bool,
) -> Result<ChainResult> {
    thetas.validate_angles()?;
    if u0.dim() < 3 {
        return Err(Error::param(
            "dimension",
            u0.dim() as f64,
            "sphere chains need n >= 3",
        ));
    }
    let mut u = u0.clone();
    let mut cosine = 1.0;
    for (k, theta) in thetas.iter().enumerate() {
        let step = sphere_step_with_direction(&u, theta, rng)?;
        let along = if k == 0 {
            0.0
        } else {
            dot(&step.direction, u0.as_slice())
        };
        if theta != 0.0 {
            let (s, c) = theta.sin_cos();
            cosine = c * cosine + s * along;
        }
        u = step.point;
    }
    ChainResult::new(cosine.clamp(-1.0, 1.0), trace.then(|| u.into_inner()))
}

/// Squared norm `‖x_M‖²` of the walk started at the origin of `R^n`.
pub fn run_flat_chain(ds: &StepSchedule, n: usize, rng: &mut RandomStream) -> Result<ChainResult> {
    flat_chain(ds, n, rng, false)
}

pub fn run_flat_chain_traced(
    ds: &StepSchedule,
    n: usize,
    rng: &mut RandomStream,
) -> Result<ChainResult> {
    flat_chain(ds, n, rng, true)
}

fn flat_chain(
    ds: &StepSchedule,
    n: usize,
    rng: &mut RandomStream,
    trace: bool,
) -> Result<ChainResult> {
    ds.validate_lengths()?;
    if n < 2 {
        return Err(Error::param(
            "dimension",
            n as f64,
            "flat chains need n >= 2",
        ));
    }
    let mut x = vec![0.0; n];
    let mut sq = 0.0;
    for (k, d) in ds.iter().enumerate() {
        let (next, w) = flat_step_with_direction(&x, d, rng)?;
        let cross = if k == 0 { 0.0 } else { dot(&x, &w) };
        sq = (sq + d * d + 2.0 * d * cross).max(0.0);
        x = next;
    }
    ChainResult::new(sq, trace.then_some(x))
}

/// Minkowski cosine `⟨u_M, u₀⟩_H` of the walk on the hyperboloid.
pub fn run_hyperbolic_chain(
    u0: &HyperboloidPoint,
    xis: &StepSchedule,
    rng: &mut RandomStream,
) -> Result<ChainResult> {
    hyperbolic_chain(u0, xis, rng, false)
}

pub fn run_hyperbolic_chain_traced(
    u0: &HyperboloidPoint,
    xis: &StepSchedule,
    rng: &mut RandomStream,
) -> Result<ChainResult> {
    hyperbolic_chain(u0, xis, rng, true)
}

fn hyperbolic_chain(
    u0: &HyperboloidPoint,
    xis: &StepSchedule,
    rng: &mut RandomStream,
    trace: bool,
) -> Result<ChainResult> {
    xis.validate_arcs()?;
    let mut u = u0.clone();
    let mut cosh = 1.0;
    for (k, xi) in xis.iter().enumerate() {
        let step = hyperbolic_step_with_direction(&u, xi, rng)?;
        let along = if k == 0 {
            0.0
        } else {
            mdot(&step.direction, u0.as_slice())
        };
        if xi != 0.0 {
            cosh = xi.cosh() * cosh + xi.sinh() * along;
        }
        u = step.point;
    }
    if xis.len() <= 1 {
        debug_assert!(cosh >= 1.0 - 1e-9);
    }
    ChainResult::new(cosh, trace.then(|| u.into_inner()))
}

/// Outcome of applying `A_M⋯A₁` to a unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    /// `‖v‖/‖u‖`.
    pub norm_ratio: f64,
    /// `⟨v,u⟩/(‖v‖‖u‖)`; `None` when `v = 0`.
    pub cosine: Option<f64>,
}

impl OperatorResult {
    pub fn is_degenerate(&self) -> bool {
        self.cosine.is_none()
    }
}

/// Applies `A_i = U_iᵀ·diag(s⁽ⁱ⁾)·U_i` in order, each `U_i` a fresh Haar
/// rotation, computing `U_iᵀ(s⁽ⁱ⁾ ⊙ (U_i v))` without forming `A_i`.
pub fn run_operator_product(
    spectra: &[Spectrum],
    u: &UnitVector,
    rng: &mut RandomStream,
) -> Result<OperatorResult> {
    let n = u.dim();
    if let Some(bad) = spectra.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            left: bad.len(),
            right: n,
        });
    }
    let mut v = u.as_slice().to_vec();
    for s in spectra {
        let rotation = HaarRotation::sample(n, rng)?;
        rotation.apply_in_place(&mut v)?;
        v.iter_mut().zip(s.values()).for_each(|(x, si)| *x *= si);
        rotation.apply_transpose_in_place(&mut v)?;
    }
    let r = norm(&v);
    let base = norm(u.as_slice());
    if !r.is_finite() {
        return Err(Error::Overflow("operator product"));
    }
    let cosine = (r > 0.0).then(|| (dot(&v, u.as_slice()) / (r * base)).clamp(-1.0, 1.0));
    Ok(OperatorResult {
        norm_ratio: r / base,
        cosine,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    use super::*;
    use crate::geometry::euclid_inner;
    use crate::sampling::uniform_unit_sphere;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn sphere_chain_trivial_schedules() {
        let mut rng = RandomStream::new(1, 0);
        let u0 = uniform_unit_sphere(10, &mut rng).unwrap();
        let r = run_sphere_chain(&u0, &StepSchedule::default(), &mut rng).unwrap();
        assert_eq!(r.observable, 1.0);
        for _ in 0..20 {
            let r = run_sphere_chain(&u0, &StepSchedule::new(vec![1.1]), &mut rng).unwrap();
            assert_eq!(r.observable, 1.1f64.cos());
        }
        assert!(run_sphere_chain(&u0, &StepSchedule::new(vec![4.0]), &mut rng).is_err());
    }

    #[test]
    fn sphere_running_cosine_matches_final_point() {
        let mut rng = RandomStream::new(2, 0);
        let u0 = uniform_unit_sphere(25, &mut rng).unwrap();
        let thetas = StepSchedule::new(vec![0.3, 1.2, 2.0, 0.0, 0.7]);
        for _ in 0..200 {
            let r = run_sphere_chain_traced(&u0, &thetas, &mut rng).unwrap();
            let direct = euclid_inner(r.final_point.as_ref().unwrap(), u0.as_slice()).unwrap();
            assert!((direct - r.observable).abs() < 1e-12);
        }
        let r = run_sphere_chain(&u0, &thetas, &mut rng).unwrap();
        assert!(r.final_point.is_none());
    }

    #[test]
    fn sphere_chain_mean_matches_product_of_cosines() {
        let mut rng = RandomStream::new(3, 0);
        let u0 = UnitVector::basis(200, 0).unwrap();
        let thetas = StepSchedule::repeated(FRAC_PI_3, 5);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| run_sphere_chain(&u0, &thetas, &mut rng).unwrap().observable)
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!((mean - 0.03125).abs() <= 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn sphere_chain_right_angle_barrier() {
        let mut rng = RandomStream::new(4, 0);
        let u0 = UnitVector::basis(50, 0).unwrap();
        let thetas = StepSchedule::new(vec![0.4, FRAC_PI_2, 0.9]);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| run_sphere_chain(&u0, &thetas, &mut rng).unwrap().observable)
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!(mean.abs() <= 5.0 * se);
        assert!(xs.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn flat_chain_trivial_schedules() {
        let mut rng = RandomStream::new(5, 0);
        let r = run_flat_chain(&StepSchedule::default(), 4, &mut rng).unwrap();
        assert_eq!(r.observable, 0.0);
        for _ in 0..20 {
            let r = run_flat_chain(&StepSchedule::new(vec![2.5]), 4, &mut rng).unwrap();
            assert_eq!(r.observable, 6.25);
        }
        assert!(run_flat_chain(&StepSchedule::new(vec![1.0]), 1, &mut rng).is_err());
    }

    #[test]
    fn flat_running_norm_matches_final_point() {
        let mut rng = RandomStream::new(6, 0);
        let ds = StepSchedule::new(vec![1.0, 0.5, 3.0, 2.0]);
        for _ in 0..200 {
            let r = run_flat_chain_traced(&ds, 7, &mut rng).unwrap();
            let x = r.final_point.unwrap();
            assert!((dot(&x, &x) - r.observable).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_chain_mean() {
        let mut rng = RandomStream::new(7, 0);
        let ds = StepSchedule::repeated(1.0, 10);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| run_flat_chain(&ds, 500, &mut rng).unwrap().observable)
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!((mean - 10.0).abs() <= 4.0 * se);
    }

    #[test]
    fn hyperbolic_chain_trivial_schedules() {
        let mut rng = RandomStream::new(8, 0);
        let u0 = HyperboloidPoint::apex(6).unwrap();
        let r = run_hyperbolic_chain(&u0, &StepSchedule::default(), &mut rng).unwrap();
        assert_eq!(r.observable, 1.0);
        for _ in 0..20 {
            let r = run_hyperbolic_chain(&u0, &StepSchedule::new(vec![0.8]), &mut rng).unwrap();
            assert_eq!(r.observable, 0.8f64.cosh());
        }
    }

    #[test]
    fn hyperbolic_running_cosh_matches_final_point() {
        let mut rng = RandomStream::new(9, 0);
        let u0 = HyperboloidPoint::apex(12).unwrap();
        let xis = StepSchedule::new(vec![0.5, 1.5, 0.2, 2.0]);
        for _ in 0..200 {
            let r = run_hyperbolic_chain_traced(&u0, &xis, &mut rng).unwrap();
            let direct = mdot(r.final_point.as_ref().unwrap(), u0.as_slice());
            assert!((direct - r.observable).abs() < 1e-9 * direct);
        }
    }

    #[test]
    fn hyperbolic_chain_mean() {
        let mut rng = RandomStream::new(10, 0);
        let u0 = HyperboloidPoint::apex(300).unwrap();
        let xis = StepSchedule::new(vec![1.0, 1.0]);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                run_hyperbolic_chain(&u0, &xis, &mut rng)
                    .unwrap()
                    .observable
            })
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!((mean - 1f64.cosh().powi(2)).abs() <= 4.0 * se);
        assert!((1f64.cosh().powi(2) - 2.381098).abs() < 1e-6);
    }

    #[test]
    fn operator_identity_and_scalar() {
        let mut rng = RandomStream::new(11, 0);
        let u = uniform_unit_sphere(30, &mut rng).unwrap();
        let id = Spectrum::new(vec![1.0; 30]).unwrap();
        let r = run_operator_product(&[id], &u, &mut rng).unwrap();
        assert!((r.norm_ratio - 1.0).abs() < 1e-12);
        assert!((r.cosine.unwrap() - 1.0).abs() < 1e-12);
        let scalar = Spectrum::new(vec![2.5; 30]).unwrap();
        let r = run_operator_product(&[scalar], &u, &mut rng).unwrap();
        assert!((r.norm_ratio - 2.5).abs() < 1e-12);
        assert!((r.cosine.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_zero_spectrum_is_degenerate() {
        let mut rng = RandomStream::new(12, 0);
        let u = UnitVector::basis(5, 0).unwrap();
        let r =
            run_operator_product(&[Spectrum::new(vec![0.0; 5]).unwrap()], &u, &mut rng).unwrap();
        assert!(r.is_degenerate());
        assert_eq!(r.norm_ratio, 0.0);
        let short = Spectrum::new(vec![1.0; 4]).unwrap();
        assert!(run_operator_product(&[short], &u, &mut rng).is_err());
    }

    #[test]
    fn operator_mean_cosine() {
        let n = 400;
        let s = Spectrum::new((1..=n).map(|j| j as f64 / n as f64).collect()).unwrap();
        let u = UnitVector::basis(n, 0).unwrap();
        let mut rng = RandomStream::new(13, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| {
                run_operator_product(std::slice::from_ref(&s), &u, &mut rng)
                    .unwrap()
                    .cosine
                    .unwrap()
            })
            .collect();
        let (mean, se) = mean_and_se(&xs);
        let values = s.values();
        let m1 = values.iter().sum::<f64>() / n as f64;
        let m2 = (values.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        assert!((mean - m1 / m2).abs() <= 4.0 * se, "{mean} vs {}", m1 / m2);
        assert!((m1 / m2 - 0.8665).abs() < 1e-3);
    }
}
