use super::{check_dim, Deviation, Prediction};
use crate::error::Result;
use crate::schedule::StepSchedule;

/// `E‖x_M‖² = Σ dᵢ²`.
pub fn flat_expected_sq_norm(ds: &StepSchedule) -> Result<f64> {
    ds.validate_lengths()?;
    Ok(ds.iter().fold(0.0, |acc, d| acc + d * d))
}

/// `√(Σ dᵢ²)`, the value `‖x_M‖` concentrates near.
pub fn flat_expected_norm(ds: &StepSchedule) -> Result<f64> {
    flat_expected_sq_norm(ds).map(f64::sqrt)
}

/// `E‖x_M‖⁴` by the coefficient recursion on `{‖x‖⁴, ‖x‖², 1}`:
/// one step of length `d` maps `(A, B, C)` to
/// `(A, (2 + 4/n)d²A + B, d⁴A + d²B + C)`, starting from `(1, 0, 0)`.
pub fn flat_fourth_moment(ds: &StepSchedule, n: usize) -> Result<f64> {
    ds.validate_lengths()?;
    check_dim(n, 2)?;
    let k = 2.0 + 4.0 / n as f64;
    let (a, mut b, mut c) = (1.0, 0.0, 0.0);
    for d in ds.iter() {
        let d2 = d * d;
        c += d2 * d2 * a + d2 * b;
        b += k * d2 * a;
    }
    Ok(c)
}

/// Σ_{i<j} dᵢ²dⱼ², accumulated without subtracting squares.
fn pair_sum(ds: &StepSchedule) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for d in ds.iter() {
        let d2 = d * d;
        total += d2 * prefix;
        prefix += d2;
    }
    total
}

/// `σ(‖x_M‖²) = √((4/n) Σ_{i<j} dᵢ²dⱼ²)`.
pub fn flat_sigma(ds: &StepSchedule, n: usize) -> Result<f64> {
    ds.validate_lengths()?;
    check_dim(n, 2)?;
    Ok((4.0 / n as f64 * pair_sum(ds)).sqrt())
}

/// `√(2(k−1)/(k·n))·Σ dᵢ²` with `k = max(M, n)`. For `M ≤ n` this is
/// `(√(2(n−1))/n)·Σ dᵢ²`. For `M > n` that expression is no longer an upper
/// bound (equal steps violate it), and the `M`-step form is used instead.
pub fn flat_sigma_bound(ds: &StepSchedule, n: usize) -> Result<f64> {
    check_dim(n, 2)?;
    let k = ds.len().max(n) as f64;
    Ok((2.0 * (k - 1.0) / (k * n as f64)).sqrt() * flat_expected_sq_norm(ds)?)
}

/// Prediction for the squared norm `‖x_M‖²`.
pub fn flat_prediction(ds: &StepSchedule, n: usize) -> Result<Prediction> {
    Ok(Prediction::new(
        flat_expected_sq_norm(ds)?,
        Deviation::Relative,
        "O(1/sqrt(N))",
    )
    .with_sigma(flat_sigma(ds, n)?)
    .with_bound(flat_sigma_bound(ds, n)?))
}

/// Prediction for the norm `‖x_M‖` itself; only the concentration value is
/// known in closed form.
pub fn flat_norm_prediction(ds: &StepSchedule) -> Result<Prediction> {
    Ok(Prediction::new(
        flat_expected_norm(ds)?,
        Deviation::Relative,
        "O(1/sqrt(N))",
    ))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sched(v: &[f64]) -> StepSchedule {
        StepSchedule::new(v.to_vec())
    }

    /// Closed form `Σdᵢ⁴ + (2 + 4/n)Σ_{i<j} dᵢ²dⱼ²` by explicit double sum.
    fn fourth_moment_double_sum(ds: &[f64], n: usize) -> f64 {
        let mut quartic = 0.0;
        let mut pairs = 0.0;
        for i in 0..ds.len() {
            quartic += ds[i].powi(4);
            for j in (i + 1)..ds.len() {
                pairs += ds[i].powi(2) * ds[j].powi(2);
            }
        }
        quartic + (2.0 + 4.0 / n as f64) * pairs
    }

    #[test]
    fn expected_norm_examples() {
        assert_eq!(flat_expected_sq_norm(&sched(&[])).unwrap(), 0.0);
        assert_eq!(flat_expected_norm(&sched(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(
            flat_expected_sq_norm(&StepSchedule::repeated(1.0, 10)).unwrap(),
            10.0
        );
        assert!(flat_expected_sq_norm(&sched(&[-1.0])).is_err());
    }

    #[test]
    fn fourth_moment_examples() {
        assert_eq!(
            flat_fourth_moment(&sched(&[1.7]), 5).unwrap(),
            1.7f64.powi(4)
        );
        for n in [2, 3, 100] {
            let v = flat_fourth_moment(&sched(&[1.0, 1.0]), n).unwrap();
            assert!((v - (4.0 + 4.0 / n as f64)).abs() < 1e-15);
        }
        assert!(flat_fourth_moment(&sched(&[1.0]), 1).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(flat_sigma(&sched(&[4.0]), 10).unwrap(), 0.0);
        assert!((flat_sigma(&sched(&[1.0, 1.0]), 100).unwrap() - 0.2).abs() < 1e-15);
        let s = flat_sigma(&StepSchedule::repeated(1.0, 10), 500).unwrap();
        assert!((s - (4.0 * 45.0 / 500.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn variance_is_fourth_moment_minus_square() {
        let ds = sched(&[0.5, 2.0, 1.5, 3.0]);
        let n = 17;
        let m2 = flat_expected_sq_norm(&ds).unwrap();
        let m4 = flat_fourth_moment(&ds, n).unwrap();
        let s = flat_sigma(&ds, n).unwrap();
        assert!((m4 - m2 * m2 - s * s).abs() < 1e-12 * m4);
    }

    #[test]
    fn bound_examples() {
        let b = flat_sigma_bound(&sched(&[1.0, 1.0]), 100).unwrap();
        assert!((b - (198.0f64).sqrt() / 100.0 * 2.0).abs() < 1e-15);
        // More equal steps than dimensions: σ² = 2M(M−1)/n exceeds
        // (2(n−1)/n²)·M², but not 2(M−1)/(M n)·M².
        let ds = StepSchedule::repeated(1.0, 40);
        let s = flat_sigma(&ds, 4).unwrap();
        assert!(s > (6.0f64).sqrt() / 4.0 * 40.0);
        assert!((s - flat_sigma_bound(&ds, 4).unwrap()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn recursion_matches_double_sum(
            ds in prop::collection::vec(0.0..10.0f64, 0..=6),
            n in 2usize..10_000,
        ) {
            let rec = flat_fourth_moment(&sched(&ds), n).unwrap();
            let closed = fourth_moment_double_sum(&ds, n);
            prop_assert!((rec - closed).abs() <= 1e-12 * closed.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn sigma_within_bound(
            ds in prop::collection::vec(0.0..10.0f64, 0..40),
            n in prop_oneof![2usize..10, 2usize..10_000],
        ) {
            let s = sched(&ds);
            prop_assert!(flat_sigma(&s, n).unwrap() <= flat_sigma_bound(&s, n).unwrap() * (1.0 + 1e-12));
        }
    }
}
