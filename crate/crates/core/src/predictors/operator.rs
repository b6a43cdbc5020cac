use crate::error::{Error, Result};
use crate::geometry::pnorm_pi;
use crate::sampling::Spectrum;

/// `‖s‖₂^(π) = (1/√N)‖A‖_HS`: the factor a random conjugate of `diag(s)`
/// multiplies norms by.
pub fn operator_norm_multiplier(s: &Spectrum) -> f64 {
    pnorm_pi(s.values(), 2.0).expect("spectrum is nonempty")
}

/// `((1/N) tr A) / ‖s‖₂^(π)`, the cosine between `u` and `Au`.
pub fn operator_expected_cosine(s: &Spectrum) -> Result<f64> {
    let denom = operator_norm_multiplier(s);
    if denom == 0.0 {
        return Err(Error::invalid(
            "spectrum",
            "zero spectrum: the cosine is undefined",
        ));
    }
    let mean = s.trace() / s.len() as f64;
    Ok((mean / denom).clamp(-1.0, 1.0))
}

/// Product of the single-factor cosines.
pub fn operator_product_cosine(spectra: &[Spectrum]) -> Result<f64> {
    spectra.iter().map(operator_expected_cosine).product()
}

/// Product of the single-factor norm multipliers.
pub fn operator_product_norm(spectra: &[Spectrum]) -> f64 {
    spectra.iter().map(operator_norm_multiplier).product()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn norm_multiplier_examples() {
        assert_eq!(operator_norm_multiplier(&spec(&[1.0; 6])), 1.0);
        assert_eq!(operator_norm_multiplier(&spec(&[0.0; 6])), 0.0);
        assert!((operator_norm_multiplier(&spec(&[3.0, 4.0])) - 3.535534).abs() < 1e-6);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(operator_expected_cosine(&spec(&[2.0; 4])).unwrap(), 1.0);
        assert_eq!(operator_expected_cosine(&spec(&[1.0, -1.0])).unwrap(), 0.0);
        let c = operator_expected_cosine(&spec(&[3.0, 4.0])).unwrap();
        assert!((c - 0.989949).abs() < 1e-6);
        assert!(operator_expected_cosine(&spec(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn psd_cosine_is_ratio_of_pnorms() {
        let s = spec(&[0.1, 0.5, 2.0, 3.0]);
        let c = operator_expected_cosine(&s).unwrap();
        let ratio = pnorm_pi(s.values(), 1.0).unwrap() / pnorm_pi(s.values(), 2.0).unwrap();
        assert!((c - ratio).abs() < 1e-15);
    }

    #[test]
    fn product_examples() {
        let id = spec(&[1.0; 3]);
        assert_eq!(
            operator_product_cosine(&[id.clone(), id.clone()]).unwrap(),
            1.0
        );
        assert_eq!(
            operator_product_cosine(&[id.clone(), spec(&[2.0, -1.0, -1.0])]).unwrap(),
            0.0
        );
        let s = spec(&[3.0, 4.0]);
        let c = operator_product_cosine(&[s.clone(), s]).unwrap();
        assert!((c - 0.98).abs() < 1e-15);
        assert!(operator_product_cosine(&[id, spec(&[0.0; 3])]).is_err());
        assert_eq!(operator_product_cosine(&[]).unwrap(), 1.0);
    }

    #[test]
    fn linear_spectrum_oracle() {
        // s_j = j/N for N = 400: ‖s‖₂^(π) = √((N+1)(2N+1)/(6N²)),
        // mean = (N+1)/(2N).
        let n = 400.0;
        let s = Spectrum::new((1..=400).map(|j| j as f64 / n).collect()).unwrap();
        let p2 = ((n + 1.0) * (2.0 * n + 1.0) / (6.0 * n * n)).sqrt();
        let mean = (n + 1.0) / (2.0 * n);
        assert!((operator_norm_multiplier(&s) - p2).abs() < 1e-14);
        assert!((operator_expected_cosine(&s).unwrap() - mean / p2).abs() < 1e-14);
        assert!((p2 - 0.578433).abs() < 1e-6);
        assert!((mean / p2 - 0.866566).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn psd_products_are_nonnegative(
            spectra in prop::collection::vec(
                prop::collection::vec(0.0..5.0f64, 1..20).prop_filter("nonzero", |v| v.iter().any(|x| *x > 0.0)),
                1..5,
            ),
        ) {
            let spectra: Vec<Spectrum> = spectra.into_iter().map(|v| Spectrum::new(v).unwrap()).collect();
            let c = operator_product_cosine(&spectra).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
