//! Sampled matrices checked against nalgebra's decompositions.

use concentrate::geometry::{hs_norm, lorentz_boost_from_e1};
use concentrate::sampling::{haar_orthogonal, random_symmetric_with_spectrum, uniform_unit_sphere};
use concentrate::{HyperboloidPoint, Matrix, RandomStream, Spectrum};
use nalgebra::DMatrix;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

#[test]
fn symmetric_matrix_has_prescribed_eigenvalues() {
    let mut rng = RandomStream::new(7, 0);
    for n in [2usize, 5, 17, 40] {
        let values: Vec<f64> = (0..n).map(|j| (j as f64 - 3.0) / n as f64).collect();
        let spectrum = Spectrum::new(values.clone()).unwrap();
        let a = random_symmetric_with_spectrum(&spectrum, &mut rng).unwrap();
        let na = to_na(a.matrix());
        assert!((&na - na.transpose()).amax() < 1e-14);
        let mut eig: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut expected = values;
        expected.sort_by(f64::total_cmp);
        for (e, v) in eig.iter().zip(&expected) {
            assert!((e - v).abs() < 1e-12, "n={n}: {e} vs {v}");
        }
        let hs: f64 = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((hs_norm(&a) - hs).abs() < 1e-12);
    }
}

#[test]
fn haar_matrix_is_orthogonal_with_unit_singular_values() {
    let mut rng = RandomStream::new(8, 0);
    for n in [1usize, 3, 12, 30] {
        let q = to_na(&haar_orthogonal(n, &mut rng).unwrap());
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(n, n)).amax() < 1e-13);
        for s in q.singular_values().iter() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!((q.determinant().abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn boost_preserves_minkowski_form() {
    let mut rng = RandomStream::new(9, 0);
    let n = 6;
    let mut eta = DMatrix::identity(n, n);
    for i in 1..n {
        eta[(i, i)] = -1.0;
    }
    for xi in [0.1, 1.0, 3.0] {
        let dir = uniform_unit_sphere(n - 1, &mut rng).unwrap();
        let u = HyperboloidPoint::from_polar(xi, &dir).unwrap();
        let l = to_na(&lorentz_boost_from_e1(&u));
        let scale = (2.0 * xi).exp();
        assert!((l.transpose() * &eta * &l - &eta).amax() < 1e-12 * scale);
        for i in 0..n {
            assert!((l[(i, 0)] - u.as_slice()[i]).abs() < 1e-12 * scale);
        }
    }
}
