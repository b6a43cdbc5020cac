//! Seeded generation of every random object the chains need.
//!
//! All samplers take an explicit [`RandomStream`]; there is no global state.
//! A stream is a ChaCha8 generator keyed by `(seed, stream_id)`, so trial `i`
//! of an experiment always sees the same numbers no matter which worker runs
//! it.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    check_finite, dot, norm, HyperboloidPoint, LorentzBoost, Matrix, SymMatrix, UnitVector,
};

/// Deterministic substream of random numbers.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Eigenvalues of a symmetric operator, kept sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(
                "spectrum",
                "must contain at least one eigenvalue",
            ));
        }
        check_finite("spectrum", &values)?;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&s| s == 0.0)
    }

    pub fn is_psd(&self) -> bool {
        self.0.iter().all(|&s| s >= 0.0)
    }

    fn constant(&self) -> Option<f64> {
        let first = self.0[0];
        self.0.iter().all(|&s| s == first).then_some(first)
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

/// `n` i.i.d. standard normal entries.
pub fn gaussian_vector(n: usize, rng: &mut RandomStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("dimension", 0.0, "must be >= 1"));
    }
    Ok((0..n).map(|_| rng.standard_normal()).collect())
}

fn random_direction(n: usize, rng: &mut RandomStream) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let r = norm(&g);
        if r > 0.0 {
            g.iter_mut().for_each(|v| *v /= r);
            return g;
        }
    }
}

/// Uniform point on `S^(n−1)`: a normalized Gaussian vector.
pub fn uniform_unit_sphere(n: usize, rng: &mut RandomStream) -> Result<UnitVector> {
    if n < 2 {
        return Err(Error::param(
            "dimension",
            n as f64,
            "sphere sampling needs n >= 2",
        ));
    }
    Ok(UnitVector::from_raw(random_direction(n, rng)))
}

/// Result of one spherical step: the new point and the unit direction `w ⊥ u`
/// it was built from, so that `point = cos θ·u + sin θ·w`.
#[derive(Debug, Clone)]
pub struct SphereStep {
    pub point: UnitVector,
    pub direction: Vec<f64>,
}

/// Uniform point on `Σ(u,θ) = cos θ·u + sin θ·S^(N−2)_{u⊥}`.
pub fn sphere_step(u: &UnitVector, theta: f64, rng: &mut RandomStream) -> Result<UnitVector> {
    sphere_step_with_direction(u, theta, rng).map(|s| s.point)
}

pub fn sphere_step_with_direction(
    u: &UnitVector,
    theta: f64,
    rng: &mut RandomStream,
) -> Result<SphereStep> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::param("theta", theta, "must lie in [0, pi]"));
    }
    let n = u.dim();
    if n < 3 {
        return Err(Error::param(
            "dimension",
            n as f64,
            "sphere steps need n >= 3",
        ));
    }
    let direction = orthogonal_direction(u.as_slice(), rng);
    if theta == 0.0 {
        return Ok(SphereStep {
            point: u.clone(),
            direction,
        });
    }
    let (s, c) = theta.sin_cos();
    let mut x: Vec<f64> = u
        .as_slice()
        .iter()
        .zip(&direction)
        .map(|(ui, wi)| c * ui + s * wi)
        .collect();
    let r = norm(&x);
    x.iter_mut().for_each(|v| *v /= r);
    Ok(SphereStep {
        point: UnitVector::from_raw(x),
        direction,
    })
}

/// Uniform unit vector in `u^⊥` (Gaussian, projected twice, normalized).
fn orthogonal_direction(u: &[f64], rng: &mut RandomStream) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = (0..u.len()).map(|_| rng.standard_normal()).collect();
        for _ in 0..2 {
            let k = dot(&g, u);
            g.iter_mut().zip(u).for_each(|(gi, ui)| *gi -= k * ui);
        }
        let r = norm(&g);
        if r > 0.0 {
            g.iter_mut().for_each(|v| *v /= r);
            return g;
        }
    }
}

/// `x + d·w` with `w` uniform on the unit sphere.
pub fn flat_step(x: &[f64], d: f64, rng: &mut RandomStream) -> Result<Vec<f64>> {
    flat_step_with_direction(x, d, rng).map(|(p, _)| p)
}

pub fn flat_step_with_direction(
    x: &[f64],
    d: f64,
    rng: &mut RandomStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::param("d", d, "step length must be finite and >= 0"));
    }
    if x.is_empty() {
        return Err(Error::param("dimension", 0.0, "must be >= 1"));
    }
    let w = random_direction(x.len(), rng);
    let p = x.iter().zip(&w).map(|(xi, wi)| xi + d * wi).collect();
    Ok((p, w))
}

/// Result of one hyperbolic step: `point = cosh ξ·u + sinh ξ·w` with `w` a
/// Minkowski-unit (`⟨w,w⟩_H = −1`) direction orthogonal to `u`.
#[derive(Debug, Clone)]
pub struct HyperbolicStep {
    pub point: HyperboloidPoint,
    pub direction: Vec<f64>,
}

/// Uniform point on `Σ(u,ξ) = cosh ξ·u + sinh ξ·S^(N−2)_{u⊥}`.
///
/// The step is drawn at the apex, where `u^⊥` is the Euclidean span of
/// `e₂..e_N`, and carried to `u` by the boost taking `e₁` to `u`.
pub fn hyperbolic_step(
    u: &HyperboloidPoint,
    xi: f64,
    rng: &mut RandomStream,
) -> Result<HyperboloidPoint> {
    hyperbolic_step_with_direction(u, xi, rng).map(|s| s.point)
}

pub fn hyperbolic_step_with_direction(
    u: &HyperboloidPoint,
    xi: f64,
    rng: &mut RandomStream,
) -> Result<HyperbolicStep> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::param(
            "xi",
            xi,
            "hyperbolic arc must be finite and >= 0",
        ));
    }
    let n = u.dim();
    let mut local = Vec::with_capacity(n);
    local.push(0.0);
    local.extend(random_direction(n - 1, rng));
    let direction = LorentzBoost::new(u).apply(&local)?;
    if xi == 0.0 {
        return Ok(HyperbolicStep {
            point: u.clone(),
            direction,
        });
    }
    let (c, s) = (xi.cosh(), xi.sinh());
    let mut x: Vec<f64> = u
        .as_slice()
        .iter()
        .zip(&direction)
        .map(|(ui, wi)| c * ui + s * wi)
        .collect();
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow("hyperbolic step"));
    }
    // Put the point back on the sheet: x₁ = √(1 + ‖x̃‖²).
    x[0] = (1.0 + dot(&x[1..], &x[1..])).sqrt();
    if !x[0].is_finite() {
        return Err(Error::Overflow("hyperbolic step"));
    }
    Ok(HyperbolicStep {
        point: HyperboloidPoint::from_raw(x),
        direction,
    })
}

/// Dense Haar-random orthogonal matrix: Householder QR of a Gaussian matrix,
/// with column `j` of `Q` multiplied by `sign(R_jj)`.
pub fn haar_orthogonal(n: usize, rng: &mut RandomStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::param("dimension", 0.0, "must be >= 1"));
    }
    let mut a = Matrix::from_fn(n, |_, _| rng.standard_normal());
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut signs = vec![1.0; n];
    for k in 0..n {
        let x: Vec<f64> = (k..n).map(|i| a.get(i, k)).collect();
        let (v, alpha) = householder(&x);
        signs[k] = if alpha < 0.0 { -1.0 } else { 1.0 };
        // A[k.., k..] ← (I − 2vvᵀ) A[k.., k..]
        if let Some(v) = &v {
            for j in k..n {
                let proj: f64 = (k..n).map(|i| v[i - k] * a.get(i, j)).sum();
                for i in k..n {
                    let updated = a.get(i, j) - 2.0 * v[i - k] * proj;
                    a.set(i, j, updated);
                }
            }
        }
        reflectors.push(v.unwrap_or_default());
    }
    // Q = H₀H₁…H_{n−1}, built by applying the reflectors to I from the right end.
    let mut q = Matrix::identity(n);
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let proj: f64 = (k..n).map(|i| v[i - k] * q.get(i, j)).sum();
            if proj == 0.0 {
                continue;
            }
            for i in k..n {
                let updated = q.get(i, j) - 2.0 * v[i - k] * proj;
                q.set(i, j, updated);
            }
        }
    }
    for (j, &sign) in signs.iter().enumerate() {
        if sign < 0.0 {
            for i in 0..n {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    Ok(q)
}

/// Unit Householder vector `v` with `(I − 2vvᵀ)x = α e₁`, `α = −sign(x₀)‖x‖`.
/// `None` when `x` is already a multiple of `e₁` with the right sign (or
/// zero); then `α = x₀`.
fn householder(x: &[f64]) -> (Option<Vec<f64>>, f64) {
    let r = norm(x);
    if r == 0.0 {
        return (None, 0.0);
    }
    let alpha = if x[0] >= 0.0 { -r } else { r };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vn = norm(&v);
    if vn == 0.0 {
        return (None, x[0]);
    }
    v.iter_mut().for_each(|e| *e /= vn);
    (Some(v), alpha)
}

/// Haar-random orthogonal matrix held in factored form
/// `Q = H₀H₁…H_{n−2}·D`, where `H_k` reflects coordinates `k..n` and `D` is a
/// diagonal of signs.
///
/// This is the same law as [`haar_orthogonal`]: in Householder QR of a
/// Gaussian matrix the column reduced at stage `k` is a fresh standard normal
/// vector, so drawing it directly skips the O(n³) factorization. Sampling and
/// applying cost O(n²).
#[derive(Debug, Clone)]
pub struct HaarRotation {
    n: usize,
    reflectors: Vec<Vec<f64>>,
    signs: Vec<f64>,
}

impl HaarRotation {
    pub fn sample(n: usize, rng: &mut RandomStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("dimension", 0.0, "must be >= 1"));
        }
        let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
        let mut signs = vec![1.0; n];
        for (k, sign) in signs.iter_mut().enumerate().take(n - 1) {
            let x: Vec<f64> = (k..n).map(|_| rng.standard_normal()).collect();
            let (v, alpha) = householder(&x);
            *sign = if alpha < 0.0 { -1.0 } else { 1.0 };
            reflectors.push(v.unwrap_or_default());
        }
        signs[n - 1] = if rng.standard_normal() < 0.0 {
            -1.0
        } else {
            1.0
        };
        Ok(HaarRotation {
            n,
            reflectors,
            signs,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn reflect(&self, k: usize, x: &mut [f64]) {
        let v = &self.reflectors[k];
        if v.is_empty() {
            return;
        }
        let tail = &mut x[k..];
        let proj = 2.0 * dot(v, tail);
        tail.iter_mut().zip(v).for_each(|(t, vi)| *t -= proj * vi);
    }

    /// `Q·x` in place.
    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check(x)?;
        x.iter_mut().zip(&self.signs).for_each(|(xi, s)| *xi *= s);
        for k in (0..self.reflectors.len()).rev() {
            self.reflect(k, x);
        }
        Ok(())
    }

    /// `Qᵀ·x` in place.
    pub fn apply_transpose_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check(x)?;
        for k in 0..self.reflectors.len() {
            self.reflect(k, x);
        }
        x.iter_mut().zip(&self.signs).for_each(|(xi, s)| *xi *= s);
        Ok(())
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.n;
        let mut q = Matrix::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.apply_in_place(&mut e).expect("dimension matches");
            for (i, v) in e.into_iter().enumerate() {
                q.set(i, j, v);
            }
        }
        q
    }
}

/// `A = Uᵀ·diag(s)·U` with `U` Haar-random.
///
/// Constant spectra return the scalar matrix exactly, since it commutes with
/// every rotation.
pub fn random_symmetric_with_spectrum(s: &Spectrum, rng: &mut RandomStream) -> Result<SymMatrix> {
    let n = s.len();
    if let Some(c) = s.constant() {
        return SymMatrix::new(Matrix::from_fn(n, |i, j| if i == j { c } else { 0.0 }));
    }
    let u = haar_orthogonal(n, rng)?;
    let values = s.values();
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| u.get(k, i) * values[k] * u.get(k, j)).sum();
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    SymMatrix::new(a)
}
