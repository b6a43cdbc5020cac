//! Euclidean and Minkowski primitives.
//!
//! Vectors are plain `&[f64]` slices. Points with a normalization contract
//! ([`UnitVector`], [`HyperboloidPoint`]) are newtypes that renormalize on
//! construction, and square matrices are dense row-major [`Matrix`] values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs further than this from the target norm are rejected rather than
/// renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// Residual allowed after construction.
pub const NORM_TOLERANCE: f64 = 1e-9;

fn same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(name, format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `Σ xᵢyᵢ`.
pub fn euclid_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    Ok(dot(x, y))
}

/// `x₁y₁ − x₂y₂ − … − x_Ny_N`, signature (+,−,…,−).
pub fn minkowski_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    if x.len() < 2 {
        return Err(Error::param(
            "dimension",
            x.len() as f64,
            "Minkowski space needs at least 2 coordinates",
        ));
    }
    Ok(mdot(x, y))
}

pub(crate) fn mdot(x: &[f64], y: &[f64]) -> f64 {
    x[0] * y[0] - dot(&x[1..], &y[1..])
}

/// Probability Lᵖ norm `((1/N) Σ |xⱼ|^p)^(1/p)`: the Lᵖ norm of the index set
/// `{1..N}` carrying uniform weights `1/N`. Non-decreasing in `p`.
pub fn pnorm_pi(x: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param("p", p, "must be a finite value >= 1"));
    }
    if x.is_empty() {
        return Err(Error::param("dimension", 0.0, "must be >= 1"));
    }
    let n = x.len() as f64;
    let value = if p == 1.0 {
        x.iter().map(|v| v.abs()).sum::<f64>() / n
    } else if p == 2.0 {
        (dot(x, x) / n).sqrt()
    } else {
        // Scale by the largest entry so that large p cannot overflow.
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        let mean = x.iter().map(|v| (v.abs() / scale).powf(p)).sum::<f64>() / n;
        scale * mean.powf(1.0 / p)
    };
    Ok(value)
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: n * n,
            });
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        same_len(x, &self.data[..self.n])?;
        Ok((0..self.n).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ·x`, without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        same_len(x, &self.data[..self.n])?;
        let mut out = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `√(Σ A_ij²)`.
    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Largest `|A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Symmetric matrix; symmetry is checked on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

    pub fn new(m: Matrix) -> Result<Self> {
        check_finite("matrix", m.as_slice())?;
        let scale = m.as_slice().iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        for i in 0..m.dim() {
            for j in (i + 1)..m.dim() {
                if (m.get(i, j) - m.get(j, i)).abs() > Self::SYMMETRY_TOLERANCE * scale {
                    return Err(Error::invalid(
                        "matrix",
                        format!("not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Hilbert–Schmidt norm `√tr(AᵀA)`.
pub fn hs_norm(a: &SymMatrix) -> f64 {
    a.0.frobenius_norm()
}

/// Point on the unit sphere `S^(N−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts vectors within [`RENORMALIZE_TOLERANCE`] of unit norm and
    /// rescales them exactly onto the sphere.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_finite("unit vector", &x)?;
        let r = norm(&x);
        if (r - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::param("norm", r, "unit vector must have norm 1"));
        }
        Ok(Self::rescale(x, r))
    }

    /// Projects any nonzero finite vector onto the sphere.
    pub fn normalize(x: Vec<f64>) -> Result<Self> {
        check_finite("vector", &x)?;
        let r = norm(&x);
        if r == 0.0 {
            return Err(Error::Degenerate("cannot normalize the zero vector"));
        }
        Ok(Self::rescale(x, r))
    }

    /// `e_k` in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::param("basis index", k as f64, "must be < dimension"));
        }
        let mut x = vec![0.0; n];
        x[k] = 1.0;
        Ok(UnitVector(x))
    }

    fn rescale(mut x: Vec<f64>, r: f64) -> Self {
        if r != 1.0 {
            x.iter_mut().for_each(|v| *v /= r);
        }
        UnitVector(x)
    }

    pub(crate) fn from_raw(x: Vec<f64>) -> Self {
        UnitVector(x)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Re-checks `|‖x‖₂ − 1| ≤ 1e−9`.
    pub fn is_normalized(&self) -> bool {
        (norm(&self.0) - 1.0).abs() <= NORM_TOLERANCE
    }
}

/// Point on the future sheet of the hyperboloid `⟨x,x⟩_H = 1`, `x₁ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint(Vec<f64>);

impl HyperboloidPoint {
    /// Accepts points within [`RENORMALIZE_TOLERANCE`] (relative to `x₁²`) of
    /// the hyperboloid and rescales them onto it.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_finite("hyperboloid point", &x)?;
        if x.len() < 2 {
            return Err(Error::param(
                "dimension",
                x.len() as f64,
                "hyperboloid needs at least 2 coordinates",
            ));
        }
        if !(x[0] > 0.0) {
            return Err(Error::param("x1", x[0], "must be positive (future sheet)"));
        }
        let q = mdot(&x, &x);
        if (q - 1.0).abs() > RENORMALIZE_TOLERANCE * x[0] * x[0] || q <= 0.0 {
            return Err(Error::param(
                "Minkowski norm",
                q,
                "hyperboloid point must satisfy <x,x>_H = 1",
            ));
        }
        Ok(Self::rescale(x, q.sqrt()))
    }

    /// `(cosh ξ, sinh ξ·w)` for a Euclidean unit direction `w` of length N−1.
    pub fn from_polar(xi: f64, direction: &UnitVector) -> Result<Self> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::param("xi", xi, "must be finite and >= 0"));
        }
        let (c, s) = (xi.cosh(), xi.sinh());
        if !c.is_finite() {
            return Err(Error::Overflow("cosh of hyperbolic arc"));
        }
        let mut x = Vec::with_capacity(direction.dim() + 1);
        x.push(c);
        x.extend(direction.as_slice().iter().map(|w| s * w));
        Ok(HyperboloidPoint(x))
    }

    /// The apex `e₁`.
    pub fn apex(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param(
                "dimension",
                n as f64,
                "hyperboloid needs at least 2 coordinates",
            ));
        }
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        Ok(HyperboloidPoint(x))
    }

    fn rescale(mut x: Vec<f64>, r: f64) -> Self {
        if r != 1.0 {
            x.iter_mut().for_each(|v| *v /= r);
        }
        HyperboloidPoint(x)
    }

    pub(crate) fn from_raw(x: Vec<f64>) -> Self {
        HyperboloidPoint(x)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Re-checks `|⟨x,x⟩_H − 1| ≤ 1e−9` (relative to `x₁²` for far points)
    /// and `x₁ > 0`.
    pub fn is_normalized(&self) -> bool {
        let q = mdot(&self.0, &self.0);
        self.0[0] > 0.0 && (q - 1.0).abs() <= NORM_TOLERANCE * self.0[0].powi(2).max(1.0)
    }
}

/// Lorentz boost taking the apex `e₁` to `u`:
///
/// ```text
/// B = [[u₁, ũᵀ], [ũ, I + ũũᵀ/(1+u₁)]]
/// ```
///
/// with `ũ = (u₂,…,u_N)`. Applied in O(N) without forming `B`.
#[derive(Debug, Clone)]
pub struct LorentzBoost {
    u: Vec<f64>,
}

impl LorentzBoost {
    pub fn new(u: &HyperboloidPoint) -> Self {
        LorentzBoost { u: u.0.clone() }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `B·x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        same_len(x, &self.u)?;
        let u1 = self.u[0];
        let tail = &self.u[1..];
        let tz = dot(tail, &x[1..]);
        let k = x[0] + tz / (1.0 + u1);
        let mut out = Vec::with_capacity(x.len());
        out.push(u1 * x[0] + tz);
        out.extend(tail.iter().zip(&x[1..]).map(|(ui, zi)| zi + ui * k));
        Ok(out)
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.u.len();
        let u1 = self.u[0];
        Matrix::from_fn(n, |i, j| match (i, j) {
            (0, 0) => u1,
            (0, j) => self.u[j],
            (i, 0) => self.u[i],
            (i, j) => {
                let d = if i == j { 1.0 } else { 0.0 };
                d + self.u[i] * self.u[j] / (1.0 + u1)
            }
        })
    }
}

/// Dense matrix of the boost taking `e₁` to `u`.
pub fn lorentz_boost_from_e1(u: &HyperboloidPoint) -> Matrix {
    LorentzBoost::new(u).to_matrix()
}
