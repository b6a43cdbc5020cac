use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::check_dim;
use crate::error::{Error, Result};

/// The low-degree monomials averaged over the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialKind {
    #[serde(rename = "x1_sq")]
    X1Sq,
    #[serde(rename = "x1_4")]
    X1Fourth,
    #[serde(rename = "x1sq_x2sq")]
    X1SqX2Sq,
}

impl MonomialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MonomialKind::X1Sq => "x1_sq",
            MonomialKind::X1Fourth => "x1_4",
            MonomialKind::X1SqX2Sq => "x1sq_x2sq",
        }
    }

    /// Half the exponent of each coordinate that appears.
    pub fn half_powers(self) -> &'static [u32] {
        match self {
            MonomialKind::X1Sq => &[1],
            MonomialKind::X1Fourth => &[2],
            MonomialKind::X1SqX2Sq => &[1, 1],
        }
    }

    /// Evaluates the monomial at a point.
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            MonomialKind::X1Sq => x[0] * x[0],
            MonomialKind::X1Fourth => x[0].powi(4),
            MonomialKind::X1SqX2Sq => x[0] * x[0] * x[1] * x[1],
        }
    }

    fn min_dim(self) -> usize {
        match self {
            MonomialKind::X1SqX2Sq => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for MonomialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MonomialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1_sq" => Ok(MonomialKind::X1Sq),
            "x1_4" => Ok(MonomialKind::X1Fourth),
            "x1sq_x2sq" => Ok(MonomialKind::X1SqX2Sq),
            other => Err(Error::invalid(
                "monomial",
                format!("unknown kind {other:?}; expected x1_sq, x1_4 or x1sq_x2sq"),
            )),
        }
    }
}

/// `∫ x^(2a) dω` over the unit sphere in ℝⁿ for a multi-index of half powers:
/// `Π (2aᵢ−1)!! / Π_{i<K} (n + 2i)` with `K = Σ aᵢ`.
pub fn sphere_monomial_moment(half_powers: &[u32], n: usize) -> Result<f64> {
    check_dim(n, 2)?;
    if half_powers.len() > n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: half_powers.len(),
        });
    }
    let mut num = 1.0;
    let mut total = 0;
    for &a in half_powers {
        for j in 0..a {
            num *= (2 * j + 1) as f64;
        }
        total += a;
    }
    let den: f64 = (0..total).map(|i| (n + 2 * i as usize) as f64).product();
    Ok(num / den)
}

/// `1/n`, `3/(n(n+2))` or `1/(n(n+2))`.
pub fn monomial_integral(kind: MonomialKind, n: usize) -> Result<f64> {
    check_dim(n, kind.min_dim())?;
    sphere_monomial_moment(kind.half_powers(), n)
}

/// `Z_n = Γ(n/2) / (√π Γ((n−1)/2))`.
pub fn marginal_normalizer(n: usize) -> Result<f64> {
    check_dim(n, 2)?;
    if n <= 400 {
        // Z₂ = 1/π, Z₃ = 1/2 and Z_{k+2} = Z_k·k/(k−1).
        let (mut z, mut k) = if n.is_multiple_of(2) {
            (1.0 / PI, 2)
        } else {
            (0.5, 3)
        };
        while k < n {
            z *= k as f64 / (k as f64 - 1.0);
            k += 2;
        }
        return Ok(z);
    }
    let n = n as f64;
    Ok((ln_gamma(n / 2.0) - ln_gamma((n - 1.0) / 2.0)).exp() / PI.sqrt())
}

/// Density of one coordinate of a uniform point on the sphere in ℝⁿ:
/// `Z_n (1 − t²)^((n−3)/2)`. For `n = 2` it is infinite at `t = ±1`.
pub fn coordinate_marginal_density(t: f64, n: usize) -> Result<f64> {
    let z = marginal_normalizer(n)?;
    if !(t.abs() <= 1.0) {
        return Err(Error::param("t", t, "must lie in [-1, 1]"));
    }
    if n == 3 {
        return Ok(z);
    }
    let base = (1.0 - t) * (1.0 + t);
    Ok(z * base.powf((n as f64 - 3.0) / 2.0))
}

/// `E|x|^p` for `x ~ N(0,1)`.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", p, "must be finite and >= 1"));
    }
    if p.fract() == 0.0 && p <= 100.0 {
        let k = p as u32;
        return Ok(if k.is_multiple_of(2) {
            (1..k).step_by(2).map(f64::from).product()
        } else {
            let h = (k - 1) / 2;
            FRAC_2_PI.sqrt() * 2f64.powi(h as i32) * (1..=h).map(f64::from).product::<f64>()
        });
    }
    Ok((p / 2.0 * std::f64::consts::LN_2 + ln_gamma((p + 1.0) / 2.0)).exp() / PI.sqrt())
}

/// Standard deviation of `x²` for `x ~ N(0,1)`.
pub fn gaussian_sq_std() -> f64 {
    SQRT_2
}
