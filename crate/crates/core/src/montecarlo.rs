//! Seeded Monte Carlo estimation and comparison against predictions.
//!
//! Trial `i` draws from the substream `(seed, i)`. Trials are grouped into
//! fixed chunks of [`CHUNK`] indices, moments are accumulated per chunk and
//! the chunks are merged in index order, so the estimate does not depend on
//! how many workers ran it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{run_flat_chain, run_hyperbolic_chain, run_operator_product, run_sphere_chain};
use crate::error::{Error, Result};
use crate::geometry::{HyperboloidPoint, UnitVector};
use crate::numeric::integrate;
use crate::predictors::{
    coordinate_marginal_density, flat_norm_prediction, flat_prediction, hyperbolic_prediction,
    monomial_integral, operator_product_cosine, operator_product_norm, sphere_monomial_moment,
    sphere_prediction, Deviation, MonomialKind, Prediction,
};
use crate::sampling::{uniform_unit_sphere, RandomStream, Spectrum};
use crate::schedule::StepSchedule;

/// Trials per accumulation chunk.
pub const CHUNK: u64 = 256;

/// Which function of the flat walk's endpoint is observed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatObservable {
    #[default]
    SqNorm,
    Norm,
}

/// Which function of `A_M⋯A₁u` is observed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorObservable {
    #[default]
    Cosine,
    NormRatio,
}

impl FlatObservable {
    pub fn as_str(self) -> &'static str {
        match self {
            FlatObservable::SqNorm => "sq_norm",
            FlatObservable::Norm => "norm",
        }
    }
}

impl OperatorObservable {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorObservable::Cosine => "cosine",
            OperatorObservable::NormRatio => "norm_ratio",
        }
    }
}

impl FromStr for FlatObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sq_norm" => Ok(FlatObservable::SqNorm),
            "norm" => Ok(FlatObservable::Norm),
            other => Err(Error::invalid(
                "observable",
                format!("unknown flat observable {other:?}; expected sq_norm or norm"),
            )),
        }
    }
}

impl FromStr for OperatorObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(OperatorObservable::Cosine),
            "norm_ratio" | "norm" => Ok(OperatorObservable::NormRatio),
            other => Err(Error::invalid(
                "observable",
                format!("unknown operator observable {other:?}; expected cosine or norm_ratio"),
            )),
        }
    }
}

/// A random experiment whose scalar outcome has a closed-form prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// `⟨u_M,u₀⟩` for a walk on `S^(n−1)` with the given angles.
    Sphere { n_dim: usize, angles: StepSchedule },
    /// `‖x_M‖²` or `‖x_M‖` for a walk in `ℝⁿ` from the origin.
    Flat {
        n_dim: usize,
        steps: StepSchedule,
        #[serde(default)]
        observable: FlatObservable,
    },
    /// `⟨u_M,u₀⟩_H` for a walk on the hyperboloid in `ℝⁿ`.
    Hyperbolic { n_dim: usize, arcs: StepSchedule },
    /// One random symmetric operator with a fixed spectrum applied to `e₁`.
    Operator {
        spectrum: Spectrum,
        #[serde(default)]
        observable: OperatorObservable,
    },
    /// `A_M⋯A₁e₁`, each factor independent.
    OperatorProduct {
        spectra: Vec<Spectrum>,
        #[serde(default)]
        observable: OperatorObservable,
    },
    /// A monomial at a uniform point of `S^(n−1)`.
    Monomial { n_dim: usize, kind: MonomialKind },
    /// `x₁^power` at a uniform point of `S^(n−1)`.
    Marginal { n_dim: usize, power: u32 },
}

/// Highest marginal moment accepted.
pub const MAX_MARGINAL_POWER: u32 = 16;

impl Experiment {
    pub fn geometry(&self) -> &'static str {
        match self {
            Experiment::Sphere { .. } => "sphere",
            Experiment::Flat { .. } => "flat",
            Experiment::Hyperbolic { .. } => "hyperbolic",
            Experiment::Operator { .. } => "operator",
            Experiment::OperatorProduct { .. } => "operator_product",
            Experiment::Monomial { .. } => "monomial",
            Experiment::Marginal { .. } => "marginal",
        }
    }

    /// Name of the observed quantity.
    pub fn observable(&self) -> String {
        match self {
            Experiment::Sphere { .. } => "cosine".into(),
            Experiment::Flat { observable, .. } => observable.as_str().into(),
            Experiment::Hyperbolic { .. } => "cosh".into(),
            Experiment::Operator { observable, .. }
            | Experiment::OperatorProduct { observable, .. } => observable.as_str().into(),
            Experiment::Monomial { kind, .. } => kind.as_str().into(),
            Experiment::Marginal { power, .. } => format!("x1^{power}"),
        }
    }

    pub fn n_dim(&self) -> usize {
        match self {
            Experiment::Sphere { n_dim, .. }
            | Experiment::Flat { n_dim, .. }
            | Experiment::Hyperbolic { n_dim, .. }
            | Experiment::Monomial { n_dim, .. }
            | Experiment::Marginal { n_dim, .. } => *n_dim,
            Experiment::Operator { spectrum, .. } => spectrum.len(),
            Experiment::OperatorProduct { spectra, .. } => spectra.first().map_or(0, Spectrum::len),
        }
    }

    /// Checks every parameter without running anything.
    pub fn validate(&self) -> Result<()> {
        let need = |n: usize, min: usize, reason: &'static str| {
            if n < min {
                Err(Error::param("n_dim", n as f64, reason))
            } else {
                Ok(())
            }
        };
        match self {
            Experiment::Sphere { n_dim, angles } => {
                need(*n_dim, 3, "sphere walks need n_dim >= 3")?;
                angles.validate_angles()
            }
            Experiment::Flat { n_dim, steps, .. } => {
                need(*n_dim, 2, "flat walks need n_dim >= 2")?;
                steps.validate_lengths()
            }
            Experiment::Hyperbolic { n_dim, arcs } => {
                need(*n_dim, 3, "hyperbolic walks need n_dim >= 3")?;
                arcs.validate_arcs()
            }
            Experiment::Operator { spectrum, .. } => {
                need(spectrum.len(), 2, "operators need n_dim >= 2")
            }
            Experiment::OperatorProduct { spectra, .. } => {
                let Some(first) = spectra.first() else {
                    return Err(Error::invalid("spectra", "at least one factor is required"));
                };
                need(first.len(), 2, "operators need n_dim >= 2")?;
                match spectra.iter().find(|s| s.len() != first.len()) {
                    Some(bad) => Err(Error::DimensionMismatch {
                        left: first.len(),
                        right: bad.len(),
                    }),
                    None => Ok(()),
                }
            }
            Experiment::Monomial { n_dim, kind } => monomial_integral(*kind, *n_dim).map(|_| ()),
            Experiment::Marginal { n_dim, power } => {
                need(*n_dim, 3, "marginal moments need n_dim >= 3")?;
                if *power == 0 || *power > MAX_MARGINAL_POWER {
                    return Err(Error::param("power", *power as f64, "must be in 1..=16"));
                }
                Ok(())
            }
        }
    }

    /// Draws one outcome.
    pub fn trial(&self, rng: &mut RandomStream) -> Result<f64> {
        match self {
            Experiment::Sphere { n_dim, angles } => {
                let u0 = UnitVector::basis(*n_dim, 0)?;
                Ok(run_sphere_chain(&u0, angles, rng)?.observable)
            }
            Experiment::Flat {
                n_dim,
                steps,
                observable,
            } => {
                let sq = run_flat_chain(steps, *n_dim, rng)?.observable;
                Ok(match observable {
                    FlatObservable::SqNorm => sq,
                    FlatObservable::Norm => sq.sqrt(),
                })
            }
            Experiment::Hyperbolic { n_dim, arcs } => {
                let u0 = HyperboloidPoint::apex(*n_dim)?;
                Ok(run_hyperbolic_chain(&u0, arcs, rng)?.observable)
            }
            Experiment::Operator {
                spectrum,
                observable,
            } => operator_trial(std::slice::from_ref(spectrum), *observable, rng),
            Experiment::OperatorProduct {
                spectra,
                observable,
            } => operator_trial(spectra, *observable, rng),
            Experiment::Monomial { n_dim, kind } => {
                Ok(kind.eval(uniform_unit_sphere(*n_dim, rng)?.as_slice()))
            }
            Experiment::Marginal { n_dim, power } => {
                Ok(uniform_unit_sphere(*n_dim, rng)?.as_slice()[0].powi(*power as i32))
            }
        }
    }
}

fn operator_trial(
    spectra: &[Spectrum],
    observable: OperatorObservable,
    rng: &mut RandomStream,
) -> Result<f64> {
    let u0 = UnitVector::basis(spectra[0].len(), 0)?;
    let r = run_operator_product(spectra, &u0, rng)?;
    match observable {
        OperatorObservable::NormRatio => Ok(r.norm_ratio),
        OperatorObservable::Cosine => r
            .cosine
            .ok_or(Error::Degenerate("operator product annihilated the vector")),
    }
}

/// `∫ t^p ρ_n(t) dt` for the coordinate marginal density `ρ_n`.
pub fn marginal_moment(n: usize, power: u32) -> Result<f64> {
    coordinate_marginal_density(0.0, n)?;
    if power % 2 == 1 {
        return Ok(0.0);
    }
    let density = |t: f64| coordinate_marginal_density(t, n).unwrap_or(0.0);
    Ok(integrate(
        |t| t.powi(power as i32) * density(t),
        -1.0,
        1.0,
        1e-14,
    ))
}

/// Closed-form prediction for an experiment's observable.
pub fn predict(experiment: &Experiment) -> Result<Prediction> {
    experiment.validate()?;
    let prediction = match experiment {
        Experiment::Sphere { n_dim, angles } => sphere_prediction(angles, *n_dim)?,
        Experiment::Flat {
            n_dim,
            steps,
            observable,
        } => match observable {
            FlatObservable::SqNorm => flat_prediction(steps, *n_dim)?,
            FlatObservable::Norm => flat_norm_prediction(steps)?,
        },
        Experiment::Hyperbolic { n_dim, arcs } => hyperbolic_prediction(arcs, *n_dim)?,
        Experiment::Operator {
            spectrum,
            observable,
        } => operator_prediction(std::slice::from_ref(spectrum), *observable, "O(1/sqrt(N))")?,
        Experiment::OperatorProduct {
            spectra,
            observable,
        } => operator_prediction(spectra, *observable, "O(sqrt(M)/sqrt(N))")?,
        Experiment::Monomial { n_dim, kind } => {
            let mean = monomial_integral(*kind, *n_dim)?;
            let doubled: Vec<u32> = kind.half_powers().iter().map(|a| 2 * a).collect();
            let second = sphere_monomial_moment(&doubled, *n_dim)?;
            Prediction::new(mean, Deviation::Absolute, "exact expectation")
                .with_sigma((second - mean * mean).max(0.0).sqrt())
        }
        Experiment::Marginal { n_dim, power } => {
            let mean = marginal_moment(*n_dim, *power)?;
            let second = marginal_moment(*n_dim, 2 * power)?;
            Prediction::new(mean, Deviation::Absolute, "exact expectation")
                .with_sigma((second - mean * mean).max(0.0).sqrt())
        }
    };
    if !prediction.mean.is_finite() || prediction.sigma_exact.is_some_and(|s| !s.is_finite()) {
        return Err(Error::Overflow("prediction"));
    }
    Ok(prediction)
}

fn operator_prediction(
    spectra: &[Spectrum],
    observable: OperatorObservable,
    order: &str,
) -> Result<Prediction> {
    Ok(match observable {
        OperatorObservable::NormRatio => {
            Prediction::new(operator_product_norm(spectra), Deviation::Relative, order)
        }
        OperatorObservable::Cosine => Prediction::new(
            operator_product_cosine(spectra)?,
            Deviation::Absolute,
            order,
        ),
    })
}

/// An experiment together with its trial count and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, trials: u64, seed: u64) -> Self {
        ExperimentSpec {
            experiment,
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", 0.0, "must be >= 1"));
        }
        self.experiment.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Unbiased sample standard deviation; 0 for a single trial.
    pub sample_std: f64,
    /// `sample_std / √trials`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Too few trials to estimate a spread.
    pub fn insufficient(&self) -> bool {
        self.trials < 2
    }
}

/// Streaming mean and centered second moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

fn run_chunk(spec: &ExperimentSpec, chunk: u64) -> Result<Moments> {
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(spec.trials);
    let mut moments = Moments::default();
    for index in start..end {
        let mut rng = RandomStream::new(spec.seed, index);
        moments.push(spec.experiment.trial(&mut rng)?);
    }
    Ok(moments)
}

/// Runs the trials on the current rayon pool.
pub fn estimate(spec: &ExperimentSpec) -> Result<MonteCarloEstimate> {
    spec.validate()?;
    let chunks = spec.trials.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(spec, c))
        .collect();
    let mut total = Moments::default();
    for part in parts {
        total = total.merge(part?);
    }
    if !total.mean.is_finite() || !total.m2.is_finite() {
        return Err(Error::Overflow("Monte Carlo moments"));
    }
    let sample_std = if total.count < 2 {
        0.0
    } else {
        (total.m2.max(0.0) / (total.count - 1) as f64).sqrt()
    };
    Ok(MonteCarloEstimate {
        mean: total.mean,
        sample_std,
        std_error: sample_std / (total.count as f64).sqrt(),
        trials: total.count,
        seed: spec.seed,
    })
}

/// Runs the trials on a dedicated pool of `workers` threads. The result is
/// the same for every worker count.
pub fn estimate_with_workers(spec: &ExperimentSpec, workers: usize) -> Result<MonteCarloEstimate> {
    if workers == 0 {
        return Err(Error::param("workers", 0.0, "must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    pool.install(|| estimate(spec))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub z_threshold: f64,
    pub std_tolerance: f64,
    /// Report `indeterminate` when no exact σ is available to check.
    pub require_std: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            z_threshold: 4.0,
            std_tolerance: 0.1,
            require_std: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub prediction: Prediction,
    pub estimate: MonteCarloEstimate,
    /// `(mc_mean − mean)/std_error`. With zero standard error the difference
    /// is either within rounding (0) or infinite.
    pub z_mean: f64,
    /// `sample_std / sigma_exact` when `sigma_exact > 0`.
    pub std_ratio: Option<f64>,
    pub verdict: Verdict,
}

/// Slack for comparing a deterministic outcome with its prediction.
fn rounding_slack(x: f64) -> f64 {
    64.0 * f64::EPSILON * x.abs().max(1.0)
}

pub fn compare(
    prediction: &Prediction,
    estimate: &MonteCarloEstimate,
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    if !(options.z_threshold > 0.0) {
        return Err(Error::param(
            "z_threshold",
            options.z_threshold,
            "must be > 0",
        ));
    }
    if !(options.std_tolerance >= 0.0) {
        return Err(Error::param(
            "std_tolerance",
            options.std_tolerance,
            "must be >= 0",
        ));
    }
    if estimate.insufficient() && prediction.sigma_exact != Some(0.0) {
        return Err(Error::InsufficientTrials(format!(
            "{} trial(s) cannot resolve a nonzero spread",
            estimate.trials
        )));
    }
    let diff = estimate.mean - prediction.mean;
    let z_mean = if estimate.std_error > 0.0 {
        diff / estimate.std_error
    } else if diff.abs() <= rounding_slack(prediction.mean) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let std_ratio = prediction
        .sigma_exact
        .filter(|s| *s > 0.0)
        .map(|s| estimate.sample_std / s);
    let mean_ok = z_mean.abs() <= options.z_threshold;
    let std_ok = std_ratio.is_none_or(|r| (r - 1.0).abs() <= options.std_tolerance);
    let verdict = if !(mean_ok && std_ok) {
        Verdict::Fail
    } else if options.require_std && prediction.sigma_exact.is_none() {
        Verdict::Indeterminate
    } else {
        Verdict::Pass
    };
    Ok(ComparisonReport {
        prediction: prediction.clone(),
        estimate: *estimate,
        z_mean,
        std_ratio,
        verdict,
    })
}
