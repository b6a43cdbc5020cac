//! The five subcommands.

use std::collections::hash_map::RandomState;
use std::fs::File;
use std::hash::BuildHasher;
use std::io::{self, BufWriter, Write};

use concentrate::battery::{self, BatteryOptions};
use concentrate::predictors::{
    flat_expected_sq_norm, flat_norm_prediction, kappa_cosine_product, kappa_norm_product,
    CurvaturePath, MonomialKind,
};
use concentrate::report::{self, format_scalar, ReportRow};
use concentrate::{
    compare, estimate, estimate_with_workers, predict, CompareOptions, Deviation, Experiment,
    ExperimentSpec, FlatObservable, MonteCarloEstimate, OperatorObservable, Prediction, Spectrum,
    StepSchedule, Verdict,
};

use crate::config::{AngleUnit, Geometry, OutputFormat, RunConfig, DEFAULT_TRIALS};
use crate::error::{CliError, EXIT_FAIL, EXIT_PASS};
use crate::input::{read_column, read_curvature_file};

fn required<T: Clone>(value: &Option<T>, field: &str, geometry: Geometry) -> Result<T, CliError> {
    value.clone().ok_or_else(|| {
        CliError::usage(format!(
            "{field} is required for geometry {}",
            name(geometry)
        ))
    })
}

fn name(geometry: Geometry) -> &'static str {
    match geometry {
        Geometry::Sphere => "sphere",
        Geometry::Flat => "flat",
        Geometry::Hyperbolic => "hyperbolic",
        Geometry::Operator => "operator",
        Geometry::OperatorProduct => "operator_product",
        Geometry::Monomial => "monomial",
        Geometry::Marginal => "marginal",
        Geometry::Kappa => "kappa",
    }
}

fn geometry(cfg: &RunConfig) -> Result<Geometry, CliError> {
    cfg.geometry
        .ok_or_else(|| CliError::usage("--geometry is required"))
}

fn label(cfg: &RunConfig, geometry: Geometry) -> String {
    cfg.experiment
        .clone()
        .unwrap_or_else(|| name(geometry).to_string())
}

fn angles(cfg: &RunConfig) -> Result<StepSchedule, CliError> {
    let values = required(&cfg.angles, "--angles", Geometry::Sphere)?;
    Ok(match cfg.angle_unit.unwrap_or_default() {
        AngleUnit::Radians => StepSchedule::new(values),
        AngleUnit::Degrees => StepSchedule::from_degrees(&values),
    })
}

/// Spectra from files, the JSON `spectra` field or `--spectrum`, in that
/// order of preference, repeated to `--factors` when given.
fn spectra(cfg: &RunConfig, geometry: Geometry) -> Result<Vec<Spectrum>, CliError> {
    let (field, raw): (&str, Vec<Vec<f64>>) = if let Some(files) = &cfg.spectra_file {
        let columns = files
            .iter()
            .map(|p| read_column(p, "--spectra-file"))
            .collect::<Result<_, _>>()?;
        ("--spectra-file", columns)
    } else if let Some(s) = &cfg.spectra {
        ("spectra", s.clone())
    } else if let Some(s) = &cfg.spectrum {
        ("--spectrum", vec![s.clone()])
    } else {
        return Err(CliError::usage(format!(
            "--spectrum or --spectra-file is required for geometry {}",
            name(geometry)
        )));
    };
    if raw.is_empty() {
        return Err(CliError::usage(format!("{field}: no spectra given")));
    }
    let mut out = raw
        .into_iter()
        .map(|values| Spectrum::new(values).map_err(|e| CliError::field(field, e)))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = cfg.factors {
        if k == 0 {
            return Err(CliError::usage("--factors: must be at least 1"));
        }
        out = out.iter().cycle().take(k).cloned().collect();
    }
    if let Some(n) = cfg.n_dim {
        if let Some(bad) = out.iter().find(|s| s.len() != n) {
            return Err(CliError::usage(format!(
                "--n-dim: {n} does not match spectrum length {}",
                bad.len()
            )));
        }
    }
    Ok(out)
}

fn flat_observable(text: &str) -> Result<FlatObservable, CliError> {
    text.parse().map_err(|e| CliError::field("--observable", e))
}

fn operator_observable(text: &str) -> Result<OperatorObservable, CliError> {
    text.parse().map_err(|e| CliError::field("--observable", e))
}

/// Builds the experiment for one observable (`None` picks the default).
fn build(cfg: &RunConfig, observable: Option<&str>) -> Result<Experiment, CliError> {
    let g = geometry(cfg)?;
    let n_dim = || required(&cfg.n_dim, "--n-dim", g);
    let experiment = match g {
        Geometry::Sphere => Experiment::Sphere {
            n_dim: n_dim()?,
            angles: angles(cfg)?,
        },
        Geometry::Flat => Experiment::Flat {
            n_dim: n_dim()?,
            steps: StepSchedule::new(required(&cfg.steps, "--steps", g)?),
            observable: observable
                .map(flat_observable)
                .transpose()?
                .unwrap_or_default(),
        },
        Geometry::Hyperbolic => Experiment::Hyperbolic {
            n_dim: n_dim()?,
            arcs: StepSchedule::new(required(&cfg.arcs, "--arcs", g)?),
        },
        Geometry::Operator => {
            let mut s = spectra(cfg, g)?;
            if s.len() != 1 {
                return Err(CliError::usage(format!(
                    "--spectra-file: geometry operator takes one spectrum, got {}",
                    s.len()
                )));
            }
            Experiment::Operator {
                spectrum: s.remove(0),
                observable: observable
                    .map(operator_observable)
                    .transpose()?
                    .unwrap_or_default(),
            }
        }
        Geometry::OperatorProduct => Experiment::OperatorProduct {
            spectra: spectra(cfg, g)?,
            observable: observable
                .map(operator_observable)
                .transpose()?
                .unwrap_or_default(),
        },
        Geometry::Monomial => {
            let kind: MonomialKind = required(&cfg.monomial, "--monomial", g)?
                .parse()
                .map_err(|e| CliError::field("--monomial", e))?;
            Experiment::Monomial {
                n_dim: n_dim()?,
                kind,
            }
        }
        Geometry::Marginal => Experiment::Marginal {
            n_dim: n_dim()?,
            power: required(&cfg.moment, "--moment", g)?,
        },
        Geometry::Kappa => {
            return Err(CliError::usage(
                "--geometry: kappa has no simulation; use predict",
            ))
        }
    };
    experiment
        .validate()
        .map_err(|e| CliError::field("config", e))?;
    Ok(experiment)
}

/// The observable given on the command line, or every observable the
/// geometry offers.
fn observables(cfg: &RunConfig, g: Geometry) -> Vec<Option<String>> {
    if cfg.observable.is_some() {
        return vec![cfg.observable.clone()];
    }
    match g {
        Geometry::Flat => vec![Some("sq_norm".into()), Some("norm".into())],
        Geometry::Operator | Geometry::OperatorProduct => {
            vec![Some("norm_ratio".into()), Some("cosine".into())]
        }
        _ => vec![None],
    }
}

fn render(rows: &[ReportRow], cfg: &RunConfig) -> Result<(), CliError> {
    let format = cfg.output.unwrap_or_default();
    let write = |out: &mut dyn Write| -> concentrate::Result<()> {
        match format {
            OutputFormat::Csv => report::write_csv(rows, out),
            OutputFormat::Json => report::write_json_lines(rows, out),
            OutputFormat::Pretty => report::write_pretty(rows, out),
        }
    };
    match &cfg.output_path {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path).map_err(|e| {
                CliError::usage(format!(
                    "--output-path: cannot create {}: {e}",
                    path.display()
                ))
            })?);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or_else(|| {
        let s = RandomState::new().hash_one(0u64);
        eprintln!("no --seed given; using seed {s}");
        s
    })
}

fn run_estimate(
    cfg: &RunConfig,
    experiment: &Experiment,
    seed: u64,
) -> Result<MonteCarloEstimate, CliError> {
    let spec = ExperimentSpec::new(
        experiment.clone(),
        cfg.trials.unwrap_or(DEFAULT_TRIALS),
        seed,
    );
    spec.validate()
        .map_err(|e| CliError::field("--trials", e))?;
    Ok(match cfg.workers {
        Some(0) => return Err(CliError::usage("--workers: must be at least 1")),
        Some(w) => estimate_with_workers(&spec, w)?,
        None => estimate(&spec)?,
    })
}

fn compare_options(cfg: &RunConfig) -> CompareOptions {
    let mut opts = CompareOptions::default();
    if let Some(z) = cfg.z_threshold {
        opts.z_threshold = z;
    }
    if let Some(t) = cfg.std_tolerance {
        opts.std_tolerance = t;
    }
    opts
}

fn compare_row(
    cfg: &RunConfig,
    label: &str,
    experiment: &Experiment,
    seed: u64,
) -> Result<ReportRow, CliError> {
    let mut prediction = predict(experiment)?;
    if let Some(mean) = cfg.expect_mean {
        prediction.mean = mean;
    }
    let est = run_estimate(cfg, experiment, seed)?;
    let report = compare(&prediction, &est, &compare_options(cfg))
        .map_err(|e| CliError::field("compare", e))?;
    Ok(ReportRow::from_report(label, experiment, &report))
}

fn blank_row(label: &str, geometry: &str, observable: &str) -> ReportRow {
    ReportRow {
        experiment: label.to_string(),
        geometry: geometry.to_string(),
        n_dim: None,
        schedule: String::new(),
        trials: None,
        seed: None,
        prediction_mean: None,
        sigma_exact: None,
        sigma_bound: None,
        mc_mean: None,
        mc_std: None,
        std_error: None,
        z_mean: None,
        std_ratio: None,
        verdict: None,
        observable: observable.to_string(),
        deviation: None,
        order: None,
        note: None,
    }
}

fn set_prediction(row: &mut ReportRow, p: &Prediction) {
    row.prediction_mean = Some(p.mean);
    row.sigma_exact = p.sigma_exact;
    row.sigma_bound = p.sigma_bound;
    row.deviation = Some(p.deviation.as_str().to_string());
    row.order = Some(p.order.clone());
}

fn kappa_rows(cfg: &RunConfig, label: &str) -> Result<Vec<ReportRow>, CliError> {
    let path: CurvaturePath = read_curvature_file(&required(
        &cfg.curvature_file,
        "--curvature-file",
        Geometry::Kappa,
    )?)?;
    let width = path.steps()[0].kappas.len();
    let schedule = path
        .steps()
        .iter()
        .map(|s| {
            std::iter::once(s.d)
                .chain(s.kappas.iter().copied())
                .map(format_scalar)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(";");
    let order = "O(sqrt(M)/sqrt(N))";
    let entries = [
        (
            "norm_product",
            Prediction::new(kappa_norm_product(&path)?, Deviation::Relative, order),
        ),
        (
            "cosine_product",
            Prediction::new(kappa_cosine_product(&path)?, Deviation::Absolute, order),
        ),
    ];
    Ok(entries
        .iter()
        .filter(|(obs, _)| cfg.observable.as_deref().is_none_or(|o| o == *obs))
        .map(|(obs, p)| {
            let mut row = blank_row(label, "kappa", obs);
            row.n_dim = Some(width);
            row.schedule = schedule.clone();
            set_prediction(&mut row, p);
            row
        })
        .collect())
}

/// Flat predictions when no dimension is given: the mean of `‖x‖²` and
/// the concentration value of `‖x‖`.
fn flat_rows_without_dimension(cfg: &RunConfig, label: &str) -> Result<Vec<ReportRow>, CliError> {
    let steps = StepSchedule::new(required(&cfg.steps, "--steps", Geometry::Flat)?);
    steps
        .validate_lengths()
        .map_err(|e| CliError::field("--steps", e))?;
    let mut rows = Vec::new();
    for obs in observables(cfg, Geometry::Flat).into_iter().flatten() {
        let experiment = Experiment::Flat {
            n_dim: 0,
            steps: steps.clone(),
            observable: flat_observable(&obs)?,
        };
        let prediction = match experiment {
            Experiment::Flat {
                observable: FlatObservable::SqNorm,
                ..
            } => Prediction::new(
                flat_expected_sq_norm(&steps)?,
                Deviation::Relative,
                "O(1/sqrt(N))",
            ),
            _ => flat_norm_prediction(&steps)?,
        };
        let mut row = ReportRow::from_prediction(label, &experiment, &prediction);
        row.n_dim = None;
        rows.push(row);
    }
    Ok(rows)
}

pub fn predict_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    let g = geometry(cfg)?;
    let label = label(cfg, g);
    let rows = match g {
        Geometry::Kappa => kappa_rows(cfg, &label)?,
        Geometry::Flat if cfg.n_dim.is_none() => flat_rows_without_dimension(cfg, &label)?,
        _ => observables(cfg, g)
            .iter()
            .map(|obs| {
                let experiment = build(cfg, obs.as_deref())?;
                let p = predict(&experiment)?;
                Ok(ReportRow::from_prediction(&label, &experiment, &p))
            })
            .collect::<Result<Vec<_>, CliError>>()?,
    };
    render(&rows, cfg)?;
    Ok(EXIT_PASS)
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    let g = geometry(cfg)?;
    let experiment = build(cfg, cfg.observable.as_deref())?;
    let est = run_estimate(cfg, &experiment, seed(cfg))?;
    render(
        &[ReportRow::from_estimate(&label(cfg, g), &experiment, &est)],
        cfg,
    )?;
    Ok(EXIT_PASS)
}

pub fn compare_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    let g = geometry(cfg)?;
    let experiment = build(cfg, cfg.observable.as_deref())?;
    let row = compare_row(cfg, &label(cfg, g), &experiment, seed(cfg))?;
    let failed = row.verdict == Some(Verdict::Fail);
    render(&[row], cfg)?;
    Ok(if failed { EXIT_FAIL } else { EXIT_PASS })
}

fn with_n_dim(experiment: &Experiment, n: usize) -> Result<Experiment, CliError> {
    let mut e = experiment.clone();
    match &mut e {
        Experiment::Sphere { n_dim, .. }
        | Experiment::Flat { n_dim, .. }
        | Experiment::Hyperbolic { n_dim, .. }
        | Experiment::Monomial { n_dim, .. }
        | Experiment::Marginal { n_dim, .. } => *n_dim = n,
        _ => {
            return Err(CliError::usage(
                "--sweep-n-dim: operator dimensions come from the spectrum",
            ))
        }
    }
    e.validate()
        .map_err(|err| CliError::field("--sweep-n-dim", err))?;
    Ok(e)
}

fn with_steps(experiment: &Experiment, m: usize) -> Result<Experiment, CliError> {
    let field = "--sweep-m";
    let mut e = experiment.clone();
    match &mut e {
        Experiment::Sphere { angles: s, .. }
        | Experiment::Flat { steps: s, .. }
        | Experiment::Hyperbolic { arcs: s, .. } => {
            *s = s.cycled(m).map_err(|err| CliError::field(field, err))?
        }
        Experiment::OperatorProduct { spectra, .. } => {
            *spectra = spectra.iter().cycle().take(m).cloned().collect()
        }
        _ => {
            return Err(CliError::usage(format!(
                "{field}: geometry {} has no step schedule",
                e.geometry()
            )))
        }
    }
    e.validate().map_err(|err| CliError::field(field, err))?;
    Ok(e)
}

/// One comparison row per sweep point. Verdicts are reported, not enforced.
pub fn table_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    let g = geometry(cfg)?;
    let (field, points) = match (&cfg.sweep_n_dim, &cfg.sweep_m) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "--sweep-n-dim/--sweep-m: exactly one sweep axis is allowed",
            ))
        }
        (None, None) => {
            return Err(CliError::usage(
                "--sweep-n-dim/--sweep-m: one sweep axis is required",
            ))
        }
        (Some(v), None) => ("--sweep-n-dim", v),
        (None, Some(v)) => ("--sweep-m", v),
    };
    if points.is_empty() {
        return Err(CliError::usage(format!("{field}: empty sweep list")));
    }
    let mut base_cfg = cfg.clone();
    if field == "--sweep-n-dim" && base_cfg.n_dim.is_none() {
        base_cfg.n_dim = Some(points[0]);
    }
    let base = build(&base_cfg, cfg.observable.as_deref())?;
    let label = label(cfg, g);
    let seed = seed(cfg);
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let experiment = if field == "--sweep-n-dim" {
                with_n_dim(&base, p)?
            } else {
                with_steps(&base, p)?
            };
            compare_row(cfg, &label, &experiment, seed.wrapping_add(i as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    render(&rows, cfg)?;
    Ok(EXIT_PASS)
}

pub fn selftest_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    if cfg.workers == Some(0) {
        return Err(CliError::usage("--workers: must be at least 1"));
    }
    let options = BatteryOptions {
        workers: cfg.workers,
    };
    let outcomes = battery::run_battery(&options, |o| println!("{}", o.line()));
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if let Some(path) = &cfg.output_path {
        std::fs::write(path, battery::to_csv(&outcomes)).map_err(|e| {
            CliError::usage(format!(
                "--output-path: cannot write {}: {e}",
                path.display()
            ))
        })?;
    }
    Ok(if passed == outcomes.len() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}
