//! Tabular output of predictions, estimates and comparisons.
//!
//! Scalars are written with 17 significant digits. Step schedules are
//! `;`-joined radians or lengths; for operator products the spectra are
//! `|`-separated.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{
    ComparisonReport, Experiment, FlatObservable, MonteCarloEstimate, OperatorObservable, Verdict,
};
use crate::predictors::{MonomialKind, Prediction};
use crate::sampling::Spectrum;
use crate::schedule::StepSchedule;

pub const COLUMNS: [&str; 19] = [
    "experiment",
    "geometry",
    "n_dim",
    "schedule",
    "trials",
    "seed",
    "prediction_mean",
    "sigma_exact",
    "sigma_bound",
    "mc_mean",
    "mc_std",
    "std_error",
    "z_mean",
    "std_ratio",
    "verdict",
    "observable",
    "deviation",
    "order",
    "note",
];

pub const INSUFFICIENT_TRIALS: &str = "insufficient trials";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub geometry: String,
    /// Empty when the prediction does not depend on the dimension.
    pub n_dim: Option<usize>,
    pub schedule: String,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub prediction_mean: Option<f64>,
    pub sigma_exact: Option<f64>,
    pub sigma_bound: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_std: Option<f64>,
    pub std_error: Option<f64>,
    pub z_mean: Option<f64>,
    pub std_ratio: Option<f64>,
    pub verdict: Option<Verdict>,
    pub observable: String,
    pub deviation: Option<String>,
    pub order: Option<String>,
    pub note: Option<String>,
}

impl ReportRow {
    fn base(label: &str, experiment: &Experiment) -> Self {
        ReportRow {
            experiment: label.to_string(),
            geometry: experiment.geometry().to_string(),
            n_dim: Some(experiment.n_dim()),
            schedule: schedule_cell(experiment),
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
            observable: experiment.observable(),
            deviation: None,
            order: None,
            note: None,
        }
    }

    fn set_prediction(&mut self, p: &Prediction) {
        self.prediction_mean = Some(p.mean);
        self.sigma_exact = p.sigma_exact;
        self.sigma_bound = p.sigma_bound;
        self.deviation = Some(p.deviation.as_str().to_string());
        self.order = Some(p.order.clone());
    }

    fn set_estimate(&mut self, e: &MonteCarloEstimate) {
        self.trials = Some(e.trials);
        self.seed = Some(e.seed);
        self.mc_mean = Some(e.mean);
        self.mc_std = Some(e.sample_std);
        self.std_error = Some(e.std_error);
        if e.insufficient() {
            self.note = Some(INSUFFICIENT_TRIALS.to_string());
        }
    }

    pub fn from_prediction(label: &str, experiment: &Experiment, p: &Prediction) -> Self {
        let mut row = Self::base(label, experiment);
        row.set_prediction(p);
        row
    }

    pub fn from_estimate(label: &str, experiment: &Experiment, e: &MonteCarloEstimate) -> Self {
        let mut row = Self::base(label, experiment);
        row.set_estimate(e);
        row
    }

    pub fn from_report(label: &str, experiment: &Experiment, r: &ComparisonReport) -> Self {
        let mut row = Self::base(label, experiment);
        row.set_prediction(&r.prediction);
        row.set_estimate(&r.estimate);
        row.z_mean = Some(r.z_mean);
        row.std_ratio = r.std_ratio;
        row.verdict = Some(r.verdict);
        row
    }

    /// Rebuilds the experiment the row describes.
    pub fn to_experiment(&self) -> Result<Experiment> {
        let n_dim = self.n_dim.unwrap_or(0);
        let values = || parse_values(&self.schedule);
        let experiment = match self.geometry.as_str() {
            "sphere" => Experiment::Sphere {
                n_dim,
                angles: values()?,
            },
            "flat" => Experiment::Flat {
                n_dim,
                steps: values()?,
                observable: self.observable.parse::<FlatObservable>()?,
            },
            "hyperbolic" => Experiment::Hyperbolic {
                n_dim,
                arcs: values()?,
            },
            "operator" => Experiment::Operator {
                spectrum: Spectrum::new(values()?.as_slice().to_vec())?,
                observable: self.observable.parse::<OperatorObservable>()?,
            },
            "operator_product" => Experiment::OperatorProduct {
                spectra: self
                    .schedule
                    .split('|')
                    .map(|part| Spectrum::new(parse_values(part)?.as_slice().to_vec()))
                    .collect::<Result<_>>()?,
                observable: self.observable.parse::<OperatorObservable>()?,
            },
            "monomial" => Experiment::Monomial {
                n_dim,
                kind: self.schedule.parse::<MonomialKind>()?,
            },
            "marginal" => Experiment::Marginal {
                n_dim,
                power: self.schedule.parse().map_err(|_| {
                    Error::invalid("schedule", format!("bad power {:?}", self.schedule))
                })?,
            },
            other => {
                return Err(Error::invalid(
                    "geometry",
                    format!("unknown geometry {other:?}"),
                ));
            }
        };
        experiment.validate()?;
        Ok(experiment)
    }

    fn to_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(format_scalar).unwrap_or_default();
        let int = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.experiment.clone(),
            self.geometry.clone(),
            self.n_dim.map(|n| n.to_string()).unwrap_or_default(),
            self.schedule.clone(),
            int(self.trials),
            int(self.seed),
            opt(self.prediction_mean),
            opt(self.sigma_exact),
            opt(self.sigma_bound),
            opt(self.mc_mean),
            opt(self.mc_std),
            opt(self.std_error),
            opt(self.z_mean),
            opt(self.std_ratio),
            self.verdict
                .map(|v| v.as_str().to_string())
                .unwrap_or_default(),
            self.observable.clone(),
            self.deviation.clone().unwrap_or_default(),
            self.order.clone().unwrap_or_default(),
            self.note.clone().unwrap_or_default(),
        ]
    }

    fn from_record(record: &csv::StringRecord) -> Result<Self> {
        if record.len() != COLUMNS.len() {
            return Err(Error::invalid(
                "csv",
                format!("expected {} columns, found {}", COLUMNS.len(), record.len()),
            ));
        }
        let text = |i: usize| record[i].to_string();
        let opt_text = |i: usize| (!record[i].is_empty()).then(|| text(i));
        let scalar = |i: usize| -> Result<Option<f64>> {
            opt_text(i)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::invalid(COLUMNS[i], format!("not a number: {s:?}")))
                })
                .transpose()
        };
        let int = |i: usize| -> Result<Option<u64>> {
            opt_text(i)
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| Error::invalid(COLUMNS[i], format!("not an integer: {s:?}")))
                })
                .transpose()
        };
        let verdict = match &record[14] {
            "" => None,
            "pass" => Some(Verdict::Pass),
            "fail" => Some(Verdict::Fail),
            "indeterminate" => Some(Verdict::Indeterminate),
            other => {
                return Err(Error::invalid(
                    "verdict",
                    format!("unknown verdict {other:?}"),
                ))
            }
        };
        Ok(ReportRow {
            experiment: text(0),
            geometry: text(1),
            n_dim: int(2)?.map(|n| n as usize),
            schedule: text(3),
            trials: int(4)?,
            seed: int(5)?,
            prediction_mean: scalar(6)?,
            sigma_exact: scalar(7)?,
            sigma_bound: scalar(8)?,
            mc_mean: scalar(9)?,
            mc_std: scalar(10)?,
            std_error: scalar(11)?,
            z_mean: scalar(12)?,
            std_ratio: scalar(13)?,
            verdict,
            observable: text(15),
            deviation: opt_text(16),
            order: opt_text(17),
            note: opt_text(18),
        })
    }
}

/// 17 significant digits; `inf`, `-inf` and `NaN` for non-finite values.
pub fn format_scalar(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format_scalar(*v))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_values(cell: &str) -> Result<StepSchedule> {
    if cell.trim().is_empty() {
        return Ok(StepSchedule::new(Vec::new()));
    }
    cell.split(';')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("schedule", format!("not a number: {s:?}")))
        })
        .collect()
}

/// The `schedule` cell for an experiment.
pub fn schedule_cell(experiment: &Experiment) -> String {
    match experiment {
        Experiment::Sphere { angles: s, .. }
        | Experiment::Flat { steps: s, .. }
        | Experiment::Hyperbolic { arcs: s, .. } => join(s.as_slice()),
        Experiment::Operator { spectrum, .. } => join(spectrum.values()),
        Experiment::OperatorProduct { spectra, .. } => spectra
            .iter()
            .map(|s| join(s.values()))
            .collect::<Vec<_>>()
            .join("|"),
        Experiment::Monomial { kind, .. } => kind.as_str().to_string(),
        Experiment::Marginal { power, .. } => power.to_string(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid("csv", e.to_string())
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.to_record()).map_err(csv_error)?;
    }
    w.flush()
        .map_err(|e| Error::invalid("output", e.to_string()))
}

pub fn to_csv_string(rows: &[ReportRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::invalid("csv", "unexpected header"));
    }
    r.records()
        .map(|rec| ReportRow::from_record(&rec.map_err(csv_error)?))
        .collect()
}

/// One JSON object per line.
pub fn write_json_lines<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    for row in rows {
        let line = serde_json::to_string(row).map_err(|e| Error::invalid("json", e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::invalid("output", e.to_string()))?;
    }
    Ok(())
}

/// Aligned `field  value` blocks, one per row.
pub fn write_pretty<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    let width = COLUMNS.iter().map(|c| c.len()).max().unwrap_or(0);
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            writeln!(out).map_err(|e| Error::invalid("output", e.to_string()))?;
        }
        for (name, value) in COLUMNS.iter().zip(row.to_record()) {
            if value.is_empty() {
                continue;
            }
            let value = if *name == "schedule" && value.len() > 60 {
                format!("{}... ({} chars)", &value[..57], value.len())
            } else {
                value
            };
            writeln!(out, "{name:<width$}  {value}")
                .map_err(|e| Error::invalid("output", e.to_string()))?;
        }
    }
    Ok(())
}
