//! The fixed-seed self-test battery.
//!
//! Each criterion either runs seeded simulations and compares them with the
//! predictors, or checks a predictor against an independent oracle on
//! randomly generated inputs. The CSV summary contains no timings, so two
//! runs produce identical bytes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::pnorm_pi;
use crate::montecarlo::{
    compare, estimate, estimate_with_workers, predict, CompareOptions, ComparisonReport,
    Experiment, ExperimentSpec, FlatObservable, OperatorObservable, Verdict,
};
use crate::oracle;
use crate::predictors::{
    flat_fourth_moment, flat_sigma, flat_sigma_bound, gaussian_abs_moment, gaussian_sq_std,
    hyperbolic_sigma, kappa_cosine_product, operator_expected_cosine, operator_product_cosine,
    pnorm_proposition_bounds, sphere_expected_cosine, sphere_sigma, CurvaturePath, CurvatureStep,
    MonomialKind,
};
use crate::sampling::{RandomStream, Spectrum};
use crate::schedule::StepSchedule;

const SEED: u64 = 0x00C0_FFEE;

/// Identifier and short title of every criterion.
pub const CRITERIA: [(u8, &str); 14] = [
    (1, "sphere mean"),
    (2, "sphere standard deviation"),
    (3, "sphere variance recursion vs expanded sum"),
    (4, "right-angle barrier"),
    (5, "flat mean, deviation and fourth moment"),
    (6, "flat deviation bound"),
    (7, "single random operator"),
    (8, "product of random operators"),
    (9, "hyperbolic mean and deviation"),
    (10, "sphere monomial integrals"),
    (11, "coordinate marginal moments"),
    (12, "curvature products and norm inequalities"),
    (13, "probability Lp norms and Gaussian moments"),
    (14, "determinism"),
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryOptions {
    /// Worker threads for simulations; `None` uses the global pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2}: {} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }
}

fn title(id: u8) -> String {
    CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| t.to_string())
        .unwrap_or_default()
}

struct Ctx {
    options: BatteryOptions,
}

impl Ctx {
    fn run(
        &self,
        experiment: Experiment,
        trials: u64,
        seed: u64,
        options: CompareOptions,
    ) -> Result<ComparisonReport> {
        let spec = ExperimentSpec::new(experiment, trials, seed);
        let est = match self.options.workers {
            Some(w) => estimate_with_workers(&spec, w)?,
            None => estimate(&spec)?,
        };
        compare(&predict(&spec.experiment)?, &est, &options)
    }
}

fn z_only(z: f64) -> CompareOptions {
    CompareOptions {
        z_threshold: z,
        std_tolerance: f64::INFINITY,
        require_std: false,
    }
}

fn summary(r: &ComparisonReport) -> String {
    format!(
        "pred={:.6} mc={:.6} se={:.2e} z={:+.2}",
        r.prediction.mean, r.estimate.mean, r.estimate.std_error, r.z_mean
    )
}

fn within(ratio: Option<f64>, lo: f64, hi: f64) -> bool {
    ratio.is_some_and(|r| (lo..=hi).contains(&r))
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn seed(id: u8, k: u64) -> u64 {
    SEED + 100 * id as u64 + k
}

fn sphere_acceptance() -> Experiment {
    Experiment::Sphere {
        n_dim: 200,
        angles: StepSchedule::from_degrees(&[60.0; 5]),
    }
}

fn criterion_1(ctx: &Ctx) -> Result<(bool, String)> {
    let r = ctx.run(sphere_acceptance(), 100_000, seed(1, 0), z_only(4.0))?;
    let exact = (r.prediction.mean - 0.03125).abs() < 1e-15;
    Ok((exact && r.z_mean.abs() <= 4.0, summary(&r)))
}

fn criterion_2(ctx: &Ctx) -> Result<(bool, String)> {
    let a = ctx.run(sphere_acceptance(), 100_000, seed(2, 0), z_only(4.0))?;
    let b_exp = Experiment::Sphere {
        n_dim: 101,
        angles: StepSchedule::from_degrees(&[90.0, 90.0]),
    };
    let b = ctx.run(b_exp, 100_000, seed(2, 1), z_only(4.0))?;
    let ratio_b = b.estimate.sample_std / 0.1;
    let ok = within(a.std_ratio, 0.9, 1.1) && (0.95..=1.05).contains(&ratio_b);
    Ok((
        ok,
        format!(
            "std/sigma={:.4} (N=200, 60deg x5); std/0.1={:.4} (N=101, 90deg x2)",
            a.std_ratio.unwrap_or(f64::NAN),
            ratio_b
        ),
    ))
}

fn criterion_3(_: &Ctx) -> Result<(bool, String)> {
    let mut rng = RandomStream::new(seed(3, 0), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=8);
        let n = rng.random_range(3..=1000);
        let thetas: Vec<f64> = (0..m)
            .map(|_| rng.random_range(0.0..=std::f64::consts::PI))
            .collect();
        let s = sphere_sigma(&StepSchedule::new(thetas.clone()), n)?;
        let oracle = oracle::sphere_sigma_sq_expanded(&thetas, n);
        let err = if oracle == 0.0 {
            s * s
        } else {
            rel_err(s * s, oracle)
        };
        worst = worst.max(err);
    }
    Ok((
        worst <= 1e-12,
        format!("max relative error {worst:.2e} over 1000 schedules"),
    ))
}

fn criterion_4(ctx: &Ctx) -> Result<(bool, String)> {
    let schedules: [&[f64]; 4] = [
        &[90.0],
        &[30.0, 90.0, 45.0],
        &[90.0, 90.0, 120.0],
        &[10.0, 20.0, 170.0, 90.0],
    ];
    let zero = schedules
        .iter()
        .all(|s| sphere_expected_cosine(&StepSchedule::from_degrees(s)).is_ok_and(|p| p == 0.0));
    let mut ok = zero;
    let mut parts = Vec::new();
    for (k, s) in schedules.iter().enumerate() {
        let exp = Experiment::Sphere {
            n_dim: 50,
            angles: StepSchedule::from_degrees(s),
        };
        let trials = if k == 0 { 1000 } else { 100_000 };
        let r = ctx.run(exp, trials, seed(4, k as u64), z_only(5.0))?;
        ok &= r.verdict == Verdict::Pass;
        parts.push(format!("z={:+.2}", r.z_mean));
    }
    Ok((
        ok,
        format!("predictions exactly 0: {zero}; {}", parts.join(" ")),
    ))
}

fn criterion_5(ctx: &Ctx) -> Result<(bool, String)> {
    let exp = Experiment::Flat {
        n_dim: 500,
        steps: StepSchedule::repeated(1.0, 10),
        observable: FlatObservable::SqNorm,
    };
    let r = ctx.run(exp, 100_000, seed(5, 0), z_only(4.0))?;
    let ratio = r.estimate.sample_std / (4.0 * 45.0 / 500.0f64).sqrt();
    let mut rng = RandomStream::new(seed(5, 1), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(0..=12);
        let n = rng.random_range(2..=10_000);
        let ds: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
        let rec = flat_fourth_moment(&StepSchedule::new(ds.clone()), n)?;
        let closed = oracle::flat_fourth_moment_double_sum(&ds, n);
        worst = worst.max(if closed == 0.0 {
            rec.abs()
        } else {
            rel_err(rec, closed)
        });
    }
    let ok = r.prediction.mean == 10.0
        && r.z_mean.abs() <= 4.0
        && (0.9..=1.1).contains(&ratio)
        && worst <= 1e-12;
    Ok((
        ok,
        format!(
            "{}; std/sigma={ratio:.4}; fourth moment max rel err {worst:.2e}",
            summary(&r)
        ),
    ))
}

fn criterion_6(_: &Ctx) -> Result<(bool, String)> {
    let mut rng = RandomStream::new(seed(6, 0), 0);
    let mut worst = f64::NEG_INFINITY;
    let mut long = 0usize;
    for k in 0..10_000 {
        let m = rng.random_range(0..=30);
        let n = if k % 4 == 0 {
            rng.random_range(2..=40)
        } else {
            rng.random_range(2..=5000)
        };
        if m > n {
            long += 1;
        }
        let ds = StepSchedule::new((0..m).map(|_| rng.random_range(0.0..5.0)).collect());
        let bound = flat_sigma_bound(&ds, n)?;
        let sigma = flat_sigma(&ds, n)?;
        if bound > 0.0 {
            worst = worst.max(sigma / bound);
        } else if sigma > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok((
        worst <= 1.0 + 1e-12,
        format!(
            "max sigma/bound {worst:.6} over 10000 cases ({long} with more steps than dimensions)"
        ),
    ))
}

fn linear_spectrum(n: usize) -> Spectrum {
    Spectrum::new((1..=n).map(|j| j as f64 / n as f64).collect()).expect("finite spectrum")
}

fn criterion_7(ctx: &Ctx) -> Result<(bool, String)> {
    let s = linear_spectrum(400);
    let n = 400.0f64;
    let p2 = ((n + 1.0) * (2.0 * n + 1.0) / (6.0 * n * n)).sqrt();
    let cos = (n + 1.0) / (2.0 * n) / p2;
    let norm = ctx.run(
        Experiment::Operator {
            spectrum: s.clone(),
            observable: OperatorObservable::NormRatio,
        },
        10_000,
        seed(7, 0),
        z_only(4.0),
    )?;
    let cosine = ctx.run(
        Experiment::Operator {
            spectrum: s,
            observable: OperatorObservable::Cosine,
        },
        10_000,
        seed(7, 1),
        z_only(4.0),
    )?;
    let oracle_ok =
        rel_err(norm.prediction.mean, p2) < 1e-13 && rel_err(cosine.prediction.mean, cos) < 1e-13;
    let ok = oracle_ok && norm.z_mean.abs() <= 4.0 && cosine.z_mean.abs() <= 4.0;
    Ok((
        ok,
        format!("norm ratio {}; cosine {}", summary(&norm), summary(&cosine)),
    ))
}

fn criterion_8(ctx: &Ctx) -> Result<(bool, String)> {
    let s = linear_spectrum(400);
    let single = operator_expected_cosine(&s)?;
    let r = ctx.run(
        Experiment::OperatorProduct {
            spectra: vec![s.clone(), s],
            observable: OperatorObservable::Cosine,
        },
        10_000,
        seed(8, 0),
        z_only(5.0),
    )?;
    let squared = rel_err(r.prediction.mean, single * single) < 1e-14;
    let mut rng = RandomStream::new(seed(8, 1), 0);
    let mut min = f64::INFINITY;
    for _ in 0..10_000 {
        let factors = rng.random_range(1..=4);
        let n = rng.random_range(1..=20);
        let spectra: Vec<Spectrum> = (0..factors)
            .map(|_| {
                let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
                v[0] += 1e-3;
                Spectrum::new(v).expect("finite spectrum")
            })
            .collect();
        min = min.min(operator_product_cosine(&spectra)?);
    }
    let ok = squared && r.z_mean.abs() <= 5.0 && min >= 0.0;
    Ok((
        ok,
        format!(
            "{}; min PSD prediction {min:.3e} over 10000 cases",
            summary(&r)
        ),
    ))
}

fn criterion_9(ctx: &Ctx) -> Result<(bool, String)> {
    let exp = Experiment::Hyperbolic {
        n_dim: 300,
        arcs: StepSchedule::repeated(1.0, 3),
    };
    let r = ctx.run(exp, 100_000, seed(9, 0), z_only(4.0))?;
    let exact = rel_err(r.prediction.mean, 1f64.cosh().powi(3)) < 1e-14;
    let mut rng = RandomStream::new(seed(9, 1), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let m = rng.random_range(0..=10);
        let n = rng.random_range(3..=2000);
        let xis: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..3.0)).collect();
        let s = hyperbolic_sigma(&StepSchedule::new(xis.clone()), n)?.sigma;
        let oracle = oracle::hyperbolic_sigma_sq_subsets(&xis, n);
        worst = worst.max(if oracle == 0.0 {
            s * s
        } else {
            rel_err(s * s, oracle)
        });
    }
    let ok = exact && r.z_mean.abs() <= 4.0 && within(r.std_ratio, 0.9, 1.1) && worst <= 1e-10;
    Ok((
        ok,
        format!(
            "{}; std/sigma={:.4}; subset oracle max rel err {worst:.2e}",
            summary(&r),
            r.std_ratio.unwrap_or(f64::NAN)
        ),
    ))
}

fn criterion_10(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (kind, exact)) in [
        (MonomialKind::X1Fourth, 0.025),
        (MonomialKind::X1SqX2Sq, 1.0 / 120.0),
    ]
    .into_iter()
    .enumerate()
    {
        let r = ctx.run(
            Experiment::Monomial { n_dim: 10, kind },
            1_000_000,
            seed(10, k as u64),
            z_only(4.0),
        )?;
        ok &= rel_err(r.prediction.mean, exact) < 1e-15 && r.z_mean.abs() <= 4.0;
        parts.push(format!("{kind}: {}", summary(&r)));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_11(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=4u32 {
        let power = 2 * k;
        let r = ctx.run(
            Experiment::Marginal { n_dim: 100, power },
            100_000,
            seed(11, k as u64),
            z_only(4.0),
        )?;
        let quad = oracle::marginal_moment_quadrature(100, power);
        ok &= rel_err(r.prediction.mean, quad) < 1e-8 && r.z_mean.abs() <= 4.0;
        parts.push(format!("t^{power}: z={:+.2}", r.z_mean));
    }
    Ok((ok, parts.join(" ")))
}

fn criterion_12(_: &Ctx) -> Result<(bool, String)> {
    let mut rng = RandomStream::new(seed(12, 0), 0);
    let mut violations = 0usize;
    for _ in 0..100_000 {
        let len = rng.random_range(1..=64);
        let v: Vec<f64> = (0..len).map(|_| 1.0 - rng.random::<f64>()).collect();
        if !pnorm_proposition_bounds(&v)?.holds(1e-12) {
            violations += 1;
        }
    }
    let mut max_cos: f64 = 0.0;
    let mut min_cos: f64 = 1.0;
    let mut equal_err: f64 = 0.0;
    for _ in 0..10_000 {
        let steps = rng.random_range(1..=5);
        let width = rng.random_range(1..=16);
        let equal = rng.random_bool(0.5);
        let path = CurvaturePath::new(
            (0..steps)
                .map(|_| {
                    let d = rng.random_range(0.0..3.0);
                    let kappas = if equal {
                        vec![rng.random_range(-0.3..5.0); width]
                    } else {
                        (0..width).map(|_| rng.random_range(-0.3..5.0)).collect()
                    };
                    CurvatureStep::new(d, kappas)
                })
                .collect(),
        )?;
        let c = kappa_cosine_product(&path)?;
        max_cos = max_cos.max(c);
        min_cos = min_cos.min(c);
        if equal {
            equal_err = equal_err.max((c - 1.0).abs());
        }
    }
    let ok = violations == 0 && max_cos <= 1.0 && min_cos > 0.0 && equal_err <= 1e-12;
    Ok((
        ok,
        format!(
            "{violations} violations in 100000 vectors; cosine products in [{min_cos:.4}, {max_cos}]; equal-entry error {equal_err:.1e}"
        ),
    ))
}

fn criterion_13(_: &Ctx) -> Result<(bool, String)> {
    let mut rng = RandomStream::new(seed(13, 0), 0);
    let mut violations = 0usize;
    for _ in 0..100_000 {
        let len = rng.random_range(1..=64);
        let x: Vec<f64> = (0..len).map(|_| rng.standard_normal()).collect();
        let p1 = rng.random_range(1.0..8.0);
        let p2 = rng.random_range(p1..=8.0);
        let (a, b) = (pnorm_pi(&x, p1)?, pnorm_pi(&x, p2)?);
        let (n1, n2, n4) = (pnorm_pi(&x, 1.0)?, pnorm_pi(&x, 2.0)?, pnorm_pi(&x, 4.0)?);
        let le = |u: f64, v: f64| u <= v * (1.0 + 1e-12);
        if !(le(a, b) && le(n1, n2) && le(n2, n4)) {
            violations += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for p in [1.0, 3.0, 4.0] {
        worst =
            worst.max((gaussian_abs_moment(p)? - oracle::gaussian_abs_moment_quadrature(p)).abs());
    }
    let exact = gaussian_abs_moment(2.0)? == 1.0 && gaussian_sq_std() == 2f64.sqrt();
    let ok = violations == 0 && exact && worst <= 1e-8;
    Ok((
        ok,
        format!("{violations} monotonicity violations in 100000 vectors; quadrature max abs err {worst:.1e}"),
    ))
}

fn run_one(ctx: &Ctx, id: u8) -> CriterionOutcome {
    let result = match id {
        1 => criterion_1(ctx),
        2 => criterion_2(ctx),
        3 => criterion_3(ctx),
        4 => criterion_4(ctx),
        5 => criterion_5(ctx),
        6 => criterion_6(ctx),
        7 => criterion_7(ctx),
        8 => criterion_8(ctx),
        9 => criterion_9(ctx),
        10 => criterion_10(ctx),
        11 => criterion_11(ctx),
        12 => criterion_12(ctx),
        13 => criterion_13(ctx),
        _ => Ok((false, "unknown criterion".to_string())),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        title: title(id),
        passed,
        detail,
    }
}

/// Runs one of the statistical or oracle criteria (1 to 13).
pub fn run_criterion(id: u8, options: &BatteryOptions) -> CriterionOutcome {
    run_one(&Ctx { options: *options }, id)
}

/// Runs criteria 1 to 13, calling `on_result` after each.
pub fn run_checks(
    options: &BatteryOptions,
    mut on_result: impl FnMut(&CriterionOutcome),
) -> Vec<CriterionOutcome> {
    let ctx = Ctx { options: *options };
    (1..=13)
        .map(|id| {
            let outcome = run_one(&ctx, id);
            on_result(&outcome);
            outcome
        })
        .collect()
}

/// Reruns criteria 1 to 13 and compares the CSV summary with `first`.
pub fn determinism_check(first: &[CriterionOutcome], options: &BatteryOptions) -> CriterionOutcome {
    let second = run_checks(options, |_| {});
    let (a, b) = (to_csv(first), to_csv(&second));
    let passed = a == b;
    CriterionOutcome {
        id: 14,
        title: title(14),
        passed,
        detail: format!(
            "second run {} ({} bytes)",
            if passed { "byte-identical" } else { "differs" },
            a.len()
        ),
    }
}

/// Criteria 1 to 13 followed by the determinism rerun.
pub fn run_battery(
    options: &BatteryOptions,
    mut on_result: impl FnMut(&CriterionOutcome),
) -> Vec<CriterionOutcome> {
    let mut outcomes = run_checks(options, &mut on_result);
    let det = determinism_check(&outcomes, options);
    on_result(&det);
    outcomes.push(det);
    outcomes
}

/// `criterion,title,verdict,detail` with one row per outcome.
pub fn to_csv(outcomes: &[CriterionOutcome]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["criterion", "title", "verdict", "detail"])
        .expect("writing to memory");
    for o in outcomes {
        w.write_record([
            o.id.to_string(),
            o.title.clone(),
            if o.passed { "pass" } else { "fail" }.to_string(),
            o.detail.clone(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}
