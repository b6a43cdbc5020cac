use std::fs;
use std::process::{Command, Output};

use concentrate::report::{read_csv, ReportRow};
use concentrate::Verdict;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concentrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn rows(out: &Output) -> Vec<ReportRow> {
    assert_eq!(
        code(out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    read_csv(out.stdout.as_slice()).expect("csv parses")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn predict_sphere_in_degrees() {
    let r = rows(&run(&[
        "predict",
        "--geometry",
        "sphere",
        "--n-dim",
        "200",
        "--angles",
        "60,60",
        "--angle-unit",
        "degrees",
    ]));
    assert_eq!(r.len(), 1);
    assert!((r[0].prediction_mean.unwrap() - 0.25).abs() < 1e-15);
    assert!(r[0].sigma_exact.is_some() && r[0].sigma_bound.is_some());
    assert!(r[0].order.as_deref().unwrap().starts_with("O("));
    // Stored schedules are in radians.
    assert!(r[0].schedule.starts_with("1.0471975511965976e0"));
}

#[test]
fn predict_flat_norm_without_dimension() {
    let r = rows(&run(&["predict", "--geometry", "flat", "--steps", "3,4"]));
    let norm = r.iter().find(|row| row.observable == "norm").unwrap();
    assert_eq!(norm.prediction_mean, Some(5.0));
    assert_eq!(norm.n_dim, None);
    let sq = r.iter().find(|row| row.observable == "sq_norm").unwrap();
    assert_eq!(sq.prediction_mean, Some(25.0));
}

#[test]
fn predict_hyperbolic_cosh_squared() {
    let r = rows(&run(&[
        "predict",
        "--geometry",
        "hyperbolic",
        "--n-dim",
        "300",
        "--arcs",
        "1,1",
    ]));
    let expected = 1f64.cosh().powi(2);
    assert!((r[0].prediction_mean.unwrap() - expected).abs() < 1e-14);
    assert!((r[0].prediction_mean.unwrap() - 2.381098).abs() < 1e-6);
}

#[test]
fn predict_kappa_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kappa.txt");
    fs::write(&path, "# d k1 k2\n1 1 3\n0.5 0 0\n").unwrap();
    let r = rows(&run(&[
        "predict",
        "--geometry",
        "kappa",
        "--curvature-file",
        path.to_str().unwrap(),
    ]));
    let norm = r
        .iter()
        .find(|row| row.observable == "norm_product")
        .unwrap();
    assert!((norm.prediction_mean.unwrap() - (5.0f64 / 32.0).sqrt()).abs() < 1e-15);
    let cos = r
        .iter()
        .find(|row| row.observable == "cosine_product")
        .unwrap();
    assert!((cos.prediction_mean.unwrap() - 0.948683).abs() < 1e-6);
}

#[test]
fn simulate_right_angle_is_deterministic() {
    let r = rows(&run(&[
        "simulate",
        "--geometry",
        "sphere",
        "--n-dim",
        "40",
        "--angles",
        "90",
        "--angle-unit",
        "degrees",
        "--trials",
        "64",
        "--seed",
        "11",
    ]));
    assert_eq!(r[0].mc_mean, Some(std::f64::consts::FRAC_PI_2.cos()));
    assert_eq!(r[0].mc_std, Some(0.0));
    assert_eq!(r[0].prediction_mean, None);
    assert_eq!(r[0].verdict, None);
}

#[test]
fn single_trial_is_flagged() {
    let r = rows(&run(&[
        "simulate",
        "--geometry",
        "sphere",
        "--n-dim",
        "40",
        "--angles",
        "1",
        "--trials",
        "1",
        "--seed",
        "5",
    ]));
    assert_eq!(r[0].std_error, Some(0.0));
    assert_eq!(r[0].note.as_deref(), Some("insufficient trials"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let out = run(&[
            "simulate",
            "--geometry",
            "hyperbolic",
            "--n-dim",
            "30",
            "--arcs",
            "0.3,0.2,0.1",
            "--trials",
            "3000",
            "--seed",
            "99",
            "--workers",
            workers,
            "--output-path",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn compare_passes_and_fails() {
    let base = [
        "compare",
        "--geometry",
        "sphere",
        "--n-dim",
        "200",
        "--angles",
        "60,60,60,60,60",
        "--angle-unit",
        "degrees",
        "--trials",
        "20000",
        "--seed",
        "1",
    ];
    let r = rows(&run(&base));
    assert_eq!(r[0].verdict, Some(Verdict::Pass));
    assert!(r[0].z_mean.is_some() && r[0].std_ratio.is_some());

    let mut wrong = base.to_vec();
    wrong.extend(["--expect-mean", "0.9"]);
    let out = run(&wrong);
    assert_eq!(code(&out), 1);
    let r = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(r[0].verdict, Some(Verdict::Fail));
    assert_eq!(r[0].prediction_mean, Some(0.9));
}

#[test]
fn table_over_step_counts() {
    let r = rows(&run(&[
        "table",
        "--geometry",
        "flat",
        "--n-dim",
        "100",
        "--steps",
        "1",
        "--sweep-m",
        "1,2,3,4,5,6,7,8,9,10",
        "--observable",
        "sq_norm",
        "--trials",
        "2000",
        "--seed",
        "4",
    ]));
    assert_eq!(r.len(), 10);
    for (m, row) in (1..=10).zip(&r) {
        assert_eq!(row.prediction_mean, Some(m as f64));
        assert!((row.mc_mean.unwrap() - m as f64).abs() < 0.1 * m as f64);
    }
}

#[test]
fn table_sweep_axis_errors() {
    let both = run(&[
        "table",
        "--geometry",
        "flat",
        "--n-dim",
        "10",
        "--steps",
        "1",
        "--sweep-m",
        "1,2",
        "--sweep-n-dim",
        "5,6",
    ]);
    assert_eq!(code(&both), 2);
    assert!(stderr(&both).contains("--sweep"));
    let empty = run(&[
        "table",
        "--geometry",
        "flat",
        "--n-dim",
        "10",
        "--steps",
        "1",
        "--sweep-m",
        "",
    ]);
    assert_eq!(code(&empty), 2);
    assert!(stderr(&empty).contains("--sweep-m"));
}

#[test]
fn config_errors_name_the_field() {
    let missing = run(&["predict", "--geometry", "sphere", "--n-dim", "20"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("--angles"));

    let bad = run(&[
        "predict",
        "--geometry",
        "hyperbolic",
        "--n-dim",
        "20",
        "--arcs",
        "1,oops",
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("--arcs"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"geometry":"sphere","n_dim":20,"angle":[1.0]}"#).unwrap();
    let unknown = run(&["predict", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("angle"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"geometry":"sphere","n_dim":20,"angles":[0.5,0.5]}"#,
    )
    .unwrap();
    let r = rows(&run(&[
        "predict",
        "--config",
        cfg.to_str().unwrap(),
        "--n-dim",
        "80",
    ]));
    assert_eq!(r[0].n_dim, Some(80));
    assert!((r[0].prediction_mean.unwrap() - 0.5f64.cos().powi(2)).abs() < 1e-15);
}

#[test]
fn overflow_exits_numeric() {
    let out = run(&[
        "predict",
        "--geometry",
        "hyperbolic",
        "--n-dim",
        "3",
        "--arcs",
        "800,800",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn csv_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dir.path().join("spectrum.txt");
    let values: String = (1..=40).map(|j| format!("{}\n", j as f64 / 40.0)).collect();
    fs::write(&spectrum, values).unwrap();
    let out = run(&[
        "compare",
        "--geometry",
        "operator",
        "--spectra-file",
        spectrum.to_str().unwrap(),
        "--observable",
        "cosine",
        "--trials",
        "500",
        "--seed",
        "8",
    ]);
    let r = read_csv(out.stdout.as_slice()).unwrap();
    let experiment = r[0].to_experiment().unwrap();
    let again = concentrate::report::to_csv_string(&r);
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
    assert_eq!(experiment.n_dim(), 40);
}

#[test]
fn json_output_has_schema_fields() {
    let out = run(&[
        "simulate",
        "--geometry",
        "flat",
        "--n-dim",
        "10",
        "--steps",
        "1,2",
        "--trials",
        "50",
        "--seed",
        "2",
        "--output",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let line = String::from_utf8(out.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    for key in [
        "experiment",
        "geometry",
        "n_dim",
        "schedule",
        "trials",
        "seed",
        "mc_mean",
        "mc_std",
        "std_error",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}
