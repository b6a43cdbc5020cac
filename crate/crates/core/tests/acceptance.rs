use std::process::ExitCode;
use std::time::Instant;

use concentrate::battery::{determinism_check, run_criterion, BatteryOptions, CRITERIA};

fn main() -> ExitCode {
    let options = BatteryOptions::default();
    let start = Instant::now();
    let mut outcomes = Vec::new();
    for (id, _) in CRITERIA.iter().filter(|(id, _)| *id <= 13) {
        let t = Instant::now();
        let outcome = run_criterion(*id, &options);
        println!("{} ({:.1}s)", outcome.line(), t.elapsed().as_secs_f64());
        outcomes.push(outcome);
    }
    let t = Instant::now();
    let det = determinism_check(&outcomes, &options);
    println!("{} ({:.1}s)", det.line(), t.elapsed().as_secs_f64());
    outcomes.push(det);

    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} criteria passed in {:.1}s",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
