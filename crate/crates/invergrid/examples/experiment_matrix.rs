//! Runs the full six-run experiment grid (resistive and inductive feeders,
//! A2 in cpf / volt_var / volt_watt) and prints the summary report.

use invergrid::{emit_summary, experiment_matrix, run_scenario, MatrixRun, ScenarioSpec};
use std::time::Instant;

fn main() {
    let base = ScenarioSpec::paper_default();
    let start = Instant::now();
    let runs: Vec<MatrixRun> = experiment_matrix(&base)
        .into_iter()
        .map(|spec| {
            let records = run_scenario(&spec).expect("matrix run");
            MatrixRun { spec, records }
        })
        .collect();
    let elapsed = start.elapsed();

    print!("{}", emit_summary(&runs).expect("complete matrix"));
    println!("\n6 runs x {} steps in {elapsed:.2?}", runs[0].records.len());
}
