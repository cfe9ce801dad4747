//! The full benchmark protocol: 32x16x16 cantilever, volume fraction 0.2,
//! penalization 3.0, filter radius 4.0, exactly 200 iterations, with the
//! per-phase timing breakdown. Expect a couple of minutes of runtime.
//!
//!     cargo run --release --example benchmark

use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;
use topo3d::run::PHASE_NAMES;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let mut problem = ProblemDefinition::cantilever(32, 16, 16, 0.2, 3.0, 4.0);
    problem.max_iter = 200;
    problem.change_tol = 0.0; // run the full 200 iterations

    let (density, trace) = run_optimization(&problem).expect("optimization");

    let totals = trace.phase_totals();
    let seconds = [totals.0, totals.1, totals.2, totals.3];
    let sum: f64 = seconds.iter().sum();
    println!("\nphase breakdown over {} iterations:", trace.iterations.len());
    for (name, s) in PHASE_NAMES.iter().zip(seconds) {
        println!("  {name:<9} {s:8.2} s  ({:5.1}%)", 100.0 * s / sum);
    }
    println!("  total     {sum:8.2} s");
    println!(
        "final compliance {:.6e}, volume {:.4}",
        trace.iterations.last().unwrap().compliance,
        density.designable_volume_fraction()
    );
}
