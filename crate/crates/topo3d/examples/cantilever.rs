//! Minimal end-to-end run: a small cantilever beam, default settings.
//!
//!     cargo run --release --example cantilever

use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let mut problem = ProblemDefinition::cantilever(16, 8, 8, 0.3, 3.0, 2.5);
    problem.max_iter = 60;

    let (density, trace) = run_optimization(&problem).expect("optimization");
    let last = trace.iterations.last().unwrap();
    println!(
        "converged after {} iterations: compliance {:.6e}, volume {:.4}",
        last.iter,
        last.compliance,
        density.designable_volume_fraction()
    );

    let solid = density.rho.iter().filter(|&&r| r > 0.5).count();
    println!(
        "{solid} of {} elements above the 0.5 threshold",
        density.rho.len()
    );
}
