//! Compares the two sensitivity filter modes on the same problem.
//!
//! `DensityWeighted` is the classical sensitivity filter (weights carry the
//! neighbor densities, divisor includes the local density); `Plain` is a
//! straight row-normalized average of the raw sensitivities.
//!
//!     cargo run --release --example filter_modes

use topo3d::filter::FilterMode;
use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    for mode in [FilterMode::DensityWeighted, FilterMode::Plain] {
        let mut problem = ProblemDefinition::cantilever(16, 8, 8, 0.3, 3.0, 2.0);
        problem.filter_mode = mode;
        problem.max_iter = 80;

        let (density, trace) = run_optimization(&problem).expect("optimization");
        let last = trace.iterations.last().unwrap();
        let gray = density
            .rho
            .iter()
            .filter(|&&r| r > 0.1 && r < 0.9)
            .count();
        println!(
            "{mode:?}: {} iterations, compliance {:.6e}, {gray} gray elements",
            last.iter, last.compliance
        );
    }
}
