//! Explicit boundary conditions instead of the built-in cantilever: a beam
//! simply supported at both bottom edges, loaded at the top center. The same
//! JSON works on the command line via `--bc-config`.
//!
//!     cargo run --release --example custom_boundary_conditions

use topo3d::optimizer::run_optimization;
use topo3d::problem::{BcSpec, ExplicitBc, ProblemDefinition};

const BC: &str = r#"{
    "fixed_nodes": [
        {"ix": [0, 0],   "iy": [0, 8], "iz": [0, 0], "dofs": "all"},
        {"ix": [24, 24], "iy": [0, 8], "iz": [0, 0], "dofs": ["z"]}
    ],
    "loads": [
        {"node": [12, 4, 8], "dof": "z", "value": -1.0}
    ]
}"#;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let bc: ExplicitBc = serde_json::from_str(BC).expect("bc json");
    let mut problem = ProblemDefinition::cantilever(24, 8, 8, 0.3, 3.0, 2.5);
    problem.bc = BcSpec::Explicit(bc);
    problem.max_iter = 60;

    let (_, trace) = run_optimization(&problem).expect("optimization");
    let last = trace.iterations.last().unwrap();
    println!(
        "{} iterations, final compliance {:.6e}",
        last.iter, last.compliance
    );
}
