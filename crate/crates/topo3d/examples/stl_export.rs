//! Exports an optimized density field as a watertight binary STL at several
//! thresholds. Lower thresholds keep more intermediate-density material.
//!
//!     cargo run --release --example stl_export

use topo3d::geometry::{export_stl, parse_stl};
use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let mut problem = ProblemDefinition::cantilever(20, 10, 10, 0.3, 3.0, 2.5);
    problem.max_iter = 60;
    let (density, _) = run_optimization(&problem).expect("optimization");

    for threshold in [0.3, 0.5, 0.7] {
        let bytes = export_stl(&density, (20, 10, 10), threshold).expect("export");
        let tris = parse_stl(&bytes).unwrap().triangles.len();
        let name = format!("cantilever_t{:02}.stl", (threshold * 10.0) as u32);
        std::fs::write(&name, &bytes).expect("write");
        println!("threshold {threshold}: {tris} triangles -> {name}");
    }
}
