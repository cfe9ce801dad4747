//! Cantilever with a cylindrical keep-out region through the domain center.
//! Passive elements stay at density zero; the optimized structure routes
//! load paths around them. Writes `obstacle_result.stl`.
//!
//!     cargo run --release --example obstacle_cylinder

use topo3d::geometry::{export_stl, ObstacleSpec};
use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;

const OBSTACLES: &str = r#"{
    "shapes": [
        {"type": "cylinder", "axis": "y",
         "center": [0.5, 0.5, 0.5], "radius": 0.15, "height": 1.0}
    ]
}"#;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let mut problem = ProblemDefinition::cantilever(32, 16, 16, 0.2, 3.0, 4.0);
    problem.obstacles = Some(ObstacleSpec::from_json(OBSTACLES).expect("obstacle spec"));
    problem.max_iter = 80;

    let (density, trace) = run_optimization(&problem).expect("optimization");
    let passive = density.design_mask.iter().filter(|&&d| !d).count();
    println!(
        "{} iterations, {passive} passive elements, final compliance {:.6e}",
        trace.iterations.len(),
        trace.iterations.last().unwrap().compliance
    );

    let stl = export_stl(&density, (32, 16, 16), 0.5).expect("export");
    std::fs::write("obstacle_result.stl", stl).expect("write stl");
    println!("wrote obstacle_result.stl");
}
