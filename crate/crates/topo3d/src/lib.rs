//! 3D density-based topology optimization on structured hexahedral grids.
//!
//! Minimizes compliance under a volume constraint with the SIMP material
//! interpolation and an optimality-criteria update. Supports obstacle
//! regions, STL-defined design domains, STL export of optimized topologies
//! and a phase-timed benchmark harness.
//!
//! The `examples/` directory has one runnable example per capability; the
//! `topo3d` binary wraps the same pipeline behind command-line flags.
//!
//! ```no_run
//! use topo3d::problem::ProblemDefinition;
//! use topo3d::optimizer::run_optimization;
//!
//! let problem = ProblemDefinition::cantilever(32, 16, 16, 0.2, 3.0, 4.0);
//! let (density, trace) = run_optimization(&problem).unwrap();
//! println!("final compliance: {}", trace.iterations.last().unwrap().compliance);
//! let stl = topo3d::geometry::export_stl(&density, (32, 16, 16), 0.5).unwrap();
//! std::fs::write("result.stl", stl).unwrap();
//! ```

pub mod cli;
pub mod error;
pub mod fem;
pub mod filter;
pub mod geometry;
pub mod mesh;
pub mod optimizer;
pub mod problem;
pub mod run;

pub use error::{Result, TopoError};
