//! Geometry processing: STL import/export, voxelization, obstacle masks.

pub mod obstacles;
pub mod stl;
pub mod voxel;

pub use obstacles::{build_masks, Axis, ObstacleSpec, Shape};
pub use stl::{export_stl, parse_stl, write_binary_stl, Triangle, TriangleMesh};
pub use voxel::{voxelize, voxelize_with_bounds, VoxelGrid};
