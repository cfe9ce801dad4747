//! Obstacle shapes and design/passive mask construction.
//!
//! Obstacle coordinates are normalized to [0,1]^3 over the domain box so the
//! same JSON works at any grid resolution. Membership is a centroid test.
//!
//! JSON schema:
//! ```json
//! {"shapes": [
//!   {"type": "cylinder", "axis": "y", "center": [0.5, 0.5, 0.5],
//!    "radius": 0.15, "height": 1.0},
//!   {"type": "box", "min": [0.0, 0.0, 0.0], "max": [0.2, 1.0, 1.0]},
//!   {"type": "sphere", "center": [0.8, 0.5, 0.5], "radius": 0.1}
//! ]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopoError};
use crate::geometry::voxel::VoxelGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Box { min: [f64; 3], max: [f64; 3] },
    Sphere { center: [f64; 3], radius: f64 },
    Cylinder {
        axis: Axis,
        center: [f64; 3],
        radius: f64,
        height: f64,
    },
}

impl Shape {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Shape::Box { min, max } => (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a]),
            Shape::Sphere { center, radius } => {
                let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
                d2 <= radius * radius
            }
            Shape::Cylinder {
                axis,
                center,
                radius,
                height,
            } => {
                let ai = axis.index();
                if (p[ai] - center[ai]).abs() > height / 2.0 {
                    return false;
                }
                let d2: f64 = (0..3)
                    .filter(|&a| a != ai)
                    .map(|a| (p[a] - center[a]).powi(2))
                    .sum();
                d2 <= radius * radius
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |v: &[f64]| v.iter().all(|&c| (0.0..=1.0).contains(&c));
        let bad = |msg: String| Err(TopoError::InvalidConfig(msg));
        match self {
            Shape::Box { min, max } => {
                if !in_unit(min) || !in_unit(max) {
                    return bad(format!("box corners must lie in [0,1]^3: {min:?} {max:?}"));
                }
                if !(0..3).all(|a| min[a] < max[a]) {
                    return bad(format!("box min must be below max: {min:?} {max:?}"));
                }
            }
            Shape::Sphere { center, radius } => {
                if !in_unit(center) {
                    return bad(format!("sphere center must lie in [0,1]^3: {center:?}"));
                }
                if !(*radius > 0.0) {
                    return bad(format!("sphere radius must be positive: {radius}"));
                }
            }
            Shape::Cylinder {
                center,
                radius,
                height,
                ..
            } => {
                if !in_unit(center) {
                    return bad(format!("cylinder center must lie in [0,1]^3: {center:?}"));
                }
                if !(*radius > 0.0) || !(*height > 0.0) {
                    return bad(format!(
                        "cylinder radius and height must be positive: r={radius} h={height}"
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub shapes: Vec<Shape>,
}

impl ObstacleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ObstacleSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.shapes {
            s.validate()?;
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.shapes.iter().any(|s| s.contains(p))
    }
}

/// Builds per-element design masks and passive values.
///
/// An element is passive-void when its centroid falls outside the domain
/// voxelization or inside any obstacle; obstacles take precedence over the
/// domain. With neither input every element is designable.
pub fn build_masks(
    domain: Option<&VoxelGrid>,
    obstacles: Option<&ObstacleSpec>,
    dims: (usize, usize, usize),
) -> Result<(Vec<bool>, Vec<f64>)> {
    let (nelx, nely, nelz) = dims;
    if let Some(g) = domain {
        if (g.nelx, g.nely, g.nelz) != dims {
            return Err(TopoError::InvalidConfig(format!(
                "domain voxelization is {}x{}x{}, grid is {nelx}x{nely}x{nelz}",
                g.nelx, g.nely, g.nelz
            )));
        }
    }
    let n = nelx * nely * nelz;
    let mut design = vec![true; n];
    let passive = vec![0.0; n];
    for ez in 0..nelz {
        for ex in 0..nelx {
            for ey in 0..nely {
                let e = ez * nelx * nely + ex * nely + ey;
                if let Some(g) = domain {
                    if !g.is_occupied(ex, ey, ez) {
                        design[e] = false;
                    }
                }
                if let Some(obs) = obstacles {
                    let p = [
                        (ex as f64 + 0.5) / nelx as f64,
                        (ey as f64 + 0.5) / nely as f64,
                        (ez as f64 + 0.5) / nelz as f64,
                    ];
                    if obs.contains(p) {
                        design[e] = false;
                    }
                }
            }
        }
    }
    if design.iter().all(|&d| !d) {
        return Err(TopoError::AllPassive);
    }
    Ok((design, passive))
}
