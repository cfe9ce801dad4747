//! Fully resolved optimization problem: grid, material, boundary
//! conditions, masks and loop parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopoError};
use crate::fem::{BoundarySetup, MaterialModel, SolverConfig};
use crate::filter::FilterMode;
use crate::geometry::{build_masks, ObstacleSpec, VoxelGrid};
use crate::mesh::GridMesh;
use crate::optimizer::OcParams;

/// Which degrees of freedom a node-range constraint pins.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DofSelection {
    All(AllKeyword),
    Axes(Vec<crate::geometry::Axis>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllKeyword {
    All,
}

/// Inclusive lattice ranges of fixed nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedNodeRange {
    pub ix: [usize; 2],
    pub iy: [usize; 2],
    pub iz: [usize; 2],
    #[serde(default = "default_dofs")]
    pub dofs: DofSelection,
}

fn default_dofs() -> DofSelection {
    DofSelection::All(AllKeyword::All)
}

/// Point load at a lattice node along one axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointLoad {
    pub node: [usize; 3],
    pub dof: crate::geometry::Axis,
    pub value: f64,
}

/// Explicit boundary conditions loaded from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitBc {
    pub fixed_nodes: Vec<FixedNodeRange>,
    pub loads: Vec<PointLoad>,
}

#[derive(Debug, Clone)]
pub enum BcSpec {
    /// Left face fully fixed, unit -z point load at the mid-edge node of
    /// the free end's bottom edge.
    Cantilever,
    Explicit(ExplicitBc),
}

/// Everything `run_optimization` needs, already resolved to memory.
#[derive(Debug, Clone)]
pub struct ProblemDefinition {
    pub nelx: usize,
    pub nely: usize,
    pub nelz: usize,
    pub material: MaterialModel,
    pub oc: OcParams,
    pub rmin: f64,
    pub filter_mode: FilterMode,
    pub max_iter: usize,
    pub change_tol: f64,
    pub solver: SolverConfig,
    pub bc: BcSpec,
    pub domain: Option<VoxelGrid>,
    pub obstacles: Option<ObstacleSpec>,
}

impl ProblemDefinition {
    /// Built-in cantilever problem with default loop parameters.
    pub fn cantilever(
        nelx: usize,
        nely: usize,
        nelz: usize,
        volfrac: f64,
        penal: f64,
        rmin: f64,
    ) -> Self {
        ProblemDefinition {
            nelx,
            nely,
            nelz,
            material: MaterialModel {
                penal,
                ..Default::default()
            },
            oc: OcParams::new(volfrac),
            rmin,
            filter_mode: FilterMode::DensityWeighted,
            max_iter: 200,
            change_tol: 0.01,
            solver: SolverConfig::default(),
            bc: BcSpec::Cantilever,
            domain: None,
            obstacles: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nelx == 0 || self.nely == 0 || self.nelz == 0 {
            return Err(TopoError::InvalidDimensions {
                nelx: self.nelx as i64,
                nely: self.nely as i64,
                nelz: self.nelz as i64,
            });
        }
        self.material.validate()?;
        self.oc.validate()?;
        if !(self.rmin > 0.0) {
            return Err(TopoError::InvalidConfig(format!(
                "filter radius must be positive, got {}",
                self.rmin
            )));
        }
        if self.max_iter == 0 {
            return Err(TopoError::InvalidConfig("max_iter must be >= 1".into()));
        }
        if let Some(obs) = &self.obstacles {
            obs.validate()?;
        }
        Ok(())
    }

    /// Resolves the boundary-condition spec against a mesh.
    pub fn boundary_setup(&self, mesh: &GridMesh) -> Result<BoundarySetup> {
        match &self.bc {
            BcSpec::Cantilever => Ok(default_cantilever(mesh)),
            BcSpec::Explicit(bc) => explicit_setup(mesh, bc),
        }
    }

    /// Design/passive masks from the optional domain and obstacles.
    pub fn masks(&self, mesh: &GridMesh) -> Result<(Vec<bool>, Vec<f64>)> {
        build_masks(
            self.domain.as_ref(),
            self.obstacles.as_ref(),
            (mesh.nelx, mesh.nely, mesh.nelz),
        )
    }
}

/// Cantilever boundary conditions: every DOF of the ix = 0 face fixed, a
/// -1.0 load in z at node (nelx, nely/2, 0). Odd nely rounds the mid-edge
/// node down.
pub fn default_cantilever(mesh: &GridMesh) -> BoundarySetup {
    let mut fixed = Vec::with_capacity(3 * (mesh.nely + 1) * (mesh.nelz + 1));
    for iy in 0..=mesh.nely {
        for iz in 0..=mesh.nelz {
            let n = mesh.node_id(0, iy, iz);
            fixed.extend([3 * n, 3 * n + 1, 3 * n + 2]);
        }
    }
    if !mesh.nely.is_multiple_of(2) {
        log::info!(
            "odd nely = {}: cantilever load placed at iy = {}",
            mesh.nely,
            mesh.nely / 2
        );
    }
    let load_node = mesh.node_id(mesh.nelx, mesh.nely / 2, 0);
    BoundarySetup::new(fixed, vec![(3 * load_node + 2, -1.0)])
}

fn explicit_setup(mesh: &GridMesh, bc: &ExplicitBc) -> Result<BoundarySetup> {
    let mut fixed = Vec::new();
    for range in &bc.fixed_nodes {
        let check = |name: &str, r: [usize; 2], max: usize| -> Result<()> {
            if r[0] > r[1] || r[1] > max {
                return Err(TopoError::InvalidConfig(format!(
                    "fixed node range {name} = [{}, {}] invalid (max {max})",
                    r[0], r[1]
                )));
            }
            Ok(())
        };
        check("ix", range.ix, mesh.nelx)?;
        check("iy", range.iy, mesh.nely)?;
        check("iz", range.iz, mesh.nelz)?;
        let axes: Vec<usize> = match &range.dofs {
            DofSelection::All(_) => vec![0, 1, 2],
            DofSelection::Axes(list) => list.iter().map(|a| a.index()).collect(),
        };
        for ix in range.ix[0]..=range.ix[1] {
            for iy in range.iy[0]..=range.iy[1] {
                for iz in range.iz[0]..=range.iz[1] {
                    let n = mesh.node_id(ix, iy, iz);
                    for &a in &axes {
                        fixed.push(3 * n + a);
                    }
                }
            }
        }
    }
    let mut loads = Vec::new();
    for load in &bc.loads {
        let [ix, iy, iz] = load.node;
        if ix > mesh.nelx || iy > mesh.nely || iz > mesh.nelz {
            return Err(TopoError::InvalidConfig(format!(
                "load node ({ix},{iy},{iz}) outside lattice"
            )));
        }
        let n = mesh.node_id(ix, iy, iz);
        loads.push((3 * n + load.dof.index(), load.value));
    }
    Ok(BoundarySetup::new(fixed, loads))
}
