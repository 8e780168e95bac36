//! Problem definition: mesh, materials and boundary conditions.

use crate::materials::MaterialMap;
use crate::mesh::Mesh;
use crate::vem::DEFAULT_TAU;

/// Where a Dirichlet condition applies.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// All nodes of edges carrying this label.
    Label(String),
    /// Explicit node ids.
    Nodes(Vec<usize>),
}

impl Target {
    pub fn label(s: &str) -> Self {
        Target::Label(s.to_string())
    }

    pub fn describe(&self) -> String {
        match self {
            Target::Label(l) => format!("boundary `{l}`"),
            Target::Nodes(n) => format!("nodes {n:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureBc {
    pub target: Target,
    pub value: f64,
}

/// Constant outward heat flux on a labelled boundary, in W/mm².
#[derive(Debug, Clone, PartialEq)]
pub struct FluxBc {
    pub label: String,
    pub q: f64,
}

/// Prescribed displacement components; `None` leaves a component free.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementBc {
    pub target: Target,
    pub ux: Option<f64>,
    pub uy: Option<f64>,
}

/// Constant traction on a labelled boundary, in MPa.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionBc {
    pub label: String,
    pub t: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryConditions {
    pub temperature: Vec<TemperatureBc>,
    pub flux: Vec<FluxBc>,
    pub displacement: Vec<DisplacementBc>,
    pub traction: Vec<TractionBc>,
}

impl BoundaryConditions {
    pub fn fix_temperature(mut self, target: Target, value: f64) -> Self {
        self.temperature.push(TemperatureBc { target, value });
        self
    }

    pub fn add_flux(mut self, label: &str, q: f64) -> Self {
        self.flux.push(FluxBc {
            label: label.to_string(),
            q,
        });
        self
    }

    pub fn fix_displacement(mut self, target: Target, ux: Option<f64>, uy: Option<f64>) -> Self {
        self.displacement.push(DisplacementBc { target, ux, uy });
        self
    }

    pub fn add_traction(mut self, label: &str, t: [f64; 2]) -> Self {
        self.traction.push(TractionBc {
            label: label.to_string(),
            t,
        });
        self
    }

    pub fn has_thermal(&self) -> bool {
        !self.temperature.is_empty() || !self.flux.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub mesh: Mesh,
    pub materials: MaterialMap,
    pub bcs: BoundaryConditions,
    /// VEM stabilization scale.
    pub tau: f64,
}

impl Problem {
    pub fn new(mesh: Mesh, materials: MaterialMap, bcs: BoundaryConditions) -> Self {
        Problem {
            mesh,
            materials,
            bcs,
            tau: DEFAULT_TAU,
        }
    }
}
