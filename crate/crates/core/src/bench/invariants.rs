//! Element kernel invariants checked over whole meshes or random polygons.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::assembly::AssemblyError;
use crate::fem::{mechanical_stiffness_q4, thermal_stiffness_q4, KernelError};
use crate::materials::{MaterialMap, MaterialProps};
use crate::mesh::{ElementKind, Mesh, Point};
use crate::vem::{elastic_projection, elastic_stiffness_parts, thermal_projection, thermal_stiffness_parts};

/// Measured residuals for one stiffness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelCheck {
    /// `max |Π D − D|`; zero for FE.
    pub reproduction: f64,
    /// `max |K − Kᵀ| / max |K|`.
    pub asymmetry: f64,
    /// `max |K_s D| / max |K|`; zero for FE.
    pub stabilization: f64,
    /// Eigenvalues with `|λ| ≤ 1e-9 λ_max`.
    pub null_dim: usize,
    /// Largest such `|λ| / λ_max`.
    pub null_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCheck {
    pub element: usize,
    pub kind: ElementKind,
    pub thermal: KernelCheck,
    pub elastic: KernelCheck,
}

impl ElementCheck {
    pub fn failures(&self, tol: &InvariantTolerances) -> Vec<String> {
        let mut out = Vec::new();
        for (name, c, dim) in [("thermal", &self.thermal, 1), ("elastic", &self.elastic, 3)] {
            if c.reproduction > tol.reproduction {
                out.push(format!("element {} {name}: reproduction residual {:e}", self.element, c.reproduction));
            }
            if c.asymmetry > tol.symmetry {
                out.push(format!("element {} {name}: asymmetry {:e}", self.element, c.asymmetry));
            }
            if c.stabilization > tol.stabilization {
                out.push(format!("element {} {name}: stabilization residual {:e}", self.element, c.stabilization));
            }
            if c.null_dim != dim {
                out.push(format!("element {} {name}: nullspace dimension {} (expected {dim})", self.element, c.null_dim));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantTolerances {
    pub reproduction: f64,
    pub symmetry: f64,
    pub stabilization: f64,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        InvariantTolerances {
            reproduction: 1e-9,
            symmetry: 1e-12,
            stabilization: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvariantReport {
    pub n_fe: usize,
    pub n_ve: usize,
    pub max_reproduction: f64,
    pub max_asymmetry: f64,
    pub max_stabilization: f64,
    pub max_null_ratio: f64,
    pub failures: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, c: &ElementCheck, tol: &InvariantTolerances) {
        match c.kind {
            ElementKind::FeQuad => self.n_fe += 1,
            ElementKind::VePoly => self.n_ve += 1,
        }
        for k in [&c.thermal, &c.elastic] {
            self.max_reproduction = self.max_reproduction.max(k.reproduction);
            self.max_asymmetry = self.max_asymmetry.max(k.asymmetry);
            self.max_stabilization = self.max_stabilization.max(k.stabilization);
            self.max_null_ratio = self.max_null_ratio.max(k.null_ratio);
        }
        self.failures.extend(c.failures(tol));
    }
}

fn spectrum(k: &DMatrix<f64>) -> (usize, f64) {
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut dim = 0;
    let mut ratio = 0.0f64;
    for v in eig.iter() {
        if v.abs() <= 1e-9 * top {
            dim += 1;
            ratio = ratio.max(v.abs() / top);
        }
    }
    (dim, ratio)
}

fn matrix_check(k: &DMatrix<f64>, reproduction: f64, stab: f64) -> KernelCheck {
    let scale = k.abs().max();
    let (null_dim, null_ratio) = spectrum(k);
    KernelCheck {
        reproduction,
        asymmetry: (k - k.transpose()).abs().max() / scale,
        stabilization: stab / scale,
        null_dim,
        null_ratio,
    }
}

/// Checks the VE thermal and elastic kernels of one polygon.
pub fn check_polygon(coords: &[Point], props: &MaterialProps, tau: f64, element: usize) -> Result<ElementCheck, KernelError> {
    let tp = thermal_projection(coords, props, element)?;
    let tparts = thermal_stiffness_parts(&tp, tau);
    let kt = tparts.total();
    let thermal = matrix_check(
        &kt,
        (&tp.pi * &tp.d - &tp.d).abs().max(),
        (&tparts.stabilization * &tp.d).abs().max(),
    );
    let ep = elastic_projection(coords, props, element)?;
    let eparts = elastic_stiffness_parts(&ep, tau);
    let ke = eparts.total();
    let elastic = matrix_check(
        &ke,
        (&ep.pi * &ep.d_bar - &ep.d_bar).abs().max(),
        (&eparts.stabilization * &ep.d_bar).abs().max(),
    );
    Ok(ElementCheck {
        element,
        kind: ElementKind::VePoly,
        thermal,
        elastic,
    })
}

fn check_quad(coords: &[Point; 4], props: &MaterialProps, element: usize) -> Result<ElementCheck, KernelError> {
    let kt = thermal_stiffness_q4(coords, props, element)?;
    let ke = mechanical_stiffness_q4(coords, props, element)?;
    let kt = DMatrix::from_fn(4, 4, |i, j| kt[(i, j)]);
    let ke = DMatrix::from_fn(8, 8, |i, j| ke[(i, j)]);
    Ok(ElementCheck {
        element,
        kind: ElementKind::FeQuad,
        thermal: matrix_check(&kt, 0.0, 0.0),
        elastic: matrix_check(&ke, 0.0, 0.0),
    })
}

/// Runs the kernel checks on every element of `mesh`.
pub fn check_mesh_kernels(
    mesh: &Mesh,
    materials: &MaterialMap,
    tau: f64,
    tol: &InvariantTolerances,
) -> Result<InvariantReport, AssemblyError> {
    let checks: Vec<ElementCheck> = mesh
        .elements()
        .par_iter()
        .map(|e| {
            let props = materials.get(&e.region).ok_or(AssemblyError::MissingMaterial {
                element: e.id,
                region: e.region,
            })?;
            let coords = mesh.element_coords(e);
            let c = match e.kind {
                ElementKind::FeQuad => {
                    let q: [Point; 4] = std::array::from_fn(|i| coords[i]);
                    check_quad(&q, props, e.id)?
                }
                ElementKind::VePoly => check_polygon(&coords, props, tau, e.id)?,
            };
            Ok(c)
        })
        .collect::<Result<_, AssemblyError>>()?;
    let mut report = InvariantReport::default();
    for c in &checks {
        report.absorb(c, tol);
    }
    Ok(report)
}

/// Same checks over `n` seeded random star polygons with 3 to 10 vertices,
/// alternating convex and non-convex.
pub fn check_random_polygons(n: usize, seed: u64, tau: f64, tol: &InvariantTolerances) -> Result<InvariantReport, KernelError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = InvariantReport::default();
    for i in 0..n {
        let nv = rng.gen_range(3..=10);
        let convex = i % 2 == 0 || nv == 3;
        let coords = crate::mesh::random_star_polygon(&mut rng, nv, convex);
        let nu = rng.gen_range(0.0..0.45);
        let props = MaterialProps {
            e: 10f64.powf(rng.gen_range(0.0..6.0)),
            nu,
            conductivity: 10f64.powf(rng.gen_range(-3.0..0.0)),
            alpha: 1e-5,
            t0: 0.0,
            plane: if i % 3 == 0 {
                crate::materials::PlaneCondition::Strain
            } else {
                crate::materials::PlaneCondition::Stress
            },
        };
        report.absorb(&check_polygon(&coords, &props, tau, i)?, tol);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured_quads;
    use crate::vem::DEFAULT_TAU;

    #[test]
    fn mixed_mesh_passes() {
        let m = generate_structured_quads(2.0, 1.0, 4, 2, ElementKind::FeQuad).unwrap();
        let mats = MaterialMap::from([(0, MaterialProps::from_handbook(1000.0, 0.3, 10.0, 1e-5, 0.0, crate::materials::PlaneCondition::Stress).unwrap())]);
        let r = check_mesh_kernels(&m, &mats, DEFAULT_TAU, &InvariantTolerances::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!((r.n_fe, r.n_ve), (8, 0));
        let r = check_mesh_kernels(&m.with_kind(ElementKind::VePoly), &mats, DEFAULT_TAU, &InvariantTolerances::default()).unwrap();
        assert!(r.passed() && r.n_ve == 8);
    }

    #[test]
    fn random_polygons_pass() {
        let r = check_random_polygons(40, 7, DEFAULT_TAU, &InvariantTolerances::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }
}
