//! Global dof numbering, coupled FE/VE assembly and Dirichlet elimination.
//!
//! FE and VE elements write into one triplet list. Nodes shared by both
//! kinds receive contributions from both sides, and an FE-only dof never
//! meets a VE-only dof inside any element, so that block is never stored.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::fem::{
    flux_load_edge, mechanical_stiffness_q4, thermal_load_q4, thermal_stiffness_q4, traction_load_edge, KernelError,
};
use crate::materials::{MaterialMap, MaterialProps};
use crate::mesh::{Element, ElementKind, Mesh, Point};
use crate::problem::{Problem, Target};
use crate::sparse::CsrMatrix;
use crate::vem::{
    elastic_element_matrices, elastic_projection, thermal_element_matrices, thermal_projection, vem_thermal_load,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error("element {element} uses region {region} which has no material")]
    MissingMaterial { element: usize, region: u32 },
    #[error("node {0} belongs to no element")]
    OrphanNode(usize),
    #[error("{context}: node id {node} out of range")]
    NodeOutOfRange { node: usize, context: String },
    #[error("boundary label `{0}` does not exist in the mesh")]
    UnknownLabel(String),
    #[error("dof {dof} prescribed twice with different values {first} and {second}")]
    ConflictingPrescription { dof: usize, first: f64, second: f64 },
    #[error("temperature field has {got} values, mesh has {expected} nodes")]
    FieldLength { expected: usize, got: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Thermal,
    Mechanical,
}

impl Field {
    pub fn dofs_per_node(self) -> usize {
        match self {
            Field::Thermal => 1,
            Field::Mechanical => 2,
        }
    }
}

/// Which block of the coupled system a dof belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DofClass {
    /// Touched by FE elements only.
    Fe,
    /// Shared by FE and VE elements.
    Interface,
    /// Touched by VE elements only.
    Ve,
}

/// Node-major dof numbering: dof `node * k + component`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub field: Field,
    n_nodes: usize,
    node_class: Vec<DofClass>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, field: Field) -> Result<Self, AssemblyError> {
        let n = mesh.n_nodes();
        let mut fe = vec![false; n];
        let mut ve = vec![false; n];
        for e in mesh.elements() {
            for &v in &e.vertices {
                match e.kind {
                    ElementKind::FeQuad => fe[v] = true,
                    ElementKind::VePoly => ve[v] = true,
                }
            }
        }
        let mut node_class = Vec::with_capacity(n);
        for i in 0..n {
            node_class.push(match (fe[i], ve[i]) {
                (true, true) => DofClass::Interface,
                (true, false) => DofClass::Fe,
                (false, true) => DofClass::Ve,
                (false, false) => return Err(AssemblyError::OrphanNode(i)),
            });
        }
        Ok(DofMap {
            field,
            n_nodes: n,
            node_class,
        })
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.field.dofs_per_node() + component
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.field.dofs_per_node()
    }

    pub fn node_of(&self, dof: usize) -> usize {
        dof / self.field.dofs_per_node()
    }

    pub fn class(&self, dof: usize) -> DofClass {
        self.node_class[self.node_of(dof)]
    }

    pub fn dofs_of_class(&self, class: DofClass) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| self.class(d) == class).collect()
    }

    fn element_dofs(&self, element: &Element) -> Vec<usize> {
        let k = self.field.dofs_per_node();
        element
            .vertices
            .iter()
            .flat_map(|&v| (0..k).map(move |c| v * k + c))
            .collect()
    }
}

/// Dense matrix and load of one element with its global dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementContribution {
    pub element: usize,
    pub dofs: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub load: DVector<f64>,
}

fn props_of<'a>(materials: &'a MaterialMap, e: &Element) -> Result<&'a MaterialProps, AssemblyError> {
    materials.get(&e.region).ok_or(AssemblyError::MissingMaterial {
        element: e.id,
        region: e.region,
    })
}

fn quad_coords(mesh: &Mesh, e: &Element) -> [Point; 4] {
    std::array::from_fn(|i| mesh.point(e.vertices[i]))
}

fn selected<'a>(mesh: &'a Mesh, only: Option<ElementKind>) -> Vec<&'a Element> {
    mesh.elements()
        .iter()
        .filter(|e| only.map_or(true, |k| e.kind == k))
        .collect()
}

/// Conduction matrices of all (or only one kind of) elements, in element order.
pub fn thermal_contributions(
    mesh: &Mesh,
    materials: &MaterialMap,
    tau: f64,
    only: Option<ElementKind>,
) -> Result<Vec<ElementContribution>, AssemblyError> {
    let map = DofMap::new(mesh, Field::Thermal)?;
    selected(mesh, only)
        .par_iter()
        .map(|e| {
            let props = props_of(materials, e)?;
            let matrix = match e.kind {
                ElementKind::FeQuad => {
                    let k = thermal_stiffness_q4(&quad_coords(mesh, e), props, e.id)?;
                    DMatrix::from_column_slice(4, 4, k.as_slice())
                }
                ElementKind::VePoly => {
                    let p = thermal_projection(&mesh.element_coords(e), props, e.id)?;
                    thermal_element_matrices(&p, tau)
                }
            };
            let n = matrix.nrows();
            Ok(ElementContribution {
                element: e.id,
                dofs: map.element_dofs(e),
                matrix,
                load: DVector::zeros(n),
            })
        })
        .collect()
}

/// Stiffness and thermal-strain loads of all (or one kind of) elements.
pub fn mechanical_contributions(
    mesh: &Mesh,
    materials: &MaterialMap,
    tau: f64,
    temperature: &[f64],
    only: Option<ElementKind>,
) -> Result<Vec<ElementContribution>, AssemblyError> {
    if temperature.len() != mesh.n_nodes() {
        return Err(AssemblyError::FieldLength {
            expected: mesh.n_nodes(),
            got: temperature.len(),
        });
    }
    let map = DofMap::new(mesh, Field::Mechanical)?;
    selected(mesh, only)
        .par_iter()
        .map(|e| {
            let props = props_of(materials, e)?;
            let nodal_t: Vec<f64> = e.vertices.iter().map(|&v| temperature[v]).collect();
            let (matrix, load) = match e.kind {
                ElementKind::FeQuad => {
                    let c = quad_coords(mesh, e);
                    let k = mechanical_stiffness_q4(&c, props, e.id)?;
                    let t4 = [nodal_t[0], nodal_t[1], nodal_t[2], nodal_t[3]];
                    let f = thermal_load_q4(&c, props, &t4, e.id)?;
                    (DMatrix::from_column_slice(8, 8, k.as_slice()), DVector::from_column_slice(f.as_slice()))
                }
                ElementKind::VePoly => {
                    let p = elastic_projection(&mesh.element_coords(e), props, e.id)?;
                    (elastic_element_matrices(&p, tau), vem_thermal_load(&p, props, &nodal_t))
                }
            };
            Ok(ElementContribution {
                element: e.id,
                dofs: map.element_dofs(e),
                matrix,
                load,
            })
        })
        .collect()
}

/// Sums element contributions into a global matrix and load vector.
pub fn assemble_contributions(n_dofs: usize, contributions: &[ElementContribution]) -> (CsrMatrix, Vec<f64>) {
    let n_trip: usize = contributions.iter().map(|c| c.dofs.len() * c.dofs.len()).sum();
    let mut triplets = Vec::with_capacity(n_trip);
    let mut loads = Vec::new();
    for c in contributions {
        for (a, &ga) in c.dofs.iter().enumerate() {
            if c.load[a] != 0.0 {
                loads.push((ga, c.load[a]));
            }
            for (b, &gb) in c.dofs.iter().enumerate() {
                triplets.push((ga, gb, c.matrix[(a, b)]));
            }
        }
    }
    // Same ordering rule as the matrix so the sum is independent of element order.
    loads.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut rhs = vec![0.0; n_dofs];
    for (d, v) in loads {
        rhs[d] += v;
    }
    (CsrMatrix::from_triplets(n_dofs, n_dofs, triplets), rhs)
}

/// Assembled system before Dirichlet elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    /// Prescribed dof values, checked for conflicts.
    pub constraints: BTreeMap<usize, f64>,
}

impl SparseSystem {
    pub fn reduce(&self) -> ReducedSystem {
        let list: Vec<(usize, f64)> = self.constraints.iter().map(|(&d, &v)| (d, v)).collect();
        apply_dirichlet(&self.matrix, &self.rhs, &list).expect("constraints were merged without conflicts")
    }
}

fn check_labels(mesh: &Mesh, labels: impl IntoIterator<Item = String>) -> Result<(), AssemblyError> {
    let known = mesh.labels();
    for l in labels {
        if !known.contains(l.as_str()) {
            return Err(AssemblyError::UnknownLabel(l));
        }
    }
    Ok(())
}

/// Node ids addressed by a target, validated against the mesh.
pub fn resolve_target(mesh: &Mesh, target: &Target) -> Result<BTreeSet<usize>, AssemblyError> {
    match target {
        Target::Label(l) => {
            check_labels(mesh, [l.clone()])?;
            Ok(mesh.nodes_with_label(l))
        }
        Target::Nodes(ids) => {
            for &n in ids {
                if n >= mesh.n_nodes() {
                    return Err(AssemblyError::NodeOutOfRange {
                        node: n,
                        context: target.describe(),
                    });
                }
            }
            Ok(ids.iter().copied().collect())
        }
    }
}

fn insert_constraint(map: &mut BTreeMap<usize, f64>, dof: usize, value: f64) -> Result<(), AssemblyError> {
    if let Some(&prev) = map.get(&dof) {
        if (prev - value).abs() > 1e-12 * prev.abs().max(value.abs()).max(1.0) {
            return Err(AssemblyError::ConflictingPrescription {
                dof,
                first: prev,
                second: value,
            });
        }
        return Ok(());
    }
    map.insert(dof, value);
    Ok(())
}

fn warn_mixed_planes(mesh: &Mesh, materials: &MaterialMap) {
    let planes: BTreeSet<String> = mesh
        .regions()
        .iter()
        .filter_map(|r| materials.get(r))
        .map(|m| m.plane.to_string())
        .collect();
    if planes.len() > 1 {
        log::warn!("regions mix plane stress and plane strain; each uses its own elasticity matrix");
    }
}

/// Thermal system: conduction matrices, flux loads and prescribed temperatures.
pub fn assemble_thermal(problem: &Problem) -> Result<SparseSystem, AssemblyError> {
    let mesh = &problem.mesh;
    let dofs = DofMap::new(mesh, Field::Thermal)?;
    let contributions = thermal_contributions(mesh, &problem.materials, problem.tau, None)?;
    let (matrix, mut rhs) = assemble_contributions(dofs.n_dofs(), &contributions);
    for bc in &problem.bcs.flux {
        check_labels(mesh, [bc.label.clone()])?;
        for edge in mesh.edges_with_label(&bc.label) {
            let (a, b) = edge.nodes();
            let f = flux_load_edge(mesh.point(a), mesh.point(b), bc.q, (a, b))?;
            rhs[a] += f[0];
            rhs[b] += f[1];
        }
    }
    let mut constraints = BTreeMap::new();
    for bc in &problem.bcs.temperature {
        for n in resolve_target(mesh, &bc.target)? {
            insert_constraint(&mut constraints, dofs.dof(n, 0), bc.value)?;
        }
    }
    Ok(SparseSystem {
        matrix,
        rhs,
        dofs,
        constraints,
    })
}

/// Mechanical system for a given nodal temperature field.
pub fn assemble_mechanical(problem: &Problem, temperature: &[f64]) -> Result<SparseSystem, AssemblyError> {
    let mesh = &problem.mesh;
    warn_mixed_planes(mesh, &problem.materials);
    let dofs = DofMap::new(mesh, Field::Mechanical)?;
    let contributions = mechanical_contributions(mesh, &problem.materials, problem.tau, temperature, None)?;
    let (matrix, mut rhs) = assemble_contributions(dofs.n_dofs(), &contributions);
    for bc in &problem.bcs.traction {
        check_labels(mesh, [bc.label.clone()])?;
        for edge in mesh.edges_with_label(&bc.label) {
            let (a, b) = edge.nodes();
            let f = traction_load_edge(mesh.point(a), mesh.point(b), bc.t, (a, b))?;
            rhs[dofs.dof(a, 0)] += f[0];
            rhs[dofs.dof(a, 1)] += f[1];
            rhs[dofs.dof(b, 0)] += f[2];
            rhs[dofs.dof(b, 1)] += f[3];
        }
    }
    let mut constraints = BTreeMap::new();
    for bc in &problem.bcs.displacement {
        for n in resolve_target(mesh, &bc.target)? {
            if let Some(ux) = bc.ux {
                insert_constraint(&mut constraints, dofs.dof(n, 0), ux)?;
            }
            if let Some(uy) = bc.uy {
                insert_constraint(&mut constraints, dofs.dof(n, 1), uy)?;
            }
        }
    }
    Ok(SparseSystem {
        matrix,
        rhs,
        dofs,
        constraints,
    })
}

/// Maps a reduced solution back to all dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub n_full: usize,
    /// Free dof ids in increasing order; reduced index `k` is dof `free[k]`.
    pub free: Vec<usize>,
    pub prescribed: BTreeMap<usize, f64>,
}

impl Recovery {
    pub fn full(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.free.len());
        let mut x = vec![0.0; self.n_full];
        for (&d, &v) in &self.prescribed {
            x[d] = v;
        }
        for (k, &d) in self.free.iter().enumerate() {
            x[d] = reduced[k];
        }
        x
    }
}

/// System on the free dofs after symmetric elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub recovery: Recovery,
}

/// Removes prescribed dofs and moves their columns to the right-hand side.
pub fn apply_dirichlet(
    matrix: &CsrMatrix,
    rhs: &[f64],
    constraints: &[(usize, f64)],
) -> Result<ReducedSystem, AssemblyError> {
    let n = matrix.n_rows();
    let mut prescribed = BTreeMap::new();
    for &(d, v) in constraints {
        if d >= n {
            return Err(AssemblyError::NodeOutOfRange {
                node: d,
                context: "Dirichlet dof".into(),
            });
        }
        insert_constraint(&mut prescribed, d, v)?;
    }
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::with_capacity(n - prescribed.len());
    for d in 0..n {
        if !prescribed.contains_key(&d) {
            index[d] = free.len();
            free.push(d);
        }
    }
    let mut triplets = Vec::with_capacity(matrix.nnz());
    let mut reduced_rhs: Vec<f64> = free.iter().map(|&d| rhs[d]).collect();
    for (r, c, v) in matrix.entries() {
        let ir = index[r];
        if ir == usize::MAX {
            continue;
        }
        match prescribed.get(&c) {
            Some(&uc) => reduced_rhs[ir] -= v * uc,
            None => triplets.push((ir, index[c], v)),
        }
    }
    let m = free.len();
    Ok(ReducedSystem {
        matrix: CsrMatrix::from_triplets(m, m, triplets),
        rhs: reduced_rhs,
        recovery: Recovery {
            n_full: n,
            free,
            prescribed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::PlaneCondition;
    use crate::mesh::generate_structured_quads;
    use crate::problem::BoundaryConditions;

    fn material() -> MaterialMap {
        [(
            0,
            MaterialProps {
                e: 1000.0,
                nu: 0.3,
                conductivity: 0.5,
                alpha: 1e-5,
                t0: 0.0,
                plane: PlaneCondition::Stress,
            },
        )]
        .into_iter()
        .collect()
    }

    fn split_mesh(nx: usize) -> Mesh {
        let m = generate_structured_quads(2.0, 1.0, nx, 2, ElementKind::FeQuad).unwrap();
        let (nodes, mut elements, edges) = m.into_parts();
        for e in &mut elements {
            if e.id % nx >= nx / 2 {
                e.kind = ElementKind::VePoly;
            }
        }
        Mesh::new(nodes, elements, edges)
    }

    #[test]
    fn two_spring_elimination() {
        // springs k1 = 2 (dofs 0-1) and k2 = 3 (dofs 1-2), dof 0 fixed at 0, load 1 at dof 2
        let k = CsrMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, 2.0),
                (0, 1, -2.0),
                (1, 0, -2.0),
                (1, 1, 2.0),
                (1, 1, 3.0),
                (1, 2, -3.0),
                (2, 1, -3.0),
                (2, 2, 3.0),
            ],
        );
        let r = apply_dirichlet(&k, &[0.0, 0.0, 1.0], &[(0, 0.0), (2, 0.5)]).unwrap();
        // reduced: 5 u1 = 0 + 3 * 0.5
        assert_eq!(r.matrix.to_dense(), vec![vec![5.0]]);
        assert_eq!(r.rhs, vec![1.5]);
        assert_eq!(r.recovery.full(&[0.3]), vec![0.0, 0.3, 0.5]);
    }

    #[test]
    fn constrain_everything() {
        let k = CsrMatrix::identity(2);
        let r = apply_dirichlet(&k, &[1.0, 1.0], &[(0, 4.0), (1, 5.0)]).unwrap();
        assert_eq!(r.matrix.n_rows(), 0);
        assert_eq!(r.recovery.full(&[]), vec![4.0, 5.0]);
    }

    #[test]
    fn homogeneous_constraint_keeps_decoupled_rhs() {
        let k = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (1, 2, 1.0), (2, 1, 1.0)]);
        let r = apply_dirichlet(&k, &[7.0, 8.0, 9.0], &[(0, 0.0)]).unwrap();
        assert_eq!(r.rhs, vec![8.0, 9.0]);
    }

    #[test]
    fn conflicting_prescriptions_are_rejected() {
        let k = CsrMatrix::identity(2);
        assert!(matches!(
            apply_dirichlet(&k, &[0.0, 0.0], &[(1, 0.0), (1, 1.0)]),
            Err(AssemblyError::ConflictingPrescription { dof: 1, .. })
        ));
    }

    #[test]
    fn nullspaces_of_assembled_matrices() {
        let mesh = split_mesh(4);
        let mats = material();
        let tc = thermal_contributions(&mesh, &mats, 0.5, None).unwrap();
        let (kt, _) = assemble_contributions(mesh.n_nodes(), &tc);
        let ones = vec![1.0; mesh.n_nodes()];
        assert!(kt.mul_vec(&ones).iter().all(|v| v.abs() < 1e-9 * kt.norm_inf()));
        let temps = vec![0.0; mesh.n_nodes()];
        let mc = mechanical_contributions(&mesh, &mats, 0.5, &temps, None).unwrap();
        let (km, f) = assemble_contributions(2 * mesh.n_nodes(), &mc);
        assert!(f.iter().all(|&v| v == 0.0));
        for mode in 0..3 {
            let v: Vec<f64> = (0..2 * mesh.n_nodes())
                .map(|d| {
                    let p = mesh.point(d / 2);
                    match (mode, d % 2) {
                        (0, 0) | (1, 1) => 1.0,
                        (2, 0) => -p[1],
                        (2, 1) => p[0],
                        _ => 0.0,
                    }
                })
                .collect();
            assert!(km.mul_vec(&v).iter().all(|x| x.abs() < 1e-9 * km.norm_inf()));
        }
        assert!(km.asymmetry() <= 1e-12 * km.max_abs());
    }

    #[test]
    fn no_fe_ve_coupling_entries() {
        let mesh = split_mesh(4);
        let p = Problem::new(mesh, material(), BoundaryConditions::default());
        let sys = assemble_thermal(&p).unwrap();
        for (r, c, _) in sys.matrix.entries() {
            let pair = (sys.dofs.class(r), sys.dofs.class(c));
            assert!(pair != (DofClass::Fe, DofClass::Ve) && pair != (DofClass::Ve, DofClass::Fe));
        }
        assert_eq!(sys.dofs.dofs_of_class(DofClass::Interface).len(), 3);
    }

    #[test]
    fn element_order_does_not_change_matrix() {
        let mesh = split_mesh(4);
        let mats = material();
        let mut c = mechanical_contributions(&mesh, &mats, 0.5, &vec![10.0; mesh.n_nodes()], None).unwrap();
        let (a, fa) = assemble_contributions(2 * mesh.n_nodes(), &c);
        c.reverse();
        let (b, _) = assemble_contributions(2 * mesh.n_nodes(), &c);
        assert_eq!(a, b);
        assert!(fa.iter().any(|v| v.abs() > 0.0));
    }

    #[test]
    fn label_and_material_errors() {
        let mesh = split_mesh(2);
        let bcs = BoundaryConditions::default().fix_temperature(Target::label("nowhere"), 1.0);
        let p = Problem::new(mesh.clone(), material(), bcs);
        assert_eq!(assemble_thermal(&p), Err(AssemblyError::UnknownLabel("nowhere".into())));
        let p = Problem::new(mesh.clone(), MaterialMap::new(), BoundaryConditions::default());
        assert!(matches!(assemble_thermal(&p), Err(AssemblyError::MissingMaterial { .. })));
        let bcs = BoundaryConditions::default().fix_temperature(Target::Nodes(vec![999]), 1.0);
        let p = Problem::new(mesh, material(), bcs);
        assert!(matches!(assemble_thermal(&p), Err(AssemblyError::NodeOutOfRange { node: 999, .. })));
    }
}
