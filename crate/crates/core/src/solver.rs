//! Sparse SPD solves and the thermal-then-mechanical pipeline.

use std::fmt;

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::assembly::{assemble_mechanical, assemble_thermal, AssemblyError, Field, ReducedSystem, SparseSystem};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMethod {
    /// Sparse Cholesky factorization.
    Direct,
    /// Conjugate gradients.
    Cg,
}

impl SolveMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Some(SolveMethod::Direct),
            "cg" => Some(SolveMethod::Cg),
            _ => None,
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Direct => "direct",
            SolveMethod::Cg => "cg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
    /// Jacobi preconditioning for CG.
    pub jacobi: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: SolveMethod::Direct,
            cg_rel_tol: 1e-10,
            cg_max_iter: 20_000,
            jacobi: true,
        }
    }
}

impl SolveOptions {
    pub fn cg() -> Self {
        SolveOptions {
            method: SolveMethod::Cg,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), SolverError> {
        if !(self.cg_rel_tol > 0.0) || self.cg_max_iter == 0 {
            return Err(SolverError::BadOptions(format!(
                "cg_rel_tol must be positive and cg_max_iter nonzero, got {} / {}",
                self.cg_rel_tol, self.cg_max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub method: SolveMethod,
    pub n_free: usize,
    /// CG iterations; zero for the direct solver.
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖` on the reduced system.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("{field:?} system is not positive definite; likely missing constraints leave rigid modes free")]
    NotPositiveDefinite { field: Option<Field> },
    #[error("{field:?} problem has unconstrained rigid modes in the part containing node {node}: {detail}")]
    RigidModes { field: Field, node: usize, detail: String },
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e}); history tail {history:?}")]
    CgNotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("invalid solver options: {0}")]
    BadOptions(String),
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = a.n_rows();
    let triplets: Vec<Triplet<usize, usize, f64>> = a
        .entries()
        .filter(|&(r, c, _)| r >= c)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|_| SolverError::NotPositiveDefinite { field: None })?;
    let symbolic =
        SymbolicLlt::try_new(m.symbolic(), Side::Lower).map_err(|_| SolverError::NotPositiveDefinite { field: None })?;
    let llt = Llt::try_new_with_symbolic(symbolic, m.as_ref(), Side::Lower)
        .map_err(|_| SolverError::NotPositiveDefinite { field: None })?;
    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    llt.solve_in_place(x.as_mut());
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(SolverError::NotPositiveDefinite { field: None })
    }
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize, f64), SolverError> {
    let n = b.len();
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let inv_diag: Vec<f64> = if opts.jacobi {
        a.diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect()
    } else {
        vec![1.0; n]
    };
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut history = Vec::new();
    for it in 1..=opts.cg_max_iter {
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(SolverError::NotPositiveDefinite { field: None });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / nb;
        history.push(rel);
        if rel <= opts.cg_rel_tol {
            return Ok((x, it, rel));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let tail = history.len().saturating_sub(5);
    Err(SolverError::CgNotConverged {
        iterations: opts.cg_max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
        history: history[tail..].to_vec(),
    })
}

/// Solves a reduced system and returns the full-length solution.
pub fn solve_system(system: &ReducedSystem, opts: &SolveOptions) -> Result<(Vec<f64>, SolveDiagnostics), SolverError> {
    opts.check()?;
    let a = &system.matrix;
    let b = &system.rhs;
    let n_free = b.len();
    if n_free == 0 {
        return Ok((
            system.recovery.full(&[]),
            SolveDiagnostics {
                method: opts.method,
                n_free,
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let (x, iterations) = match opts.method {
        SolveMethod::Direct => (solve_direct(a, b)?, 0),
        SolveMethod::Cg => {
            let (x, it, _) = conjugate_gradient(a, b, opts)?;
            (x, it)
        }
    };
    let relative_residual = residual(a, &x, b);
    Ok((
        system.recovery.full(&x),
        SolveDiagnostics {
            method: opts.method,
            n_free,
            iterations,
            relative_residual,
        },
    ))
}

/// Connected parts of the mesh (elements joined through shared nodes), as node lists.
pub fn mesh_components(mesh: &Mesh) -> Vec<Vec<usize>> {
    let n = mesh.n_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for e in mesh.elements() {
        let a = find(&mut parent, e.vertices[0]);
        for &v in &e.vertices[1..] {
            let b = find(&mut parent, v);
            if a != b {
                parent[b] = a;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

/// Checks that the Dirichlet set removes every rigid mode of every part.
pub fn check_rigid_modes(mesh: &Mesh, system: &SparseSystem) -> Result<(), SolverError> {
    let field = system.dofs.field;
    for comp in mesh_components(mesh) {
        match field {
            Field::Thermal => {
                if !comp.iter().any(|&n| system.constraints.contains_key(&n)) {
                    return Err(SolverError::RigidModes {
                        field,
                        node: comp[0],
                        detail: "no prescribed temperature, constant mode is free".into(),
                    });
                }
            }
            Field::Mechanical => {
                let (mut cx, mut cy) = (0.0, 0.0);
                for &n in &comp {
                    let p = mesh.point(n);
                    cx += p[0];
                    cy += p[1];
                }
                cx /= comp.len() as f64;
                cy /= comp.len() as f64;
                let size = comp
                    .iter()
                    .map(|&n| {
                        let p = mesh.point(n);
                        (p[0] - cx).hypot(p[1] - cy)
                    })
                    .fold(0.0, f64::max)
                    .max(1e-300);
                let mut rows: Vec<[f64; 3]> = Vec::new();
                for &n in &comp {
                    let p = mesh.point(n);
                    let (dx, dy) = ((p[0] - cx) / size, (p[1] - cy) / size);
                    if system.constraints.contains_key(&(2 * n)) {
                        rows.push([1.0, 0.0, -dy]);
                    }
                    if system.constraints.contains_key(&(2 * n + 1)) {
                        rows.push([0.0, 1.0, dx]);
                    }
                }
                let rank = if rows.is_empty() {
                    0
                } else {
                    let m = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
                    let s = m.svd(false, false).singular_values;
                    s.iter().filter(|&&v| v > 1e-9).count()
                };
                if rank < 3 {
                    return Err(SolverError::RigidModes {
                        field,
                        node: comp[0],
                        detail: format!("constraints remove only {rank} of 3 rigid modes"),
                    });
                }
            }
        }
    }
    Ok(())
}

fn with_field(e: SolverError, field: Field) -> SolverError {
    match e {
        SolverError::NotPositiveDefinite { field: None } => SolverError::NotPositiveDefinite { field: Some(field) },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFields {
    pub temperature: Vec<f64>,
    pub displacement: Vec<[f64; 2]>,
    /// `None` when no thermal boundary data was given and the reference
    /// temperature was used everywhere.
    pub thermal: Option<SolveDiagnostics>,
    pub mechanical: SolveDiagnostics,
}

/// Nodal reference temperature, taken from the lowest-id element at each node.
pub fn reference_temperature(problem: &Problem) -> Result<Vec<f64>, AssemblyError> {
    let mesh = &problem.mesh;
    let mut t = vec![f64::NAN; mesh.n_nodes()];
    for e in mesh.elements() {
        let props = problem.materials.get(&e.region).ok_or(AssemblyError::MissingMaterial {
            element: e.id,
            region: e.region,
        })?;
        for &v in &e.vertices {
            if t[v].is_nan() {
                t[v] = props.t0;
            }
        }
    }
    if let Some(n) = t.iter().position(|v| v.is_nan()) {
        return Err(AssemblyError::OrphanNode(n));
    }
    Ok(t)
}

/// Thermal stage alone. Without thermal boundary data the field is the
/// reference temperature and no solve happens.
pub fn solve_thermal(problem: &Problem, opts: &SolveOptions) -> Result<(Vec<f64>, Option<SolveDiagnostics>), PipelineError> {
    if !problem.bcs.has_thermal() {
        return Ok((reference_temperature(problem)?, None));
    }
    let system = assemble_thermal(problem)?;
    check_rigid_modes(&problem.mesh, &system)?;
    let (t, diag) = solve_system(&system.reduce(), opts).map_err(|e| with_field(e, Field::Thermal))?;
    Ok((t, Some(diag)))
}

/// Mechanical stage for a given temperature field; returns interleaved displacements.
pub fn solve_mechanical(
    problem: &Problem,
    temperature: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveDiagnostics), PipelineError> {
    let system = assemble_mechanical(problem, temperature)?;
    check_rigid_modes(&problem.mesh, &system)?;
    Ok(solve_system(&system.reduce(), opts).map_err(|e| with_field(e, Field::Mechanical))?)
}

/// Thermal solve, then thermal strain loads, then the mechanical solve.
pub fn run_pipeline(problem: &Problem, opts: &SolveOptions) -> Result<SolutionFields, PipelineError> {
    let (temperature, thermal) = solve_thermal(problem, opts)?;
    let (u, mechanical) = solve_mechanical(problem, &temperature, opts)?;
    let displacement = u.chunks(2).map(|c| [c[0], c[1]]).collect();
    Ok(SolutionFields {
        temperature,
        displacement,
        thermal,
        mechanical,
    })
}
