//! Four-node isoparametric quadrilateral kernels.
//!
//! Node order is counter-clockwise with parent coordinates
//! (−1,−1), (1,−1), (1,1), (−1,1). Mechanical dofs are interleaved
//! `[ux0, uy0, ux1, uy1, ...]`.

use nalgebra::{Matrix2, SMatrix, SVector, Vector2, Vector3};

use crate::materials::{elasticity_matrix, thermal_strain_voigt, MaterialError, MaterialProps};
use crate::mesh::Point;

/// Errors raised by element kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("element {element} is distorted: det J = {det_j:e} at ({xi}, {eta})")]
    Distorted { element: usize, xi: f64, eta: f64, det_j: f64 },
    #[error("element {element}: {reason}")]
    Degenerate { element: usize, reason: String },
    #[error("element {element}: singular projection system")]
    SingularProjection { element: usize },
    #[error("zero-length boundary edge ({0}, {1})")]
    ZeroLengthEdge(usize, usize),
    #[error("element {element}: {source}")]
    Material {
        element: usize,
        #[source]
        source: MaterialError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub xi: f64,
    pub eta: f64,
    pub weight: f64,
}

const NODE_XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const NODE_ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Tensor Gauss–Legendre rule with `n` points per direction (1 to 4).
pub fn gauss_rule(n: usize) -> Vec<QuadPoint> {
    let (pts, wts): (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => {
            const G: f64 = 0.577_350_269_189_625_8;
            (&[-G, G], &[1.0, 1.0])
        }
        3 => (&[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        _ => panic!("gauss_rule supports 1 to 4 points, got {n}"),
    };
    let mut rule = Vec::with_capacity(n * n);
    for (j, &eta) in pts.iter().enumerate() {
        for (i, &xi) in pts.iter().enumerate() {
            rule.push(QuadPoint {
                xi,
                eta,
                weight: wts[i] * wts[j],
            });
        }
    }
    rule
}

/// The 2×2 rule used by all element matrices.
pub fn gauss_2x2() -> [QuadPoint; 4] {
    let r = gauss_rule(2);
    [r[0], r[1], r[2], r[3]]
}

/// Shape functions and their derivatives at one parent point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEval {
    pub n: [f64; 4],
    pub dn_dxi: [[f64; 2]; 4],
    pub jacobian: Matrix2<f64>,
    pub det_j: f64,
    /// Global gradients `[dN/dx, dN/dy]` per node.
    pub dn_dx: [[f64; 2]; 4],
}

impl ShapeEval {
    /// Thermal gradient matrix, 2×4.
    pub fn b_t(&self) -> SMatrix<f64, 2, 4> {
        let mut b = SMatrix::<f64, 2, 4>::zeros();
        for i in 0..4 {
            b[(0, i)] = self.dn_dx[i][0];
            b[(1, i)] = self.dn_dx[i][1];
        }
        b
    }

    /// Strain-displacement matrix, 3×8, engineering shear.
    pub fn b_u(&self) -> SMatrix<f64, 3, 8> {
        let mut b = SMatrix::<f64, 3, 8>::zeros();
        for i in 0..4 {
            let [dx, dy] = self.dn_dx[i];
            b[(0, 2 * i)] = dx;
            b[(1, 2 * i + 1)] = dy;
            b[(2, 2 * i)] = dy;
            b[(2, 2 * i + 1)] = dx;
        }
        b
    }

    pub fn interpolate(&self, nodal: &[f64; 4]) -> f64 {
        (0..4).map(|i| self.n[i] * nodal[i]).sum()
    }
}

/// Bilinear shape functions at `(xi, eta)`; `N_i = (1 + xi_i xi)(1 + eta_i eta)/4`.
pub fn q4_shape_values(xi: f64, eta: f64) -> [f64; 4] {
    std::array::from_fn(|i| 0.25 * (1.0 + NODE_XI[i] * xi) * (1.0 + NODE_ETA[i] * eta))
}

pub fn q4_shape_eval(coords: &[Point; 4], xi: f64, eta: f64, element: usize) -> Result<ShapeEval, KernelError> {
    let n = q4_shape_values(xi, eta);
    let dn_dxi: [[f64; 2]; 4] = std::array::from_fn(|i| {
        [
            0.25 * NODE_XI[i] * (1.0 + NODE_ETA[i] * eta),
            0.25 * NODE_ETA[i] * (1.0 + NODE_XI[i] * xi),
        ]
    });
    // J[r][c] = d x_c / d xi_r
    let mut jac = Matrix2::zeros();
    for i in 0..4 {
        for r in 0..2 {
            jac[(r, 0)] += dn_dxi[i][r] * coords[i][0];
            jac[(r, 1)] += dn_dxi[i][r] * coords[i][1];
        }
    }
    let det_j = jac.determinant();
    let scale = coords
        .iter()
        .map(|p| (p[0] - coords[0][0]).hypot(p[1] - coords[0][1]))
        .fold(0.0, f64::max);
    if !(det_j > 1e-14 * scale * scale) {
        return Err(KernelError::Distorted { element, xi, eta, det_j });
    }
    let inv = Matrix2::new(jac[(1, 1)], -jac[(0, 1)], -jac[(1, 0)], jac[(0, 0)]) / det_j;
    let dn_dx = std::array::from_fn(|i| {
        let g = inv * Vector2::new(dn_dxi[i][0], dn_dxi[i][1]);
        [g[0], g[1]]
    });
    Ok(ShapeEval {
        n,
        dn_dxi,
        jacobian: jac,
        det_j,
        dn_dx,
    })
}

fn material(props: &MaterialProps, element: usize) -> Result<nalgebra::Matrix3<f64>, KernelError> {
    elasticity_matrix(props).map_err(|source| KernelError::Material { element, source })
}

pub fn thermal_stiffness_q4_with_rule(
    coords: &[Point; 4],
    props: &MaterialProps,
    rule: &[QuadPoint],
    element: usize,
) -> Result<SMatrix<f64, 4, 4>, KernelError> {
    let mut k = SMatrix::<f64, 4, 4>::zeros();
    for gp in rule {
        let s = q4_shape_eval(coords, gp.xi, gp.eta, element)?;
        let b = s.b_t();
        k += b.transpose() * b * (gp.weight * s.det_j * props.conductivity);
    }
    Ok(k)
}

/// Element conduction matrix `Σ w λ B_Tᵀ B_T det J`.
pub fn thermal_stiffness_q4(
    coords: &[Point; 4],
    props: &MaterialProps,
    element: usize,
) -> Result<SMatrix<f64, 4, 4>, KernelError> {
    thermal_stiffness_q4_with_rule(coords, props, &gauss_2x2(), element)
}

pub fn mechanical_stiffness_q4_with_rule(
    coords: &[Point; 4],
    props: &MaterialProps,
    rule: &[QuadPoint],
    element: usize,
) -> Result<SMatrix<f64, 8, 8>, KernelError> {
    let d = material(props, element)?;
    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for gp in rule {
        let s = q4_shape_eval(coords, gp.xi, gp.eta, element)?;
        let b = s.b_u();
        k += b.transpose() * d * b * (gp.weight * s.det_j);
    }
    Ok(k)
}

/// Element stiffness `Σ w B_uᵀ D B_u det J`.
pub fn mechanical_stiffness_q4(
    coords: &[Point; 4],
    props: &MaterialProps,
    element: usize,
) -> Result<SMatrix<f64, 8, 8>, KernelError> {
    mechanical_stiffness_q4_with_rule(coords, props, &gauss_2x2(), element)
}

/// Equivalent nodal forces of the thermal strain, with `T` interpolated from
/// the nodal temperatures at each Gauss point.
pub fn thermal_load_q4(
    coords: &[Point; 4],
    props: &MaterialProps,
    nodal_t: &[f64; 4],
    element: usize,
) -> Result<SVector<f64, 8>, KernelError> {
    let d = material(props, element)?;
    let mut f = SVector::<f64, 8>::zeros();
    for gp in gauss_2x2() {
        let s = q4_shape_eval(coords, gp.xi, gp.eta, element)?;
        let eps = thermal_strain_voigt(props, s.interpolate(nodal_t));
        f += s.b_u().transpose() * (d * eps) * (gp.weight * s.det_j);
    }
    Ok(f)
}

/// Stress averaged over the four Gauss points.
pub fn q4_stress(
    coords: &[Point; 4],
    props: &MaterialProps,
    u: &[f64; 8],
    nodal_t: &[f64; 4],
    element: usize,
) -> Result<Vector3<f64>, KernelError> {
    let d = material(props, element)?;
    let u = SVector::<f64, 8>::from_column_slice(u);
    let mut sigma = Vector3::zeros();
    for gp in gauss_2x2() {
        let s = q4_shape_eval(coords, gp.xi, gp.eta, element)?;
        let eps = s.b_u() * u - thermal_strain_voigt(props, s.interpolate(nodal_t));
        sigma += d * eps;
    }
    Ok(sigma / 4.0)
}

/// Consistent nodal loads `−q̄ L / 2` of a constant outward flux `q̄` on edge `a`–`b`.
pub fn flux_load_edge(a: Point, b: Point, q_bar: f64, nodes: (usize, usize)) -> Result<[f64; 2], KernelError> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    if !(len > 0.0) {
        return Err(KernelError::ZeroLengthEdge(nodes.0, nodes.1));
    }
    let f = -q_bar * len / 2.0;
    Ok([f, f])
}

/// Consistent nodal forces `t L / 2` of a constant traction on edge `a`–`b`,
/// ordered `[fx_a, fy_a, fx_b, fy_b]`.
pub fn traction_load_edge(a: Point, b: Point, t: [f64; 2], nodes: (usize, usize)) -> Result<[f64; 4], KernelError> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    if !(len > 0.0) {
        return Err(KernelError::ZeroLengthEdge(nodes.0, nodes.1));
    }
    let h = len / 2.0;
    Ok([t[0] * h, t[1] * h, t[0] * h, t[1] * h])
}

/// Parent coordinates of `p` by Newton iteration on the bilinear map.
/// Returns `None` if the iteration fails or the point is outside the element
/// by more than `tol` in parent coordinates.
pub fn q4_inverse_map(coords: &[Point; 4], p: Point, tol: f64) -> Option<(f64, f64)> {
    let (mut xi, mut eta) = (0.0, 0.0);
    for _ in 0..50 {
        let n = q4_shape_values(xi, eta);
        let x: f64 = (0..4).map(|i| n[i] * coords[i][0]).sum();
        let y: f64 = (0..4).map(|i| n[i] * coords[i][1]).sum();
        let r = Vector2::new(x - p[0], y - p[1]);
        let s = q4_shape_eval(coords, xi, eta, 0).ok()?;
        // dx/dxi = J^T
        let step = s.jacobian.transpose().try_inverse()? * r;
        xi -= step[0];
        eta -= step[1];
        if step.norm() < 1e-14 {
            break;
        }
        if !(xi.abs() < 10.0 && eta.abs() < 10.0) {
            return None;
        }
    }
    (xi.abs() <= 1.0 + tol && eta.abs() <= 1.0 + tol).then_some((xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)))
}
