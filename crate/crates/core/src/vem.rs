//! First-order virtual elements on simple polygons.
//!
//! Scalar basis `{1, ζ, ℘}` with `ζ = (x − x̄)/h`, `℘ = (y − ȳ)/h`, where `x̄` is
//! the centroid and `h` the polygon diameter. The vector basis is
//!
//! ```text
//! m1 = (1, 0)   m2 = (0, 1)   m3 = (−℘, ζ)
//! m4 = (℘, ζ)   m5 = (ζ, 0)   m6 = (0, ℘)
//! ```
//!
//! so `m1..m3` are the rigid modes. All boundary integrals are evaluated in
//! closed form from the vertex normal weights of the polygon.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::fem::KernelError;
use crate::materials::{elasticity_matrix, thermal_strain_voigt, MaterialProps};
use crate::mesh::{Point, PolygonGeometry};

/// Stabilization scale used unless overridden.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomials {
    pub centroid: Point,
    pub h: f64,
}

impl ScaledMonomials {
    /// `(ζ, ℘)` at `p`.
    pub fn scaled(&self, p: Point) -> (f64, f64) {
        ((p[0] - self.centroid[0]) / self.h, (p[1] - self.centroid[1]) / self.h)
    }

    /// `[1, ζ, ℘]` at `p`.
    pub fn scalar(&self, p: Point) -> [f64; 3] {
        let (z, w) = self.scaled(p);
        [1.0, z, w]
    }

    /// The six vector monomials at `p`, as `(x, y)` components.
    pub fn vector(&self, p: Point) -> [[f64; 2]; 6] {
        let (z, w) = self.scaled(p);
        [[1.0, 0.0], [0.0, 1.0], [-w, z], [w, z], [z, 0.0], [0.0, w]]
    }

    /// Voigt strains of the six vector monomials.
    pub fn strains(&self) -> [Vector3<f64>; 6] {
        let s = 1.0 / self.h;
        [
            Vector3::zeros(),
            Vector3::zeros(),
            Vector3::zeros(),
            Vector3::new(0.0, 0.0, 2.0 * s),
            Vector3::new(s, 0.0, 0.0),
            Vector3::new(0.0, s, 0.0),
        ]
    }
}

fn geometry(coords: &[Point], element: usize) -> Result<PolygonGeometry, KernelError> {
    PolygonGeometry::from_coords(coords).map_err(|reason| KernelError::Degenerate { element, reason })
}

/// Projection data for the scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalProjection {
    pub basis: ScaledMonomials,
    pub area: f64,
    /// Closed 3×3 projection matrix (row 0 holds the vertex-average condition).
    pub g: DMatrix<f64>,
    /// Closed 3×n_v right-hand side.
    pub b: DMatrix<f64>,
    /// `G⁻¹B`, 3×n_v: polynomial coefficients of the projection.
    pub pi_star: DMatrix<f64>,
    /// Basis values at the vertices, n_v×3.
    pub d: DMatrix<f64>,
    /// `D Π̃`, n_v×n_v.
    pub pi: DMatrix<f64>,
}

pub fn thermal_projection(
    coords: &[Point],
    props: &MaterialProps,
    element: usize,
) -> Result<ThermalProjection, KernelError> {
    let geom = geometry(coords, element)?;
    let nv = coords.len();
    let basis = ScaledMonomials {
        centroid: geom.centroid,
        h: geom.diameter,
    };
    let lam = props.conductivity;
    let grads = [[0.0, 0.0], [1.0 / basis.h, 0.0], [0.0, 1.0 / basis.h]];
    let d = DMatrix::from_fn(nv, 3, |i, b| basis.scalar(coords[i])[b]);
    let w = geom.vertex_normal_weights();

    let mut g = DMatrix::zeros(3, 3);
    let mut bm = DMatrix::zeros(3, nv);
    for a in 1..3 {
        for b in 0..3 {
            g[(a, b)] = lam * geom.area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
        }
        for i in 0..nv {
            bm[(a, i)] = lam * (grads[a][0] * w[i][0] + grads[a][1] * w[i][1]);
        }
    }
    for b in 0..3 {
        g[(0, b)] = d.column(b).sum() / nv as f64;
    }
    for i in 0..nv {
        bm[(0, i)] = 1.0 / nv as f64;
    }
    let pi_star = g
        .clone()
        .lu()
        .solve(&bm)
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(KernelError::SingularProjection { element })?;
    let pi = &d * &pi_star;
    Ok(ThermalProjection {
        basis,
        area: geom.area,
        g,
        b: bm,
        pi_star,
        d,
        pi,
    })
}

impl ThermalProjection {
    pub fn n_vertices(&self) -> usize {
        self.d.nrows()
    }

    /// Consistency part `Π̃ᵀ G' Π̃`, with `G'` the unclosed gradient matrix.
    pub fn consistency(&self) -> DMatrix<f64> {
        let mut g0 = self.g.clone();
        g0.row_mut(0).fill(0.0);
        self.pi_star.transpose() * g0 * &self.pi_star
    }

    /// Value of the projected polynomial at `p` for nodal values `t`.
    pub fn evaluate(&self, t: &[f64], p: Point) -> f64 {
        let c = &self.pi_star * DVector::from_column_slice(t);
        let m = self.basis.scalar(p);
        c[0] * m[0] + c[1] * m[1] + c[2] * m[2]
    }
}

fn stabilization(kc: &DMatrix<f64>, pi: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let n = pi.nrows();
    let r = DMatrix::identity(n, n) - pi;
    r.transpose() * r * (tau * kc.trace())
}

fn symmetrize(k: DMatrix<f64>) -> DMatrix<f64> {
    (&k + k.transpose()) * 0.5
}

/// Split element conduction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VemStiffness {
    pub consistency: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
}

impl VemStiffness {
    pub fn total(&self) -> DMatrix<f64> {
        &self.consistency + &self.stabilization
    }
}

pub fn thermal_stiffness_parts(proj: &ThermalProjection, tau: f64) -> VemStiffness {
    let kc = symmetrize(proj.consistency());
    let ks = symmetrize(stabilization(&kc, &proj.pi, tau));
    VemStiffness {
        consistency: kc,
        stabilization: ks,
    }
}

/// `K_c + τ tr(K_c) (I − Π)ᵀ(I − Π)`.
pub fn thermal_element_matrices(proj: &ThermalProjection, tau: f64) -> DMatrix<f64> {
    thermal_stiffness_parts(proj, tau).total()
}

/// Projection data for the displacement field; dofs interleaved `[ux0, uy0, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticProjection {
    pub basis: ScaledMonomials,
    pub area: f64,
    pub elasticity: Matrix3<f64>,
    /// Unclosed energy matrix `area ε(m)ᵀ D ε(m)`, 6×6.
    pub m: DMatrix<f64>,
    /// Closed 6×6 system matrix.
    pub m_closed: DMatrix<f64>,
    /// Closed 6×2n_v right-hand side.
    pub b_bar: DMatrix<f64>,
    /// `M̃⁻¹ B̄`, 6×2n_v.
    pub pi_star: DMatrix<f64>,
    /// Basis values at the vertices, 2n_v×6.
    pub d_bar: DMatrix<f64>,
    /// `D̄ Π̃`, 2n_v×2n_v.
    pub pi: DMatrix<f64>,
}

pub fn elastic_projection(
    coords: &[Point],
    props: &MaterialProps,
    element: usize,
) -> Result<ElasticProjection, KernelError> {
    let geom = geometry(coords, element)?;
    let dmat = elasticity_matrix(props).map_err(|source| KernelError::Material { element, source })?;
    let nv = coords.len();
    let basis = ScaledMonomials {
        centroid: geom.centroid,
        h: geom.diameter,
    };
    let eps = basis.strains();
    let w = geom.vertex_normal_weights();

    let m = DMatrix::from_fn(6, 6, |a, b| geom.area * eps[a].dot(&(dmat * eps[b])));
    let mut d_bar = DMatrix::zeros(2 * nv, 6);
    for (i, &p) in coords.iter().enumerate() {
        let v = basis.vector(p);
        for a in 0..6 {
            d_bar[(2 * i, a)] = v[a][0];
            d_bar[(2 * i + 1, a)] = v[a][1];
        }
    }

    let mut b_bar = DMatrix::zeros(6, 2 * nv);
    for a in 3..6 {
        let s = dmat * eps[a];
        for i in 0..nv {
            b_bar[(a, 2 * i)] = s[0] * w[i][0] + s[2] * w[i][1];
            b_bar[(a, 2 * i + 1)] = s[2] * w[i][0] + s[1] * w[i][1];
        }
    }
    let mut m_closed = m.clone();
    let inv_n = 1.0 / nv as f64;
    for b in 0..6 {
        let (mut sx, mut sy) = (0.0, 0.0);
        for i in 0..nv {
            sx += d_bar[(2 * i, b)];
            sy += d_bar[(2 * i + 1, b)];
        }
        m_closed[(0, b)] = sx * inv_n;
        m_closed[(1, b)] = sy * inv_n;
        m_closed[(2, b)] = 0.0;
    }
    // mean rotation ½(∂uy/∂x − ∂ux/∂y): only m3 rotates, at rate 1/h
    m_closed[(2, 2)] = 1.0 / basis.h;
    for i in 0..nv {
        b_bar[(0, 2 * i)] = inv_n;
        b_bar[(1, 2 * i + 1)] = inv_n;
        b_bar[(2, 2 * i)] = -w[i][1] / (2.0 * geom.area);
        b_bar[(2, 2 * i + 1)] = w[i][0] / (2.0 * geom.area);
    }
    let pi_star = m_closed
        .clone()
        .lu()
        .solve(&b_bar)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(KernelError::SingularProjection { element })?;
    let pi = &d_bar * &pi_star;
    Ok(ElasticProjection {
        basis,
        area: geom.area,
        elasticity: dmat,
        m,
        m_closed,
        b_bar,
        pi_star,
        d_bar,
        pi,
    })
}

impl ElasticProjection {
    pub fn n_vertices(&self) -> usize {
        self.d_bar.nrows() / 2
    }

    pub fn consistency(&self) -> DMatrix<f64> {
        self.pi_star.transpose() * &self.m * &self.pi_star
    }

    /// Voigt strain of the projected displacement.
    pub fn strain(&self, u: &[f64]) -> Vector3<f64> {
        let c = &self.pi_star * DVector::from_column_slice(u);
        let eps = self.basis.strains();
        (0..6).fold(Vector3::zeros(), |acc, a| acc + eps[a] * c[a])
    }

    /// Projected displacement at `p`.
    pub fn evaluate(&self, u: &[f64], p: Point) -> [f64; 2] {
        let c = &self.pi_star * DVector::from_column_slice(u);
        let v = self.basis.vector(p);
        let mut out = [0.0; 2];
        for a in 0..6 {
            out[0] += c[a] * v[a][0];
            out[1] += c[a] * v[a][1];
        }
        out
    }
}

pub fn elastic_stiffness_parts(proj: &ElasticProjection, tau: f64) -> VemStiffness {
    let kc = symmetrize(proj.consistency());
    let ks = symmetrize(stabilization(&kc, &proj.pi, tau));
    VemStiffness {
        consistency: kc,
        stabilization: ks,
    }
}

pub fn elastic_element_matrices(proj: &ElasticProjection, tau: f64) -> DMatrix<f64> {
    elastic_stiffness_parts(proj, tau).total()
}

/// Element temperature used for thermal strain: the centroid value of the
/// projected temperature, which equals the mean of the nodal values.
pub fn element_temperature(nodal_t: &[f64]) -> f64 {
    nodal_t.iter().sum::<f64>() / nodal_t.len() as f64
}

/// Thermal load `Π̃ᵀ area ε(m)ᵀ D ε_th(T_c)`.
pub fn vem_thermal_load(proj: &ElasticProjection, props: &MaterialProps, nodal_t: &[f64]) -> DVector<f64> {
    let sigma_th = proj.elasticity * thermal_strain_voigt(props, element_temperature(nodal_t));
    let eps = proj.basis.strains();
    let r = DVector::from_fn(6, |a, _| proj.area * eps[a].dot(&sigma_th));
    proj.pi_star.transpose() * r
}

/// Element-constant stress `D (ε(Π u) − ε_th(T_c))`.
pub fn vem_stress(proj: &ElasticProjection, props: &MaterialProps, u: &[f64], nodal_t: &[f64]) -> Vector3<f64> {
    proj.elasticity * (proj.strain(u) - thermal_strain_voigt(props, element_temperature(nodal_t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::PlaneCondition;
    use crate::mesh::random_star_polygon;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const UNIT: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    fn props(e: f64, nu: f64, k: f64) -> MaterialProps {
        MaterialProps {
            e,
            nu,
            conductivity: k,
            alpha: 1e-3,
            t0: 20.0,
            plane: PlaneCondition::Stress,
        }
    }

    fn sym_eigs(k: &DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = k.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }

    #[test]
    fn unit_square_thermal_projection() {
        let p = thermal_projection(&UNIT, &props(1.0, 0.0, 1.0), 0).unwrap();
        assert!((p.g[(1, 1)] - 0.5).abs() < 1e-15);
        assert!((p.g[(2, 2)] - 0.5).abs() < 1e-15);
        assert_eq!(p.g[(1, 2)], 0.0);
        let c = &p.pi_star * DVector::from_element(4, 3.0);
        assert!((c[0] - 3.0).abs() < 1e-14 && c[1].abs() < 1e-14 && c[2].abs() < 1e-14);
    }

    #[test]
    fn unit_square_energies_match_q4() {
        let pr = props(1.0, 0.0, 2.0);
        let p = thermal_projection(&UNIT, &pr, 0).unwrap();
        let kv = thermal_element_matrices(&p, DEFAULT_TAU);
        let kf = crate::fem::thermal_stiffness_q4(&UNIT, &pr, 0).unwrap();
        for (gx, gy) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let d = DVector::from_fn(4, |i, _| gx * UNIT[i][0] + gy * UNIT[i][1]);
            let exact = pr.conductivity * (gx * gx + gy * gy);
            assert!(((d.transpose() * &kv * &d)[0] - exact).abs() < 1e-13);
            let df = nalgebra::SVector::<f64, 4>::from_column_slice(d.as_slice());
            assert!(((df.transpose() * kf * df)[0] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn unit_square_elastic_energy_matrix() {
        let p = elastic_projection(&UNIT, &props(1.0, 0.0, 1.0), 0).unwrap();
        assert!((p.m[(4, 4)] - 0.5).abs() < 1e-15);
        let eig = sym_eigs(&p.m);
        assert!(eig[..3].iter().all(|e| e.abs() < 1e-14) && eig[3] > 0.1);
    }

    #[test]
    fn rigid_translation_projects_to_itself() {
        let coords = [[0.0, 0.0], [2.0, 0.2], [2.5, 1.5], [1.0, 2.2], [-0.4, 1.0]];
        let p = elastic_projection(&coords, &props(5.0, 0.25, 1.0), 0).unwrap();
        let u: Vec<f64> = (0..5).flat_map(|_| [0.3, -0.7]).collect();
        let c = &p.pi_star * DVector::from_column_slice(&u);
        let expected = [0.3, -0.7, 0.0, 0.0, 0.0, 0.0];
        for a in 0..6 {
            assert!((c[a] - expected[a]).abs() < 1e-13);
        }
        assert!(p.strain(&u).norm() < 1e-13);
    }

    #[test]
    fn constant_stress_patch_gives_exact_tractions() {
        let coords = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let pr = props(3.0, 0.2, 1.0);
        let p = elastic_projection(&coords, &pr, 0).unwrap();
        let k = elastic_element_matrices(&p, DEFAULT_TAU);
        // u = (a x + b y, c x + d y)
        let (a, b, c, d) = (0.01, 0.004, -0.002, 0.02);
        let u = DVector::from_fn(8, |r, _| {
            let q = coords[r / 2];
            if r % 2 == 0 {
                a * q[0] + b * q[1]
            } else {
                c * q[0] + d * q[1]
            }
        });
        let sigma = p.elasticity * Vector3::new(a, d, b + c);
        let w = PolygonGeometry::from_coords(&coords).unwrap().vertex_normal_weights();
        let f = &k * &u;
        for i in 0..4 {
            let tx = sigma[0] * w[i][0] + sigma[2] * w[i][1];
            let ty = sigma[2] * w[i][0] + sigma[1] * w[i][1];
            assert!((f[2 * i] - tx).abs() < 1e-14 && (f[2 * i + 1] - ty).abs() < 1e-14);
        }
    }

    #[test]
    fn thermal_load_linearity() {
        let pr = props(10.0, 0.3, 1.0);
        let p = elastic_projection(&UNIT, &pr, 0).unwrap();
        assert_eq!(vem_thermal_load(&p, &pr, &[pr.t0; 4]).norm(), 0.0);
        let up = vem_thermal_load(&p, &pr, &[pr.t0 + 5.0; 4]);
        let down = vem_thermal_load(&p, &pr, &[pr.t0 - 5.0; 4]);
        assert!((up + down).norm() < 1e-15);
    }

    #[test]
    fn constant_scalar_is_reproduced_through_evaluation() {
        let coords = [[0.0, 0.0], [2.0, 0.2], [2.5, 1.5], [1.0, 2.2], [-0.4, 1.0]];
        let p = thermal_projection(&coords, &props(1.0, 0.0, 1.0), 0).unwrap();
        assert!((p.evaluate(&[4.0; 5], [1.0, 1.0]) - 4.0).abs() < 1e-13);
    }

    fn polygon_strategy() -> impl Strategy<Value = Vec<Point>> {
        (3usize..=10, any::<u64>(), any::<bool>()).prop_map(|(n, seed, convex)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_star_polygon(&mut rng, n, convex)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn thermal_reproduction_and_nullspace(coords in polygon_strategy()) {
            let p = thermal_projection(&coords, &props(1.0, 0.0, 0.7), 0).unwrap();
            prop_assert!((&p.pi * &p.d - &p.d).abs().max() < 1e-9);
            let parts = thermal_stiffness_parts(&p, DEFAULT_TAU);
            let k = parts.total();
            prop_assert!((&k - k.transpose()).abs().max() <= 1e-12 * k.abs().max());
            prop_assert!((&parts.stabilization * &p.d).abs().max() < 1e-9 * k.abs().max());
            let eig = sym_eigs(&k);
            let top = *eig.last().unwrap();
            prop_assert!(eig[0].abs() < 1e-9 * top);
            prop_assert!(eig[1] > 1e-9 * top);
        }

        #[test]
        fn elastic_reproduction_and_nullspace(coords in polygon_strategy(), nu in 0.0f64..0.45) {
            let p = elastic_projection(&coords, &props(100.0, nu, 1.0), 0).unwrap();
            prop_assert!((&p.pi * &p.d_bar - &p.d_bar).abs().max() < 1e-9);
            let parts = elastic_stiffness_parts(&p, DEFAULT_TAU);
            let k = parts.total();
            prop_assert!((&k - k.transpose()).abs().max() <= 1e-12 * k.abs().max());
            prop_assert!((&parts.stabilization * &p.d_bar).abs().max() < 1e-9 * k.abs().max());
            let eig = sym_eigs(&k);
            let top = *eig.last().unwrap();
            prop_assert!(eig[..3].iter().all(|e| e.abs() < 1e-9 * top));
            prop_assert!(eig[3] > 1e-9 * top);
        }

        #[test]
        fn consistency_energy_is_exact(coords in polygon_strategy()) {
            let pr = props(50.0, 0.3, 2.0);
            let ep = elastic_projection(&coords, &pr, 0).unwrap();
            let kc = ep.consistency();
            let eps = ep.basis.strains();
            for a in 3..6 {
                let d = ep.d_bar.column(a);
                let energy = (d.transpose() * &kc * d)[0];
                let exact = ep.area * eps[a].dot(&(ep.elasticity * eps[a]));
                prop_assert!((energy - exact).abs() <= 1e-9 * exact);
            }
            let tp = thermal_projection(&coords, &pr, 0).unwrap();
            let kt = tp.consistency();
            for b in 1..3 {
                let d = tp.d.column(b);
                let energy = (d.transpose() * &kt * d)[0];
                let exact = pr.conductivity * tp.area / (tp.basis.h * tp.basis.h);
                prop_assert!((energy - exact).abs() <= 1e-9 * exact);
            }
        }

        #[test]
        fn scale_invariance(coords in polygon_strategy(), c in 0.01f64..100.0) {
            let pr = props(20.0, 0.25, 1.3);
            let scaled: Vec<Point> = coords.iter().map(|p| [c * p[0], c * p[1]]).collect();
            let k1 = thermal_element_matrices(&thermal_projection(&coords, &pr, 0).unwrap(), DEFAULT_TAU);
            let k2 = thermal_element_matrices(&thermal_projection(&scaled, &pr, 0).unwrap(), DEFAULT_TAU);
            prop_assert!((&k1 - &k2).abs().max() <= 1e-10 * k1.abs().max());
            let e1 = elastic_element_matrices(&elastic_projection(&coords, &pr, 0).unwrap(), DEFAULT_TAU);
            let e2 = elastic_element_matrices(&elastic_projection(&scaled, &pr, 0).unwrap(), DEFAULT_TAU);
            prop_assert!((&e1 - &e2).abs().max() <= 1e-10 * e1.abs().max());
            let k3 = thermal_element_matrices(&thermal_projection(&coords, &pr.with_conductivity(3.0 * pr.conductivity), 0).unwrap(), DEFAULT_TAU);
            prop_assert!((&k3 - &k1 * 3.0).abs().max() <= 1e-12 * k3.abs().max());
        }
    }
}
