//! Stress recovery, error norms, nodal averaging, probes and export.

mod export;
mod probe;

pub use export::{probe_csv, vtk_legacy, write_probe_csv, write_vtk};
pub use probe::{line_probe, LineProbe, NodalField, ProbeQuantity, ProbeSample};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::assembly::AssemblyError;
use crate::fem::q4_stress;
use crate::materials::{MaterialMap, PlaneCondition};
use crate::mesh::{Element, ElementKind, Mesh, Point};
use crate::solver::SolutionFields;
use crate::vem::{elastic_projection, vem_stress};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PostError {
    #[error("sample sets differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty sample set")]
    Empty,
    #[error("exact field is identically zero, normalization undefined")]
    ZeroNormalization,
    #[error("all {0} reference values fall below the exclusion floor")]
    AllExcluded(usize),
    #[error("probe line misses the mesh entirely")]
    ProbeOutsideMesh,
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StressSource {
    /// Mean of the four Gauss point stresses.
    FeGaussAverage,
    /// Constant stress of the projected displacement.
    VeProjected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementStress {
    /// Voigt `(σxx, σyy, σxy)` in MPa.
    pub sigma: [f64; 3],
    pub von_mises: f64,
    pub source: StressSource,
}

/// Equivalent stress. Plane strain adds `σzz = ν (σxx + σyy)`.
pub fn von_mises(sigma: [f64; 3], plane: PlaneCondition, nu: f64) -> f64 {
    let [sx, sy, txy] = sigma;
    match plane {
        PlaneCondition::Stress => (sx * sx - sx * sy + sy * sy + 3.0 * txy * txy).max(0.0).sqrt(),
        PlaneCondition::Strain => {
            let sz = nu * (sx + sy);
            (0.5 * ((sx - sy).powi(2) + (sy - sz).powi(2) + (sz - sx).powi(2)) + 3.0 * txy * txy)
                .max(0.0)
                .sqrt()
        }
    }
}

/// Per-element stresses from a solved displacement and temperature field.
pub fn recover_stress(
    mesh: &Mesh,
    materials: &MaterialMap,
    solution: &SolutionFields,
) -> Result<Vec<ElementStress>, AssemblyError> {
    mesh.elements()
        .par_iter()
        .map(|e| {
            let props = materials.get(&e.region).ok_or(AssemblyError::MissingMaterial {
                element: e.id,
                region: e.region,
            })?;
            let nodal_t: Vec<f64> = e.vertices.iter().map(|&v| solution.temperature[v]).collect();
            let u: Vec<f64> = e.vertices.iter().flat_map(|&v| solution.displacement[v]).collect();
            let (s, source): (Vector3<f64>, _) = match e.kind {
                ElementKind::FeQuad => {
                    let c: [Point; 4] = std::array::from_fn(|i| mesh.point(e.vertices[i]));
                    let u8: [f64; 8] = std::array::from_fn(|i| u[i]);
                    let t4 = [nodal_t[0], nodal_t[1], nodal_t[2], nodal_t[3]];
                    (q4_stress(&c, props, &u8, &t4, e.id)?, StressSource::FeGaussAverage)
                }
                ElementKind::VePoly => {
                    let p = elastic_projection(&mesh.element_coords(e), props, e.id)?;
                    (vem_stress(&p, props, &u, &nodal_t), StressSource::VeProjected)
                }
            };
            let sigma = [s[0], s[1], s[2]];
            Ok(ElementStress {
                sigma,
                von_mises: von_mises(sigma, props.plane, props.nu),
                source,
            })
        })
        .collect()
}

/// `sqrt(mean |X − X_e|²) / max |X_e|`.
pub fn rms_l2_error(numeric: &[f64], exact: &[f64]) -> Result<f64, PostError> {
    if numeric.len() != exact.len() {
        return Err(PostError::LengthMismatch(numeric.len(), exact.len()));
    }
    if numeric.is_empty() {
        return Err(PostError::Empty);
    }
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(PostError::ZeroNormalization);
    }
    let ms = numeric.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / numeric.len() as f64;
    Ok(ms.sqrt() / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanRelativeError {
    pub value: f64,
    pub n_used: usize,
    /// Samples skipped because `|ref| < 1e-8 max |ref|`.
    pub n_excluded: usize,
}

/// `mean |(σ − σ_ref) / σ_ref|` over samples with a non-negligible reference.
pub fn mean_relative_error(numeric: &[f64], reference: &[f64]) -> Result<MeanRelativeError, PostError> {
    if numeric.len() != reference.len() {
        return Err(PostError::LengthMismatch(numeric.len(), reference.len()));
    }
    if numeric.is_empty() {
        return Err(PostError::Empty);
    }
    let floor = 1e-8 * reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut sum, mut used) = (0.0, 0usize);
    for (&a, &r) in numeric.iter().zip(reference) {
        if r.abs() < floor || r == 0.0 {
            continue;
        }
        sum += ((a - r) / r).abs();
        used += 1;
    }
    if used == 0 {
        return Err(PostError::AllExcluded(numeric.len()));
    }
    Ok(MeanRelativeError {
        value: sum / used as f64,
        n_used: used,
        n_excluded: numeric.len() - used,
    })
}

/// Area-weighted average of element values at each node, over the elements
/// accepted by `include`. Nodes with no accepted element get `None`.
pub fn nodal_average<F>(mesh: &Mesh, element_values: &[f64], include: F) -> Vec<Option<f64>>
where
    F: Fn(&Element) -> bool,
{
    let mut num = vec![0.0; mesh.n_nodes()];
    let mut den = vec![0.0; mesh.n_nodes()];
    for e in mesh.elements() {
        if !include(e) {
            continue;
        }
        let area = crate::mesh::signed_area(&mesh.element_coords(e)).abs();
        for &v in &e.vertices {
            num[v] += area * element_values[e.id];
            den[v] += area;
        }
    }
    num.iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { Some(n / d) } else { None })
        .collect()
}

/// Nodal von Mises from area-averaged element values over all elements.
pub fn nodal_von_mises(mesh: &Mesh, stresses: &[ElementStress]) -> Vec<f64> {
    let vm: Vec<f64> = stresses.iter().map(|s| s.von_mises).collect();
    nodal_average(mesh, &vm, |_| true)
        .into_iter()
        .map(|v| v.unwrap_or(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn von_mises_values() {
        let s = PlaneCondition::Stress;
        assert!((von_mises([0.0, 0.0, 2.0], s, 0.3) - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        assert!((von_mises([5.0, 5.0, 0.0], s, 0.3) - 5.0).abs() < 1e-14);
        assert_eq!(von_mises([0.0; 3], s, 0.3), 0.0);
        // plane strain reduces to plane stress when nu = 0
        let a = [3.0, -1.0, 0.5];
        assert!((von_mises(a, PlaneCondition::Strain, 0.0) - von_mises(a, s, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn rms_values() {
        assert_eq!(rms_l2_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let e = rms_l2_error(&[1.0, 3.0], &[1.0, 2.0]).unwrap();
        assert!((e - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!((e - 0.35355).abs() < 1e-5);
        let c = rms_l2_error(&[1.5, 2.5, 3.5], &[1.0, 2.0, 3.0]).unwrap();
        assert!((c - 0.5 / 3.0).abs() < 1e-15);
        assert_eq!(rms_l2_error(&[1.0], &[0.0]), Err(PostError::ZeroNormalization));
        assert_eq!(rms_l2_error(&[1.0], &[1.0, 2.0]), Err(PostError::LengthMismatch(1, 2)));
    }

    #[test]
    fn mre_values() {
        assert_eq!(mean_relative_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap().value, 0.0);
        let m = mean_relative_error(&[1.1, 0.9], &[1.0, 1.0]).unwrap();
        assert!((m.value - 0.1).abs() < 1e-15);
        let m = mean_relative_error(&[2.2, 4.4, 1.0], &[2.0, 4.0, 0.0]).unwrap();
        assert!((m.value - 0.1).abs() < 1e-15);
        assert_eq!((m.n_used, m.n_excluded), (2, 1));
        assert_eq!(mean_relative_error(&[1.0], &[0.0]), Err(PostError::AllExcluded(1)));
    }

    proptest! {
        #[test]
        fn von_mises_rotation_invariance(sx in -100.0f64..100.0, sy in -100.0f64..100.0, txy in -100.0f64..100.0) {
            let base = von_mises([sx, sy, txy], PlaneCondition::Stress, 0.3);
            let base_strain = von_mises([sx, sy, txy], PlaneCondition::Strain, 0.3);
            for k in 0..10 {
                let t = 0.37 * k as f64;
                let (s, c) = t.sin_cos();
                let rx = c * c * sx + s * s * sy + 2.0 * s * c * txy;
                let ry = s * s * sx + c * c * sy - 2.0 * s * c * txy;
                let rxy = (sy - sx) * s * c + (c * c - s * s) * txy;
                let v = von_mises([rx, ry, rxy], PlaneCondition::Stress, 0.3);
                prop_assert!((v - base).abs() <= 1e-10 * base.max(1e-300) + 1e-12);
                let w = von_mises([rx, ry, rxy], PlaneCondition::Strain, 0.3);
                prop_assert!((w - base_strain).abs() <= 1e-10 * base_strain.max(1e-300) + 1e-12);
            }
        }

        #[test]
        fn error_norms_are_scale_invariant(v in prop::collection::vec((0.1f64..10.0, -1.0f64..1.0), 1..30), k in 0.01f64..100.0) {
            let exact: Vec<f64> = v.iter().map(|p| p.0).collect();
            let num: Vec<f64> = v.iter().map(|p| p.0 + p.1).collect();
            let e1 = rms_l2_error(&num, &exact).unwrap();
            let m1 = mean_relative_error(&num, &exact).unwrap().value;
            prop_assert!(e1 >= 0.0 && m1 >= 0.0);
            let ks: Vec<f64> = exact.iter().map(|x| x * k).collect();
            let kn: Vec<f64> = num.iter().map(|x| x * k).collect();
            prop_assert!((rms_l2_error(&kn, &ks).unwrap() - e1).abs() <= 1e-12 * (1.0 + e1));
            prop_assert!((mean_relative_error(&kn, &ks).unwrap().value - m1).abs() <= 1e-12 * (1.0 + m1));
            prop_assert_eq!(rms_l2_error(&exact, &exact).unwrap(), 0.0);
        }
    }
}
