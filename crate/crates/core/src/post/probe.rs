//! Sampling fields along straight lines.

use std::fmt;

use crate::fem::{q4_inverse_map, q4_shape_values};
use crate::materials::MaterialMap;
use crate::mesh::{point_in_polygon, segment_distance, ElementKind, Mesh, Point};
use crate::vem::{elastic_projection, thermal_projection};

use super::{ElementStress, PostError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeQuantity {
    Temperature,
    Ux,
    Uy,
    /// Area-averaged nodal von Mises, interpolated like a nodal field.
    NodalVonMises,
    /// Element-constant von Mises.
    VonMises,
    Sxx,
    Syy,
    Sxy,
}

impl ProbeQuantity {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "temperature" | "T" => ProbeQuantity::Temperature,
            "ux" => ProbeQuantity::Ux,
            "uy" => ProbeQuantity::Uy,
            "von_mises_nodal" => ProbeQuantity::NodalVonMises,
            "von_mises" => ProbeQuantity::VonMises,
            "sxx" => ProbeQuantity::Sxx,
            "syy" => ProbeQuantity::Syy,
            "sxy" => ProbeQuantity::Sxy,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProbeQuantity::Temperature => "temperature",
            ProbeQuantity::Ux => "ux",
            ProbeQuantity::Uy => "uy",
            ProbeQuantity::NodalVonMises => "von_mises_nodal",
            ProbeQuantity::VonMises => "von_mises",
            ProbeQuantity::Sxx => "sxx",
            ProbeQuantity::Syy => "syy",
            ProbeQuantity::Sxy => "sxy",
        }
    }

    fn is_nodal(self) -> bool {
        matches!(
            self,
            ProbeQuantity::Temperature | ProbeQuantity::Ux | ProbeQuantity::Uy | ProbeQuantity::NodalVonMises
        )
    }
}

impl fmt::Display for ProbeQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Solved data a probe reads from.
#[derive(Debug, Clone, Copy)]
pub struct NodalField<'a> {
    pub mesh: &'a Mesh,
    pub materials: &'a MaterialMap,
    pub temperature: &'a [f64],
    pub displacement: &'a [[f64; 2]],
    pub stresses: &'a [ElementStress],
    pub nodal_von_mises: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSample {
    /// Distance from the line start, mm.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// `None` outside the mesh.
    pub value: Option<f64>,
    /// Element the sample was attributed to.
    pub element: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineProbe {
    pub start: Point,
    pub end: Point,
    pub quantity: ProbeQuantity,
    pub samples: Vec<ProbeSample>,
}

struct Located {
    owner: usize,
    /// Edge `(a, b, t)` when the point lies on an element edge.
    edge: Option<(usize, usize, f64)>,
}

fn bbox(coords: &[Point]) -> [f64; 4] {
    coords.iter().fold([f64::MAX, f64::MAX, f64::MIN, f64::MIN], |b, p| {
        [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
    })
}

fn locate(mesh: &Mesh, boxes: &[[f64; 4]], p: Point, tol: f64) -> Option<Located> {
    let mut owner = None;
    let mut edge = None;
    for e in mesh.elements() {
        let b = boxes[e.id];
        if p[0] < b[0] - tol || p[0] > b[2] + tol || p[1] < b[1] - tol || p[1] > b[3] + tol {
            continue;
        }
        let coords = mesh.element_coords(e);
        let mut on_edge = None;
        for (k, (a, bn)) in e.edges().enumerate() {
            let (d, t) = segment_distance(p, coords[k], coords[(k + 1) % coords.len()]);
            if d <= tol {
                on_edge = Some((a, bn, t));
                break;
            }
        }
        if on_edge.is_some() || point_in_polygon(p, &coords) {
            // elements are visited in id order, so the first hit is the lowest id
            owner = Some(e.id);
            edge = on_edge;
            break;
        }
    }
    owner.map(|owner| Located { owner, edge })
}

fn nodal_values(field: &NodalField<'_>, q: ProbeQuantity) -> Vec<f64> {
    match q {
        ProbeQuantity::Temperature => field.temperature.to_vec(),
        ProbeQuantity::Ux => field.displacement.iter().map(|u| u[0]).collect(),
        ProbeQuantity::Uy => field.displacement.iter().map(|u| u[1]).collect(),
        ProbeQuantity::NodalVonMises => field.nodal_von_mises.to_vec(),
        _ => unreachable!("element quantity"),
    }
}

fn element_value(field: &NodalField<'_>, q: ProbeQuantity, element: usize) -> f64 {
    let s = &field.stresses[element];
    match q {
        ProbeQuantity::VonMises => s.von_mises,
        ProbeQuantity::Sxx => s.sigma[0],
        ProbeQuantity::Syy => s.sigma[1],
        ProbeQuantity::Sxy => s.sigma[2],
        _ => unreachable!("nodal quantity"),
    }
}

fn interior_value(field: &NodalField<'_>, q: ProbeQuantity, values: &[f64], element: usize, p: Point) -> Option<f64> {
    let mesh = field.mesh;
    let e = &mesh.elements()[element];
    let coords = mesh.element_coords(e);
    match e.kind {
        ElementKind::FeQuad => {
            let c: [Point; 4] = [coords[0], coords[1], coords[2], coords[3]];
            let (xi, eta) = q4_inverse_map(&c, p, 1e-6)?;
            let n = q4_shape_values(xi, eta);
            Some((0..4).map(|i| n[i] * values[e.vertices[i]]).sum())
        }
        ElementKind::VePoly => {
            let props = field.materials.get(&e.region)?;
            match q {
                ProbeQuantity::Ux | ProbeQuantity::Uy => {
                    let proj = elastic_projection(&coords, props, e.id).ok()?;
                    let u: Vec<f64> = e.vertices.iter().flat_map(|&v| field.displacement[v]).collect();
                    let w = proj.evaluate(&u, p);
                    Some(if q == ProbeQuantity::Ux { w[0] } else { w[1] })
                }
                _ => {
                    let proj = thermal_projection(&coords, props, e.id).ok()?;
                    let t: Vec<f64> = e.vertices.iter().map(|&v| values[v]).collect();
                    Some(proj.evaluate(&t, p))
                }
            }
        }
    }
}

/// Parameters in `[0, 1]` where the segment crosses element edges.
fn edge_crossings(mesh: &Mesh, a: Point, b: Point) -> Vec<f64> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut out = Vec::new();
    for edge in mesh.edge_elements().keys() {
        let (i, j) = edge.nodes();
        let (p, q) = (mesh.point(i), mesh.point(j));
        let e = [q[0] - p[0], q[1] - p[1]];
        let den = d[0] * e[1] - d[1] * e[0];
        if den.abs() < 1e-14 * (d[0].hypot(d[1]) * e[0].hypot(e[1])) {
            continue;
        }
        let w = [p[0] - a[0], p[1] - a[1]];
        let s = (w[0] * e[1] - w[1] * e[0]) / den;
        let u = (w[0] * d[1] - w[1] * d[0]) / den;
        if (0.0..=1.0).contains(&s) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            out.push(s);
        }
    }
    out
}

/// Samples `quantity` along `start`–`end` at `n_samples` uniform points plus
/// every crossing with an element edge.
///
/// Nodal quantities use the bilinear map inside FE elements, the projected
/// polynomial inside VE elements and the linear trace on element edges, so
/// values on shared edges do not depend on which side is chosen. Element
/// quantities take the value of the lowest-id element containing the point.
pub fn line_probe(
    field: &NodalField<'_>,
    start: Point,
    end: Point,
    n_samples: usize,
    quantity: ProbeQuantity,
) -> Result<LineProbe, PostError> {
    let mesh = field.mesh;
    let len = (end[0] - start[0]).hypot(end[1] - start[1]);
    let n = n_samples.max(2);
    let mut params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    params.extend(edge_crossings(mesh, start, end));
    params.sort_by(|a, b| a.total_cmp(b));
    params.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let boxes: Vec<[f64; 4]> = mesh.elements().iter().map(|e| bbox(&mesh.element_coords(e))).collect();
    let extent = boxes.iter().fold(0.0f64, |m, b| m.max(b[2] - b[0]).max(b[3] - b[1]));
    let tol = 1e-9 * extent.max(len);
    let values = quantity.is_nodal().then(|| nodal_values(field, quantity));

    let mut samples = Vec::with_capacity(params.len());
    for &t in &params {
        let p = [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])];
        let loc = locate(mesh, &boxes, p, tol);
        let (value, element) = match loc {
            None => (None, None),
            Some(l) => {
                let v = match &values {
                    None => Some(element_value(field, quantity, l.owner)),
                    Some(vals) => match l.edge {
                        Some((a, b, s)) => Some((1.0 - s) * vals[a] + s * vals[b]),
                        None => interior_value(field, quantity, vals, l.owner, p),
                    },
                };
                (v, Some(l.owner))
            }
        };
        samples.push(ProbeSample {
            s: t * len,
            x: p[0],
            y: p[1],
            value,
            element,
        });
    }
    if samples.iter().all(|s| s.value.is_none()) {
        return Err(PostError::ProbeOutsideMesh);
    }
    Ok(LineProbe {
        start,
        end,
        quantity,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{MaterialProps, PlaneCondition};
    use crate::mesh::{generate_voronoi_rect, Mesh};

    fn mats() -> MaterialMap {
        [(
            0,
            MaterialProps {
                e: 1.0,
                nu: 0.3,
                conductivity: 1.0,
                alpha: 0.0,
                t0: 0.0,
                plane: PlaneCondition::Stress,
            },
        )]
        .into_iter()
        .collect()
    }

    fn mixed_mesh() -> Mesh {
        let m = crate::mesh::generate_structured_quads(2.0, 1.0, 6, 3, ElementKind::FeQuad).unwrap();
        let (nodes, mut elements, edges) = m.into_parts();
        for e in &mut elements {
            if e.id % 6 >= 3 {
                e.kind = ElementKind::VePoly;
            }
        }
        Mesh::new(nodes, elements, edges)
    }

    fn probe_linear(mesh: &Mesh, a: Point, b: Point) -> LineProbe {
        let t: Vec<f64> = mesh.nodes().iter().map(|n| 1.0 + 2.0 * n.x - 3.0 * n.y).collect();
        let u = vec![[0.0; 2]; mesh.n_nodes()];
        let field = NodalField {
            mesh,
            materials: &mats(),
            temperature: &t,
            displacement: &u,
            stresses: &[],
            nodal_von_mises: &[],
        };
        line_probe(&field, a, b, 17, ProbeQuantity::Temperature).unwrap()
    }

    #[test]
    fn linear_field_along_chords() {
        let mesh = mixed_mesh();
        for (a, b) in [([0.0, 0.1], [2.0, 0.93]), ([0.05, 0.95], [1.9, 0.02]), ([1.0, 0.0], [1.0, 1.0])] {
            let probe = probe_linear(&mesh, a, b);
            for s in &probe.samples {
                let exact = 1.0 + 2.0 * s.x - 3.0 * s.y;
                assert!((s.value.unwrap() - exact).abs() < 1e-9, "{s:?}");
            }
            assert!(probe.samples.windows(2).all(|w| w[0].s < w[1].s));
        }
    }

    #[test]
    fn linear_field_on_voronoi_mesh() {
        let mesh = generate_voronoi_rect(1.0, 1.0, 30, 3, 2).unwrap();
        let probe = probe_linear(&mesh, [0.0, 0.3], [1.0, 0.8]);
        // crossings add samples beyond the uniform ones
        assert!(probe.samples.len() > 17);
        for s in &probe.samples {
            assert!((s.value.unwrap() - (1.0 + 2.0 * s.x - 3.0 * s.y)).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_outside_and_error_when_disjoint() {
        let mesh = mixed_mesh();
        let probe = probe_linear(&mesh, [-1.0, 0.5], [1.0, 0.5]);
        assert!(probe.samples[0].value.is_none());
        assert!(probe.samples.last().unwrap().value.is_some());
        let t = vec![0.0; mesh.n_nodes()];
        let u = vec![[0.0; 2]; mesh.n_nodes()];
        let field = NodalField {
            mesh: &mesh,
            materials: &mats(),
            temperature: &t,
            displacement: &u,
            stresses: &[],
            nodal_von_mises: &[],
        };
        assert_eq!(
            line_probe(&field, [5.0, 5.0], [6.0, 6.0], 5, ProbeQuantity::Temperature),
            Err(PostError::ProbeOutsideMesh)
        );
    }
}
