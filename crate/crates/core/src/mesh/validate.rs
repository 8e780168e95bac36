use std::collections::BTreeMap;
use std::fmt;

use super::{polygon_diameter, signed_area, Edge, ElementKind, Mesh, Point};

/// One broken mesh invariant, naming the offending ids.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NodeIdNotDense { position: usize, id: usize },
    NonFiniteNode { node: usize },
    ElementIdNotDense { position: usize, id: usize },
    TooFewVertices { element: usize, count: usize },
    FeVertexCount { element: usize, count: usize },
    InvalidVertex { element: usize, node: usize },
    RepeatedVertex { element: usize, node: usize },
    ZeroLengthEdge { element: usize, edge: usize },
    Clockwise { element: usize },
    ZeroArea { element: usize },
    SelfIntersecting { element: usize },
    EdgeOvershared { edge: Edge, count: usize },
    SameDirectionEdge { edge: Edge, elements: (usize, usize) },
    HangingNode { node: usize, edge: Edge, element: usize, across_interface: bool },
    UnknownLabelledEdge { edge: Edge, label: String },
    BadLabel { edge: Edge, label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NodeIdNotDense { position, id } => write!(f, "node at position {position} has id {id}"),
            NonFiniteNode { node } => write!(f, "node {node} has non-finite coordinates"),
            ElementIdNotDense { position, id } => write!(f, "element at position {position} has id {id}"),
            TooFewVertices { element, count } => write!(f, "element {element} has {count} vertices"),
            FeVertexCount { element, count } => {
                write!(f, "FE element {element} has {count} vertices (expected 4)")
            }
            InvalidVertex { element, node } => write!(f, "element {element} references missing node {node}"),
            RepeatedVertex { element, node } => write!(f, "element {element} repeats node {node}"),
            ZeroLengthEdge { element, edge } => write!(f, "element {element} edge {edge} has zero length"),
            Clockwise { element } => write!(f, "element {element} is clockwise"),
            ZeroArea { element } => write!(f, "element {element} has zero area"),
            SelfIntersecting { element } => write!(f, "element {element} is self-intersecting"),
            EdgeOvershared { edge, count } => write!(f, "edge {edge} is shared by {count} elements"),
            SameDirectionEdge { edge, elements } => write!(
                f,
                "edge {edge} is traversed in the same direction by elements {} and {}",
                elements.0, elements.1
            ),
            HangingNode {
                node,
                edge,
                element,
                across_interface,
            } => {
                if *across_interface {
                    write!(
                        f,
                        "FE/VE interface not coincident: node {node} hangs on edge {edge} of element {element}"
                    )
                } else {
                    write!(f, "node {node} hangs on edge {edge} of element {element}")
                }
            }
            UnknownLabelledEdge { edge, label } => {
                write!(f, "labelled edge {edge} ({label}) is not an element edge")
            }
            BadLabel { edge, label } => write!(f, "edge {edge} has unusable label {label:?}"),
        }
    }
}

/// Result of [`validate_mesh`]; empty iff the mesh is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violations", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Checks every mesh invariant and lists what is broken.
pub fn validate_mesh(mesh: &Mesh) -> ValidationReport {
    let mut out = Vec::new();
    let nodes = mesh.nodes();
    for (pos, n) in nodes.iter().enumerate() {
        if n.id != pos {
            out.push(Violation::NodeIdNotDense { position: pos, id: n.id });
        }
        if !(n.x.is_finite() && n.y.is_finite()) {
            out.push(Violation::NonFiniteNode { node: pos });
        }
    }

    let mut usable = vec![true; mesh.elements().len()];
    for (pos, e) in mesh.elements().iter().enumerate() {
        if e.id != pos {
            out.push(Violation::ElementIdNotDense { position: pos, id: e.id });
        }
        let nv = e.vertices.len();
        if nv < 3 {
            out.push(Violation::TooFewVertices { element: e.id, count: nv });
            usable[pos] = false;
        }
        if e.kind == ElementKind::FeQuad && nv != 4 {
            out.push(Violation::FeVertexCount { element: e.id, count: nv });
        }
        for &v in &e.vertices {
            if v >= nodes.len() {
                out.push(Violation::InvalidVertex { element: e.id, node: v });
                usable[pos] = false;
            }
        }
        let mut seen = e.vertices.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::RepeatedVertex {
                    element: e.id,
                    node: w[0],
                });
                usable[pos] = false;
            }
        }
        if !usable[pos] {
            continue;
        }
        let coords = mesh.element_coords(e);
        let h = polygon_diameter(&coords);
        for i in 0..nv {
            let a = coords[i];
            let b = coords[(i + 1) % nv];
            if !((a[0] - b[0]).hypot(a[1] - b[1]) > 1e-14 * h) {
                out.push(Violation::ZeroLengthEdge { element: e.id, edge: i });
            }
        }
        let area = signed_area(&coords);
        if area.abs() <= 1e-14 * h * h {
            out.push(Violation::ZeroArea { element: e.id });
        } else if area < 0.0 {
            out.push(Violation::Clockwise { element: e.id });
        }
        if self_intersecting(&coords) {
            out.push(Violation::SelfIntersecting { element: e.id });
        }
    }

    // directed use of each edge
    let mut uses: BTreeMap<Edge, Vec<(usize, bool)>> = BTreeMap::new();
    for (pos, e) in mesh.elements().iter().enumerate() {
        if !usable[pos] {
            continue;
        }
        for (a, b) in e.edges() {
            uses.entry(Edge::new(a, b)).or_default().push((e.id, a < b));
        }
    }
    for (edge, u) in &uses {
        if u.len() > 2 {
            out.push(Violation::EdgeOvershared {
                edge: *edge,
                count: u.len(),
            });
        } else if u.len() == 2 && u[0].1 == u[1].1 {
            out.push(Violation::SameDirectionEdge {
                edge: *edge,
                elements: (u[0].0, u[1].0),
            });
        }
    }

    for (edge, label) in mesh.boundary_edges() {
        if !uses.contains_key(edge) {
            out.push(Violation::UnknownLabelledEdge {
                edge: *edge,
                label: label.clone(),
            });
        }
        if label.is_empty() || label.chars().any(char::is_whitespace) || label.starts_with('#') {
            out.push(Violation::BadLabel {
                edge: *edge,
                label: label.clone(),
            });
        }
    }

    hanging_nodes(mesh, &uses, &mut out);
    ValidationReport { violations: out }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point, tol: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d.abs() <= tol
            && p[0] >= a[0].min(b[0]) - 1e-12
            && p[0] <= a[0].max(b[0]) + 1e-12
            && p[1] >= a[1].min(b[1]) - 1e-12
            && p[1] <= a[1].max(b[1]) + 1e-12
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Checks non-adjacent edge pairs for contact.
pub(crate) fn self_intersecting(coords: &[Point]) -> bool {
    let n = coords.len();
    if n < 4 {
        return false;
    }
    let h = polygon_diameter(coords);
    let tol = 1e-12 * h * h;
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_touch(coords[i], coords[(i + 1) % n], coords[j], coords[(j + 1) % n], tol) {
                return true;
            }
        }
    }
    false
}

/// T-junctions: a node lying strictly inside an edge used by only one element.
fn hanging_nodes(mesh: &Mesh, uses: &BTreeMap<Edge, Vec<(usize, bool)>>, out: &mut Vec<Violation>) {
    let single: Vec<(Edge, usize)> = uses
        .iter()
        .filter(|(_, u)| u.len() == 1)
        .map(|(e, u)| (*e, u[0].0))
        .collect();
    if single.is_empty() {
        return;
    }
    let mut candidates: Vec<usize> = single
        .iter()
        .flat_map(|(e, _)| {
            let (a, b) = e.nodes();
            [a, b]
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    // bucket grid over candidate nodes
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &c in &candidates {
        let p = mesh.point(c);
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let cells = ((candidates.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
    let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
    let cell_of = |p: Point| -> (usize, usize) {
        let cx = (((p[0] - lo[0]) / span[0]) * cells as f64).floor().clamp(0.0, (cells - 1) as f64);
        let cy = (((p[1] - lo[1]) / span[1]) * cells as f64).floor().clamp(0.0, (cells - 1) as f64);
        (cx as usize, cy as usize)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for &c in &candidates {
        let (cx, cy) = cell_of(mesh.point(c));
        grid[cy * cells + cx].push(c);
    }

    let node_elements = mesh.node_elements();
    let elements = mesh.elements();
    for (edge, owner) in single {
        let (a, b) = edge.nodes();
        let (pa, pb) = (mesh.point(a), mesh.point(b));
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        let tol = 1e-9 * len;
        let (c0x, c0y) = cell_of([pa[0].min(pb[0]) - tol, pa[1].min(pb[1]) - tol]);
        let (c1x, c1y) = cell_of([pa[0].max(pb[0]) + tol, pa[1].max(pb[1]) + tol]);
        for cy in c0y..=c1y {
            for cx in c0x..=c1x {
                for &c in &grid[cy * cells + cx] {
                    if c == a || c == b || elements[owner].vertices.contains(&c) {
                        continue;
                    }
                    let (dist, t) = super::segment_distance(mesh.point(c), pa, pb);
                    if dist <= tol && t * len > tol && (1.0 - t) * len > tol {
                        let owner_kind = elements[owner].kind;
                        let across = node_elements[c].iter().any(|&e| elements[e].kind != owner_kind);
                        out.push(Violation::HangingNode {
                            node: c,
                            edge,
                            element: owner,
                            across_interface: across,
                        });
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_quads, Element, Mesh, Node};
    use std::collections::BTreeMap;

    #[test]
    fn structured_mesh_is_valid() {
        let mesh = generate_structured_quads(1.0, 1.0, 2, 2, ElementKind::FeQuad).unwrap();
        assert!(validate_mesh(&mesh).is_empty());
    }

    #[test]
    fn clockwise_quad_reported_once() {
        let mesh = generate_structured_quads(1.0, 1.0, 2, 2, ElementKind::FeQuad).unwrap();
        let (nodes, mut elements, edges) = mesh.into_parts();
        elements[3].vertices.reverse();
        let report = validate_mesh(&Mesh::new(nodes, elements, edges));
        let orientation: Vec<_> = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::Clockwise { element: 3 }))
            .collect();
        assert_eq!(orientation.len(), 1, "{report}");
    }

    #[test]
    fn hanging_node_across_interface() {
        // FE square [0,1]^2 beside a VE square [1,2]x[0,1] whose left edge is
        // split by node 6 at (1, 0.5); the FE edge 1-2 does not know about it.
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 0.5],
        ];
        let nodes = pts
            .iter()
            .enumerate()
            .map(|(id, p)| Node { id, x: p[0], y: p[1] })
            .collect();
        let elements = vec![
            Element {
                id: 0,
                vertices: vec![0, 1, 2, 3],
                kind: ElementKind::FeQuad,
                region: 0,
            },
            Element {
                id: 1,
                vertices: vec![1, 4, 5, 2, 6],
                kind: ElementKind::VePoly,
                region: 0,
            },
        ];
        let report = validate_mesh(&Mesh::new(nodes, elements, BTreeMap::new()));
        assert_eq!(report.len(), 1, "{report}");
        assert!(matches!(
            report.violations[0],
            Violation::HangingNode {
                node: 6,
                element: 0,
                across_interface: true,
                ..
            }
        ));
    }

    #[test]
    fn bow_tie_is_self_intersecting() {
        assert!(self_intersecting(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]));
        assert!(!self_intersecting(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]));
        // non-convex but simple
        assert!(!self_intersecting(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 1.0], [0.0, 1.0]]));
    }
}
