//! Mixed quadrilateral / polygon meshes.
//!
//! A [`Mesh`] holds nodes, elements tagged as finite elements (`FE`, four-node
//! quadrilaterals) or virtual elements (`VE`, arbitrary simple polygons),
//! labelled edges used to attach boundary conditions, and the set of nodes
//! shared between the two discretizations. Vertex lists are counter-clockwise.
//!
//! Interface nodes are found topologically from shared node ids. Coordinates
//! are never compared with a tolerance to decide coupling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

mod generate;
mod io;
mod validate;

pub use generate::{
    agglomerate_ve_pairs, generate_block_grid, generate_plate_with_hole, generate_quarter_annulus,
    generate_structured_quads, generate_voronoi_rect, random_star_polygon, BlockLayout, PlateWithHole, RectBlock,
};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub(crate) use io::tokens;
pub use validate::{validate_mesh, ValidationReport, Violation};

/// 2D point in mm.
pub type Point = [f64; 2];

/// Errors raised while building, reading or checking a mesh.
#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid mesh: {0}")]
    Invalid(ValidationReport),
    #[error("degenerate polygon in element {element}: {reason}")]
    Degenerate { element: usize, reason: String },
    #[error("invalid generator parameters: {0}")]
    Generator(String),
}

/// Discretization used for an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    /// Four-node isoparametric quadrilateral.
    FeQuad,
    /// First-order virtual element on a polygon.
    VePoly,
}

impl ElementKind {
    pub fn tag(self) -> &'static str {
        match self {
            ElementKind::FeQuad => "FE",
            ElementKind::VePoly => "VE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "FE" => Some(ElementKind::FeQuad),
            "VE" => Some(ElementKind::VePoly),
            _ => None,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    /// Node ids in counter-clockwise order.
    pub vertices: Vec<usize>,
    pub kind: ElementKind,
    pub region: u32,
}

impl Element {
    /// Consecutive vertex pairs `(v_i, v_{i+1})`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// Undirected edge, stored with the smaller node id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(usize, usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn nodes(self) -> (usize, usize) {
        (self.0, self.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Node>,
    elements: Vec<Element>,
    boundary_edges: BTreeMap<Edge, String>,
    interface_nodes: BTreeSet<usize>,
}

impl Mesh {
    /// Builds a mesh without checking it. Interface nodes are derived here.
    pub fn new(nodes: Vec<Node>, elements: Vec<Element>, boundary_edges: BTreeMap<Edge, String>) -> Self {
        let interface_nodes = interface_node_set(nodes.len(), &elements);
        Mesh {
            nodes,
            elements,
            boundary_edges,
            interface_nodes,
        }
    }

    /// Builds a mesh and rejects it if [`validate_mesh`] reports anything.
    pub fn validated(
        nodes: Vec<Node>,
        elements: Vec<Element>,
        boundary_edges: BTreeMap<Edge, String>,
    ) -> Result<Self, MeshError> {
        let mesh = Mesh::new(nodes, elements, boundary_edges);
        mesh.check()?;
        Ok(mesh)
    }

    pub fn check(&self) -> Result<(), MeshError> {
        let report = validate_mesh(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(MeshError::Invalid(report))
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &BTreeMap<Edge, String> {
        &self.boundary_edges
    }

    pub fn interface_nodes(&self) -> &BTreeSet<usize> {
        &self.interface_nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn point(&self, node: usize) -> Point {
        self.nodes[node].point()
    }

    pub fn element_coords(&self, element: &Element) -> Vec<Point> {
        element.vertices.iter().map(|&v| self.point(v)).collect()
    }

    /// Edges carrying `label`, in edge order.
    pub fn edges_with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = Edge> + 'a {
        self.boundary_edges
            .iter()
            .filter(move |(_, l)| l.as_str() == label)
            .map(|(e, _)| *e)
    }

    /// Node ids touched by edges carrying `label`.
    pub fn nodes_with_label(&self, label: &str) -> BTreeSet<usize> {
        self.edges_with_label(label)
            .flat_map(|e| {
                let (a, b) = e.nodes();
                [a, b]
            })
            .collect()
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.boundary_edges.values().map(String::as_str).collect()
    }

    pub fn regions(&self) -> BTreeSet<u32> {
        self.elements.iter().map(|e| e.region).collect()
    }

    /// For every node, the ids of the elements using it (ascending).
    pub fn node_elements(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.elements {
            for &v in &e.vertices {
                if v < adj.len() && adj[v].last() != Some(&e.id) {
                    adj[v].push(e.id);
                }
            }
        }
        adj
    }

    /// Map from every element edge to the elements using it.
    pub fn edge_elements(&self) -> BTreeMap<Edge, Vec<usize>> {
        let mut map: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for e in &self.elements {
            for (a, b) in e.edges() {
                map.entry(Edge::new(a, b)).or_default().push(e.id);
            }
        }
        map
    }

    /// Edges used by exactly one element.
    pub fn outer_edges(&self) -> BTreeSet<Edge> {
        self.edge_elements()
            .into_iter()
            .filter(|(_, els)| els.len() == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Attaches `label` to every element edge lying on the segment `p0`–`p1`.
    /// With `outer_only`, edges shared by two elements are skipped.
    pub fn label_edges_on_segment(&mut self, label: &str, p0: Point, p1: Point, outer_only: bool) -> usize {
        let scale = (p1[0] - p0[0]).hypot(p1[1] - p0[1]).max(1e-300);
        let tol = 1e-9 * scale;
        let edges = self.edge_elements();
        let mut count = 0;
        for (edge, els) in edges {
            if outer_only && els.len() != 1 {
                continue;
            }
            let (a, b) = edge.nodes();
            if on_segment(self.point(a), p0, p1, tol) && on_segment(self.point(b), p0, p1, tol) {
                self.boundary_edges.insert(edge, label.to_string());
                count += 1;
            }
        }
        count
    }

    /// Attaches `label` to edges whose both endpoints satisfy `pred`.
    pub fn label_edges_where<F>(&mut self, label: &str, outer_only: bool, pred: F) -> usize
    where
        F: Fn(Point) -> bool,
    {
        let edges = self.edge_elements();
        let mut count = 0;
        for (edge, els) in edges {
            if outer_only && els.len() != 1 {
                continue;
            }
            let (a, b) = edge.nodes();
            if pred(self.point(a)) && pred(self.point(b)) {
                self.boundary_edges.insert(edge, label.to_string());
                count += 1;
            }
        }
        count
    }

    /// Labels the outline of a region: edges of its elements not shared with
    /// another element of the same region.
    pub fn label_region_outline(&mut self, region: u32, label: &str) -> usize {
        let edges = self.edge_elements();
        let mut count = 0;
        for (edge, els) in edges {
            let inside = els.iter().filter(|&&e| self.elements[e].region == region).count();
            if inside == 1 {
                self.boundary_edges.insert(edge, label.to_string());
                count += 1;
            }
        }
        count
    }

    /// Polygon geometry of one element.
    pub fn geometry(&self, element: &Element) -> Result<PolygonGeometry, MeshError> {
        polygon_geometry(element, &self.nodes)
    }

    /// Returns a copy in which every element gets `kind`.
    pub fn with_kind(&self, kind: ElementKind) -> Mesh {
        let elements = self
            .elements
            .iter()
            .map(|e| Element {
                kind,
                ..e.clone()
            })
            .collect();
        Mesh::new(self.nodes.clone(), elements, self.boundary_edges.clone())
    }

    pub(crate) fn into_parts(self) -> (Vec<Node>, Vec<Element>, BTreeMap<Edge, String>) {
        (self.nodes, self.elements, self.boundary_edges)
    }
}

fn on_segment(p: Point, a: Point, b: Point, tol: f64) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let w = [p[0] - a[0], p[1] - a[1]];
    let t = (w[0] * d[0] + w[1] * d[1]) / len2;
    let len = len2.sqrt();
    if t * len < -tol || (t - 1.0) * len > tol {
        return false;
    }
    let cross = w[0] * d[1] - w[1] * d[0];
    (cross / len).abs() <= tol
}

/// Nodes used by at least one FE and at least one VE element.
///
/// On a conforming mesh these are the nodes of edges shared by an FE and a VE
/// element, plus any node where the two kinds touch only at a corner.
pub fn find_interface_nodes(mesh: &Mesh) -> BTreeSet<usize> {
    interface_node_set(mesh.nodes.len(), &mesh.elements)
}

fn interface_node_set(n_nodes: usize, elements: &[Element]) -> BTreeSet<usize> {
    let mut fe = vec![false; n_nodes];
    let mut ve = vec![false; n_nodes];
    for e in elements {
        for &v in &e.vertices {
            if v >= n_nodes {
                continue;
            }
            match e.kind {
                ElementKind::FeQuad => fe[v] = true,
                ElementKind::VePoly => ve[v] = true,
            }
        }
    }
    (0..n_nodes).filter(|&i| fe[i] && ve[i]).collect()
}

/// Geometric data of a polygon needed by both kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonGeometry {
    /// Area-weighted centroid.
    pub centroid: Point,
    pub area: f64,
    /// Largest distance between two vertices (`h_E`).
    pub diameter: f64,
    /// Outward unit normal of edge `i` (vertex `i` to vertex `i+1`).
    pub edge_normals: Vec<Point>,
    pub edge_lengths: Vec<f64>,
}

impl PolygonGeometry {
    /// Computes the geometry of a counter-clockwise polygon.
    pub fn from_coords(coords: &[Point]) -> Result<Self, String> {
        let n = coords.len();
        if n < 3 {
            return Err(format!("{n} vertices"));
        }
        let area = signed_area(coords);
        let diameter = polygon_diameter(coords);
        let mut edge_normals = Vec::with_capacity(n);
        let mut edge_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let a = coords[i];
            let b = coords[(i + 1) % n];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            if !(len > 1e-14 * diameter) {
                return Err(format!("zero-length edge {i}"));
            }
            edge_lengths.push(len);
            edge_normals.push([dy / len, -dx / len]);
        }
        if !(area > 1e-14 * diameter * diameter) {
            return Err(format!("non-positive signed area {area:e}"));
        }
        // shifted by the first vertex for accuracy far from the origin
        let o = coords[0];
        let (mut sx, mut sy, mut s2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let a = [coords[i][0] - o[0], coords[i][1] - o[1]];
            let j = (i + 1) % n;
            let b = [coords[j][0] - o[0], coords[j][1] - o[1]];
            let cross = a[0] * b[1] - b[0] * a[1];
            sx += (a[0] + b[0]) * cross;
            sy += (a[1] + b[1]) * cross;
            s2 += cross;
        }
        let a_local = 0.5 * s2;
        let centroid = [o[0] + sx / (6.0 * a_local), o[1] + sy / (6.0 * a_local)];
        Ok(PolygonGeometry {
            centroid,
            area,
            diameter,
            edge_normals,
            edge_lengths,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// For vertex `i`, half the sum of `|e| n_e` over its two adjacent edges.
    ///
    /// This is the exact boundary integral of the vertex hat function times the
    /// outward normal when traces are linear on each edge.
    pub fn vertex_normal_weights(&self) -> Vec<Point> {
        let n = self.n_vertices();
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                let a = self.edge_normals[prev];
                let b = self.edge_normals[i];
                let la = self.edge_lengths[prev];
                let lb = self.edge_lengths[i];
                [0.5 * (la * a[0] + lb * b[0]), 0.5 * (la * a[1] + lb * b[1])]
            })
            .collect()
    }
}

/// Shoelace signed area (positive for counter-clockwise order).
pub fn signed_area(coords: &[Point]) -> f64 {
    let n = coords.len();
    if n < 3 {
        return 0.0;
    }
    let o = coords[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        let a = [coords[i][0] - o[0], coords[i][1] - o[1]];
        let b = [coords[i + 1][0] - o[0], coords[i + 1][1] - o[1]];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

pub fn polygon_diameter(coords: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for (i, a) in coords.iter().enumerate() {
        for b in &coords[i + 1..] {
            h = h.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    h
}

/// Geometry of `element` with coordinates taken from `nodes`.
pub fn polygon_geometry(element: &Element, nodes: &[Node]) -> Result<PolygonGeometry, MeshError> {
    let mut coords = Vec::with_capacity(element.vertices.len());
    for &v in &element.vertices {
        let node = nodes.get(v).ok_or_else(|| MeshError::Degenerate {
            element: element.id,
            reason: format!("vertex id {v} out of range"),
        })?;
        coords.push(node.point());
    }
    PolygonGeometry::from_coords(&coords).map_err(|reason| MeshError::Degenerate {
        element: element.id,
        reason,
    })
}

/// Even-odd point in polygon test. Points on the boundary may go either way.
pub fn point_in_polygon(p: Point, coords: &[Point]) -> bool {
    let n = coords.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (coords[i], coords[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a`–`b`, and the segment parameter of the
/// closest point.
pub fn segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).hypot(p[1] - q[1]), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unit_square_geometry() {
        let g = PolygonGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(close(g.area, 1.0, 1e-15));
        assert!(close(g.centroid[0], 0.5, 1e-15) && close(g.centroid[1], 0.5, 1e-15));
        assert!(close(g.diameter, 2f64.sqrt(), 1e-15));
        assert_eq!(g.edge_normals[0], [0.0, -1.0]);
        assert_eq!(g.edge_normals[1], [1.0, 0.0]);
    }

    #[test]
    fn triangle_geometry() {
        let g = PolygonGeometry::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(close(g.area, 0.5, 1e-15));
        assert!(close(g.centroid[0], 1.0 / 3.0, 1e-15));
        assert!(close(g.centroid[1], 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn regular_hexagon_area() {
        // shoelace by hand: six triangles of area (√3/4)·1²
        let coords: Vec<Point> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let g = PolygonGeometry::from_coords(&coords).unwrap();
        assert!(close(g.area, 2.598076211353316, 1e-12));
        assert!(close(g.centroid[0], 0.0, 1e-14) && close(g.centroid[1], 0.0, 1e-14));
    }

    #[test]
    fn reversed_order_negates_area() {
        let mut coords = vec![[0.0, 0.0], [2.0, 0.1], [1.5, 1.0], [0.2, 0.8]];
        let a = signed_area(&coords);
        coords.reverse();
        assert!(close(signed_area(&coords), -a, 1e-15));
        assert!(PolygonGeometry::from_coords(&coords).is_err());
    }

    #[test]
    fn zero_length_edge_is_rejected() {
        let element = Element {
            id: 7,
            vertices: vec![0, 1, 1, 2],
            kind: ElementKind::VePoly,
            region: 0,
        };
        let nodes = vec![
            Node { id: 0, x: 0.0, y: 0.0 },
            Node { id: 1, x: 1.0, y: 0.0 },
            Node { id: 2, x: 0.0, y: 1.0 },
        ];
        match polygon_geometry(&element, &nodes) {
            Err(MeshError::Degenerate { element, .. }) => assert_eq!(element, 7),
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn closed_polygon_normals_sum_to_zero() {
        let coords = vec![[0.0, 0.0], [3.0, -0.5], [4.0, 2.0], [1.0, 1.0], [-0.5, 2.5]];
        let g = PolygonGeometry::from_coords(&coords).unwrap();
        let mut s = [0.0, 0.0];
        for (n, l) in g.edge_normals.iter().zip(&g.edge_lengths) {
            s[0] += n[0] * l;
            s[1] += n[1] * l;
            assert!(close(n[0].hypot(n[1]), 1.0, 1e-12));
        }
        assert!(s[0].abs() < 1e-10 * g.perimeter() && s[1].abs() < 1e-10 * g.perimeter());
    }

    #[test]
    fn interface_nodes_of_split_rectangle() {
        let left = generate_structured_quads(1.0, 1.0, 2, 2, ElementKind::FeQuad).unwrap();
        assert!(find_interface_nodes(&left).is_empty());
        let (nodes, mut elements, edges) = left.into_parts();
        // right column of cells becomes VE; nodes x = 0.5 are shared
        for e in &mut elements {
            if e.id % 2 == 1 {
                e.kind = ElementKind::VePoly;
            }
        }
        let mesh = Mesh::new(nodes, elements, edges);
        let expected: BTreeSet<usize> = [1, 4, 7].into_iter().collect();
        assert_eq!(mesh.interface_nodes(), &expected);
        // swapping FE/VE gives the same set
        let swapped: Vec<Element> = mesh
            .elements()
            .iter()
            .map(|e| Element {
                kind: if e.kind == ElementKind::FeQuad {
                    ElementKind::VePoly
                } else {
                    ElementKind::FeQuad
                },
                ..e.clone()
            })
            .collect();
        let mesh2 = Mesh::new(mesh.nodes().to_vec(), swapped, mesh.boundary_edges().clone());
        assert_eq!(mesh2.interface_nodes(), &expected);
    }
}
