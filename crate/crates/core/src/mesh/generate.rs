//! Mesh generators for the benchmark geometries.
//!
//! Curved boundaries are approximated by straight chords; resolution is set
//! by the generator parameters.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::validate::self_intersecting;
use super::{signed_area, Edge, Element, ElementKind, Mesh, MeshError, Node, Point};

fn grid_nodes(xs: &[f64], ys: &[f64]) -> Vec<Node> {
    let mut nodes = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            nodes.push(Node { id: nodes.len(), x, y });
        }
    }
    nodes
}

/// `nx × ny` rectangle of quads with labels `bottom`, `right`, `top`, `left`.
pub fn generate_structured_quads(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    kind: ElementKind,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Generator(format!("subdivisions must be positive, got {nx}x{ny}")));
    }
    if !(width > 0.0 && height > 0.0) {
        return Err(MeshError::Generator(format!("non-positive size {width}x{height}")));
    }
    let xs: Vec<f64> = (0..=nx).map(|i| width * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| height * j as f64 / ny as f64).collect();
    let nodes = grid_nodes(&xs, &ys);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push(Element {
                id: elements.len(),
                vertices: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                kind,
                region: 0,
            });
        }
    }
    let mut mesh = Mesh::new(nodes, elements, BTreeMap::new());
    mesh.label_edges_on_segment("bottom", [0.0, 0.0], [width, 0.0], true);
    mesh.label_edges_on_segment("right", [width, 0.0], [width, height], true);
    mesh.label_edges_on_segment("top", [0.0, height], [width, height], true);
    mesh.label_edges_on_segment("left", [0.0, 0.0], [0.0, height], true);
    mesh.check()?;
    Ok(mesh)
}

/// Polar-structured quarter annulus in the first quadrant.
///
/// Cells whose radial midpoint lies below `split_radius` are VE, the rest FE.
/// Labels: `inner`, `outer`, `bottom` (y = 0), `left` (x = 0).
pub fn generate_quarter_annulus(
    r_a: f64,
    r_b: f64,
    n_r: usize,
    n_t: usize,
    split_radius: f64,
) -> Result<Mesh, MeshError> {
    if n_r == 0 || n_t == 0 {
        return Err(MeshError::Generator(format!("subdivisions must be positive, got {n_r}x{n_t}")));
    }
    if !(r_a > 0.0 && r_a < r_b && split_radius >= r_a && split_radius <= r_b) {
        return Err(MeshError::Generator(format!(
            "need 0 < r_a <= split <= r_b with r_a < r_b, got r_a={r_a} split={split_radius} r_b={r_b}"
        )));
    }
    let id = |i: usize, j: usize| j * (n_r + 1) + i;
    let mut nodes = Vec::with_capacity((n_r + 1) * (n_t + 1));
    for j in 0..=n_t {
        let t = FRAC_PI_2 * j as f64 / n_t as f64;
        let (s, c) = if j == n_t { (1.0, 0.0) } else { t.sin_cos() };
        for i in 0..=n_r {
            let r = if i == n_r { r_b } else { r_a + (r_b - r_a) * i as f64 / n_r as f64 };
            nodes.push(Node {
                id: nodes.len(),
                x: r * c,
                y: r * s,
            });
        }
    }
    let mut elements = Vec::with_capacity(n_r * n_t);
    for j in 0..n_t {
        for i in 0..n_r {
            let mid = r_a + (r_b - r_a) * (i as f64 + 0.5) / n_r as f64;
            elements.push(Element {
                id: elements.len(),
                vertices: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                kind: if mid < split_radius {
                    ElementKind::VePoly
                } else {
                    ElementKind::FeQuad
                },
                region: 0,
            });
        }
    }
    let mut edges = BTreeMap::new();
    for j in 0..n_t {
        edges.insert(Edge::new(id(0, j), id(0, j + 1)), "inner".to_string());
        edges.insert(Edge::new(id(n_r, j), id(n_r, j + 1)), "outer".to_string());
    }
    for i in 0..n_r {
        edges.insert(Edge::new(id(i, 0), id(i + 1, 0)), "bottom".to_string());
        edges.insert(Edge::new(id(i, n_t), id(i + 1, n_t)), "left".to_string());
    }
    Mesh::validated(nodes, elements, edges)
}

/// Quarter of a square plate with a central circular hole.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateWithHole {
    /// Half side of the plate (quarter model spans `[0, a]²`).
    pub side: f64,
    pub hole_radius: f64,
    /// Radius of the circle separating the inner ring from the outer region.
    pub ring_radius: f64,
    /// Angular divisions over 90°, must be even.
    pub n_theta: usize,
    pub n_ring: usize,
    pub n_outer: usize,
    pub ring_kind: ElementKind,
    pub outer_kind: ElementKind,
}

/// Labels: `hole`, `bottom` (y = 0), `left` (x = 0), `right`, `top`.
pub fn generate_plate_with_hole(p: &PlateWithHole) -> Result<Mesh, MeshError> {
    if p.n_theta == 0 || p.n_theta % 2 != 0 || p.n_ring == 0 || p.n_outer == 0 {
        return Err(MeshError::Generator(format!(
            "need even n_theta and positive ring/outer divisions, got {}/{}/{}",
            p.n_theta, p.n_ring, p.n_outer
        )));
    }
    if !(p.hole_radius > 0.0 && p.hole_radius < p.ring_radius && p.ring_radius < p.side) {
        return Err(MeshError::Generator("need 0 < hole radius < ring radius < side".into()));
    }
    let (a, nt) = (p.side, p.n_theta);
    let rows = p.n_ring + p.n_outer;
    let id = |k: usize, j: usize| j * (rows + 1) + k;
    let arc = |r: f64, j: usize| -> Point {
        match j {
            0 => [r, 0.0],
            _ if j == nt => [0.0, r],
            _ => {
                let (s, c) = (FRAC_PI_2 * j as f64 / nt as f64).sin_cos();
                [r * c, r * s]
            }
        }
    };
    let square = |j: usize| -> Point {
        let half = nt / 2;
        if j <= half {
            [a, a * j as f64 / half as f64]
        } else {
            [a * (nt - j) as f64 / half as f64, a]
        }
    };
    let mut nodes = Vec::with_capacity((rows + 1) * (nt + 1));
    for j in 0..=nt {
        for k in 0..=rows {
            let pt = if k <= p.n_ring {
                let r = p.hole_radius + (p.ring_radius - p.hole_radius) * k as f64 / p.n_ring as f64;
                arc(if k == p.n_ring { p.ring_radius } else { r }, j)
            } else {
                let s = (k - p.n_ring) as f64 / p.n_outer as f64;
                let c = arc(p.ring_radius, j);
                let q = square(j);
                if k == rows {
                    q
                } else {
                    [(1.0 - s) * c[0] + s * q[0], (1.0 - s) * c[1] + s * q[1]]
                }
            };
            nodes.push(Node {
                id: nodes.len(),
                x: pt[0],
                y: pt[1],
            });
        }
    }
    let mut elements = Vec::with_capacity(rows * nt);
    for j in 0..nt {
        for k in 0..rows {
            elements.push(Element {
                id: elements.len(),
                vertices: vec![id(k, j), id(k + 1, j), id(k + 1, j + 1), id(k, j + 1)],
                kind: if k < p.n_ring { p.ring_kind } else { p.outer_kind },
                region: 0,
            });
        }
    }
    let mut edges = BTreeMap::new();
    for j in 0..nt {
        edges.insert(Edge::new(id(0, j), id(0, j + 1)), "hole".to_string());
    }
    let mut mesh = Mesh::new(nodes, elements, edges);
    mesh.label_edges_on_segment("bottom", [0.0, 0.0], [a, 0.0], true);
    mesh.label_edges_on_segment("left", [0.0, 0.0], [0.0, a], true);
    mesh.label_edges_on_segment("right", [a, 0.0], [a, a], true);
    mesh.label_edges_on_segment("top", [0.0, a], [a, a], true);
    mesh.check()?;
    Ok(mesh)
}

/// Axis-aligned rectangle filled with one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectBlock {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub region: u32,
}

impl RectBlock {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, region: u32) -> Self {
        RectBlock { x0, x1, y0, y1, region }
    }

    fn contains(&self, p: Point) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }
}

/// Layered layout of rectangles on a common tensor grid.
///
/// Grid lines pass through every rectangle edge plus `extra_x` / `extra_y`;
/// each interval is split into pieces no longer than `target_size`. A grid
/// cell takes the region of the last block containing its centre, or is left
/// empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub blocks: Vec<RectBlock>,
    pub region_kinds: BTreeMap<u32, ElementKind>,
    pub target_size: f64,
    pub extra_x: Vec<f64>,
    pub extra_y: Vec<f64>,
}

fn breaks(mut v: Vec<f64>, h: f64) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    let span = v.last().copied().unwrap_or(0.0) - v.first().copied().unwrap_or(0.0);
    let tol = 1e-9 * span.max(1e-300);
    let mut uniq: Vec<f64> = Vec::new();
    for x in v {
        if uniq.last().map_or(true, |&l| x - l > tol) {
            uniq.push(x);
        }
    }
    let mut out = Vec::new();
    for w in uniq.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    if let Some(&l) = uniq.last() {
        out.push(l);
    }
    out
}

/// Builds the quad grid for a [`BlockLayout`]. No edges are labelled.
pub fn generate_block_grid(layout: &BlockLayout) -> Result<Mesh, MeshError> {
    if layout.blocks.is_empty() || !(layout.target_size > 0.0) {
        return Err(MeshError::Generator("layout needs blocks and a positive target size".into()));
    }
    let mut xb = layout.extra_x.clone();
    let mut yb = layout.extra_y.clone();
    for b in &layout.blocks {
        if !(b.x1 > b.x0 && b.y1 > b.y0) {
            return Err(MeshError::Generator(format!("empty block {b:?}")));
        }
        if !layout.region_kinds.contains_key(&b.region) {
            return Err(MeshError::Generator(format!("region {} has no element kind", b.region)));
        }
        xb.extend([b.x0, b.x1]);
        yb.extend([b.y0, b.y1]);
    }
    let xs = breaks(xb, layout.target_size);
    let ys = breaks(yb, layout.target_size);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let mut fill = vec![None; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            fill[j * nx + i] = layout.blocks.iter().rev().find(|b| b.contains(c)).map(|b| b.region);
        }
    }
    let grid_id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            if fill[j * nx + i].is_some() {
                for g in [grid_id(i, j), grid_id(i + 1, j), grid_id(i + 1, j + 1), grid_id(i, j + 1)] {
                    used[g] = true;
                }
            }
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let g = grid_id(i, j);
            if used[g] {
                remap[g] = nodes.len();
                nodes.push(Node {
                    id: nodes.len(),
                    x: xs[i],
                    y: ys[j],
                });
            }
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if let Some(region) = fill[j * nx + i] {
                elements.push(Element {
                    id: elements.len(),
                    vertices: [grid_id(i, j), grid_id(i + 1, j), grid_id(i + 1, j + 1), grid_id(i, j + 1)]
                        .iter()
                        .map(|&g| remap[g])
                        .collect(),
                    kind: layout.region_kinds[&region],
                    region,
                });
            }
        }
    }
    Ok(Mesh::new(nodes, elements, BTreeMap::new()))
}

/// Clips a convex polygon by the half plane `(p - m)·d <= 0`.
fn clip_half_plane(poly: &[Point], m: Point, d: Point) -> Vec<Point> {
    let side = |p: Point| (p[0] - m[0]) * d[0] + (p[1] - m[1]) * d[1];
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn voronoi_cell(seeds: &[Point], i: usize, width: f64, height: f64) -> Vec<Point> {
    let mut cell = vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]];
    let p = seeds[i];
    let mut order: Vec<usize> = (0..seeds.len()).filter(|&j| j != i).collect();
    let d2 = |j: usize| (seeds[j][0] - p[0]).powi(2) + (seeds[j][1] - p[1]).powi(2);
    order.sort_by(|&a, &b| d2(a).total_cmp(&d2(b)));
    for j in order {
        // a neighbour farther than twice the cell radius cannot cut the cell
        let r2 = cell
            .iter()
            .map(|q| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2))
            .fold(0.0, f64::max);
        if d2(j) > 4.0 * r2 {
            break;
        }
        let q = seeds[j];
        let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        cell = clip_half_plane(&cell, m, [q[0] - p[0], q[1] - p[1]]);
    }
    cell
}

fn polygon_centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly);
    let o = poly[0];
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..poly.len() {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let j = (i + 1) % poly.len();
        let q = [poly[j][0] - o[0], poly[j][1] - o[1]];
        let c = p[0] * q[1] - q[0] * p[1];
        sx += (p[0] + q[0]) * c;
        sy += (p[1] + q[1]) * c;
    }
    [o[0] + sx / (6.0 * a), o[1] + sy / (6.0 * a)]
}

/// Voronoi polygon mesh of a rectangle from `n_seeds` random seeds relaxed by
/// `lloyd_iters` Lloyd steps. All cells are VE in region 0; labels as in
/// [`generate_structured_quads`].
pub fn generate_voronoi_rect(
    width: f64,
    height: f64,
    n_seeds: usize,
    seed: u64,
    lloyd_iters: usize,
) -> Result<Mesh, MeshError> {
    if n_seeds < 2 || !(width > 0.0 && height > 0.0) {
        return Err(MeshError::Generator("need at least two seeds and a positive size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Point> = (0..n_seeds)
        .map(|_| [rng.gen_range(0.0..width), rng.gen_range(0.0..height)])
        .collect();
    let mut cells: Vec<Vec<Point>> = Vec::new();
    for it in 0..=lloyd_iters {
        cells = (0..n_seeds).map(|i| voronoi_cell(&seeds, i, width, height)).collect();
        if it < lloyd_iters {
            for (s, c) in seeds.iter_mut().zip(&cells) {
                if c.len() >= 3 {
                    *s = polygon_centroid(c);
                }
            }
        }
    }

    // merge coincident vertices on a tolerance lattice
    let scale = width.max(height);
    let tol = 1e-9 * scale;
    let key = |p: Point| ((p[0] / tol).round() as i64, (p[1] / tol).round() as i64);
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_of = |p: Point, nodes: &mut Vec<Node>| -> usize {
        let (kx, ky) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&id) = lookup.get(&(kx + dx, ky + dy)) {
                    let q: &Node = &nodes[id];
                    if (q.x - p[0]).hypot(q.y - p[1]) <= 2.0 * tol {
                        return id;
                    }
                }
            }
        }
        let id = nodes.len();
        nodes.push(Node { id, x: p[0], y: p[1] });
        lookup.insert((kx, ky), id);
        id
    };
    let mut elements = Vec::new();
    for cell in &cells {
        let mut verts: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let id = node_of(p, &mut nodes);
            if verts.last() != Some(&id) {
                verts.push(id);
            }
        }
        while verts.len() > 1 && verts.first() == verts.last() {
            verts.pop();
        }
        if verts.len() < 3 {
            continue;
        }
        elements.push(Element {
            id: elements.len(),
            vertices: verts,
            kind: ElementKind::VePoly,
            region: 0,
        });
    }
    // snap boundary coordinates exactly
    for n in &mut nodes {
        for (v, lim) in [(&mut n.x, width), (&mut n.y, height)] {
            if v.abs() <= 2.0 * tol {
                *v = 0.0;
            } else if (*v - lim).abs() <= 2.0 * tol {
                *v = lim;
            }
        }
    }
    let mut mesh = Mesh::new(nodes, elements, BTreeMap::new());
    mesh.label_edges_on_segment("bottom", [0.0, 0.0], [width, 0.0], true);
    mesh.label_edges_on_segment("right", [width, 0.0], [width, height], true);
    mesh.label_edges_on_segment("top", [0.0, height], [width, height], true);
    mesh.label_edges_on_segment("left", [0.0, 0.0], [0.0, height], true);
    mesh.check()?;
    Ok(mesh)
}

/// Merges VE elements pairwise into larger polygons.
///
/// Elements are visited in id order; each unpaired VE element is joined with
/// its first unpaired VE neighbour of the same region across an unlabelled
/// edge, provided the union is a simple polygon. FE elements are untouched.
pub fn agglomerate_ve_pairs(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let edge_elements = mesh.edge_elements();
    let elements = mesh.elements();
    let mut partner: Vec<Option<usize>> = vec![None; elements.len()];
    let mut merged: Vec<Option<Vec<usize>>> = vec![None; elements.len()];
    for e in elements {
        if e.kind != ElementKind::VePoly || partner[e.id].is_some() {
            continue;
        }
        for (a, b) in e.edges() {
            let edge = Edge::new(a, b);
            if mesh.boundary_edges().contains_key(&edge) {
                continue;
            }
            let Some(other) = edge_elements[&edge].iter().copied().find(|&o| o != e.id) else {
                continue;
            };
            let o = &elements[other];
            if o.kind != ElementKind::VePoly || o.region != e.region || partner[other].is_some() {
                continue;
            }
            if let Some(poly) = merge_polygons(mesh, &e.vertices, &o.vertices, a, b) {
                partner[e.id] = Some(other);
                partner[other] = Some(e.id);
                merged[e.id] = Some(poly);
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(elements.len());
    for e in elements {
        let vertices = match (partner[e.id], merged[e.id].take()) {
            (Some(_), Some(poly)) => poly,
            (Some(_), None) => continue,
            (None, _) => e.vertices.clone(),
        };
        out.push(Element {
            id: out.len(),
            vertices,
            kind: e.kind,
            region: e.region,
        });
    }
    let (nodes, _, edges) = mesh.clone().into_parts();
    let result = Mesh::new(nodes, out, edges);
    result.check()?;
    Ok(result)
}

/// Union of polygons `a` and `b` sharing exactly the edge `p -> q` of `a`.
fn merge_polygons(mesh: &Mesh, a: &[usize], b: &[usize], p: usize, q: usize) -> Option<Vec<usize>> {
    let shared: BTreeSet<usize> = a.iter().copied().filter(|v| b.contains(v)).collect();
    if shared.len() != 2 {
        return None;
    }
    let ia = a.iter().position(|&v| v == q)?;
    let ib = b.iter().position(|&v| v == p)?;
    if b[(ib + 1) % b.len()] == q {
        // b must traverse the edge q -> p
        return None;
    }
    let mut poly: Vec<usize> = (0..a.len()).map(|k| a[(ia + k) % a.len()]).collect();
    // poly runs q .. p; continue through b from p, excluding p and q
    let mut k = (ib + 1) % b.len();
    while b[k] != q {
        poly.push(b[k]);
        k = (k + 1) % b.len();
    }
    let coords: Vec<Point> = poly.iter().map(|&v| mesh.point(v)).collect();
    if signed_area(&coords) <= 0.0 || self_intersecting(&coords) {
        return None;
    }
    Some(poly)
}

/// Random simple polygon with `n` vertices, star-shaped about a random
/// centre. `convex` places the vertices on a circle; otherwise radii vary in
/// `[0.3, 1]` times a random scale, which usually gives non-convex shapes.
pub fn random_star_polygon<R: Rng>(rng: &mut R, n: usize, convex: bool) -> Vec<Point> {
    assert!(n >= 3, "a polygon needs at least three vertices");
    // angular gaps differ by at most a factor of two
    let gaps: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..2.0)).collect();
    let total: f64 = gaps.iter().sum();
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    let centre = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
    let mut angle = phase;
    let mut out = Vec::with_capacity(n);
    for g in gaps {
        let r = if convex { 1.0 } else { rng.gen_range(0.3..1.0) };
        out.push([centre[0] + scale * r * angle.cos(), centre[1] + scale * r * angle.sin()]);
        angle += std::f64::consts::TAU * g / total;
    }
    out
}
