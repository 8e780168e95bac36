//! Plain-text mesh format.
//!
//! ```text
//! mesh 2d v1
//! node <id> <x> <y>
//! elem <id> <FE|VE> <region> <n_v> <v0> ... <v{n_v-1}>
//! bedge <label> <n0> <n1>
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment. Node and element
//! ids must be dense from 0. Floats are written in shortest round-trip form so
//! save followed by load reproduces every coordinate bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Edge, Element, ElementKind, Mesh, MeshError, Node};

pub const MESH_HEADER: &str = "mesh 2d v1";

/// Splits a line into tokens, dropping anything after `#`.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    body.split_whitespace().collect()
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&&str>, line: usize, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

/// Parses mesh text and validates the result.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut header_seen = false;
    let mut nodes: BTreeMap<usize, Node> = BTreeMap::new();
    let mut elements: BTreeMap<usize, Element> = BTreeMap::new();
    let mut edges: BTreeMap<Edge, String> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = tokens(raw);
        if t.is_empty() {
            continue;
        }
        if !header_seen {
            if t.join(" ") != MESH_HEADER {
                return Err(parse_err(line_no, format!("expected header `{MESH_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        match t[0] {
            "node" => {
                if t.len() != 4 {
                    return Err(parse_err(line_no, "node needs `node <id> <x> <y>`"));
                }
                let id: usize = num(t.get(1), line_no, "node id")?;
                let x: f64 = num(t.get(2), line_no, "x")?;
                let y: f64 = num(t.get(3), line_no, "y")?;
                if nodes.insert(id, Node { id, x, y }).is_some() {
                    return Err(parse_err(line_no, format!("duplicate node id {id}")));
                }
            }
            "elem" => {
                let id: usize = num(t.get(1), line_no, "element id")?;
                let kind_tok = t.get(2).ok_or_else(|| parse_err(line_no, "missing element kind"))?;
                let kind = ElementKind::from_tag(kind_tok)
                    .ok_or_else(|| parse_err(line_no, format!("unknown element kind {kind_tok:?}")))?;
                let region: u32 = num(t.get(3), line_no, "region")?;
                let nv: usize = num(t.get(4), line_no, "vertex count")?;
                if t.len() != 5 + nv {
                    return Err(parse_err(
                        line_no,
                        format!("element {id} declares {nv} vertices but lists {}", t.len().saturating_sub(5)),
                    ));
                }
                let vertices = t[5..]
                    .iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("bad vertex id {s:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if elements
                    .insert(
                        id,
                        Element {
                            id,
                            vertices,
                            kind,
                            region,
                        },
                    )
                    .is_some()
                {
                    return Err(parse_err(line_no, format!("duplicate element id {id}")));
                }
            }
            "bedge" => {
                if t.len() != 4 {
                    return Err(parse_err(line_no, "bedge needs `bedge <label> <n0> <n1>`"));
                }
                let label = t[1].to_string();
                let a: usize = num(t.get(2), line_no, "edge node")?;
                let b: usize = num(t.get(3), line_no, "edge node")?;
                if let Some(prev) = edges.insert(Edge::new(a, b), label.clone()) {
                    if prev != label {
                        return Err(parse_err(
                            line_no,
                            format!("edge ({a}, {b}) labelled both {prev:?} and {label:?}"),
                        ));
                    }
                }
            }
            other => return Err(parse_err(line_no, format!("unknown record {other:?}"))),
        }
    }
    if !header_seen {
        return Err(parse_err(1, format!("empty file, expected `{MESH_HEADER}`")));
    }
    for (pos, id) in nodes.keys().enumerate() {
        if pos != *id {
            return Err(parse_err(0, format!("node ids not dense: missing {pos}")));
        }
    }
    for (pos, id) in elements.keys().enumerate() {
        if pos != *id {
            return Err(parse_err(0, format!("element ids not dense: missing {pos}")));
        }
    }
    Mesh::validated(nodes.into_values().collect(), elements.into_values().collect(), edges)
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str(MESH_HEADER);
    s.push('\n');
    for n in mesh.nodes() {
        let _ = writeln!(s, "node {} {:?} {:?}", n.id, n.x, n.y);
    }
    for e in mesh.elements() {
        let _ = write!(s, "elem {} {} {} {}", e.id, e.kind.tag(), e.region, e.vertices.len());
        for v in &e.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    for (edge, label) in mesh.boundary_edges() {
        let (a, b) = edge.nodes();
        let _ = writeln!(s, "bedge {label} {a} {b}");
    }
    s
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mesh(&text)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh(mesh)).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured_quads;

    #[test]
    fn round_trip_structured() {
        let mesh = generate_structured_quads(1.0, 1.0, 2, 2, ElementKind::FeQuad).unwrap();
        let text = write_mesh(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn duplicate_node_is_parse_error() {
        let text = "mesh 2d v1\nnode 0 0 0\nnode 0 1 0\n";
        match parse_mesh(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn five_vertex_fe_is_validation_error() {
        let text = "mesh 2d v1
node 0 0 0
node 1 1 0
node 2 1.5 0.5
node 3 1 1
node 4 0 1
elem 0 FE 0 5 0 1 2 3 4
";
        assert!(matches!(parse_mesh(text), Err(MeshError::Invalid(_))));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a unit square\n\nmesh 2d v1\nnode 0 0 0 # origin\nnode 1 1 0\nnode 2 1 1\nnode 3 0 1\nelem 0 VE 3 4 0 1 2 3\nbedge left 3 0\n";
        let mesh = parse_mesh(text).unwrap();
        assert_eq!(mesh.n_elements(), 1);
        assert_eq!(mesh.elements()[0].region, 3);
        assert_eq!(mesh.nodes_with_label("left").len(), 2);
    }

    #[test]
    fn missing_header() {
        assert!(matches!(parse_mesh("node 0 0 0\n"), Err(MeshError::Parse { line: 1, .. })));
    }
}
