//! Legacy ASCII VTK unstructured grid and probe CSV writers.
//!
//! Floats use Rust's shortest round-trip formatting, which is deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::{ElementKind, Mesh};

use super::{ElementStress, LineProbe, PostError};

const VTK_QUAD: u8 = 9;
const VTK_POLYGON: u8 = 7;

fn num(v: f64) -> String {
    if v == 0.0 {
        // fold negative zero
        "0".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Renders the mesh with nodal temperature and displacement and element
/// stress, von Mises, region and element kind.
pub fn vtk_legacy(mesh: &Mesh, temperature: &[f64], displacement: &[[f64; 2]], stresses: &[ElementStress]) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("fevec thermoelastic fields\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for n in mesh.nodes() {
        let _ = writeln!(s, "{} {} 0", num(n.x), num(n.y));
    }
    let size: usize = mesh.elements().iter().map(|e| e.vertices.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_elements(), size);
    for e in mesh.elements() {
        let _ = write!(s, "{}", e.vertices.len());
        for v in &e.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_elements());
    for e in mesh.elements() {
        let t = match e.kind {
            ElementKind::FeQuad => VTK_QUAD,
            ElementKind::VePoly => VTK_POLYGON,
        };
        let _ = writeln!(s, "{t}");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
    s.push_str("SCALARS temperature double 1\nLOOKUP_TABLE default\n");
    for t in temperature {
        let _ = writeln!(s, "{}", num(*t));
    }
    s.push_str("VECTORS displacement double\n");
    for u in displacement {
        let _ = writeln!(s, "{} {} 0", num(u[0]), num(u[1]));
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_elements());
    s.push_str("SCALARS von_mises double 1\nLOOKUP_TABLE default\n");
    for st in stresses {
        let _ = writeln!(s, "{}", num(st.von_mises));
    }
    s.push_str("TENSORS stress double\n");
    for st in stresses {
        let [xx, yy, xy] = st.sigma;
        let _ = writeln!(s, "{} {} 0\n{} {} 0\n0 0 0", num(xx), num(xy), num(xy), num(yy));
    }
    s.push_str("SCALARS region int 1\nLOOKUP_TABLE default\n");
    for e in mesh.elements() {
        let _ = writeln!(s, "{}", e.region);
    }
    s.push_str("SCALARS kind int 1\nLOOKUP_TABLE default\n");
    for e in mesh.elements() {
        let _ = writeln!(s, "{}", if e.kind == ElementKind::FeQuad { 0 } else { 1 });
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), PostError> {
    std::fs::write(path, text).map_err(|e| PostError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    temperature: &[f64],
    displacement: &[[f64; 2]],
    stresses: &[ElementStress],
) -> Result<(), PostError> {
    write_file(path.as_ref(), &vtk_legacy(mesh, temperature, displacement, stresses))
}

/// `s,x,y,value` rows; missing samples are written as `nan`.
pub fn probe_csv(probe: &LineProbe) -> String {
    let mut s = String::from("s,x,y,value\n");
    for p in &probe.samples {
        let v = p.value.map_or_else(|| "nan".to_string(), num);
        let _ = writeln!(s, "{},{},{},{}", num(p.s), num(p.x), num(p.y), v);
    }
    s
}

pub fn write_probe_csv(path: impl AsRef<Path>, probe: &LineProbe) -> Result<(), PostError> {
    write_file(path.as_ref(), &probe_csv(probe))
}
