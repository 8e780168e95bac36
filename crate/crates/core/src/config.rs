//! Line-oriented run configuration.
//!
//! Same lexical rules as the mesh format: whitespace-separated tokens, `#`
//! starts a comment. Sections open with a bracketed header.
//!
//! ```text
//! [mesh]
//! generator annulus
//! r_a 20
//! r_b 60
//! n_r 18
//! n_t 27
//! split 40
//!
//! [material 0]
//! E_MPa 460000
//! nu 0.3
//! k_W_per_mK 20
//! alpha_per_C 7.4e-6
//! T0_C 0
//! plane strain
//!
//! [bc inner]
//! T 0
//!
//! [solver]
//! method direct
//!
//! [probe radial]
//! quantity temperature
//! start 20 0
//! end 60 0
//! samples 41
//!
//! [output]
//! dir out
//! ```
//!
//! A `[bc <name>]` section applies to the boundary label `<name>` unless it
//! carries `nodes <id>...` or `point <x> <y>`, in which case the name is only
//! descriptive. `q_mW_per_mm2` is the outward normal heat flux; heat entering
//! the body is negative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bench::{build_package_mesh, Method, Package};
use crate::materials::{MaterialError, MaterialMap, MaterialProps, PlaneCondition};
use crate::mesh::{
    agglomerate_ve_pairs, generate_plate_with_hole, generate_quarter_annulus, generate_structured_quads,
    generate_voronoi_rect, load_mesh, tokens, ElementKind, Mesh, MeshError, PlateWithHole, Point,
};
use crate::post::ProbeQuantity;
use crate::problem::{BoundaryConditions, Problem, Target};
use crate::solver::{SolveMethod, SolveOptions};
use crate::vem::DEFAULT_TAU;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("material for region {region}: {source}")]
    Material {
        region: u32,
        #[source]
        source: MaterialError,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("config i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

/// How the mesh is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    /// Mesh file, relative paths resolved against the config directory.
    File(PathBuf),
    Structured {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
        kind: ElementKind,
    },
    Annulus {
        r_a: f64,
        r_b: f64,
        n_r: usize,
        n_t: usize,
        split: f64,
        agglomerate: bool,
    },
    PlateHole { plate: PlateWithHole, agglomerate: bool },
    Voronoi {
        width: f64,
        height: f64,
        seeds: usize,
        seed: u64,
        lloyd: usize,
    },
    Package {
        package: Package,
        h: f64,
        method: Method,
        agglomerate: bool,
    },
}

impl MeshSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Mesh, MeshError> {
        let aggl = |m: Mesh, on: bool| if on { agglomerate_ve_pairs(&m) } else { Ok(m) };
        match self {
            MeshSpec::File(p) => load_mesh(if p.is_absolute() { p.clone() } else { base_dir.join(p) }),
            MeshSpec::Structured {
                width,
                height,
                nx,
                ny,
                kind,
            } => generate_structured_quads(*width, *height, *nx, *ny, *kind),
            MeshSpec::Annulus {
                r_a,
                r_b,
                n_r,
                n_t,
                split,
                agglomerate,
            } => aggl(generate_quarter_annulus(*r_a, *r_b, *n_r, *n_t, *split)?, *agglomerate),
            MeshSpec::PlateHole { plate, agglomerate } => aggl(generate_plate_with_hole(plate)?, *agglomerate),
            MeshSpec::Voronoi {
                width,
                height,
                seeds,
                seed,
                lloyd,
            } => generate_voronoi_rect(*width, *height, *seeds, *seed, *lloyd),
            MeshSpec::Package {
                package,
                h,
                method,
                agglomerate,
            } => aggl(build_package_mesh(*package, *h, *method)?, *agglomerate),
        }
    }
}

/// Material block in handbook units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub e_mpa: f64,
    pub nu: f64,
    pub k_w_per_mk: f64,
    pub alpha: f64,
    pub t0: f64,
    pub plane: PlaneCondition,
}

impl MaterialSpec {
    pub fn props(&self) -> Result<MaterialProps, MaterialError> {
        MaterialProps::from_handbook(self.e_mpa, self.nu, self.k_w_per_mk, self.alpha, self.t0, self.plane)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BcTarget {
    Label,
    Nodes(Vec<usize>),
    /// The node at this location.
    Point(Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcSpec {
    pub name: String,
    pub target: BcTarget,
    pub temperature: Option<f64>,
    /// Outward normal flux in mW/mm².
    pub flux_mw_per_mm2: Option<f64>,
    pub ux: Option<f64>,
    pub uy: Option<f64>,
    pub traction: Option<[f64; 2]>,
}

impl BcSpec {
    pub fn on_label(name: &str) -> Self {
        BcSpec {
            name: name.to_string(),
            target: BcTarget::Label,
            temperature: None,
            flux_mw_per_mm2: None,
            ux: None,
            uy: None,
            traction: None,
        }
    }

    pub fn at_point(name: &str, p: Point) -> Self {
        BcSpec {
            target: BcTarget::Point(p),
            ..BcSpec::on_label(name)
        }
    }

    pub fn temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn flux(mut self, q_mw_per_mm2: f64) -> Self {
        self.flux_mw_per_mm2 = Some(q_mw_per_mm2);
        self
    }

    pub fn displacement(mut self, ux: Option<f64>, uy: Option<f64>) -> Self {
        self.ux = ux;
        self.uy = uy;
        self
    }

    pub fn traction(mut self, t: [f64; 2]) -> Self {
        self.traction = Some(t);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub options: SolveOptions,
    pub tau: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            options: SolveOptions::default(),
            tau: DEFAULT_TAU,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub name: String,
    pub quantity: ProbeQuantity,
    pub start: Point,
    pub end: Point,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub vtk: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            vtk: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub materials: BTreeMap<u32, MaterialSpec>,
    pub bcs: Vec<BcSpec>,
    pub solver: SolverSpec,
    pub probes: Vec<ProbeSpec>,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn material_map(&self) -> Result<MaterialMap, ConfigError> {
        self.materials
            .iter()
            .map(|(&region, m)| {
                m.props()
                    .map(|p| (region, p))
                    .map_err(|source| ConfigError::Material { region, source })
            })
            .collect()
    }

    /// Resolves materials and boundary conditions against `mesh`. Every mesh
    /// region needs a material and every referenced label must exist.
    pub fn problem(&self, mesh: Mesh) -> Result<Problem, ConfigError> {
        let materials = self.material_map()?;
        for r in mesh.regions() {
            if !materials.contains_key(&r) {
                return Err(ConfigError::Invalid(format!("mesh region {r} has no [material {r}] section")));
            }
        }
        let labels: BTreeSet<String> = mesh.labels().into_iter().map(str::to_string).collect();
        let mut bcs = BoundaryConditions::default();
        for bc in &self.bcs {
            let target = match &bc.target {
                BcTarget::Label => {
                    if !labels.contains(&bc.name) {
                        return Err(ConfigError::Invalid(format!(
                            "[bc {}] names a boundary label that is not in the mesh",
                            bc.name
                        )));
                    }
                    Target::Label(bc.name.clone())
                }
                BcTarget::Nodes(ids) => {
                    if let Some(n) = ids.iter().find(|&&n| n >= mesh.n_nodes()) {
                        return Err(ConfigError::Invalid(format!(
                            "[bc {}] node {n} is out of range ({} nodes)",
                            bc.name,
                            mesh.n_nodes()
                        )));
                    }
                    Target::Nodes(ids.clone())
                }
                BcTarget::Point(p) => Target::Nodes(vec![node_at(&mesh, *p).ok_or_else(|| {
                    ConfigError::Invalid(format!("[bc {}] no node at ({}, {})", bc.name, p[0], p[1]))
                })?]),
            };
            if !matches!(target, Target::Label(_)) && (bc.flux_mw_per_mm2.is_some() || bc.traction.is_some()) {
                return Err(ConfigError::Invalid(format!(
                    "[bc {}] flux and traction need a boundary label, not nodes",
                    bc.name
                )));
            }
            if let Some(t) = bc.temperature {
                bcs = bcs.fix_temperature(target.clone(), t);
            }
            if let Some(q) = bc.flux_mw_per_mm2 {
                bcs = bcs.add_flux(&bc.name, q / 1000.0);
            }
            if bc.ux.is_some() || bc.uy.is_some() {
                bcs = bcs.fix_displacement(target.clone(), bc.ux, bc.uy);
            }
            if let Some(t) = bc.traction {
                bcs = bcs.add_traction(&bc.name, t);
            }
        }
        let mut problem = Problem::new(mesh, materials, bcs);
        problem.tau = self.solver.tau;
        Ok(problem)
    }
}

/// Node within `1e-9` of the mesh extent from `p`, lowest id on ties.
pub fn node_at(mesh: &Mesh, p: Point) -> Option<usize> {
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for n in mesh.nodes() {
        lo = [lo[0].min(n.x), lo[1].min(n.y)];
        hi = [hi[0].max(n.x), hi[1].max(n.y)];
    }
    let tol = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    mesh.nodes()
        .iter()
        .find(|n| (n.x - p[0]).hypot(n.y - p[1]) <= tol)
        .map(|n| n.id)
}

fn perr(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

/// Key/value lines of one section.
struct Section {
    line: usize,
    kind: String,
    name: Option<String>,
    entries: BTreeMap<String, (usize, Vec<String>)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, Vec<String>)> {
        self.entries.remove(key)
    }

    fn values<T: std::str::FromStr>(&mut self, key: &str, n: usize) -> Result<Option<Vec<T>>, ConfigError> {
        let Some((line, v)) = self.take(key) else {
            return Ok(None);
        };
        if v.len() != n {
            return Err(perr(line, format!("`{key}` takes {n} value(s), got {}", v.len())));
        }
        v.iter()
            .map(|s| s.parse().map_err(|_| perr(line, format!("bad value {s:?} for `{key}`"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        Ok(self.values(key, 1)?.map(|mut v| v.remove(0)))
    }

    fn req<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        let line = self.line;
        let what = self.header();
        self.opt(key)?
            .ok_or_else(|| perr(line, format!("{what} is missing `{key}`")))
    }

    fn point(&mut self, key: &str) -> Result<Option<Point>, ConfigError> {
        Ok(self.values::<f64>(key, 2)?.map(|v| [v[0], v[1]]))
    }

    fn word<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) if v.len() == 1 => parse(&v[0])
                .map(Some)
                .ok_or_else(|| perr(line, format!("bad value {:?} for `{key}`", v[0]))),
            Some((line, _)) => Err(perr(line, format!("`{key}` takes one value"))),
        }
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.word(key, |s| match s {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            _ => None,
        })
    }

    fn kind(&mut self, key: &str) -> Result<Option<ElementKind>, ConfigError> {
        self.word(key, ElementKind::from_tag)
    }

    fn header(&self) -> String {
        match &self.name {
            Some(n) => format!("[{} {}]", self.kind, n),
            None => format!("[{}]", self.kind),
        }
    }

    /// Fails on any key not consumed.
    fn finish(self) -> Result<(), ConfigError> {
        let header = self.header();
        match self.entries.into_iter().next() {
            Some((k, (line, _))) => Err(perr(line, format!("unknown key `{k}` in {header}"))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = tokens(raw);
        if t.is_empty() {
            continue;
        }
        let joined = t.join(" ");
        if joined.starts_with('[') {
            let inner = joined
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| perr(line, "unterminated section header"))?;
            let mut words = inner.split_whitespace();
            let kind = words.next().ok_or_else(|| perr(line, "empty section header"))?.to_string();
            let rest: Vec<&str> = words.collect();
            let name = match rest.len() {
                0 => None,
                1 => Some(rest[0].to_string()),
                _ => return Err(perr(line, "section names cannot contain spaces")),
            };
            out.push(Section {
                line,
                kind,
                name,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let sec = out.last_mut().ok_or_else(|| perr(line, "key outside of any section"))?;
        let key = t[0].to_string();
        let vals = t[1..].iter().map(|s| s.to_string()).collect();
        if sec.entries.insert(key.clone(), (line, vals)).is_some() {
            return Err(perr(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn parse_mesh_section(mut s: Section) -> Result<MeshSpec, ConfigError> {
    let line = s.line;
    if let Some(path) = s.opt::<String>("file")? {
        s.finish()?;
        return Ok(MeshSpec::File(PathBuf::from(path)));
    }
    let generator: String = s.req("generator")?;
    let spec = match generator.as_str() {
        "structured" => MeshSpec::Structured {
            width: s.req("width")?,
            height: s.req("height")?,
            nx: s.req("nx")?,
            ny: s.req("ny")?,
            kind: s.kind("kind")?.unwrap_or(ElementKind::FeQuad),
        },
        "annulus" => MeshSpec::Annulus {
            r_a: s.req("r_a")?,
            r_b: s.req("r_b")?,
            n_r: s.req("n_r")?,
            n_t: s.req("n_t")?,
            split: s.req("split")?,
            agglomerate: s.flag("agglomerate")?.unwrap_or(false),
        },
        "plate_hole" => MeshSpec::PlateHole {
            plate: PlateWithHole {
                side: s.req("side")?,
                hole_radius: s.req("hole_radius")?,
                ring_radius: s.req("ring_radius")?,
                n_theta: s.req("n_theta")?,
                n_ring: s.req("n_ring")?,
                n_outer: s.req("n_outer")?,
                ring_kind: s.kind("ring_kind")?.unwrap_or(ElementKind::FeQuad),
                outer_kind: s.kind("outer_kind")?.unwrap_or(ElementKind::FeQuad),
            },
            agglomerate: s.flag("agglomerate")?.unwrap_or(false),
        },
        "voronoi" => MeshSpec::Voronoi {
            width: s.req("width")?,
            height: s.req("height")?,
            seeds: s.req("seeds")?,
            seed: s.req("seed")?,
            lloyd: s.opt("lloyd")?.unwrap_or(0),
        },
        other => match Package::parse(other) {
            Some(package) => MeshSpec::Package {
                package,
                h: s.req("h")?,
                method: s.word("method", Method::parse)?.unwrap_or(Method::Coupled),
                agglomerate: s.flag("agglomerate")?.unwrap_or(false),
            },
            None => return Err(perr(line, format!("unknown mesh generator `{other}`"))),
        },
    };
    s.finish()?;
    Ok(spec)
}

fn parse_material(mut s: Section) -> Result<(u32, MaterialSpec), ConfigError> {
    let line = s.line;
    let region: u32 = s
        .name
        .as_deref()
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| perr(line, "[material] needs a numeric region id"))?;
    let m = MaterialSpec {
        e_mpa: s.req("E_MPa")?,
        nu: s.req("nu")?,
        k_w_per_mk: s.req("k_W_per_mK")?,
        alpha: s.req("alpha_per_C")?,
        t0: s.opt("T0_C")?.unwrap_or(0.0),
        plane: s.word("plane", PlaneCondition::parse)?.unwrap_or(PlaneCondition::Stress),
    };
    s.finish()?;
    Ok((region, m))
}

fn parse_bc(mut s: Section) -> Result<BcSpec, ConfigError> {
    let line = s.line;
    let name = s.name.clone().ok_or_else(|| perr(line, "[bc] needs a label"))?;
    let nodes: Option<Vec<usize>> = match s.take("nodes") {
        None => None,
        Some((l, v)) => Some(
            v.iter()
                .map(|x| x.parse().map_err(|_| perr(l, format!("bad node id {x:?}"))))
                .collect::<Result<_, _>>()?,
        ),
    };
    let point = s.point("point")?;
    let target = match (nodes, point) {
        (Some(_), Some(_)) => return Err(perr(line, "use either `nodes` or `point`, not both")),
        (Some(n), None) => BcTarget::Nodes(n),
        (None, Some(p)) => BcTarget::Point(p),
        (None, None) => BcTarget::Label,
    };
    let tx: Option<f64> = s.opt("tx")?;
    let ty: Option<f64> = s.opt("ty")?;
    let bc = BcSpec {
        name,
        target,
        temperature: s.opt("T")?,
        flux_mw_per_mm2: s.opt("q_mW_per_mm2")?,
        ux: s.opt("ux")?,
        uy: s.opt("uy")?,
        traction: (tx.is_some() || ty.is_some()).then(|| [tx.unwrap_or(0.0), ty.unwrap_or(0.0)]),
    };
    s.finish()?;
    Ok(bc)
}

fn parse_solver(mut s: Section) -> Result<SolverSpec, ConfigError> {
    let mut spec = SolverSpec::default();
    if let Some(m) = s.word("method", SolveMethod::parse)? {
        spec.options.method = m;
    }
    if let Some(t) = s.opt("cg_tol")? {
        spec.options.cg_rel_tol = t;
    }
    if let Some(n) = s.opt("cg_max_iter")? {
        spec.options.cg_max_iter = n;
    }
    if let Some(j) = s.flag("jacobi")? {
        spec.options.jacobi = j;
    }
    if let Some(t) = s.opt("tau")? {
        spec.tau = t;
    }
    s.finish()?;
    Ok(spec)
}

fn parse_probe(mut s: Section) -> Result<ProbeSpec, ConfigError> {
    let line = s.line;
    let name = s.name.clone().ok_or_else(|| perr(line, "[probe] needs a name"))?;
    let p = ProbeSpec {
        name,
        quantity: s
            .word("quantity", ProbeQuantity::parse)?
            .ok_or_else(|| perr(line, "probe is missing `quantity`"))?,
        start: s.point("start")?.ok_or_else(|| perr(line, "probe is missing `start`"))?,
        end: s.point("end")?.ok_or_else(|| perr(line, "probe is missing `end`"))?,
        samples: s.opt("samples")?.unwrap_or(101),
    };
    s.finish()?;
    Ok(p)
}

fn parse_output(mut s: Section) -> Result<OutputSpec, ConfigError> {
    let mut o = OutputSpec::default();
    if let Some(d) = s.opt::<String>("dir")? {
        o.dir = PathBuf::from(d);
    }
    if let Some(v) = s.flag("vtk")? {
        o.vtk = v;
    }
    s.finish()?;
    Ok(o)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut mesh = None;
    let mut materials = BTreeMap::new();
    let mut bcs: Vec<BcSpec> = Vec::new();
    let mut solver = None;
    let mut probes: Vec<ProbeSpec> = Vec::new();
    let mut output = None;
    for s in split_sections(text)? {
        let line = s.line;
        match s.kind.as_str() {
            "mesh" if mesh.is_none() => mesh = Some(parse_mesh_section(s)?),
            "material" => {
                let (r, m) = parse_material(s)?;
                if materials.insert(r, m).is_some() {
                    return Err(perr(line, format!("duplicate [material {r}]")));
                }
            }
            "bc" => {
                let b = parse_bc(s)?;
                if bcs.iter().any(|o| o.name == b.name) {
                    return Err(perr(line, format!("duplicate [bc {}]", b.name)));
                }
                bcs.push(b);
            }
            "solver" if solver.is_none() => solver = Some(parse_solver(s)?),
            "probe" => {
                let p = parse_probe(s)?;
                if probes.iter().any(|o| o.name == p.name) {
                    return Err(perr(line, format!("duplicate [probe {}]", p.name)));
                }
                probes.push(p);
            }
            "output" if output.is_none() => output = Some(parse_output(s)?),
            "mesh" | "solver" | "output" => return Err(perr(line, format!("duplicate [{}] section", s.kind))),
            other => return Err(perr(line, format!("unknown section [{other}]"))),
        }
    }
    let mesh = mesh.ok_or_else(|| perr(0, "missing [mesh] section"))?;
    if materials.is_empty() {
        return Err(perr(0, "no [material] section"));
    }
    Ok(RunConfig {
        mesh,
        materials,
        bcs,
        solver: solver.unwrap_or_default(),
        probes,
        output: output.unwrap_or_default(),
    })
}

/// Parses only the `[mesh]` section of a config; other sections are ignored.
pub fn parse_mesh_spec(text: &str) -> Result<MeshSpec, ConfigError> {
    let mut mesh = None;
    for s in split_sections(text)? {
        if s.kind == "mesh" {
            if mesh.is_some() {
                return Err(perr(s.line, "duplicate [mesh] section"));
            }
            mesh = Some(parse_mesh_section(s)?);
        }
    }
    mesh.ok_or_else(|| perr(0, "missing [mesh] section"))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

fn f(v: f64) -> String {
    format!("{v:?}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Writes a config that [`parse_config`] reads back to an equal value.
pub fn render_config(c: &RunConfig) -> String {
    let mut s = String::from("[mesh]\n");
    match &c.mesh {
        MeshSpec::File(p) => {
            let _ = writeln!(s, "file {}", p.display());
        }
        MeshSpec::Structured {
            width,
            height,
            nx,
            ny,
            kind,
        } => {
            let _ = writeln!(
                s,
                "generator structured\nwidth {}\nheight {}\nnx {nx}\nny {ny}\nkind {}",
                f(*width),
                f(*height),
                kind.tag()
            );
        }
        MeshSpec::Annulus {
            r_a,
            r_b,
            n_r,
            n_t,
            split,
            agglomerate,
        } => {
            let _ = writeln!(
                s,
                "generator annulus\nr_a {}\nr_b {}\nn_r {n_r}\nn_t {n_t}\nsplit {}\nagglomerate {}",
                f(*r_a),
                f(*r_b),
                f(*split),
                flag(*agglomerate)
            );
        }
        MeshSpec::PlateHole { plate: p, agglomerate } => {
            let _ = writeln!(
                s,
                "generator plate_hole\nside {}\nhole_radius {}\nring_radius {}\nn_theta {}\nn_ring {}\nn_outer {}\nring_kind {}\nouter_kind {}\nagglomerate {}",
                f(p.side),
                f(p.hole_radius),
                f(p.ring_radius),
                p.n_theta,
                p.n_ring,
                p.n_outer,
                p.ring_kind.tag(),
                p.outer_kind.tag(),
                flag(*agglomerate)
            );
        }
        MeshSpec::Voronoi {
            width,
            height,
            seeds,
            seed,
            lloyd,
        } => {
            let _ = writeln!(
                s,
                "generator voronoi\nwidth {}\nheight {}\nseeds {seeds}\nseed {seed}\nlloyd {lloyd}",
                f(*width),
                f(*height)
            );
        }
        MeshSpec::Package {
            package,
            h,
            method,
            agglomerate,
        } => {
            let _ = writeln!(
                s,
                "generator {}\nh {}\nmethod {}\nagglomerate {}",
                package.name(),
                f(*h),
                method.tag(),
                flag(*agglomerate)
            );
        }
    }
    for (r, m) in &c.materials {
        let _ = writeln!(
            s,
            "\n[material {r}]\nE_MPa {}\nnu {}\nk_W_per_mK {}\nalpha_per_C {}\nT0_C {}\nplane {}",
            f(m.e_mpa),
            f(m.nu),
            f(m.k_w_per_mk),
            f(m.alpha),
            f(m.t0),
            m.plane
        );
    }
    for b in &c.bcs {
        let _ = writeln!(s, "\n[bc {}]", b.name);
        match &b.target {
            BcTarget::Label => {}
            BcTarget::Nodes(n) => {
                let ids: Vec<String> = n.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(s, "nodes {}", ids.join(" "));
            }
            BcTarget::Point(p) => {
                let _ = writeln!(s, "point {} {}", f(p[0]), f(p[1]));
            }
        }
        let mut kv = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} {}", f(v));
            }
        };
        kv("T", b.temperature);
        kv("q_mW_per_mm2", b.flux_mw_per_mm2);
        kv("ux", b.ux);
        kv("uy", b.uy);
        kv("tx", b.traction.map(|t| t[0]));
        kv("ty", b.traction.map(|t| t[1]));
    }
    let o = &c.solver.options;
    let _ = writeln!(
        s,
        "\n[solver]\nmethod {}\ncg_tol {}\ncg_max_iter {}\njacobi {}\ntau {}",
        o.method,
        f(o.cg_rel_tol),
        o.cg_max_iter,
        flag(o.jacobi),
        f(c.solver.tau)
    );
    for p in &c.probes {
        let _ = writeln!(
            s,
            "\n[probe {}]\nquantity {}\nstart {} {}\nend {} {}\nsamples {}",
            p.name,
            p.quantity.name(),
            f(p.start[0]),
            f(p.start[1]),
            f(p.end[0]),
            f(p.end[1]),
            p.samples
        );
    }
    let _ = writeln!(s, "\n[output]\ndir {}\nvtk {}", c.output.dir.display(), flag(c.output.vtk));
    s
}
