//! Built-in benchmark cases at desk scale.
//!
//! Lengths in mm, moduli in MPa, temperatures in °C. The electronic package
//! geometries are layered rectangles on one tensor grid; curved features
//! (solder balls, bond wires) are replaced by rectangular blocks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::config::{BcSpec, MaterialSpec, MeshSpec, OutputSpec, ProbeSpec, RunConfig, SolverSpec};
use crate::materials::PlaneCondition;
use crate::mesh::{generate_block_grid, BlockLayout, ElementKind, Mesh, MeshError, PlateWithHole, RectBlock};
use crate::post::ProbeQuantity;

use super::{ExpectedMetric, Method, Source};

/// Layered package geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Package {
    Sandwich,
    FcBga,
    Igbt,
}

impl Package {
    pub fn name(self) -> &'static str {
        match self {
            Package::Sandwich => "sandwich",
            Package::FcBga => "fcbga",
            Package::Igbt => "igbt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sandwich" => Some(Package::Sandwich),
            "fcbga" => Some(Package::FcBga),
            "igbt" => Some(Package::Igbt),
            _ => None,
        }
    }
}

/// Error measure used by [`super::run_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// RMS-L2 nodal temperature error against the logarithmic profile.
    CylinderTemperature { r_a: f64, r_b: f64, t_a: f64, t_b: f64 },
    /// MRE of nodal von Mises on the circle of radius `radius` against an
    /// FE-only run at `reference_level`.
    PlateMre { radius: f64, reference_level: usize },
    /// Peak nodal von Mises on each side of the interface `y = y`,
    /// `x0 ≤ x ≤ x1`, averaged over the elements of one region at a time.
    InterfacePeaks {
        y: f64,
        x0: f64,
        x1: f64,
        high_region: u32,
        low_region: u32,
    },
    /// Accepted by property checks only.
    Property,
}

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub description: &'static str,
    /// Refinement parameters, increasing in dof count.
    pub levels: Vec<usize>,
    pub methods: Vec<Method>,
    pub metric: Metric,
    pub expected: Vec<ExpectedMetric>,
    pub build: fn(usize, Method) -> RunConfig,
}

impl BenchmarkCase {
    pub fn config(&self, level: usize, method: Method) -> RunConfig {
        (self.build)(level, method)
    }
}

fn mat(e_gpa: f64, nu: f64, k: f64, alpha: f64, t0: f64, plane: PlaneCondition) -> MaterialSpec {
    MaterialSpec {
        e_mpa: e_gpa * 1000.0,
        nu,
        k_w_per_mk: k,
        alpha,
        t0,
        plane,
    }
}

fn probe(name: &str, quantity: ProbeQuantity, start: [f64; 2], end: [f64; 2], samples: usize) -> ProbeSpec {
    ProbeSpec {
        name: name.to_string(),
        quantity,
        start,
        end,
        samples,
    }
}

fn output(case: &str, level: usize, method: Method) -> OutputSpec {
    OutputSpec {
        dir: PathBuf::from(format!("out/{case}-{}-{level}", method.tag())),
        vtk: true,
    }
}

pub const CYL_R_A: f64 = 20.0;
pub const CYL_R_B: f64 = 60.0;
pub const CYL_T_A: f64 = 0.0;
pub const CYL_T_B: f64 = 500.0;
const CYL_SPLIT: f64 = 40.0;

fn cylinder(level: usize, method: Method) -> RunConfig {
    let split = match method {
        Method::FeOnly => CYL_R_A,
        Method::VeOnly => CYL_R_B,
        Method::Coupled => CYL_SPLIT,
    };
    let steel = MaterialSpec {
        e_mpa: 460_000.0,
        nu: 0.3,
        k_w_per_mk: 20.0,
        alpha: 7.4e-6,
        t0: 0.0,
        plane: PlaneCondition::Strain,
    };
    RunConfig {
        mesh: MeshSpec::Annulus {
            r_a: CYL_R_A,
            r_b: CYL_R_B,
            n_r: level,
            n_t: 3 * level / 2,
            split,
            agglomerate: method != Method::FeOnly,
        },
        materials: BTreeMap::from([(0, steel)]),
        bcs: vec![
            BcSpec::on_label("inner").temperature(CYL_T_A),
            BcSpec::on_label("outer").temperature(CYL_T_B),
            BcSpec::on_label("bottom").displacement(None, Some(0.0)),
            BcSpec::on_label("left").displacement(Some(0.0), None),
        ],
        solver: SolverSpec::default(),
        probes: vec![
            probe("radial_T", ProbeQuantity::Temperature, [CYL_R_A, 0.0], [CYL_R_B, 0.0], 41),
            probe("radial_ux", ProbeQuantity::Ux, [CYL_R_A, 0.0], [CYL_R_B, 0.0], 41),
        ],
        output: output("cylinder", level, method),
    }
}

pub const PLATE_SIDE: f64 = 20.0;
pub const PLATE_HOLE: f64 = 5.0;
pub const PLATE_RING: f64 = 10.0;

fn plate(level: usize, method: Method) -> RunConfig {
    let (ring_kind, outer_kind) = match method {
        Method::FeOnly => (ElementKind::FeQuad, ElementKind::FeQuad),
        Method::VeOnly => (ElementKind::VePoly, ElementKind::VePoly),
        Method::Coupled => (ElementKind::VePoly, ElementKind::FeQuad),
    };
    let elastic = MaterialSpec {
        e_mpa: 10.0,
        nu: 0.3,
        k_w_per_mk: 1.0,
        alpha: 0.0,
        t0: 0.0,
        plane: PlaneCondition::Stress,
    };
    RunConfig {
        mesh: MeshSpec::PlateHole {
            plate: PlateWithHole {
                side: PLATE_SIDE,
                hole_radius: PLATE_HOLE,
                ring_radius: PLATE_RING,
                n_theta: level,
                n_ring: (level / 4).max(1),
                n_outer: (level / 2).max(1),
                ring_kind,
                outer_kind,
            },
            agglomerate: method != Method::FeOnly,
        },
        materials: BTreeMap::from([(0, elastic)]),
        bcs: vec![
            BcSpec::on_label("top").traction([0.0, 5.0]),
            BcSpec::on_label("left").displacement(Some(0.0), None),
            BcSpec::on_label("bottom").displacement(None, Some(0.0)),
        ],
        solver: SolverSpec::default(),
        probes: vec![probe(
            "L1",
            ProbeQuantity::NodalVonMises,
            [0.0, PLATE_HOLE],
            [0.0, PLATE_SIDE],
            61,
        )],
        output: output("plate", level, method),
    }
}

// Sandwich: copper substrate, sintered silver, SiC chip.
const SW_A: f64 = 3.0;
const SW_B: f64 = 1.8;
const SW_H1: f64 = 0.5;
const SW_H2: f64 = 0.3;
const SW_H3: f64 = 0.8;
pub const SW_CU: u32 = 0;
pub const SW_AG: u32 = 1;
pub const SW_SIC: u32 = 2;

fn sandwich_blocks() -> Vec<RectBlock> {
    let x0 = 0.5 * (SW_A - SW_B);
    vec![
        RectBlock::new(0.0, 0.0, SW_A, SW_H3, SW_CU),
        RectBlock::new(x0, SW_H3, x0 + SW_B, SW_H3 + SW_H2, SW_AG),
        RectBlock::new(x0, SW_H3 + SW_H2, x0 + SW_B, SW_H3 + SW_H2 + SW_H1, SW_SIC),
    ]
}

/// Mesh size for a refinement level of the package cases.
pub fn package_h(level: usize) -> f64 {
    0.1 / level as f64
}

fn sandwich(level: usize, method: Method) -> RunConfig {
    let plane = PlaneCondition::Strain;
    let x0 = 0.5 * (SW_A - SW_B);
    RunConfig {
        mesh: MeshSpec::Package {
            package: Package::Sandwich,
            h: package_h(level),
            method,
            agglomerate: method != Method::FeOnly,
        },
        materials: BTreeMap::from([
            (SW_CU, mat(110.0, 0.38, 400.0, 16.5e-6, 25.0, plane)),
            (SW_AG, mat(12.9, 0.38, 278.0, 19.0e-6, 25.0, plane)),
            (SW_SIC, mat(410.0, 0.14, 370.0, 4.5e-6, 25.0, plane)),
        ]),
        bcs: vec![
            BcSpec::on_label("top").temperature(150.0),
            BcSpec::on_label("bottom").temperature(25.0),
            BcSpec::on_label("right").displacement(Some(0.0), Some(0.0)),
        ],
        solver: SolverSpec::default(),
        probes: vec![
            probe("L1_vm", ProbeQuantity::NodalVonMises, [x0, SW_H3], [x0 + SW_B, SW_H3], 91),
            probe("L1_uy", ProbeQuantity::Uy, [x0, SW_H3], [x0 + SW_B, SW_H3], 91),
            probe("L1_T", ProbeQuantity::Temperature, [x0, SW_H3], [x0 + SW_B, SW_H3], 91),
        ],
        output: output("sandwich", level, method),
    }
}

// FC-BGA: PCB, solder balls, BT substrate, adhesive, die, mold compound.
const BGA_PCB: (f64, f64) = (13.5, 0.8);
const BGA_BALL: (f64, f64) = (0.76, 0.56);
const BGA_BT: (f64, f64) = (11.0, 0.4);
const BGA_EPOXY: (f64, f64) = (5.0, 0.1);
const BGA_DIE: (f64, f64) = (5.0, 0.3);
const BGA_MOLD: (f64, f64) = (9.0, 1.2);
const BGA_N_BALLS: usize = 8;
pub const BGA_MOLD_R: u32 = 0;
pub const BGA_DIE_R: u32 = 1;
pub const BGA_SOLDER_R: u32 = 2;
pub const BGA_EPOXY_R: u32 = 3;
pub const BGA_BT_R: u32 = 4;
pub const BGA_PCB_R: u32 = 5;

fn centred(width: f64, y0: f64, h: f64, region: u32) -> RectBlock {
    let x0 = 0.5 * (BGA_PCB.0 - width);
    RectBlock::new(x0, y0, x0 + width, y0 + h, region)
}

fn fcbga_levels() -> [f64; 5] {
    let y_ball = BGA_PCB.1;
    let y_bt = y_ball + BGA_BALL.1;
    let y_top_bt = y_bt + BGA_BT.1;
    let y_die = y_top_bt + BGA_EPOXY.1;
    [y_ball, y_bt, y_top_bt, y_die, y_top_bt + BGA_MOLD.1]
}

fn fcbga_blocks() -> Vec<RectBlock> {
    let [y_ball, y_bt, y_top_bt, y_die, _] = fcbga_levels();
    let mut b = vec![RectBlock::new(0.0, 0.0, BGA_PCB.0, BGA_PCB.1, BGA_PCB_R)];
    let bt_x0 = 0.5 * (BGA_PCB.0 - BGA_BT.0);
    let pitch = BGA_BT.0 / BGA_N_BALLS as f64;
    for i in 0..BGA_N_BALLS {
        let c = bt_x0 + pitch * (i as f64 + 0.5);
        b.push(RectBlock::new(c - 0.5 * BGA_BALL.0, y_ball, c + 0.5 * BGA_BALL.0, y_bt, BGA_SOLDER_R));
    }
    b.push(centred(BGA_BT.0, y_bt, BGA_BT.1, BGA_BT_R));
    b.push(centred(BGA_MOLD.0, y_top_bt, BGA_MOLD.1, BGA_MOLD_R));
    b.push(centred(BGA_EPOXY.0, y_top_bt, BGA_EPOXY.1, BGA_EPOXY_R));
    b.push(centred(BGA_DIE.0, y_die, BGA_DIE.1, BGA_DIE_R));
    b
}

fn fcbga(level: usize, method: Method) -> RunConfig {
    let plane = PlaneCondition::Strain;
    let [_, y_bt, y_top_bt, _, _] = fcbga_levels();
    let y_ball_mid = BGA_PCB.1 + 0.5 * BGA_BALL.1;
    let xm = 0.5 * BGA_PCB.0;
    let mold_x0 = 0.5 * (BGA_PCB.0 - BGA_MOLD.0);
    let bt_x0 = 0.5 * (BGA_PCB.0 - BGA_BT.0);
    let top = fcbga_levels()[4];
    RunConfig {
        mesh: MeshSpec::Package {
            package: Package::FcBga,
            h: package_h(level),
            method,
            agglomerate: method != Method::FeOnly,
        },
        materials: BTreeMap::from([
            (BGA_MOLD_R, mat(24.0, 0.25, 2.1, 10e-6, 25.0, plane)),
            (BGA_DIE_R, mat(165.5, 0.25, 119.0, 2.8e-6, 25.0, plane)),
            (BGA_SOLDER_R, mat(11.0, 0.11, 73.0, 35e-6, 25.0, plane)),
            (BGA_EPOXY_R, mat(2.6, 0.3, 0.188, 90e-6, 25.0, plane)),
            (BGA_BT_R, mat(26.0, 0.19, 14.5, 14e-6, 25.0, plane)),
            (BGA_PCB_R, mat(22.0, 0.28, 6.5, 18e-6, 25.0, plane)),
        ]),
        bcs: vec![
            BcSpec::on_label("die").temperature(500.0),
            BcSpec::on_label("mold_top").temperature(50.0),
            BcSpec::on_label("pcb_bottom")
                .temperature(50.0)
                .displacement(Some(0.0), Some(0.0)),
        ],
        solver: SolverSpec::default(),
        probes: vec![
            probe("L1_vm", ProbeQuantity::NodalVonMises, [mold_x0, y_top_bt], [mold_x0 + BGA_MOLD.0, y_top_bt], 181),
            probe("L1_ux", ProbeQuantity::Ux, [mold_x0, y_top_bt], [mold_x0 + BGA_MOLD.0, y_top_bt], 181),
            probe("L1_uy", ProbeQuantity::Uy, [mold_x0, y_top_bt], [mold_x0 + BGA_MOLD.0, y_top_bt], 181),
            probe("L1_T", ProbeQuantity::Temperature, [mold_x0, y_top_bt], [mold_x0 + BGA_MOLD.0, y_top_bt], 181),
            probe("L2_vm", ProbeQuantity::NodalVonMises, [bt_x0, y_ball_mid], [bt_x0 + BGA_BT.0, y_ball_mid], 221),
            probe("L3_vm", ProbeQuantity::NodalVonMises, [xm, 0.0], [xm, top], 121),
            probe("L_bt_uy", ProbeQuantity::Uy, [bt_x0, y_bt], [bt_x0 + BGA_BT.0, y_bt], 221),
        ],
        output: output("fcbga", level, method),
    }
}

// IGBT: Cu baseplate up to the Al metallization, plus two bond wires.
const IGBT_W: f64 = 18.0;
/// (width, thickness, region) from the bottom up.
const IGBT_LAYERS: [(f64, f64, u32); 9] = [
    (18.0, 3.00, 0),  // Cu baseplate
    (18.0, 0.15, 1),  // substrate solder
    (18.0, 0.30, 2),  // lower Cu
    (18.0, 0.38, 3),  // Al2O3 ceramic
    (18.0, 0.30, 4),  // upper Cu layer 2
    (15.0, 0.30, 5),  // upper Cu layer 1
    (13.0, 0.15, 6),  // chip solder
    (13.0, 0.20, 7),  // IGBT chip
    (11.0, 0.004, 8), // Al metallization
];
pub const IGBT_BASE_R: u32 = 0;
pub const IGBT_CHIP_R: u32 = 7;
pub const IGBT_WIRE_R: u32 = 9;
const WIRE_T: f64 = 0.1;
const WIRE_H1: f64 = 0.32;
const WIRE_L1: f64 = 0.70;
/// (left foot start, foot spacing) per wire.
const WIRES: [(f64, f64); 2] = [(4.0, 5.36), (10.5, 3.16)];

fn igbt_tops() -> Vec<f64> {
    IGBT_LAYERS
        .iter()
        .scan(0.0, |y, l| {
            *y += l.1;
            Some(*y)
        })
        .collect()
}

fn igbt_blocks() -> Vec<RectBlock> {
    let mut y = 0.0;
    let mut b = Vec::new();
    for &(w, t, r) in &IGBT_LAYERS {
        let x0 = 0.5 * (IGBT_W - w);
        b.push(RectBlock::new(x0, y, x0 + w, y + t, r));
        y += t;
    }
    // Arch: two feet on the metallization, two legs and a span.
    for &(x, gap) in &WIRES {
        let xr = x + gap;
        b.push(RectBlock::new(x, y, x + WIRE_L1, y + WIRE_T, IGBT_WIRE_R));
        b.push(RectBlock::new(xr, y, xr + WIRE_L1, y + WIRE_T, IGBT_WIRE_R));
        b.push(RectBlock::new(x + WIRE_L1 - WIRE_T, y + WIRE_T, x + WIRE_L1, y + WIRE_H1, IGBT_WIRE_R));
        b.push(RectBlock::new(xr, y + WIRE_T, xr + WIRE_T, y + WIRE_H1, IGBT_WIRE_R));
        b.push(RectBlock::new(x + WIRE_L1 - WIRE_T, y + WIRE_H1, xr + WIRE_T, y + WIRE_H1 + WIRE_T, IGBT_WIRE_R));
    }
    b
}

fn igbt(level: usize, method: Method) -> RunConfig {
    let plane = PlaneCondition::Strain;
    let al = mat(70.6, 0.33, 237.0, 21.0e-6, 25.0, plane);
    let cu = mat(100.0, 0.34, 400.0, 16.4e-6, 25.0, plane);
    let ceramic = mat(300.0, 0.22, 20.0, 6.4e-6, 25.0, plane);
    let chip = mat(112.0, 0.22, 148.0, 2.5e-6, 25.0, plane);
    let solder = mat(10.6, 0.35, 57.0, 22.4e-6, 25.0, plane);
    let tops = igbt_tops();
    let y_base = tops[0];
    let x_mid = 0.5 * IGBT_W;
    RunConfig {
        mesh: MeshSpec::Package {
            package: Package::Igbt,
            h: package_h(level),
            method,
            agglomerate: method != Method::FeOnly,
        },
        materials: BTreeMap::from([
            (0, cu),
            (1, solder),
            (2, cu),
            (3, ceramic),
            (4, cu),
            (5, cu),
            (6, solder),
            (7, chip),
            (8, al),
            (IGBT_WIRE_R, al),
        ]),
        bcs: vec![
            BcSpec::on_label("chip_top").flux(-1000.0),
            BcSpec::on_label("bottom")
                .temperature(25.0)
                .displacement(None, Some(0.0)),
            BcSpec::at_point("pin", [0.0, 0.0]).displacement(Some(0.0), None),
        ],
        solver: SolverSpec::default(),
        probes: vec![
            probe("L1_vm", ProbeQuantity::NodalVonMises, [0.0, y_base], [IGBT_W, y_base], 181),
            probe("L1_ux", ProbeQuantity::Ux, [0.0, y_base], [IGBT_W, y_base], 181),
            probe("L1_uy", ProbeQuantity::Uy, [0.0, y_base], [IGBT_W, y_base], 181),
            probe("L1_T", ProbeQuantity::Temperature, [0.0, y_base], [IGBT_W, y_base], 181),
            probe("L2_vm", ProbeQuantity::NodalVonMises, [x_mid, 0.0], [x_mid, tops[8]], 121),
            probe("L2_uy", ProbeQuantity::Uy, [x_mid, 0.0], [x_mid, tops[8]], 121),
        ],
        output: output("igbt", level, method),
    }
}

fn kinds(pairs: &[(u32, ElementKind)], method: Method) -> BTreeMap<u32, ElementKind> {
    pairs
        .iter()
        .map(|&(r, k)| {
            let k = match method {
                Method::FeOnly => ElementKind::FeQuad,
                Method::VeOnly => ElementKind::VePoly,
                Method::Coupled => k,
            };
            (r, k)
        })
        .collect()
}

/// Builds and labels the grid for a package geometry.
///
/// Labels: sandwich `top`, `bottom`, `right`; FC-BGA `mold_top`,
/// `pcb_bottom`, `die` (die outline); IGBT `bottom`, `chip_top` (whole chip
/// top line, including the part under the metallization).
pub fn build_package_mesh(package: Package, h: f64, method: Method) -> Result<Mesh, MeshError> {
    use ElementKind::{FeQuad as Fe, VePoly as Ve};
    let (blocks, region_kinds) = match package {
        Package::Sandwich => (sandwich_blocks(), kinds(&[(SW_CU, Fe), (SW_AG, Ve), (SW_SIC, Ve)], method)),
        Package::FcBga => (
            fcbga_blocks(),
            kinds(
                &[
                    (BGA_MOLD_R, Ve),
                    (BGA_DIE_R, Ve),
                    (BGA_SOLDER_R, Ve),
                    (BGA_EPOXY_R, Ve),
                    (BGA_BT_R, Fe),
                    (BGA_PCB_R, Fe),
                ],
                method,
            ),
        ),
        Package::Igbt => {
            let mut pairs: Vec<(u32, ElementKind)> = (1..=8).map(|r| (r, Fe)).collect();
            pairs.push((IGBT_BASE_R, Ve));
            pairs.push((IGBT_WIRE_R, Ve));
            (igbt_blocks(), kinds(&pairs, method))
        }
    };
    let mut mesh = generate_block_grid(&BlockLayout {
        blocks,
        region_kinds,
        target_size: h,
        extra_x: vec![],
        extra_y: vec![],
    })?;
    match package {
        Package::Sandwich => {
            let x0 = 0.5 * (SW_A - SW_B);
            let top = SW_H3 + SW_H2 + SW_H1;
            mesh.label_edges_on_segment("top", [x0, top], [x0 + SW_B, top], true);
            mesh.label_edges_on_segment("bottom", [0.0, 0.0], [SW_A, 0.0], true);
            mesh.label_edges_on_segment("right", [SW_A, 0.0], [SW_A, SW_H3], true);
        }
        Package::FcBga => {
            let top = fcbga_levels()[4];
            let x0 = 0.5 * (BGA_PCB.0 - BGA_MOLD.0);
            mesh.label_edges_on_segment("mold_top", [x0, top], [x0 + BGA_MOLD.0, top], true);
            mesh.label_edges_on_segment("pcb_bottom", [0.0, 0.0], [BGA_PCB.0, 0.0], true);
            mesh.label_region_outline(BGA_DIE_R, "die");
        }
        Package::Igbt => {
            let tops = igbt_tops();
            let chip_w = IGBT_LAYERS[7].0;
            let x0 = 0.5 * (IGBT_W - chip_w);
            mesh.label_edges_on_segment("bottom", [0.0, 0.0], [IGBT_W, 0.0], true);
            mesh.label_edges_on_segment("chip_top", [x0, tops[7]], [x0 + chip_w, tops[7]], false);
        }
    }
    mesh.check()?;
    Ok(mesh)
}

fn bound(name: &'static str, method: Option<Method>, min: Option<f64>, max: Option<f64>, source: Source, note: &'static str) -> ExpectedMetric {
    ExpectedMetric {
        name,
        method,
        min,
        max,
        source,
        note,
    }
}

pub fn builtin_cases() -> Vec<BenchmarkCase> {
    use Method::*;
    vec![
        BenchmarkCase {
            name: "cylinder",
            description: "Quarter of a thick-walled cylinder, r_a = 20, r_b = 60, inner 0 °C, outer 500 °C, \
                          plane strain, symmetry rollers on both cuts. Coupled split at r = 40 (VE inside).",
            levels: vec![18, 36, 72, 144],
            methods: vec![Coupled, FeOnly, VeOnly],
            metric: Metric::CylinderTemperature {
                r_a: CYL_R_A,
                r_b: CYL_R_B,
                t_a: CYL_T_A,
                t_b: CYL_T_B,
            },
            expected: vec![
                bound("rate", Some(Coupled), Some(0.90), None, Source::Published, "reference rate 1.01"),
                bound("rate", Some(FeOnly), Some(0.85), None, Source::Published, "reference rate 0.92"),
                bound("rate", Some(VeOnly), Some(0.90), None, Source::Published, "reference rate 1.02"),
                bound("finest_error", Some(Coupled), None, Some(1e-2), Source::Analytic, "against the log profile"),
            ],
            build: cylinder,
        },
        BenchmarkCase {
            name: "plate",
            description: "Quarter of a square plate, a = 20, central hole r = 5, traction 5 MPa in y on the top \
                          edge, E = 10, nu = 0.3, plane stress. Ring r < 10 is VE in the coupled run. L1 is the \
                          left cut x = 0 from (0, 5) to (0, 20); L2 is the ring circle r = 10.",
            levels: vec![24, 48, 96],
            methods: vec![Coupled, FeOnly, VeOnly],
            metric: Metric::PlateMre {
                radius: PLATE_RING,
                reference_level: 384,
            },
            expected: vec![bound(
                "rate",
                Some(Coupled),
                Some(0.25),
                Some(0.6),
                Source::Published,
                "reference rates 0.442 coupled, 0.43 FE, 0.338 VE",
            )],
            build: plate,
        },
        BenchmarkCase {
            name: "sandwich",
            description: "Copper substrate 3 x 0.8 (FE), sintered silver 1.8 x 0.3 and SiC chip 1.8 x 0.5 (VE), \
                          chip centred. Top 150 °C, bottom 25 °C, stress free at 25 °C, right copper edge fixed, \
                          plane strain. Interface L1 is y = 0.8, 0.6 <= x <= 2.4.",
            levels: vec![1, 2, 4, 8],
            methods: vec![Coupled, FeOnly],
            metric: Metric::InterfacePeaks {
                y: SW_H3,
                x0: 0.5 * (SW_A - SW_B),
                x1: 0.5 * (SW_A + SW_B),
                high_region: SW_CU,
                low_region: SW_AG,
            },
            expected: vec![
                bound("peak_ratio", Some(Coupled), Some(3.0), None, Source::Published, "about 260 / 50"),
                bound("copper_peak", Some(Coupled), Some(195.0), Some(325.0), Source::Published, "260 MPa +-25%"),
                bound("silver_peak", Some(Coupled), Some(37.5), Some(62.5), Source::Published, "50 MPa +-25%"),
            ],
            build: sandwich,
        },
        BenchmarkCase {
            name: "fcbga",
            description: "Simplified FC-BGA: PCB 13.5 x 0.8, eight square solder balls 0.76 x 0.56, BT substrate \
                          11 x 0.4, adhesive 5 x 0.1, die 5 x 0.3, mold 9 x 1.2 over adhesive and die. Die outline \
                          500 °C, mold top and PCB bottom 50 °C, PCB bottom fixed, stress free at 25 °C, plane \
                          strain. BT and PCB are FE, the rest VE.",
            levels: vec![1, 2],
            methods: vec![Coupled],
            metric: Metric::Property,
            expected: vec![],
            build: fcbga,
        },
        BenchmarkCase {
            name: "igbt",
            description: "Simplified IGBT stack, 18 wide: Cu baseplate 3.0 (VE), solder 0.15, Cu 0.3, Al2O3 0.38, \
                          Cu 0.3, Cu 15 x 0.3, solder 13 x 0.15, chip 13 x 0.2, Al metallization 11 x 0.004 (FE), \
                          two rectangular bond-wire arches 0.1 thick with 0.7 feet and 0.32 rise (VE). Heat flux \
                          1000 mW/mm2 into the chip top line, baseplate bottom 25 °C, bottom roller plus a pin at \
                          the origin, stress free at 25 °C, plane strain.",
            levels: vec![1, 2],
            methods: vec![Coupled],
            metric: Metric::Property,
            expected: vec![],
            build: igbt,
        },
    ]
}

pub fn find_case(name: &str) -> Option<BenchmarkCase> {
    builtin_cases().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_mesh;
    use std::path::Path;

    #[test]
    fn cases_build_valid_meshes_with_increasing_dofs() {
        for case in builtin_cases() {
            for &m in &case.methods {
                let mut last = 0;
                for &lvl in case.levels.iter().take(2) {
                    let cfg = case.config(lvl, m);
                    let mesh = cfg.mesh.build(Path::new(".")).unwrap();
                    assert!(validate_mesh(&mesh).is_empty(), "{} {m:?} {lvl}", case.name);
                    assert!(mesh.n_nodes() > last, "{} dofs must grow", case.name);
                    last = mesh.n_nodes();
                    cfg.problem(mesh).unwrap();
                }
            }
        }
    }

    #[test]
    fn case_tables() {
        let sw = find_case("sandwich").unwrap().config(1, Method::Coupled);
        assert_eq!(sw.materials.len(), 3);
        assert_eq!(sw.materials[&SW_AG].e_mpa, 12_900.0);
        let ig = find_case("igbt").unwrap().config(1, Method::Coupled);
        let flux = ig.bcs.iter().find(|b| b.name == "chip_top").unwrap();
        assert_eq!(flux.flux_mw_per_mm2, Some(-1000.0));
        let base = ig.bcs.iter().find(|b| b.name == "bottom").unwrap();
        assert_eq!(base.temperature, Some(25.0));
        let plate = find_case("plate").unwrap().config(24, Method::Coupled);
        assert_eq!(plate.materials[&0].e_mpa, 10.0);
        assert_eq!(plate.bcs.len(), 3);
        for case in builtin_cases() {
            assert!(case.levels.windows(2).all(|w| w[0] < w[1]));
            assert!(case.expected.iter().all(|e| e.min.is_some() || e.max.is_some()));
        }
    }

    #[test]
    fn package_layouts_have_expected_kinds() {
        let m = build_package_mesh(Package::FcBga, 0.2, Method::Coupled).unwrap();
        for e in m.elements() {
            let fe = matches!(e.region, BGA_BT_R | BGA_PCB_R);
            assert_eq!(e.kind == ElementKind::FeQuad, fe);
        }
        assert!(!m.interface_nodes().is_empty());
        assert!(m.nodes_with_label("die").len() > 4);
        let m = build_package_mesh(Package::Igbt, 0.2, Method::FeOnly).unwrap();
        assert!(m.elements().iter().all(|e| e.kind == ElementKind::FeQuad));
        assert!(m.elements().iter().any(|e| e.region == IGBT_WIRE_R));
    }
}
