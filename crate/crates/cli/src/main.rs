//! `fevec` batch front-end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O or
//! parse error. Failures print one `error:<code>: <message>` line on stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use fevec_core::bench::{
    builtin_cases, evaluate_expectations, execute, find_case, peak_study, peaks_csv, property_check, report_csv,
    report_summary, run_convergence, BenchError, BenchmarkCase, Metric, Method,
};
use fevec_core::config::{parse_config, parse_mesh_spec, render_config, ConfigError, RunConfig};
use fevec_core::mesh::{load_mesh, save_mesh, validate_mesh, write_mesh, MeshError};
use fevec_core::post::{line_probe, probe_csv, vtk_legacy, PostError};
use fevec_core::solver::PipelineError;

#[derive(Parser)]
#[command(name = "fevec", version, about = "Coupled FE/VE steady thermoelastic solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline for a config and write field, probe and provenance files.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in benchmark case, or `all`, and write reports.
    Bench {
        case: String,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
        /// Only write the run configs of every level and method.
        #[arg(long)]
        emit_configs: bool,
    },
    /// Check a mesh file and print the violations.
    Validate { mesh: PathBuf },
    /// Generate a mesh from the `[mesh]` section of a spec file.
    MeshGen {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(3, format!("{}: {e}", path.display()))
    }
}

fn mesh_code(e: &MeshError) -> u8 {
    match e {
        MeshError::Parse { .. } | MeshError::Io { .. } => 3,
        MeshError::Invalid(_) | MeshError::Degenerate { .. } | MeshError::Generator(_) => 1,
    }
}

fn config_failure(e: ConfigError) -> Failure {
    let code = match &e {
        ConfigError::Parse { .. } | ConfigError::Io { .. } => 3,
        ConfigError::Mesh(m) => mesh_code(m),
        ConfigError::Invalid(_) | ConfigError::Material { .. } => 1,
    };
    Failure::new(code, e.to_string())
}

fn bench_failure(e: BenchError) -> Failure {
    Failure::new(bench_code(&e), e.to_string())
}

fn bench_code(e: &BenchError) -> u8 {
    match e {
        BenchError::Config(ConfigError::Parse { .. } | ConfigError::Io { .. }) => 3,
        BenchError::Config(ConfigError::Mesh(m)) => mesh_code(m),
        BenchError::Pipeline(PipelineError::Solver(_)) => 2,
        BenchError::Post(PostError::Io { .. }) | BenchError::UnknownCase(_) => 3,
        BenchError::Aborted { source, .. } => bench_code(source),
        _ => 1,
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn run(config_path: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let text = fs::read_to_string(config_path).map_err(|e| Failure::io(config_path, e))?;
    let config = parse_config(&text).map_err(config_failure)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let dir = out.unwrap_or_else(|| config.output.dir.clone());
    let r = execute(&config, base).map_err(bench_failure)?;
    create_dir(&dir)?;

    let field = r.field();
    let mut probe_files = Vec::new();
    for p in &config.probes {
        let probe = line_probe(&field, p.start, p.end, p.samples, p.quantity).map_err(|e| bench_failure(e.into()))?;
        let name = format!("probe_{}.csv", p.name);
        write(&dir.join(&name), &probe_csv(&probe))?;
        probe_files.push(name);
    }
    if config.output.vtk {
        let vtk = vtk_legacy(r.mesh(), &r.solution.temperature, &r.solution.displacement, &r.stresses);
        write(&dir.join("fields.vtk"), &vtk)?;
    }
    write(&dir.join("provenance.txt"), &provenance(&text, &config, &r))?;
    println!(
        "{} nodes, {} elements, {} interface nodes; outputs in {}",
        r.mesh().n_nodes(),
        r.mesh().n_elements(),
        r.mesh().interface_nodes().len(),
        dir.display()
    );
    Ok(())
}

fn provenance(config_text: &str, config: &RunConfig, r: &fevec_core::bench::CaseRun) -> String {
    let mesh = r.mesh();
    let n_fe = mesh
        .elements()
        .iter()
        .filter(|e| e.kind == fevec_core::mesh::ElementKind::FeQuad)
        .count();
    let o = &config.solver.options;
    let mut s = String::new();
    let _ = writeln!(s, "fevec {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "config_sha256 {}", sha256(config_text.as_bytes()));
    let _ = writeln!(s, "mesh_sha256 {}", sha256(write_mesh(mesh).as_bytes()));
    let _ = writeln!(s, "nodes {}", mesh.n_nodes());
    let _ = writeln!(s, "elements {} (FE {n_fe}, VE {})", mesh.n_elements(), mesh.n_elements() - n_fe);
    let _ = writeln!(s, "interface_nodes {}", mesh.interface_nodes().len());
    let _ = writeln!(
        s,
        "solver {} cg_tol {:?} cg_max_iter {} jacobi {} tau {:?}",
        o.method, o.cg_rel_tol, o.cg_max_iter, o.jacobi, config.solver.tau
    );
    match &r.solution.thermal {
        Some(d) => {
            let _ = writeln!(
                s,
                "thermal free_dofs {} iterations {} relative_residual {:e}",
                d.n_free, d.iterations, d.relative_residual
            );
        }
        None => s.push_str("thermal skipped (reference temperature)\n"),
    }
    let d = &r.solution.mechanical;
    let _ = writeln!(
        s,
        "mechanical free_dofs {} iterations {} relative_residual {:e}",
        d.n_free, d.iterations, d.relative_residual
    );
    for (region, m) in &config.materials {
        let _ = writeln!(
            s,
            "material {region} E_MPa {:?} nu {:?} k_W_per_mK {:?} alpha_per_C {:?} T0_C {:?} plane {}",
            m.e_mpa, m.nu, m.k_w_per_mk, m.alpha, m.t0, m.plane
        );
    }
    s
}

fn bench_case(case: &BenchmarkCase, out: &Path) -> Result<String, Failure> {
    let dir = out.join(case.name);
    create_dir(&dir)?;
    let here = Path::new(".");
    let mut summary = format!("{}\n{}\n", case.name, case.description);
    match case.metric {
        Metric::Property => {
            for &level in &case.levels {
                let cfg = case.config(level, Method::Coupled);
                let run = execute(&cfg, here).map_err(bench_failure)?;
                let p = property_check(&run, &cfg).map_err(bench_failure)?;
                let _ = writeln!(
                    summary,
                    "level {level}: ndof {}, max von Mises {:.3} in element {} (material interface: {}), \
                     {} probe samples on FE/VE nodes with continuity error {:e}, kernels {} FE / {} VE ({} failures): {}",
                    p.ndof,
                    p.max_von_mises,
                    p.max_element,
                    p.peak_at_material_interface,
                    p.interface_samples,
                    p.continuity_error,
                    p.invariants.n_fe,
                    p.invariants.n_ve,
                    p.invariants.failures.len(),
                    if p.passed() { "PASS" } else { "FAIL" }
                );
            }
        }
        Metric::InterfacePeaks { .. } => {
            let rows = peak_study(case, here).map_err(bench_failure)?;
            write(&dir.join("peaks.csv"), &peaks_csv(case.name, &rows))?;
            let reports = run_reports(case)?;
            write(&dir.join("report.csv"), &report_csv(&reports))?;
            summary.push_str(&report_summary(&reports));
            for e in evaluate_expectations(case, &reports, &rows) {
                let _ = writeln!(summary, "{} ({}): {} [{}]", e.metric.name, e.metric.method.map_or("all", Method::label), e.detail, verdict(e.passed));
            }
        }
        _ => {
            let reports = run_reports(case)?;
            write(&dir.join("report.csv"), &report_csv(&reports))?;
            summary.push_str(&report_summary(&reports));
            for e in evaluate_expectations(case, &reports, &[]) {
                let _ = writeln!(summary, "{} ({}): {} [{}]", e.metric.name, e.metric.method.map_or("all", Method::label), e.detail, verdict(e.passed));
            }
        }
    }
    write(&dir.join("summary.txt"), &summary)?;
    Ok(summary)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_reports(case: &BenchmarkCase) -> Result<Vec<fevec_core::bench::ConvergenceReport>, Failure> {
    case.methods
        .iter()
        .map(|&m| run_convergence(case, m, Path::new(".")).map_err(bench_failure))
        .collect()
}

fn bench(name: &str, out: &Path, emit_configs: bool) -> Result<(), Failure> {
    let cases: Vec<BenchmarkCase> = if name == "all" {
        builtin_cases()
    } else {
        vec![find_case(name).ok_or_else(|| bench_failure(BenchError::UnknownCase(name.to_string())))?]
    };
    for case in &cases {
        if emit_configs {
            let dir = out.join("configs");
            create_dir(&dir)?;
            for &m in &case.methods {
                for &level in &case.levels {
                    let path = dir.join(format!("{}-{}-{level}.cfg", case.name, m.tag()));
                    let text = format!("# {}\n{}", case.description, render_config(&case.config(level, m)));
                    write(&path, &text)?;
                }
            }
            continue;
        }
        print!("{}", bench_case(case, out)?);
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    // Parse without the validity gate so every violation can be listed.
    let mesh = match fevec_core::mesh::parse_mesh(&text) {
        Ok(m) => m,
        Err(MeshError::Invalid(report)) => {
            println!("{report}");
            return Err(Failure::new(1, format!("{}: {} violations", path.display(), report.len())));
        }
        Err(e) => return Err(Failure::new(mesh_code(&e), e.to_string())),
    };
    let report = validate_mesh(&mesh);
    println!("{report}");
    if report.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(1, format!("{}: {} violations", path.display(), report.len())))
    }
}

fn mesh_gen(spec: &Path, out: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(spec).map_err(|e| Failure::io(spec, e))?;
    let mesh_spec = parse_mesh_spec(&text).map_err(config_failure)?;
    let base = spec.parent().unwrap_or(Path::new("."));
    let mesh = mesh_spec.build(base).map_err(|e| Failure::new(mesh_code(&e), e.to_string()))?;
    save_mesh(&mesh, out).map_err(|e| Failure::new(mesh_code(&e), e.to_string()))?;
    // Round trip so a written file is always loadable.
    load_mesh(out).map_err(|e| Failure::new(mesh_code(&e), e.to_string()))?;
    println!("{} nodes, {} elements -> {}", mesh.n_nodes(), mesh.n_elements(), out.display());
    Ok(())
}

fn init_threads() -> Result<(), Failure> {
    let n = match std::env::var("FEVEC_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::new(3, format!("FEVEC_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(3, format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Bench { case, out, emit_configs } => bench(&case, &out, emit_configs),
        Command::Validate { mesh } => validate(&mesh),
        Command::MeshGen { spec, out } => mesh_gen(&spec, &out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error:{}: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
