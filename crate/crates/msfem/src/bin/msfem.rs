//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on configuration or input errors, 3 when a
//! linear solve fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use msfem::bench::{parse_case, rows_from_csv, run_bench, run_solve, slice_fields, table_to_csv, BenchCase, Provenance, SolveCase};
use msfem::formulations::MethodId;
use msfem::mesh::{write_msh, write_vtk, BoundaryTag, PhysicalMap, PhysicalTarget, VtkData, VtkField, VtkLocation};
use msfem::microshape::{integral_table, LaminationSpec, TableReport};
use msfem::oracles::{cross_section_fem, low_frequency_loss_density, strip_reference, CrossSectionProblem, Lamination1d, MU0};
use msfem::{Complex64, Execution};

#[derive(Parser)]
#[command(name = "msfem", version, about = "Multiscale FEM eddy-current losses in laminated cores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the mesh of a case and write it as .msh or .vtk
    Mesh {
        case: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Micro-shape integral table of a lamination
    Table {
        #[arg(long, default_value_t = 0.5e-3)]
        d: f64,
        #[arg(long, default_value_t = 0.95)]
        kf: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Reference solutions
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Solve one case and report its losses
    Solve(SolveArgs),
    /// Compare methods and orders on one case
    Bench {
        case: PathBuf,
        /// directory for <name>.json and <name>.csv (stdout when absent)
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// worker threads for the benchmark matrix
        #[arg(short, long)]
        jobs: Option<usize>,
        /// single thread, sequential assembly
        #[arg(long)]
        deterministic: bool,
    },
}

#[derive(Args)]
struct Material1d {
    #[arg(long, default_value_t = 50.0)]
    f: f64,
    #[arg(long, default_value_t = 0.5e-3)]
    d: f64,
    #[arg(long, default_value_t = 2.08e6)]
    sigma: f64,
    #[arg(long, default_value_t = 1000.0)]
    mu_r: f64,
    /// peak surface field [A/m]
    #[arg(long, default_value_t = 1000.0)]
    h0: f64,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Closed-form field in one sheet
    Lamination(Material1d),
    /// 2D finite element solution of the strip cross-section
    Xsection {
        #[command(flatten)]
        m: Material1d,
        #[arg(long, default_value_t = 10e-3)]
        width: f64,
        #[arg(long, default_value_t = 400)]
        nx: usize,
        #[arg(long, default_value_t = 40)]
        nz: usize,
        /// also solve on the doubled grid and extrapolate
        #[arg(long)]
        extrapolate: bool,
    },
}

#[derive(Args)]
struct SolveArgs {
    case: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    method: Option<MethodId>,
    #[arg(long)]
    order: Option<usize>,
    /// number of sheets in the stack
    #[arg(long)]
    sheets: Option<usize>,
    /// write fields sampled on the plane z = Z [m] to this VTK file
    #[arg(long)]
    vtk: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    z_slice: f64,
    #[arg(long)]
    deterministic: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            use std::io::Write;
            // a closed pipe (e.g. `| head`) is not an error
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?, out)
}

fn cmd_mesh(case_path: &Path, out: Option<&Path>) -> Result<()> {
    let text = read(case_path)?;
    let case: SolveCase = parse_case(&text)?;
    let built = case.mesh.build(case.material, case.lamination, &base_dir(case_path))?;
    let mesh = &built.problem.mesh;
    if let Some(path) = out {
        let body = match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => {
                let mut map = PhysicalMap::new();
                for id in mesh.region_ids() {
                    map.insert(id as i64, PhysicalTarget::Region(id));
                }
                for (i, tag) in BoundaryTag::ALL.into_iter().enumerate() {
                    map.insert(100 + i as i64, PhysicalTarget::Boundary(tag));
                }
                write_msh(mesh, &map)?
            }
            Some("vtk") => {
                let region = mesh.triangles().iter().map(|t| t.region as f64).collect();
                write_vtk(mesh, "msfem mesh", &[VtkField::new("region", VtkLocation::Cell, VtkData::Scalar(region))])?
            }
            _ => anyhow::bail!(msfem::Error::InvalidArgument("mesh output must end in .msh or .vtk".into())),
        };
        emit(&body, Some(path))?;
    }
    #[derive(Serialize)]
    struct Summary {
        provenance: Provenance,
        vertices: usize,
        edges: usize,
        triangles: usize,
        regions: Vec<u32>,
    }
    let summary = Summary {
        provenance: Provenance::new(&text, mesh, true),
        vertices: mesh.n_vertices(),
        edges: mesh.n_edges(),
        triangles: mesh.n_triangles(),
        regions: mesh.region_ids(),
    };
    emit_json(&summary, None)
}

fn cmd_oracle(which: OracleCommand) -> Result<()> {
    #[derive(Serialize)]
    struct LaminationOut {
        delta: f64,
        d_over_delta: f64,
        loss_per_area: f64,
        mean_flux_density: f64,
        low_frequency_density: f64,
    }
    #[derive(Serialize)]
    struct XsectionOut {
        nx: usize,
        nz: usize,
        #[serde(rename = "P")]
        p: f64,
        #[serde(rename = "P_EE")]
        p_ee: f64,
        #[serde(rename = "P_ref", skip_serializing_if = "Option::is_none")]
        p_ref: Option<f64>,
        #[serde(rename = "P_EE_ref", skip_serializing_if = "Option::is_none")]
        p_ee_ref: Option<f64>,
        relative_residual: f64,
    }
    match which {
        OracleCommand::Lamination(m) => {
            let lam = Lamination1d::new(Complex64::new(m.h0, 0.0), m.d, m.sigma, m.mu_r * MU0, m.f)?;
            let b = lam.mean_flux_density();
            emit_json(
                &LaminationOut {
                    delta: lam.delta,
                    d_over_delta: m.d / lam.delta,
                    loss_per_area: lam.loss_per_area(),
                    mean_flux_density: b,
                    low_frequency_density: low_frequency_loss_density(m.sigma, m.f, b, m.d),
                },
                None,
            )
        }
        OracleCommand::Xsection { m, width, nx, nz, extrapolate } => {
            let h0 = Complex64::new(m.h0, 0.0);
            let prob = CrossSectionProblem { width, thickness: m.d, sigma: m.sigma, mu: m.mu_r * MU0, f: m.f, h0 };
            let sol = cross_section_fem(&prob, nx, nz)?;
            let (p_ref, p_ee_ref) = if extrapolate {
                let lam = LaminationSpec::new(m.d, 1.0)?;
                let r = strip_reference(width, &lam, m.sigma, m.mu_r * MU0, m.f, h0, [nx, nz])?;
                (Some(r.p_ref), Some(r.p_ee_ref))
            } else {
                (None, None)
            };
            emit_json(&XsectionOut { nx, nz, p: sol.p, p_ee: sol.p_ee, p_ref, p_ee_ref, relative_residual: sol.relative_residual }, None)
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let text = read(&args.case)?;
    let mut case: SolveCase = parse_case(&text)?;
    if let Some(m) = args.method {
        case.solve.method = m;
    }
    if let Some(k) = args.order {
        case.solve.edge_order = k;
    }
    if args.sheets.is_some() {
        case.sheets = args.sheets;
    }
    let exec = if args.deterministic { Execution::Sequential } else { Execution::default() };
    let (output, problem, sol) = run_solve(&case, &text, &base_dir(&args.case), exec)?;
    if let Some(path) = &args.vtk {
        let fields = slice_fields(&problem, &sol, args.z_slice)?;
        let title = format!("{} k={} z={}", case.solve.method, case.solve.edge_order, args.z_slice);
        emit(&write_vtk(&problem.mesh, &title, &fields)?, Some(path))?;
    }
    emit_json(&output, args.out.as_deref())
}

fn cmd_bench(case_path: &Path, out_dir: Option<&Path>, jobs: Option<usize>, deterministic: bool) -> Result<()> {
    let text = read(case_path)?;
    let case: BenchCase = parse_case(&text)?;
    let table = run_bench(&case, &text, &base_dir(case_path), jobs, deterministic)?;
    let csv = table_to_csv(&table)?;
    // both encodings must carry the same numbers
    anyhow::ensure!(rows_from_csv(&csv)? == table.rows, "CSV does not reproduce the JSON rows");
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            emit_json(&table, Some(&dir.join(format!("{}.json", case.name))))?;
            emit(&csv, Some(&dir.join(format!("{}.csv", case.name))))?;
            eprintln!("wrote {} rows to {}", table.rows.len(), dir.display());
            Ok(())
        }
        None => emit_json(&table, None),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<msfem::Error>() {
        Some(msfem::Error::Solver(_)) | Some(msfem::Error::SolverInBlock { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh { case, out } => cmd_mesh(&case, out.as_deref()),
        Command::Table { d, kf, out } => LaminationSpec::new(d, kf)
            .map_err(anyhow::Error::from)
            .and_then(|spec| emit_json(&TableReport::new(&integral_table(&spec)), out.as_deref())),
        Command::Oracle { which } => cmd_oracle(which),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench { case, out_dir, jobs, deterministic } => cmd_bench(&case, out_dir.as_deref(), jobs, deterministic),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
