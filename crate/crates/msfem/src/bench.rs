//! Run descriptions for the command-line tool: TOML case files, problem
//! construction, the method-comparison table and provenance hashes.
//!
//! A case names a mesh source (built-in strip, built-in machine segment, or
//! a Gmsh file), the material, the lamination and one or more
//! discretizations. Every emitted document carries a [`Provenance`] block
//! with SHA-256 hashes of the case text and of the canonical mesh bytes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::excitation::ConductorSpec;
use crate::formulations::{
    local_loss, losses, reconstruct, segment_problem, solve, strip_problem, DiscretizationConfig, ExcitationMode, LossReport,
    MethodId, Problem, SolutionField, StripSpec,
};
use crate::linsolve::SolveMethod;
use crate::mesh::{read_msh, BoundaryTag, Mesh2D, PhysicalMap, PhysicalTarget, RegionId, RegionSpec, SegmentGeometry, VtkData, VtkField, VtkLocation};
use crate::microshape::LaminationSpec;
use crate::oracles::{strip_reference, MU0};
use crate::par::{map_slice, with_workers, Execution};

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn bench_lamination() -> LaminationSpec {
    LaminationSpec { d: 0.5e-3, k_f: 0.95 }
}

/// Conductivity and permeability of the laminated iron.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Material {
    pub sigma: f64,
    pub mu_r: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material { sigma: 2.08e6, mu_r: 1000.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Strip,
    Segment,
    File,
}

/// One Gmsh physical group: either a region or a boundary class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalEntry {
    pub id: i64,
    #[serde(default)]
    pub region: Option<RegionId>,
    #[serde(default)]
    pub boundary: Option<BoundaryTag>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMesh {
    /// path of the `.msh` file, relative to the case file
    pub path: PathBuf,
    pub physical: Vec<PhysicalEntry>,
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub conductors: Vec<ConductorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub kind: MeshKind,
    /// subdivision multiplier for the built-in meshes
    pub refine: usize,
    pub strip: StripSpec,
    pub segment: SegmentGeometry,
    pub file: Option<FileMesh>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { kind: MeshKind::Strip, refine: 1, strip: StripSpec::default(), segment: SegmentGeometry::default(), file: None }
    }
}

/// A problem together with the mesh-level facts the tools report.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub problem: Problem,
    /// strip width and height when the mesh is the strip benchmark
    pub strip: Option<StripSpec>,
}

impl MeshConfig {
    fn validate(&self) -> Result<()> {
        if self.refine == 0 {
            return Err(config_error("mesh.refine must be at least 1"));
        }
        if self.kind == MeshKind::File && self.file.is_none() {
            return Err(config_error("mesh.kind = \"file\" needs a [mesh.file] table"));
        }
        Ok(())
    }

    /// Build the problem; relative file paths resolve against `base`.
    pub fn build(&self, material: Material, lamination: LaminationSpec, base: &Path) -> Result<BuiltProblem> {
        self.validate()?;
        match self.kind {
            MeshKind::Strip => {
                let spec = StripSpec {
                    lamination,
                    sigma: material.sigma,
                    mu_r: material.mu_r,
                    nx: self.strip.nx * self.refine,
                    ny: self.strip.ny * self.refine,
                    ..self.strip.clone()
                };
                Ok(BuiltProblem { problem: strip_problem(&spec)?, strip: Some(spec) })
            }
            MeshKind::Segment => {
                let seg = segment_problem(&self.segment.refined(self.refine), lamination, material.sigma, material.mu_r)?;
                Ok(BuiltProblem { problem: seg.problem, strip: None })
            }
            MeshKind::File => {
                let file = self.file.as_ref().expect("validated");
                let path = base.join(&file.path);
                let text = std::fs::read_to_string(&path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                let mut map = PhysicalMap::new();
                for entry in &file.physical {
                    let target = match (entry.region, entry.boundary) {
                        (Some(r), None) => PhysicalTarget::Region(r),
                        (None, Some(b)) => PhysicalTarget::Boundary(b),
                        _ => return Err(config_error(format!("physical group {} needs exactly one of region / boundary", entry.id))),
                    };
                    map.insert(entry.id, target);
                }
                let mesh = read_msh(&text, &map)?;
                let problem = Problem::new(mesh, file.regions.clone(), lamination, file.conductors.clone())?;
                Ok(BuiltProblem { problem, strip: None })
            }
        }
    }
}

/// `msfem solve` input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveCase {
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: Material,
    #[serde(default = "bench_lamination")]
    pub lamination: LaminationSpec,
    #[serde(default)]
    pub solve: DiscretizationConfig,
    /// number of sheets in the stack; scales the per-period loss
    #[serde(default)]
    pub sheets: Option<usize>,
}

/// Reference used for the relative errors of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// cross-section grid of the strip oracle (refined once more internally)
    pub nx: usize,
    pub nz: usize,
    /// explicit reference loss per period [W], overrides everything else
    pub value: Option<f64>,
    /// for meshes without an analytic oracle: the run that serves as reference
    pub reference_method: MethodId,
    pub reference_order: usize,
    pub reference_refine: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings { nx: 400, nz: 40, value: None, reference_method: MethodId::Tms1, reference_order: 2, reference_refine: 2 }
    }
}

/// `msfem bench` input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub name: String,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: Material,
    #[serde(default = "bench_lamination")]
    pub lamination: LaminationSpec,
    pub methods: Vec<MethodId>,
    pub orders: Vec<usize>,
    /// shared settings; `method` and `edge_order` are overwritten per run
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub oracle: OracleSettings,
    /// also run the segment without its symmetry plane
    #[serde(default)]
    pub half_vs_entire: bool,
}

impl BenchCase {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.orders.is_empty() {
            return Err(config_error("a bench case needs at least one method and one order"));
        }
        if let Some(&k) = self.orders.iter().find(|&&k| k > 2) {
            return Err(config_error(format!("edge order must be 0, 1 or 2, got {k}")));
        }
        if self.half_vs_entire && self.mesh.kind != MeshKind::Segment {
            return Err(config_error("half_vs_entire applies to the segment mesh only"));
        }
        Ok(())
    }
}

/// Parse a TOML document into a case type.
pub fn parse_case<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| config_error(format!("case file: {e}")))
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reproducibility header of every document the tool writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub mesh_sha256: String,
    pub deterministic: bool,
}

impl Provenance {
    pub fn new(config_text: &str, mesh: &Mesh2D, deterministic: bool) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            mesh_sha256: sha256_hex(&mesh.canonical_bytes()),
            deterministic,
        }
    }

    /// The header as `# key=value` comment lines.
    pub fn comment_lines(&self) -> String {
        format!(
            "# tool={} {}\n# config_sha256={}\n# mesh_sha256={}\n# deterministic={}\n",
            self.tool, self.version, self.config_sha256, self.mesh_sha256, self.deterministic
        )
    }
}

/// Excitation of one run: conductor-driven cases pick the mode each family admits.
fn excitation_for(problem: &Problem, base: &DiscretizationConfig, method: MethodId) -> ExcitationMode {
    if base.excitation != ExcitationMode::BoundaryOnly && !problem.conductors.is_empty() {
        ExcitationMode::conductors_for(method)
    } else {
        base.excitation
    }
}

/// Output of `msfem solve`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOutput {
    pub provenance: Provenance,
    pub report: LossReport,
    pub sheets: Option<usize>,
    /// loss of the whole stack, `sheets` periods [W]
    #[serde(rename = "P_stack")]
    pub p_stack: Option<f64>,
}

/// Solve one case; returns the problem and field for optional VTK output.
pub fn run_solve(case: &SolveCase, config_text: &str, base: &Path, exec: Execution) -> Result<(SolveOutput, Problem, SolutionField)> {
    let built = case.mesh.build(case.material, case.lamination, base)?;
    let problem = built.problem;
    let config = DiscretizationConfig { excitation: excitation_for(&problem, &case.solve, case.solve.method), ..case.solve.clone() };
    let sol = solve(&problem, &config, exec, SolveMethod::default())?;
    let report = losses(&problem, &sol, exec)?;
    let provenance = Provenance::new(config_text, &problem.mesh, exec == Execution::Sequential);
    let p_stack = case.sheets.map(|n| n as f64 * report.p);
    Ok((SolveOutput { provenance, report, sheets: case.sheets, p_stack }, problem, sol))
}

/// Fields sampled on the plane `z`: `H`, `B`, `J` at the vertices, region
/// id and local loss density at the cells.
pub fn slice_fields(problem: &Problem, sol: &SolutionField, z: f64) -> Result<Vec<VtkField>> {
    let mesh = &problem.mesh;
    let mut h = Vec::with_capacity(mesh.n_vertices());
    let mut b = Vec::with_capacity(mesh.n_vertices());
    let mut j = Vec::with_capacity(mesh.n_vertices());
    for p in mesh.vertices() {
        let s = reconstruct(problem, sol, p[0], p[1], z)?;
        h.push(s.h);
        b.push(s.b);
        j.push(s.j);
    }
    let mut region = Vec::with_capacity(mesh.n_triangles());
    let mut density = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let c = mesh.triangle_coords(t);
        let (x, y) = ((c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0);
        region.push(mesh.triangles()[t].region as f64);
        density.push(local_loss(problem, sol, x, y).map(|l| l.p).unwrap_or(0.0));
    }
    Ok(vec![
        VtkField::new("H", VtkLocation::Point, VtkData::ComplexVector(h)),
        VtkField::new("B", VtkLocation::Point, VtkData::ComplexVector(b)),
        VtkField::new("J", VtkLocation::Point, VtkData::ComplexVector(j)),
        VtkField::new("region", VtkLocation::Cell, VtkData::Scalar(region)),
        VtkField::new("loss_per_area", VtkLocation::Cell, VtkData::Scalar(density)),
    ])
}

/// Where the reference of a comparison table came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub source: String,
    #[serde(rename = "P_ref")]
    pub p_ref: f64,
    #[serde(rename = "P_EE_ref")]
    pub p_ee_ref: Option<f64>,
}

/// One line of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub variant: String,
    pub method: MethodId,
    pub order: usize,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "P_EE")]
    pub p_ee: f64,
    #[serde(rename = "RE_P")]
    pub re_p: f64,
    #[serde(rename = "RE_P_EE")]
    pub re_p_ee: Option<f64>,
    pub dofs: usize,
    pub free_dofs: usize,
    pub nnz: usize,
    pub t_assemble: f64,
    pub t_solve: f64,
    pub t_total: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchTable {
    pub provenance: Provenance,
    pub case: String,
    pub oracle: OracleSummary,
    pub rows: Vec<BenchRow>,
}

fn reference(case: &BenchCase, built: &BuiltProblem, base: &Path, exec: Execution) -> Result<OracleSummary> {
    let o = &case.oracle;
    if let Some(v) = o.value {
        return Ok(OracleSummary { source: "value from case file".into(), p_ref: v, p_ee_ref: None });
    }
    if let Some(spec) = &built.strip {
        if case.discretization.excitation != ExcitationMode::BoundaryOnly {
            return Err(config_error("the strip oracle needs excitation = \"boundary_only\""));
        }
        let h0 = case.discretization.applied_field[1];
        let mu = spec.mu_r * MU0;
        let r = strip_reference(spec.width, &spec.lamination, spec.sigma, mu, case.discretization.frequency, h0, [o.nx, o.nz])?;
        let h = spec.height();
        return Ok(OracleSummary {
            source: format!("cross-section oracle {}x{} / {}x{}, extrapolated", o.nx, o.nz, 2 * o.nx, 2 * o.nz),
            p_ref: r.p_ref * h,
            p_ee_ref: Some(r.p_ee_ref * h),
        });
    }
    if case.mesh.kind != MeshKind::Segment {
        return Err(config_error("no oracle for file meshes: set oracle.value"));
    }
    let mesh = MeshConfig { refine: case.mesh.refine * o.reference_refine.max(1), ..case.mesh.clone() };
    let fine = mesh.build(case.material, case.lamination, base)?;
    let config = DiscretizationConfig {
        method: o.reference_method,
        edge_order: o.reference_order,
        excitation: excitation_for(&fine.problem, &case.discretization, o.reference_method),
        ..case.discretization.clone()
    };
    let sol = solve(&fine.problem, &config, exec, SolveMethod::default())?;
    let rep = losses(&fine.problem, &sol, exec)?;
    Ok(OracleSummary {
        source: format!("{} k={} on the segment refined {}x", o.reference_method, o.reference_order, mesh.refine),
        p_ref: rep.p,
        p_ee_ref: Some(rep.p_ee),
    })
}

/// Run every (method, order) of the case on a pool of `workers` threads;
/// rows come back in declared order (half-segment rows first).
pub fn run_bench(case: &BenchCase, config_text: &str, base: &Path, workers: Option<usize>, deterministic: bool) -> Result<BenchTable> {
    case.validate()?;
    let built = case.mesh.build(case.material, case.lamination, base)?;
    let exec = if deterministic { Execution::Sequential } else { Execution::default() };
    let oracle = reference(case, &built, base, exec)?;

    // (name, problem, multiple of the reference loss the variant should reproduce)
    let mut variants = vec![("half".to_string(), built.problem.clone(), 1.0)];
    if case.half_vs_entire {
        // the entire segment is the half plus its mirror image
        let mesh = MeshConfig { segment: SegmentGeometry { full: true, ..case.mesh.segment.clone() }, ..case.mesh.clone() };
        variants.push(("entire".to_string(), mesh.build(case.material, case.lamination, base)?.problem, 2.0));
    } else if built.strip.is_some() {
        variants[0].0 = "strip".to_string();
    }
    let mut jobs = Vec::new();
    for (vi, _) in variants.iter().enumerate() {
        for &m in &case.methods {
            for &k in &case.orders {
                jobs.push((vi, m, k));
            }
        }
    }
    let pool = if deterministic { Some(1) } else { workers };
    let results: Vec<Result<BenchRow>> = with_workers(pool, || {
        map_slice(exec, &jobs, |&(vi, m, k)| {
            let (name, problem, scale) = &variants[vi];
            let (p_ref, p_ee_ref) = (scale * oracle.p_ref, oracle.p_ee_ref.map(|r| scale * r));
            let config = DiscretizationConfig {
                method: m,
                edge_order: k,
                excitation: excitation_for(problem, &case.discretization, m),
                ..case.discretization.clone()
            };
            let start = Instant::now();
            let sol = solve(problem, &config, Execution::Sequential, SolveMethod::default())?;
            let rep = losses(problem, &sol, Execution::Sequential)?;
            Ok(BenchRow {
                variant: name.clone(),
                method: m,
                order: k,
                p: rep.p,
                p_ee: rep.p_ee,
                re_p: (rep.p - p_ref).abs() / p_ref.abs(),
                re_p_ee: p_ee_ref.map(|r| (rep.p_ee - r).abs() / r.abs()),
                dofs: rep.dofs,
                free_dofs: rep.free_dofs,
                nnz: rep.nnz,
                t_assemble: rep.t_assemble,
                t_solve: rep.t_solve,
                t_total: start.elapsed().as_secs_f64(),
            })
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(BenchTable { provenance: Provenance::new(config_text, &built.problem.mesh, deterministic), case: case.name.clone(), oracle, rows })
}

/// The table as CSV, preceded by the provenance header as `#` comments.
pub fn table_to_csv(table: &BenchTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(row).map_err(|e| config_error(format!("csv: {e}")))?;
    }
    let body = w.into_inner().map_err(|e| config_error(format!("csv: {e}")))?;
    Ok(table.provenance.comment_lines() + &String::from_utf8(body).expect("csv is utf-8"))
}

/// Read back the rows written by [`table_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(|e| config_error(format!("csv: {e}")))).collect()
}
