//! The four 2D/1D multiscale formulations.
//!
//! Every formulation expands its fields into 2D coefficient functions times
//! fixed z-profiles (see [`crate::microshape`]). Substituting the expansion
//! into the weak form, integrating the profiles over one lamination period
//! (σ and ρ only in iron, μ separately in iron and insulation) and dividing by
//! the period length gives block forms per unit stack length. Non-laminated
//! regions use a profile that is constant (field family) or linear across
//! the whole period (potential family).
//!
//! Field family (`H = T0 + φ2 T2`, `T0 = ∇Φ0` for TMS2):
//!
//! ```text
//! curl H = (−φ2′ T2y, φ2′ T2x, curl T0 + φ2 curl T2)
//! ∫ ρ curl H · curl H′ + jωμ H · H′ = −jω ∫ μ H_BS · H′
//! ```
//!
//! Potential family (`A = φ1⁰∇u10 + φ1 A1 + ∇(φ1 w1)`, `A1 = ∇u1` for AMS2):
//!
//! ```text
//! curl A = (φ1⁰′ ẑ×∇u10 + φ1′ ẑ×A1, φ1 curl A1)
//! ∫ ν curl A · curl A′ + jωσ A · A′ = ∫ H_ext · curl A′
//! ```
//!
//! where `H_ext` is the Biot–Savart field (conductor excitation, equal to
//! `∫ J0 · A′` after integration by parts) or the uniform applied field.

mod config;
mod post;
mod problems;

pub use config::{BoundaryPolicy, DiscretizationConfig, ExcitationMode, MethodId};
pub use post::{local_loss, losses, reconstruct, FieldSample, LocalLoss, LossReport};
pub use problems::{segment_problem, strip_problem, strip_x_nodes, Grading, SegmentProblem, StripSpec};

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::excitation::{biot_savart_h, validate_conductors, ConductorSpec};
use crate::fem::{
    assemble, constrain_edges, support_boundary_edges, tagged_edges, BilinearTerm, BlockSystem, EdgeSpace, FeSpace,
    Integrand, LinearTerm, RegionFilter, ScalarSpace, Source, Support, TraceData,
};
use crate::linsolve::{solve_linear, SolveMethod, SolveStats, SolverError};
use crate::mesh::{BoundaryTag, Mesh2D, RegionId, RegionKind, RegionSpec};
use crate::microshape::{integral_table, LaminationSpec, MicroShapeTable, Part, Profile};
use crate::oracles::MU0;
use crate::par::Execution;

/// Mesh, materials, lamination and conductors of one boundary-value problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub mesh: Mesh2D,
    pub regions: Vec<RegionSpec>,
    pub lamination: LaminationSpec,
    /// conductors generating the Biot–Savart field (may include images
    /// outside the mesh)
    pub conductors: Vec<ConductorSpec>,
}

impl Problem {
    pub fn new(mesh: Mesh2D, regions: Vec<RegionSpec>, lamination: LaminationSpec, conductors: Vec<ConductorSpec>) -> Result<Self> {
        lamination.validate()?;
        validate_conductors(&conductors)?;
        for r in &regions {
            r.validate()?;
            if r.kind != RegionKind::Laminated && r.sigma != 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "region {} is not laminated but has sigma = {}; eddy currents outside the laminated core are not modelled",
                    r.id, r.sigma
                )));
            }
            if r.kind == RegionKind::Laminated && !(r.sigma > 0.0) {
                return Err(Error::InvalidProblem(format!("laminated region {} needs sigma > 0", r.id)));
            }
        }
        for id in mesh.region_ids() {
            if !regions.iter().any(|r| r.id == id) {
                return Err(Error::InvalidProblem(format!("mesh region {id} has no material entry")));
            }
        }
        let problem = Problem { mesh, regions, lamination, conductors };
        if problem.laminated_ids().is_empty() {
            return Err(Error::InvalidProblem("the mesh contains no laminated region".into()));
        }
        Ok(problem)
    }

    pub fn region(&self, id: RegionId) -> &RegionSpec {
        self.regions.iter().find(|r| r.id == id).expect("region validated at construction")
    }

    /// Ids of laminated regions present in the mesh.
    pub fn laminated_ids(&self) -> Vec<RegionId> {
        let present = self.mesh.region_ids();
        self.regions
            .iter()
            .filter(|r| r.kind == RegionKind::Laminated && present.contains(&r.id))
            .map(|r| r.id)
            .collect()
    }

    /// Ids of non-laminated regions present in the mesh.
    pub fn other_ids(&self) -> Vec<RegionId> {
        let present = self.mesh.region_ids();
        self.regions
            .iter()
            .filter(|r| r.kind != RegionKind::Laminated && present.contains(&r.id))
            .map(|r| r.id)
            .collect()
    }

    /// Resistivity of the (first) laminated material; reference for penalties.
    pub fn reference_resistivity(&self) -> f64 {
        1.0 / self.region(self.laminated_ids()[0]).sigma
    }
}

/// Named block, in assembly order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Block {
    T0,
    Phi0,
    T2,
    U10,
    A1,
    U1,
    W1,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::T0 => "T0",
            Block::Phi0 => "Phi0",
            Block::T2 => "T2",
            Block::U10 => "u10",
            Block::A1 => "A1",
            Block::U1 => "u1",
            Block::W1 => "w1",
        }
    }
}

/// The blocks and finite-element spaces of one formulation.
#[derive(Clone, Debug)]
pub struct SpaceSet {
    pub blocks: Vec<Block>,
    pub spaces: Vec<FeSpace>,
}

impl SpaceSet {
    pub fn index(&self, b: Block) -> Option<usize> {
        self.blocks.iter().position(|&x| x == b)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.blocks.iter().map(|b| b.name()).collect()
    }

    pub fn n_dofs(&self) -> usize {
        self.spaces.iter().map(|s| s.n_dofs()).sum()
    }

    pub fn scalar(&self, b: Block) -> Option<&ScalarSpace> {
        match self.index(b).map(|i| &self.spaces[i]) {
            Some(FeSpace::Scalar(s)) => Some(s),
            _ => None,
        }
    }

    pub fn edge(&self, b: Block) -> Option<&EdgeSpace> {
        match self.index(b).map(|i| &self.spaces[i]) {
            Some(FeSpace::Edge(s)) => Some(s),
            _ => None,
        }
    }
}

/// Select the finite-element spaces of `config.method`.
pub fn build_spaces(problem: &Problem, config: &DiscretizationConfig) -> Result<SpaceSet> {
    config.validate()?;
    let mesh = &problem.mesh;
    let k = config.edge_order;
    let m = config.nodal_order();
    let lam = Support::Regions(problem.laminated_ids());
    if problem.laminated_ids().is_empty() {
        return Err(Error::InvalidProblem("no laminated region".into()));
    }
    let edge = |s: Support| -> Result<FeSpace> { Ok(FeSpace::Edge(EdgeSpace::new(mesh, k, s)?)) };
    let nodal = |order: usize, s: Support| -> Result<FeSpace> { Ok(FeSpace::Scalar(ScalarSpace::new(mesh, order, s)?)) };
    let ee = !config.ablate_edge_effect;
    let w1_order = config.w1_order.unwrap_or(m);
    let mut blocks = Vec::new();
    let mut spaces = Vec::new();
    let mut push = |b: Block, s: FeSpace| {
        blocks.push(b);
        spaces.push(s);
    };
    match config.method {
        MethodId::Tms1 => {
            push(Block::T0, edge(Support::All)?);
            if ee {
                push(Block::T2, edge(lam)?);
            }
        }
        MethodId::Tms2 => {
            push(Block::Phi0, nodal(m, Support::All)?);
            if ee {
                push(Block::T2, edge(lam)?);
            }
        }
        MethodId::Ams1 => {
            push(Block::U10, nodal(m, Support::All)?);
            push(Block::A1, edge(lam.clone())?);
            if ee {
                push(Block::W1, nodal(w1_order, lam)?);
            }
        }
        MethodId::Ams2 => {
            push(Block::U10, nodal(m, Support::All)?);
            push(Block::U1, nodal(m, lam.clone())?);
            if ee {
                push(Block::W1, nodal(w1_order, lam)?);
            }
        }
    }
    Ok(SpaceSet { blocks, spaces })
}

/// Assembled (not yet constrained) system of one formulation.
#[derive(Clone, Debug)]
pub struct MsfemSystem {
    pub config: DiscretizationConfig,
    pub spaces: SpaceSet,
    pub table: MicroShapeTable,
    pub system: BlockSystem,
    pub t_assemble: f64,
}

struct TermList {
    terms: Vec<BilinearTerm>,
}

impl TermList {
    fn add(&mut self, row: Option<usize>, col: Option<usize>, integrand: Integrand, region: RegionId, coeff: Complex64) {
        if let (Some(r), Some(c)) = (row, col) {
            if coeff != Complex64::new(0.0, 0.0) {
                self.terms.push(BilinearTerm::new(r, c, integrand, RegionFilter::Only(vec![region]), coeff));
            }
        }
    }
}

#[derive(Clone, Copy)]
enum SourceKind {
    Vector,
    VectorGrad,
    VectorRotGrad,
    VectorRot,
}

struct SourceList {
    items: Vec<(usize, SourceKind, RegionId, Complex64)>,
}

impl SourceList {
    fn add(&mut self, row: Option<usize>, kind: SourceKind, region: RegionId, coeff: Complex64) {
        if let Some(r) = row {
            if coeff != Complex64::new(0.0, 0.0) {
                self.items.push((r, kind, region, coeff));
            }
        }
    }
}

/// The external field entering the right-hand side, if any.
fn external_field(problem: &Problem, config: &DiscretizationConfig) -> Option<Box<dyn Fn([f64; 2]) -> [Complex64; 2] + Sync>> {
    match config.excitation {
        ExcitationMode::BiotSavart | ExcitationMode::ImpressedJ0 => {
            if problem.conductors.is_empty() {
                return None;
            }
            let conductors = problem.conductors.clone();
            Some(Box::new(move |p| biot_savart_h(&conductors, p)))
        }
        ExcitationMode::BoundaryOnly => {
            // the field family carries an applied field through its boundary data
            if config.method.is_t_family() || config.applied_field.iter().all(|c| c.norm() == 0.0) {
                return None;
            }
            let h = config.applied_field;
            Some(Box::new(move |_| h))
        }
    }
}

/// Assemble the period-averaged block system of `config.method`.
pub fn assemble_msfem(problem: &Problem, config: &DiscretizationConfig, exec: Execution) -> Result<MsfemSystem> {
    let start = Instant::now();
    let spaces = build_spaces(problem, config)?;
    let table = integral_table(&problem.lamination);
    let p = table.period();
    let j = Complex64::new(0.0, 1.0);
    let w = config.omega();
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut bil = TermList { terms: Vec::new() };
    let mut src = SourceList { items: Vec::new() };
    let ix = |b: Block| spaces.index(b);
    let (iron, ins) = (Part::Iron, Part::Insulation);
    use Integrand::*;
    use Profile::*;

    for id in problem.laminated_ids() {
        let r = problem.region(id);
        let (sigma, mu) = (r.sigma, MU0 * r.mu_r);
        let (rho, nu, nu0) = (1.0 / sigma, 1.0 / mu, 1.0 / MU0);
        if config.method.is_t_family() {
            let t0 = ix(Block::T0).or(ix(Block::Phi0));
            let t2 = ix(Block::T2);
            let mu_avg = (mu * table.int(One, iron) + MU0 * table.int(One, ins)) / p;
            let i_phi2 = table.int(Phi2, iron);
            let gram = if config.method == MethodId::Tms1 { VecMass } else { Stiffness };
            let mixed = if config.method == MethodId::Tms1 { VecMass } else { GradVec };
            if config.method == MethodId::Tms1 {
                let rho_ins = config.penalty * rho;
                bil.add(t0, t0, CurlCurl, id, c((rho * table.int(One, iron) + rho_ins * table.int(One, ins)) / p));
                bil.add(t2, t0, CurlCurl, id, c(rho * i_phi2 / p));
            }
            bil.add(t0, t0, gram, id, j * w * mu_avg);
            bil.add(t2, t0, mixed, id, j * w * mu * i_phi2 / p);
            bil.add(t2, t2, CurlCurl, id, c(rho * table.prod(Phi2, Phi2, iron) / p));
            bil.add(t2, t2, VecMass, id, (c(rho * table.dprod(Phi2, Phi2, iron)) + j * w * mu * table.prod(Phi2, Phi2, iron)) / p);
            let t0_kind = if config.method == MethodId::Tms1 { SourceKind::Vector } else { SourceKind::VectorGrad };
            src.add(t0, t0_kind, id, -j * w * mu_avg);
            src.add(t2, SourceKind::Vector, id, -j * w * mu * i_phi2 / p);
        } else {
            let u = ix(Block::U10);
            let a1 = ix(Block::A1);
            let u1 = ix(Block::U1);
            let w1 = ix(Block::W1);
            let dd = |a: Profile, b: Profile| c((nu * table.dprod(a, b, iron) + nu0 * table.dprod(a, b, ins)) / p);
            let ss = |a: Profile, b: Profile| j * w * sigma * table.prod(a, b, iron) / p;
            let cc = |a: Profile, b: Profile| c((nu * table.prod(a, b, iron) + nu0 * table.prod(a, b, ins)) / p);
            bil.add(u, u, Stiffness, id, dd(Phi1_0, Phi1_0) + ss(Phi1_0, Phi1_0));
            // A1 (AMS1) or ∇u1 (AMS2) with the φ1 profile
            bil.add(a1, u, GradVec, id, dd(Phi1_0, Phi1) + ss(Phi1_0, Phi1));
            bil.add(a1, a1, VecMass, id, dd(Phi1, Phi1) + ss(Phi1, Phi1));
            bil.add(a1, a1, CurlCurl, id, cc(Phi1, Phi1));
            bil.add(u1, u, Stiffness, id, dd(Phi1_0, Phi1) + ss(Phi1_0, Phi1));
            bil.add(u1, u1, Stiffness, id, dd(Phi1, Phi1) + ss(Phi1, Phi1));
            // w1 enters only through the eddy-current term
            bil.add(w1, u, Stiffness, id, ss(Phi1, Phi1_0));
            bil.add(w1, a1, GradVec, id, ss(Phi1, Phi1));
            bil.add(w1, u1, Stiffness, id, ss(Phi1, Phi1));
            bil.add(w1, w1, Stiffness, id, ss(Phi1, Phi1));
            bil.add(w1, w1, Mass, id, j * w * sigma * table.dprod(Phi1, Phi1, iron) / p);
            let flux = |a: Profile| c((table.dint(a, iron) + table.dint(a, ins)) / p);
            src.add(u, SourceKind::VectorRotGrad, id, flux(Phi1_0));
            src.add(a1, SourceKind::VectorRot, id, flux(Phi1));
            src.add(u1, SourceKind::VectorRotGrad, id, flux(Phi1));
        }
    }
    for id in problem.other_ids() {
        let mu_a = MU0 * problem.region(id).mu_r;
        match config.method {
            MethodId::Tms1 => {
                let t0 = ix(Block::T0);
                bil.add(t0, t0, CurlCurl, id, c(config.penalty * problem.reference_resistivity()));
                bil.add(t0, t0, VecMass, id, j * w * mu_a);
                src.add(t0, SourceKind::Vector, id, -j * w * mu_a);
            }
            MethodId::Tms2 => {
                let phi = ix(Block::Phi0);
                bil.add(phi, phi, Stiffness, id, j * w * mu_a);
                src.add(phi, SourceKind::VectorGrad, id, -j * w * mu_a);
            }
            MethodId::Ams1 | MethodId::Ams2 => {
                // uniform profile φ = 2z/p across the whole period
                let u = ix(Block::U10);
                bil.add(u, u, Stiffness, id, c(4.0 / (mu_a * p * p)));
                src.add(u, SourceKind::VectorRotGrad, id, c(2.0 / p));
            }
        }
    }

    let field = external_field(problem, config);
    let mut linear = Vec::new();
    if let Some(f) = field.as_deref() {
        for &(row, kind, region, coeff) in &src.items {
            let source = match kind {
                SourceKind::Vector => Source::Vector(f),
                SourceKind::VectorGrad => Source::VectorGrad(f),
                SourceKind::VectorRotGrad => Source::VectorRotGrad(f),
                SourceKind::VectorRot => Source::VectorRot(f),
            };
            linear.push(LinearTerm { row, source, regions: RegionFilter::Only(vec![region]), coeff });
        }
    }
    let system = assemble(&problem.mesh, &spaces.spaces, &spaces.names(), &bil.terms, &linear, config.quad_degree, exec)?;
    Ok(MsfemSystem { config: config.clone(), spaces, table, system, t_assemble: start.elapsed().as_secs_f64() })
}

/// Number of constrained DOFs per block after [`bc_apply`].
pub type BcSummary = BTreeMap<&'static str, usize>;

/// Impose the essential boundary conditions of `config.method`.
///
/// Blocks supported on the laminated region are constrained only on the
/// part of the tagged boundary that bounds that region. The field family
/// additionally fixes `T2 × n = 0` on the whole boundary of the laminated
/// region except symmetry edges tagged `gamma_e`.
pub fn bc_apply(sys: &mut MsfemSystem, problem: &Problem) -> Result<BcSummary> {
    let mesh = &problem.mesh;
    let config = sys.config.clone();
    let spaces = &sys.spaces;
    let lam_mask = crate::fem::Support::Regions(problem.laminated_ids()).mask(mesh);
    let lam_boundary = support_boundary_edges(mesh, &lam_mask);
    let tagged = |tags: &[BoundaryTag]| -> Vec<usize> {
        let mut e: Vec<usize> = tags.iter().flat_map(|&t| tagged_edges(mesh, t)).collect();
        e.sort_unstable();
        e
    };
    let on_lam = |edges: Vec<usize>| -> Vec<usize> { edges.into_iter().filter(|e| lam_boundary.binary_search(e).is_ok()).collect() };
    let mut summary = BcSummary::new();
    let mut apply = |sys: &mut MsfemSystem, block: Block, edges: &[usize], data: TraceData<'_>| -> Result<()> {
        if let Some(i) = sys.spaces.index(block) {
            let n = constrain_edges(&mut sys.system, &sys.spaces.spaces, mesh, i, edges, data)?;
            *summary.entry(block.name()).or_insert(0) += n;
        }
        Ok(())
    };
    let _ = spaces;
    use BoundaryTag::*;
    if config.method.is_t_family() {
        let h0 = config.applied_field;
        let boundary_only = config.excitation == ExcitationMode::BoundaryOnly;
        let field = move |_: [f64; 2]| h0;
        let potential = move |x: [f64; 2]| h0[0] * x[0] + h0[1] * x[1];
        let gh = tagged(&[GammaH]);
        let (tdata, pdata) = if boundary_only {
            (TraceData::Vector(&field), TraceData::Scalar(&potential))
        } else {
            (TraceData::Zero, TraceData::Zero)
        };
        apply(sys, Block::T0, &gh, tdata)?;
        apply(sys, Block::Phi0, &gh, pdata)?;
        let ge = tagged(&[GammaE]);
        let gamma_j: Vec<usize> = lam_boundary.iter().copied().filter(|e| ge.binary_search(e).is_err()).collect();
        apply(sys, Block::T2, &gamma_j, TraceData::Zero)?;
    } else {
        let (potential_tags, w_tags): (Vec<BoundaryTag>, Vec<BoundaryTag>) = match (config.boundary_policy, config.method) {
            (BoundaryPolicy::Tabulated, MethodId::Ams1) => (vec![GammaH], vec![]),
            (BoundaryPolicy::Tabulated, _) => (vec![GammaH, GammaB], vec![GammaH, GammaB]),
            (BoundaryPolicy::Physical, _) => (vec![GammaB, GammaE], vec![GammaE]),
        };
        apply(sys, Block::U10, &tagged(&potential_tags), TraceData::Zero)?;
        let a_tags = match (config.boundary_policy, config.method) {
            (BoundaryPolicy::Tabulated, MethodId::Ams1) => vec![GammaH, GammaB],
            _ => potential_tags.clone(),
        };
        apply(sys, Block::A1, &on_lam(tagged(&a_tags)), TraceData::Zero)?;
        apply(sys, Block::U1, &on_lam(tagged(&potential_tags)), TraceData::Zero)?;
        apply(sys, Block::W1, &on_lam(tagged(&w_tags)), TraceData::Zero)?;
        // scalar potentials seen only through their gradients need one fixed value
        for block in [Block::U10, Block::U1] {
            if let Some(i) = sys.spaces.index(block) {
                if summary.get(block.name()).copied().unwrap_or(0) == 0 {
                    let offset = sys.system.layout.offsets[i];
                    sys.system.constrain(offset, Complex64::new(0.0, 0.0));
                    summary.insert(block.name(), 1);
                }
            }
        }
    }
    Ok(summary)
}

/// Solved coefficient vector of one formulation.
#[derive(Clone, Debug)]
pub struct SolutionField {
    pub config: DiscretizationConfig,
    pub spaces: SpaceSet,
    pub table: MicroShapeTable,
    /// the constrained system, retained for residual checks and re-solves
    pub system: BlockSystem,
    pub coeffs: Vec<Complex64>,
    pub relative_residual: f64,
    /// residual of the equilibrated system (see [`crate::linsolve::LinearSolution`])
    pub scaled_residual: f64,
    pub stats: SolveStats,
    pub n_free: usize,
    pub nnz: usize,
    pub t_assemble: f64,
    pub t_solve: f64,
    pub constrained: BcSummary,
}

impl SolutionField {
    /// Coefficients of one block, if present.
    pub fn block(&self, b: Block) -> Option<&[Complex64]> {
        let i = self.spaces.index(b)?;
        Some(&self.coeffs[self.system.layout.range(i)])
    }
}

fn block_of(layout: &crate::fem::BlockLayout, global: usize) -> (String, usize) {
    for (i, name) in layout.names.iter().enumerate() {
        let r = layout.range(i);
        if r.contains(&global) {
            return (name.clone(), global - r.start);
        }
    }
    ("?".into(), global)
}

/// Solve a constrained system, naming the block on factorization failure.
pub fn solve_system(sys: MsfemSystem, constrained: BcSummary, method: SolveMethod) -> Result<SolutionField> {
    let start = Instant::now();
    let red = sys.system.reduce();
    let sol = solve_linear(&red.matrix, &red.rhs, method).map_err(|e| match e {
        SolverError::Singular { column, .. } => {
            let (block, dof) = block_of(&sys.system.layout, red.free[column]);
            Error::SolverInBlock { block, dof, source: e }
        }
        other => Error::Solver(other),
    })?;
    let coeffs = sys.system.expand(&red, &sol.x);
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Solver(SolverError::Breakdown { iteration: 0 }));
    }
    Ok(SolutionField {
        config: sys.config,
        spaces: sys.spaces,
        table: sys.table,
        system: sys.system,
        coeffs,
        relative_residual: sol.relative_residual,
        scaled_residual: sol.scaled_residual,
        stats: sol.stats,
        n_free: red.free.len(),
        nnz: red.matrix.nnz(),
        t_assemble: sys.t_assemble,
        t_solve: start.elapsed().as_secs_f64(),
        constrained,
    })
}

/// Assemble, constrain and solve.
pub fn solve(problem: &Problem, config: &DiscretizationConfig, exec: Execution, method: SolveMethod) -> Result<SolutionField> {
    let mut sys = assemble_msfem(problem, config, exec)?;
    let constrained = bc_apply(&mut sys, problem)?;
    solve_system(sys, constrained, method)
}
