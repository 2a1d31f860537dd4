//! Generic block assembly of complex bilinear and linear forms.
//!
//! A system is described by a list of spaces (one per block) and a list of
//! terms. Each term names its test block (`row`), trial block (`col`), an
//! integrand from a closed set, a region filter and a complex constant.
//! Off-diagonal terms (`row != col`) are mirrored automatically, so every
//! term list produces an exactly complex-symmetric matrix.
//!
//! Element contributions are computed independently (optionally in
//! parallel) and then summed in canonical element order, so the matrix is
//! bitwise identical for every execution policy.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::basis::{ScalarValues, VectorValues};
use super::quadrature::{quadrature, QuadratureRule};
use super::space::{ElementGeometry, FeSpace};
use crate::error::{invalid, Result};
use crate::linsolve::{solve_linear, CsrMatrix, SolveMethod, SolveStats, SolverError};
use crate::mesh::{Mesh2D, RegionId};
use crate::par::{map_range, Execution};

/// Bilinear integrands; `u`/`U` trial (column block), `v`/`V` test (row block).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrand {
    /// `u v` (scalar × scalar)
    Mass,
    /// `∇u · ∇v` (scalar × scalar)
    Stiffness,
    /// `curl U curl V` (edge × edge)
    CurlCurl,
    /// `U · V` (edge × edge)
    VecMass,
    /// `∇u · V` (one scalar and one edge block)
    GradVec,
    /// `(ẑ × ∇u) · V` (one scalar and one edge block, scalar block as `col`)
    RotGradVec,
}

/// Linear integrands against a user field; `v`/`V` is the test function.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    /// `f v` (scalar block)
    Value(&'a (dyn Fn([f64; 2]) -> Complex64 + Sync)),
    /// `F · V` (edge block)
    Vector(&'a (dyn Fn([f64; 2]) -> [Complex64; 2] + Sync)),
    /// `F · ∇v` (scalar block)
    VectorGrad(&'a (dyn Fn([f64; 2]) -> [Complex64; 2] + Sync)),
    /// `F · (ẑ × ∇v)` (scalar block)
    VectorRotGrad(&'a (dyn Fn([f64; 2]) -> [Complex64; 2] + Sync)),
    /// `F · (ẑ × V)` (edge block)
    VectorRot(&'a (dyn Fn([f64; 2]) -> [Complex64; 2] + Sync)),
    /// `f curl V` (edge block)
    Curl(&'a (dyn Fn([f64; 2]) -> Complex64 + Sync)),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionFilter {
    All,
    Only(Vec<RegionId>),
}

impl RegionFilter {
    pub fn accepts(&self, region: RegionId) -> bool {
        match self {
            RegionFilter::All => true,
            RegionFilter::Only(ids) => ids.contains(&region),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BilinearTerm {
    pub row: usize,
    pub col: usize,
    pub integrand: Integrand,
    pub regions: RegionFilter,
    pub coeff: Complex64,
}

impl BilinearTerm {
    pub fn new(row: usize, col: usize, integrand: Integrand, regions: RegionFilter, coeff: Complex64) -> Self {
        BilinearTerm { row, col, integrand, regions, coeff }
    }
}

#[derive(Clone)]
pub struct LinearTerm<'a> {
    pub row: usize,
    pub source: Source<'a>,
    pub regions: RegionFilter,
    pub coeff: Complex64,
}

/// Named blocks with offsets into the global vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    pub names: Vec<String>,
    pub offsets: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl BlockLayout {
    pub fn new(names: Vec<String>, sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        BlockLayout { names, offsets, sizes }
    }
    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.sizes[block]
    }
}

/// Assembled system with its essential constraints.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub layout: BlockLayout,
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
    constraints: BTreeMap<usize, Complex64>,
}

/// System after symmetric elimination of the constrained DOFs.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
    /// reduced index → global index
    pub free: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SystemSolution {
    pub x: Vec<Complex64>,
    pub relative_residual: f64,
    pub scaled_residual: f64,
    pub stats: SolveStats,
    pub n_free: usize,
    pub nnz: usize,
}

impl BlockSystem {
    pub fn n_dofs(&self) -> usize {
        self.rhs.len()
    }

    /// Prescribe a global DOF. A later call for the same DOF overrides.
    pub fn constrain(&mut self, dof: usize, value: Complex64) {
        assert!(dof < self.n_dofs());
        self.constraints.insert(dof, value);
    }

    pub fn constraints(&self) -> &BTreeMap<usize, Complex64> {
        &self.constraints
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constraints.contains_key(&dof)
    }

    /// Remove constrained rows and columns; their known values move to the
    /// right-hand side.
    pub fn reduce(&self) -> ReducedSystem {
        let n = self.n_dofs();
        let mut keep = vec![None; n];
        let mut free = Vec::with_capacity(n - self.constraints.len());
        for i in 0..n {
            if !self.constraints.contains_key(&i) {
                keep[i] = Some(free.len());
                free.push(i);
            }
        }
        let (matrix, coupling) = self.matrix.split(&keep);
        let mut rhs: Vec<Complex64> = free.iter().map(|&i| self.rhs[i]).collect();
        for (r, c, v) in coupling {
            let g = self.constraints[&c];
            if g != Complex64::new(0.0, 0.0) {
                rhs[r] -= v * g;
            }
        }
        ReducedSystem { matrix, rhs, free }
    }

    /// Scatter a reduced solution back, filling in the prescribed values.
    pub fn expand(&self, reduced: &ReducedSystem, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.n_dofs()];
        for (k, &i) in reduced.free.iter().enumerate() {
            x[i] = y[k];
        }
        for (&i, &v) in &self.constraints {
            x[i] = v;
        }
        x
    }

    pub fn solve(&self, method: SolveMethod) -> std::result::Result<SystemSolution, SolverError> {
        let red = self.reduce();
        let sol = solve_linear(&red.matrix, &red.rhs, method)?;
        Ok(SystemSolution {
            x: self.expand(&red, &sol.x),
            relative_residual: sol.relative_residual,
            scaled_residual: sol.scaled_residual,
            stats: sol.stats,
            n_free: red.free.len(),
            nnz: red.matrix.nnz(),
        })
    }
}

/// Default quadrature degree: `2 p + 1` for the largest basis degree `p`.
pub fn default_quadrature_degree(spaces: &[FeSpace]) -> usize {
    let p = spaces.iter().map(|s| s.degree()).max().unwrap_or(1);
    (2 * p + 1).min(super::quadrature::MAX_DEGREE)
}

enum Evaluated {
    Scalar(Vec<ScalarValues>),
    Vector(Vec<VectorValues>),
}

fn check_term(spaces: &[FeSpace], row: usize, col: usize, integrand: Integrand) -> Result<()> {
    if row >= spaces.len() || col >= spaces.len() {
        return invalid(format!("term references block ({row}, {col}) but only {} spaces exist", spaces.len()));
    }
    let (r, c) = (spaces[row].is_scalar(), spaces[col].is_scalar());
    let ok = match integrand {
        Integrand::Mass | Integrand::Stiffness => r && c,
        Integrand::CurlCurl | Integrand::VecMass => !r && !c,
        Integrand::GradVec => r != c,
        Integrand::RotGradVec => !r && c,
    };
    if !ok {
        return invalid(format!("integrand {integrand:?} does not fit the space kinds of block ({row}, {col})"));
    }
    Ok(())
}

fn check_source(spaces: &[FeSpace], row: usize, source: &Source<'_>) -> Result<()> {
    if row >= spaces.len() {
        return invalid(format!("source references block {row} but only {} spaces exist", spaces.len()));
    }
    let scalar = spaces[row].is_scalar();
    let ok = match source {
        Source::Value(_) | Source::VectorGrad(_) | Source::VectorRotGrad(_) => scalar,
        Source::Vector(_) | Source::VectorRot(_) | Source::Curl(_) => !scalar,
    };
    if !ok {
        return invalid(format!("source kind does not fit the space of block {row}"));
    }
    Ok(())
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn rot(a: [f64; 2]) -> [f64; 2] {
    [-a[1], a[0]]
}

/// Real element integral of the integrand between local function `i` of the
/// row space and `j` of the column space, at quadrature point `q`.
fn pointwise(integrand: Integrand, row: &Evaluated, col: &Evaluated, q: usize, i: usize, j: usize) -> f64 {
    match (integrand, row, col) {
        (Integrand::Mass, Evaluated::Scalar(r), Evaluated::Scalar(c)) => r[q].val[i] * c[q].val[j],
        (Integrand::Stiffness, Evaluated::Scalar(r), Evaluated::Scalar(c)) => dot(r[q].grad[i], c[q].grad[j]),
        (Integrand::CurlCurl, Evaluated::Vector(r), Evaluated::Vector(c)) => r[q].curl[i] * c[q].curl[j],
        (Integrand::VecMass, Evaluated::Vector(r), Evaluated::Vector(c)) => dot(r[q].val[i], c[q].val[j]),
        (Integrand::GradVec, Evaluated::Scalar(r), Evaluated::Vector(c)) => dot(r[q].grad[i], c[q].val[j]),
        (Integrand::GradVec, Evaluated::Vector(r), Evaluated::Scalar(c)) => dot(r[q].val[i], c[q].grad[j]),
        (Integrand::RotGradVec, Evaluated::Vector(r), Evaluated::Scalar(c)) => dot(r[q].val[i], rot(c[q].grad[j])),
        _ => unreachable!("checked by check_term"),
    }
}

fn n_local(e: &Evaluated) -> usize {
    match e {
        Evaluated::Scalar(v) => v[0].n,
        Evaluated::Vector(v) => v[0].n,
    }
}

/// Assemble matrix and right-hand side.
pub fn assemble(
    mesh: &Mesh2D,
    spaces: &[FeSpace],
    names: &[&str],
    bilinear: &[BilinearTerm],
    linear: &[LinearTerm<'_>],
    quad_degree: Option<usize>,
    exec: Execution,
) -> Result<BlockSystem> {
    if names.len() != spaces.len() {
        return invalid("one name per block is required");
    }
    for t in bilinear {
        check_term(spaces, t.row, t.col, t.integrand)?;
    }
    for t in linear {
        check_source(spaces, t.row, &t.source)?;
    }
    let degree = quad_degree.unwrap_or_else(|| default_quadrature_degree(spaces));
    let rule = quadrature(degree)?;
    let layout = BlockLayout::new(names.iter().map(|s| s.to_string()).collect(), spaces.iter().map(|s| s.n_dofs()).collect());
    let n = layout.total();

    let per_element = map_range(exec, mesh.n_triangles(), |t| element_contributions(mesh, spaces, &layout, bilinear, linear, &rule, t));
    let total: usize = per_element.iter().map(|(m, _)| m.len()).sum();
    let mut triplets = Vec::with_capacity(total);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for (m, r) in per_element {
        triplets.extend(m);
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets);
    Ok(BlockSystem { layout, matrix, rhs, constraints: BTreeMap::new() })
}

type Contribution = (Vec<(usize, usize, Complex64)>, Vec<(usize, Complex64)>);

fn element_contributions(
    mesh: &Mesh2D,
    spaces: &[FeSpace],
    layout: &BlockLayout,
    bilinear: &[BilinearTerm],
    linear: &[LinearTerm<'_>],
    rule: &QuadratureRule,
    t: usize,
) -> Contribution {
    let region = mesh.triangles()[t].region;
    let geo = ElementGeometry::new(mesh, t);
    let mut cache: Vec<Option<Evaluated>> = (0..spaces.len()).map(|_| None).collect();
    let evaluated = |b: usize, cache: &mut Vec<Option<Evaluated>>| {
        if cache[b].is_none() {
            cache[b] = Some(match &spaces[b] {
                FeSpace::Scalar(s) => Evaluated::Scalar(rule.points.iter().map(|l| s.eval(&geo, *l)).collect()),
                FeSpace::Edge(s) => Evaluated::Vector(rule.points.iter().map(|l| s.eval(&geo, *l)).collect()),
            });
        }
    };
    let weights: Vec<f64> = rule.weights.iter().map(|w| 2.0 * geo.area * w).collect();
    let mut mat = Vec::new();
    for term in bilinear {
        if !term.regions.accepts(region) {
            continue;
        }
        let (Some(rd), Some(cd)) = (spaces[term.row].triangle_dofs(t), spaces[term.col].triangle_dofs(t)) else {
            continue;
        };
        evaluated(term.row, &mut cache);
        evaluated(term.col, &mut cache);
        let re = cache[term.row].as_ref().unwrap();
        let ce = cache[term.col].as_ref().unwrap();
        let (nr, nc) = (n_local(re), n_local(ce));
        let (ro, co) = (layout.offsets[term.row], layout.offsets[term.col]);
        let diagonal = term.row == term.col;
        let mut local = vec![0.0; nr * nc];
        for i in 0..nr {
            let j0 = if diagonal { i } else { 0 };
            for j in j0..nc {
                let mut s = 0.0;
                for (q, w) in weights.iter().enumerate() {
                    s += w * pointwise(term.integrand, re, ce, q, i, j);
                }
                local[i * nc + j] = s;
                if diagonal {
                    local[j * nc + i] = s;
                }
            }
        }
        for i in 0..nr {
            for j in 0..nc {
                let v = term.coeff * local[i * nc + j];
                mat.push((ro + rd[i], co + cd[j], v));
                if !diagonal {
                    mat.push((co + cd[j], ro + rd[i], v));
                }
            }
        }
    }
    let mut vec = Vec::new();
    for term in linear {
        if !term.regions.accepts(region) {
            continue;
        }
        let Some(rd) = spaces[term.row].triangle_dofs(t) else { continue };
        evaluated(term.row, &mut cache);
        let re = cache[term.row].as_ref().unwrap();
        let nr = n_local(re);
        let mut local = vec![Complex64::new(0.0, 0.0); nr];
        for (q, (l, w)) in rule.points.iter().zip(&weights).enumerate() {
            let x = geo.point(*l);
            match (term.source, re) {
                (Source::Value(f), Evaluated::Scalar(e)) => {
                    let fv = f(x) * *w;
                    for i in 0..nr {
                        local[i] += fv * e[q].val[i];
                    }
                }
                (Source::VectorGrad(f), Evaluated::Scalar(e)) => {
                    let fv = f(x);
                    for i in 0..nr {
                        let g = e[q].grad[i];
                        local[i] += (fv[0] * g[0] + fv[1] * g[1]) * *w;
                    }
                }
                (Source::VectorRotGrad(f), Evaluated::Scalar(e)) => {
                    let fv = f(x);
                    for i in 0..nr {
                        let g = rot(e[q].grad[i]);
                        local[i] += (fv[0] * g[0] + fv[1] * g[1]) * *w;
                    }
                }
                (Source::Vector(f), Evaluated::Vector(e)) => {
                    let fv = f(x);
                    for i in 0..nr {
                        let g = e[q].val[i];
                        local[i] += (fv[0] * g[0] + fv[1] * g[1]) * *w;
                    }
                }
                (Source::VectorRot(f), Evaluated::Vector(e)) => {
                    let fv = f(x);
                    for i in 0..nr {
                        let g = rot(e[q].val[i]);
                        local[i] += (fv[0] * g[0] + fv[1] * g[1]) * *w;
                    }
                }
                (Source::Curl(f), Evaluated::Vector(e)) => {
                    let fv = f(x) * *w;
                    for i in 0..nr {
                        local[i] += fv * e[q].curl[i];
                    }
                }
                _ => unreachable!("checked by check_source"),
            }
        }
        let ro = layout.offsets[term.row];
        for i in 0..nr {
            vec.push((ro + rd[i], term.coeff * local[i]));
        }
    }
    (mat, vec)
}
