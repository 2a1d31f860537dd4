//! Losses and field reconstruction.
//!
//! Losses are integrated in the plane by element quadrature; the z-direction
//! is integrated exactly through the micro-shape table. Everything is per
//! lamination period: the 2D density is multiplied by the period integral,
//! not divided by the period length.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Block, ExcitationMode, Problem, SolutionField};
use crate::error::{Error, Result};
use crate::excitation::{biot_savart_h, j0_density};
use crate::fem::{default_quadrature_degree, edge_field_at, quadrature, scalar_field_at, ElementGeometry};
use crate::mesh::RegionKind;
use crate::microshape::{dphi, phi, Part, Profile};
use crate::oracles::MU0;
use crate::par::{map_range, Execution};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Loss summary of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub method: String,
    pub edge_order: usize,
    /// total eddy-current loss per lamination period [W]
    #[serde(rename = "P")]
    pub p: f64,
    /// loss of the stack-normal current component [W]
    #[serde(rename = "P_EE")]
    pub p_ee: f64,
    pub dofs: usize,
    pub free_dofs: usize,
    pub nnz: usize,
    pub t_assemble: f64,
    pub t_solve: f64,
    pub relative_residual: f64,
    pub scaled_residual: f64,
}

/// Loss density at one point of the plane, integrated over one period
/// [W/m²].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalLoss {
    pub p: f64,
    pub p_ee: f64,
}

/// Reconstructed 3D field at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    /// flux density [T]
    pub b: [C; 3],
    /// current density [A/m²]
    pub j: [C; 3],
    /// magnetic field [A/m]
    pub h: [C; 3],
}

/// 2D coefficient functions at one point; absent blocks contribute zero.
#[derive(Clone, Copy, Debug, Default)]
struct Macro {
    t0: [C; 2],
    c0: C,
    t2: [C; 2],
    c2: C,
    grad_u: [C; 2],
    a1: [C; 2],
    curl_a1: C,
    w: C,
    grad_w: [C; 2],
}

fn macro_at(sol: &SolutionField, problem: &Problem, t: usize, l: [f64; 3]) -> Macro {
    let mesh = &problem.mesh;
    let mut m = Macro::default();
    let edge = |b: Block| sol.spaces.edge(b).zip(sol.block(b)).and_then(|(s, x)| edge_field_at(s, mesh, x, t, l));
    let scalar = |b: Block| sol.spaces.scalar(b).zip(sol.block(b)).and_then(|(s, x)| scalar_field_at(s, mesh, x, t, l));
    if let Some((v, c)) = edge(Block::T0) {
        m.t0 = v;
        m.c0 = c;
    }
    if let Some((_, g)) = scalar(Block::Phi0) {
        m.t0 = g;
    }
    if let Some((v, c)) = edge(Block::T2) {
        m.t2 = v;
        m.c2 = c;
    }
    if let Some((_, g)) = scalar(Block::U10) {
        m.grad_u = g;
    }
    if let Some((v, c)) = edge(Block::A1) {
        m.a1 = v;
        m.curl_a1 = c;
    }
    if let Some((_, g)) = scalar(Block::U1) {
        m.a1 = g;
    }
    if let Some((v, g)) = scalar(Block::W1) {
        m.w = v;
        m.grad_w = g;
    }
    m
}

fn norm2(v: [C; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn add(a: [C; 2], b: [C; 2]) -> [C; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

/// Period-integrated loss density of the laminated region with conductivity `sigma`.
fn density(sol: &SolutionField, m: &Macro, sigma: f64) -> LocalLoss {
    let tab = &sol.table;
    let iron = Part::Iron;
    if sol.config.method.is_t_family() {
        let rho = 1.0 / sigma;
        let i2 = tab.int(Profile::Phi2, iron);
        let p22 = tab.prod(Profile::Phi2, Profile::Phi2, iron);
        let in_plane = tab.dprod(Profile::Phi2, Profile::Phi2, iron) * norm2(m.t2);
        let jz = tab.int(Profile::One, iron) * m.c0.norm_sqr() + 2.0 * i2 * (m.c0 * m.c2.conj()).re + p22 * m.c2.norm_sqr();
        // rounding can push the (non-negative) quadratic form marginally below zero
        let jz = jz.max(0.0);
        // the edge-effect current is φ2 curl T2; curl T0 is a uniform z-current
        // through the insulation that only the penalty suppresses, so it counts
        // towards the total but not towards the edge effect
        let ee = p22 * m.c2.norm_sqr();
        LocalLoss { p: 0.5 * rho * (in_plane + jz), p_ee: 0.5 * rho * ee.min(in_plane + jz) }
    } else {
        let w2 = sol.config.omega().powi(2);
        let a = add(add(m.grad_u, m.a1), m.grad_w);
        let in_plane = tab.prod(Profile::Phi1, Profile::Phi1, iron) * norm2(a);
        let jz = tab.dprod(Profile::Phi1, Profile::Phi1, iron) * m.w.norm_sqr();
        LocalLoss { p: 0.5 * sigma * w2 * (in_plane + jz), p_ee: 0.5 * sigma * w2 * jz }
    }
}

/// Eddy-current losses per lamination period.
pub fn losses(problem: &Problem, sol: &SolutionField, exec: Execution) -> Result<LossReport> {
    let mesh = &problem.mesh;
    let degree = (default_quadrature_degree(&sol.spaces.spaces) + 1).min(crate::fem::quadrature::MAX_DEGREE);
    let rule = quadrature(degree)?;
    let per_element = map_range(exec, mesh.n_triangles(), |t| {
        let region = problem.region(mesh.triangles()[t].region);
        if region.kind != RegionKind::Laminated {
            return (0.0, 0.0);
        }
        let geo = ElementGeometry::new(mesh, t);
        let (mut p, mut p_ee) = (0.0, 0.0);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let d = density(sol, &macro_at(sol, problem, t, *l), region.sigma);
            let wt = 2.0 * geo.area * w;
            p += wt * d.p;
            p_ee += wt * d.p_ee;
        }
        (p, p_ee)
    });
    let (p, p_ee) = per_element.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    Ok(LossReport {
        method: sol.config.method.name().to_string(),
        edge_order: sol.config.edge_order,
        p,
        p_ee: p_ee.min(p),
        dofs: sol.coeffs.len(),
        free_dofs: sol.n_free,
        nnz: sol.nnz,
        t_assemble: sol.t_assemble,
        t_solve: sol.t_solve,
        relative_residual: sol.relative_residual,
        scaled_residual: sol.scaled_residual,
    })
}

/// Period-integrated loss density at a point of the plane [W/m²]; zero
/// outside laminated regions.
pub fn local_loss(problem: &Problem, sol: &SolutionField, x: f64, y: f64) -> Result<LocalLoss> {
    let (t, l) = problem.mesh.locator().locate([x, y]).ok_or(Error::OutOfDomain { x, y })?;
    let region = problem.region(problem.mesh.triangles()[t].region);
    if region.kind != RegionKind::Laminated {
        return Ok(LocalLoss { p: 0.0, p_ee: 0.0 });
    }
    Ok(density(sol, &macro_at(sol, problem, t, l), region.sigma))
}

fn rot(v: [C; 2]) -> [C; 2] {
    // ẑ × v
    [-v[1], v[0]]
}

/// Reconstruct `B`, `J`, `H` at `(x, y)` and height `z` within the period
/// centred on the sheet (`|z| <= p/2`).
pub fn reconstruct(problem: &Problem, sol: &SolutionField, x: f64, y: f64, z: f64) -> Result<FieldSample> {
    let spec = &problem.lamination;
    let (t, l) = problem.mesh.locator().locate([x, y]).ok_or(Error::OutOfDomain { x, y })?;
    let region = problem.region(problem.mesh.triangles()[t].region);
    let m = macro_at(sol, problem, t, l);
    let laminated = region.kind == RegionKind::Laminated;
    let part = if z.abs() <= 0.5 * spec.d { Part::Iron } else { Part::Insulation };
    let in_iron = laminated && part == Part::Iron;
    let mu = if in_iron { MU0 * region.mu_r } else { MU0 * if laminated { 1.0 } else { region.mu_r } };
    let sigma = if in_iron { region.sigma } else { 0.0 };
    let conductor_driven = matches!(sol.config.excitation, ExcitationMode::BiotSavart | ExcitationMode::ImpressedJ0);
    let j0 = if conductor_driven { j0_density(&problem.conductors, [x, y]) } else { ZERO };
    // φ(z) is checked against the period even outside the laminated region
    let p_z = |which: Profile| phi(which, z, spec);
    let dp_z = |which: Profile| if part == Part::Insulation && spec.insulation() == 0.0 { Ok(0.0) } else { dphi(which, z, part, spec) };

    if sol.config.method.is_t_family() {
        let f2 = if laminated { p_z(Profile::Phi2)? } else { 0.0 };
        let d2 = if laminated { dp_z(Profile::Phi2)? } else { 0.0 };
        let mut hp = add(m.t0, [m.t2[0] * f2, m.t2[1] * f2]);
        if sol.config.excitation == ExcitationMode::BiotSavart {
            hp = add(hp, biot_savart_h(&problem.conductors, [x, y]));
        }
        let h = [hp[0], hp[1], ZERO];
        let j = [-d2 * m.t2[1], d2 * m.t2[0], m.c0 + f2 * m.c2 + j0];
        let b = [h[0] * mu, h[1] * mu, ZERO];
        Ok(FieldSample { b, j, h })
    } else {
        let (a, b) = if laminated {
            let (f10, f1, d10, d1) = (p_z(Profile::Phi1_0)?, p_z(Profile::Phi1)?, dp_z(Profile::Phi1_0)?, dp_z(Profile::Phi1)?);
            let ap = [
                m.grad_u[0] * f10 + (m.a1[0] + m.grad_w[0]) * f1,
                m.grad_u[1] * f10 + (m.a1[1] + m.grad_w[1]) * f1,
            ];
            let a = [ap[0], ap[1], m.w * d1];
            let (ru, ra) = (rot(m.grad_u), rot(m.a1));
            let b = [ru[0] * d10 + ra[0] * d1, ru[1] * d10 + ra[1] * d1, m.curl_a1 * f1];
            (a, b)
        } else {
            // uniform profile 2z/p across the period
            let pp = spec.period();
            let s = 2.0 * z / pp;
            if z.abs() > 0.5 * pp * (1.0 + 1e-14) {
                return Err(Error::InvalidArgument(format!("z = {z} lies outside the period")));
            }
            let ru = rot(m.grad_u);
            ([m.grad_u[0] * s, m.grad_u[1] * s, ZERO], [ru[0] * (2.0 / pp), ru[1] * (2.0 / pp), ZERO])
        };
        let jw = C::new(0.0, -sol.config.omega() * sigma);
        let j = [a[0] * jw, a[1] * jw, a[2] * jw + j0];
        let h = [b[0] / mu, b[1] / mu, b[2] / mu];
        Ok(FieldSample { b, j, h })
    }
}
