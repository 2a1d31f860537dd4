//! Independent reference solutions.
//!
//! * [`Lamination1d`]: exact field in an infinite sheet of thickness `d`
//!   with tangential surface field `H0`.
//! * [`low_frequency_loss_density`]: the classical `σω²B̂²d²/24` limit.
//! * [`cross_section_fem`]: a brute-force P1 finite-element model of the
//!   sheet cross-section `(x, z)` that resolves both skin and edge effect.
//!   It has its own element loop and shares only the mesh container and the
//!   sparse solver with the rest of the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::linsolve::{solve_linear, CsrMatrix, SolveMethod};
use crate::mesh::{BoundaryEdge, BoundaryTag, Mesh2D, SideLabel, Triangle};
use crate::microshape::LaminationSpec;

/// Vacuum permeability [H/m].
pub const MU0: f64 = 4.0e-7 * PI;

/// Skin depth `√(2/(ωμσ))`; infinite for a static or non-conducting problem.
pub fn skin_depth(sigma: f64, mu: f64, f: f64) -> f64 {
    let w = 2.0 * PI * f;
    if w * mu * sigma == 0.0 {
        f64::INFINITY
    } else {
        (2.0 / (w * mu * sigma)).sqrt()
    }
}

/// Low-frequency eddy-current loss density [W/m³] for peak flux density `b_peak`.
pub fn low_frequency_loss_density(sigma: f64, f: f64, b_peak: f64, d: f64) -> f64 {
    let w = 2.0 * PI * f;
    sigma * w * w * b_peak * b_peak * d * d / 24.0
}

/// Exact 1D solution `H(z) = H0 cosh(γz)/cosh(γd/2)`, `γ = (1+j)/δ`.
#[derive(Clone, Copy, Debug)]
pub struct Lamination1d {
    pub h0: Complex64,
    pub d: f64,
    pub sigma: f64,
    pub mu: f64,
    pub f: f64,
    pub delta: f64,
    pub gamma: Complex64,
}

impl Lamination1d {
    pub fn new(h0: Complex64, d: f64, sigma: f64, mu: f64, f: f64) -> Result<Self> {
        if !(d > 0.0) || !(sigma >= 0.0) || !(mu > 0.0) || !(f >= 0.0) {
            return invalid("lamination oracle needs d > 0, sigma >= 0, mu > 0, f >= 0");
        }
        let delta = skin_depth(sigma, mu, f);
        let gamma = if delta.is_finite() { Complex64::new(1.0, 1.0) / delta } else { Complex64::new(0.0, 0.0) };
        Ok(Lamination1d { h0, d, sigma, mu, f, delta, gamma })
    }

    /// Tangential field at depth `z ∈ [-d/2, d/2]`.
    pub fn h(&self, z: f64) -> Complex64 {
        self.h0 * (self.gamma * z).cosh() / (self.gamma * (0.5 * self.d)).cosh()
    }

    /// `dH/dz`, the in-plane current density up to sign.
    pub fn dh(&self, z: f64) -> Complex64 {
        self.h0 * self.gamma * (self.gamma * z).sinh() / (self.gamma * (0.5 * self.d)).cosh()
    }

    /// `|H″ − jωμσH| / |jωμσH|`; zero for the exact profile.
    pub fn ode_residual(&self, z: f64) -> f64 {
        let k2 = Complex64::new(0.0, 2.0 * PI * self.f * self.mu * self.sigma);
        let h = self.h(z);
        let hpp = self.h0 * self.gamma * self.gamma * (self.gamma * z).cosh() / (self.gamma * (0.5 * self.d)).cosh();
        let scale = (k2 * h).norm();
        if scale == 0.0 {
            hpp.norm()
        } else {
            (hpp - k2 * h).norm() / scale
        }
    }

    /// Loss per unit sheet surface [W/m²] by adaptive quadrature of `½ρ|J|²`.
    pub fn loss_per_area(&self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let half = 0.5 * self.d;
        let integrand = |z: f64| self.dh(z).norm_sqr();
        let scale = (self.h0.norm() / self.d).powi(2) * self.d;
        let q = quadrature::integrate(integrand, -half, half, 1e-15 * scale.max(1e-300)).integral;
        0.5 * q / self.sigma
    }

    /// Average peak flux density `μ |∫H dz| / d`.
    pub fn mean_flux_density(&self) -> f64 {
        if self.gamma.norm() == 0.0 {
            return self.mu * self.h0.norm();
        }
        let half = 0.5 * self.d;
        let avg = self.h0 * (self.gamma * half).tanh() / (self.gamma * half);
        self.mu * avg.norm()
    }
}

/// Sheet cross-section `[0, w] × [-d/2, d/2]` with `H = H0` on its boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionProblem {
    pub width: f64,
    pub thickness: f64,
    pub sigma: f64,
    pub mu: f64,
    pub f: f64,
    pub h0: Complex64,
}

impl CrossSectionProblem {
    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.thickness > 0.0 && self.sigma >= 0.0 && self.mu > 0.0 && self.f >= 0.0) {
            return invalid("cross-section problem needs positive width, thickness, mu and non-negative sigma, f");
        }
        if !self.h0.re.is_finite() || !self.h0.im.is_finite() {
            return invalid("boundary field must be finite");
        }
        Ok(())
    }
}

/// Nodal solution and losses per unit length [W/m] of the cross-section model.
#[derive(Clone, Debug)]
pub struct CrossSectionSolution {
    pub problem: CrossSectionProblem,
    pub nx: usize,
    pub nz: usize,
    pub mesh: Mesh2D,
    /// nodal values, index `j * (nx + 1) + i`
    pub h: Vec<Complex64>,
    pub p: f64,
    pub p_ee: f64,
    pub relative_residual: f64,
}

fn cross_section_mesh(w: f64, d: f64, nx: usize, nz: usize) -> Result<Mesh2D> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (nz + 1));
    for j in 0..=nz {
        for i in 0..=nx {
            vertices.push([w * i as f64 / nx as f64, -0.5 * d + d * j as f64 / nz as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * nz);
    for j in 0..nz {
        // the lower half uses the mirrored diagonal so the mesh is symmetric in z
        let mirrored = 2 * j + 1 < nz;
        for i in 0..nx {
            let (a, b, c, e) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if mirrored {
                triangles.push(Triangle { v: [a, b, e], region: 1 });
                triangles.push(Triangle { v: [b, c, e], region: 1 });
            } else {
                triangles.push(Triangle { v: [a, b, c], region: 1 });
                triangles.push(Triangle { v: [a, c, e], region: 1 });
            }
        }
    }
    let mut boundary = Vec::new();
    let tag = BoundaryTag::GammaH;
    for i in 0..nx {
        boundary.push(BoundaryEdge { v: [id(i, 0), id(i + 1, 0)], tag, label: SideLabel::Bottom });
        boundary.push(BoundaryEdge { v: [id(i + 1, nz), id(i, nz)], tag, label: SideLabel::Top });
    }
    for j in 0..nz {
        boundary.push(BoundaryEdge { v: [id(nx, j), id(nx, j + 1)], tag, label: SideLabel::Right });
        boundary.push(BoundaryEdge { v: [id(0, j + 1), id(0, j)], tag, label: SideLabel::Left });
    }
    Mesh2D::new(vertices, triangles, boundary)
}

/// Solve `∇·(ρ∇H) = jωμH` on the cross-section with P1 elements.
pub fn cross_section_fem(problem: &CrossSectionProblem, nx: usize, nz: usize) -> Result<CrossSectionSolution> {
    problem.validate()?;
    if nx < 4 || nz < 4 {
        return invalid(format!("cross-section grid needs nx, nz >= 4, got {nx} x {nz}"));
    }
    let mesh = cross_section_mesh(problem.width, problem.thickness, nx, nz)?;
    let n = mesh.n_vertices();
    let on_boundary = |v: usize| {
        let (i, j) = (v % (nx + 1), v / (nx + 1));
        i == 0 || i == nx || j == 0 || j == nz
    };
    // interior numbering
    let mut free = vec![usize::MAX; n];
    let mut n_free = 0;
    for v in 0..n {
        if !on_boundary(v) {
            free[v] = n_free;
            n_free += 1;
        }
    }
    let k2 = Complex64::new(0.0, 2.0 * PI * problem.f * problem.mu * problem.sigma);
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    let mut rhs = vec![Complex64::new(0.0, 0.0); n_free];
    for tri in mesh.triangles() {
        let (g, area) = p1_gradients(&mesh, tri.v);
        for a in 0..3 {
            let ra = free[tri.v[a]];
            if ra == usize::MAX {
                continue;
            }
            for b in 0..3 {
                let stiff = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                let mass = area * if a == b { 1.0 / 6.0 } else { 1.0 / 12.0 };
                let val = Complex64::new(stiff, 0.0) + k2 * mass;
                let cb = free[tri.v[b]];
                if cb == usize::MAX {
                    rhs[ra] -= val * problem.h0;
                } else {
                    triplets.push((ra, cb, val));
                }
            }
        }
    }
    let mut h = vec![problem.h0; n];
    let mut relative_residual = 0.0;
    if n_free > 0 {
        let a = CsrMatrix::from_triplets(n_free, n_free, &triplets);
        let sol = solve_linear(&a, &rhs, SolveMethod::default())?;
        relative_residual = sol.relative_residual;
        for v in 0..n {
            if free[v] != usize::MAX {
                h[v] = sol.x[free[v]];
            }
        }
    }
    let (mut p, mut p_ee) = (0.0, 0.0);
    let rho_half = if problem.sigma > 0.0 { 0.5 / problem.sigma } else { 0.0 };
    for tri in mesh.triangles() {
        let (g, area) = p1_gradients(&mesh, tri.v);
        let mut grad = [Complex64::new(0.0, 0.0); 2];
        for a in 0..3 {
            grad[0] += h[tri.v[a]] * g[a][0];
            grad[1] += h[tri.v[a]] * g[a][1];
        }
        p += rho_half * area * (grad[0].norm_sqr() + grad[1].norm_sqr());
        p_ee += rho_half * area * grad[0].norm_sqr();
    }
    Ok(CrossSectionSolution { problem: *problem, nx, nz, mesh, h, p, p_ee, relative_residual })
}

fn p1_gradients(mesh: &Mesh2D, v: [usize; 3]) -> ([[f64; 2]; 3], f64) {
    let x = mesh.vertices();
    let (p0, p1, p2) = (x[v[0]], x[v[1]], x[v[2]]);
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let g = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (g, 0.5 * det)
}

impl CrossSectionSolution {
    /// Interpolated field at `(x, z)`.
    pub fn sample(&self, x: f64, z: f64) -> Result<Complex64> {
        let (w, d) = (self.problem.width, self.problem.thickness);
        let tol = 1e-12 * w.max(d);
        if x < -tol || x > w + tol || z.abs() > 0.5 * d + tol {
            return Err(crate::Error::OutOfDomain { x, y: z });
        }
        let (hx, hz) = (w / self.nx as f64, d / self.nz as f64);
        let i = ((x / hx).floor() as usize).min(self.nx - 1);
        let j = (((z + 0.5 * d) / hz).floor() as usize).min(self.nz - 1);
        let t0 = 2 * (j * self.nx + i);
        let t = if self.mesh.barycentric(t0, [x, z]).iter().all(|&l| l >= -1e-12) { t0 } else { t0 + 1 };
        let l = self.mesh.barycentric(t, [x, z]);
        let v = self.mesh.triangles()[t].v;
        Ok(self.h[v[0]] * l[0] + self.h[v[1]] * l[1] + self.h[v[2]] * l[2])
    }
}

/// Richardson-extrapolated strip losses per lamination period and unit length [W/m].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReference {
    pub p_ref: f64,
    pub p_ee_ref: f64,
    pub p_coarse: f64,
    pub p_fine: f64,
    pub p_ee_coarse: f64,
    pub p_ee_fine: f64,
    pub delta: f64,
    pub grid_coarse: [usize; 2],
    pub grid_fine: [usize; 2],
}

/// Reference losses of the laminated strip benchmark.
///
/// Only the iron sheet carries current, so the per-period loss equals the
/// cross-section loss of one sheet; `k_f` enters only through the MSFEM side.
/// The result extrapolates the `(nx, nz)` and `(2nx, 2nz)` solutions
/// assuming second-order convergence.
pub fn strip_reference(
    width: f64,
    lamination: &LaminationSpec,
    sigma: f64,
    mu: f64,
    f: f64,
    h0: Complex64,
    grid: [usize; 2],
) -> Result<StripReference> {
    lamination.validate()?;
    let problem = CrossSectionProblem { width, thickness: lamination.d, sigma, mu, f, h0 };
    let coarse = cross_section_fem(&problem, grid[0], grid[1])?;
    let fine = cross_section_fem(&problem, 2 * grid[0], 2 * grid[1])?;
    let extrapolate = |c: f64, f: f64| f + (f - c) / 3.0;
    Ok(StripReference {
        p_ref: extrapolate(coarse.p, fine.p),
        p_ee_ref: extrapolate(coarse.p_ee, fine.p_ee),
        p_coarse: coarse.p,
        p_fine: fine.p,
        p_ee_coarse: coarse.p_ee,
        p_ee_fine: fine.p_ee,
        delta: skin_depth(sigma, mu, f),
        grid_coarse: grid,
        grid_fine: [2 * grid[0], 2 * grid[1]],
    })
}

/// Observed convergence order from three successively halved grids.
pub fn observed_order(coarse: f64, medium: f64, fine: f64) -> f64 {
    ((coarse - medium) / (medium - fine)).abs().log2()
}
