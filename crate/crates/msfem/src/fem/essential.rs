//! Essential (Dirichlet-type) boundary data: projection of prescribed traces
//! onto boundary DOFs, and application to a [`BlockSystem`].

use num_complex::Complex64;

use super::assembly::BlockSystem;
use super::quadrature::gauss_legendre_unit;
use super::space::{EdgeSpace, FeSpace, ScalarSpace};
use crate::error::{invalid, Result};
use crate::mesh::{BoundaryTag, Mesh2D};

/// Prescribed boundary data.
#[derive(Clone, Copy)]
pub enum TraceData<'a> {
    Zero,
    /// Scalar block: nodal value as a function of position.
    Scalar(&'a (dyn Fn([f64; 2]) -> Complex64 + Sync)),
    /// Edge block: a vector field whose tangential component is imposed.
    Vector(&'a (dyn Fn([f64; 2]) -> [Complex64; 2] + Sync)),
}

/// Boundary data for one block on all outer-boundary edges carrying `tag`.
#[derive(Clone, Copy)]
pub struct EssentialBc<'a> {
    pub block: usize,
    pub tag: BoundaryTag,
    pub data: TraceData<'a>,
}

const EDGE_QUAD: usize = 8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Small dense Gauss elimination for the edge projections (≤ 3 unknowns).
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            let t = b[k];
            b[i] -= t * f;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= b[j] * a[k][j];
        }
        b[k] = s / a[k][k];
    }
    b
}

/// Tangential-trace basis of an edge of order `k`, per unit length, at
/// parameter `s ∈ [0, 1]` running from the lower to the higher vertex.
fn edge_trace_basis(k: usize, s: f64, len: f64) -> Vec<f64> {
    let mut t = vec![1.0 / len];
    if k >= 1 {
        t.push(4.0 * (1.0 - 2.0 * s) / len);
    }
    if k >= 2 {
        t.push(4.0 * (-6.0 * s * s + 6.0 * s - 1.0) / len);
    }
    t
}

/// DOF values reproducing the L2 projection of the tangential component of
/// `field` on each listed edge. Edges outside the support are skipped.
pub fn edge_trace_values(
    space: &EdgeSpace,
    mesh: &Mesh2D,
    edges: &[usize],
    field: &(dyn Fn([f64; 2]) -> [Complex64; 2] + Sync),
) -> Vec<(usize, Complex64)> {
    let k = space.order();
    let (sq, wq) = gauss_legendre_unit(EDGE_QUAD);
    let mut out = Vec::new();
    for &e in edges {
        let dofs = space.edge_dofs(e);
        if dofs.is_empty() {
            continue;
        }
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(e);
        let t = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
        let n = k + 1;
        let mut gram = vec![vec![0.0; n]; n];
        let mut rhs = vec![zero(); n];
        for (s, w) in sq.iter().zip(&wq) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let f = field(x);
            let ft = f[0] * t[0] + f[1] * t[1];
            let tau = edge_trace_basis(k, *s, len);
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] += w * len * tau[i] * tau[j];
                }
                rhs[i] += ft * (w * len * tau[i]);
            }
        }
        let c = solve_small(gram, rhs);
        out.extend(dofs.into_iter().zip(c));
    }
    out
}

/// DOF values of a scalar space reproducing `f` at the edge end points and
/// the L2 projection of the remainder onto the edge bubbles.
pub fn scalar_trace_values(
    space: &ScalarSpace,
    mesh: &Mesh2D,
    edges: &[usize],
    f: &(dyn Fn([f64; 2]) -> Complex64 + Sync),
) -> Vec<(usize, Complex64)> {
    let m = space.order();
    let (sq, wq) = gauss_legendre_unit(EDGE_QUAD);
    let mut out = Vec::new();
    for &e in edges {
        let [a, b] = mesh.edges()[e];
        let (Some(da), Some(db)) = (space.vertex_dof(a), space.vertex_dof(b)) else { continue };
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let (fa, fb) = (f(pa), f(pb));
        out.push((da, fa));
        out.push((db, fb));
        let dofs = space.edge_dofs(e);
        if dofs.is_empty() {
            continue;
        }
        let n = m - 1;
        let mut gram = vec![vec![0.0; n]; n];
        let mut rhs = vec![zero(); n];
        for (s, w) in sq.iter().zip(&wq) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let r = f(x) - (fa * (1.0 - s) + fb * *s);
            let bub = [4.0 * s * (1.0 - s), 4.0 * s * (1.0 - s) * (2.0 * s - 1.0)];
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] += w * bub[i] * bub[j];
                }
                rhs[i] += r * (w * bub[i]);
            }
        }
        let c = solve_small(gram, rhs);
        out.extend(dofs.into_iter().zip(c));
    }
    out
}

/// Global edge indices of the outer boundary edges carrying `tag`.
pub fn tagged_edges(mesh: &Mesh2D, tag: BoundaryTag) -> Vec<usize> {
    (0..mesh.n_edges())
        .filter(|&e| mesh.edge_boundary(e).is_some_and(|b| b.tag == tag))
        .collect()
}

/// Constrain the DOFs of `block` on the given edges.
///
/// Returns the number of constrained DOFs.
pub fn constrain_edges(
    system: &mut BlockSystem,
    spaces: &[FeSpace],
    mesh: &Mesh2D,
    block: usize,
    edges: &[usize],
    data: TraceData<'_>,
) -> Result<usize> {
    if block >= spaces.len() {
        return invalid(format!("block {block} does not exist"));
    }
    let offset = system.layout.offsets[block];
    let values: Vec<(usize, Complex64)> = match (&spaces[block], data) {
        (FeSpace::Edge(s), TraceData::Zero) => edges.iter().flat_map(|&e| s.edge_dofs(e)).map(|d| (d, zero())).collect(),
        (FeSpace::Edge(s), TraceData::Vector(f)) => edge_trace_values(s, mesh, edges, f),
        (FeSpace::Scalar(s), TraceData::Zero) => scalar_trace_values(s, mesh, edges, &|_| zero()),
        (FeSpace::Scalar(s), TraceData::Scalar(f)) => scalar_trace_values(s, mesh, edges, f),
        (FeSpace::Edge(_), TraceData::Scalar(_)) => return invalid(format!("block {block} is an edge space and needs vector data")),
        (FeSpace::Scalar(_), TraceData::Vector(_)) => return invalid(format!("block {block} is a scalar space and needs scalar data")),
    };
    let n = values.len();
    for (d, v) in values {
        system.constrain(offset + d, v);
    }
    Ok(n)
}

/// Apply tagged boundary data. Errors when a tag does not occur in the mesh
/// or when the block has no DOFs on the tagged edges.
pub fn apply_essential(system: &mut BlockSystem, spaces: &[FeSpace], mesh: &Mesh2D, bcs: &[EssentialBc<'_>]) -> Result<()> {
    for bc in bcs {
        let edges = tagged_edges(mesh, bc.tag);
        if edges.is_empty() {
            return invalid(format!("boundary tag {} does not occur in the mesh", bc.tag));
        }
        let n = constrain_edges(system, spaces, mesh, bc.block, &edges, bc.data)?;
        if n == 0 {
            return invalid(format!("block {} has no DOFs on boundary tag {}", bc.block, bc.tag));
        }
    }
    Ok(())
}
