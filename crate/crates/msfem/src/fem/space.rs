//! Degree-of-freedom management for nodal (H1) and edge (H(curl)) spaces
//! restricted to a subset of regions.

use super::basis::{
    barycentric_gradients, edge_basis, edge_cell_count, edge_flips, edge_local_count, scalar_basis, scalar_cell_count,
    scalar_local_count, ScalarValues, VectorValues, MAX_EDGE_ORDER, MAX_SCALAR_ORDER,
};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh2D, RegionId};

pub const NO_DOF: usize = usize::MAX;

/// Triangles on which a space lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    All,
    Regions(Vec<RegionId>),
}

impl Support {
    pub fn mask(&self, mesh: &Mesh2D) -> Vec<bool> {
        match self {
            Support::All => vec![true; mesh.n_triangles()],
            Support::Regions(ids) => mesh.triangles().iter().map(|t| ids.contains(&t.region)).collect(),
        }
    }

    pub fn contains(&self, region: RegionId) -> bool {
        match self {
            Support::All => true,
            Support::Regions(ids) => ids.contains(&region),
        }
    }
}

/// Edges with exactly one adjacent triangle inside `mask`.
pub fn support_boundary_edges(mesh: &Mesh2D, mask: &[bool]) -> Vec<usize> {
    (0..mesh.n_edges())
        .filter(|&e| mesh.edge_triangles(e).filter(|&t| mask[t]).count() == 1)
        .collect()
}

/// Shared bookkeeping: per-triangle local→global maps plus entity offsets.
#[derive(Clone, Debug, PartialEq)]
struct DofTable {
    mask: Vec<bool>,
    local: usize,
    tri_dofs: Vec<usize>,
    n_dofs: usize,
}

impl DofTable {
    fn dofs(&self, t: usize) -> Option<&[usize]> {
        if self.mask[t] {
            Some(&self.tri_dofs[t * self.local..(t + 1) * self.local])
        } else {
            None
        }
    }
}

/// Element geometry: barycentric gradients, area, orientation, vertex coordinates.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub coords: [[f64; 2]; 3],
    pub grads: [[f64; 2]; 3],
    pub area: f64,
    pub flips: [bool; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh2D, t: usize) -> Self {
        let coords = mesh.triangle_coords(t);
        let (grads, area) = barycentric_gradients(coords);
        ElementGeometry { coords, grads, area, flips: edge_flips(mesh.triangles()[t].v) }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let c = &self.coords;
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }
}

/// Continuous hierarchical space of order `m ∈ {1, 2, 3}`.
///
/// Global numbering: support vertices, then `m − 1` DOFs per support edge,
/// then interior DOFs per support triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpace {
    order: usize,
    support: Support,
    table: DofTable,
    vertex_dof: Vec<usize>,
    edge_dof: Vec<usize>,
}

impl ScalarSpace {
    pub fn new(mesh: &Mesh2D, order: usize, support: Support) -> Result<Self> {
        if !(1..=MAX_SCALAR_ORDER).contains(&order) {
            return invalid(format!("scalar order {order} outside 1..={MAX_SCALAR_ORDER}"));
        }
        let mask = support.mask(mesh);
        if !mask.iter().any(|&b| b) {
            return invalid("scalar space support is empty");
        }
        let mut vertex_dof = vec![NO_DOF; mesh.n_vertices()];
        let mut edge_used = vec![false; mesh.n_edges()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if mask[t] {
                for &v in &tri.v {
                    vertex_dof[v] = 0;
                }
                for e in mesh.triangle_edges(t) {
                    edge_used[e] = true;
                }
            }
        }
        let mut n = 0;
        for d in vertex_dof.iter_mut() {
            if *d == 0 {
                *d = n;
                n += 1;
            }
        }
        let per_edge = order - 1;
        let mut edge_dof = vec![NO_DOF; mesh.n_edges()];
        if per_edge > 0 {
            for (e, used) in edge_used.iter().enumerate() {
                if *used {
                    edge_dof[e] = n;
                    n += per_edge;
                }
            }
        }
        let per_cell = scalar_cell_count(order);
        let local = scalar_local_count(order);
        let mut tri_dofs = vec![NO_DOF; local * mesh.n_triangles()];
        for t in 0..mesh.n_triangles() {
            if !mask[t] {
                continue;
            }
            let tri = mesh.triangles()[t];
            let te = mesh.triangle_edges(t);
            let d = &mut tri_dofs[t * local..(t + 1) * local];
            for i in 0..3 {
                d[i] = vertex_dof[tri.v[i]];
            }
            // per-edge blocks are grouped by degree in the local numbering
            for j in 0..per_edge {
                for (e, &ge) in te.iter().enumerate() {
                    d[3 + 3 * j + e] = edge_dof[ge] + j;
                }
            }
            for c in 0..per_cell {
                d[3 + 3 * per_edge + c] = n;
                n += 1;
            }
        }
        Ok(ScalarSpace { order, support, table: DofTable { mask, local, tri_dofs, n_dofs: n }, vertex_dof, edge_dof })
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn support(&self) -> &Support {
        &self.support
    }
    pub fn n_dofs(&self) -> usize {
        self.table.n_dofs
    }
    pub fn n_local(&self) -> usize {
        self.table.local
    }
    pub fn mask(&self) -> &[bool] {
        &self.table.mask
    }
    pub fn in_support(&self, t: usize) -> bool {
        self.table.mask[t]
    }
    /// Local→global map of a triangle, `None` outside the support.
    pub fn triangle_dofs(&self, t: usize) -> Option<&[usize]> {
        self.table.dofs(t)
    }
    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        Some(self.vertex_dof[v]).filter(|&d| d != NO_DOF)
    }
    /// Edge DOFs (degree 2, then degree 3) of a global edge.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        match self.edge_dof[e] {
            NO_DOF => Vec::new(),
            s => (s..s + self.order - 1).collect(),
        }
    }
    pub fn eval(&self, geo: &ElementGeometry, l: [f64; 3]) -> ScalarValues {
        scalar_basis(self.order, l, geo.grads, geo.flips)
    }
}

/// Tangentially continuous hierarchical edge space of order `k ∈ {0, 1, 2}`.
///
/// Global numbering: `k + 1` DOFs per support edge (Whitney first), then
/// interior DOFs per support triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpace {
    order: usize,
    support: Support,
    table: DofTable,
    edge_dof: Vec<usize>,
}

impl EdgeSpace {
    pub fn new(mesh: &Mesh2D, order: usize, support: Support) -> Result<Self> {
        if order > MAX_EDGE_ORDER {
            return invalid(format!("edge order {order} outside 0..={MAX_EDGE_ORDER}"));
        }
        let mask = support.mask(mesh);
        if !mask.iter().any(|&b| b) {
            return invalid("edge space support is empty");
        }
        let per_edge = order + 1;
        let mut edge_dof = vec![NO_DOF; mesh.n_edges()];
        let mut n = 0;
        let mut edge_used = vec![false; mesh.n_edges()];
        for t in 0..mesh.n_triangles() {
            if mask[t] {
                for e in mesh.triangle_edges(t) {
                    edge_used[e] = true;
                }
            }
        }
        for (e, used) in edge_used.iter().enumerate() {
            if *used {
                edge_dof[e] = n;
                n += per_edge;
            }
        }
        let per_cell = edge_cell_count(order);
        let local = edge_local_count(order);
        let mut tri_dofs = vec![NO_DOF; local * mesh.n_triangles()];
        for t in 0..mesh.n_triangles() {
            if !mask[t] {
                continue;
            }
            let te = mesh.triangle_edges(t);
            let d = &mut tri_dofs[t * local..(t + 1) * local];
            for (e, &ge) in te.iter().enumerate() {
                for j in 0..per_edge {
                    d[per_edge * e + j] = edge_dof[ge] + j;
                }
            }
            for c in 0..per_cell {
                d[3 * per_edge + c] = n;
                n += 1;
            }
        }
        Ok(EdgeSpace { order, support, table: DofTable { mask, local, tri_dofs, n_dofs: n }, edge_dof })
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn support(&self) -> &Support {
        &self.support
    }
    pub fn n_dofs(&self) -> usize {
        self.table.n_dofs
    }
    pub fn n_local(&self) -> usize {
        self.table.local
    }
    pub fn mask(&self) -> &[bool] {
        &self.table.mask
    }
    pub fn in_support(&self, t: usize) -> bool {
        self.table.mask[t]
    }
    pub fn triangle_dofs(&self, t: usize) -> Option<&[usize]> {
        self.table.dofs(t)
    }
    /// DOFs of a global edge: Whitney, then gradient functions by degree.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        match self.edge_dof[e] {
            NO_DOF => Vec::new(),
            s => (s..s + self.order + 1).collect(),
        }
    }
    pub fn eval(&self, geo: &ElementGeometry, l: [f64; 3]) -> VectorValues {
        edge_basis(self.order, l, geo.grads, geo.flips)
    }
}

/// A space of either kind.
#[derive(Clone, Debug, PartialEq)]
pub enum FeSpace {
    Scalar(ScalarSpace),
    Edge(EdgeSpace),
}

impl FeSpace {
    pub fn n_dofs(&self) -> usize {
        match self {
            FeSpace::Scalar(s) => s.n_dofs(),
            FeSpace::Edge(s) => s.n_dofs(),
        }
    }
    pub fn mask(&self) -> &[bool] {
        match self {
            FeSpace::Scalar(s) => s.mask(),
            FeSpace::Edge(s) => s.mask(),
        }
    }
    pub fn triangle_dofs(&self, t: usize) -> Option<&[usize]> {
        match self {
            FeSpace::Scalar(s) => s.triangle_dofs(t),
            FeSpace::Edge(s) => s.triangle_dofs(t),
        }
    }
    pub fn is_scalar(&self) -> bool {
        matches!(self, FeSpace::Scalar(_))
    }
    /// Polynomial degree of the basis functions.
    pub fn degree(&self) -> usize {
        match self {
            FeSpace::Scalar(s) => s.order(),
            FeSpace::Edge(s) => s.order() + 1,
        }
    }
}

/// Value and gradient of a scalar FE function (coefficients `x` of this
/// space only) at barycentric point `l` of triangle `t`.
pub fn scalar_field_at(
    space: &ScalarSpace,
    mesh: &Mesh2D,
    x: &[num_complex::Complex64],
    t: usize,
    l: [f64; 3],
) -> Option<(num_complex::Complex64, [num_complex::Complex64; 2])> {
    let dofs = space.triangle_dofs(t)?;
    let geo = ElementGeometry::new(mesh, t);
    let b = space.eval(&geo, l);
    let mut v = num_complex::Complex64::new(0.0, 0.0);
    let mut g = [v; 2];
    for i in 0..b.n {
        let c = x[dofs[i]];
        v += c * b.val[i];
        g[0] += c * b.grad[i][0];
        g[1] += c * b.grad[i][1];
    }
    Some((v, g))
}

/// Value and curl of an edge FE function at barycentric point `l` of triangle `t`.
pub fn edge_field_at(
    space: &EdgeSpace,
    mesh: &Mesh2D,
    x: &[num_complex::Complex64],
    t: usize,
    l: [f64; 3],
) -> Option<([num_complex::Complex64; 2], num_complex::Complex64)> {
    let dofs = space.triangle_dofs(t)?;
    let geo = ElementGeometry::new(mesh, t);
    let b = space.eval(&geo, l);
    let mut v = [num_complex::Complex64::new(0.0, 0.0); 2];
    let mut c = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..b.n {
        let coef = x[dofs[i]];
        v[0] += coef * b.val[i][0];
        v[1] += coef * b.val[i][1];
        c += coef * b.curl[i];
    }
    Some((v, c))
}
