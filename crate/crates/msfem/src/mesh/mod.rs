//! Tagged 2D triangular meshes of the machine cross-section.

mod msh;
mod rect;
mod segment;
mod vtk;

pub use msh::{read_msh, write_msh, PhysicalMap, PhysicalTarget};
pub use rect::{make_rect_mesh, make_tensor_mesh, RectTags};
pub use segment::{make_segment_mesh, ConductorSlot, SegmentGeometry, SegmentMesh, SegmentTags};
pub use vtk::{write_vtk, VtkData, VtkField, VtkLocation};

/// Region ids used by [`make_segment_mesh`].
pub mod segment_regions {
    pub use super::segment::{CONDUCTOR_BASE, GAP, ROTOR, STATOR};
}

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub type RegionId = u32;

/// Boundary condition class of a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    /// magnetic field tangential trace prescribed (periodic cut / far side)
    GammaH,
    /// current density normal trace prescribed (no current leaves)
    GammaJ,
    /// flux density normal trace prescribed
    GammaB,
    /// electric field tangential trace prescribed (symmetry plane on iron)
    GammaE,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [BoundaryTag::GammaH, BoundaryTag::GammaJ, BoundaryTag::GammaB, BoundaryTag::GammaE];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::GammaH => "gamma_h",
            BoundaryTag::GammaJ => "gamma_j",
            BoundaryTag::GammaB => "gamma_b",
            BoundaryTag::GammaE => "gamma_e",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Diagnostic sub-label attached by the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideLabel {
    None,
    Bottom,
    Right,
    Top,
    Left,
    Inner,
    Outer,
    Gap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Laminated,
    Air,
    Conductor,
}

/// Material data of one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub id: RegionId,
    pub kind: RegionKind,
    /// electric conductivity [S/m]
    pub sigma: f64,
    /// relative permeability
    pub mu_r: f64,
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidProblem(format!("region {}: sigma must be >= 0", self.id)));
        }
        if !(self.mu_r > 0.0) || !self.mu_r.is_finite() {
            return Err(Error::InvalidProblem(format!("region {}: mu_r must be > 0", self.id)));
        }
        if self.kind == RegionKind::Laminated && self.sigma == 0.0 {
            return Err(Error::InvalidProblem(format!("region {}: laminated iron needs sigma > 0", self.id)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub v: [usize; 3],
    pub region: RegionId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: BoundaryTag,
    pub label: SideLabel,
}

/// Local edges of a triangle, as pairs of local vertex numbers.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

const NO_TRI: usize = usize::MAX;

/// Immutable triangular mesh with region ids and tagged boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    boundary: Vec<BoundaryEdge>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<[usize; 2]>,
    edge_boundary: Vec<Option<usize>>,
    sorted_edges: Vec<([usize; 2], usize)>,
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh2D {
    /// Validate and build the edge topology.
    ///
    /// Every edge with a single adjacent triangle must carry exactly one
    /// boundary record, and boundary records may only sit on such edges.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<Triangle>, boundary: Vec<BoundaryEdge>) -> Result<Self> {
        let nv = vertices.len();
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.v.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.v.map(|v| vertices[v]);
            if !(signed_area(a, b, c) > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} is not counter-clockwise or is degenerate")));
            }
            let mut te = [0usize; 3];
            for (k, le) in LOCAL_EDGES.iter().enumerate() {
                let (p, q) = (tri.v[le[0]], tri.v[le[1]]);
                let key = [p.min(q), p.max(q)];
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tris.push([NO_TRI, NO_TRI]);
                    edges.len() - 1
                });
                let slot = &mut edge_tris[e];
                if slot[0] == NO_TRI {
                    slot[0] = t;
                } else if slot[1] == NO_TRI {
                    slot[1] = t;
                } else {
                    return Err(Error::InvalidMesh(format!("edge ({}, {}) shared by more than two triangles", key[0], key[1])));
                }
                te[k] = e;
            }
            tri_edges.push(te);
        }
        let mut edge_boundary = vec![None; edges.len()];
        for (b, be) in boundary.iter().enumerate() {
            let key = [be.v[0].min(be.v[1]), be.v[0].max(be.v[1])];
            let e = *lookup
                .get(&key)
                .ok_or_else(|| Error::InvalidMesh(format!("boundary edge ({}, {}) is not a mesh edge", key[0], key[1])))?;
            if edge_tris[e][1] != NO_TRI {
                return Err(Error::InvalidMesh(format!("boundary edge ({}, {}) is an interior edge", key[0], key[1])));
            }
            if edge_boundary[e].replace(b).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge ({}, {}) tagged twice", key[0], key[1])));
            }
        }
        if let Some(e) = (0..edges.len()).find(|&e| edge_tris[e][1] == NO_TRI && edge_boundary[e].is_none()) {
            return Err(Error::InvalidMesh(format!("boundary edge ({}, {}) has no tag", edges[e][0], edges[e][1])));
        }
        let mut sorted_edges: Vec<([usize; 2], usize)> = edges.iter().copied().zip(0..).collect();
        sorted_edges.sort_unstable();
        Ok(Mesh2D { vertices, triangles, boundary, edges, tri_edges, edge_tris, edge_boundary, sorted_edges })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }
    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }
    /// Global edges, lower vertex index first.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Global edge numbers of the local edges `(0,1), (1,2), (2,0)`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// Triangles adjacent to an edge (one or two).
    pub fn edge_triangles(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_tris[e].iter().copied().filter(|&t| t != NO_TRI)
    }

    /// Boundary record of an edge, if it lies on the outer boundary.
    pub fn edge_boundary(&self, e: usize) -> Option<&BoundaryEdge> {
        self.edge_boundary[e].map(|b| &self.boundary[b])
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.sorted_edges
            .binary_search_by(|probe| probe.0.cmp(&key))
            .ok()
            .map(|k| self.sorted_edges[k].1)
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].v.map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    /// Sorted, unique region ids present in the mesh.
    pub fn region_ids(&self) -> Vec<RegionId> {
        let mut ids: Vec<RegionId> = self.triangles.iter().map(|t| t.region).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary.iter().any(|b| b.tag == tag)
    }

    /// `V - E + F`
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].min(p[1]);
            bb[2] = bb[2].max(p[0]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    /// Canonical byte serialization (used for content hashes).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.vertices {
            out.extend_from_slice(&p[0].to_le_bytes());
            out.extend_from_slice(&p[1].to_le_bytes());
        }
        for t in &self.triangles {
            for v in t.v {
                out.extend_from_slice(&(v as u64).to_le_bytes());
            }
            out.extend_from_slice(&t.region.to_le_bytes());
        }
        for b in &self.boundary {
            out.extend_from_slice(&(b.v[0] as u64).to_le_bytes());
            out.extend_from_slice(&(b.v[1] as u64).to_le_bytes());
            out.push(b.tag as u8);
        }
        out
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangle_coords(t);
        let area = signed_area(a, b, c);
        let l0 = signed_area(p, b, c) / area;
        let l1 = signed_area(a, p, c) / area;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Build a point-location index.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }
}

/// Uniform-grid bucket index for locating points in triangles.
pub struct PointLocator<'m> {
    mesh: &'m Mesh2D,
    origin: [f64; 2],
    cell: [f64; 2],
    n: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'m> PointLocator<'m> {
    fn new(mesh: &'m Mesh2D) -> Self {
        let bb = mesh.bounding_box();
        let nt = mesh.n_triangles().max(1);
        let side = (nt as f64).sqrt().ceil().max(1.0) as usize;
        let n = [side, side];
        let w = ((bb[2] - bb[0]) / n[0] as f64).max(f64::MIN_POSITIVE);
        let h = ((bb[3] - bb[1]) / n[1] as f64).max(f64::MIN_POSITIVE);
        let mut buckets = vec![Vec::new(); n[0] * n[1]];
        let clamp = |v: f64, k: usize| (v.max(0.0) as usize).min(k - 1);
        for t in 0..mesh.n_triangles() {
            let c = mesh.triangle_coords(t);
            let xmin = c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let xmax = c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let ymin = c.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let ymax = c.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let i0 = clamp((xmin - bb[0]) / w, n[0]);
            let i1 = clamp((xmax - bb[0]) / w, n[0]);
            let j0 = clamp((ymin - bb[1]) / h, n[1]);
            let j1 = clamp((ymax - bb[1]) / h, n[1]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * n[0] + i].push(t);
                }
            }
        }
        PointLocator { mesh, origin: [bb[0], bb[1]], cell: [w, h], n, buckets }
    }

    /// Triangle containing `p` (with a small tolerance) and the barycentric
    /// coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let i = ((p[0] - self.origin[0]) / self.cell[0]).floor();
        let j = ((p[1] - self.origin[1]) / self.cell[1]).floor();
        let tol = 1e-10;
        let fi = i.clamp(0.0, (self.n[0] - 1) as f64) as usize;
        let fj = j.clamp(0.0, (self.n[1] - 1) as f64) as usize;
        if i < -1.0 || j < -1.0 || i > self.n[0] as f64 || j > self.n[1] as f64 {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[fj * self.n[0] + fi] {
            let l = self.mesh.barycentric(t, p);
            let m = l[0].min(l[1]).min(l[2]);
            if m >= -tol && best.map_or(true, |b| m > b.2) {
                best = Some((t, l, m));
            }
        }
        best.map(|(t, l, _)| (t, l))
    }
}
