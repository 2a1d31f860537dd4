//! Parametric annular segment: rotor iron, air gap, stator iron and round
//! conductors embedded in the stator, meshed by a constrained Delaunay
//! triangulation of a polar point grid.

use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{BoundaryEdge, BoundaryTag, Mesh2D, RegionId, SideLabel, Triangle};
use crate::error::{invalid, Error, Result};

pub const ROTOR: RegionId = 1;
pub const GAP: RegionId = 2;
pub const STATOR: RegionId = 3;
/// Conductor `i` of the geometry gets region id `CONDUCTOR_BASE + i`.
pub const CONDUCTOR_BASE: RegionId = 10;

/// A round conductor at polar position `(r, theta_deg)` carrying the complex
/// current `current[0] + j current[1]` [A] in +z direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorSlot {
    pub r: f64,
    pub theta_deg: f64,
    pub radius: f64,
    pub current: [f64; 2],
}

impl ConductorSlot {
    pub fn center(&self) -> [f64; 2] {
        let t = self.theta_deg.to_radians();
        [self.r * t.cos(), self.r * t.sin()]
    }
}

/// Tags of the outer boundary pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentTags {
    /// cut at the largest angle; also the cut at the smallest angle of a full segment
    pub cut: BoundaryTag,
    /// symmetry cut (half segment) on laminated iron
    pub symmetry_iron: BoundaryTag,
    /// symmetry cut (half segment) on air and conductors
    pub symmetry_air: BoundaryTag,
    /// inner and outer arcs
    pub arcs: BoundaryTag,
}

impl Default for SegmentTags {
    fn default() -> Self {
        SegmentTags {
            cut: BoundaryTag::GammaH,
            symmetry_iron: BoundaryTag::GammaE,
            symmetry_air: BoundaryTag::GammaB,
            arcs: BoundaryTag::GammaB,
        }
    }
}

/// Geometry and subdivision of the segment. Lengths in metres.
///
/// The half segment covers `0 <= theta <= span/2`; the full segment
/// `-span/2 <= theta <= span/2`. `n_theta` counts angular divisions of the
/// full span (the half segment uses `n_theta / 2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentGeometry {
    pub rotor_inner: f64,
    pub rotor_outer: f64,
    pub stator_inner: f64,
    pub stator_outer: f64,
    pub span_deg: f64,
    pub conductors: Vec<ConductorSlot>,
    pub n_theta: usize,
    pub n_rotor: usize,
    pub n_gap: usize,
    pub n_stator: usize,
    pub n_conductor: usize,
    pub full: bool,
    pub tags: SegmentTags,
}

impl Default for SegmentGeometry {
    fn default() -> Self {
        SegmentGeometry {
            rotor_inner: 0.015,
            rotor_outer: 0.030,
            stator_inner: 0.031,
            stator_outer: 0.045,
            span_deg: 30.0,
            conductors: vec![
                ConductorSlot { r: 0.034, theta_deg: 7.5, radius: 0.002, current: [100.0, 0.0] },
                ConductorSlot { r: 0.034, theta_deg: -7.5, radius: 0.002, current: [-100.0, 0.0] },
            ],
            n_theta: 40,
            n_rotor: 10,
            n_gap: 2,
            n_stator: 14,
            n_conductor: 24,
            full: false,
            tags: SegmentTags::default(),
        }
    }
}

impl SegmentGeometry {
    pub fn theta_range(&self) -> (f64, f64) {
        let half = 0.5 * self.span_deg.to_radians();
        if self.full {
            (-half, half)
        } else {
            (0.0, half)
        }
    }

    /// The same geometry with every subdivision count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> SegmentGeometry {
        SegmentGeometry {
            n_theta: self.n_theta * factor,
            n_rotor: self.n_rotor * factor,
            n_gap: self.n_gap * factor,
            n_stator: self.n_stator * factor,
            n_conductor: self.n_conductor * factor,
            ..self.clone()
        }
    }

    /// Indices of the conductors lying inside the meshed angular range.
    pub fn meshed_conductors(&self) -> Vec<usize> {
        let (t0, t1) = self.theta_range();
        (0..self.conductors.len())
            .filter(|&i| {
                let t = self.conductors[i].theta_deg.to_radians();
                t > t0 && t < t1
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let r = [self.rotor_inner, self.rotor_outer, self.stator_inner, self.stator_outer];
        if !(r[0] > 0.0) || r.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("radii must satisfy 0 < rotor_inner < rotor_outer < stator_inner < stator_outer");
        }
        if !(self.span_deg > 0.0 && self.span_deg < 180.0) {
            return invalid("span_deg must lie in (0, 180)");
        }
        if self.n_theta < 2 || self.n_theta % 2 != 0 {
            return invalid("n_theta must be even and at least 2");
        }
        if self.n_rotor == 0 || self.n_gap == 0 || self.n_stator == 0 {
            return invalid("radial subdivisions must be at least 1");
        }
        if self.n_conductor < 6 {
            return invalid("n_conductor must be at least 6");
        }
        for (i, c) in self.conductors.iter().enumerate() {
            if !(c.radius > 0.0) || !(c.r > 0.0) {
                return invalid(format!("conductor {i}: radius and position must be positive"));
            }
        }
        for i in 0..self.conductors.len() {
            for j in i + 1..self.conductors.len() {
                let (a, b) = (&self.conductors[i], &self.conductors[j]);
                let (p, q) = (a.center(), b.center());
                if (p[0] - q[0]).hypot(p[1] - q[1]) < a.radius + b.radius {
                    return invalid(format!("conductors {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    }

    fn radial_nodes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let parts = [
            (self.rotor_inner, self.rotor_outer, self.n_rotor),
            (self.rotor_outer, self.stator_inner, self.n_gap),
            (self.stator_inner, self.stator_outer, self.n_stator),
        ];
        for (k, &(a, b, n)) in parts.iter().enumerate() {
            let first = if k == 0 { 0 } else { 1 };
            for i in first..=n {
                out.push(a + (b - a) * i as f64 / n as f64);
            }
        }
        out
    }
}

/// Generated segment mesh plus bookkeeping for the excitation.
#[derive(Clone, Debug)]
pub struct SegmentMesh {
    pub mesh: Mesh2D,
    pub geometry: SegmentGeometry,
    /// `(conductor index, region id)` of the meshed conductor disks
    pub meshed: Vec<(usize, RegionId)>,
}

struct Disk {
    center: [f64; 2],
    radius: f64,
    clearance: f64,
    polygon: Vec<[f64; 2]>,
    region: RegionId,
}

pub fn make_segment_mesh(geo: &SegmentGeometry) -> Result<SegmentMesh> {
    geo.validate()?;
    let (t0, t1) = geo.theta_range();
    let nt = if geo.full { geo.n_theta } else { geo.n_theta / 2 };
    let dtheta = (t1 - t0) / nt as f64;
    let thetas: Vec<f64> = (0..=nt).map(|j| t0 + (t1 - t0) * j as f64 / nt as f64).collect();
    let radii = geo.radial_nodes();

    let annuli = [
        (geo.rotor_inner, geo.rotor_outer, geo.n_rotor),
        (geo.rotor_outer, geo.stator_inner, geo.n_gap),
        (geo.stator_inner, geo.stator_outer, geo.n_stator),
    ];
    let mut disks = Vec::new();
    let mut meshed = Vec::new();
    for i in geo.meshed_conductors() {
        let c = &geo.conductors[i];
        let Some(&(ra, rb, n)) = annuli.iter().find(|(ra, rb, _)| c.r > *ra && c.r < *rb) else {
            return invalid(format!("conductor {i} does not lie inside the segment"));
        };
        let h = ((rb - ra) / n as f64).max(c.r * dtheta);
        let clearance = 0.5 * h;
        let reach = c.radius + clearance;
        let t = c.theta_deg.to_radians();
        if c.r - reach <= ra || c.r + reach >= rb {
            return invalid(format!("conductor {i} (with mesh clearance {clearance:.3e} m) crosses a region boundary"));
        }
        if c.r * (t - t0).sin() <= reach || c.r * (t1 - t).sin() <= reach {
            return invalid(format!("conductor {i} (with mesh clearance {clearance:.3e} m) crosses a radial cut"));
        }
        let center = c.center();
        let polygon = (0..geo.n_conductor)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / geo.n_conductor as f64;
                [center[0] + c.radius * a.cos(), center[1] + c.radius * a.sin()]
            })
            .collect();
        let region = CONDUCTOR_BASE + i as RegionId;
        disks.push(Disk { center, radius: c.radius, clearance, polygon, region });
        meshed.push((i, region));
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, p: [f64; 2]| {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::InvalidMesh(format!("triangulation failed: {e:?}")))
    };

    // polar grid, handles indexed [radius][theta]
    let mut grid = vec![vec![None; thetas.len()]; radii.len()];
    for (i, &r) in radii.iter().enumerate() {
        for (j, &t) in thetas.iter().enumerate() {
            let p = [r * t.cos(), r * t.sin()];
            let blocked = disks
                .iter()
                .any(|d| (p[0] - d.center[0]).hypot(p[1] - d.center[1]) < d.radius + d.clearance);
            if !blocked {
                grid[i][j] = Some(insert(&mut cdt, p)?);
            }
        }
    }
    let mut disk_handles = Vec::new();
    for d in &disks {
        insert(&mut cdt, d.center)?;
        let n_inner = d.polygon.len() / 2;
        for k in 0..n_inner {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_inner as f64;
            insert(&mut cdt, [d.center[0] + 0.5 * d.radius * a.cos(), d.center[1] + 0.5 * d.radius * a.sin()])?;
        }
        let hs = d.polygon.iter().map(|&p| insert(&mut cdt, p)).collect::<Result<Vec<_>>>()?;
        disk_handles.push(hs);
    }

    let mut constraints = Vec::new();
    let arc_rows: Vec<usize> = {
        let mut rows = vec![0, geo.n_rotor, geo.n_rotor + geo.n_gap, radii.len() - 1];
        rows.dedup();
        rows
    };
    for &i in &arc_rows {
        for j in 0..nt {
            match (grid[i][j], grid[i][j + 1]) {
                (Some(a), Some(b)) => constraints.push((a, b)),
                _ => return Err(Error::InvalidMesh("an arc node was removed by a conductor".into())),
            }
        }
    }
    for j in [0, nt] {
        for i in 0..radii.len() - 1 {
            match (grid[i][j], grid[i + 1][j]) {
                (Some(a), Some(b)) => constraints.push((a, b)),
                _ => return Err(Error::InvalidMesh("a cut node was removed by a conductor".into())),
            }
        }
    }
    for hs in &disk_handles {
        for k in 0..hs.len() {
            constraints.push((hs[k], hs[(k + 1) % hs.len()]));
        }
    }
    for (a, b) in constraints {
        if cdt.try_add_constraint(a, b).is_empty() && !cdt.exists_constraint(a, b) {
            return Err(Error::InvalidMesh("conflicting constraint edges in segment geometry".into()));
        }
    }

    // collect triangles, classify by centroid
    let positions: Vec<[f64; 2]> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut used = vec![usize::MAX; positions.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let mut v = face.vertices().map(|h| h.fix().index());
        let p = v.map(|k| positions[k]);
        let cx = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
        let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
        let rc = cx.hypot(cy);
        if rc < geo.rotor_inner || rc > geo.stator_outer {
            continue;
        }
        // the convex hull also contains slivers between the (rounded,
        // nearly collinear) nodes of the straight cuts; they lie outside
        let tc = cy.atan2(cx);
        let lmax = (0..3)
            .map(|k| (p[k][0] - p[(k + 1) % 3][0]).hypot(p[k][1] - p[(k + 1) % 3][1]))
            .fold(0.0, f64::max);
        if tc < t0 - 1e-9 || tc > t1 + 1e-9 || super::signed_area(p[0], p[1], p[2]).abs() < 1e-10 * lmax * lmax {
            continue;
        }
        let region = if let Some(d) = disks.iter().find(|d| inside_convex(&d.polygon, [cx, cy])) {
            d.region
        } else if rc < geo.rotor_outer {
            ROTOR
        } else if rc < geo.stator_inner {
            GAP
        } else {
            STATOR
        };
        if super::signed_area(p[0], p[1], p[2]) < 0.0 {
            v.swap(1, 2);
        }
        let v = v.map(|k| {
            if used[k] == usize::MAX {
                used[k] = vertices.len();
                vertices.push(positions[k]);
            }
            used[k]
        });
        triangles.push(Triangle { v, region });
    }

    // tag the outer boundary
    let mut count = std::collections::HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for le in super::LOCAL_EDGES {
            let (a, b) = (tri.v[le[0]], tri.v[le[1]]);
            count.entry([a.min(b), a.max(b)]).or_insert_with(Vec::new).push((t, a, b));
        }
    }
    let mut open: Vec<_> = count.into_iter().filter(|(_, v)| v.len() == 1).map(|(_, v)| v[0]).collect();
    open.sort_unstable();
    let dr_min = annuli.iter().map(|(a, b, n)| (b - a) / *n as f64).fold(f64::INFINITY, f64::min);
    let mut boundary = Vec::with_capacity(open.len());
    for (t, a, b) in open {
        let (p, q) = (vertices[a], vertices[b]);
        let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let rm = m[0].hypot(m[1]);
        let tm = m[1].atan2(m[0]);
        let ang_tol = 1e-9;
        let on_line = |theta: f64| {
            let (ta, tb) = (p[1].atan2(p[0]), q[1].atan2(q[0]));
            (ta - theta).abs() < ang_tol && (tb - theta).abs() < ang_tol
        };
        let (tag, label) = if (rm - geo.rotor_inner).abs() < 0.25 * dr_min {
            (geo.tags.arcs, SideLabel::Inner)
        } else if (rm - geo.stator_outer).abs() < 0.25 * dr_min {
            (geo.tags.arcs, SideLabel::Outer)
        } else if on_line(t1) {
            (geo.tags.cut, SideLabel::Right)
        } else if on_line(t0) {
            if geo.full {
                (geo.tags.cut, SideLabel::Left)
            } else if matches!(triangles[t].region, ROTOR | STATOR) {
                (geo.tags.symmetry_iron, SideLabel::Left)
            } else {
                (geo.tags.symmetry_air, SideLabel::Gap)
            }
        } else {
            return Err(Error::InvalidMesh(format!(
                "unclassified boundary edge at r = {rm:.6e}, theta = {tm:.6e}"
            )));
        };
        boundary.push(BoundaryEdge { v: [a, b], tag, label });
    }
    let mesh = Mesh2D::new(vertices, triangles, boundary)?;
    Ok(SegmentMesh { mesh, geometry: geo.clone(), meshed })
}

fn inside_convex(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    (0..poly.len()).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
    })
}
