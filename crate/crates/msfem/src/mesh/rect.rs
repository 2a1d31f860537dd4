use super::{BoundaryEdge, BoundaryTag, Mesh2D, RegionId, SideLabel, Triangle};
use crate::error::{invalid, Result};

/// Boundary tag for each side of a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RectTags {
    pub bottom: BoundaryTag,
    pub right: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
}

impl RectTags {
    pub fn uniform(tag: BoundaryTag) -> Self {
        RectTags { bottom: tag, right: tag, top: tag, left: tag }
    }
}

/// Structured mesh of `[0, width] x [0, height]`; every cell is split along
/// the diagonal from its lower-left to its upper-right corner.
pub fn make_rect_mesh(width: f64, height: f64, nx: usize, ny: usize, region: RegionId, tags: RectTags) -> Result<Mesh2D> {
    if !(width > 0.0) || !(height > 0.0) || !width.is_finite() || !height.is_finite() {
        return invalid(format!("rectangle dimensions must be positive, got {width} x {height}"));
    }
    if nx == 0 || ny == 0 {
        return invalid("rectangle subdivisions must be at least 1");
    }
    let xs: Vec<f64> = (0..=nx).map(|i| width * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| height * j as f64 / ny as f64).collect();
    make_tensor_mesh(&xs, &ys, region, tags)
}

/// Tensor-product mesh through the strictly increasing node coordinates
/// `xs` and `ys`, split like [`make_rect_mesh`].
pub fn make_tensor_mesh(xs: &[f64], ys: &[f64], region: RegionId, tags: RectTags) -> Result<Mesh2D> {
    let increasing = |v: &[f64]| v.len() >= 2 && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1]);
    if !increasing(xs) || !increasing(ys) {
        return invalid("tensor mesh coordinates must be finite, strictly increasing, at least two per axis");
    }
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in ys {
        for &x in xs {
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push(Triangle { v: [a, b, c], region });
            triangles.push(Triangle { v: [a, c, d], region });
        }
    }
    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary.push(BoundaryEdge { v: [id(i, 0), id(i + 1, 0)], tag: tags.bottom, label: SideLabel::Bottom });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { v: [id(nx, j), id(nx, j + 1)], tag: tags.right, label: SideLabel::Right });
    }
    for i in (0..nx).rev() {
        boundary.push(BoundaryEdge { v: [id(i + 1, ny), id(i, ny)], tag: tags.top, label: SideLabel::Top });
    }
    for j in (0..ny).rev() {
        boundary.push(BoundaryEdge { v: [id(0, j + 1), id(0, j)], tag: tags.left, label: SideLabel::Left });
    }
    Mesh2D::new(vertices, triangles, boundary)
}
