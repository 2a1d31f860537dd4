//! Legacy ASCII VTK unstructured-grid writer.

use num_complex::Complex64;
use std::fmt::Write as _;

use super::Mesh2D;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VtkLocation {
    Point,
    Cell,
}

#[derive(Clone, Debug)]
pub enum VtkData {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 3]>),
    ComplexScalar(Vec<Complex64>),
    ComplexVector(Vec<[Complex64; 3]>),
}

impl VtkData {
    fn len(&self) -> usize {
        match self {
            VtkData::Scalar(v) => v.len(),
            VtkData::Vector(v) => v.len(),
            VtkData::ComplexScalar(v) => v.len(),
            VtkData::ComplexVector(v) => v.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VtkField {
    pub name: String,
    pub location: VtkLocation,
    pub data: VtkData,
}

impl VtkField {
    pub fn new(name: impl Into<String>, location: VtkLocation, data: VtkData) -> Self {
        VtkField { name: name.into(), location, data }
    }
}

/// Complex fields are written as two arrays suffixed `_re` and `_im`.
pub fn write_vtk(mesh: &Mesh2D, title: &str, fields: &[VtkField]) -> Result<String> {
    for f in fields {
        let expected = match f.location {
            VtkLocation::Point => mesh.n_vertices(),
            VtkLocation::Cell => mesh.n_triangles(),
        };
        if f.data.len() != expected {
            return invalid(format!("field '{}' has {} values, expected {expected}", f.name, f.data.len()));
        }
        if f.name.is_empty() || f.name.contains(char::is_whitespace) {
            return invalid(format!("field name '{}' must be non-empty without whitespace", f.name));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles());
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t.v[0], t.v[1], t.v[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_triangles());
    for _ in mesh.triangles() {
        s.push_str("5\n");
    }
    for (loc, header, n) in [
        (VtkLocation::Point, "POINT_DATA", mesh.n_vertices()),
        (VtkLocation::Cell, "CELL_DATA", mesh.n_triangles()),
    ] {
        let group: Vec<&VtkField> = fields.iter().filter(|f| f.location == loc).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(s, "{header} {n}");
        for f in group {
            match &f.data {
                VtkData::Scalar(v) => scalars(&mut s, &f.name, v.iter().copied()),
                VtkData::Vector(v) => vectors(&mut s, &f.name, v.iter().copied()),
                VtkData::ComplexScalar(v) => {
                    scalars(&mut s, &format!("{}_re", f.name), v.iter().map(|z| z.re));
                    scalars(&mut s, &format!("{}_im", f.name), v.iter().map(|z| z.im));
                }
                VtkData::ComplexVector(v) => {
                    vectors(&mut s, &format!("{}_re", f.name), v.iter().map(|z| z.map(|c| c.re)));
                    vectors(&mut s, &format!("{}_im", f.name), v.iter().map(|z| z.map(|c| c.im)));
                }
            }
        }
    }
    Ok(s)
}

fn scalars(s: &mut String, name: &str, v: impl Iterator<Item = f64>) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for x in v {
        let _ = writeln!(s, "{x}");
    }
}

fn vectors(s: &mut String, name: &str, v: impl Iterator<Item = [f64; 3]>) {
    let _ = writeln!(s, "VECTORS {name} double");
    for x in v {
        let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
    }
}
