//! Ready-made problems: the laminated strip benchmark and the machine segment.

use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{invalid, Result};
use crate::excitation::machine_conductors;
use crate::mesh::{
    make_segment_mesh, make_tensor_mesh, BoundaryTag, RectTags, RegionId, RegionKind, RegionSpec, SegmentGeometry, SegmentMesh,
};
use crate::microshape::LaminationSpec;

/// Lateral node distribution of the strip mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    /// Chebyshev–Lobatto spacing, refined towards both lateral edges where
    /// the edge effect lives.
    Cosine,
}

/// Cross-section `[0, width] x [0, height]` of a laminated strip. The stack
/// direction is z; the applied field points along y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StripSpec {
    pub width: f64,
    /// extent along the field; defaults to `width / 20`
    pub height: Option<f64>,
    pub lamination: LaminationSpec,
    pub sigma: f64,
    pub mu_r: f64,
    pub nx: usize,
    pub ny: usize,
    pub grading: Grading,
}

impl Default for StripSpec {
    fn default() -> Self {
        StripSpec {
            width: 10e-3,
            height: None,
            lamination: LaminationSpec { d: 0.5e-3, k_f: 0.95 },
            sigma: 2.08e6,
            mu_r: 1000.0,
            nx: 40,
            ny: 1,
            grading: Grading::Cosine,
        }
    }
}

impl StripSpec {
    pub const REGION: RegionId = 1;

    pub fn height(&self) -> f64 {
        self.height.unwrap_or(self.width / 20.0)
    }
}

/// Lateral node coordinates of the strip mesh.
pub fn strip_x_nodes(width: f64, nx: usize, grading: Grading) -> Vec<f64> {
    (0..=nx)
        .map(|i| {
            let t = i as f64 / nx as f64;
            match grading {
                Grading::Uniform => width * t,
                Grading::Cosine => 0.5 * width * (1.0 - (std::f64::consts::PI * t).cos()),
            }
        })
        .collect()
}

/// The strip benchmark: one laminated region, every side tagged `gamma_h`.
pub fn strip_problem(spec: &StripSpec) -> Result<Problem> {
    if !(spec.width > 0.0) || !(spec.height() > 0.0) {
        return invalid("strip width and height must be positive");
    }
    if spec.nx < 2 || spec.ny < 1 {
        return invalid("strip mesh needs nx >= 2 and ny >= 1");
    }
    let xs = strip_x_nodes(spec.width, spec.nx, spec.grading);
    let h = spec.height();
    let ys: Vec<f64> = (0..=spec.ny).map(|j| h * j as f64 / spec.ny as f64).collect();
    let mesh = make_tensor_mesh(&xs, &ys, StripSpec::REGION, RectTags::uniform(BoundaryTag::GammaH))?;
    let region = RegionSpec { id: StripSpec::REGION, kind: RegionKind::Laminated, sigma: spec.sigma, mu_r: spec.mu_r };
    Problem::new(mesh, vec![region], spec.lamination, Vec::new())
}

/// Machine segment with its generated mesh.
#[derive(Clone, Debug)]
pub struct SegmentProblem {
    pub problem: Problem,
    pub segment: SegmentMesh,
}

/// The parametric machine segment: laminated rotor and stator, air gap,
/// round conductors. The excitation is the Biot–Savart field of the
/// conductors of the complete anti-periodic machine, so that the segment
/// cuts carry exactly the symmetry conditions their tags state.
pub fn segment_problem(geo: &SegmentGeometry, lamination: LaminationSpec, sigma: f64, mu_r: f64) -> Result<SegmentProblem> {
    use crate::mesh::segment_regions::*;
    let segment = make_segment_mesh(geo)?;
    let mut regions = vec![
        RegionSpec { id: ROTOR, kind: RegionKind::Laminated, sigma, mu_r },
        RegionSpec { id: STATOR, kind: RegionKind::Laminated, sigma, mu_r },
        RegionSpec { id: GAP, kind: RegionKind::Air, sigma: 0.0, mu_r: 1.0 },
    ];
    for &(_, id) in &segment.meshed {
        regions.push(RegionSpec { id, kind: RegionKind::Conductor, sigma: 0.0, mu_r: 1.0 });
    }
    let conductors = machine_conductors(geo, true)?;
    let problem = Problem::new(segment.mesh.clone(), regions, lamination, conductors)?;
    Ok(SegmentProblem { problem, segment })
}
