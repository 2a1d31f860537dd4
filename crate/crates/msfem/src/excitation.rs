//! Field of straight, z-infinite round conductors.
//!
//! A conductor of radius `R` carrying the phasor current `I` (+z direction)
//! produces the azimuthal field `I r / (2π R²)` inside and `I / (2π r)`
//! outside; fields of several conductors superpose.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::mesh::SegmentGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductorSpec {
    pub center: [f64; 2],
    pub radius: f64,
    /// peak current phasor [A], positive along +z
    pub current: Complex64,
}

impl ConductorSpec {
    pub fn new(center: [f64; 2], radius: f64, current: Complex64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return invalid(format!("conductor radius must be positive, got {radius}"));
        }
        if !center[0].is_finite() || !center[1].is_finite() || !current.re.is_finite() || !current.im.is_finite() {
            return invalid("conductor center and current must be finite");
        }
        Ok(ConductorSpec { center, radius, current })
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }
}

/// Check that no two conductors overlap.
pub fn validate_conductors(conductors: &[ConductorSpec]) -> Result<()> {
    for (i, a) in conductors.iter().enumerate() {
        for (j, b) in conductors.iter().enumerate().skip(i + 1) {
            let dist = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
            if dist < a.radius + b.radius {
                return invalid(format!("conductors {i} and {j} overlap"));
            }
        }
    }
    Ok(())
}

/// In-plane magnetic field [A/m] at `p`.
pub fn biot_savart_h(conductors: &[ConductorSpec], p: [f64; 2]) -> [Complex64; 2] {
    let mut h = [Complex64::new(0.0, 0.0); 2];
    for c in conductors {
        let (dx, dy) = (p[0] - c.center[0], p[1] - c.center[1]);
        let r2 = dx * dx + dy * dy;
        let r2c = c.radius * c.radius;
        // H = I/(2π) * (ẑ × r) / max(r², R²)
        let scale = 1.0 / (2.0 * PI * r2.max(r2c));
        h[0] += c.current * (-dy * scale);
        h[1] += c.current * (dx * scale);
    }
    h
}

/// Impressed current density [A/m²] (z-component) at `p`.
pub fn j0_density(conductors: &[ConductorSpec], p: [f64; 2]) -> Complex64 {
    conductors
        .iter()
        .filter(|c| c.contains(p))
        .map(|c| c.current / (PI * c.radius * c.radius))
        .sum()
}

/// `∮ H · dl` [A] along a closed polyline (first point repeated at the end).
pub fn circulation(conductors: &[ConductorSpec], path: &[[f64; 2]]) -> Result<Complex64> {
    if path.len() < 4 {
        return invalid("a closed loop needs at least three distinct points plus the closing point");
    }
    if path.first() != path.last() {
        return invalid("polyline is not closed (first and last point differ)");
    }
    let mut total = Complex64::new(0.0, 0.0);
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = t[0].hypot(t[1]);
        if len == 0.0 {
            continue;
        }
        let tangential = |s: f64, part: usize| -> f64 {
            let h = biot_savart_h(conductors, [a[0] + s * t[0], a[1] + s * t[1]]);
            let v = h[0] * t[0] + h[1] * t[1];
            if part == 0 {
                v.re
            } else {
                v.im
            }
        };
        // absolute target relative to a natural field scale along the segment
        let scale: f64 = conductors.iter().map(|c| c.current.norm()).sum::<f64>().max(1e-300);
        let tol = 1e-13 * scale;
        let re = quadrature::integrate(|s| tangential(s, 0), 0.0, 1.0, tol).integral;
        let im = quadrature::integrate(|s| tangential(s, 1), 0.0, 1.0, tol).integral;
        total += Complex64::new(re, im);
    }
    Ok(total)
}

/// Polygon approximating a circle, closed.
pub fn circle_path(center: [f64; 2], radius: f64, n: usize) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect();
    out.push(out[0]);
    out
}

/// Conductors of the whole machine generated from the slots of one segment.
///
/// Copy `m` is rotated by `m * span` and, for an anti-periodic winding,
/// carries the currents multiplied by `(-1)^m`. With the default slot layout
/// this makes the cut at `θ = 0` a plane of vanishing normal flux and the
/// cuts at `±span/2` planes of vanishing tangential field, matching the
/// segment boundary tags.
pub fn machine_conductors(geo: &SegmentGeometry, antiperiodic: bool) -> Result<Vec<ConductorSpec>> {
    let copies = (360.0 / geo.span_deg).round();
    if (copies * geo.span_deg - 360.0).abs() > 1e-9 || copies < 1.0 {
        return invalid(format!("span {}° does not divide the full circle", geo.span_deg));
    }
    let copies = copies as usize;
    if antiperiodic && copies % 2 != 0 {
        return invalid("an anti-periodic winding needs an even number of segments");
    }
    let mut out = Vec::with_capacity(copies * geo.conductors.len());
    for m in 0..copies {
        let sign = if antiperiodic && m % 2 == 1 { -1.0 } else { 1.0 };
        for slot in &geo.conductors {
            let theta = (slot.theta_deg + m as f64 * geo.span_deg).to_radians();
            out.push(ConductorSpec::new(
                [slot.r * theta.cos(), slot.r * theta.sin()],
                slot.radius,
                Complex64::new(slot.current[0], slot.current[1]) * sign,
            )?);
        }
    }
    validate_conductors(&out)?;
    Ok(out)
}
