//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and Gauss–Legendre
//! rules on intervals.

use crate::error::{invalid, Result};

pub const MAX_DEGREE: usize = 10;

/// Points in barycentric coordinates `(1 - x - y, x, y)`; weights sum to 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrate `f(x, y)` over the reference triangle.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p[1], p[2])).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|t| 0.5 * t).collect())
}

/// Rule exact for polynomials of total degree `degree` on the reference triangle.
///
/// Degree 1 is the centroid rule; higher degrees use a collapsed
/// (Duffy-mapped) tensor Gauss–Legendre rule.
pub fn quadrature(degree: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_DEGREE).contains(&degree) {
        return invalid(format!("quadrature degree {degree} outside 1..={MAX_DEGREE}"));
    }
    if degree == 1 {
        let c = 1.0 / 3.0;
        return Ok(QuadratureRule { degree, points: vec![[c, c, c]], weights: vec![0.5] });
    }
    // the collapse adds one degree in the first direction
    let n = (degree + 2).div_ceil(2);
    let (s, ws) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (a, wa) in s.iter().zip(&ws) {
        for (b, wb) in s.iter().zip(&ws) {
            let x = *a;
            let y = b * (1.0 - a);
            points.push([1.0 - x - y, x, y]);
            weights.push(wa * wb * (1.0 - a));
        }
    }
    Ok(QuadratureRule { degree, points, weights })
}
