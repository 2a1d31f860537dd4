//! Micro-shape functions across one lamination period and their period integrals.
//!
//! The period `[-p/2, p/2]` consists of the iron sheet `|z| <= d/2` and the
//! insulation `d/2 < |z| <= p/2` (split into an upper and a lower half).
//! With `s = 2z/d`:
//!
//! | profile | iron                  | insulation                     |
//! |---------|-----------------------|--------------------------------|
//! | `φ1⁰`   | `s`                   | `±1`                           |
//! | `φ1`    | `s`                   | linear from `±1` to `0` at `±p/2` |
//! | `φ2`    | `½√(3/2)(s² − 1)`     | `0`                            |
//! | `1`     | `1`                   | `1`                            |
//!
//! All period integrals are evaluated in closed form by integrating the
//! piecewise polynomials exactly; [`MicroShapeTable::verify`] re-computes
//! every entry by adaptive quadrature of [`phi`]/[`dphi`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Geometry of one lamination period: sheet thickness `d` and fill factor `k_f = d/p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminationSpec {
    pub d: f64,
    pub k_f: f64,
}

impl LaminationSpec {
    pub fn new(d: f64, k_f: f64) -> Result<Self> {
        let spec = LaminationSpec { d, k_f };
        spec.validate()?;
        Ok(spec)
    }

    /// Build from sheet and insulation thickness directly.
    pub fn from_thicknesses(d: f64, d0: f64) -> Result<Self> {
        if !(d0 >= 0.0) || !d0.is_finite() {
            return invalid(format!("insulation thickness must be non-negative, got {d0}"));
        }
        Self::new(d, d / (d + d0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) || !self.d.is_finite() {
            return invalid(format!("sheet thickness must be positive, got {}", self.d));
        }
        if !(self.k_f > 0.0 && self.k_f <= 1.0) {
            return invalid(format!("fill factor must lie in (0, 1], got {}", self.k_f));
        }
        Ok(())
    }

    /// Period length `p = d / k_f`.
    pub fn period(&self) -> f64 {
        self.d / self.k_f
    }

    /// Insulation thickness `d0 = p - d` (never negative).
    pub fn insulation(&self) -> f64 {
        (self.period() - self.d).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Phi1_0,
    Phi1,
    Phi2,
    One,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Phi1_0, Profile::Phi1, Profile::Phi2, Profile::One];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Phi1_0 => "phi1_0",
            Profile::Phi1 => "phi1",
            Profile::Phi2 => "phi2",
            Profile::One => "one",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Parity under `z -> -z`: `true` for odd profiles.
    pub fn is_odd(self) -> bool {
        matches!(self, Profile::Phi1_0 | Profile::Phi1)
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown profile '{s}' (expected phi1_0, phi1, phi2, one)")))
    }
}

/// Part of the period; also the side flag for one-sided derivatives at `|z| = d/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Iron,
    Insulation,
}

/// `½√(3/2)`
pub const PHI2_SCALE: f64 = 0.612_372_435_695_794_5;

fn check_z(z: f64, spec: &LaminationSpec) -> Result<()> {
    let half = 0.5 * spec.period();
    if !(z.abs() <= half * (1.0 + 1e-14)) {
        return invalid(format!("z = {z} lies outside the period [-{half}, {half}]"));
    }
    Ok(())
}

/// Value of a micro-shape function at `z`.
pub fn phi(which: Profile, z: f64, spec: &LaminationSpec) -> Result<f64> {
    check_z(z, spec)?;
    let h = 0.5 * spec.d;
    if z.abs() <= h {
        let s = z / h;
        return Ok(match which {
            Profile::Phi1_0 | Profile::Phi1 => s,
            Profile::Phi2 => PHI2_SCALE * (s * s - 1.0),
            Profile::One => 1.0,
        });
    }
    let sign = z.signum();
    Ok(match which {
        Profile::Phi1_0 => sign,
        Profile::Phi1 => {
            let d0 = spec.insulation();
            sign * ((0.5 * spec.period() - z.abs()) / (0.5 * d0)).clamp(0.0, 1.0)
        }
        Profile::Phi2 => 0.0,
        Profile::One => 1.0,
    })
}

/// z-derivative of a micro-shape function. At `|z| = d/2` the value on `side` is returned.
pub fn dphi(which: Profile, z: f64, side: Part, spec: &LaminationSpec) -> Result<f64> {
    check_z(z, spec)?;
    let h = 0.5 * spec.d;
    let in_iron = z.abs() < h || (z.abs() == h && side == Part::Iron);
    if in_iron {
        let s = z / h;
        return Ok(match which {
            Profile::Phi1_0 | Profile::Phi1 => 1.0 / h,
            Profile::Phi2 => PHI2_SCALE * 2.0 * s / h,
            Profile::One => 0.0,
        });
    }
    let d0 = spec.insulation();
    if d0 == 0.0 {
        return Err(Error::InvalidArgument("degenerate geometry: no insulation layer (d0 = 0)".into()));
    }
    Ok(match which {
        // φ1 is odd, so its slope is even: −2/d0 in both insulation halves
        Profile::Phi1 => -2.0 / d0,
        Profile::Phi1_0 | Profile::Phi2 | Profile::One => 0.0,
    })
}

/// A polynomial `Σ c_n t^n` on `t ∈ [0,1]` or `[-1,1]`, with `dz = jac dt`.
#[derive(Clone, Copy)]
struct Piece {
    coeffs: [[f64; 3]; 4],
    lo: f64,
    jac: f64,
}

impl Piece {
    fn derivative(&self, k: usize) -> [f64; 3] {
        let c = self.coeffs[k];
        let s = 1.0 / self.jac;
        [c[1] * s, 2.0 * c[2] * s, 0.0]
    }

    /// ∫ a(t) b(t) dz over the piece, exactly.
    fn integrate(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let mut prod = [0.0; 5];
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] += a[i] * b[j];
            }
        }
        let mut sum = 0.0;
        for (n, c) in prod.iter().enumerate() {
            if *c != 0.0 {
                let e = n as i32 + 1;
                sum += c * (1.0 - self.lo.powi(e)) / e as f64;
            }
        }
        sum * self.jac.abs()
    }
}

const ONE: [f64; 3] = [1.0, 0.0, 0.0];

fn pieces(spec: &LaminationSpec) -> (Piece, Vec<Piece>) {
    let (d, d0) = (spec.d, spec.insulation());
    let c = PHI2_SCALE;
    let iron = Piece {
        coeffs: [[0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [-c, 0.0, c], ONE],
        lo: -1.0,
        jac: 0.5 * d,
    };
    if d0 == 0.0 {
        return (iron, Vec::new());
    }
    let upper = Piece { coeffs: [ONE, [1.0, -1.0, 0.0], [0.0; 3], ONE], lo: 0.0, jac: 0.5 * d0 };
    let lower = Piece { coeffs: [[-1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [0.0; 3], ONE], lo: 0.0, jac: -0.5 * d0 };
    (iron, vec![upper, lower])
}

/// Kind of a period integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    /// `∫ φa φb dz`
    Prod,
    /// `∫ φa′ φb′ dz`
    DProd,
    /// `∫ φa dz`
    Int,
    /// `∫ φa′ dz`
    DInt,
}

/// One row of the audited table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub part: Part,
    pub kind: IntegralKind,
    pub a: Profile,
    pub b: Option<Profile>,
    pub value: f64,
}

/// Closed-form period integrals, stored separately for iron and insulation.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroShapeTable {
    pub spec: LaminationSpec,
    prod: [[[f64; 4]; 4]; 2],
    dprod: [[[f64; 4]; 4]; 2],
    int: [[f64; 4]; 2],
    dint: [[f64; 4]; 2],
}

fn part_index(part: Part) -> usize {
    match part {
        Part::Iron => 0,
        Part::Insulation => 1,
    }
}

/// Build the closed-form table of all period integrals.
pub fn integral_table(spec: &LaminationSpec) -> MicroShapeTable {
    let (iron, ins) = pieces(spec);
    let mut table = MicroShapeTable {
        spec: *spec,
        prod: [[[0.0; 4]; 4]; 2],
        dprod: [[[0.0; 4]; 4]; 2],
        int: [[0.0; 4]; 2],
        dint: [[0.0; 4]; 2],
    };
    let groups: [(usize, Vec<Piece>); 2] = [(0, vec![iron]), (1, ins)];
    for (pi, list) in groups.iter() {
        for piece in list {
            for a in 0..4 {
                let da = piece.derivative(a);
                table.int[*pi][a] += piece.integrate(piece.coeffs[a], ONE);
                table.dint[*pi][a] += piece.integrate(da, ONE);
                for b in 0..4 {
                    table.prod[*pi][a][b] += piece.integrate(piece.coeffs[a], piece.coeffs[b]);
                    table.dprod[*pi][a][b] += piece.integrate(da, piece.derivative(b));
                }
            }
        }
    }
    table
}

impl MicroShapeTable {
    pub fn period(&self) -> f64 {
        self.spec.period()
    }

    /// `∫ φa φb dz` over `part`.
    pub fn prod(&self, a: Profile, b: Profile, part: Part) -> f64 {
        self.prod[part_index(part)][a.index()][b.index()]
    }

    /// `∫ φa′ φb′ dz` over `part`.
    pub fn dprod(&self, a: Profile, b: Profile, part: Part) -> f64 {
        self.dprod[part_index(part)][a.index()][b.index()]
    }

    /// `∫ φa dz` over `part`.
    pub fn int(&self, a: Profile, part: Part) -> f64 {
        self.int[part_index(part)][a.index()]
    }

    /// `∫ φa′ dz` over `part`.
    pub fn dint(&self, a: Profile, part: Part) -> f64 {
        self.dint[part_index(part)][a.index()]
    }

    pub fn value(&self, kind: IntegralKind, a: Profile, b: Option<Profile>, part: Part) -> f64 {
        let b = b.unwrap_or(Profile::One);
        match kind {
            IntegralKind::Prod => self.prod(a, b, part),
            IntegralKind::DProd => self.dprod(a, b, part),
            IntegralKind::Int => self.int(a, part),
            IntegralKind::DInt => self.dint(a, part),
        }
    }

    /// Every distinct entry (symmetric pairs listed once) in a stable order.
    pub fn entries(&self) -> Vec<TableEntry> {
        let mut out = Vec::new();
        for part in [Part::Iron, Part::Insulation] {
            for kind in [IntegralKind::Prod, IntegralKind::DProd] {
                for (i, &a) in Profile::ALL.iter().enumerate() {
                    for &b in &Profile::ALL[i..] {
                        out.push(TableEntry { part, kind, a, b: Some(b), value: self.value(kind, a, Some(b), part) });
                    }
                }
            }
            for kind in [IntegralKind::Int, IntegralKind::DInt] {
                for a in Profile::ALL {
                    out.push(TableEntry { part, kind, a, b: None, value: self.value(kind, a, None, part) });
                }
            }
        }
        out
    }

    /// Re-evaluate every entry by adaptive quadrature of the pointwise
    /// functions and return the largest deviation, relative to the
    /// Cauchy–Schwarz scale of the entry.
    pub fn verify(&self) -> QuadratureCheck {
        let spec = self.spec;
        let (d, p) = (spec.d, spec.period());
        let intervals = |part: Part| -> Vec<(f64, f64, Part)> {
            match part {
                Part::Iron => vec![(-0.5 * d, 0.5 * d, Part::Iron)],
                Part::Insulation if spec.insulation() > 0.0 => {
                    vec![(0.5 * d, 0.5 * p, Part::Insulation), (-0.5 * p, -0.5 * d, Part::Insulation)]
                }
                Part::Insulation => vec![],
            }
        };
        let eval = |kind: IntegralKind, a: Profile, z: f64, side: Part| -> f64 {
            match kind {
                IntegralKind::Prod | IntegralKind::Int => phi(a, z, &spec).unwrap(),
                IntegralKind::DProd | IntegralKind::DInt => dphi(a, z, side, &spec).unwrap(),
            }
        };
        let mut worst = QuadratureCheck { max_relative_deviation: 0.0, worst_entry: None };
        for entry in self.entries() {
            let b = entry.b.unwrap_or(Profile::One);
            let quad_of = |f: &dyn Fn(f64, Part) -> f64| -> f64 {
                intervals(entry.part)
                    .into_iter()
                    .map(|(lo, hi, side)| quadrature::integrate(|z| f(z, side), lo, hi, 1e-16 * (hi - lo).abs().max(1e-300)).integral)
                    .sum()
            };
            let (q, scale) = match entry.kind {
                IntegralKind::Prod | IntegralKind::DProd => {
                    let q = quad_of(&|z, s| eval(entry.kind, entry.a, z, s) * eval(entry.kind, b, z, s));
                    let na = quad_of(&|z, s| eval(entry.kind, entry.a, z, s).powi(2));
                    let nb = quad_of(&|z, s| eval(entry.kind, b, z, s).powi(2));
                    (q, (na * nb).sqrt())
                }
                IntegralKind::Int | IntegralKind::DInt => {
                    let q = quad_of(&|z, s| eval(entry.kind, entry.a, z, s));
                    let na = quad_of(&|z, s| eval(entry.kind, entry.a, z, s).powi(2));
                    let len: f64 = intervals(entry.part).iter().map(|(lo, hi, _)| hi - lo).sum();
                    (q, (na * len).sqrt())
                }
            };
            let dev = if scale > 0.0 { (q - entry.value).abs() / scale } else { (q - entry.value).abs() };
            if dev > worst.max_relative_deviation || worst.worst_entry.is_none() {
                worst = QuadratureCheck { max_relative_deviation: dev, worst_entry: Some(entry) };
            }
        }
        worst
    }
}

/// Result of [`MicroShapeTable::verify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub max_relative_deviation: f64,
    pub worst_entry: Option<TableEntry>,
}

/// JSON document of the full table for audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableReport {
    pub d: f64,
    pub k_f: f64,
    pub p: f64,
    pub d0: f64,
    pub entries: Vec<TableEntry>,
    pub quadrature_check: QuadratureCheck,
}

impl TableReport {
    pub fn new(table: &MicroShapeTable) -> Self {
        TableReport {
            d: table.spec.d,
            k_f: table.spec.k_f,
            p: table.spec.period(),
            d0: table.spec.insulation(),
            entries: table.entries(),
            quadrature_check: table.verify(),
        }
    }
}
