use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four multiscale formulations.
///
/// * `TMS1`: `H = T0 + φ2 T2` with `T0 ∈ H(curl, Ω)`, `T2 ∈ H(curl, Ωm)`.
/// * `TMS2`: `H = ∇Φ0 + φ2 T2` with `Φ0 ∈ H¹(Ω)`.
/// * `AMS1`: `A = φ1⁰∇u10 + φ1 A1 + ∇(φ1 w1)` with `A1 ∈ H(curl, Ωm)`.
/// * `AMS2`: `A = φ1⁰∇u10 + φ1∇u1 + ∇(φ1 w1)`, nodal elements only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "TMS1")]
    Tms1,
    #[serde(rename = "TMS2")]
    Tms2,
    #[serde(rename = "AMS1")]
    Ams1,
    #[serde(rename = "AMS2")]
    Ams2,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [MethodId::Tms1, MethodId::Tms2, MethodId::Ams1, MethodId::Ams2];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Tms1 => "TMS1",
            MethodId::Tms2 => "TMS2",
            MethodId::Ams1 => "AMS1",
            MethodId::Ams2 => "AMS2",
        }
    }

    /// Current-vector-potential (field) family.
    pub fn is_t_family(self) -> bool {
        matches!(self, MethodId::Tms1 | MethodId::Tms2)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}' (valid: TMS1, TMS2, AMS1, AMS2)")))
    }
}

/// How the problem is driven.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationMode {
    /// Biot–Savart field of the problem's conductors.
    BiotSavart,
    /// Impressed current density in the conductors (A-family only; assembled
    /// by integration by parts against the Biot–Savart field).
    ImpressedJ0,
    /// Only the uniform applied field `applied_field` on the boundary.
    BoundaryOnly,
}

impl ExcitationMode {
    /// The conductor-driven mode admissible for `method`.
    pub fn conductors_for(method: MethodId) -> Self {
        if method.is_t_family() {
            ExcitationMode::BiotSavart
        } else {
            ExcitationMode::ImpressedJ0
        }
    }
}

/// Which essential conditions the A-family formulations impose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// As tabulated: AMS1 fixes `u10` and `A1×n` on `gamma_h` and `A1×n`
    /// on `gamma_b`; AMS2 fixes `u10`, `u1`, `w1` on `gamma_h` and `gamma_b`.
    Tabulated,
    /// Vanishing normal flux where it is physically zero: potentials fixed
    /// on `gamma_b` and `gamma_e`, `w1` on `gamma_e`; `gamma_h` natural.
    Physical,
}

/// Everything that selects and discretizes one formulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub method: MethodId,
    /// edge-element order `k`; nodal blocks use `k + 1`
    pub edge_order: usize,
    /// frequency [Hz]
    pub frequency: f64,
    pub excitation: ExcitationMode,
    /// uniform applied field [A/m] (peak phasor) for `boundary_only`
    pub applied_field: [Complex64; 2],
    /// A-family boundary treatment; ignored by the T-family
    pub boundary_policy: BoundaryPolicy,
    /// drop the edge-effect block (`T2` resp. `w1`)
    pub ablate_edge_effect: bool,
    /// order of the `w1` block (defaults to `k + 1`)
    pub w1_order: Option<usize>,
    /// resistivity of non-conducting material in the T-family, as a multiple
    /// of the iron resistivity
    pub penalty: f64,
    /// quadrature degree (defaults to `2 * max degree + 1`)
    pub quad_degree: Option<usize>,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            method: MethodId::Tms1,
            edge_order: 1,
            frequency: 50.0,
            excitation: ExcitationMode::BoundaryOnly,
            applied_field: [Complex64::new(0.0, 0.0); 2],
            boundary_policy: BoundaryPolicy::Physical,
            ablate_edge_effect: false,
            w1_order: None,
            penalty: 1e6,
            quad_degree: None,
        }
    }
}

impl DiscretizationConfig {
    pub fn new(method: MethodId, edge_order: usize) -> Self {
        DiscretizationConfig { method, edge_order, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.edge_order > 2 {
            return bad(format!("edge order must be 0, 1 or 2, got {}", self.edge_order));
        }
        if let Some(o) = self.w1_order {
            if !(1..=3).contains(&o) {
                return bad(format!("w1 order must be 1, 2 or 3, got {o}"));
            }
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return bad(format!("frequency must be positive, got {}", self.frequency));
        }
        if !(self.penalty > 0.0) || !self.penalty.is_finite() {
            return bad(format!("penalty factor must be positive, got {}", self.penalty));
        }
        if self.method.is_t_family() && self.excitation == ExcitationMode::ImpressedJ0 {
            return Err(Error::InvalidProblem(format!(
                "{} needs biot_savart or boundary_only excitation, not impressed_j0",
                self.method
            )));
        }
        if !self.method.is_t_family() && self.excitation == ExcitationMode::BiotSavart {
            return Err(Error::InvalidProblem(format!(
                "{} needs impressed_j0 or boundary_only excitation, not biot_savart",
                self.method
            )));
        }
        if self.applied_field.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return bad("applied field must be finite".into());
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency
    }

    pub fn nodal_order(&self) -> usize {
        self.edge_order + 1
    }
}
