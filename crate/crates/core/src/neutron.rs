//! Spin-flip survival probability of a neutron crossing a static field,
//! interrupted by N spin measurements, and the bound on N set by the
//! kinetic-energy spread of the beam.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{pow_n, require_positive};

const RAW_CONSISTENCY_TOL: f64 = 1e-12;

/// Raw beam and field parameters, in units with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NeutronBeam {
    /// Modulus μ of the magnetic moment.
    pub mu: f64,
    /// Static field B.
    pub b_field: f64,
    /// Length l of the field region.
    pub length_l: Option<f64>,
    /// Mean speed v₀.
    pub v0: f64,
    /// Speed uncertainty Δv.
    pub delta_v: f64,
    pub mass: f64,
    /// Position uncertainty Δx. Recorded for completeness; no formula
    /// depends on it.
    pub delta_x: Option<f64>,
}

impl NeutronBeam {
    /// ΔE_m = 2μB
    pub fn magnetic_gap(&self) -> f64 {
        2.0 * self.mu * self.b_field
    }

    /// ΔE_k = Δ(mv²/2) at v₀ = m·v₀·Δv
    pub fn kinetic_spread(&self) -> f64 {
        self.mass * self.v0 * self.delta_v
    }

    /// Precession angle φ = μBl/v accumulated between measurements, if the
    /// field length is known.
    pub fn rotation_angle(&self) -> Option<f64> {
        self.length_l.map(|l| self.mu * self.b_field * l / self.v0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutronConfig {
    pub delta_e_m: f64,
    pub delta_e_k: f64,
    pub beam: Option<NeutronBeam>,
}

impl NeutronConfig {
    pub fn from_energies(delta_e_m: f64, delta_e_k: f64) -> Result<Self> {
        let cfg = Self {
            delta_e_m,
            delta_e_k,
            beam: None,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_beam(beam: NeutronBeam) -> Result<Self> {
        let cfg = Self {
            delta_e_m: beam.magnetic_gap(),
            delta_e_k: beam.kinetic_spread(),
            beam: Some(beam),
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Energies given explicitly and cross-checked against the beam.
    pub fn with_beam(delta_e_m: f64, delta_e_k: f64, beam: NeutronBeam) -> Result<Self> {
        let cfg = Self {
            delta_e_m,
            delta_e_k,
            beam: Some(beam),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        for (name, value) in [("delta_e_m", self.delta_e_m), ("delta_e_k", self.delta_e_k)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if let Some(beam) = &self.beam {
            let gap = beam.magnetic_gap();
            if (gap - self.delta_e_m).abs() > RAW_CONSISTENCY_TOL * self.delta_e_m.abs() {
                return Err(Error::InvalidArgument(format!(
                    "delta_e_m = {} disagrees with 2·mu·b_field = {gap}",
                    self.delta_e_m
                )));
            }
        }
        Ok(())
    }
}

/// φ₀ = ΔE_m / (4 ΔE_k)
pub fn phi_zero(cfg: &NeutronConfig) -> Result<f64> {
    cfg.check()?;
    Ok(cfg.delta_e_m / (4.0 * cfg.delta_e_k))
}

/// [cos²(π/2N)]ᴺ
pub fn p_up_ideal(n: u64) -> Result<f64> {
    require_positive(n)?;
    Ok(survival(FRAC_PI_2 / n as f64, n))
}

fn survival(phi: f64, n: u64) -> f64 {
    pow_n(phi.cos().powi(2), n)
}

fn check_phi0(phi0: f64) -> Result<()> {
    if !(phi0 > 0.0 && phi0 < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "phi0 must lie in (0, π/2), got {phi0}"
        )));
    }
    Ok(())
}

/// [cos²φ]ᴺ with φ = max(π/2N, φ₀).
///
/// Where the clamp is active this is the exact-cosine form; the
/// exponential exp(−φ₀²N) is available as [`p_up_exponential`] for
/// comparison only.
pub fn p_up_limited(n: u64, phi0: f64) -> Result<f64> {
    require_positive(n)?;
    check_phi0(phi0)?;
    let phi = FRAC_PI_2 / n as f64;
    if phi >= phi0 {
        p_up_ideal(n)
    } else {
        Ok(survival(phi0, n))
    }
}

/// exp(−φ₀²N)
pub fn p_up_exponential(n: u64, phi0: f64) -> Result<f64> {
    require_positive(n)?;
    check_phi0(phi0)?;
    Ok((-phi0 * phi0 * n as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutronLimit {
    pub n_max: u64,
    pub p_up_at_n_max: f64,
}

/// ⌊π/(2φ₀)⌋ = ⌊2πΔE_k/ΔE_m⌋ and the survival probability there.
pub fn neutron_n_max(cfg: &NeutronConfig) -> Result<NeutronLimit> {
    n_max_for_phi(phi_zero(cfg)?)
}

pub fn n_max_for_phi(phi0: f64) -> Result<NeutronLimit> {
    if !(phi0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "phi0 must be positive, got {phi0}"
        )));
    }
    if phi0 > FRAC_PI_2 {
        return Err(Error::BoundViolation(format!(
            "phi0 = {phi0} exceeds π/2; not even one measurement fits"
        )));
    }
    let bound = PI / (2.0 * phi0);
    let nearest = bound.round();
    let n_max = if (bound - nearest).abs() <= 4.0 * f64::EPSILON * bound {
        nearest
    } else {
        bound.floor()
    } as u64;
    let p_up_at_n_max = if phi0 == FRAC_PI_2 {
        0.0
    } else {
        p_up_limited(n_max, phi0)?
    };
    Ok(NeutronLimit {
        n_max,
        p_up_at_n_max,
    })
}
