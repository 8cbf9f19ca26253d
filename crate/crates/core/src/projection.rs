//! Transition probability P₂(T) at the end of an RF π pulse interrupted by
//! N projective measurements, with and without the finite decoherence time
//! of the measuring level.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::{apply_projection, evolve_bloch, IonConfig};
use crate::state::{bloch_from_density, density_from_bloch, BlochVector};

pub(crate) fn require_positive(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument(
            "pulse count must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `base^n` for any `n`, keeping the sign of negative bases.
pub(crate) fn pow_n(base: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => base.powi(k),
        Err(_) => {
            let magnitude = base.abs().powf(n as f64);
            if base < 0.0 && n % 2 == 1 {
                -magnitude
            } else {
                magnitude
            }
        }
    }
}

/// [1 − cosᴺ(π/N)] / 2
pub fn p2_closed_form(n: u64) -> Result<f64> {
    require_positive(n)?;
    Ok(p2_from_angle(PI / n as f64, n))
}

fn p2_from_angle(theta: f64, n: u64) -> f64 {
    0.5 * (1.0 - pow_n(theta.cos(), n))
}

/// Large-N form [1 − exp(−π²/2N)] / 2.
pub fn p2_asymptotic(n: u64) -> Result<f64> {
    require_positive(n)?;
    Ok(0.5 * (1.0 - (-PI * PI / (2.0 * n as f64)).exp()))
}

/// Brute-force P₂(T): N rounds of Bloch precession by T/N, each followed by
/// a projection of the density matrix.
pub fn simulate_projective_sequence(cfg: &IonConfig) -> Result<f64> {
    require_positive(cfg.n_pulses)?;
    let dt = cfg.spacing();
    let mut r = BlochVector::GROUND;
    for _ in 0..cfg.n_pulses {
        let rotated = evolve_bloch(&r, cfg.omega, dt)?;
        let rho = apply_projection(&density_from_bloch(&rotated)?);
        r = bloch_from_density(&rho)?;
    }
    Ok(r.p2())
}

/// ⌊π/(Ωτ_sp)⌋, the largest pulse count whose spacing T/N is not shorter
/// than τ_sp.
pub fn n_max(cfg: &IonConfig) -> Result<u64> {
    let product = cfg.omega * cfg.tau_sp;
    if product > PI {
        return Err(Error::BoundViolation(format!(
            "Ω·τ_sp = {product} exceeds π; no pulse count satisfies T/N ≥ τ_sp"
        )));
    }
    // guard the exact boundary against rounding in π/(Ωτ)
    let bound = PI / product;
    let nearest = bound.round();
    let n = if (bound - nearest).abs() <= 4.0 * f64::EPSILON * bound {
        nearest
    } else {
        bound.floor()
    };
    if n >= u64::MAX as f64 {
        return Ok(u64::MAX);
    }
    Ok(n as u64)
}

/// Closed form with the per-step angle clamped from below by Ωτ_sp:
/// θ = max(π/N, Ωτ_sp), P₂ = [1 − cosᴺθ]/2.
///
/// For N beyond [`n_max`] the consecutive measurements would overlap; the
/// clamped value is the formal continuation, not a prediction for a real
/// measurement sequence.
pub fn p2_decoherence_limited(n: u64, cfg: &IonConfig) -> Result<f64> {
    require_positive(n)?;
    let floor = cfg.omega * cfg.tau_sp;
    let unclamped = PI / n as f64;
    if unclamped >= floor {
        p2_closed_form(n)
    } else {
        Ok(p2_from_angle(floor, n))
    }
}

/// Exponential form [1 − exp(−Ω²τ_sp²N/2)]/2 of the clamped probability.
pub fn p2_decoherence_exponential(n: u64, cfg: &IonConfig) -> Result<f64> {
    require_positive(n)?;
    let x = cfg.omega * cfg.tau_sp;
    Ok(0.5 * (1.0 - (-x * x * n as f64 / 2.0).exp()))
}
