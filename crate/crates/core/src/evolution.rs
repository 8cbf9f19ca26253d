//! Two-level Bloch precession, the projective measurement map and the
//! three-level dissipative master equation.
//!
//! Units: ħ = 1, times in the same unit as 1/Ω.
//!
//! The three-level model has levels 1 and 2 coupled by a resonant RF drive
//! of Rabi frequency Ω that is on for the whole π pulse `[0, T]`, and
//! levels 1 and 3 coupled by square optical pulses. Level 3 decays to
//! level 1 only, at rate Γ = 1/τ_sp, through the jump operator |1⟩⟨3|:
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Γ (L ρ L† − ½{L†L, ρ}),   L = |1⟩⟨3|
//! H(t)  = −½Ω (|1⟩⟨2| + |2⟩⟨1|) + ½Ω_opt(t) (|1⟩⟨3| + |3⟩⟨1|)
//! ```
//!
//! The RF phase is chosen so that the 1–2 block precesses exactly as
//! [`evolve_bloch`] does.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::rk4_step;
use crate::state::{
    validate_density, BlochVector, Density2, Density3, HERMITICITY_TOL, MIN_EIGENVALUE_TOL,
    TRACE_TOL,
};

/// Trace drift allowed along a master-equation trajectory.
pub const LINDBLAD_TRACE_TOL: f64 = 1e-9;
/// Hermiticity drift allowed along a master-equation trajectory.
pub const LINDBLAD_HERMITICITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue allowed along a master-equation trajectory.
pub const LINDBLAD_MIN_EIGENVALUE: f64 = -1e-8;

/// The step must resolve the fastest active timescale at least this finely.
pub const MIN_STEPS_PER_TIMESCALE: f64 = 20.0;
/// Default resolution of the fastest active timescale.
pub const DEFAULT_STEPS_PER_TIMESCALE: f64 = 100.0;
/// Default optical pulse length as a fraction of the pulse spacing T/N.
pub const DEFAULT_PULSE_FRACTION: f64 = 0.005;

/// Rotation of the Bloch vector solving dR/dt = ω × R with ω = (Ω, 0, 0)
/// for a duration `dt`.
pub fn evolve_bloch(r0: &BlochVector, omega: f64, dt: f64) -> Result<BlochVector> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration must be non-negative, got {dt}"
        )));
    }
    let (s, c) = (omega * dt).sin_cos();
    Ok(BlochVector::new(
        r0.r1,
        r0.r2 * c - r0.r3 * s,
        r0.r3 * c + r0.r2 * s,
    ))
}

/// Projection-postulate measurement: drop the coherences, keep the
/// populations.
pub fn apply_projection(rho: &Density2) -> Density2 {
    let mut out = *rho;
    out[(0, 1)] = Complex64::new(0.0, 0.0);
    out[(1, 0)] = Complex64::new(0.0, 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonConfig {
    /// RF Rabi frequency Ω.
    pub omega: f64,
    /// Lifetime of level 3. `f64::INFINITY` switches decay off.
    pub tau_sp: f64,
    /// Number of measurement pulses N.
    pub n_pulses: u64,
}

impl IonConfig {
    pub fn new(omega: f64, tau_sp: f64, n_pulses: u64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if !(tau_sp > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau_sp must be positive, got {tau_sp}"
            )));
        }
        if n_pulses == 0 {
            return Err(Error::InvalidArgument("n_pulses must be at least 1".into()));
        }
        Ok(Self {
            omega,
            tau_sp,
            n_pulses,
        })
    }

    /// Duration T = π/Ω of the RF π pulse.
    pub fn t_pi(&self) -> f64 {
        PI / self.omega
    }

    /// Γ = 1/τ_sp.
    pub fn gamma(&self) -> f64 {
        1.0 / self.tau_sp
    }

    /// Spacing T/N between measurements.
    pub fn spacing(&self) -> f64 {
        self.t_pi() / self.n_pulses as f64
    }

    pub fn with_pulses(&self, n_pulses: u64) -> Result<Self> {
        Self::new(self.omega, self.tau_sp, n_pulses)
    }
}

/// Optical measurement pulses. Pulse `k` occupies
/// `[τ_k − duration, τ_k]`, so the last pulse ends exactly at T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    measurement_times: Vec<f64>,
    optical_pulse_duration: f64,
    optical_rabi: f64,
}

impl PulseSchedule {
    /// τ_k = kT/N for k = 1..N.
    pub fn equispaced(total: f64, n: u64, duration: f64, optical_rabi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "schedule needs at least one pulse".into(),
            ));
        }
        let times = (1..=n)
            .map(|k| {
                if k == n {
                    total
                } else {
                    k as f64 * total / n as f64
                }
            })
            .collect();
        Self::new(times, duration, optical_rabi)
    }

    /// Equispaced square π pulses on 1↔3 (Ω_opt · duration = π).
    pub fn pi_pulses(total: f64, n: u64, duration: f64) -> Result<Self> {
        Self::equispaced(total, n, duration, PI / duration)
    }

    pub fn new(measurement_times: Vec<f64>, duration: f64, optical_rabi: f64) -> Result<Self> {
        if measurement_times.is_empty() {
            return Err(Error::InvalidArgument(
                "schedule needs at least one pulse".into(),
            ));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "optical pulse duration must be positive, got {duration}"
            )));
        }
        if !(optical_rabi > 0.0 && optical_rabi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "optical Rabi frequency must be positive, got {optical_rabi}"
            )));
        }
        let mut previous = 0.0;
        for &t in &measurement_times {
            if !(t > previous) {
                return Err(Error::InvalidArgument(
                    "measurement times must be positive and strictly increasing".into(),
                ));
            }
            if !(duration < t - previous) {
                return Err(Error::InvalidArgument(format!(
                    "optical pulse duration {duration} does not fit in spacing {}",
                    t - previous
                )));
            }
            previous = t;
        }
        Ok(Self {
            measurement_times,
            optical_pulse_duration: duration,
            optical_rabi,
        })
    }

    pub fn measurement_times(&self) -> &[f64] {
        &self.measurement_times
    }

    pub fn optical_pulse_duration(&self) -> f64 {
        self.optical_pulse_duration
    }

    pub fn optical_rabi(&self) -> f64 {
        self.optical_rabi
    }

    fn windows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.measurement_times
            .iter()
            .map(move |&t| (t - self.optical_pulse_duration, t))
    }
}

/// How the RF drive behaves while an optical pulse is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RfDrive {
    #[default]
    AlwaysOn,
    GatedDuringPulses,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladConfig {
    pub ion: IonConfig,
    /// `None` means no optical drive at all.
    pub schedule: Option<PulseSchedule>,
    /// Decay rate of level 3, always `1/ion.tau_sp`.
    pub gamma: f64,
    pub integrator_step: f64,
    pub rf: RfDrive,
    /// Keep every `record_every`-th step in the trajectory; the final state
    /// is always kept.
    pub record_every: usize,
}

impl LindbladConfig {
    pub fn new(
        ion: IonConfig,
        schedule: Option<PulseSchedule>,
        rf: RfDrive,
        integrator_step: f64,
    ) -> Result<Self> {
        let cfg = Self {
            gamma: ion.gamma(),
            ion,
            schedule,
            integrator_step,
            rf,
            record_every: 1,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Measurement scheme used for Zeno comparisons: N equispaced optical π
    /// pulses of length `pulse_fraction · T/N`, RF always on, and a step
    /// resolving the fastest timescale [`DEFAULT_STEPS_PER_TIMESCALE`] times.
    pub fn zeno(ion: IonConfig, pulse_fraction: f64) -> Result<Self> {
        let duration = pulse_fraction * ion.spacing();
        let schedule = PulseSchedule::pi_pulses(ion.t_pi(), ion.n_pulses, duration)?;
        let step = fastest_timescale(&ion, Some(&schedule), RfDrive::AlwaysOn)
            / DEFAULT_STEPS_PER_TIMESCALE;
        Self::new(ion, Some(schedule), RfDrive::AlwaysOn, step)
    }

    /// Largest admissible `integrator_step`.
    pub fn max_step(&self) -> f64 {
        fastest_timescale(&self.ion, self.schedule.as_ref(), self.rf) / MIN_STEPS_PER_TIMESCALE
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        self.integrator_step = step;
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if !(self.integrator_step > 0.0) {
            return Err(Error::config(
                "integrator_step",
                format!("must be positive, got {}", self.integrator_step),
            ));
        }
        let max = self.max_step();
        if self.integrator_step > max {
            return Err(Error::config(
                "integrator_step",
                format!("{} exceeds the stability bound {max}", self.integrator_step),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        Ok(())
    }

    fn hamiltonian(&self, optical_on: bool) -> Density3 {
        let mut h = Density3::zeros();
        let rf_on = match self.rf {
            RfDrive::AlwaysOn => true,
            RfDrive::GatedDuringPulses => !optical_on,
            RfDrive::Off => false,
        };
        if rf_on {
            let c = Complex64::new(-0.5 * self.ion.omega, 0.0);
            h[(0, 1)] = c;
            h[(1, 0)] = c;
        }
        if let (true, Some(s)) = (optical_on, &self.schedule) {
            let c = Complex64::new(0.5 * s.optical_rabi, 0.0);
            h[(0, 2)] = c;
            h[(2, 0)] = c;
        }
        h
    }

    /// Sorted breakpoints of the piecewise-constant Hamiltonian on `[0, T]`
    /// with a flag saying whether the optical drive is on in each segment.
    fn segments(&self) -> Vec<(f64, f64, bool)> {
        let total = self.ion.t_pi();
        let Some(schedule) = &self.schedule else {
            return vec![(0.0, total, false)];
        };
        let mut out = Vec::with_capacity(2 * schedule.measurement_times.len() + 1);
        let mut cursor = 0.0;
        for (start, end) in schedule.windows() {
            let (start, end) = (start.max(0.0).min(total), end.min(total));
            if start > cursor {
                out.push((cursor, start, false));
            }
            if end > start {
                out.push((start, end, true));
            }
            cursor = end;
        }
        if total > cursor {
            out.push((cursor, total, false));
        }
        out
    }
}

/// 1/(fastest active rate) among Γ, Ω and Ω_opt.
pub fn fastest_timescale(ion: &IonConfig, schedule: Option<&PulseSchedule>, rf: RfDrive) -> f64 {
    let mut rates = vec![ion.gamma()];
    if rf != RfDrive::Off {
        rates.push(ion.omega);
    }
    if let Some(s) = schedule {
        rates.push(s.optical_rabi);
    }
    let fastest = rates.into_iter().fold(0.0_f64, f64::max);
    if fastest > 0.0 {
        1.0 / fastest
    } else {
        ion.t_pi()
    }
}

/// Right-hand side of the master equation for a fixed Hamiltonian.
fn lindblad_rhs(h: &Density3, gamma: f64, rho: Density3) -> Density3 {
    let minus_i = Complex64::new(0.0, -1.0);
    let mut d = (h.matmul(&rho) - rho.matmul(h)).scale(minus_i);
    if gamma > 0.0 {
        // L ρ L† = ρ₃₃ |1⟩⟨1|, {L†L, ρ} touches row and column 3
        let mut jump = Density3::zeros();
        jump[(0, 0)] = rho[(2, 2)];
        for k in 0..3 {
            jump[(2, k)] -= rho[(2, k)] * 0.5;
            jump[(k, 2)] -= rho[(k, 2)] * 0.5;
        }
        d = d + jump * gamma;
    }
    d
}

/// Stored `(time, state)` pairs of one integration, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<(f64, Density3)>,
}

impl Trajectory {
    pub fn points(&self) -> &[(f64, Density3)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn final_state(&self) -> &(f64, Density3) {
        self.points
            .last()
            .expect("trajectory always holds the initial state")
    }
}

fn check_step(time: f64, rho: &Density3) -> Result<()> {
    let d = validate_density(rho);
    if d.within(
        LINDBLAD_HERMITICITY_TOL,
        LINDBLAD_TRACE_TOL,
        LINDBLAD_MIN_EIGENVALUE,
    ) {
        Ok(())
    } else {
        Err(Error::Integration {
            time,
            message: d.to_string(),
        })
    }
}

/// Integrates the three-level master equation over `[0, T]`.
///
/// Every pulse edge is a step boundary; within a segment the step is the
/// largest `T_seg/m` not exceeding `integrator_step`.
pub fn integrate_lindblad(cfg: &LindbladConfig, rho0: &Density3) -> Result<Trajectory> {
    cfg.check()?;
    let d0 = validate_density(rho0);
    if !d0.within(HERMITICITY_TOL, TRACE_TOL, MIN_EIGENVALUE_TOL) {
        return Err(Error::InvalidState(format!("initial state: {d0}")));
    }

    let mut rho = *rho0;
    let mut points = vec![(0.0, rho)];
    let mut counter = 0usize;
    for (start, end, optical_on) in cfg.segments() {
        let h = cfg.hamiltonian(optical_on);
        let len = end - start;
        let steps = (len / cfg.integrator_step).ceil().max(1.0) as usize;
        let dt = len / steps as f64;
        for i in 1..=steps {
            rho = rk4_step(rho, dt, |r| lindblad_rhs(&h, cfg.gamma, r));
            let t = if i == steps {
                end
            } else {
                start + i as f64 * dt
            };
            check_step(t, &rho)?;
            counter += 1;
            if counter.is_multiple_of(cfg.record_every) {
                points.push((t, rho));
            }
        }
    }
    let total = cfg.ion.t_pi();
    if points.last().map(|p| p.0) != Some(total) {
        points.push((total, rho));
    }
    Ok(Trajectory { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSample {
    pub time: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

pub fn populations(traj: &Trajectory) -> Vec<PopulationSample> {
    traj.points
        .iter()
        .map(|(time, rho)| {
            let [p1, p2, p3] = rho.populations();
            PopulationSample {
                time: *time,
                p1,
                p2,
                p3,
            }
        })
        .collect()
}

/// P₂(T) of the three-level model started in level 1.
pub fn lindblad_p2(cfg: &LindbladConfig) -> Result<f64> {
    let mut cfg = cfg.clone();
    cfg.record_every = usize::MAX;
    let traj = integrate_lindblad(&cfg, &Density3::basis(1))?;
    Ok(traj.final_state().1.populations()[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::density_from_bloch;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_bloch_eq(a: BlochVector, b: BlochVector, eps: f64) {
        assert_abs_diff_eq!(a.r1, b.r1, epsilon = eps);
        assert_abs_diff_eq!(a.r2, b.r2, epsilon = eps);
        assert_abs_diff_eq!(a.r3, b.r3, epsilon = eps);
    }

    #[test]
    fn pi_pulse_inverts_population() {
        let r = evolve_bloch(&BlochVector::GROUND, 1.0, PI).unwrap();
        assert_bloch_eq(r, BlochVector::new(0.0, 0.0, 1.0), 1e-15);
    }

    #[test]
    fn quarter_rotation() {
        let r = evolve_bloch(&BlochVector::GROUND, 2.0, PI / 4.0).unwrap();
        assert_bloch_eq(r, BlochVector::new(0.0, 1.0, 0.0), 1e-15);
    }

    #[test]
    fn full_rotation_is_identity() {
        let r0 = BlochVector::new(0.3, -0.4, 0.5);
        let r = evolve_bloch(&r0, 1.0, 2.0 * PI).unwrap();
        assert_bloch_eq(r, r0, 1e-14);
    }

    #[test]
    fn negative_duration_rejected() {
        assert!(matches!(
            evolve_bloch(&BlochVector::GROUND, 1.0, -1e-3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bloch_rotation_matches_cross_product() {
        // central difference of the rotation against ω × R
        let r0 = BlochVector::new(0.2, 0.5, -0.6);
        let (omega, h) = (1.7, 1e-5);
        let plus = evolve_bloch(&r0, omega, h).unwrap();
        let minus = evolve_bloch(&r0, omega, 0.0).unwrap();
        let d2 = (plus.r2 - minus.r2) / h;
        let d3 = (plus.r3 - minus.r3) / h;
        assert_abs_diff_eq!(d2, -omega * r0.r3, epsilon = 1e-4);
        assert_abs_diff_eq!(d3, omega * r0.r2, epsilon = 1e-4);
        assert_eq!(plus.r1, r0.r1);
    }

    #[test]
    fn projection_examples() {
        let mut rho = Density2::diagonal([0.3, 0.7]);
        rho[(0, 1)] = Complex64::new(0.2, 0.0);
        rho[(1, 0)] = Complex64::new(0.2, 0.0);
        assert_eq!(apply_projection(&rho), Density2::diagonal([0.3, 0.7]));

        let g = Density2::diagonal([1.0, 0.0]);
        assert_eq!(apply_projection(&g), g);

        let plus = density_from_bloch(&BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(apply_projection(&plus), Density2::diagonal([0.5, 0.5]));
    }

    fn free_config(omega: f64, tau_sp: f64, rf: RfDrive) -> LindbladConfig {
        let ion = IonConfig::new(omega, tau_sp, 1).unwrap();
        let mut cfg = LindbladConfig::new(ion, None, rf, 1e-3).unwrap();
        let step = cfg.max_step() / 5.0;
        cfg = cfg.with_step(step).unwrap();
        cfg
    }

    #[test]
    fn pure_decay_of_level_three() {
        let cfg = free_config(1.0, 0.7, RfDrive::Off);
        let traj = integrate_lindblad(&cfg, &Density3::basis(3)).unwrap();
        for s in populations(&traj) {
            let expected = (-s.time / 0.7).exp();
            assert_abs_diff_eq!(s.p3, expected, epsilon = 1e-8);
            assert_abs_diff_eq!(s.p1, 1.0 - expected, epsilon = 1e-8);
            assert_abs_diff_eq!(s.p2, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn uninterrupted_pi_pulse_reaches_level_two() {
        for tau_sp in [0.05, 1.0, f64::INFINITY] {
            let cfg = free_config(2.0, tau_sp, RfDrive::AlwaysOn);
            let traj = integrate_lindblad(&cfg, &Density3::basis(1)).unwrap();
            let last = populations(&traj).pop().unwrap();
            assert_abs_diff_eq!(last.time, PI / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(last.p2, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn no_dynamics_is_constant() {
        let cfg = free_config(1.0, f64::INFINITY, RfDrive::Off);
        let mut rho0 = Density3::diagonal([0.2, 0.3, 0.5]);
        rho0[(0, 2)] = Complex64::new(0.1, 0.05);
        rho0[(2, 0)] = Complex64::new(0.1, -0.05);
        let traj = integrate_lindblad(&cfg, &rho0).unwrap();
        assert!(traj.len() > 2);
        for (_, rho) in traj.points() {
            assert_eq!(*rho, rho0);
        }
        let pops = populations(&integrate_lindblad(&cfg, &Density3::basis(1)).unwrap());
        assert!(pops
            .iter()
            .all(|s| s.p1 == 1.0 && s.p2 == 0.0 && s.p3 == 0.0));
    }

    #[test]
    fn two_level_block_follows_bloch_precession() {
        let cfg = free_config(1.3, f64::INFINITY, RfDrive::AlwaysOn);
        let r0 = BlochVector::new(0.6, -0.3, 0.5);
        let rho2 = density_from_bloch(&r0).unwrap();
        let mut rho0 = Density3::zeros();
        for j in 0..2 {
            for k in 0..2 {
                rho0[(j, k)] = rho2[(j, k)];
            }
        }
        let traj = integrate_lindblad(&cfg, &rho0).unwrap();
        for (t, rho) in traj.points() {
            let expected = evolve_bloch(&r0, 1.3, *t).unwrap();
            let r1 = (rho[(0, 1)] + rho[(1, 0)]).re;
            let r2 = (Complex64::i() * (rho[(0, 1)] - rho[(1, 0)])).re;
            let r3 = (rho[(1, 1)] - rho[(0, 0)]).re;
            assert_bloch_eq(BlochVector::new(r1, r2, r3), expected, 1e-8);
        }
    }

    #[test]
    fn step_bound_is_enforced() {
        let ion = IonConfig::new(1.0, 0.1, 1).unwrap();
        let err = LindbladConfig::new(ion, None, RfDrive::AlwaysOn, 0.1 / 19.0).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(LindbladConfig::new(ion, None, RfDrive::AlwaysOn, 0.1 / 20.0).is_ok());
    }

    #[test]
    fn invalid_initial_state_rejected() {
        let cfg = free_config(1.0, 1.0, RfDrive::AlwaysOn);
        let err = integrate_lindblad(&cfg, &Density3::diagonal([0.6, 0.6, 0.0])).unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
    }

    #[test]
    fn schedule_invariants() {
        let s = PulseSchedule::pi_pulses(PI, 8, 0.01).unwrap();
        assert_eq!(s.measurement_times().len(), 8);
        assert!((s.measurement_times()[7] - PI).abs() <= 1e-12 * PI);
        assert!(s.measurement_times().windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!(
            s.optical_rabi() * s.optical_pulse_duration(),
            PI,
            epsilon = 1e-12
        );
        assert!(PulseSchedule::pi_pulses(PI, 8, PI / 8.0).is_err());
        assert!(PulseSchedule::new(vec![1.0, 0.5], 0.1, 1.0).is_err());
    }

    #[test]
    fn segments_cover_the_pulse_interval() {
        let ion = IonConfig::new(1.0, 0.02, 4).unwrap();
        let cfg = LindbladConfig::zeno(ion, 0.05).unwrap();
        let segs = cfg.segments();
        assert_eq!(segs.first().unwrap().0, 0.0);
        assert_eq!(segs.last().unwrap().1, PI);
        assert!(segs.windows(2).all(|w| w[0].1 == w[1].0));
        assert_eq!(segs.iter().filter(|s| s.2).count(), 4);
    }

    #[test]
    fn optical_pi_pulse_empties_level_one() {
        // RF off, no decay: a square π pulse on 1↔3 moves all population to 3
        let ion = IonConfig::new(1.0, f64::INFINITY, 1).unwrap();
        let schedule = PulseSchedule::pi_pulses(PI, 1, 0.1).unwrap();
        let cfg = LindbladConfig::new(ion, Some(schedule), RfDrive::Off, 1e-4).unwrap();
        let traj = integrate_lindblad(&cfg, &Density3::basis(1)).unwrap();
        let p = traj.final_state().1.populations();
        assert_abs_diff_eq!(p[2], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gated_rf_pauses_during_pulses() {
        let ion = IonConfig::new(1.0, f64::INFINITY, 1).unwrap();
        let schedule = PulseSchedule::pi_pulses(PI, 1, 0.5).unwrap();
        let step = 1e-3;
        let on = LindbladConfig::new(ion, Some(schedule.clone()), RfDrive::AlwaysOn, step).unwrap();
        let gated =
            LindbladConfig::new(ion, Some(schedule), RfDrive::GatedDuringPulses, step).unwrap();
        // before the pulse window both agree: rotation angle π − 0.5
        let a = integrate_lindblad(&on, &Density3::basis(1)).unwrap();
        let b = integrate_lindblad(&gated, &Density3::basis(1)).unwrap();
        let before = |t: &Trajectory| {
            t.points()
                .iter()
                .find(|(time, _)| (*time - (PI - 0.5)).abs() < 1e-9)
                .unwrap()
                .1
        };
        assert_eq!(before(&a), before(&b));
        let pb = b.final_state().1.populations();
        // gated: the 1↔3 pulse acts alone on the level-1 remainder
        assert_abs_diff_eq!(pb[1], (0.5 * (PI - 0.5)).sin().powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(pb[2], (0.5 * (PI - 0.5)).cos().powi(2), epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(
            r1 in -0.57..0.57f64, r2 in -0.57..0.57f64, r3 in -0.57..0.57f64,
            omega in 0.01..10.0f64, dt in 0.0..100.0f64,
        ) {
            let r0 = BlochVector::new(r1, r2, r3);
            let r = evolve_bloch(&r0, omega, dt).unwrap();
            prop_assert!((r.norm() - r0.norm()).abs() < 1e-12);
        }

        #[test]
        fn projection_keeps_inversion_and_does_not_grow(
            r1 in -0.57..0.57f64, r2 in -0.57..0.57f64, r3 in -0.57..0.57f64,
        ) {
            let r0 = BlochVector::new(r1, r2, r3);
            let rho = density_from_bloch(&r0).unwrap();
            let before = crate::state::bloch_from_density(&rho).unwrap();
            let projected = crate::state::bloch_from_density(&apply_projection(&rho)).unwrap();
            prop_assert_eq!(projected.r3, before.r3);
            prop_assert!(projected.norm() <= before.norm());
            prop_assert_eq!(apply_projection(&rho).trace(), rho.trace());
        }
    }
}
