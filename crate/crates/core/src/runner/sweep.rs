use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{fastest_timescale, lindblad_p2, IonConfig, LindbladConfig, PulseSchedule};
use crate::neutron::{n_max_for_phi, p_up_ideal, p_up_limited, phi_zero, NeutronConfig};
use crate::projection::{n_max, p2_asymptotic, p2_closed_form, p2_decoherence_limited};

use super::config::{IonSection, ScheduleSection};
use super::Execution;

/// Agreement required between the three-level model and the projection
/// closed form in `lindblad-check`.
pub const LINDBLAD_AGREEMENT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeFlag {
    Valid,
    IllDefined,
}

impl RegimeFlag {
    fn for_n(n: u64, n_max: Option<u64>) -> Self {
        match n_max {
            Some(limit) if n <= limit => RegimeFlag::Valid,
            _ => RegimeFlag::IllDefined,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeFlag::Valid => "valid",
            RegimeFlag::IllDefined => "ill-defined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonRow {
    pub n: u64,
    pub p2_projection: f64,
    pub p2_asymptotic: f64,
    pub p2_limited: f64,
    pub p2_lindblad: Option<f64>,
    pub regime_flag: RegimeFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonMetadata {
    pub ion: IonSection,
    pub schedule: ScheduleSection,
    pub n_list: Vec<u64>,
    pub lindblad: bool,
    /// `None` when Ωτ_sp > π and no pulse count is admissible.
    pub n_max: Option<u64>,
    /// Smallest master-equation step used, if that column was computed.
    pub integrator_step: Option<f64>,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSweep {
    pub metadata: IonMetadata,
    pub rows: Vec<IonRow>,
}

/// Everything an ion sweep needs, already validated.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSweepConfig {
    pub ion: IonSection,
    pub schedule: ScheduleSection,
    pub n_list: Vec<u64>,
    pub lindblad: bool,
    pub step_override: Option<f64>,
}

impl IonSweepConfig {
    pub fn new(ion: IonSection, n_list: Vec<u64>) -> Self {
        Self {
            ion,
            schedule: ScheduleSection::default(),
            n_list,
            lindblad: false,
            step_override: None,
        }
    }

    fn ion_config(&self, n: u64) -> Result<IonConfig> {
        IonConfig::new(self.ion.omega, self.ion.tau_sp, n)
            .map_err(|e| Error::config("ion", e.to_string()))
    }

    /// Master-equation setup for pulse count `n`.
    pub fn lindblad_config(&self, n: u64) -> Result<LindbladConfig> {
        let ion = self.ion_config(n)?;
        let duration = self.schedule.pulse_fraction * ion.spacing();
        let schedule =
            PulseSchedule::equispaced(ion.t_pi(), n, duration, self.schedule.pulse_area / duration)
                .map_err(|e| Error::config("schedule", e.to_string()))?;
        let step = match self.step_override {
            Some(step) => step,
            None => {
                fastest_timescale(&ion, Some(&schedule), self.schedule.rf)
                    / self.schedule.steps_per_timescale
            }
        };
        LindbladConfig::new(ion, Some(schedule), self.schedule.rf, step)
    }
}

fn sorted_unique(n_list: &[u64]) -> Vec<u64> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Tabulates the closed forms (and, on request, the three-level model) for
/// every pulse count in the config. Rows come back sorted by `n`.
pub fn run_ion_sweep(cfg: &IonSweepConfig, exec: Execution) -> Result<IonSweep> {
    if let Some(i) = cfg.n_list.iter().position(|&n| n == 0) {
        return Err(Error::config(
            format!("sweep.n_list[{i}]"),
            "pulse counts must be at least 1",
        ));
    }
    let reference = cfg.ion_config(1)?;
    let limit = n_max(&reference).ok();
    let ns = sorted_unique(&cfg.n_list);

    let lindblad_configs = if cfg.lindblad {
        ns.iter()
            .map(|&n| cfg.lindblad_config(n).map(Some))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![None; ns.len()]
    };
    let integrator_step = lindblad_configs
        .iter()
        .flatten()
        .map(|c| c.integrator_step)
        .reduce(f64::min);

    let jobs: Vec<(u64, Option<LindbladConfig>)> = ns.into_iter().zip(lindblad_configs).collect();
    let rows = exec.try_map(&jobs, |(n, lindblad)| {
        let n = *n;
        let p2_lindblad = lindblad
            .as_ref()
            .map(lindblad_p2)
            .transpose()
            .map_err(|e| Error::Row {
                n,
                source: Box::new(e),
            })?;
        Ok(IonRow {
            n,
            p2_projection: p2_closed_form(n)?,
            p2_asymptotic: p2_asymptotic(n)?,
            p2_limited: p2_decoherence_limited(n, &reference)?,
            p2_lindblad,
            regime_flag: RegimeFlag::for_n(n, limit),
        })
    })?;

    Ok(IonSweep {
        metadata: IonMetadata {
            ion: cfg.ion,
            schedule: cfg.schedule,
            n_list: cfg.n_list.clone(),
            lindblad: cfg.lindblad,
            n_max: limit,
            integrator_step,
            timestamp: timestamp(),
        },
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutronRow {
    pub n: u64,
    pub p_up_ideal: f64,
    pub p_up_limited: f64,
    pub regime_flag: RegimeFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutronMetadata {
    pub neutron: NeutronConfig,
    pub n_list: Vec<u64>,
    pub phi0: f64,
    pub n_max: u64,
    pub p_up_at_n_max: f64,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutronSweep {
    pub metadata: NeutronMetadata,
    pub rows: Vec<NeutronRow>,
}

pub fn run_neutron_sweep(
    cfg: &NeutronConfig,
    n_list: &[u64],
    exec: Execution,
) -> Result<NeutronSweep> {
    if let Some(i) = n_list.iter().position(|&n| n == 0) {
        return Err(Error::config(
            format!("sweep.n_list[{i}]"),
            "pulse counts must be at least 1",
        ));
    }
    let phi0 = phi_zero(cfg)?;
    let limit = n_max_for_phi(phi0).map_err(|e| Error::config("neutron", e.to_string()))?;
    let ns = sorted_unique(n_list);
    let rows = exec.try_map(&ns, |&n| {
        Ok(NeutronRow {
            n,
            p_up_ideal: p_up_ideal(n)?,
            p_up_limited: p_up_limited(n, phi0)?,
            regime_flag: RegimeFlag::for_n(n, Some(limit.n_max)),
        })
    })?;
    Ok(NeutronSweep {
        metadata: NeutronMetadata {
            neutron: *cfg,
            n_list: n_list.to_vec(),
            phi0,
            n_max: limit.n_max,
            p_up_at_n_max: limit.p_up_at_n_max,
            timestamp: timestamp(),
        },
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub n: u64,
    pub p2_lindblad: f64,
    pub p2_projection: f64,
    pub deviation: f64,
    pub regime_flag: RegimeFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladCheck {
    pub rows: Vec<CheckRow>,
    /// Largest deviation over rows inside the valid measurement regime.
    pub max_deviation: f64,
}

impl LindbladCheck {
    pub fn passed(&self) -> bool {
        self.max_deviation < LINDBLAD_AGREEMENT_TOL
    }
}

/// Runs the three-level model for each pulse count and compares P₂(T)
/// with the projection closed form.
pub fn lindblad_check(cfg: &IonSweepConfig, exec: Execution) -> Result<LindbladCheck> {
    let mut with_lindblad = cfg.clone();
    with_lindblad.lindblad = true;
    let sweep = run_ion_sweep(&with_lindblad, exec)?;
    let rows: Vec<CheckRow> = sweep
        .rows
        .iter()
        .map(|r| {
            let p2_lindblad = r.p2_lindblad.expect("lindblad column requested");
            CheckRow {
                n: r.n,
                p2_lindblad,
                p2_projection: r.p2_projection,
                deviation: (p2_lindblad - r.p2_projection).abs(),
                regime_flag: r.regime_flag,
            }
        })
        .collect();
    let max_deviation = rows
        .iter()
        .filter(|r| r.regime_flag == RegimeFlag::Valid)
        .map(|r| r.deviation)
        .fold(0.0, f64::max);
    Ok(LindbladCheck {
        rows,
        max_deviation,
    })
}
