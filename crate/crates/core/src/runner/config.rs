//! TOML experiment configuration. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    RfDrive, DEFAULT_PULSE_FRACTION, DEFAULT_STEPS_PER_TIMESCALE, MIN_STEPS_PER_TIMESCALE,
};
use crate::neutron::{NeutronBeam, NeutronConfig};

/// Debug-only override of the master-equation step.
pub const STEP_OVERRIDE_ENV: &str = "ZENO_SIM_STEP_OVERRIDE";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub ion: Option<IonSection>,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub neutron: Option<NeutronSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonSection {
    pub omega: f64,
    pub tau_sp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    /// Optical pulse length as a fraction of the spacing T/N.
    pub pulse_fraction: f64,
    /// Ω_opt × duration.
    pub pulse_area: f64,
    pub rf: RfDrive,
    pub steps_per_timescale: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            pulse_fraction: DEFAULT_PULSE_FRACTION,
            pulse_area: PI,
            rf: RfDrive::AlwaysOn,
            steps_per_timescale: DEFAULT_STEPS_PER_TIMESCALE,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutronSection {
    pub delta_e_m: Option<f64>,
    pub delta_e_k: Option<f64>,
    pub mu: Option<f64>,
    pub b_field: Option<f64>,
    pub length_l: Option<f64>,
    pub v0: Option<f64>,
    pub delta_v: Option<f64>,
    pub mass: Option<f64>,
    pub delta_x: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n_list: Vec<u64>,
    pub lindblad: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config(
                "output.format",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
    pub path: Option<String>,
}

fn positive(path: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| format!("line {}", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_else(|| "<root>".into());
            Error::config(path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        if let Some(ion) = &self.ion {
            positive("ion.omega", ion.omega)?;
            if !(ion.tau_sp > 0.0) {
                return Err(Error::config(
                    "ion.tau_sp",
                    format!("must be positive, got {}", ion.tau_sp),
                ));
            }
        }
        let s = &self.schedule;
        positive("schedule.pulse_fraction", s.pulse_fraction)?;
        if s.pulse_fraction >= 1.0 {
            return Err(Error::config(
                "schedule.pulse_fraction",
                "optical pulse must be shorter than the pulse spacing",
            ));
        }
        positive("schedule.pulse_area", s.pulse_area)?;
        if !(s.steps_per_timescale >= MIN_STEPS_PER_TIMESCALE) {
            return Err(Error::config(
                "schedule.steps_per_timescale",
                format!(
                    "must be at least {MIN_STEPS_PER_TIMESCALE}, got {}",
                    s.steps_per_timescale
                ),
            ));
        }
        if s.rf == RfDrive::Off {
            return Err(Error::config(
                "schedule.rf",
                "the RF π pulse cannot be switched off",
            ));
        }
        if let Some(n) = &self.neutron {
            n.resolve()?;
        }
        if let Some(i) = self.sweep.n_list.iter().position(|&n| n == 0) {
            return Err(Error::config(
                format!("sweep.n_list[{i}]"),
                "pulse counts must be at least 1",
            ));
        }
        Ok(())
    }

    pub fn ion(&self) -> Result<IonSection> {
        self.ion
            .ok_or_else(|| Error::config("ion", "missing section [ion]"))
    }

    pub fn neutron(&self) -> Result<NeutronConfig> {
        self.neutron
            .ok_or_else(|| Error::config("neutron", "missing section [neutron]"))?
            .resolve()
    }
}

impl NeutronSection {
    fn beam(&self) -> Result<Option<NeutronBeam>> {
        let raw = [self.mu, self.b_field, self.v0, self.delta_v, self.mass];
        if raw.iter().all(Option::is_none) {
            if self.length_l.is_some() {
                return Err(Error::config(
                    "neutron.length_l",
                    "requires mu, b_field, v0, delta_v and mass",
                ));
            }
            return Ok(None);
        }
        let names = ["mu", "b_field", "v0", "delta_v", "mass"];
        let mut values = [0.0; 5];
        for ((name, value), out) in names.iter().zip(raw).zip(values.iter_mut()) {
            let path = format!("neutron.{name}");
            let v = value
                .ok_or_else(|| Error::config(&path, "raw beam inputs must be given together"))?;
            positive(&path, v)?;
            *out = v;
        }
        if let Some(l) = self.length_l {
            positive("neutron.length_l", l)?;
        }
        let [mu, b_field, v0, delta_v, mass] = values;
        Ok(Some(NeutronBeam {
            mu,
            b_field,
            length_l: self.length_l,
            v0,
            delta_v,
            mass,
            delta_x: self.delta_x,
        }))
    }

    pub fn resolve(&self) -> Result<NeutronConfig> {
        let beam = self.beam()?;
        let to_config = |e: Error| match e {
            Error::InvalidArgument(m) => Error::config("neutron", m),
            other => other,
        };
        match (self.delta_e_m, self.delta_e_k, beam) {
            (Some(m), Some(k), None) => {
                positive("neutron.delta_e_m", m)?;
                positive("neutron.delta_e_k", k)?;
                NeutronConfig::from_energies(m, k).map_err(to_config)
            }
            (None, None, Some(beam)) => NeutronConfig::from_beam(beam).map_err(to_config),
            (m, k, Some(beam)) => {
                let m = m.unwrap_or_else(|| beam.magnetic_gap());
                let k = k.unwrap_or_else(|| beam.kinetic_spread());
                positive("neutron.delta_e_m", m)?;
                positive("neutron.delta_e_k", k)?;
                NeutronConfig::with_beam(m, k, beam).map_err(to_config)
            }
            (None, _, None) => Err(Error::config("neutron.delta_e_m", "missing")),
            (_, None, None) => Err(Error::config("neutron.delta_e_k", "missing")),
        }
    }
}
