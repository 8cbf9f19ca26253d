//! Configuration, sweeps over the pulse count and table output.

mod config;
mod emit;
mod sweep;

pub use config::{
    Config, Format, IonSection, NeutronSection, OutputSection, ScheduleSection, SweepSection,
    STEP_OVERRIDE_ENV,
};
pub use emit::{emit, format_number, ION_CSV_HEADER, NEUTRON_CSV_HEADER};
pub use sweep::{
    lindblad_check, run_ion_sweep, run_neutron_sweep, CheckRow, IonMetadata, IonRow, IonSweep,
    IonSweepConfig, LindbladCheck, NeutronMetadata, NeutronRow, NeutronSweep, RegimeFlag,
    LINDBLAD_AGREEMENT_TOL,
};

use crate::error::Result;

/// How sweep rows are evaluated. `Parallel` falls back to sequential
/// evaluation when the crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `items`, keeping input order in the output.
    pub fn try_map<T, U, F>(self, items: &[T], f: F) -> Result<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Result<U> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
