use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::config::Format;
use super::sweep::{IonSweep, NeutronSweep};

pub const ION_CSV_HEADER: &str = "n,p2_projection,p2_asymptotic,p2_limited,p2_lindblad,regime_flag";
pub const NEUTRON_CSV_HEADER: &str = "n,p_up_ideal,p_up_limited,regime_flag";

const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, trailing zeros trimmed, plain
/// notation for exponents in [−5, 12) and `1.5e-7` style otherwise.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub trait Table: Serialize {
    fn header(&self) -> &'static str;
    fn records(&self) -> Vec<Vec<String>>;
}

impl Table for IonSweep {
    fn header(&self) -> &'static str {
        ION_CSV_HEADER
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    format_number(r.p2_projection),
                    format_number(r.p2_asymptotic),
                    format_number(r.p2_limited),
                    r.p2_lindblad.map(format_number).unwrap_or_default(),
                    r.regime_flag.as_str().to_string(),
                ]
            })
            .collect()
    }
}

impl Table for NeutronSweep {
    fn header(&self) -> &'static str {
        NEUTRON_CSV_HEADER
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    format_number(r.p_up_ideal),
                    format_number(r.p_up_limited),
                    r.regime_flag.as_str().to_string(),
                ]
            })
            .collect()
    }
}

fn write_table<T: Table, W: Write>(result: &T, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(result.header().split(','))
                .map_err(io::Error::from)?;
            for record in result.records() {
                w.write_record(&record).map_err(io::Error::from)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, result).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes `result` to `destination`, or to stdout when it is `None`.
pub fn emit<T: Table>(result: &T, format: Format, destination: Option<&Path>) -> Result<()> {
    match destination {
        Some(path) => write_table(result, format, BufWriter::new(File::create(path)?)),
        None => write_table(result, format, io::stdout().lock()),
    }
}
