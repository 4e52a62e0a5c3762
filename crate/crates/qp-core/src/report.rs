//! Report serialization helpers.
//!
//! Experiment outputs must be byte-identical across reruns of the same
//! config, so floats are always written with 17 significant digits and JSON
//! object order follows struct declaration order.

use serde::Serialize;
use std::io;

/// serde_json formatter printing every float with 17 significant digits.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{:e}", FmtF64(value))
        } else if value.is_nan() {
            writer.write_all(b"null")
        } else if value > 0.0 {
            writer.write_all(b"1e999")
        } else {
            writer.write_all(b"-1e999")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

struct FmtF64(f64);

impl std::fmt::LowerExp for FmtF64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

/// Serialize with 17-significant-digit floats.
pub fn to_json_17<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

/// Format one float for CSV emission (17 significant digits).
pub fn fmt_f64(value: f64) -> String {
    format!("{:.16e}", value)
}

/// Structured scan result with provenance metadata.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<T: Serialize> {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_echo: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> ExperimentReport<T> {
    pub fn new(experiment: &str, seed: u64, config_echo: serde_json::Value, result: T) -> Self {
        Self {
            schema_version: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            seed,
            config_echo,
            result,
        }
    }
}
