//! Shared number formatting for every CSV the crate writes.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which is enough for `str::parse::<f64>` to recover the exact bit pattern.

use crate::error::{Error, Result};

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

pub fn parse_f64(field: &str, what: &'static str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(what, format!("{field:?}: {e}")))
}

pub fn parse_usize(field: &str, what: &'static str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::parse(what, format!("{field:?}: {e}")))
}
