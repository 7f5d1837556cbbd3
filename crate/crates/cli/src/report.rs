use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Rows of one command's CSV report plus the key outputs for the summary.
#[derive(Debug)]
pub struct Report {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub outputs: Value,
    /// Failed checks of `verify`; the report is still written.
    pub failed_checks: Option<(usize, usize)>,
}

impl Report {
    pub fn new(header: &'static [&'static str], outputs: Value) -> Self {
        Report {
            header,
            rows: Vec::new(),
            outputs,
            failed_checks: None,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: Option<&Path>) -> Result<(), CliError> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Twelve significant digits, fixed-point for moderate magnitudes.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new leading digit.
        if s.trim_start_matches('-')
            .split('.')
            .next()
            .is_some_and(|i| i.len() as i32 > exp + 1 && exp >= 0)
        {
            return format!("{v:.*}", decimals.saturating_sub(1));
        }
        s
    } else {
        format!("{v:.11e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(12.0), "12.0000000000");
        assert_eq!(num(747.920211058), "747.920211058");
        assert_eq!(num(-0.5), "-0.500000000000");
        assert_eq!(num(1e-9), "1.00000000000e-9");
        assert_eq!(num(3.5e13), "3.50000000000e13");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(9.9999999999999), "10.0000000000");
    }
}
