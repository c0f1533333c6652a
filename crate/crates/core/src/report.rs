//! Reproducible tabular output: CSV files and flat key=value manifests.
//!
//! Numbers are printed with 17 significant digits so a 64-bit float survives
//! a round trip through text exactly; identical runs produce byte-identical
//! files.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

/// Render a float with 17 significant digits.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV with a header row; every cell is already a string.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Ordered key=value store for the run manifest.
#[derive(Debug, Default, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, g17(value));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for &x in &[
            1.0,
            -0.9672554825794053,
            std::f64::consts::PI,
            1.0e-300,
            6.02e23,
        ] {
            let back: f64 = g17(x).parse().unwrap();
            assert_eq!(back, x, "{x} printed as {}", g17(x));
        }
    }
}
