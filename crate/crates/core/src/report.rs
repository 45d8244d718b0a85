//! Machine-readable run reports.
//!
//! Every scenario emits a [`Report`] with the same shape:
//! `{"op":…, "seed":…, "params":…, "residuals":{…}, "spectra":[…], "pass":…}`.
//! The text format is a rendering of the same data, never a separate
//! computation path. Field order is fixed by the struct and residuals are
//! kept in a sorted map, so serializing the same report twice is
//! byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::SpectrumMultiset;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledSpectrum {
    pub label: String,
    pub spectrum: SpectrumMultiset,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub op: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub residuals: BTreeMap<String, f64>,
    pub spectra: Vec<LabeledSpectrum>,
    pub pass: bool,
}

impl Report {
    pub fn new(op: impl Into<String>, seed: u64) -> Self {
        Report {
            op: op.into(),
            seed,
            params: serde_json::Value::Object(serde_json::Map::new()),
            residuals: BTreeMap::new(),
            spectra: Vec::new(),
            pass: true,
        }
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn residual(&mut self, name: impl Into<String>, value: f64) {
        self.residuals.insert(name.into(), value);
    }

    pub fn spectrum(&mut self, label: impl Into<String>, spectrum: SpectrumMultiset) {
        self.spectra.push(LabeledSpectrum {
            label: label.into(),
            spectrum,
        });
    }

    /// Records a checked bound: stores the residual and folds the check
    /// into the overall pass flag.
    pub fn check(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let name = name.into();
        if value > bound {
            self.pass = false;
        }
        self.residuals.insert(name, value);
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Human-readable rendering of the same report.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "op: {}", self.op);
        let _ = writeln!(out, "seed: {}", self.seed);
        if let Some(obj) = self.params.as_object() {
            if !obj.is_empty() {
                let _ = writeln!(out, "params:");
                for (k, v) in obj {
                    match v.as_array() {
                        Some(items) => {
                            let _ = writeln!(out, "  {k}:");
                            for item in items {
                                let _ = writeln!(out, "    - {item}");
                            }
                        }
                        None => {
                            let _ = writeln!(out, "  {k}: {v}");
                        }
                    }
                }
            }
        }
        if !self.residuals.is_empty() {
            let _ = writeln!(out, "residuals:");
            for (k, v) in &self.residuals {
                let _ = writeln!(out, "  {k}: {v:.3e}");
            }
        }
        for ls in &self.spectra {
            let rendered: Vec<String> = ls
                .spectrum
                .values()
                .iter()
                .zip(ls.spectrum.multiplicities())
                .map(|(z, m)| {
                    if z.im.abs() < 1e-12 {
                        format!("{:.6}×{m}", z.re)
                    } else {
                        format!("({:.6}{:+.6}i)×{m}", z.re, z.im)
                    }
                })
                .collect();
            let _ = writeln!(out, "spectrum {}: {}", ls.label, rendered.join(", "));
        }
        let _ = writeln!(out, "pass: {}", self.pass);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_serialization_is_deterministic() {
        let mut r = Report::new("demo", 3).with_params(serde_json::json!({"n": 2, "dim_r": 2}));
        r.check("law", 1e-14, 1e-9);
        r.check("history", 2e-14, 1e-9);
        assert!(r.pass);
        assert_eq!(r.to_json(), r.clone().to_json());
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.op, "demo");
        assert_eq!(back.residuals.len(), 2);
    }

    #[test]
    fn failed_check_clears_pass() {
        let mut r = Report::new("demo", 0);
        r.check("law", 1.0, 1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn text_rendering_lists_all_fields() {
        let mut r = Report::new("demo", 1);
        r.check("law", 1e-12, 1e-9);
        let text = r.to_text();
        assert!(text.contains("op: demo"));
        assert!(text.contains("law"));
        assert!(text.contains("pass: true"));
    }
}
