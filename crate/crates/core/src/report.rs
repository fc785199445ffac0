//! Structured record of a verification experiment.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One measured value. `x` is the abscissa used for plotting (time, scale,
/// log|z|, trial index, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub descriptor: String,
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: String,
    pub parameters: BTreeMap<String, String>,
    pub samples: Vec<Sample>,
    pub stats: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub config_hash: String,
}

impl EstimateReport {
    pub fn new(id: impl Into<String>) -> Self {
        EstimateReport {
            id: id.into(),
            parameters: BTreeMap::new(),
            samples: Vec::new(),
            stats: BTreeMap::new(),
            verdict: Verdict::Fail,
            notes: Vec::new(),
            config_hash: String::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, descriptor: impl Into<String>, x: f64, value: f64) {
        self.samples.push(Sample {
            descriptor: descriptor.into(),
            x,
            value,
        });
    }

    pub fn stat(&mut self, key: &str, value: f64) {
        self.stats.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn get_stat(&self, key: &str) -> Option<f64> {
        self.stats.get(key).copied()
    }

    /// Samples whose descriptor starts with `prefix`.
    pub fn samples_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Sample> + 'a {
        self.samples
            .iter()
            .filter(move |s| s.descriptor.starts_with(prefix))
    }

    /// RFC-4180 CSV: `experiment,descriptor,x,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["experiment", "descriptor", "x", "value"])?;
        for s in &self.samples {
            out.write_record([
                self.id.as_str(),
                s.descriptor.as_str(),
                &fmt_f64(s.x),
                &fmt_f64(s.value),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("experiment: {}\nverdict: {:?}\n", self.id, self.verdict);
        if !self.config_hash.is_empty() {
            s.push_str(&format!("config: {}\n", self.config_hash));
        }
        for (k, v) in &self.parameters {
            s.push_str(&format!("param {k} = {v}\n"));
        }
        for (k, v) in &self.stats {
            s.push_str(&format!("stat  {k} = {}\n", fmt_f64(*v)));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

/// Shortest round-trip representation; stable across runs.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
