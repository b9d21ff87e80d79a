//! Experiment reports and their bit-stable serialization.
//!
//! Keys are sorted (BTreeMap everywhere), floats are written with 12
//! significant digits, and integers are written exactly (up to u128).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => fmt_float(*v),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => Json::Number(Number::from_str(&v.to_string()).expect("integer literal")),
            Value::Float(v) => float_json(*v),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
        }
    }
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl From<$t> for Value {
            fn from(v: $t) -> Value {
                Value::Int(v as i128)
            }
        }
    )*};
}
int_value!(u32, u64, usize, i64, i128);

impl From<u128> for Value {
    fn from(v: u128) -> Value {
        Value::Int(i128::try_from(v).expect("count fits in i128"))
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Value {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Value {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Value {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Value {
        Value::Text(v)
    }
}

/// 12 significant digits in scientific notation; non-finite values as strings.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

fn float_json(v: f64) -> Json {
    if v.is_finite() {
        Json::Number(Number::from_str(&fmt_float(v)).expect("formatted float"))
    } else {
        Json::String(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    /// The implied constant used to evaluate the expression.
    pub constant: f64,
    pub cite: String,
}

/// Quantities from one trial of an experiment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trial {
    pub values: BTreeMap<String, Value>,
    pub bounds: BTreeMap<String, Bound>,
    pub ratios: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

impl Trial {
    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn bound(&mut self, key: &str, value: f64, cite: &str) {
        self.bounds.insert(key.to_string(), Bound { value, constant: 1.0, cite: cite.to_string() });
    }

    pub fn ratio(&mut self, key: &str, v: f64) {
        self.ratios.insert(key.to_string(), v);
    }

    pub fn flag(&mut self, key: &str, ok: bool) {
        self.flags.insert(key.to_string(), ok);
    }

    /// Flat row for tabular output.
    pub fn row(&self) -> BTreeMap<String, Value> {
        let mut row = self.values.clone();
        for (k, b) in &self.bounds {
            row.insert(format!("bound.{k}"), Value::Float(b.value));
        }
        for (k, r) in &self.ratios {
            row.insert(format!("ratio.{k}"), Value::Float(*r));
        }
        for (k, f) in &self.flags {
            row.insert(format!("pass.{k}"), Value::Bool(*f));
        }
        row
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub q: String,
    pub seeds: Vec<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub measured: BTreeMap<String, Value>,
    pub bounds: BTreeMap<String, Bound>,
    pub ratios: BTreeMap<String, f64>,
    pub pass_flags: BTreeMap<String, bool>,
    pub trials: Vec<Trial>,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    /// Folds trials into the summary maps. A single trial is reported as is;
    /// several are summarized by flag pass counts and ratio extremes.
    pub fn from_trials(experiment: &str, q: String, trials: Vec<Trial>) -> ExperimentReport {
        let mut r = ExperimentReport {
            experiment: experiment.to_string(),
            q,
            seeds: Vec::new(),
            parameters: BTreeMap::new(),
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            ratios: BTreeMap::new(),
            pass_flags: BTreeMap::new(),
            trials: Vec::new(),
            runtime_ms: 0,
        };
        if let [t] = trials.as_slice() {
            r.measured = t.values.clone();
            r.bounds = t.bounds.clone();
            r.ratios = t.ratios.clone();
            r.pass_flags = t.flags.clone();
        } else if let Some(first) = trials.first() {
            r.measured.insert("trials".into(), trials.len().into());
            r.bounds = first.bounds.clone();
            for t in &trials {
                for (k, &ok) in &t.flags {
                    *r.pass_flags.entry(k.clone()).or_insert(true) &= ok;
                    let key = format!("{k}_passed");
                    let n = r.measured.entry(key).or_insert(Value::Int(0));
                    if let (Value::Int(c), true) = (n, ok) {
                        *c += 1;
                    }
                }
                for (k, &v) in &t.ratios {
                    let hi = r.ratios.entry(format!("{k}.max")).or_insert(f64::NEG_INFINITY);
                    *hi = hi.max(v);
                    let lo = r.ratios.entry(format!("{k}.min")).or_insert(f64::INFINITY);
                    *lo = lo.min(v);
                }
            }
        }
        r.trials = trials;
        r
    }

    pub fn all_pass(&self) -> bool {
        self.pass_flags.values().all(|&ok| ok)
    }

    pub fn to_json(&self) -> Json {
        let values = |m: &BTreeMap<String, Value>| Json::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect());
        let bounds: Map<String, Json> = self
            .bounds
            .iter()
            .map(|(k, b)| {
                let mut o = Map::new();
                o.insert("cite".into(), Json::String(b.cite.clone()));
                o.insert("constant".into(), float_json(b.constant));
                o.insert("value".into(), float_json(b.value));
                (k.clone(), Json::Object(o))
            })
            .collect();
        let mut o = Map::new();
        o.insert("experiment".into(), Json::String(self.experiment.clone()));
        o.insert("q".into(), Json::String(self.q.clone()));
        o.insert("seeds".into(), Json::Array(self.seeds.iter().map(|&s| Json::Number(s.into())).collect()));
        o.insert("parameters".into(), values(&self.parameters));
        o.insert("measured".into(), values(&self.measured));
        o.insert("bounds".into(), Json::Object(bounds));
        o.insert("ratios".into(), Json::Object(self.ratios.iter().map(|(k, &v)| (k.clone(), float_json(v))).collect()));
        o.insert("pass_flags".into(), Json::Object(self.pass_flags.iter().map(|(k, &v)| (k.clone(), Json::Bool(v))).collect()));
        o.insert("trials".into(), Json::Array(self.trials.iter().map(|t| values(&t.row())).collect()));
        o.insert("runtime_ms".into(), Json::Number(self.runtime_ms.into()));
        Json::Object(o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// JSON: the whole report. CSV: one row per trial, columns sorted by name.
pub fn render(report: &ExperimentReport, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let rows: Vec<BTreeMap<String, Value>> = if report.trials.is_empty() {
                vec![report.measured.clone()]
            } else {
                report.trials.iter().map(Trial::row).collect()
            };
            let columns: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(std::iter::once("trial").chain(columns.iter().map(|c| c.as_str()))).map_err(io)?;
            for (i, row) in rows.iter().enumerate() {
                let cells = columns.iter().map(|c| row.get(*c).map(Value::render).unwrap_or_default());
                w.write_record(std::iter::once(i.to_string()).chain(cells)).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Writes the rendered report to `path`, or stdout when `path` is `None`.
pub fn emit_report(report: &ExperimentReport, format: Format, path: Option<&std::path::Path>) -> Result<(), CliError> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_twelve_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(4096.0), "4.09600000000e3");
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    #[test]
    fn trials_fold_into_counts_and_extremes() {
        let mk = |ok: bool, r: f64| {
            let mut t = Trial::default();
            t.flag("holds", ok);
            t.ratio("dev", r);
            t
        };
        let r = ExperimentReport::from_trials("x", "3".into(), vec![mk(true, 0.5), mk(false, 0.25), mk(true, 2.0)]);
        assert_eq!(r.measured["holds_passed"], Value::Int(2));
        assert_eq!(r.measured["trials"], Value::Int(3));
        assert!(!r.all_pass());
        assert_eq!(r.ratios["dev.max"], 2.0);
        assert_eq!(r.ratios["dev.min"], 0.25);
    }

    #[test]
    fn big_integers_are_exact() {
        let v = Value::from(u128::MAX >> 2).to_json();
        assert_eq!(v.to_string(), (u128::MAX >> 2).to_string());
    }
}
