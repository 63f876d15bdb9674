//! Record series: CSV and NDJSON output, trend slopes and growth fits.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{japanese, DiagnosticsRecord};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 19] = [
    "schema", "t", "E1", "E2", "E3", "X2", "X3", "Etilde2", "Etilde3", "ellinf4", "ellinf5", "ellinf6", "ellinf7",
    "decay2", "decay3", "nullform", "trilinear", "sup_grad", "flags",
];

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("growth fit needs at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("growth fit needs ⟨t⟩ to span a factor {need}, got {got:.3}")]
    ShortSpan { need: f64, got: f64 },
    #[error("growth fit needs positive values (found {0} at t = {1})")]
    NonPositive(f64, f64),
    #[error("series has no {0} values")]
    Missing(&'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `p` in `E(t) ≈ A·⟨t⟩^p`.
    pub exponent: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;
pub const MIN_FIT_SPAN: f64 = 4.0;

/// Least-squares line `y = a + b x`; returns `(a, b)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Fits `log E = log A + p log⟨t⟩` by least squares.
pub fn fit_growth(t: &[f64], values: &[f64]) -> Result<GrowthFit, SeriesError> {
    if t.len() < MIN_FIT_SAMPLES || values.len() != t.len() {
        return Err(SeriesError::TooFewSamples { need: MIN_FIT_SAMPLES, got: t.len().min(values.len()) });
    }
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = japanese(hi) / japanese(lo);
    if span < MIN_FIT_SPAN {
        return Err(SeriesError::ShortSpan { need: MIN_FIT_SPAN, got: span });
    }
    if let Some((tt, v)) = t.iter().zip(values).find(|(_, v)| !(**v > 0.0)) {
        return Err(SeriesError::NonPositive(*v, *tt));
    }
    let x: Vec<f64> = t.iter().map(|t| japanese(*t).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (a, b) = least_squares(&x, &y);
    let rss: f64 = x.iter().zip(&y).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    Ok(GrowthFit { exponent: b, residual: (rss / x.len() as f64).sqrt(), window: [lo, hi], samples: t.len() })
}

/// Least-squares slope of `v / mean(v)` against `t` (0 for a zero mean).
pub fn trend_slope(t: &[f64], values: &[f64]) -> f64 {
    if t.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 || !mean.is_finite() {
        return 0.0;
    }
    let y: Vec<f64> = values.iter().map(|v| v / mean).collect();
    least_squares(t, &y).1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl DiagnosticsSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `(t, value)` pairs where `f` yields a value.
    pub fn column(&self, f: impl Fn(&DiagnosticsRecord) -> Option<f64>) -> (Vec<f64>, Vec<f64>) {
        self.records.iter().filter_map(|r| f(r).map(|v| (r.t, v))).unzip()
    }

    pub fn fit_energy(&self, kappa: usize) -> Result<GrowthFit, SeriesError> {
        let (t, e) = self.column(|r| r.energy(kappa));
        if t.is_empty() {
            return Err(SeriesError::Missing("energy"));
        }
        fit_growth(&t, &e)
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.records {
            let m = r.sup_monitors;
            let cells = [
                SCHEMA_VERSION.to_string(),
                r.t.to_string(),
                r.e1.to_string(),
                cell(r.e2),
                cell(r.e3),
                cell(r.x2),
                cell(r.x3),
                cell(r.etilde2),
                cell(r.etilde3),
                cell(m.map(|m| m[0])),
                cell(m.map(|m| m[1])),
                cell(m.map(|m| m[2])),
                cell(m.map(|m| m[3])),
                cell(r.decay2),
                cell(r.decay3),
                r.nullform_ratio.to_string(),
                r.trilinear_ratio.to_string(),
                r.sup_grad.to_string(),
                r.flags.bits().to_string(),
            ];
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_ndjson(&self, mut w: impl Write) -> Result<(), SeriesError> {
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| SeriesError::Parse { line: 0, msg: e.to_string() })?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_ndjson(r: impl BufRead) -> Result<Self, SeriesError> {
        let mut records = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(
                serde_json::from_str(&line).map_err(|e| SeriesError::Parse { line: n + 1, msg: e.to_string() })?,
            );
        }
        Ok(Self { records })
    }
}

// JSON has no infinities: non-finite ratios travel as the strings "inf",
// "-inf" and "nan".
fn encode(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(v.to_string())
    }
}

fn decode<E: serde::de::Error>(v: serde_json::Value) -> Result<f64, E> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| E::custom("bad number")),
        serde_json::Value::String(s) => s.parse().map_err(|_| E::custom(format!("bad float {s:?}"))),
        other => Err(E::custom(format!("expected a number, got {other}"))),
    }
}

pub(crate) mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::encode(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::decode(serde_json::Value::deserialize(d)?)
    }
}

pub(crate) mod float_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(super::encode).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<serde_json::Value>::deserialize(d)?.map(super::decode).transpose()
    }
}

pub(crate) mod float_array_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<[f64; 4]>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|a| a.map(super::encode)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[f64; 4]>, D::Error> {
        match Option::<[serde_json::Value; 4]>::deserialize(d)? {
            None => Ok(None),
            Some(a) => {
                let [a, b, c, e] = a;
                Ok(Some([super::decode(a)?, super::decode(b)?, super::decode(c)?, super::decode(e)?]))
            }
        }
    }
}
