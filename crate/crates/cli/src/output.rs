//! Result rows, CSV encoding and plot data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 11] = [
    "algorithm",
    "mode",
    "param",
    "value",
    "replicate",
    "seed",
    "objective_m2",
    "objective_m",
    "feasible",
    "swaps",
    "wall_ms",
];

/// One CSV row. `objective_m2` is `None` for rows recording a failure.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub algorithm: String,
    pub mode: String,
    pub param: String,
    pub value: String,
    pub replicate: usize,
    pub seed: u64,
    pub objective_m2: Option<f64>,
    pub feasible: bool,
    pub swaps: Option<usize>,
    pub wall_ms: Option<f64>,
}

/// Shortest round-trip decimal; `inf`, `-inf` and `NaN` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl Row {
    pub fn objective_m(&self) -> Option<f64> {
        self.objective_m2.map(f64::sqrt)
    }

    pub fn is_error(&self) -> bool {
        self.objective_m2.is_none()
    }

    pub fn record(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        [
            self.algorithm.clone(),
            self.mode.clone(),
            self.param.clone(),
            self.value.clone(),
            self.replicate.to_string(),
            self.seed.to_string(),
            opt(self.objective_m2),
            opt(self.objective_m()),
            self.feasible.to_string(),
            self.swaps.map(|s| s.to_string()).unwrap_or_default(),
            opt(self.wall_ms),
        ]
    }

    /// Record without the timing column, which is the part a replay must
    /// reproduce.
    pub fn reproducible(&self) -> Vec<String> {
        self.record()[..10].to_vec()
    }
}

pub fn write_csv(rows: &[Row]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.record()).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

/// Raw string records of a results CSV, after checking the header.
pub fn read_csv(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let err = |e: csv::Error| CliError::usage(format!("cannot read {}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let header = r.headers().map_err(err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::usage(format!("{} does not have the results header", path.display())));
    }
    r.records().collect::<Result<Vec<_>, _>>().map_err(err)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    /// Mean of `objective_m` over successful replicates; `null` when no
    /// finite mean exists.
    pub y: Vec<Option<f64>>,
    pub y_std: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotData {
    pub series: Vec<Series>,
}

impl PlotData {
    /// Aggregates rows into one series per algorithm label, in order of
    /// first appearance, over the given x values.
    pub fn from_rows(rows: &[Row], xs: &[f64]) -> Self {
        let mut labels: Vec<&str> = Vec::new();
        for r in rows.iter().filter(|r| !r.is_error()) {
            if !labels.contains(&r.algorithm.as_str()) {
                labels.push(&r.algorithm);
            }
        }
        let series = labels
            .into_iter()
            .map(|label| {
                let (y, y_std) = xs
                    .iter()
                    .map(|x| {
                        let key = fmt_f64(*x);
                        let vals: Vec<f64> = rows
                            .iter()
                            .filter(|r| r.algorithm == label && r.value == key)
                            .filter_map(Row::objective_m)
                            .collect();
                        mean_std(&vals)
                    })
                    .unzip();
                Series { label: label.to_string(), x: xs.to_vec(), y, y_std }
            })
            .collect();
        PlotData { series }
    }

    pub fn validate(&self) -> CliResult<()> {
        for (i, s) in self.series.iter().enumerate() {
            if self.series[..i].iter().any(|t| t.label == s.label) {
                return Err(CliError::usage(format!("duplicate series label `{}`", s.label)));
            }
            if s.y.len() != s.x.len() || s.y_std.len() != s.x.len() {
                return Err(CliError::usage(format!("series `{}` has mismatched lengths", s.label)));
            }
            let finite = |v: &Option<f64>| v.map_or(true, f64::is_finite);
            if !s.x.iter().all(|x| x.is_finite()) || !s.y.iter().all(finite) || !s.y_std.iter().all(finite) {
                return Err(CliError::usage(format!("series `{}` has non-finite entries", s.label)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plot data serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let p: PlotData = serde_json::from_str(text).map_err(|e| CliError::usage(format!("bad plot data: {e}")))?;
        p.validate()?;
        Ok(p)
    }
}

/// Mean and sample standard deviation, `None` when empty or non-finite.
fn mean_std(vals: &[f64]) -> (Option<f64>, Option<f64>) {
    if vals.is_empty() {
        return (None, None);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return (None, None);
    }
    let std = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}
