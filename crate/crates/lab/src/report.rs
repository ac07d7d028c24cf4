//! Experiment reports and their JSON / CSV forms.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use symrmt::Complex64;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::LabError;

/// Where a theory number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PaperPrinted,
    DerivedClosedForm,
    DerivedOracle,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::PaperPrinted => "paper-printed",
            Provenance::DerivedClosedForm => "derived-closed-form",
            Provenance::DerivedOracle => "derived-oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    /// Reported for comparison; never counted as pass or fail.
    ComparisonOnly,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::ComparisonOnly => "COMPARISON",
        })
    }
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryValue {
    pub name: String,
    pub value: Complex64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub class: Option<String>,
    pub size_2n: Option<usize>,
    pub value: Complex64,
    pub stderr: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub estimate: String,
    pub theory: String,
    pub abs_delta: f64,
    pub delta_over_stderr: f64,
    pub relative_delta: f64,
    pub status: Status,
}

impl Comparison {
    pub fn new(estimate: &Estimate, theory: &TheoryValue, status: Status) -> Self {
        let d = (estimate.value - theory.value).norm();
        Comparison {
            estimate: estimate.name.clone(),
            theory: theory.name.clone(),
            abs_delta: d,
            delta_over_stderr: d / estimate.stderr,
            relative_delta: d / theory.value.norm(),
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => f.write_str(&format_real(*v)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }
}

/// CSV headers by table name.
pub mod headers {
    pub const NCM: &[&str] = &["class", "size_2n", "replicates", "law", "ks_distance"];
    pub const CORRELATOR: &[&str] = &["class", "size_2n", "z1", "z2", "re_est", "im_est", "stderr", "re_theory", "im_theory", "provenance"];
    pub const VARIANCE: &[&str] = &["class", "size_2n", "replicates", "z", "variance", "stderr"];
    pub const SLOPE: &[&str] = &["class", "slope", "window_lo", "window_hi"];
    pub const BOUND: &[&str] = &["class", "size_2n", "z", "abs_1p2g"];
    pub const IDENTITIES: &[&str] = &["class", "size_2n", "identity", "asserted", "max_residual", "flag"];
    pub const ATOM: &[&str] = &["class", "size_2n", "replicate", "zero_fraction", "block_deviation"];
    pub const ADJUDICATE: &[&str] = &["item", "estimate", "stderr", "candidate", "value", "provenance", "distance", "within_window"];
    pub const LAWS: &[&str] = &["check", "value", "tolerance", "status"];
    pub const BENCH: &[&str] = &["class", "size_2n", "runs", "max_spectrum_gap"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RngInfo {
    pub generator: &'static str,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub threads: usize,
    pub details: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub rng: RngInfo,
    pub estimates: Vec<Estimate>,
    pub theory: Vec<TheoryValue>,
    pub comparisons: Vec<Comparison>,
    /// Declared winners of adjudicated items.
    pub winners: BTreeMap<String, String>,
    pub tables: BTreeMap<String, Table>,
    pub criteria: Vec<Criterion>,
    /// Excluded from the canonical form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: config.experiment,
            config: config.clone(),
            rng: RngInfo { generator: "splitmix64-counter/box-muller", master_seed: config.seed },
            estimates: Vec::new(),
            theory: Vec::new(),
            comparisons: Vec::new(),
            winners: BTreeMap::new(),
            tables: BTreeMap::new(),
            criteria: Vec::new(),
            timing: None,
        }
    }

    pub fn criterion(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.criteria.push(Criterion { name: name.into(), status, detail: detail.into() });
    }

    pub fn table(&mut self, name: &str, header: &[&str]) -> &mut Table {
        self.tables.entry(name.to_string()).or_insert_with(|| Table::new(header))
    }

    pub fn find_criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Fail if any asserted criterion fails, else inconclusive if any is
    /// inconclusive, else pass.
    pub fn overall(&self) -> Status {
        let asserted = self.criteria.iter().map(|c| c.status).filter(|s| *s != Status::ComparisonOnly);
        asserted.fold(Status::Pass, |acc, s| match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        })
    }

    /// JSON without the timing section.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.timing = None;
        to_json(&copy)
    }

    pub fn full_json(&self) -> String {
        to_json(self)
    }
}

/// serde_json formatter writing every float with 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser).expect("report serializes");
    let mut s = String::from_utf8(out).expect("utf8 json");
    s.push('\n');
    s
}

/// Output formats of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Writes `<experiment>.json` and `<experiment>_<table>.csv` into `dir`.
pub fn emit(report: &ExperimentReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let io_err = |p: &Path, e: std::io::Error| LabError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let stem = report.experiment.name();
    if formats.contains(&Format::Json) {
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, report.full_json()).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    if formats.contains(&Format::Csv) {
        for (name, table) in &report.tables {
            let path = dir.join(format!("{stem}_{name}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
            let flush = |w: &mut csv::Writer<std::fs::File>| -> Result<(), csv::Error> {
                w.write_record(&table.header)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(|c| c.to_string()))?;
                }
                w.flush()?;
                Ok(())
            };
            flush(&mut w).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}
