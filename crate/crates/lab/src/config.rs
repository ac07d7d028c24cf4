//! Experiment configuration: flat `key = value` files plus overrides.
//!
//! Recognized keys: `experiment`, `classes`, `sizes`, `replicates`,
//! `probes`, `seed`, `output_dir`, `threads`, and `threshold.<name>` for any
//! entry of [`DEFAULT_THRESHOLDS`]. Lists are comma separated; probes are
//! written `a+bi`, `-1+3i`, `2i`. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use symrmt::{Complex64, SymmetryClass};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Ncm,
    Variance,
    Correlator,
    Atom,
    Adjudicate3,
    Identities,
    Laws,
    Bench,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Ncm,
        ExperimentKind::Variance,
        ExperimentKind::Correlator,
        ExperimentKind::Atom,
        ExperimentKind::Adjudicate3,
        ExperimentKind::Identities,
        ExperimentKind::Laws,
        ExperimentKind::Bench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Ncm => "ncm",
            ExperimentKind::Variance => "variance",
            ExperimentKind::Correlator => "correlator",
            ExperimentKind::Atom => "atom",
            ExperimentKind::Adjudicate3 => "adjudicate3",
            ExperimentKind::Identities => "identities",
            ExperimentKind::Laws => "laws",
            ExperimentKind::Bench => "bench",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        let s = s.trim().to_ascii_lowercase();
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| LabError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Default tolerances: `(name, value, meaning)`.
pub const DEFAULT_THRESHOLDS: &[(&str, f64, &str)] = &[
    ("identity_residual", 1e-10, "max residual of every exact per-sample identity"),
    ("structure_deviation", 0.0, "Hermiticity and class-symmetry deviation of samples"),
    ("law_residual", 1e-12, "defining-equation residual of the law solvers"),
    ("law_mass", 1e-8, "semicircle total mass error"),
    ("case3_continuous_mass", 1e-6, "case-3 continuous mass error against 1/2"),
    ("case3_residue", 1e-4, "case-3 atom residue error against 1/2"),
    ("density_extrapolation", 1e-5, "extrapolated vs closed-form case-3 density"),
    ("ks_semicircle", 0.02, "KS distance of pooled eigenvalues vs the semicircle"),
    ("zero_eigenvalue", 1e-8, "absolute tolerance for a zero eigenvalue"),
    ("block_spectrum", 1e-8, "dense vs block-reduced spectrum agreement"),
    ("adjudicate_stderr", 0.002, "required stderr of Im mean g(i)"),
    ("adjudicate_sigmas", 3.0, "stderr multiples in the g(i) window"),
    ("adjudicate_slack", 0.01, "additive slack in the g(i) window"),
    ("edge_window", 0.05, "max|lambda| window around each edge candidate"),
    ("slope_min", -2.3, "lower end of the variance slope window"),
    ("slope_max", -1.7, "upper end of the variance slope window"),
    ("bound_1p2g", 0.5, "lower bound on |1 + 2 mean g / z|"),
    ("correlator_relative", 0.15, "relative window of (2n)^2 F against theory"),
    ("ratio_target", 2.0, "expected orthogonal/unitary correlator ratio"),
    ("ratio_window", 0.2, "half width of the ratio window"),
    ("comparison_relative_stderr", 0.10, "relative stderr required of comparison rows"),
    ("speedup_rowmirror3", 3.0, "required structured speedup, class 3"),
    ("speedup_central2", 2.0, "required structured speedup, class 2"),
    ("bench_spectrum", 1e-8, "structured vs dense spectra in benchmarks"),
    ("bench_runs", 5.0, "timed runs per solver"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub classes: Vec<SymmetryClass>,
    /// Matrix sides `2n`.
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub probes: Vec<Complex64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub thresholds: BTreeMap<String, f64>,
    /// Worker threads; `None` uses the hardware count.
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 20_240_611;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl ExperimentConfig {
    /// The standard configuration of each experiment.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        use SymmetryClass::*;
        let (classes, sizes, replicates, probes) = match experiment {
            ExperimentKind::Ncm => (vec![Plain, Flip1, Central2, Quarter4, RowMirror3], vec![512], 200, vec![c(0.0, 1.0)]),
            ExperimentKind::Variance => (SymmetryClass::ALL.to_vec(), vec![64, 128, 256, 512], 4000, vec![c(0.0, 3.0), c(0.0, 4.0)]),
            ExperimentKind::Correlator => (SymmetryClass::ALL.to_vec(), vec![256], 20_000, vec![c(0.0, 2.0), c(0.0, 3.0)]),
            ExperimentKind::Atom => (vec![RowMirror3], vec![512], 50, vec![c(0.0, 1.0)]),
            ExperimentKind::Adjudicate3 => (vec![RowMirror3], vec![512], 2000, vec![c(0.0, 1.0)]),
            ExperimentKind::Identities => (SymmetryClass::ALL.to_vec(), vec![32], 50, vec![c(1.0, 2.0), c(0.0, 2.0), c(-1.0, 3.0)]),
            ExperimentKind::Laws => (vec![], vec![], 1, vec![]),
            ExperimentKind::Bench => (vec![RowMirror3, Central2], vec![1024], 1, vec![]),
        };
        ExperimentConfig {
            experiment,
            classes,
            sizes,
            replicates,
            probes,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("out"),
            thresholds: DEFAULT_THRESHOLDS.iter().map(|(k, v, _)| (k.to_string(), *v)).collect(),
            threads: None,
        }
    }

    pub fn threshold(&self, name: &str) -> f64 {
        match self.thresholds.get(name) {
            Some(v) => *v,
            None => panic!("no threshold named {name}"),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| LabError::Config(format!("bad {what} '{value}'"));
        match key {
            "experiment" => self.experiment = value.parse()?,
            "classes" | "class" => {
                self.classes = list(value).map(|s| s.parse::<SymmetryClass>().map_err(|e| LabError::Config(e.to_string()))).collect::<Result<_, _>>()?
            }
            "sizes" | "size" => self.sizes = list(value).map(|s| s.parse::<usize>().map_err(|_| bad("size"))).collect::<Result<_, _>>()?,
            "replicates" => self.replicates = value.parse().map_err(|_| bad("replicate count"))?,
            "probes" => self.probes = list(value).map(parse_probe).collect::<Result<_, _>>()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "output_dir" | "out" => self.output_dir = PathBuf::from(value),
            "threads" => self.threads = Some(value.parse().map_err(|_| bad("thread count"))?),
            _ => match key.strip_prefix("threshold.") {
                Some(name) if self.thresholds.contains_key(name) => {
                    let v = value.parse().map_err(|_| bad("threshold"))?;
                    self.thresholds.insert(name.to_string(), v);
                }
                _ => return Err(LabError::Config(format!("unknown key '{key}'"))),
            },
        }
        Ok(())
    }

    /// Applies a whole config file. `experiment`, if present, must come
    /// first so that later keys override its defaults.
    pub fn apply_text(&mut self, text: &str) -> Result<(), LabError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| LabError::Config(format!("line {}: expected key = value", i + 1)))?;
            if k.trim() == "experiment" {
                let kind: ExperimentKind = v.parse()?;
                if kind != self.experiment {
                    let keep = (self.seed, self.output_dir.clone(), self.threads);
                    *self = ExperimentConfig::defaults(kind);
                    (self.seed, self.output_dir, self.threads) = keep;
                }
                continue;
            }
            self.set(k, v).map_err(|e| LabError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(experiment: ExperimentKind, path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::defaults(experiment);
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if let Some(s) = self.sizes.iter().find(|&&s| s < 2 || s % 2 == 1) {
            return Err(LabError::Config(format!("size {s} must be even and at least 2")));
        }
        if self.replicates < 1 {
            return Err(LabError::Config("replicates must be at least 1".into()));
        }
        if let Some(z) = self.probes.iter().find(|z| z.im == 0.0 || !z.is_finite()) {
            return Err(LabError::Config(format!("probe {z} is on the real axis")));
        }
        Ok(())
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses `a+bi`, `a-bi`, `bi`, `-i` or a real `a`.
pub fn parse_probe(s: &str) -> Result<Complex64, LabError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || LabError::Config(format!("bad probe '{s}'"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| c(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(c(re.parse::<f64>().map_err(|_| bad())?, im))
}

pub fn format_probe(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes() {
        assert_eq!(parse_probe("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_probe("-1+3i").unwrap(), c(-1.0, 3.0));
        assert_eq!(parse_probe("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_probe("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_probe("1e-3-2.5i").unwrap(), c(1e-3, -2.5));
        assert_eq!(parse_probe(" 0.5 + 1e1i ").unwrap(), c(0.5, 10.0));
        assert!(parse_probe("x+i").is_err());
        for z in [c(1.0, 2.0), c(-0.25, -3.0)] {
            assert_eq!(parse_probe(&format_probe(z)).unwrap(), z);
        }
    }

    #[test]
    fn file_overrides() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Ncm);
        cfg.apply_text("# comment\nexperiment = correlator\nsizes = 64, 128\nprobes = 2i, 1+3i\nthreshold.correlator_relative = 0.2\n").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Correlator);
        assert_eq!(cfg.sizes, vec![64, 128]);
        assert_eq!(cfg.probes[1], c(1.0, 3.0));
        assert_eq!(cfg.threshold("correlator_relative"), 0.2);
        assert!(cfg.apply_text("nonsense = 1").is_err());
        assert!(cfg.apply_text("threshold.unknown = 1").is_err());
        cfg.sizes = vec![7];
        assert!(cfg.validate().is_err());
    }
}
