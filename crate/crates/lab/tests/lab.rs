use std::path::PathBuf;
use std::process::Command;

use symrmt_lab::report::{headers, Provenance};
use symrmt_lab::{emit, run_experiment, ExperimentConfig, ExperimentKind, Format, Status};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("symrmt-lab-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    match kind {
        ExperimentKind::Ncm => (cfg.sizes, cfg.replicates) = (vec![32], 4),
        ExperimentKind::Correlator => (cfg.sizes, cfg.replicates) = (vec![16], 32),
        ExperimentKind::Variance => (cfg.sizes, cfg.replicates) = (vec![8, 16, 32], 32),
        ExperimentKind::Adjudicate3 | ExperimentKind::Atom => (cfg.sizes, cfg.replicates) = (vec![32], 8),
        ExperimentKind::Identities => (cfg.sizes, cfg.replicates) = (vec![8], 3),
        _ => {}
    }
    cfg
}

#[test]
fn csv_headers_and_json_are_stable() {
    let dir = scratch("emit");
    for kind in [ExperimentKind::Ncm, ExperimentKind::Correlator] {
        let mut cfg = small(kind);
        cfg.output_dir = dir.clone();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert!(a.full_json().contains("\"timing\""));
        assert!(!a.canonical_json().contains("\"timing\""));
        let files = emit(&a, &[Format::Json, Format::Csv], &dir).unwrap();
        assert!(files.iter().all(|f| f.exists()));
    }
    let ncm = std::fs::read_to_string(dir.join("ncm_ncm.csv")).unwrap();
    assert_eq!(ncm.lines().next().unwrap(), headers::NCM.join(","));
    assert_eq!(headers::NCM.join(","), "class,size_2n,replicates,law,ks_distance");
    let corr = std::fs::read_to_string(dir.join("correlator_correlator.csv")).unwrap();
    assert_eq!(corr.lines().next().unwrap(), "class,size_2n,z1,z2,re_est,im_est,stderr,re_theory,im_theory,provenance");
    // 17 significant digits
    let ks = ncm.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    assert_eq!(ks.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn every_theory_value_is_labelled() {
    for kind in [ExperimentKind::Correlator, ExperimentKind::Adjudicate3, ExperimentKind::Laws] {
        let report = run_experiment(&small(kind)).unwrap();
        assert!(!report.theory.is_empty());
        let json = report.canonical_json();
        for t in &report.theory {
            assert!(matches!(t.provenance, Provenance::PaperPrinted | Provenance::DerivedClosedForm | Provenance::DerivedOracle));
        }
        assert!(json.contains("\"provenance\":\"paper-printed\"") || json.contains("\"provenance\":\"derived-closed-form\""));
    }
}

#[test]
fn adjudication_reports_both_candidates() {
    let report = run_experiment(&small(ExperimentKind::Adjudicate3)).unwrap();
    let rows = &report.tables["adjudicate"].rows;
    let candidates: Vec<String> = rows.iter().map(|r| format!("{}:{}", r[0], r[3])).collect();
    for c in ["im_g_i_32:case3", "im_g_i_32:block", "atom_fraction_32:rank", "atom_fraction_32:printed", "max_abs_eigenvalue_32:case3", "max_abs_eigenvalue_32:block"] {
        assert!(candidates.iter().any(|x| x == c), "{c}");
    }
    assert_eq!(report.find_criterion("atom_fraction_exact_32").unwrap().status, Status::Pass);
    assert_eq!(report.winners.get("atom_fraction_32").map(String::as_str), Some("rank"));
}

#[test]
fn class3_shape_rows_are_comparison_only() {
    let mut cfg = small(ExperimentKind::Ncm);
    cfg.classes = vec![symrmt::SymmetryClass::RowMirror3];
    let report = run_experiment(&cfg).unwrap();
    assert!(report.criteria.iter().all(|c| c.status == Status::ComparisonOnly));
    assert_eq!(report.tables["ncm"].rows.len(), 2);
    assert!(report.winners.contains_key("ncm_rowmirror3_32"));
    let corr = run_experiment(&small(ExperimentKind::Correlator)).unwrap();
    assert_eq!(corr.find_criterion("correlator_rowmirror3_16").unwrap().status, Status::ComparisonOnly);
}

#[test]
fn degenerate_ncm_config_reports() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Ncm);
    (cfg.sizes, cfg.replicates) = (vec![2], 1);
    let report = run_experiment(&cfg).unwrap();
    for row in &report.tables["ncm"].rows {
        let symrmt_lab::report::Cell::Real(d) = row[4] else { panic!() };
        assert!((0.0..=1.0).contains(&d));
    }
}

#[test]
fn identities_flag_negative_controls() {
    let report = run_experiment(&small(ExperimentKind::Identities)).unwrap();
    let rows = &report.tables["identities"].rows;
    let flag = |class: &str, id: &str| rows.iter().find(|r| r[0].to_string() == class && r[2].to_string() == id).map(|r| r[5].to_string());
    assert_eq!(flag("plain", "antidiagonal_case3").as_deref(), Some("expected-fail"));
    assert_eq!(flag("rowmirror3", "antidiagonal_case3").as_deref(), Some("pass"));
    assert_eq!(report.overall(), Status::Pass);
}

#[test]
fn variance_slope_on_small_sizes_runs() {
    let report = run_experiment(&small(ExperimentKind::Variance)).unwrap();
    assert_eq!(report.tables["slope"].rows.len(), 5);
    assert_eq!(report.tables["bound"].rows.len(), 5 * 3 * 2);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Correlator);
    cfg.probes = vec![symrmt::Complex64::new(0.0, 2.0)];
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Bench);
    cfg.sizes = vec![64];
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Variance);
    cfg.sizes = vec![64, 128];
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn example_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    for kind in ExperimentKind::ALL {
        let path = dir.join(format!("{kind}.conf"));
        let cfg = ExperimentConfig::from_file(kind, &path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.experiment, kind);
        cfg.validate().unwrap();
        let mut defaults = ExperimentConfig::defaults(kind);
        defaults.output_dir = cfg.output_dir.clone();
        assert_eq!(cfg, defaults, "{kind}.conf should spell out the defaults");
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_symrmt")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_codes() {
    let dir = scratch("cli");
    let d = dir.to_str().unwrap();
    let (code, stdout) = cli(&["--out", d, "verify", "--set", "sizes=8", "--set", "replicates=2"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("overall: PASS"));
    // a tiny ncm run cannot meet the KS limit
    let (code, _) = cli(&["--out", d, "--threads", "2", "experiment", "ncm", "--set", "sizes=4", "--set", "replicates=2", "--set", "classes=plain"]);
    assert_eq!(code, 1);
    // too few replicates to reach the stderr budget
    let (code, stdout) = cli(&["--out", d, "experiment", "adjudicate3", "--set", "sizes=8", "--set", "replicates=4"]);
    assert_eq!(code, 2, "{stdout}");
    let (code, _) = cli(&["experiment", "nonsense"]);
    assert_eq!(code, 1);
    let (code, _) = cli(&["--out", d, "experiment", "correlator", "--set", "probes=2i,0"]);
    assert_eq!(code, 1);

    let conf = dir.join("c.conf");
    std::fs::write(&conf, "experiment = identities\nsizes = 8\nreplicates = 2\n").unwrap();
    let (code, _) = cli(&["--out", d, "--config", conf.to_str().unwrap(), "experiment"]);
    assert_eq!(code, 0);
    let (code, _) = cli(&["--out", d, "--config", conf.to_str().unwrap(), "experiment", "ncm"]);
    assert_eq!(code, 1);

    let (code, stdout) = cli(&["--seed", "5", "spectrum", "--class", "rowmirror3", "--size", "8"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().filter(|l| l.parse::<f64>().unwrap() == 0.0).count(), 4);
    let (code, stdout) = cli(&["law", "semicircle", "--points", "5"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 6);
    let (code, stdout) = cli(&["sample", "--class", "flip1", "--size", "4"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"sites\":[-2,-1,1,2]"));
    let _ = std::fs::remove_dir_all(&dir);
}
