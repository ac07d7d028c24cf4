use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symrmt::eig::{eigh, eigh_structured};
use symrmt::laws::LawKind;
use symrmt::sampler::Sampler;
use symrmt::{EnsembleSpec, SymmetryClass};
use symrmt_lab::config::DEFAULT_SEED;
use symrmt_lab::report::format_real;
use symrmt_lab::{emit, run_experiment, ExperimentConfig, ExperimentKind, Format, LabError, Status};

#[derive(Parser)]
#[command(name = "symrmt", version, about = "Symmetric Gaussian Hermitian ensembles: sampling, spectra, laws and experiments")]
struct Cli {
    /// Master seed (default 20240611, or the config file's value).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all hardware threads).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one sampled matrix as JSON rows of [re, im] pairs.
    Sample(MatrixArgs),
    /// Print the sorted spectrum of one sample, one eigenvalue per line.
    Spectrum {
        #[command(flatten)]
        matrix: MatrixArgs,
        /// Use the dense solver instead of the block reductions.
        #[arg(long)]
        dense: bool,
    },
    /// Tabulate density, cdf and Stieltjes transform of a law as CSV.
    Law {
        /// semicircle, case3 or block.
        name: String,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 801)]
        points: usize,
        /// Height above the axis at which the transform is evaluated.
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
    },
    /// Run an experiment: ncm, variance, correlator, atom, adjudicate3, identities, laws, bench.
    Experiment {
        /// Taken from the config file when omitted.
        name: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Same as `experiment identities`.
    Verify(Overrides),
    /// Same as `experiment bench`.
    Bench(Overrides),
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, default_value = "plain")]
    class: String,
    /// Matrix side 2n.
    #[arg(long, default_value_t = 8)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
}

#[derive(Args)]
struct Overrides {
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn matrix_spec(cli: &Cli, m: &MatrixArgs) -> Result<EnsembleSpec, LabError> {
    if m.size < 2 || m.size % 2 == 1 {
        return Err(LabError::Config(format!("size {} must be even and at least 2", m.size)));
    }
    let class: SymmetryClass = m.class.parse()?;
    Ok(EnsembleSpec::new(class, m.size / 2, cli.seed.unwrap_or(DEFAULT_SEED))?)
}

fn experiment_config(cli: &Cli, name: Option<&str>, overrides: &Overrides) -> Result<ExperimentConfig, LabError> {
    let kind = match (name, &cli.config) {
        (Some(n), _) => n.parse::<ExperimentKind>()?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
            let line = text.lines().map(str::trim).find(|l| l.split('=').next().map(str::trim) == Some("experiment"));
            match line.and_then(|l| l.split_once('=')) {
                Some((_, v)) => v.parse()?,
                None => return Err(LabError::Config("config file names no experiment".into())),
            }
        }
        (None, None) => return Err(LabError::Config("name an experiment or pass --config".into())),
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(kind, path)?;
            if cfg.experiment != kind {
                return Err(LabError::Config(format!("config file is for '{}', not '{kind}'", cfg.experiment)));
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    for kv in &overrides.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| LabError::Config(format!("expected key=value, got '{kv}'")))?;
        if k.trim() == "experiment" {
            return Err(LabError::Config("the experiment cannot be overridden with --set".into()));
        }
        cfg.set(k, v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(cli: &Cli, name: Option<&str>, overrides: &Overrides) -> Result<Status, LabError> {
    let cfg = experiment_config(cli, name, overrides)?;
    let report = run_experiment(&cfg)?;
    for c in &report.criteria {
        println!("{:<13} {:<40} {}", c.status.to_string(), c.name, c.detail);
    }
    for (item, winner) in &report.winners {
        println!("winner        {item:<40} {winner}");
    }
    for path in emit(&report, &[Format::Json, Format::Csv], &cfg.output_dir)? {
        eprintln!("wrote {}", path.display());
    }
    let overall = report.overall();
    println!("overall: {overall}");
    Ok(overall)
}

fn run(cli: &Cli) -> Result<Status, LabError> {
    match &cli.command {
        Command::Sample(m) => {
            let spec = matrix_spec(cli, m)?;
            let w = Sampler::new(spec)?.sample(m.replicate);
            let side = w.side();
            let rows: Vec<Vec<[f64; 2]>> = w
                .to_complex_matrix()
                .as_slice()
                .chunks(side)
                .map(|row| row.iter().map(|v| [v.re, v.im]).collect())
                .collect();
            let doc = serde_json::json!({
                "class": spec.class.name(),
                "size_2n": side,
                "seed": spec.master_seed,
                "replicate": m.replicate,
                "sites": (0..side).map(|p| symrmt::site(p, spec.n)).collect::<Result<Vec<_>, _>>()?,
                "rows": rows,
            });
            println!("{doc}");
        }
        Command::Spectrum { matrix, dense } => {
            let spec = matrix_spec(cli, matrix)?;
            let w = Sampler::new(spec)?.sample(matrix.replicate);
            let s = if *dense || spec.class == SymmetryClass::Plain { eigh(&w, false)? } else { eigh_structured(&w, spec.class)? };
            for l in s.eigenvalues() {
                println!("{}", format_real(*l));
            }
        }
        Command::Law { name, from, to, points, eta } => {
            let kind: LawKind = name.parse()?;
            if *points < 2 || !(to > from) || !(*eta > 0.0) {
                return Err(LabError::Config("need points >= 2, from < to and eta > 0".into()));
            }
            let law = symrmt::laws::law_by_kind(kind);
            println!("lambda,density,cdf,re_stieltjes,im_stieltjes");
            for k in 0..*points {
                let x = from + (to - from) * k as f64 / (*points - 1) as f64;
                let f = law.stieltjes(symrmt::Complex64::new(x, *eta))?;
                println!("{},{},{},{},{}", format_real(x), format_real(law.density(x)), format_real(law.cdf(x)), format_real(f.re), format_real(f.im));
            }
        }
        Command::Experiment { name, overrides } => return experiment(cli, name.as_deref(), overrides),
        Command::Verify(o) => return experiment(cli, Some("identities"), o),
        Command::Bench(o) => return experiment(cli, Some("bench"), o),
    }
    Ok(Status::Pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Status::Pass) | Ok(Status::ComparisonOnly) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_flag_values_parse() {
        assert_eq!(symrmt_lab::parse_probe("2i").unwrap(), symrmt::Complex64::new(0.0, 2.0));
        Cli::try_parse_from(["symrmt", "--seed", "3", "experiment", "ncm", "--set", "sizes=8"]).unwrap();
        Cli::try_parse_from(["symrmt", "law", "case3", "--from", "-3"]).unwrap();
    }
}
