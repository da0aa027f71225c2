use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use velavg::degeneracy::{default_delta_grid, default_j_grid, fit_degeneracy, DegeneracyFit, SamplingParams};
use velavg::experiments::{
    collect_rows, configure_threads, render_markdown, run_experiment, run_suite, solve_at, write_report, ExperimentConfig,
    SymbolSection, Verdict,
};
use velavg::exponents::{composed_prediction, paper_prediction};
use velavg::lp::{estimate_regularity, plateau_window, Method, ScalarField};

#[derive(Parser)]
#[command(name = "velavg", version, about = "Velocity averaging regularity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Family {
    /// burgers, twod-flux, sine-cubic, porous, convdiff, twod-convdiff, fully-degenerate, elliptic
    #[arg(long)]
    example: String,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Velocity interval as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    interval: Option<Vec<f64>>,
}

impl Family {
    fn section(&self) -> SymbolSection {
        SymbolSection {
            example: self.example.clone(),
            ell: self.ell,
            m: self.m,
            n: self.n,
            alpha: self.alpha,
            source: None,
            interval: self.interval.as_ref().map(|v| [v[0], v[1]]),
        }
    }

    fn config(&self) -> velavg::Result<ExperimentConfig> {
        ExperimentConfig::for_symbol(self.section())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit the degeneracy profile (alpha, beta, mu, lambda) of an example symbol.
    FitDegeneracy {
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 1 << 17)]
        n_samples: usize,
        /// Write the measurement grid as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted regularity exponent for an example family.
    Predict {
        #[command(flatten)]
        family: Family,
        /// Integrability of the data (`inf` for bounded data).
        #[arg(long, default_value_t = f64::INFINITY)]
        p_data: f64,
    },
    /// Estimate the regularity exponent of a field file.
    EstimateRegularity {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// lp or increments
        #[arg(long, default_value = "lp")]
        method: String,
        /// plateau or none
        #[arg(long, default_value = "plateau")]
        window: String,
        /// Write the band table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the PDE of an experiment config at its finest resolution (or `--n`).
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run experiments.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// Rebuild report.md and report.csv from the rows under a results directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run one config.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run every `*.toml` in a directory; exits nonzero when any verdict is inconsistent.
    Suite {
        dir: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> velavg::Result<ExitCode> {
    match cli.command {
        Command::FitDegeneracy { family, n_samples, out } => {
            let spec = family.config()?.symbol_spec()?;
            let params = SamplingParams { n_samples, ..SamplingParams::default() };
            let report = fit_degeneracy(&spec, &default_delta_grid(), &default_j_grid(), &params)?;
            if let Some(path) = out {
                std::fs::write(path, report.to_csv(spec.frequency_dim()))?;
            }
            match &report.fit {
                DegeneracyFit::Profile(p) => print!("{}", p.summary()),
                DegeneracyFit::TriviallyNonDegenerate => println!("trivially non-degenerate: every set is empty"),
            }
        }
        Command::Predict { family, p_data } => {
            let cfg = family.config()?;
            let paper = paper_prediction(cfg.example(None)?, p_data)?;
            match paper.s_max {
                Some(s) => println!("s_max = {s}"),
                None => println!("s_max = none"),
            }
            println!("regime = {}", paper.regime);
            println!("clamped = {}", paper.clamped);
            if let Some((a, b)) = paper.interval {
                println!("interval = {a} .. {b}");
            }
            if let Some(c) = composed_prediction(&cfg.symbol_spec()?) {
                println!("theta = {}\nmode = {}\ns_boot = {}", c.theta, c.mode, c.s_boot);
            }
        }
        Command::EstimateRegularity { input, p, method, window, out } => {
            let field = ScalarField::read(&input)?;
            let w = match window.as_str() {
                "plateau" => Some(plateau_window(field.shape(), field.length())),
                "none" => None,
                other => return Err(velavg::Error::Input(format!("unknown window {other}"))),
            };
            let est = estimate_regularity(&field, p, w.as_ref(), Method::parse(&method)?)?;
            match out {
                Some(path) => std::fs::write(path, est.band_csv())?,
                None => print!("{}", est.band_csv()),
            }
            print!("{}", est.summary());
        }
        Command::Solve { config, out, n } => {
            let cfg = ExperimentConfig::load(&config)?;
            let spec = cfg.symbol_spec()?;
            let n = n.unwrap_or(*cfg.resolutions.last().expect("validated ladder"));
            let (field, traj) = solve_at(&cfg, &spec, n)?;
            match traj {
                Some(t) => t.write_dir(&out)?,
                None => {
                    std::fs::create_dir_all(&out)?;
                    field.write(&out.join("solution.txt"))?;
                }
            }
            println!("wrote {}", out.display());
        }
        Command::Experiment { command: ExperimentCommand::Run { config, out } } => {
            let cfg = ExperimentConfig::load(&config)?;
            let row = run_experiment(&cfg, &out)?;
            print!("{}", render_markdown(std::slice::from_ref(&row)));
            if row.verdict == Verdict::Inconsistent {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Experiment { command: ExperimentCommand::Suite { dir, out } } => {
            let outcome = run_suite(&dir, &out)?;
            print!("{}", render_markdown(&outcome.rows));
            if outcome.any_inconsistent() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { dir } => {
            let rows = collect_rows(&dir)?;
            write_report(&dir, &rows)?;
            print!("{}", render_markdown(&rows));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    configure_threads();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
