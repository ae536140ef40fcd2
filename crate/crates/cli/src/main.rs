use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use scorenet::checks::run_checks;
use scorenet::experiments::config::ExperimentConfig;
use scorenet::experiments::output::{emit_outputs, emit_single};
use scorenet::experiments::{run_single, run_social_ranking_suite, run_sweep, SweepResult, ORACLE};

/// Parameter estimation and self-classification on score graphs.
#[derive(Debug, Parser)]
#[command(name = "scorenet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo sweep over edge counts; writes rmse.csv, misclass.csv and meta.json.
    Sweep(RunArgs),
    /// Sweep restricted to the social-ranking model with C = R = 3.
    Social(RunArgs),
    /// One sampled instance with per-agent posteriors and estimates.
    Single {
        #[command(flatten)]
        run: RunArgs,
        /// Edge count of the instance (first sweep value if omitted).
        #[arg(long)]
        edges: Option<usize>,
    },
    /// Run the numerical invariant checks.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Use N = 300, 1000 trials and the default sweep.
    #[arg(long)]
    full_scale: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if self.full_scale {
            config.set_full_scale();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }
}

fn print_summary(result: &SweepResult) {
    for p in &result.points {
        let mut line = format!("n={:<7} {ORACLE} {:.4}", p.n_edges, p.oracle_rate);
        for (k, id) in result.estimators.iter().enumerate() {
            line += &format!(
                " | {} misclass {:.4} rmse",
                id.label(),
                p.estimator_rates[k]
            );
            for (name, v) in result.params.iter().zip(&p.rmse[k]) {
                line += &format!(" {name}={v:.4}");
            }
        }
        println!("{line}");
    }
}

fn sweep(args: &RunArgs, social: bool) -> Result<()> {
    let config = args.load()?;
    let result = if social {
        run_social_ranking_suite(&config)?
    } else {
        run_sweep(&config)?
    };
    print_summary(&result);
    emit_outputs(&result, &config, &args.out)
        .with_context(|| format!("writing to {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn single(args: &RunArgs, edges: Option<usize>) -> Result<()> {
    let config = args.load()?;
    let n_edges = match edges.or_else(|| config.sweep.first().copied()) {
        Some(n) => n,
        None => bail!("no edge count given and the sweep is empty"),
    };
    let run = run_single(&config, n_edges)?;
    let wrong = |labels: &[usize]| {
        scorenet::misclassification_rate(labels, &run.instance.states).unwrap_or(f64::NAN)
    };
    println!("{ORACLE}: misclass {:.4}", wrong(&run.oracle.labels));
    for (id, est, out) in &run.estimates {
        println!(
            "{}: theta={:?} gamma={:?} misclass {:.4}",
            id.label(),
            est.theta,
            est.gamma,
            wrong(&out.labels)
        );
    }
    emit_single(&run, &config, &args.out)
        .with_context(|| format!("writing to {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn check(seed: u64) -> Result<()> {
    let outcomes = run_checks(seed)?;
    for c in &outcomes {
        println!(
            "{} {}: {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", outcomes.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Sweep(args) => sweep(args, false),
        Command::Social(args) => sweep(args, true),
        Command::Single { run, edges } => single(run, *edges),
        Command::Check { seed } => check(*seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn diagnostics_fit_on_one_line() {
        assert_eq!(one_line("a\n  b\tc"), "a b c");
    }

    #[test]
    fn overrides_apply() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "model = \"preparata\"\ngamma = 0.2\nN = 5\nsweep = [5]\n",
        )
        .unwrap();
        let args = RunArgs {
            config: path,
            seed: Some(9),
            trials: Some(2),
            full_scale: false,
            out: PathBuf::from("unused"),
        };
        let c = args.load().unwrap();
        assert_eq!((c.seed, c.trials), (9, 2));
    }
}
