use std::path::PathBuf;
use std::process::ExitCode;

use agreelab::experiment::{cmd_eval, cmd_gen, cmd_trace, cmd_train, ExperimentConfig};
use agreelab::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Multi-task LSTM agreement experiments. Set RAYON_NUM_THREADS to bound
/// the worker pool; results do not depend on it.
#[derive(Parser)]
#[command(name = "agreelab", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Output directory replacing the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate the synthetic corpus and its statistics.
    Gen(Common),
    /// Train one model per seed.
    Train(Common),
    /// Evaluate checkpoints; defaults to every configured seed's checkpoint.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Vec<PathBuf>,
    },
    /// Trace a template frame word by word through one checkpoint.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Defaults to the first seed's checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated hidden units replacing the configured list.
        #[arg(long, value_delimiter = ',')]
        units: Vec<usize>,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if !c.seed.is_empty() {
        cfg.seeds = c.seed.clone();
    }
    if let Some(out) = &c.out {
        cfg.out_dir = std::env::current_dir()
            .map_err(|e| Error::Config(format!("current directory: {e}")))?
            .join(out);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Gen(c) => {
            let stats = cmd_gen(&load(&c)?)?;
            for (name, s) in &stats.splits {
                println!("{name}: {} sentences", s.n_sentences);
            }
        }
        Verb::Train(c) => {
            for p in cmd_train(&load(&c)?)?.checkpoints {
                println!("wrote {}", p.display());
            }
        }
        Verb::Eval { common, checkpoint } => {
            let cfg = load(&common)?;
            let ckpts = if checkpoint.is_empty() {
                cfg.seeds.iter().map(|&s| cfg.checkpoint_path(s)).collect()
            } else {
                checkpoint
            };
            let out = cmd_eval(&cfg, &ckpts)?;
            for r in &out.reports {
                if let Some(a) = &r.agreement {
                    println!(
                        "{}: agreement accuracy {:.4}",
                        r.checkpoint, a.overall_accuracy
                    );
                }
                if let Some(p) = r.perplexity {
                    println!("{}: perplexity {p:.4}", r.checkpoint);
                }
            }
        }
        Verb::Trace {
            common,
            checkpoint,
            units,
        } => {
            let cfg = load(&common)?;
            let ckpt = checkpoint.unwrap_or_else(|| cfg.checkpoint_path(cfg.seeds[0]));
            let units = if units.is_empty() {
                cfg.trace.units.clone()
            } else {
                units
            };
            for r in cmd_trace(&cfg, &ckpt, &units)? {
                println!("{}: {}", r.name(), r.tokens.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
