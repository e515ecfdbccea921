//! Runs `gen`, `train`, `eval` and `trace` from a config file, as the CLI does.
//!
//! Run with `cargo run --release --example experiment_pipeline -- [config] [out_dir]`.
//! Defaults to `configs/smoke.toml` and a directory under the system temp dir.

use std::path::{Path, PathBuf};

use agreelab::experiment::{cmd_eval, cmd_gen, cmd_trace, cmd_train, ExperimentConfig};

fn main() -> agreelab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("agreelab-pipeline"));

    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.out_dir = out;
    println!("writing to {}", cfg.out_dir().display());

    let stats = cmd_gen(&cfg)?;
    for (split, s) in &stats.splits {
        println!(
            "{split}: {} sentences, attractors {:?}",
            s.n_sentences, s.attractor_histogram
        );
    }
    let trained = cmd_train(&cfg)?;
    let eval = cmd_eval(&cfg, &trained.checkpoints)?;
    for r in &eval.reports {
        let acc = r.agreement.as_ref().map(|a| a.overall_accuracy);
        println!(
            "{}: agreement {acc:?}, perplexity {:?}",
            r.checkpoint, r.perplexity
        );
    }
    let units = cfg.trace.units.clone();
    let records = cmd_trace(&cfg, &trained.checkpoints[0], &units)?;
    println!(
        "traced {} items; see {}",
        records.len(),
        cfg.out_dir().join("trace").display()
    );
    Ok(())
}
