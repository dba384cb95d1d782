use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use tastekit_cli::synth::{self, SynthSpec};
use tastekit_cli::{PipelineConfig, Run, Stage};

#[derive(Parser)]
#[command(name = "tastekit", version, about = "Aesthetic perception analysis pipeline")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; the run directory is created inside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// With `run`: stop after this stage.
    #[arg(long, global = true)]
    stage: Option<String>,
    #[arg(long, global = true)]
    provider_captions: Option<String>,
    #[arg(long, global = true)]
    provider_embeddings: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check corpus integrity and coverage.
    Validate,
    /// Aggregate annotations and extract image features.
    Extract,
    /// Fit Bradley-Terry scores per style.
    FitBt,
    /// Compute caption↔response alignment scores.
    Align,
    /// Regressions, F-test, correlations and distribution tests.
    Regress,
    /// Representative sampling via t-SNE and k-means.
    Sample,
    /// Fetch missing captions from the caption provider.
    Captions,
    /// Fetch missing embeddings from the embedding provider.
    Embed,
    /// Write report.json and report.txt.
    Report,
    /// Write SVG figures.
    Figures,
    /// Run every stage in order.
    Run,
    /// Generate a synthetic corpus into `--out`.
    Synth {
        /// Generator parameters (TOML); defaults otherwise.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Use the 12-stimulus, 3-style preset.
        #[arg(long)]
        mini: bool,
        /// Skip rendering images.
        #[arg(long)]
        no_images: bool,
    },
}

fn load_config(c: &Common) -> Result<PipelineConfig> {
    let path = c.config.as_ref().ok_or_else(|| anyhow!("--config is required"))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(o) = &c.out {
        cfg.output = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(u) = &c.provider_captions {
        cfg.providers.captions = Some(u.clone());
    }
    if let Some(u) = &c.provider_embeddings {
        cfg.providers.embeddings = Some(u.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stages(run: &mut Run, list: &[Stage]) -> Result<()> {
    for s in list {
        run.stage(*s)?;
    }
    println!("{}", run.dir.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    if let Command::Synth { spec, mini, no_images } = &cli.command {
        let mut s = match spec {
            Some(p) => {
                toml::from_str(&std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?)
                    .with_context(|| format!("invalid spec {}", p.display()))?
            }
            None if *mini => SynthSpec::mini(),
            None => SynthSpec::default(),
        };
        if let Some(seed) = cli.common.seed {
            s.seed = seed;
        }
        let out = cli.common.out.clone().ok_or_else(|| anyhow!("--out is required"))?;
        let mut syn = synth::generate(&s)?;
        let manifest = synth::write(&mut syn, &out, !no_images)?;
        println!("{}", manifest.display());
        return Ok(());
    }
    let cfg = load_config(&cli.common)?;
    let mut run = Run::new(cfg);
    match cli.command {
        Command::Validate => stages(&mut run, &[Stage::Validate]),
        Command::Extract => stages(&mut run, &[Stage::Annotations, Stage::Vision]),
        Command::FitBt => stages(&mut run, &[Stage::Bt]),
        Command::Align => stages(&mut run, &[Stage::Alignment]),
        Command::Regress => stages(&mut run, &[Stage::Regression]),
        Command::Captions => stages(&mut run, &[Stage::Captions]),
        Command::Embed => stages(&mut run, &[Stage::Embed]),
        Command::Report => stages(&mut run, &[Stage::Report]),
        Command::Figures => stages(&mut run, &[Stage::Figures]),
        Command::Sample => stages(&mut run, &[Stage::Sample]),
        Command::Run => {
            let until = cli.common.stage.as_deref().map(str::parse).transpose()?;
            let report = run.run(until)?;
            let names: Vec<&str> = report.stages.iter().map(|s| s.name()).collect();
            println!("{}", report.run_dir.display());
            println!("stages: {}", names.join(", "));
            println!("files: {}", report.files.len());
            Ok(())
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
