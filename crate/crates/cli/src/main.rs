//! `dynttp`: generate instances, run scenarios into an archive, analyze archives.
//!
//! Setting `DYNTTP_SEED` overrides the master seed of every config passed to `run`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use dynttp::analysis::{
    heatmap_export, ranking_report, scenario_heatmap, write_significance_csv, Metric, Slice,
};
use dynttp::harness::{run_batch, Archive, PreparedScenario};
use dynttp::io::{
    generate_instance, parse_scenario, write_instance, GeneratorParams, KnapsackKind,
};

const SEED_ENV: &str = "DYNTTP_SEED";

#[derive(Parser)]
#[command(
    name = "dynttp",
    version,
    about = "Dynamic Travelling Thief Problem benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance file.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        cities: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        items_per_city: u64,
        /// uncorr, uncorr-similar-weights or bounded-strongly-corr
        #[arg(long)]
        kind: KnapsackKind,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10))]
        capacity_category: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute scenario configs and write a run archive.
    Run {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        parallelism: u64,
    },
    /// Write heatmaps and a significance table for an archive.
    Analyze {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        slice: Slice,
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_generate(params: GeneratorParams, out: &Path) -> Result<()> {
    let instance = generate_instance(&params)?;
    let mut sink = create(out)?;
    write_instance(&instance, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => Ok(Some(raw.trim().parse().with_context(|| {
            format!("{SEED_ENV} must be an unsigned integer, got `{raw}`")
        })?)),
        Err(_) => Ok(None),
    }
}

fn cmd_run(configs: &[PathBuf], out: &Path, parallelism: usize) -> Result<()> {
    let seed = seed_override()?;
    let mut scenarios = Vec::with_capacity(configs.len());
    for path in configs {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config = parse_scenario(&text).with_context(|| format!("in {}", path.display()))?;
        if let Some(seed) = seed {
            config.master_seed = seed;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        scenarios.push(
            PreparedScenario::load(config, base)
                .with_context(|| format!("in {}", path.display()))?,
        );
    }
    let archive = run_batch(&scenarios, parallelism)?;
    archive
        .write_to(out)
        .with_context(|| format!("cannot write archive to {}", out.display()))?;
    for f in &archive.failures {
        eprintln!(
            "run {} of scenario {} failed: {}",
            f.run, f.scenario_id, f.message
        );
    }
    if !archive.failures.is_empty() {
        bail!("{} run(s) failed", archive.failures.len());
    }
    Ok(())
}

fn cmd_analyze(archive_dir: &Path, slice: Slice, metric: Metric, out: &Path) -> Result<()> {
    let archive = Archive::read_from(archive_dir)?;
    let heatmaps = out.join("heatmaps");
    fs::create_dir_all(&heatmaps)
        .with_context(|| format!("cannot create {}", heatmaps.display()))?;
    for s in &archive.scenarios {
        if !archive.records.iter().any(|r| r.scenario_id == s.id) {
            eprintln!("scenario {} has no records, skipping heatmap", s.id);
            continue;
        }
        let matrix = scenario_heatmap(&archive, &s.id)?;
        let mut csv = create(&heatmaps.join(format!("{}.csv", s.id)))?;
        let mut ppm = create(&heatmaps.join(format!("{}.ppm", s.id)))?;
        heatmap_export(&matrix, &mut csv, &mut ppm)?;
    }

    let report = ranking_report(&archive, slice, metric)?;
    write_significance_csv(
        &report,
        create(&out.join(format!("significance_{slice}_{metric}.csv")))?,
    )?;
    let mut order = create(&out.join(format!("partial_order_{slice}_{metric}.txt")))?;
    for (group, beats) in report.partial_order() {
        for (winner, losers) in beats {
            let names: Vec<&str> = losers.iter().map(|p| p.as_str()).collect();
            writeln!(order, "{group}: {winner} > {}", names.join(", "))?;
        }
    }
    order.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            cities,
            items_per_city,
            kind,
            capacity_category,
            seed,
            out,
        } => cmd_generate(
            GeneratorParams {
                cities: cities as usize,
                items_per_city: items_per_city as usize,
                kind,
                capacity_category,
                seed,
            },
            &out,
        ),
        Command::Run {
            configs,
            out,
            parallelism,
        } => cmd_run(&configs, &out, parallelism as usize),
        Command::Analyze {
            archive,
            slice,
            metric,
            out,
        } => cmd_analyze(&archive, slice, metric, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
