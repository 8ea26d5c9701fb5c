use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use socnet::dynamics::{detect_potentially_unsatisfied, events_csv};
use socnet_harness::config::LoadedConfig;
use socnet_harness::emit::emit;
use socnet_harness::preset::{GridPoint, Measures, OutputKind};
use socnet_harness::{builtin, builtin_names, load_config, load_preset, run_experiment, ExperimentPreset, HarnessError, RunOptions, RunOutcome, Verdict};

#[derive(Parser)]
#[command(name = "socnet-sim", version, about = "Simulate endogenous social network formation and score closed-form predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Output {
    /// Output directory (default: socnet-out/<name>)
    #[arg(long, env = "SOCNET_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications of a society config (TOML or JSON)
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u32>,
        /// Also measure average betweenness at the checkpoints
        #[arg(long)]
        betweenness: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Run a built-in preset, or a preset file
    Preset {
        name: String,
        /// Multiply the preset's replication count
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Print every closed-form prediction for a config, with its validity regime
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Birth date used by popularity predictions
        #[arg(long, default_value_t = 10)]
        focus_agent: u32,
        /// Include predictions outside their regime
        #[arg(long)]
        all: bool,
    },
    /// Run a preset and exit with status 1 if any scored check fails
    Verify {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// List built-in presets and the criteria they back
    List,
}

fn resolve_preset(name: &str) -> Result<ExperimentPreset, HarnessError> {
    if let Some(p) = builtin(name) {
        return Ok(p);
    }
    let path = Path::new(name);
    if path.extension().is_some() && path.exists() {
        return load_preset(path);
    }
    Err(HarnessError::UnknownPreset(name.into()))
}

fn config_preset(loaded: &LoadedConfig, name: &str, betweenness: bool) -> ExperimentPreset {
    let horizon = loaded.config.horizon;
    let mut checkpoints: Vec<u32> = [250, 500, 1000, 2000, 5000].into_iter().filter(|&t| t < horizon).collect();
    checkpoints.push(horizon);
    ExperimentPreset {
        name: name.into(),
        description: "ad hoc run of a society config".into(),
        criteria: Vec::new(),
        society: loaded.config.clone(),
        sweep: vec![GridPoint { label: "config".into(), overrides: Vec::new() }],
        checkpoints: checkpoints.clone(),
        measures: Measures {
            eft_cohort: Some([(horizon / 5).max(2), horizon - horizon / 20]),
            focus_agent: (horizon >= 20).then_some(10),
            betweenness_at: if betweenness { checkpoints } else { Vec::new() },
            attachment: None,
            track_omega: false,
        },
        oracles: Vec::new(),
        outputs: vec![OutputKind::Csv, OutputKind::Json, OutputKind::Svg],
    }
}

fn out_dir(output: &Output, name: &str) -> PathBuf {
    output.out.clone().unwrap_or_else(|| PathBuf::from("socnet-out").join(name))
}

fn report(outcome: &RunOutcome, dir: &Path, preset: &ExperimentPreset) -> anyhow::Result<()> {
    let files = emit(&outcome.summary, &preset.outputs, dir)?;
    eprintln!("{}: {} grid point(s) in {:.2?}", preset.name, outcome.summary.points.len(), outcome.elapsed);
    for p in &outcome.summary.points {
        if let Some(f) = &p.failure {
            eprintln!("  {}: replication {} failed (seed {}, stream {}): {}", p.label, f.replication, f.seed, f.stream_id, f.message);
        }
    }
    for c in &outcome.summary.comparisons {
        let verdict = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::OutOfRegime => "SKIP",
        };
        println!(
            "{verdict} criterion {} {} [{}] predicted {} observed {} ({})",
            c.criterion,
            c.check,
            c.points.join(", "),
            c.predicted,
            c.observed,
            c.detail
        );
    }
    eprintln!("wrote {} file(s) to {}", files.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, seed, reps, betweenness, output } => {
            let loaded = load_config(&config)?;
            eprint!("{}", loaded.echo());
            for ty in detect_potentially_unsatisfied(&loaded.config) {
                eprintln!("warning: type {} has gamma = 1 and 0 < h < 1; its agents may never be satisfied", ty.0);
            }
            let name = config.file_stem().and_then(|s| s.to_str()).unwrap_or("config").to_string();
            let preset = config_preset(&loaded, &name, betweenness);
            let options = RunOptions { parallelism: output.parallel, seed, replications: reps };
            let outcome = run_experiment(&preset, options)?;
            let dir = out_dir(&output, &name);
            report(&outcome, &dir, &preset)?;
            let mut first = loaded.config.clone();
            if let Some(s) = seed {
                first.seed = s;
            }
            let traj = socnet::simulate(&first, 0)?;
            let write = |file: &str, text: String| {
                let path = dir.join(file);
                std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
            };
            write("replication0_edges.csv", traj.graph.edges_csv())?;
            write("replication0_events.csv", events_csv(&traj.events))?;
            write("replication0_agents.json", serde_json::to_string_pretty(&traj.graph.agent_summaries())? + "\n")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { name, scale, seed, output } => {
            let preset = resolve_preset(&name)?.scaled(scale);
            let outcome = run_experiment(&preset, RunOptions { parallelism: output.parallel, seed, replications: None })?;
            report(&outcome, &out_dir(&output, &preset.name), &preset)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { name, scale, seed, output } => {
            let preset = resolve_preset(&name)?.scaled(scale);
            let outcome = run_experiment(&preset, RunOptions { parallelism: output.parallel, seed, replications: None })?;
            report(&outcome, &out_dir(&output, &preset.name), &preset)?;
            Ok(if outcome.summary.failed() { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Oracle { config, focus_agent, all } => {
            let loaded = load_config(&config)?;
            eprint!("{}", loaded.echo());
            let preds: Vec<_> = socnet::oracles::predictions(&loaded.config, focus_agent)
                .into_iter()
                .filter(|p| all || p.in_regime)
                .collect();
            println!("{}", serde_json::to_string_pretty(&preds)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            for name in builtin_names() {
                let p = builtin(name).expect("listed presets exist");
                let criteria: Vec<String> = p.criteria.iter().map(u32::to_string).collect();
                println!("{name:<8} criteria {:<8} {}", criteria.join(","), p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
