//! Command line front end: load a scenario, run it, write the run
//! directory, and print focused summaries per subcommand.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use knowran_core::sim::{run_scenario, write_run_dir, RunMode, RunOutput, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "knowran",
    about = "Deterministic warehouse RAN simulator with a knowledge-agent control plane",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress log output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Bundled scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Override the scenario's run mode.
    #[arg(long)]
    mode: Option<RunMode>,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory to write run artifacts into. Omit to skip writing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and print its metrics as CSV.
    Run(RunArgs),
    /// Run the scenario in both modes and print the metrics side by side.
    Compare(RunArgs),
    /// Run and summarize authentication outcomes.
    Auth(RunArgs),
    /// Run and summarize beam management.
    Beam(RunArgs),
    /// Run and summarize channel estimation.
    Channel(RunArgs),
    /// List the bundled scenarios.
    Scenarios,
}

fn load(args: &RunArgs) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(&args.scenario)
        .with_context(|| format!("loading scenario {:?}", args.scenario))?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_and_write(args: &RunArgs, cfg: &ScenarioConfig) -> anyhow::Result<RunOutput> {
    let out = run_scenario(cfg).context("running scenario")?;
    if let Some(root) = &args.out {
        let dir = write_run_dir(root, cfg, &out).context("writing run directory")?;
        log::info!("run artifacts in {}", dir.display());
    }
    Ok(out)
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args)?;
    let out = run_and_write(args, &cfg)?;
    print!("{}", out.metrics.to_csv());
    Ok(())
}

fn cmd_compare(args: &RunArgs) -> anyhow::Result<()> {
    let mut cfg = load(args)?;
    let mut rows = Vec::new();
    for mode in [RunMode::Baseline, RunMode::Knowledge] {
        cfg.mode = mode;
        let out = run_and_write(args, &cfg)?;
        rows.push(out.metrics);
    }
    println!("{}", knowran_core::sim::CSV_HEADER);
    for m in &rows {
        println!("{}", m.to_csv_row());
    }
    let b = &rows[0];
    let k = &rows[1];
    let ratio = if b.beam_measurements_total > 0 {
        k.beam_measurements_total as f64 / b.beam_measurements_total as f64
    } else {
        f64::NAN
    };
    println!();
    println!(
        "beam probes: baseline {} knowledge {} ({:.2}% of baseline)",
        b.beam_measurements_total,
        k.beam_measurements_total,
        100.0 * ratio
    );
    println!(
        "pilot frames: baseline {} knowledge {}",
        b.pilot_frames_total, k.pilot_frames_total
    );
    println!(
        "misselection: baseline {:.4} knowledge {:.4}",
        b.beam_misselection_rate, k.beam_misselection_rate
    );
    Ok(())
}

fn cmd_auth(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args)?;
    let out = run_and_write(args, &cfg)?;
    let m = &out.metrics;
    println!(
        "attempts={} accepted={} rejected={} unverified={}",
        m.auth_attempts, m.auth_accepted, m.auth_rejected, m.auth_unverified
    );
    println!(
        "attacks={} attacks_rejected={}",
        m.auth_attacks, m.auth_attacks_rejected
    );
    for line in out.trace.of_kind(knowran_core::sim::trace::KIND_AUTH) {
        println!("{line}");
    }
    Ok(())
}

fn cmd_beam(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args)?;
    let out = run_and_write(args, &cfg)?;
    let m = &out.metrics;
    println!(
        "probes={} misselection_rate={:.4} mean_rssi_dbm={:.2} mean_rssi_best_dbm={:.2}",
        m.beam_measurements_total, m.beam_misselection_rate, m.mean_rssi_dbm, m.mean_rssi_best_dbm
    );
    println!(
        "mode fractions: knowledge={:.3} window={:.3} fallback={:.3}",
        m.mode_knowledge, m.mode_window, m.mode_fallback
    );
    Ok(())
}

fn cmd_channel(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load(args)?;
    let out = run_and_write(args, &cfg)?;
    let m = &out.metrics;
    let nmse = if m.channel_nmse_defined {
        format!("{:.6e}", m.channel_nmse)
    } else {
        "n/a".to_string()
    };
    println!(
        "estimates={} nmse={} pilot_frames={}",
        m.channel_estimate_events, nmse, m.pilot_frames_total
    );
    println!(
        "advisories={} actual_blockages={} unwarned={} mean_lead_s={}",
        m.blockage_advisories,
        m.blockage_events_actual,
        m.blockage_losses_unwarned,
        if m.blockage_lead_defined {
            format!("{:.3}", m.blockage_mean_lead_s)
        } else {
            "n/a".to_string()
        }
    );
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly on SIGPIPE like any other line-oriented tool, so
    // `knowran auth ... | head` does not panic mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if !cli.quiet {
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
            .format_timestamp(None)
            .init();
    }
    let result = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Compare(a) => cmd_compare(a),
        Cmd::Auth(a) => cmd_auth(a),
        Cmd::Beam(a) => cmd_beam(a),
        Cmd::Channel(a) => cmd_channel(a),
        Cmd::Scenarios => {
            for name in knowran_core::sim::scenario::bundled_names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
