//! Command-line front end: configuration resolution and the `generate`,
//! `train`, `compare` and `plot` commands.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use strbf::csvfmt::fmt_f64;
use strbf::experiment::{
    mse_to_db, prepare_run, run_monte_carlo, summarize, train_model_with_eta, write_artifacts,
};
use strbf::network::{ModelKind, NetworkState};
use strbf::series::generate_mackey_glass;

use crate::config::CliConfig;

#[derive(Parser)]
#[command(name = "strbf-cli", version, about = "Mackey-Glass prediction with RBF and spatio-temporal RBF networks")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed of the Monte-Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override a configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Suppress normal standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the Mackey-Glass equation and write the series CSV.
    Generate(GenerateArgs),
    /// Train one model on one noise realization.
    Train(TrainArgs),
    /// Run the Monte-Carlo comparison and write every artifact.
    Compare(CompareArgs),
    /// Re-render SVG charts from existing comparison CSVs.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long)]
    delay: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    initial_value: Option<f64>,
    /// Horizon in seconds; the series has `len / sample_interval + 1` samples.
    #[arg(long)]
    len: Option<f64>,
    /// Integration step in seconds.
    #[arg(long)]
    step: Option<f64>,
    /// Series file (default `<out>/series.csv`).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// `rbf` or `strbf`.
    #[arg(long)]
    model: ModelKind,
    /// Learning rate; zero leaves the initial network untouched.
    #[arg(long)]
    eta: Option<f64>,
    /// Run index whose seed and noise realization are used.
    #[arg(long, default_value_t = 0)]
    run: usize,
    /// Checkpoint path (default `<out>/<model>_checkpoint.csv`).
    #[arg(long, value_name = "PATH")]
    checkpoint: Option<PathBuf>,
    /// Load the checkpoint and only evaluate it on the test range.
    #[arg(long)]
    eval_only: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    runs: Option<usize>,
    /// Also render SVG charts.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding the comparison CSVs (default `<out>`).
    #[arg(long, value_name = "DIR")]
    dir: Option<PathBuf>,
}

fn resolve(cli: &Cli) -> Result<CliConfig> {
    let mut config = CliConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    for assignment in &cli.set {
        config.apply_override(assignment)?;
    }
    if let Some(seed) = cli.seed {
        config.experiment.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    Ok(config)
}

struct Printer {
    quiet: bool,
}

impl Printer {
    fn line(&self, s: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", s.as_ref());
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(mut config: CliConfig, args: &GenerateArgs, out: &Printer) -> Result<()> {
    let s = &mut config.experiment.series;
    let overrides = [
        (&mut s.a, args.a),
        (&mut s.b, args.b),
        (&mut s.delay, args.delay),
        (&mut s.exponent, args.exponent),
        (&mut s.initial_value, args.initial_value),
        (&mut s.horizon, args.len),
        (&mut s.integration_step, args.step),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    let series = generate_mackey_glass(&config.experiment.series)?;
    let path = args.output.clone().unwrap_or_else(|| config.out.join("series.csv"));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    create_dir(dir)?;
    series.save(&path)?;
    let stem = path.file_stem().map_or("series".into(), |s| s.to_string_lossy().into_owned());
    write_file(&dir.join(format!("{stem}_config.txt")), config.to_text())?;
    out.line(format!(
        "samples={} min={} max={} path={}",
        series.len(),
        fmt_f64(series.min()),
        fmt_f64(series.max()),
        path.display()
    ));
    Ok(())
}

fn metrics_csv(model: ModelKind, rows: &[(&str, f64)]) -> Result<String> {
    let mut text = String::from("model,phase,mse,mse_db\n");
    for (phase, mse) in rows {
        text.push_str(&format!("{model},{phase},{},{}\n", fmt_f64(*mse), fmt_f64(mse_to_db(*mse)?)));
    }
    Ok(text)
}

fn cmd_train(config: CliConfig, args: &TrainArgs, out: &Printer) -> Result<()> {
    let exp = &config.experiment;
    let run_config = strbf::ExperimentConfig {
        runs: exp.runs.max(args.run + 1),
        prediction_run: 0,
        ..exp.clone()
    };
    run_config.validate()?;
    let clean = generate_mackey_glass(&run_config.series)?;
    let data = prepare_run(&run_config, &clean, args.run)?;
    let checkpoint = args
        .checkpoint
        .clone()
        .unwrap_or_else(|| config.out.join(format!("{}_checkpoint.csv", args.model)));
    create_dir(&config.out)?;

    if args.eval_only {
        let state = NetworkState::load(&checkpoint)?;
        if state.topology().kind != args.model {
            bail!(
                "checkpoint {} holds a {} network, not {}",
                checkpoint.display(),
                state.topology().kind,
                args.model
            );
        }
        let eval = state.evaluate(&data.test)?;
        write_file(
            &config.out.join(format!("{}_eval_metrics.csv", args.model)),
            metrics_csv(args.model, &[("test", eval.mse)])?,
        )?;
        out.line(format!(
            "model={} test_mse={} test_mse_db={}",
            args.model,
            fmt_f64(eval.mse),
            fmt_f64(mse_to_db(eval.mse)?)
        ));
        return Ok(());
    }

    let eta = args.eta.unwrap_or_else(|| run_config.eta(args.model));
    if !(eta >= 0.0 && eta.is_finite()) {
        bail!("--eta must be finite and non-negative, got {eta}");
    }
    let record = train_model_with_eta(&run_config, &data, args.model, eta)?;
    if let Some(dir) = checkpoint.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    record.state.save(&checkpoint)?;
    write_file(
        &config.out.join(format!("{}_metrics.csv", args.model)),
        metrics_csv(args.model, &[("train", record.train_mse), ("test", record.test_mse)])?,
    )?;
    write_file(&config.out.join("config.txt"), config.to_text())?;
    out.line(format!(
        "model={} eta={} train_mse={} train_mse_db={} test_mse={} test_mse_db={} checkpoint={}",
        args.model,
        eta,
        fmt_f64(record.train_mse),
        fmt_f64(mse_to_db(record.train_mse)?),
        fmt_f64(record.test_mse),
        fmt_f64(mse_to_db(record.test_mse)?),
        checkpoint.display()
    ));
    Ok(())
}

fn staging_dir(out: &Path) -> PathBuf {
    let pid = std::process::id();
    match out.file_name() {
        Some(name) => out.with_file_name(format!(".{}.partial-{pid}", name.to_string_lossy())),
        None => out.join(format!(".partial-{pid}")),
    }
}

fn write_comparison(config: &CliConfig, mc: &strbf::MonteCarlo, dir: &Path) -> Result<()> {
    write_artifacts(dir, &config.experiment, mc)?;
    write_file(&dir.join("config.txt"), config.to_text())?;
    if config.plot {
        plot::render_all(dir, dir)?;
    }
    Ok(())
}

/// Moves every file of `from` into `to`, replacing same-named files.
fn publish(from: &Path, to: &Path) -> Result<()> {
    create_dir(to)?;
    let mut names: Vec<_> = std::fs::read_dir(from)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    for name in names {
        let target = to.join(&name);
        std::fs::rename(from.join(&name), &target).with_context(|| format!("moving into {}", target.display()))?;
    }
    std::fs::remove_dir(from).with_context(|| format!("removing {}", from.display()))
}

fn cmd_compare(mut config: CliConfig, args: &CompareArgs, out: &Printer) -> Result<()> {
    if let Some(runs) = args.runs {
        config.experiment.runs = runs;
    }
    if args.plot {
        config.plot = true;
    }
    let mc = run_monte_carlo(&config.experiment)?;

    let staging = staging_dir(&config.out);
    create_dir(&staging)?;
    let written = write_comparison(&config, &mc, &staging).and_then(|_| publish(&staging, &config.out));
    if let Err(e) = written {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(e);
    }

    let table = summarize(&mc.rbf, &mc.strbf);
    out.line(format!("{:<14}{:>16}{:>16}{:>10}", "configuration", "train_mse_db", "test_mse_db", "gap_db"));
    for row in &table.rows {
        out.line(format!(
            "{:<14}{:>16.2}{:>16.2}{:>10.2}",
            row.configuration, row.train_mse_db, row.test_mse_db, row.gap_db
        ));
    }
    out.line(format!(
        "strbf_wins={}/{} out={}",
        mc.strbf_wins(),
        mc.records.len(),
        config.out.display()
    ));
    Ok(())
}

fn cmd_plot(config: CliConfig, args: &PlotArgs, out: &Printer) -> Result<()> {
    let dir = args.dir.clone().unwrap_or(config.out);
    for name in plot::render_all(&dir, &dir)? {
        out.line(dir.join(name).display().to_string());
    }
    Ok(())
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let config = resolve(cli)?;
    let out = Printer { quiet: cli.quiet };
    match &cli.command {
        Command::Generate(args) => cmd_generate(config, args, &out),
        Command::Train(args) => cmd_train(config, args, &out),
        Command::Compare(args) => cmd_compare(config, args, &out),
        Command::Plot(args) => cmd_plot(config, args, &out),
    }
}

/// One `key=value` line describing a failure.
pub fn error_line(err: &anyhow::Error) -> String {
    let mut fields = vec![];
    match err.downcast_ref::<strbf::Error>() {
        Some(e) => {
            fields.push(format!("kind={}", e.kind()));
            let mut inner = e;
            if let strbf::Error::Run { run_index, source } = e {
                fields.push(format!("run={run_index}"));
                inner = source;
            }
            if let strbf::Error::Diverged { iteration, .. } = inner {
                fields.push(format!("iteration={iteration}"));
            }
        }
        None => fields.push("kind=cli".into()),
    }
    // Some errors already print their source; skip it when it repeats.
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !parts.last().is_some_and(|p| p.ends_with(&text)) {
            parts.push(text);
        }
    }
    let message = parts.join(": ");
    fields.push(format!("message={message:?}"));
    format!("error: {}", fields.join(" "))
}

/// Parses `args` (program name first) and runs the command in-process.
pub fn run_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    run(&cli)
}
