//! Command-line front end: ingest signals, window them, run fits, GoF model
//! comparisons, simulation grids, and KDE, emitting machine-readable reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use emgfit::estimator::{em_fit, EmConfig, FitResult};
use emgfit::gof::compare_models;
use emgfit::ingest::ingest_csv;
use emgfit::kde::{kde_evaluate, Bandwidth, KdeSpec};
use emgfit::numerics::mix_seed;
use emgfit::signal::{window_signal, SignalWindow, WindowMode};
use emgfit::simulation::{run_accuracy_grid, GridSpec};

#[derive(Parser)]
#[command(
    name = "emgfit",
    about = "Scale-mixture variance-distribution fitting for surface EMG signals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the scale-mixture model to windows of one or more signal files.
    Fit(FitArgs),
    /// Compare scale-mixture, Gaussian, and Laplacian fits with the AD statistic.
    Gof(FitArgs),
    /// Run the synthetic-signal accuracy grid.
    Simulate(SimulateArgs),
    /// Kernel density estimate of the values in the input files.
    Kde(KdeArgs),
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct CommonArgs {
    /// JSON file providing defaults for any unset flag.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,

    /// Output directory for report files.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Output format for tabular reports.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct EmArgs {
    /// Relative log-marginal-likelihood convergence threshold.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Lower edge of the uniform initialization range.
    #[arg(long)]
    init_low: Option<f64>,

    /// Upper edge of the uniform initialization range.
    #[arg(long)]
    init_high: Option<f64>,

    /// Number of random restarts per window.
    #[arg(long)]
    restarts: Option<usize>,

    /// Maximum EM iterations per restart.
    #[arg(long)]
    max_iters: Option<usize>,
}

impl EmArgs {
    fn resolve(&self, seed: u64) -> EmConfig {
        let d = EmConfig::default();
        EmConfig {
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            max_iterations: self.max_iters.unwrap_or(d.max_iterations),
            init_range: (
                self.init_low.unwrap_or(d.init_range.0),
                self.init_high.unwrap_or(d.init_range.1),
            ),
            restarts: self.restarts.unwrap_or(d.restarts),
            nu_search: d.nu_search,
            seed,
        }
    }
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,

    /// Input CSV signal file(s); rows are `value` or `time,value`.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Sampling rate in Hz.
    #[arg(long)]
    fs: Option<f64>,

    /// Analysis window length in seconds; omit to fit the whole file.
    #[arg(long)]
    window_seconds: Option<f64>,

    /// Stride between sliding windows in seconds (defaults to the window length).
    #[arg(long)]
    stride_seconds: Option<f64>,

    /// Use a single trailing window instead of sliding windows.
    #[arg(long)]
    trailing: bool,

    /// Subtract the empirical mean before fitting.
    #[arg(long)]
    mean_subtract: bool,

    #[command(flatten)]
    #[serde(flatten)]
    em: EmArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,

    /// Grid preset: the full 400-cell grid or a desk-scale subsample.
    #[arg(long, value_enum)]
    preset: Option<GridPreset>,

    /// Explicit true shape values (overrides the preset's α₀ axis).
    #[arg(long, num_args = 1..)]
    alpha0: Option<Vec<f64>>,

    /// Explicit true scale values (overrides the preset's β₀ axis).
    #[arg(long, num_args = 1..)]
    beta0: Option<Vec<f64>>,

    /// Window lengths in seconds.
    #[arg(long, num_args = 1..)]
    window_lengths: Option<Vec<f64>>,

    /// Generated signal duration in seconds.
    #[arg(long)]
    duration: Option<f64>,

    /// Sampling rate in Hz.
    #[arg(long)]
    fs: Option<f64>,

    /// Generate a fresh signal per window length instead of trailing windows
    /// of one signal per cell.
    #[arg(long)]
    fresh_signals: bool,

    #[command(flatten)]
    #[serde(flatten)]
    em: EmArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct KdeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,

    /// Input CSV file(s) of values.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Kernel bandwidth; a number or "auto" for Silverman's rule.
    #[arg(long)]
    bandwidth: Option<String>,

    #[arg(long)]
    grid_min: Option<f64>,

    #[arg(long)]
    grid_max: Option<f64>,

    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GridPreset {
    Desk,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Gof(args) => cmd_gof(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Kde(args) => cmd_kde(args),
    };
    match outcome {
        Ok(failures) if failures == 0 => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} input(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type CmdResult = Result<usize, Box<dyn std::error::Error>>;

fn merge_config<T: for<'de> Deserialize<'de> + Serialize>(
    args: T,
    config: &Option<PathBuf>,
) -> Result<T, Box<dyn std::error::Error>> {
    // Flags win over config-file values: serialize the flags (None fields
    // drop out), then overlay them on the config file's object.
    let Some(path) = config else { return Ok(args) };
    let base: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let mut merged = base;
    let overlay = serde_json::to_value(&args)?;
    if let (Some(m), Some(o)) = (merged.as_object_mut(), overlay.as_object()) {
        for (k, v) in o {
            if !v.is_null() {
                m.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(serde_json::from_value(merged)?)
}

fn prepare_out_dir(dir: &Option<PathBuf>) -> Result<PathBuf, Box<dyn std::error::Error>> {
    let dir = dir.clone().unwrap_or_else(|| PathBuf::from("emgfit-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_run_config(
    dir: &Path,
    subcommand: &str,
    resolved: serde_json::Value,
) -> Result<(), Box<dyn std::error::Error>> {
    let body = json!({ "subcommand": subcommand, "resolved": resolved });
    fs::write(dir.join("run_config.json"), serde_json::to_string_pretty(&body)?)?;
    Ok(())
}

/// Loads each input, applies preprocessing and windowing; returns the windows
/// per input plus the number of inputs that failed.
fn collect_windows(args: &FitArgs) -> (Vec<(PathBuf, Vec<SignalWindow>)>, usize) {
    let fs_hz = args.fs.unwrap_or(2000.0);
    let mut out = Vec::new();
    let mut failures = 0;
    for path in &args.input {
        let windows = (|| -> emgfit::Result<Vec<SignalWindow>> {
            let mut signal = ingest_csv(path, fs_hz)?;
            if args.mean_subtract {
                signal.subtract_mean();
            }
            match args.window_seconds {
                None => Ok(vec![signal]),
                Some(len) => {
                    let mode =
                        if args.trailing { WindowMode::Trailing } else { WindowMode::Sliding };
                    let stride = args.stride_seconds.unwrap_or(len);
                    window_signal(&signal, len, stride, mode)
                }
            }
        })();
        match windows {
            Ok(w) => out.push((path.clone(), w)),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                failures += 1;
            }
        }
    }
    (out, failures)
}

#[derive(Serialize)]
struct FitRow {
    input: String,
    window: usize,
    n: usize,
    alpha: f64,
    beta: f64,
    nu: f64,
    s: f64,
    log_marginal: f64,
    iterations: usize,
    converged: bool,
}

fn fit_row(input: &Path, window: usize, n: usize, fit: &FitResult) -> FitRow {
    FitRow {
        input: input.display().to_string(),
        window,
        n,
        alpha: fit.params.alpha,
        beta: fit.params.beta,
        nu: fit.t_params.nu,
        s: fit.t_params.s,
        log_marginal: fit.log_marginal,
        iterations: fit.iterations,
        converged: fit.converged,
    }
}

fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    rows: &[T],
) -> Result<(), Box<dyn std::error::Error>> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(rows)?)?;
        }
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> CmdResult {
    let config_path = args.common.config.clone();
    let args = merge_config(args, &config_path)?;
    let dir = prepare_out_dir(&args.common.out_dir)?;
    let format = args.common.format.unwrap_or_default();
    let seed = args.common.seed.unwrap_or(0);
    let (inputs, mut failures) = collect_windows(&args);

    let mut rows = Vec::new();
    let mut window_seeds = Vec::new();
    let mut global_idx = 0u64;
    for (path, windows) in &inputs {
        for (wi, window) in windows.iter().enumerate() {
            let ws = mix_seed(seed, global_idx);
            window_seeds.push(json!({ "input": path.display().to_string(), "window": wi, "seed": ws }));
            global_idx += 1;
            let cfg = args.em.resolve(ws);
            match em_fit(window, &cfg) {
                Ok(fit) => rows.push(fit_row(path, wi, window.len(), &fit)),
                Err(e) => {
                    eprintln!("error: {} window {wi}: {e}", path.display());
                    failures += 1;
                }
            }
        }
    }

    write_table(&dir, "fits", format, &rows)?;
    write_run_config(
        &dir,
        "fit",
        json!({
            "args": &args,
            "master_seed": seed,
            "em_defaults": args.em.resolve(seed),
            "window_seeds": window_seeds,
        }),
    )?;
    Ok(failures)
}

#[derive(Serialize)]
struct GofRow {
    input: String,
    window: usize,
    n: usize,
    model: String,
    a_squared: f64,
    params: String,
}

fn cmd_gof(args: FitArgs) -> CmdResult {
    let config_path = args.common.config.clone();
    let args = merge_config(args, &config_path)?;
    let dir = prepare_out_dir(&args.common.out_dir)?;
    let format = args.common.format.unwrap_or_default();
    let seed = args.common.seed.unwrap_or(0);
    let (inputs, mut failures) = collect_windows(&args);

    let mut rows = Vec::new();
    let mut window_seeds = Vec::new();
    let mut global_idx = 0u64;
    for (path, windows) in &inputs {
        for (wi, window) in windows.iter().enumerate() {
            let ws = mix_seed(seed, global_idx);
            window_seeds.push(json!({ "input": path.display().to_string(), "window": wi, "seed": ws }));
            global_idx += 1;
            let cfg = args.em.resolve(ws);
            let report = compare_models(window, &cfg);
            if report.entries.is_empty() {
                eprintln!("error: {} window {wi}: no model could be fitted", path.display());
                failures += 1;
                continue;
            }
            for entry in &report.entries {
                rows.push(GofRow {
                    input: path.display().to_string(),
                    window: wi,
                    n: report.sample_count,
                    model: entry.model.name().to_string(),
                    a_squared: entry.a_squared,
                    params: serde_json::to_string(&entry.model)?,
                });
            }
        }
    }

    write_table(&dir, "gof", format, &rows)?;
    write_run_config(
        &dir,
        "gof",
        json!({
            "args": &args,
            "master_seed": seed,
            "em_defaults": args.em.resolve(seed),
            "window_seeds": window_seeds,
        }),
    )?;
    Ok(failures)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let config_path = args.common.config.clone();
    let args = merge_config(args, &config_path)?;
    let dir = prepare_out_dir(&args.common.out_dir)?;
    let format = args.common.format.unwrap_or_default();
    let seed = args.common.seed.unwrap_or(0);

    let mut grid = match args.preset.unwrap_or(GridPreset::Desk) {
        GridPreset::Desk => GridSpec::desk(seed),
        GridPreset::Full => GridSpec::full(seed),
    };
    if let Some(a) = &args.alpha0 {
        grid.alpha0_values = a.clone();
    }
    if let Some(b) = &args.beta0 {
        grid.beta0_values = b.clone();
    }
    if let Some(w) = &args.window_lengths {
        grid.window_lengths_s = w.clone();
    }
    if let Some(d) = args.duration {
        grid.duration_s = d;
    }
    if let Some(f) = args.fs {
        grid.sample_rate_hz = f;
    }
    grid.fresh_signal_per_window = args.fresh_signals;

    let em = args.em.resolve(seed);
    let result = run_accuracy_grid(&grid, &em)?;

    write_table(&dir, "accuracy", format, &result.records)?;
    fs::write(
        dir.join("aggregates.json"),
        serde_json::to_string_pretty(&result.aggregates)?,
    )?;
    write_run_config(
        &dir,
        "simulate",
        json!({ "args": &args, "grid": grid, "em_config": em }),
    )?;
    Ok(0)
}

fn cmd_kde(args: KdeArgs) -> CmdResult {
    let config_path = args.common.config.clone();
    let args = merge_config(args, &config_path)?;
    let dir = prepare_out_dir(&args.common.out_dir)?;
    let mut failures = 0;
    let mut meta = Vec::new();

    let bandwidth = match args.bandwidth.as_deref() {
        None | Some("auto") => Bandwidth::Auto,
        Some(text) => Bandwidth::Fixed(
            text.parse::<f64>().map_err(|_| format!("invalid bandwidth {text:?}"))?,
        ),
    };

    for path in &args.input {
        let run = (|| -> Result<(), Box<dyn std::error::Error>> {
            let signal = ingest_csv(path, 1.0)?;
            let (dmin, dmax) = signal
                .samples
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let pad = 0.1 * (dmax - dmin).max(1e-6);
            let spec = KdeSpec {
                bandwidth,
                grid_min: args.grid_min.unwrap_or(dmin - pad),
                grid_max: args.grid_max.unwrap_or(dmax + pad),
                grid_points: args.grid_points.unwrap_or(512),
            };
            let result = kde_evaluate(&signal.samples, &spec)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let mut w = csv::Writer::from_path(dir.join(format!("kde_{stem}.csv")))?;
            w.write_record(["grid", "density"])?;
            for (g, d) in &result.points {
                w.write_record([g.to_string(), d.to_string()])?;
            }
            w.flush()?;
            meta.push(json!({
                "input": path.display().to_string(),
                "bandwidth": result.bandwidth,
                "degenerate_fallback": result.degenerate_fallback,
                "grid": [spec.grid_min, spec.grid_max, spec.grid_points],
            }));
            Ok(())
        })();
        if let Err(e) = run {
            eprintln!("error: {}: {e}", path.display());
            failures += 1;
        }
    }

    write_run_config(&dir, "kde", json!({ "args": &args, "runs": meta }))?;
    Ok(failures)
}

// CLI behavior is covered by tests/cli.rs against the compiled binary.
