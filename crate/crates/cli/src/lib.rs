//! Command-line driver: runs from configuration files, preset validation,
//! Rayleigh-Taylor sweeps and SVG rendering of snapshots.

pub mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use splashwave_core::conformal::{map_jet, BranchContext};
use splashwave_core::diagnostics::field_min;
use splashwave_core::dynamics::{rhs_tilde, run_observed, HaltReason, SimConfig};
use splashwave_core::initdata::{preset, splash_curve, splat_curve, validate_splash, PresetName, PresetParams};
use splashwave_core::io::{
    self, fmt_f64, parse_config, render_curve_svg, render_sigma_svg, serialize_config, write_diagnostics_csv,
    write_snapshot, CurveView, SigmaSeries, SvgOptions,
};
use splashwave_core::{Domain, Error, SheetState};

pub use manifest::{verify_manifest, RunManifest, MANIFEST_NAME};

/// Environment variable that overrides every output directory.
pub const OUT_ENV: &str = "SPLASHWAVE_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => CliError::Io(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "splashwave", version, about = "Periodic water waves with surface tension: runs, validation and plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum View {
    Native,
    Physical,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the configured preset and write diagnostics, snapshots and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides out_dir from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a preset and print its validation report.
    Validate {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        flat_width: Option<f64>,
        #[arg(long)]
        gap: Option<f64>,
    },
    /// Rayleigh-Taylor function of the splash data for several surface tensions.
    RtSweep {
        /// Comma-separated values of tau.
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a snapshot file as SVG.
    Render {
        #[arg(long)]
        snapshot: PathBuf,
        /// Output file; defaults to the snapshot path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = View::Physical)]
        view: View,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Validate { preset, n, flat_width, gap } => cmd_validate(&preset, n, flat_width, gap),
        Command::RtSweep { taus, n, out } => cmd_rt_sweep(&taus, n, out),
        Command::Render { snapshot, out, view } => cmd_render(&snapshot, out, view),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn out_dir(flag: Option<PathBuf>, fallback: &str) -> PathBuf {
    if let Some(p) = flag {
        return p;
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(fallback),
    }
}

/// The preset state in the configured domain.
pub fn initial_state(config: &SimConfig) -> Result<SheetState, CliError> {
    let p = preset(config.preset, config.n, &config.preset_params)?;
    let state = match config.domain {
        Domain::Plain => p.plain,
        Domain::Tilde => p.tilde,
    };
    state.ok_or_else(|| {
        CliError::Config(format!("preset {} has no {} state", config.preset.as_str(), config.domain.as_str()))
    })
}

fn cmd_run(path: &Path, out: Option<PathBuf>) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    let dir = out_dir(out, &config.out_dir);
    std::fs::create_dir_all(&dir)?;
    let echo = serialize_config(&config);
    let manifest = RunManifest::new("run", echo.clone());
    let initial = initial_state(&config)?;

    let mut files = vec!["config.txt".to_string()];
    std::fs::write(dir.join("config.txt"), &echo)?;
    let mut write_error: Option<Error> = None;
    let every = config.snapshot_every;
    let outcome = run_observed(&config, initial, &mut |step, state| {
        if every > 0 && step % every == 0 && write_error.is_none() {
            let name = format!("snapshot_{step:06}.txt");
            match write_snapshot(&dir.join(&name), state) {
                Ok(()) => files.push(name),
                Err(e) => write_error = Some(e),
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }
    write_diagnostics_csv(&dir.join("diagnostics.csv"), &outcome.records)?;
    write_snapshot(&dir.join("final.txt"), &outcome.final_state)?;
    let opts = SvgOptions { view: CurveView::Physical, title: Some(format!("t = {:.6}", outcome.final_state.t)), ..SvgOptions::default() };
    let svg = render_curve_svg(&outcome.final_state, &opts)
        .or_else(|_| render_curve_svg(&outcome.final_state, &SvgOptions { view: CurveView::Native, ..opts.clone() }))?;
    std::fs::write(dir.join("final.svg"), svg)?;
    files.extend(["diagnostics.csv", "final.txt", "final.svg"].map(String::from));
    manifest.finish(&dir, &files, outcome.halt.as_str())?;

    println!(
        "halt: {} after {} steps at t = {} ({} records) -> {}",
        outcome.halt,
        outcome.steps,
        outcome.final_state.t,
        outcome.records.len(),
        dir.display()
    );
    Ok(if matches!(outcome.halt, HaltReason::BlowUp(_)) { EXIT_BLOW_UP } else { EXIT_OK })
}

fn cmd_validate(name: &str, n: usize, flat_width: Option<f64>, gap: Option<f64>) -> Result<i32, CliError> {
    let name: PresetName = name.parse()?;
    let mut params = PresetParams::default();
    if let Some(w) = flat_width {
        params.flat_width = w;
    }
    if let Some(g) = gap {
        params.gap = g;
    }
    match name {
        PresetName::Splash | PresetName::Splat => {
            let curve = match name {
                PresetName::Splash => splash_curve(n)?,
                _ => splat_curve(n, params.flat_width)?,
            };
            let report = validate_splash(&curve, &BranchContext::default());
            println!("{} data at n = {n}:", name.as_str());
            for line in report.lines() {
                println!("  {line}");
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_CONFIG })
        }
        _ => {
            let p = preset(name, n, &params)?;
            println!("{} data at n = {n}: builds", name.as_str());
            if let Some(r) = p.inversion_residual {
                println!("  normal-velocity inversion residual {r:.3e}");
            }
            if let Some(c) = p.omega_consistency {
                println!("  tilde vortex-strength consistency {c:.3e}");
            }
            for (label, s) in [("plain", &p.plain), ("tilde", &p.tilde)] {
                if let Some(s) = s {
                    println!("  {label}: arc-chord F = {:.6}", splashwave_core::diagnostics::arc_chord(&s.curve).f_max);
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// `σ` of the tilde splash data at each `τ`, computed concurrently.
pub fn sigma_sweep(state: &SheetState, taus: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let jet = &map_jet(&state.curve)?;
    let results: Vec<Result<Vec<f64>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> =
            taus.iter().map(|&tau| scope.spawn(move || rhs_tilde(state, tau, jet).map(|b| b.sigma))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn cmd_rt_sweep(taus: &[f64], n: usize, out: Option<PathBuf>) -> Result<i32, CliError> {
    if taus.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(CliError::Config("tau values must be finite and non-negative".into()));
    }
    let dir = out_dir(out, "out/rt_sweep");
    std::fs::create_dir_all(&dir)?;
    let echo = format!("n = {n}\ntaus = {}\npreset = splash\n", taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","));
    let manifest = RunManifest::new("rt-sweep", echo);
    let state = preset(PresetName::Splash, n, &PresetParams::default())?
        .tilde
        .ok_or_else(|| CliError::Config("splash preset has no tilde state".into()))?;
    let sigmas = sigma_sweep(&state, taus)?;

    let alpha = state.curve.grid().nodes();
    let mut files = Vec::new();
    let mut series = Vec::new();
    for (tau, sigma) in taus.iter().zip(&sigmas) {
        let name = format!("sigma_tau_{tau}.txt");
        let mut text = format!("# tau={} n={n}\n# alpha sigma\n", fmt_f64(*tau));
        for (a, s) in alpha.iter().zip(sigma) {
            text.push_str(&format!("{} {}\n", fmt_f64(*a), fmt_f64(*s)));
        }
        std::fs::write(dir.join(&name), text)?;
        files.push(name);
        let (min, at) = field_min(&state.curve, sigma);
        println!("tau = {tau}: min sigma = {min:.6} at alpha = {at:.4}");
        series.push(SigmaSeries { label: format!("tau = {tau}"), alpha: alpha.clone(), sigma: sigma.clone() });
    }
    let opts = SvgOptions { title: Some("Rayleigh-Taylor function of the splash data".into()), ..SvgOptions::default() };
    std::fs::write(dir.join("rt_sweep.svg"), render_sigma_svg(&series, &opts))?;
    files.push("rt_sweep.svg".into());
    manifest.finish(&dir, &files, "complete")?;
    Ok(EXIT_OK)
}

fn cmd_render(snapshot: &Path, out: Option<PathBuf>, view: View) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(snapshot).map_err(|e| CliError::Io(format!("{}: {e}", snapshot.display())))?;
    let state = io::parse_snapshot(&text)?;
    let view = match view {
        View::Native => CurveView::Native,
        View::Physical => CurveView::Physical,
    };
    let opts = SvgOptions { view, title: Some(format!("t = {:.6}", state.t)), ..SvgOptions::default() };
    let svg = render_curve_svg(&state, &opts)?;
    let path = out.unwrap_or_else(|| snapshot.with_extension("svg"));
    std::fs::write(&path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}
