//! The `bore-lab` command line.
//!
//! Exit codes: 0 on success, 2 for invalid input or configuration, 3 for
//! numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{horizon_check, preset, ConfigFile, KEYS, PRESET_NAMES};
use crate::error::Error;
use crate::io::{
    fmt_f64, profile_plot_script, read_numeric_csv_file, write_error_series_csv, write_profile_csv, write_snapshot_csv,
    write_speed_amplitude_csv, SnapshotManifest, SpeedAmplitudeRow,
};
use crate::overlay::{overlay, OverlayDataset, TimeTrace};
use crate::pde::{
    error_study, front_position, riemann_shock_state, shallow_water_shock_reference, InitialCondition, RunConfig,
    ShockState, Solver, System,
};
use crate::profile::integrate_profile;
use crate::shape::{shape_report, RegimeReport};
use crate::waveform::{eta_from_bore_froude, potential, solitary_amplitude_for_speed, tail_elevation, WaveParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    User(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::User(_) => EXIT_USER,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::User(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_user_error() {
            Failure::User(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn user(msg: impl Into<String>) -> Failure {
    Failure::User(msg.into())
}

fn config_help() -> String {
    let mut s = String::from("Config file keys (`key = value`, `#` starts a comment):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<15} {d}\n"));
    }
    s.push_str(&format!("Presets: {}\n", PRESET_NAMES.join(", ")));
    s.push_str("Environment: BORE_LAB_THREADS sets the worker count when --threads is absent.\n");
    s
}

#[derive(Parser, Debug)]
#[command(
    name = "bore-lab",
    version,
    about = "Traveling bores of the dissipative Peregrine system"
)]
#[command(after_help = config_help())]
pub struct Cli {
    /// Worker threads for parallel runs (default: BORE_LAB_THREADS or all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct WaveArgs {
    /// Phase speed (Froude number), c > 1
    #[arg(long)]
    pub c: Option<f64>,
    /// Dispersion coefficient
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dissipation coefficient
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Start from a built-in preset; explicit flags override it
    #[arg(long)]
    pub preset: Option<String>,
    /// Start from a config file; explicit flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the traveling wave and print the regime report as JSON
    Classify {
        #[command(flatten)]
        wave: WaveArgs,
        /// Also integrate the profile and report the observed shape
        #[arg(long)]
        check_profile: bool,
    },
    /// Integrate the traveling-wave profile and write CSV, JSON and a plot script
    Profile {
        #[command(flatten)]
        wave: WaveArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tail_tol: Option<f64>,
        #[arg(long)]
        seed_offset: Option<f64>,
    },
    /// Tabulate the tail and solitary amplitudes against speed
    SpeedAmplitude {
        #[arg(long)]
        c_min: f64,
        #[arg(long)]
        c_max: f64,
        #[arg(long, default_value_t = 41)]
        n: usize,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the potential G(u) on (0, c)
    Potential {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a PDE configuration and write snapshots
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run the shallow-water equations and report the classical shock
        #[arg(long, value_parser = ["shallow-water"])]
        reference: Option<String>,
    },
    /// Measure the distance between dissipative and inviscid runs
    ErrorStudy {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated positive epsilon values
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        epsilons: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a profile CSV with a measured gauge record
    Overlay {
        /// Profile CSV with columns xi and eta
        #[arg(long)]
        profile: PathBuf,
        /// Data CSV with columns t and eta
        #[arg(long)]
        data: PathBuf,
        /// Speed of the model profile
        #[arg(long)]
        c: f64,
        /// Output JSON report
        #[arg(long)]
        out: PathBuf,
    },
    /// List presets, or print one as a config file
    Preset { name: Option<String> },
}

fn resolve_wave(args: &WaveArgs) -> CliResult<WaveParams> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(_), Some(_)) => return Err(user("give either --preset or --config, not both")),
        (Some(name), None) => {
            preset(name)
                .ok_or_else(|| user(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))))?
                .config
        }
        (None, Some(path)) => ConfigFile::load(path)?,
        (None, None) => ConfigFile::default(),
    };
    if args.c.is_some() {
        cfg.c = args.c;
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if args.epsilon.is_some() {
        cfg.epsilon = args.epsilon;
    }
    Ok(cfg.wave_params()?)
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| user(format!("cannot create {}: {e}", path.display())))
}

fn create_file(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| user(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut f = create_file(path)?;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(f, "{text}").map_err(|e| user(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = create_file(path)?;
    f.write_all(text.as_bytes())
        .map_err(|e| user(format!("cannot write {}: {e}", path.display())))
}

fn cmd_classify<W: Write>(wave: &WaveArgs, check_profile: bool, out: &mut W) -> CliResult<()> {
    let params = resolve_wave(wave)?;
    let mut report = RegimeReport::new(&params)?;
    if check_profile && params.epsilon > 0.0 {
        let profile = integrate_profile(&params, &Default::default())?;
        report = report.with_profile(&profile);
    }
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    writeln!(out, "{text}").map_err(|e| user(e.to_string()))
}

fn cmd_profile(wave: &WaveArgs, out: &Path, tail_tol: Option<f64>, seed_offset: Option<f64>) -> CliResult<()> {
    let params = resolve_wave(wave)?;
    let mut opts = match &wave.config {
        Some(path) => ConfigFile::load(path)?.profile_options(),
        None => Default::default(),
    };
    if let Some(t) = tail_tol {
        opts.tail_tol = t;
    }
    if seed_offset.is_some() {
        opts.seed_offset = seed_offset;
    }
    let profile = integrate_profile(&params, &opts)?;
    let report = shape_report(&profile)?;
    create_dir(out)?;
    write_profile_csv(create_file(&out.join("profile.csv"))?, &profile)?;
    write_json(&out.join("shape.json"), &report)?;
    let title = format!(
        "c = {}, delta = {}, epsilon = {}",
        params.c, params.delta, params.epsilon
    );
    write_text(&out.join("profile.gp"), &profile_plot_script("profile.csv", &title))
}

/// Rows of the speed-amplitude table on `n` evenly spaced speeds.
pub fn speed_amplitude_rows(c_min: f64, c_max: f64, n: usize) -> crate::Result<Vec<SpeedAmplitudeRow>> {
    if !(c_min > 1.0 && c_max > c_min && c_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 1 < c_min < c_max (got {c_min}, {c_max})"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 (got {n})")));
    }
    (0..n)
        .map(|k| {
            let c = c_min + (c_max - c_min) * k as f64 / (n - 1) as f64;
            Ok(SpeedAmplitudeRow {
                c,
                eta_tail: tail_elevation(c),
                eta_solitary: solitary_amplitude_for_speed(c)?.eta_bar,
                eta_t1994_inverse: eta_from_bore_froude(c)?,
            })
        })
        .collect()
}

fn cmd_potential(wave: &WaveArgs, n: usize, out: &Path) -> CliResult<()> {
    let p = resolve_wave(wave)?;
    if n < 2 {
        return Err(user("need n >= 2"));
    }
    let mut w = csv::Writer::from_writer(create_file(out)?);
    let wr = |e: csv::Error| user(e.to_string());
    w.write_record(["u", "G"]).map_err(wr)?;
    // stop short of the pole at u = c
    let top = p.c * (1.0 - 1e-3);
    for k in 0..n {
        let u = top * k as f64 / (n - 1) as f64;
        w.write_record([fmt_f64(u), fmt_f64(potential(u, &p)?)]).map_err(wr)?;
    }
    w.flush().map_err(|e| user(e.to_string()))
}

#[derive(Serialize)]
struct ReferenceReport {
    shock: ShockState,
    fronts: Vec<FrontSample>,
}

#[derive(Serialize)]
struct FrontSample {
    t: f64,
    measured: Option<f64>,
    predicted: f64,
}

fn reference_shock(ic: &InitialCondition) -> CliResult<ShockState> {
    match *ic {
        InitialCondition::SmoothedRiemann { eta_left, .. } => Ok(riemann_shock_state(eta_left)?),
        InitialCondition::SmoothedBore { eta_left, .. } => {
            let c = crate::waveform::froude_from_tail(eta_left)?;
            Ok(shallow_water_shock_reference(c)?)
        }
        InitialCondition::Gaussian { .. } => Err(user(
            "the shallow-water reference needs a riemann or bore initial condition",
        )),
    }
}

fn write_snapshots(out: &Path, prefix: &str, config: &RunConfig, snaps: &[crate::pde::FieldPair]) -> CliResult<()> {
    for (k, s) in snaps.iter().enumerate() {
        write_snapshot_csv(create_file(&out.join(format!("{prefix}_{k:04}.csv")))?, &config.grid, s)?;
        write_json(
            &out.join(format!("{prefix}_{k:04}.json")),
            &SnapshotManifest::new(config, s.t),
        )?;
    }
    Ok(())
}

fn cmd_evolve(config: &Path, out: &Path, reference: Option<&str>) -> CliResult<()> {
    let cfg = ConfigFile::load(config)?.run_config()?;
    horizon_check(&cfg)?;
    let shock = match reference {
        Some(_) => Some(reference_shock(&cfg.ic)?),
        None => None,
    };
    let snaps = Solver::new(&cfg)?.run(|_| Ok(()))?;
    create_dir(out)?;
    write_snapshots(out, "snap", &cfg, &snaps)?;
    if let Some(shock) = shock {
        let sw = RunConfig {
            system: System::ShallowWater,
            delta: 0.0,
            epsilon: 0.0,
            ..cfg.clone()
        };
        let ref_snaps = Solver::new(&sw)?.run(|_| Ok(()))?;
        write_snapshots(out, "reference", &sw, &ref_snaps)?;
        let fronts = ref_snaps
            .iter()
            .map(|s| FrontSample {
                t: s.t,
                measured: front_position(&s.eta, &sw.grid, 0.5 * shock.eta_tail),
                predicted: shock.speed * s.t,
            })
            .collect();
        write_json(&out.join("reference.json"), &ReferenceReport { shock, fronts })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FitRecord {
    epsilon: f64,
    #[serde(rename = "K")]
    k: f64,
    window: (f64, f64),
    points: usize,
}

fn cmd_error_study(config: &Path, epsilons: &[f64], out: &Path) -> CliResult<()> {
    if epsilons.is_empty() {
        return Err(user("--epsilons needs at least one value"));
    }
    let cfg = ConfigFile::load(config)?.run_config()?;
    horizon_check(&cfg)?;
    let study = error_study(&cfg, epsilons)?;
    create_dir(out)?;
    for s in &study.series {
        write_error_series_csv(create_file(&out.join(format!("error_eps_{}.csv", s.epsilon)))?, s)?;
    }
    let fits: Vec<FitRecord> = study
        .fits
        .iter()
        .map(|f| FitRecord {
            epsilon: f.epsilon,
            k: f.k,
            window: f.window,
            points: f.points,
        })
        .collect();
    write_json(&out.join("fit.json"), &fits)
}

fn cmd_overlay(profile: &Path, data: &Path, c: f64, out: &Path) -> CliResult<()> {
    if !(c > 1.0) {
        return Err(user(format!("--c must exceed 1 (got {c})")));
    }
    let table = read_numeric_csv_file(profile)?;
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| user(format!("{}: missing column `{name}`", profile.display())))
    };
    let model = TimeTrace::from_profile(&col("xi")?, &col("eta")?, c)?;
    let dataset = OverlayDataset::from_table(&read_numeric_csv_file(data)?, &data.display().to_string())?;
    let report = overlay(&model, c, &dataset)?;
    write_json(out, &report)
}

fn cmd_preset<W: Write>(name: Option<&str>, out: &mut W) -> CliResult<()> {
    let w = |e: std::io::Error| user(e.to_string());
    match name {
        None => {
            for n in PRESET_NAMES {
                let p = preset(n).expect("listed preset");
                writeln!(out, "{n:<14} {}", p.note).map_err(w)?;
            }
        }
        Some(n) => {
            let p = preset(n).ok_or_else(|| user(format!("unknown preset `{n}`")))?;
            write!(out, "# {}\n{}", p.note, p.config.to_text()).map_err(w)?;
        }
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("BORE_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| user(format!("BORE_LAB_THREADS must be a positive integer (got {v:?})"))),
        Err(_) => Ok(None),
    }
}

/// Execute a parsed command, writing any stdout text to `stdout`.
pub fn execute<W: Write>(cli: Cli, stdout: &mut W) -> CliResult<()> {
    let threads = thread_count(cli.threads)?;
    if threads == Some(0) {
        return Err(user("thread count must be positive"));
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| Failure::Numerical(format!("cannot start worker pool: {e}")))?
    };
    let mut buf: Vec<u8> = Vec::new();
    let sink = &mut buf;
    pool.install(|| match &cli.command {
        Command::Classify { wave, check_profile } => cmd_classify(wave, *check_profile, sink),
        Command::Profile {
            wave,
            out,
            tail_tol,
            seed_offset,
        } => cmd_profile(wave, out, *tail_tol, *seed_offset),
        Command::SpeedAmplitude { c_min, c_max, n, out } => {
            let rows = speed_amplitude_rows(*c_min, *c_max, *n)?;
            Ok(write_speed_amplitude_csv(create_file(out)?, &rows)?)
        }
        Command::Potential { wave, n, out } => cmd_potential(wave, *n, out),
        Command::Evolve { config, out, reference } => cmd_evolve(config, out, reference.as_deref()),
        Command::ErrorStudy { config, epsilons, out } => cmd_error_study(config, epsilons, out),
        Command::Overlay { profile, data, c, out } => cmd_overlay(profile, data, *c, out),
        Command::Preset { name } => cmd_preset(name.as_deref(), sink),
    })?;
    stdout.write_all(&buf).map_err(|e| user(e.to_string()))
}

/// Parse `args`, run, print diagnostics to stderr and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("bore-lab: {f}");
            f.code()
        }
    }
}
