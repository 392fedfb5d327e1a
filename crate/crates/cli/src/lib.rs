//! `choreo` command line. Every subcommand is a thin wrapper over library
//! calls; [`run`] is the whole program minus process setup.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use choreo_core::motion::{sample_motif, MotifSpec};
use choreo_core::pose_pipeline::{import_pose_video, FilterMode, ImportOptions, SidePolicy};
use choreo_core::robot_model::validate_trajectory;
use choreo_core::sequencer::{render_cue_cards, validate_playlist, CueSheet, Show, TrajectoryStore};
use choreo_core::sim::{run_performance, ForceNoise, ForceScript, ForceScripts, RunOptions};
use choreo_core::{Error, RobotProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Environment variable naming the default robot profile TOML.
pub const PROFILE_ENV: &str = "CHOREO_PROFILE";

#[derive(Parser, Debug)]
#[command(name = "choreo", version, about = "Robot choreography tools")]
pub struct Cli {
    /// TOML file with `profile` and `[perform]` defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Robot profile TOML (default: $CHOREO_PROFILE, else the built-in UR5e).
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Motif files.
    #[command(subcommand)]
    Motif(MotifCmd),
    /// OpenPose keypoint import.
    #[command(subcommand)]
    Pose(PoseCmd),
    /// Cue sheets.
    #[command(subcommand)]
    Playlist(PlaylistCmd),
    /// Run a cue sheet against the simulator.
    Perform(PerformArgs),
}

#[derive(Subcommand, Debug)]
pub enum MotifCmd {
    /// Sample a motif and validate it against the profile.
    Render {
        file: PathBuf,
        /// Sample rate, Hz (default: the profile control rate).
        #[arg(long)]
        rate: Option<f64>,
        /// Override the motif duration, seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Output CSV; stdout when absent or `-`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PoseCmd {
    /// Turn a directory of OpenPose JSON frames into a trajectory CSV.
    Import {
        dir: PathBuf,
        #[arg(long, default_value = "auto")]
        side: SidePolicy,
        #[arg(long, default_value = "magnitude")]
        mode: FilterMode,
        /// Magnitude cut-off, or the first dropped bin for lowpass_bins.
        #[arg(long)]
        threshold: Option<f64>,
        /// Odd box-blur width, frames.
        #[arg(long)]
        blur: Option<usize>,
        /// Frame rate of the video, Hz.
        #[arg(long)]
        fps: Option<f64>,
        /// Output CSV; a `.meta.json` sidecar is written next to it.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum PlaylistCmd {
    /// Check every cue and transition; prints the report as JSON.
    Validate { sheet: PathBuf },
    /// Print the cue card document.
    Cards { sheet: PathBuf },
}

#[derive(Args, Debug)]
pub struct PerformArgs {
    /// Cue sheet to run in the simulator.
    #[arg(long = "sim", value_name = "CUESHEET")]
    pub sheet: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Standard deviation of force-sensor noise, N.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// `CUE=path` force script for one cue; repeatable.
    #[arg(long = "force-script", value_name = "CUE=PATH")]
    pub force_scripts: Vec<String>,
    /// Simulated-time cap, seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Stop at the first protective stop instead of resetting.
    #[arg(long)]
    pub no_auto_reset: bool,
    /// Write the run report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the JSONL event log here.
    #[arg(long)]
    pub event_log: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub profile: Option<PathBuf>,
    pub perform: PerformDefaults,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerformDefaults {
    pub seed: Option<u64>,
    pub noise_std: Option<f64>,
    /// Cue index to force script path.
    pub force_scripts: BTreeMap<String, PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::Planning { .. } => EXIT_VALIDATION,
            Error::Input(_) | Error::Ingest { .. } | Error::Parse { .. } | Error::Io { .. } => EXIT_INPUT,
            Error::Transition { .. } => EXIT_INTERNAL,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_config(path: Option<&Path>) -> std::result::Result<CliConfig, Failure> {
    let Some(path) = path else { return Ok(CliConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))?;
    let mut cfg: CliConfig = toml::from_str(&text).map_err(|e| Failure::input(format!("parsing {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Some(p) = cfg.profile.as_mut().filter(|p| p.is_relative()) {
        *p = base.join(&*p);
    }
    for p in cfg.perform.force_scripts.values_mut().filter(|p| p.is_relative()) {
        *p = base.join(&*p);
    }
    Ok(cfg)
}

/// `--profile`, then the config file, then `$CHOREO_PROFILE`, then UR5e.
pub fn resolve_profile(
    flag: Option<&Path>,
    config: Option<&Path>,
    env: Option<PathBuf>,
) -> std::result::Result<RobotProfile, Error> {
    match flag.map(Path::to_path_buf).or_else(|| config.map(Path::to_path_buf)).or(env) {
        Some(p) => RobotProfile::load(p),
        None => Ok(RobotProfile::ur5e()),
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).map_err(|e| Failure::input(format!("writing {}: {e}", p.display())))
        }
        _ => out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() }),
    }
}

fn parse_force_script(spec: &str) -> std::result::Result<(usize, PathBuf), Failure> {
    let (cue, path) = spec.split_once('=').ok_or_else(|| Failure::input(format!("--force-script `{spec}`: expected CUE=PATH")))?;
    let cue = cue.trim().parse().map_err(|_| Failure::input(format!("--force-script `{spec}`: `{cue}` is not a cue index")))?;
    Ok((cue, PathBuf::from(path)))
}

fn motif_render(
    profile: &RobotProfile,
    file: &Path,
    rate: Option<f64>,
    duration: Option<f64>,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let mut motif = MotifSpec::load(file)?;
    if let Some(d) = duration {
        motif = MotifSpec::new(motif.id, motif.label, d, motif.joints)?;
    }
    for w in motif.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    let traj = sample_motif(&motif, rate.unwrap_or(profile.control_rate_hz))?;
    let report = validate_trajectory(profile, &traj)?;
    if !report.is_safe() {
        let _ = writeln!(err, "{} violation(s) in `{}`:", report.violations.len(), motif.id);
        for v in report.violations.iter().take(20) {
            let _ = writeln!(err, "  sample {}: {:?}", v.index, v.kind);
        }
        if report.violations.len() > 20 {
            let _ = writeln!(err, "  ... {} more", report.violations.len() - 20);
        }
        return Err(Failure::validation(format!("motif `{}` fails validation", motif.id)));
    }
    write_output(output, &traj.to_csv_string(), out)?;
    let _ = writeln!(err, "{} samples at {} Hz", traj.len(), traj.rate());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn pose_import(
    dir: &Path,
    side: SidePolicy,
    mode: FilterMode,
    threshold: Option<f64>,
    blur: Option<usize>,
    fps: Option<f64>,
    output: &Path,
    err: &mut dyn Write,
) -> Outcome {
    let mut opts = ImportOptions { side, ..Default::default() };
    opts.filter.mode = mode;
    if let Some(t) = threshold {
        opts.filter.threshold = t;
    }
    if let Some(b) = blur {
        opts.filter.blur_size = b;
    }
    if let Some(f) = fps {
        opts.frame_rate = f;
    }
    let imp = import_pose_video(dir, &opts)?;
    imp.write(output)?;
    let _ = writeln!(
        err,
        "{} frames, {:?} arm, {} samples written to {}",
        imp.meta.frame_count,
        imp.meta.side_selected,
        imp.trajectory.len(),
        output.display()
    );
    Ok(())
}

fn playlist_validate(profile: &RobotProfile, sheet: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let sheet = CueSheet::load(sheet)?;
    let store = TrajectoryStore::load_for(&sheet, profile)?;
    let report = validate_playlist(&sheet, profile, &store)?;
    write_output(None, &(report.to_json() + "\n"), out)?;
    if report.passed() {
        let _ = writeln!(err, "playlist ok: {} cues", sheet.len());
        Ok(())
    } else {
        Err(Failure::validation(format!("playlist failed: {} failure(s)", report.failures.len())))
    }
}

fn perform(profile: RobotProfile, args: &PerformArgs, defaults: &PerformDefaults, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let show = Show::load(&args.sheet, profile)?;
    let mut scripts = ForceScripts {
        noise: ForceNoise {
            std_n: args.noise_std.or(defaults.noise_std).unwrap_or(0.0),
            seed: args.seed.or(defaults.seed).unwrap_or(0),
        },
        ..Default::default()
    };
    let mut entries: Vec<(usize, PathBuf)> = Vec::new();
    for (cue, path) in &defaults.force_scripts {
        let cue = cue.parse().map_err(|_| Failure::input(format!("config force_scripts key `{cue}` is not a cue index")))?;
        entries.push((cue, path.clone()));
    }
    for spec in &args.force_scripts {
        entries.push(parse_force_script(spec)?);
    }
    for (cue, path) in entries {
        if show.sheet.cue(cue).is_none() {
            return Err(Failure::input(format!("force script for cue {cue}, which is not in the sheet")));
        }
        scripts = scripts.with(cue, ForceScript::load(&path)?);
    }
    let options = RunOptions { time_limit_s: args.time_limit, auto_reset: !args.no_auto_reset, ..Default::default() };
    let (report, log) = run_performance(&show, &scripts, &options)?;
    if let Some(p) = &args.event_log {
        std::fs::write(p, log.to_jsonl()).map_err(|e| Failure::input(format!("writing {}: {e}", p.display())))?;
    }
    write_output(args.report.as_deref(), &(report.to_json() + "\n"), out)?;
    let _ = writeln!(
        err,
        "{}: {} cues, {:.2} s simulated, {} protective stop(s), digest {}",
        if report.completed { "completed" } else { "incomplete" },
        report.cues.len(),
        report.duration_s,
        report.stop_count,
        &report.command_digest[..12]
    );
    if report.completed {
        Ok(())
    } else {
        Err(Failure::validation("performance did not complete"))
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let cfg = load_config(cli.config.as_deref())?;
    let env_profile = std::env::var_os(PROFILE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let profile = resolve_profile(cli.profile.as_deref(), cfg.profile.as_deref(), env_profile)?;
    match &cli.command {
        Command::Motif(MotifCmd::Render { file, rate, duration, output }) => {
            motif_render(&profile, file, *rate, *duration, output.as_deref(), out, err)
        }
        Command::Pose(PoseCmd::Import { dir, side, mode, threshold, blur, fps, output }) => {
            pose_import(dir, *side, *mode, *threshold, *blur, *fps, output, err)
        }
        Command::Playlist(PlaylistCmd::Validate { sheet }) => playlist_validate(&profile, sheet, out, err),
        Command::Playlist(PlaylistCmd::Cards { sheet }) => {
            let sheet = CueSheet::load(sheet)?;
            write_output(None, &(render_cue_cards(&sheet).to_json() + "\n"), out)
        }
        Command::Perform(args) => perform(profile, args, &cfg.perform, out, err),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
