//! Command-line front end: subcommand dispatch, config loading, seeding,
//! and artifact emission.
//!
//! Exit codes: 0 success, 1 usage, 2 missing file, 3 unknown key,
//! 4 constraint violation, 5 runtime or oracle failure. `ITSIM_SEED`
//! overrides the configured master seed.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::coherence::{fit_contrast, run_sequence};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::manifest::RunManifest;
use crate::noise::{heating_map, NoiseSpec};
use crate::output::{read_two_column_csv, write_json, CsvTable};
use crate::thermometry::{
    fit_nbar, flopping_curve, fock_rabi_rate, make_distribution, suggested_n_max, StateKind,
    Transition,
};
use crate::transport::{
    dac_resonance_scan, integrate_motion, PathLabel, ScanFamily,
};
use crate::{task_seed, validate};

#[derive(Parser)]
#[command(name = "itsim", version, about = "Axial ion-transport simulator")]
struct Cli {
    /// Configuration file (flat key = value lines); defaults apply if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override (also via ITSIM_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a transport waveform and report the mean energy gain.
    Transport(TransportArgs),
    /// Heating-rate-to-noise ratio along the path.
    HeatingMap(HeatingMapArgs),
    /// Noiseless energy gain versus DAC update rate.
    DacScan(DacScanArgs),
    /// Ramsey/spin-echo fringe with transport in the precession windows.
    Ramsey(RamseyArgs),
    /// Synthesize a sideband flopping curve for a known state.
    FlopSynth(FlopSynthArgs),
    /// Fit a mean occupation to a measured flopping curve.
    FlopFit(FlopFitArgs),
    /// Pseudopotential and field-squared-gradient profile.
    PotentialProfile(PotentialProfileArgs),
    /// Run the full invariant/oracle check suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct TransportArgs {
    /// Transport path: ece, echce, or ecvce.
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    duration_us: Option<f64>,
    /// DAC update rate in Hz (zero-order hold).
    #[arg(long, conflicts_with = "continuous")]
    dac_rate_hz: Option<f64>,
    /// Smooth waveform with no DAC quantization.
    #[arg(long)]
    continuous: bool,
    /// Sideband noise level in dBc; "-inf" disables noise.
    #[arg(long, allow_hyphen_values = true)]
    noise_dbc: Option<String>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    dt_s: Option<f64>,
    /// JSON summary path.
    #[arg(long, default_value = "transport.json")]
    out: PathBuf,
    /// Optional CSV trajectory of the last seed (t_s, s_um, v_mps, energy_J).
    #[arg(long)]
    trajectory_csv: Option<PathBuf>,
}

#[derive(Args)]
struct HeatingMapArgs {
    #[arg(long, default_value_t = 401)]
    points: usize,
    /// Calibration scale applied to the ratio column.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value = "heating_map.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct DacScanArgs {
    #[arg(long, default_value_t = 0.25e6)]
    rate_min_hz: f64,
    #[arg(long, default_value_t = 0.55e6)]
    rate_max_hz: f64,
    #[arg(long, default_value_t = 301)]
    points: usize,
    /// Duration stretch factors, one scan series each.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    stretch: Vec<f64>,
    #[arg(long, default_value = "dac_scan.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RamseyArgs {
    /// Transport count: 0 none, 1 second half, 2 both halves.
    #[arg(long)]
    transports: Option<u64>,
    #[arg(long)]
    t1_us: Option<f64>,
    #[arg(long)]
    phase_points: Option<u64>,
    #[arg(long)]
    contrast_floor: Option<f64>,
    #[arg(long, default_value = "ramsey.csv")]
    csv_out: PathBuf,
    #[arg(long, default_value = "ramsey.json")]
    json_out: PathBuf,
}

#[derive(Args)]
struct FlopSynthArgs {
    #[arg(long)]
    nbar: Option<f64>,
    /// State kind: thermal or coherent.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value = "flop.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct FlopFitArgs {
    /// Input CSV with header and (t_s, population) rows.
    #[arg(long = "in")]
    input: PathBuf,
    /// Assumed state: thermal, coherent, or arbitrary.
    #[arg(long)]
    assume: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    omega0_hz: Option<f64>,
    #[arg(long, default_value = "flop_fit.json")]
    out: PathBuf,
}

#[derive(Args)]
struct PotentialProfileArgs {
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long, default_value = "potential_profile.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "validate.manifest.json")]
    out: PathBuf,
}

/// Parses arguments from the environment and runs; returns the process
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => 2,
        Error::UnknownKey(_) => 3,
        Error::Constraint { .. } => 4,
        _ => 5,
    }
}

fn load_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    if let Ok(seed) = std::env::var("ITSIM_SEED") {
        cfg.master_seed = seed.parse().map_err(|_| Error::Constraint {
            key: "ITSIM_SEED".into(),
            message: format!("expected an integer, got {seed:?}"),
        })?;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn out_path(cfg: &SimConfig, requested: &Path) -> PathBuf {
    if requested.is_absolute() || cfg.output_dir.is_empty() {
        requested.to_owned()
    } else {
        Path::new(&cfg.output_dir).join(requested)
    }
}

fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    std::fs::write(path, manifest.to_json()?)?;
    Ok(())
}

fn manifest_path(artifact: &Path) -> PathBuf {
    let stem = artifact
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    artifact.with_file_name(format!("{stem}.manifest.json"))
}

fn execute(cli: Cli) -> Result<i32> {
    let cfg = load_config(&cli)?;
    let started = Instant::now();
    match &cli.command {
        Command::Transport(args) => run_transport(&cfg, args, started),
        Command::HeatingMap(args) => run_heating_map(&cfg, args, started),
        Command::DacScan(args) => run_dac_scan(&cfg, args, started),
        Command::Ramsey(args) => run_ramsey(&cfg, args, started),
        Command::FlopSynth(args) => run_flop_synth(&cfg, args, started),
        Command::FlopFit(args) => run_flop_fit(&cfg, args, started),
        Command::PotentialProfile(args) => run_potential_profile(&cfg, args, started),
        Command::Validate(args) => run_validate(&cfg, args, started),
    }
}

fn run_transport(cfg: &SimConfig, args: &TransportArgs, started: Instant) -> Result<i32> {
    let mut wf_cfg = cfg.waveform.clone();
    if let Some(path) = &args.path {
        wf_cfg.path = path.clone();
    }
    if let Some(d) = args.duration_us {
        wf_cfg.duration_us = d;
    }
    if args.continuous {
        wf_cfg.dac_rate_hz = 0.0;
    } else if let Some(rate) = args.dac_rate_hz {
        wf_cfg.dac_rate_hz = rate;
    }
    if let Some(dt) = args.dt_s {
        wf_cfg.dt_s = dt;
    }
    let mut noise_cfg = cfg.noise;
    if let Some(level) = &args.noise_dbc {
        noise_cfg.level_dbc = if level == "-inf" {
            f64::NEG_INFINITY
        } else {
            level.parse().map_err(|_| Error::Constraint {
                key: "noise.level_dbc".into(),
                message: format!("expected a number or -inf, got {level:?}"),
            })?
        };
    }
    let seeds = args.seeds.unwrap_or(cfg.waveform.seeds).max(1) as usize;

    let ion = cfg.ion.build()?;
    let drive = cfg.drive.build()?;
    let model = cfg.field_model.build()?;
    let wf = wf_cfg.build()?;
    let dt = wf_cfg.time_step(&wf.freq);
    let intrinsic = if cfg.noise.intrinsic_quanta_per_s > 0.0 {
        Some(cfg.noise.intrinsic_quanta_per_s)
    } else {
        None
    };

    // Force-noise band covering every secular frequency the path visits.
    let noiseless = noise_cfg.level_dbc == f64::NEG_INFINITY;
    let f_lo = wf.freq.omega_min() / TAU - noise_cfg.bandwidth_hz / 2.0;
    let f_hi = wf.freq.omega_max() / TAU + noise_cfg.bandwidth_hz / 2.0;

    let mut gains = Vec::with_capacity(seeds);
    let mut last = None;
    for i in 0..seeds {
        let spec = if noiseless {
            None
        } else {
            Some(NoiseSpec::new(
                crate::constants::dbc_to_fractional_psd(noise_cfg.level_dbc),
                TAU * 0.5 * (f_lo + f_hi),
                f_hi - f_lo,
                task_seed(cfg.master_seed, i as u64),
            )?)
        };
        let traj = integrate_motion(&wf, &model, &ion, &drive, spec.as_ref(), intrinsic, dt)?;
        gains.push(traj.gain_quanta);
        last = Some(traj);
    }
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let var = gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n.max(2.0);
    let stderr = (var / n).sqrt();

    if let Some(csv_path) = &args.trajectory_csv {
        let traj = last.as_ref().expect("at least one seed");
        let mut table = CsvTable::new(&["t_s", "s_um", "v_mps", "energy_J"]);
        for i in 0..traj.times.len() {
            table.push(vec![
                traj.times[i],
                traj.positions[i] * 1e6,
                traj.velocities[i],
                traj.energies[i],
            ])?;
        }
        table.write(&out_path(cfg, csv_path))?;
    }

    let json_path = out_path(cfg, &args.out);
    write_json(
        &json_path,
        &serde_json::json!({
            "path": wf_cfg.path,
            "duration_s": wf.duration,
            "mean_gain_quanta": mean,
            "stderr": stderr,
            "seeds": seeds,
        }),
    )?;
    let mut manifest = RunManifest::new("transport", cfg);
    manifest.insert_value("mean_gain_quanta", mean);
    manifest.insert_value("stderr_quanta", stderr);
    manifest.insert_text("path", &wf_cfg.path);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&json_path))?;
    Ok(0)
}

fn run_heating_map(cfg: &SimConfig, args: &HeatingMapArgs, started: Instant) -> Result<i32> {
    let ion = cfg.ion.build()?;
    let drive = cfg.drive.build()?;
    let model = cfg.field_model.build()?;
    let freq = cfg.waveform.freq_profile()?;
    if args.points < 2 {
        return Err(Error::Domain("need at least 2 grid points".into()));
    }
    let (lo, hi) = model.extent_m();
    let grid: Vec<f64> = (0..args.points)
        .map(|i| lo + (hi - lo) * i as f64 / (args.points - 1) as f64)
        .collect();
    let spec = cfg.noise.build(cfg.waveform.omega_zone_hz, cfg.master_seed)?;
    let map = heating_map(&grid, &spec, |s| freq.omega_at(s), args.scale, &model, &ion, &drive)?;

    let mut table = CsvTable::new(&["s_um", "ratio_quanta_per_s_per_V2Hz", "phi_p_eV"]);
    for p in &map {
        table.push(vec![
            p.s * 1e6,
            p.ratio,
            p.phi_p / crate::constants::ELECTRON_VOLT,
        ])?;
    }
    let csv_path = out_path(cfg, &args.out);
    table.write(&csv_path)?;

    let peak = map.iter().map(|p| p.ratio).fold(0.0f64, f64::max);
    let mut manifest = RunManifest::new("heating-map", cfg);
    manifest.insert_value("peak_ratio", peak);
    manifest.insert_value("points", map.len() as f64);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&csv_path))?;
    Ok(0)
}

fn run_dac_scan(cfg: &SimConfig, args: &DacScanArgs, started: Instant) -> Result<i32> {
    let ion = cfg.ion.build()?;
    let drive = cfg.drive.build()?;
    let model = cfg.field_model.build()?;
    if args.points < 2 || args.rate_max_hz <= args.rate_min_hz {
        return Err(Error::Domain("bad scan grid".into()));
    }
    let rates: Vec<f64> = (0..args.points)
        .map(|i| {
            args.rate_min_hz
                + (args.rate_max_hz - args.rate_min_hz) * i as f64 / (args.points - 1) as f64
        })
        .collect();
    let family = ScanFamily::default();
    let dt = cfg.waveform.time_step(&crate::transport::FreqProfile::Fixed(family.omega));
    let series = dac_resonance_scan(&rates, &family, &args.stretch, &model, &ion, &drive, dt)?;

    let mut table = CsvTable::new(&["rate_hz", "stretch", "gain_quanta"]);
    let mut worst_gain = 0.0f64;
    for (si, points) in series.iter().enumerate() {
        for p in points {
            table.push(vec![p.rate, args.stretch[si], p.gain_quanta])?;
            worst_gain = worst_gain.max(p.gain_quanta);
        }
    }
    let csv_path = out_path(cfg, &args.out);
    table.write(&csv_path)?;

    let mut manifest = RunManifest::new("dac-scan", cfg);
    manifest.insert_value("max_gain_quanta", worst_gain);
    manifest.insert_value("points", rates.len() as f64);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&csv_path))?;
    Ok(0)
}

fn run_ramsey(cfg: &SimConfig, args: &RamseyArgs, started: Instant) -> Result<i32> {
    let mut coh = cfg.coherence;
    if let Some(t) = args.transports {
        coh.transports = t;
    }
    if let Some(t1) = args.t1_us {
        coh.t1_us = t1;
        coh.t2_us = t1;
    }
    if let Some(c) = args.contrast_floor {
        coh.contrast_floor = c;
    }
    let n_phase = args.phase_points.unwrap_or(coh.phase_points) as usize;
    let spec = coh.sequence()?;
    let profile = coh.profile();
    let wf = cfg.waveform.build()?;
    let fringe = run_sequence(&spec, &wf, &profile, n_phase)?;

    let mut table = CsvTable::new(&["phi_rad", "population"]);
    for (&phi, &p) in fringe.phases.iter().zip(&fringe.populations) {
        table.push(vec![phi, p])?;
    }
    let csv_path = out_path(cfg, &args.csv_out);
    table.write(&csv_path)?;

    let samples: Vec<(f64, f64)> = fringe
        .phases
        .iter()
        .cloned()
        .zip(fringe.populations.iter().cloned())
        .collect();
    let fit = fit_contrast(&samples)?;
    let json_path = out_path(cfg, &args.json_out);
    write_json(
        &json_path,
        &serde_json::json!({
            "contrast": fit.contrast,
            "phase_offset_rad": fit.phase_offset,
            "net_phase_rad": fringe.net_phase,
        }),
    )?;

    let mut manifest = RunManifest::new("ramsey", cfg);
    manifest.insert_value("contrast", fit.contrast);
    manifest.insert_value("net_phase_rad", fringe.net_phase);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&json_path))?;
    Ok(0)
}

fn run_flop_synth(cfg: &SimConfig, args: &FlopSynthArgs, started: Instant) -> Result<i32> {
    let mut th = cfg.thermometry.clone();
    if let Some(nbar) = args.nbar {
        th.nbar = nbar;
    }
    if let Some(kind) = &args.kind {
        th.assume = kind.clone();
    }
    if let Some(n) = args.samples {
        th.samples = n;
    }
    let kind = th.assumption()?;
    if kind == StateKind::Arbitrary {
        return Err(Error::Constraint {
            key: "thermometry.assume".into(),
            message: "synthesis needs thermal or coherent".into(),
        });
    }
    let transition = th.transition()?;
    let dist = make_distribution(kind, th.nbar, suggested_n_max(kind, th.nbar))?;
    let w_ref = match transition {
        Transition::RedSideband => fock_rabi_rate(1, transition, th.eta, th.omega0())?,
        _ => fock_rabi_rate(0, transition, th.eta, th.omega0())?,
    };
    let n = th.samples.max(20) as usize;
    let span = 8.0 * TAU / w_ref;
    let times: Vec<f64> = (0..n).map(|i| span * i as f64 / n as f64).collect();
    let curve = flopping_curve(&dist, &times, transition, th.eta, th.omega0())?;

    let mut table = CsvTable::new(&["t_s", "population"]);
    for (&t, &p) in curve.times.iter().zip(&curve.populations) {
        table.push(vec![t, p])?;
    }
    let csv_path = out_path(cfg, &args.out);
    table.write(&csv_path)?;

    let mut manifest = RunManifest::new("flop-synth", cfg);
    manifest.insert_value("nbar", th.nbar);
    manifest.insert_text("kind", kind.name());
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&csv_path))?;
    Ok(0)
}

fn run_flop_fit(cfg: &SimConfig, args: &FlopFitArgs, started: Instant) -> Result<i32> {
    let mut th = cfg.thermometry.clone();
    if let Some(a) = &args.assume {
        th.assume = a.clone();
    }
    if let Some(eta) = args.eta {
        th.eta = eta;
    }
    if let Some(f) = args.omega0_hz {
        th.omega0_hz = f;
    }
    let samples = read_two_column_csv(&args.input)?;
    let fit = fit_nbar(
        &samples,
        th.assumption()?,
        th.transition()?,
        th.eta,
        th.omega0(),
    )?;

    let json_path = out_path(cfg, &args.out);
    write_json(
        &json_path,
        &serde_json::json!({
            "nbar": fit.nbar,
            "residual": fit.residual_rms,
            "assumption": fit.assumption.name(),
        }),
    )?;
    let mut manifest = RunManifest::new("flop-fit", cfg);
    manifest.insert_value("nbar", fit.nbar);
    manifest.insert_value("residual_rms", fit.residual_rms);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&json_path))?;
    Ok(0)
}

fn run_potential_profile(cfg: &SimConfig, args: &PotentialProfileArgs, started: Instant) -> Result<i32> {
    let ion = cfg.ion.build()?;
    let drive = cfg.drive.build()?;
    let model = cfg.field_model.build()?;
    if args.points < 2 {
        return Err(Error::Domain("need at least 2 grid points".into()));
    }
    let (lo, hi) = model.extent_m();
    let mut table = CsvTable::new(&["s_um", "phi_p_eV", "dE0sq_dz"]);
    for i in 0..args.points {
        let s = lo + (hi - lo) * i as f64 / (args.points - 1) as f64;
        table.push(vec![
            s * 1e6,
            model.pseudopotential(s)? / crate::constants::ELECTRON_VOLT,
            model.field_sq_gradient(s, &ion, &drive)?,
        ])?;
    }
    let csv_path = out_path(cfg, &args.out);
    table.write(&csv_path)?;

    let mut manifest = RunManifest::new("potential-profile", cfg);
    manifest.insert_value("points", args.points as f64);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &manifest_path(&csv_path))?;
    Ok(0)
}

fn run_validate(cfg: &SimConfig, args: &ValidateArgs, started: Instant) -> Result<i32> {
    let results = validate::run_all(cfg);
    let mut manifest = RunManifest::new("validate", cfg);
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "pass" } else { "fail" };
        println!("{status}  {name}: {detail}", name = r.name, detail = r.detail);
        manifest.insert_text(r.name, &format!("{status}: {}", r.detail));
        all_passed &= r.passed;
    }
    manifest.insert_text("overall", if all_passed { "pass" } else { "fail" });
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&manifest, &out_path(cfg, &args.out))?;
    Ok(if all_passed { 0 } else { 5 })
}

/// Convenience entry point used by the binary: parse PATH transport labels
/// without exposing clap to the library API.
pub fn parse_path_label(s: &str) -> Option<PathLabel> {
    PathLabel::parse(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_map_by_error_kind() {
        let missing = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "x"));
        assert_eq!(exit_code_for(&missing), 2);
        assert_eq!(exit_code_for(&Error::UnknownKey("a.b".into())), 3);
        let constraint = Error::Constraint {
            key: "k".into(),
            message: "m".into(),
        };
        assert_eq!(exit_code_for(&constraint), 4);
        assert_eq!(exit_code_for(&Error::Domain("d".into())), 5);
    }

    #[test]
    fn manifest_path_derivation() {
        assert_eq!(
            manifest_path(Path::new("out/run.json")),
            Path::new("out/run.manifest.json")
        );
        assert_eq!(
            manifest_path(Path::new("scan.csv")),
            Path::new("scan.manifest.json")
        );
    }

    #[test]
    fn cli_parses_transport_flags() {
        let cli = Cli::try_parse_from([
            "itsim",
            "transport",
            "--path",
            "ece",
            "--continuous",
            "--noise-dbc",
            "-inf",
            "--seeds",
            "12",
        ])
        .unwrap();
        match cli.command {
            Command::Transport(args) => {
                assert_eq!(args.path.as_deref(), Some("ece"));
                assert!(args.continuous);
                assert_eq!(args.noise_dbc.as_deref(), Some("-inf"));
                assert_eq!(args.seeds, Some(12));
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert!(Cli::try_parse_from(["itsim", "teleport"]).is_err());
    }
}
