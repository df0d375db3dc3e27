//! End-to-end acceptance checks. Each test prints one PASS line on success
//! so `cargo test --test acceptance -- --nocapture` doubles as a report.

use std::f64::consts::TAU;

use itsim::coherence::{
    fit_contrast, run_sequence, waveform_phase, FieldShiftProfile, SequenceSpec,
    TransportPlacement,
};
use itsim::config::SimConfig;
use itsim::constants::{dbc_to_fractional_psd, quanta_to_energy, IonSpecies, RFDrive};
use itsim::noise::{heating_map, heating_rate, heating_rate_from_gradient, NoiseSpec};
use itsim::potential::AxialFieldModel;
use itsim::thermometry::{
    fit_nbar, flopping_curve, fock_rabi_rate, make_distribution, suggested_n_max, StateKind,
    Transition,
};
use itsim::transport::{
    design_waveform, integrate_motion, per_pass_gain_estimate, dac_resonance_scan, FreqProfile,
    PathLabel, Sampling, ScanFamily,
};
use itsim::validate::langevin_heating_rate;
use itsim::task_seed;

fn ion() -> IonSpecies {
    IonSpecies::beryllium_9()
}

fn drive() -> RFDrive {
    RFDrive::default()
}

fn pass(criterion: u32, detail: &str) {
    println!("ACCEPTANCE {criterion} PASS: {detail}");
}

#[test]
fn criterion_01_unit_anchor() {
    let e = quanta_to_energy(5.0, 3.6e6, true).unwrap();
    let rel = (e - 82.0e-9).abs() / 82.0e-9;
    assert!(rel < 0.005, "82 neV anchor off by {rel:.2e}");
    pass(1, &format!("5 quanta + zero point at 3.6 MHz = {:.3} neV", e * 1e9));
}

#[test]
fn criterion_02_heating_map_null_and_symmetry() {
    let ion = ion();
    let drive = drive();
    // Exact null at an isolated barrier peak.
    let single = AxialFieldModel::single_barrier(130.0);
    let peak_s = single.barrier_centers_m()[0];
    let spec = NoiseSpec::new(1e-17, TAU * 3.6e6, 150.0e3, 0).unwrap();
    let at_peak = heating_rate(peak_s, &spec, TAU * 3.6e6, &single, &ion, &drive).unwrap();
    assert_eq!(at_peak, 0.0, "heating at the barrier peak must vanish");

    // Mirror symmetry of the default symmetric double-barrier map.
    let model = AxialFieldModel::default();
    let grid: Vec<f64> = (0..=400)
        .map(|i| -600.0e-6 + 1200.0e-6 * i as f64 / 400.0)
        .collect();
    let map = heating_map(&grid, &spec, |_| TAU * 3.6e6, 1.0, &model, &ion, &drive).unwrap();
    let peak = map.iter().map(|p| p.ratio).fold(0.0f64, f64::max);
    let n = map.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max((map[i].ratio - map[n - 1 - i].ratio).abs() / peak);
    }
    assert!(worst < 1e-12, "mirror asymmetry {worst:.2e}");
    pass(2, &format!("peak rate exactly 0, asymmetry {worst:.1e} of map peak"));
}

#[test]
fn criterion_03_langevin_agrees_with_analytic() {
    let ion = ion();
    let drive = drive();
    let model = AxialFieldModel::default();
    let om_z = TAU * 3.6e6;
    let s_v = 2.0e-18;
    let bw = 150.0e3;
    let mut ratios = Vec::new();
    for (i, &s_um) in [-190.0, -170.0, -100.0].iter().enumerate() {
        let s = s_um * 1e-6;
        let spec = NoiseSpec::new(s_v, om_z, bw, 0).unwrap();
        let analytic = heating_rate(s, &spec, om_z, &model, &ion, &drive).unwrap();
        let mc = langevin_heating_rate(
            s,
            om_z,
            s_v,
            bw,
            0.5e-3,
            50,
            task_seed(1234, i as u64),
            &model,
            &ion,
            &drive,
        )
        .unwrap();
        let ratio = mc / analytic;
        assert!(
            (ratio - 1.0).abs() < 0.20,
            "s = {s_um} um: MC/analytic = {ratio:.3}"
        );
        ratios.push(format!("{s_um} um: {ratio:.3}"));
    }
    pass(3, &format!("MC/analytic ratios [{}] all within 20%", ratios.join(", ")));
}

#[test]
fn criterion_04_heating_rate_scalings() {
    let ion = ion();
    let drive = drive();
    let de = 3.0e7;
    let s_v = 2.0e-18;
    let om_z = TAU * 3.6e6;
    let base = heating_rate_from_gradient(de, s_v, om_z, &ion, &drive).unwrap();
    let s2 = heating_rate_from_gradient(de, 2.0 * s_v, om_z, &ion, &drive).unwrap();
    let half = RFDrive::new(drive.peak_voltage, drive.drive_angular_freq / 2.0).unwrap();
    let o16 = heating_rate_from_gradient(de, s_v, om_z, &ion, &half).unwrap();
    let d1 = (s2 / base - 2.0).abs();
    let d2 = (o16 / base - 16.0).abs();
    assert!(d1 < 1e-12, "S_V doubling deviates by {d1:.2e}");
    assert!(d2 < 1e-12, "Omega_RF halving deviates by {d2:.2e}");
    pass(4, &format!("S_V doubling dev {d1:.1e}, drive halving dev {d2:.1e}"));
}

#[test]
fn criterion_05_per_pass_gain_window() {
    let ion = ion();
    let drive = drive();
    let model = AxialFieldModel::default();
    // Round trip with roughly 20 us per barrier crossing.
    let wf = design_waveform(
        PathLabel::Ece,
        100.0e-6,
        Sampling::Continuous,
        FreqProfile::default_bump(),
    )
    .unwrap();
    let dt = 1.0 / (100.0 * 5.7e6);
    let est = per_pass_gain_estimate(&wf, -177.0, 30, 99, &model, &ion, &drive, dt).unwrap();
    assert!(
        (0.02..=2.0).contains(&est.mean_quanta),
        "per-pass gain {:.3} quanta outside [0.02, 2.0]",
        est.mean_quanta
    );
    pass(
        5,
        &format!(
            "ambient -177 dBc: {:.3} +- {:.3} quanta per pass over {} passes",
            est.mean_quanta, est.stderr_quanta, est.passes
        ),
    );
}

#[test]
fn criterion_06_adiabatic_transport() {
    let ion = ion();
    let drive = drive();
    let model = AxialFieldModel::default();
    let freq = FreqProfile::default_bump();
    let dt = 1.0 / (100.0 * 5.7e6);
    let gain_at = |duration: f64| {
        let wf = design_waveform(PathLabel::Ece, duration, Sampling::Continuous, freq).unwrap();
        integrate_motion(&wf, &model, &ion, &drive, None, None, dt)
            .unwrap()
            .gain_quanta
    };
    let slow = gain_at(400.0e-6);
    assert!(slow < 0.1, "400 us gain {slow:.3e} quanta");
    let g1 = gain_at(100.0e-6);
    let g4 = gain_at(400.0e-6);
    assert!(
        g4 < g1 / 4.0,
        "gain(4T) = {g4:.3e} not below gain(T)/4 = {:.3e}",
        g1 / 4.0
    );
    pass(6, &format!("gain(100 us) = {g1:.2e}, gain(400 us) = {g4:.2e} quanta"));
}

#[test]
fn criterion_07_path_length_ordering() {
    let ion = ion();
    let drive = drive();
    let model = AxialFieldModel::default();
    let dt = 1.0 / (100.0 * 5.7e6);
    let freq = FreqProfile::default_bump();
    let psd = dbc_to_fractional_psd(-167.0);
    let mean_gain = |path: PathLabel, duration: f64| {
        let wf = design_waveform(path, duration, Sampling::Continuous, freq).unwrap();
        let f_lo = freq.omega_min() / TAU - 75.0e3;
        let f_hi = freq.omega_max() / TAU + 75.0e3;
        let mut total = 0.0;
        for i in 0..30u64 {
            let spec = NoiseSpec::new(
                psd,
                TAU * 0.5 * (f_lo + f_hi),
                f_hi - f_lo,
                task_seed(777, i),
            )
            .unwrap();
            let traj = integrate_motion(&wf, &model, &ion, &drive, Some(&spec), None, dt).unwrap();
            total += traj.gain_quanta;
        }
        total / 30.0
    };
    // Same well speed on both paths: the longer path takes twice as long.
    let ece = mean_gain(PathLabel::Ece, 100.0e-6);
    let echce = mean_gain(PathLabel::Echce, 200.0e-6);
    assert!(
        echce >= ece,
        "through-junction mean gain {echce:.3} below round-trip {ece:.3}"
    );
    pass(7, &format!("mean gains: E-C-E {ece:.3}, E-C-H-C-E {echce:.3} quanta (30 seeds)"));
}

#[test]
fn criterion_08_dac_resonances() {
    let ion = ion();
    let drive = drive();
    let model = AxialFieldModel::default();
    let family = ScanFamily::default();
    let dt = 1.0 / (100.0 * 3.6e6);
    let f_ax = 3.6e6;

    // Coarse scan across the band: one local maximum near each submultiple.
    let n = 301;
    let rates: Vec<f64> = (0..n)
        .map(|i| 0.25e6 + 0.30e6 * i as f64 / (n - 1) as f64)
        .collect();
    let scan = &dac_resonance_scan(&rates, &family, &[1.0], &model, &ion, &drive, dt).unwrap()[0];
    let step = rates[1] - rates[0];
    let mut found = Vec::new();
    for k in 7..=14u32 {
        let f_k = f_ax / k as f64;
        if f_k < 0.25e6 || f_k > 0.55e6 {
            continue;
        }
        // Window halfway to the neighboring submultiples.
        let lo = 0.5 * (f_k + f_ax / (k + 1) as f64);
        let hi = 0.5 * (f_k + f_ax / (k as f64 - 1.0).max(1.0));
        let in_window: Vec<_> = scan
            .iter()
            .filter(|p| p.rate >= lo && p.rate <= hi)
            .collect();
        let best = in_window
            .iter()
            .max_by(|a, b| a.gain_quanta.partial_cmp(&b.gain_quanta).unwrap())
            .expect("window not empty");
        assert!(
            (best.rate - f_k).abs() <= 3.0 * step,
            "k = {k}: maximum at {:.1} kHz, expected {:.1} kHz",
            best.rate / 1e3,
            f_k / 1e3
        );
        found.push(k);
    }
    assert!(found.len() >= 5, "too few resonances located: {found:?}");

    // FWHM at the k = 10 resonance shrinks when the waveform is stretched.
    let f10 = f_ax / 10.0;
    let dense: Vec<f64> = (0..161)
        .map(|i| f10 - 8.0e3 + 16.0e3 * i as f64 / 160.0)
        .collect();
    let series =
        dac_resonance_scan(&dense, &family, &[1.0, 4.0], &model, &ion, &drive, dt).unwrap();
    let fwhm = |points: &[itsim::transport::ScanPoint]| {
        let max = points.iter().map(|p| p.gain_quanta).fold(0.0f64, f64::max);
        let above: Vec<f64> = points
            .iter()
            .filter(|p| p.gain_quanta >= max / 2.0)
            .map(|p| p.rate)
            .collect();
        above.iter().cloned().fold(f64::MIN, f64::max)
            - above.iter().cloned().fold(f64::MAX, f64::min)
    };
    let w1 = fwhm(&series[0]);
    let w4 = fwhm(&series[1]);
    assert!(
        w4 < w1,
        "stretched FWHM {:.2} kHz not below base {:.2} kHz",
        w4 / 1e3,
        w1 / 1e3
    );
    pass(
        8,
        &format!(
            "maxima at 3.6 MHz/k for k in {found:?}; k=10 FWHM {:.2} kHz -> {:.2} kHz at 4x stretch",
            w1 / 1e3,
            w4 / 1e3
        ),
    );
}

#[test]
fn criterion_09_thermometry_roundtrip() {
    let eta = 0.24;
    let om0 = TAU * 250.0e3;
    let w0 = fock_rabi_rate(0, Transition::BlueSideband, eta, om0).unwrap();
    let synth = |nbar: f64| {
        let d = make_distribution(
            StateKind::Thermal,
            nbar,
            suggested_n_max(StateKind::Thermal, nbar),
        )
        .unwrap();
        let times: Vec<f64> = (0..160).map(|i| 8.0 * TAU / w0 * i as f64 / 160.0).collect();
        let c = flopping_curve(&d, &times, Transition::BlueSideband, eta, om0).unwrap();
        times.into_iter().zip(c.populations).collect::<Vec<_>>()
    };
    let mut fitted = Vec::new();
    for nbar in [1.0, 5.0, 20.0] {
        let samples = synth(nbar);
        let fit = fit_nbar(&samples, StateKind::Thermal, Transition::BlueSideband, eta, om0)
            .unwrap();
        assert!(
            (fit.nbar - nbar).abs() <= 0.05 * nbar,
            "nbar {nbar}: fitted {:.3}",
            fit.nbar
        );
        fitted.push(format!("{nbar} -> {:.3}", fit.nbar));
    }
    // Mismatched assumptions give different estimates on the same data.
    let samples = synth(5.0);
    let th = fit_nbar(&samples, StateKind::Thermal, Transition::BlueSideband, eta, om0).unwrap();
    let coh = fit_nbar(&samples, StateKind::Coherent, Transition::BlueSideband, eta, om0).unwrap();
    let arb = fit_nbar(&samples, StateKind::Arbitrary, Transition::BlueSideband, eta, om0).unwrap();
    assert!((th.nbar - coh.nbar).abs() > 1e-3, "thermal and coherent estimates coincide");
    assert!(th.residual_rms < coh.residual_rms);
    pass(
        9,
        &format!(
            "roundtrips [{}]; assumptions on nbar=5 data: thermal {:.3}, coherent {:.3}, arbitrary {:.3}",
            fitted.join(", "),
            th.nbar,
            coh.nbar,
            arb.nbar
        ),
    );
}

#[test]
fn criterion_10_spin_echo() {
    let wf = design_waveform(
        PathLabel::Ece,
        100.0e-6,
        Sampling::Continuous,
        FreqProfile::default_bump(),
    )
    .unwrap();
    let profile = FieldShiftProfile::default();

    let both = run_sequence(&SequenceSpec::default(), &wf, &profile, 64).unwrap();
    assert!(both.net_phase.abs() < 1e-3, "echo residual {:.2e} rad", both.net_phase);

    let single_spec = SequenceSpec {
        transports: TransportPlacement::SecondHalf,
        ..Default::default()
    };
    let single = run_sequence(&single_spec, &wf, &profile, 64).unwrap();
    let integral = waveform_phase(&wf, &profile).unwrap();
    let rel = (single.net_phase - integral).abs() / integral.abs();
    assert!(rel < 0.01, "single-transport phase off by {rel:.2e}");

    let none_spec = SequenceSpec {
        transports: TransportPlacement::None,
        ..Default::default()
    };
    let fringe = run_sequence(&none_spec, &wf, &profile, 64).unwrap();
    let samples: Vec<(f64, f64)> = fringe
        .phases
        .iter()
        .cloned()
        .zip(fringe.populations.iter().cloned())
        .collect();
    let fit = fit_contrast(&samples).unwrap();
    assert!((fit.contrast - 0.85).abs() < 1e-6, "contrast {:.8}", fit.contrast);
    pass(
        10,
        &format!(
            "echo residual {:.1e} rad; single-transport phase {:.4} rad matches integral to {:.1e}; contrast {:.6}",
            both.net_phase, single.net_phase, rel, fit.contrast
        ),
    );
}

#[test]
fn criterion_11_deterministic_manifests() {
    let bin = env!("CARGO_BIN_EXE_itsim");
    let dir = tempdir("itsim_acceptance_determinism");
    let run = |tag: &str| {
        let out = dir.join(format!("{tag}.manifest.json"));
        let status = std::process::Command::new(bin)
            .args(["--seed", "2024", "validate", "--out"])
            .arg(&out)
            .status()
            .expect("validate runs");
        assert!(status.success(), "validate exited with {status}");
        let text = std::fs::read_to_string(&out).unwrap();
        itsim::manifest::strip_wall_time(&text)
    };
    let a = run("first");
    let b = run("second");
    assert_eq!(a, b, "manifests differ between identical runs");
    // Sanity: the stripped text still carries the check results.
    assert!(a.contains("\"overall\": \"pass\""));
    let cfg_hash = {
        let cfg = SimConfig::from_str("master_seed = 2024\n").unwrap();
        itsim::manifest::RunManifest::new("validate", &cfg).config_sha256
    };
    assert!(a.contains(&cfg_hash), "manifest does not embed the default config hash");
    pass(11, "two seeded validate runs produced byte-identical manifests (wall time excluded)");
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(tag);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
