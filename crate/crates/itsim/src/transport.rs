//! Moving-well transport: waveform design, zero-order-hold DAC sampling,
//! classical motion integration with optional injected noise, energy-gain
//! extraction, and DAC update-rate resonance scans.
//!
//! Classical point-particle dynamics stand in for the quantum motional
//! state; gain in quanta is classical secular energy over `hbar omega`.

use serde::{Deserialize, Serialize};

use crate::constants::{IonSpecies, RFDrive, HBAR};
use crate::error::{Error, Result};
use crate::noise::{sample_fractional_noise, NoiseSpec};
use crate::potential::{solve_control, total_gradient, AxialFieldModel, ControlSolution, ZONE_SPAN};
use crate::task_seed;

/// Zone E on the path coordinate, m.
pub const ZONE_E: f64 = -ZONE_SPAN;
/// Junction center C.
pub const ZONE_C: f64 = 0.0;
/// Zones H and V map onto the far end of the same leg profile; all legs are
/// equivalent by symmetry.
pub const ZONE_FAR: f64 = ZONE_SPAN;

/// Named transport paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathLabel {
    /// E-C-E: to the junction center and back.
    Ece,
    /// E-C-H-C-E: through the junction horizontally and back.
    Echce,
    /// E-C-V-C-E: through the junction vertically and back. Identical leg
    /// profile to E-C-H-C-E.
    Ecvce,
    /// One custom segment between two path positions (m).
    Custom { from: f64, to: f64 },
}

impl PathLabel {
    pub fn parse(s: &str) -> Option<PathLabel> {
        match s {
            "ece" => Some(PathLabel::Ece),
            "echce" => Some(PathLabel::Echce),
            "ecvce" => Some(PathLabel::Ecvce),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            PathLabel::Ece => "ece".into(),
            PathLabel::Echce => "echce".into(),
            PathLabel::Ecvce => "ecvce".into(),
            PathLabel::Custom { from, to } => {
                format!("custom({:.1}um->{:.1}um)", from * 1e6, to * 1e6)
            }
        }
    }

    fn waypoints(&self) -> Vec<f64> {
        match self {
            PathLabel::Ece => vec![ZONE_E, ZONE_C, ZONE_E],
            PathLabel::Echce | PathLabel::Ecvce => {
                vec![ZONE_E, ZONE_C, ZONE_FAR, ZONE_C, ZONE_E]
            }
            PathLabel::Custom { from, to } => vec![*from, *to],
        }
    }
}

/// Axial frequency as a function of well position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FreqProfile {
    /// Constant omega_z, rad/s.
    Fixed(f64),
    /// Gaussian bump pinned at `omega_zone` at the zones and `omega_center`
    /// at C: `omega(z) = omega_zone + (omega_center - omega_zone)
    /// exp(-z^2 / (2 sigma^2))`.
    Bump {
        omega_zone: f64,
        omega_center: f64,
        sigma: f64,
    },
}

impl FreqProfile {
    /// Default schedule: 3.6 MHz at the zones rising to 5.7 MHz at C,
    /// bump width 60 um.
    pub fn default_bump() -> Self {
        FreqProfile::Bump {
            omega_zone: std::f64::consts::TAU * 3.6e6,
            omega_center: std::f64::consts::TAU * 5.7e6,
            sigma: 60.0e-6,
        }
    }

    pub fn omega_at(&self, z: f64) -> f64 {
        match *self {
            FreqProfile::Fixed(w) => w,
            FreqProfile::Bump {
                omega_zone,
                omega_center,
                sigma,
            } => omega_zone + (omega_center - omega_zone) * (-z * z / (2.0 * sigma * sigma)).exp(),
        }
    }

    pub fn omega_max(&self) -> f64 {
        match *self {
            FreqProfile::Fixed(w) => w,
            FreqProfile::Bump {
                omega_zone,
                omega_center,
                ..
            } => omega_zone.max(omega_center),
        }
    }

    pub fn omega_min(&self) -> f64 {
        match *self {
            FreqProfile::Fixed(w) => w,
            FreqProfile::Bump {
                omega_zone,
                omega_center,
                ..
            } => omega_zone.min(omega_center),
        }
    }
}

/// DAC output mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// Ideal smooth waveform (infinite update rate).
    Continuous,
    /// Piecewise-constant hold at the given update rate, Hz.
    ZeroOrderHold(f64),
}

/// One minimum-jerk segment of the well-center schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub z_from: f64,
    pub z_to: f64,
}

impl Segment {
    fn z_at(&self, t: f64) -> f64 {
        let tau = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        let tau2 = tau * tau;
        let tau3 = tau2 * tau;
        // minimum-jerk profile: 10 t^3 - 15 t^4 + 6 t^5
        let s = 10.0 * tau3 - 15.0 * tau3 * tau + 6.0 * tau3 * tau2;
        self.z_from + (self.z_to - self.z_from) * s
    }
}

/// Time schedule of well center and axial frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportWaveform {
    pub duration: f64,
    pub sampling: Sampling,
    pub segments: Vec<Segment>,
    pub freq: FreqProfile,
    pub path: PathLabel,
}

impl TransportWaveform {
    /// Builds a waveform from explicit segments. Segments must start at
    /// t = 0, be contiguous in time, and strictly increasing; the well
    /// center may jump between segments (useful for sudden-displacement
    /// checks).
    pub fn from_segments(
        segments: Vec<Segment>,
        freq: FreqProfile,
        sampling: Sampling,
        path: PathLabel,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Domain("waveform needs at least one segment".into()));
        }
        if segments[0].t0 != 0.0 {
            return Err(Error::Domain("first segment must start at t = 0".into()));
        }
        let mut t_prev = 0.0;
        for seg in &segments {
            if seg.t0 != t_prev || !(seg.t1 > seg.t0) {
                return Err(Error::Domain(
                    "segments must be contiguous and time-sorted".into(),
                ));
            }
            t_prev = seg.t1;
        }
        if let Sampling::ZeroOrderHold(rate) = sampling {
            if !(rate > 0.0) {
                return Err(Error::Domain(format!(
                    "DAC update rate must be positive, got {rate}"
                )));
            }
        }
        Ok(Self {
            duration: t_prev,
            sampling,
            segments,
            freq,
            path,
        })
    }

    /// Stationary well at `z0` for `duration`.
    pub fn static_well(z0: f64, omega: f64, duration: f64, sampling: Sampling) -> Result<Self> {
        Self::from_segments(
            vec![Segment {
                t0: 0.0,
                t1: duration,
                z_from: z0,
                z_to: z0,
            }],
            FreqProfile::Fixed(omega),
            sampling,
            PathLabel::Custom { from: z0, to: z0 },
        )
    }

    /// Smooth (pre-DAC) well center and frequency at `t`.
    pub fn smooth_at(&self, t: f64) -> Result<(f64, f64)> {
        if t < 0.0 || t > self.duration || !t.is_finite() {
            return Err(Error::Domain(format!(
                "time {t} s outside waveform duration {} s",
                self.duration
            )));
        }
        let seg = self
            .segments
            .iter()
            .find(|seg| t >= seg.t0 && t <= seg.t1)
            .expect("contiguous segments cover the duration");
        let z = seg.z_at(t);
        Ok((z, self.freq.omega_at(z)))
    }

    /// Well target as produced by the DAC: held at the last update tick in
    /// zero-order-hold mode, smooth otherwise.
    pub fn sample_at(&self, t: f64) -> Result<(f64, f64)> {
        match self.sampling {
            Sampling::Continuous => self.smooth_at(t),
            Sampling::ZeroOrderHold(rate) => {
                if t < 0.0 || t > self.duration {
                    return Err(Error::Domain(format!(
                        "time {t} s outside waveform duration {} s",
                        self.duration
                    )));
                }
                let held = (t * rate).floor() / rate;
                self.smooth_at(held.min(self.duration))
            }
        }
    }

    fn tick_index(&self, t: f64) -> u64 {
        match self.sampling {
            Sampling::Continuous => u64::MAX, // forces per-step refresh
            Sampling::ZeroOrderHold(rate) => (t * rate).floor() as u64,
        }
    }

    /// Number of barrier-center crossings of the smooth schedule.
    pub fn barrier_passes(&self, model: &AxialFieldModel) -> usize {
        let n = 8192;
        let mut passes = 0;
        for &c in model.barrier_centers_m() {
            let mut prev = self.segments[0].z_from - c;
            for i in 1..=n {
                let t = self.duration * i as f64 / n as f64;
                let z = self.smooth_at(t).expect("in range").0 - c;
                if prev != 0.0 && z != 0.0 && prev.signum() != z.signum() {
                    passes += 1;
                }
                prev = z;
            }
        }
        passes
    }
}

/// Designs a named-path waveform: minimum-jerk well motion per segment with
/// the duration split evenly across segments, and the axial frequency
/// following `freq` as a function of well position.
pub fn design_waveform(
    path: PathLabel,
    duration: f64,
    sampling: Sampling,
    freq: FreqProfile,
) -> Result<TransportWaveform> {
    if !(duration > 0.0) {
        return Err(Error::Domain(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let waypoints = path.waypoints();
    let n_seg = waypoints.len() - 1;
    let seg_t = duration / n_seg as f64;
    let segments = (0..n_seg)
        .map(|i| Segment {
            t0: i as f64 * seg_t,
            t1: (i + 1) as f64 * seg_t,
            z_from: waypoints[i],
            z_to: waypoints[i + 1],
        })
        .collect();
    TransportWaveform::from_segments(segments, freq, sampling, path)
}

/// Integrated motion of the ion in the moving well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionalTrajectory {
    /// Decimated sample times, s.
    pub times: Vec<f64>,
    /// Positions at the sample times, m.
    pub positions: Vec<f64>,
    /// Velocities, m/s.
    pub velocities: Vec<f64>,
    /// Instantaneous secular energy in the current well frame, J.
    pub energies: Vec<f64>,
    /// Secular energy in the final well frame, J.
    pub final_energy: f64,
    /// Axial frequency of the final well, rad/s.
    pub final_omega: f64,
    /// `final_energy / (hbar * final_omega)` plus any intrinsic background.
    pub gain_quanta: f64,
}

/// Integrates `m s'' = -d(Phi_total)/ds + F_N(t)` with velocity Verlet,
/// starting at rest at the initial well center.
///
/// The control coefficients are re-solved at every DAC update (every step in
/// continuous mode). Injected noise is the band-limited fractional process
/// scaled by the local pseudopotential gradient. `intrinsic_rate` adds a
/// constant background heating rate (quanta/s) to the reported gain; it is
/// bookkeeping, not a modeled mechanism.
pub fn integrate_motion(
    waveform: &TransportWaveform,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
    noise: Option<&NoiseSpec>,
    intrinsic_rate: Option<f64>,
    dt: f64,
) -> Result<MotionalTrajectory> {
    let (s0, _) = waveform.smooth_at(0.0)?;
    integrate_motion_from(waveform, model, ion, drive, noise, intrinsic_rate, dt, s0, 0.0)
}

/// Same as [`integrate_motion`] with explicit initial conditions.
#[allow(clippy::too_many_arguments)]
pub fn integrate_motion_from(
    waveform: &TransportWaveform,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
    noise: Option<&NoiseSpec>,
    intrinsic_rate: Option<f64>,
    dt: f64,
    s0: f64,
    v0: f64,
) -> Result<MotionalTrajectory> {
    let f_max = waveform.freq.omega_max() / std::f64::consts::TAU;
    if !(dt > 0.0) || dt > 1.0 / (50.0 * f_max) {
        return Err(Error::Domain(format!(
            "time step {dt} s too large for f_max = {f_max} Hz (need <= {:.3e} s)",
            1.0 / (50.0 * f_max)
        )));
    }
    let n_steps = (waveform.duration / dt).ceil() as usize;
    let dt = waveform.duration / n_steps as f64;

    let u = match noise {
        Some(spec) if spec.fractional_psd > 0.0 => {
            spec.check_against_drive(drive)?;
            Some(sample_fractional_noise(waveform.duration, dt, spec)?.0)
        }
        _ => None,
    };

    let m = ion.mass;
    let stride = (n_steps / 4096).max(1);
    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut positions = Vec::with_capacity(n_steps / stride + 2);
    let mut velocities = Vec::with_capacity(n_steps / stride + 2);
    let mut energies = Vec::with_capacity(n_steps / stride + 2);

    let mut tick = waveform.tick_index(0.0);
    let (z0, om) = waveform.sample_at(0.0)?;
    let mut ctrl: ControlSolution = solve_control(z0, om, model, ion)?;
    let mut s = s0;
    let mut v = v0;

    let force = |s: f64, ctrl: &ControlSolution, u_k: f64| -> Result<f64> {
        let grad = total_gradient(s, ctrl, model)?;
        // noise force: -(q^2/(2 m Omega^2)) dE0^2/ds * u = -2 dPhi_p/ds * u
        let f_n = -2.0 * model.pseudo_gradient(s)? * u_k;
        Ok(-grad + f_n)
    };

    let u_at = |k: usize| u.as_ref().map_or(0.0, |u| u[k.min(u.len() - 1)]);

    let record = |times: &mut Vec<f64>,
                  positions: &mut Vec<f64>,
                  velocities: &mut Vec<f64>,
                  energies: &mut Vec<f64>,
                  t: f64,
                  s: f64,
                  v: f64,
                  ctrl: &ControlSolution| {
        let d = s - ctrl.well_center;
        let w = ctrl.target_freq;
        times.push(t);
        positions.push(s);
        velocities.push(v);
        energies.push(0.5 * m * v * v + 0.5 * m * w * w * d * d);
    };

    let mut a = force(s, &ctrl, u_at(0))? / m;
    record(&mut times, &mut positions, &mut velocities, &mut energies, 0.0, s, v, &ctrl);

    for k in 0..n_steps {
        let t_next = (k + 1) as f64 * dt;
        s += v * dt + 0.5 * a * dt * dt;
        let new_tick = waveform.tick_index(t_next.min(waveform.duration));
        if new_tick != tick || matches!(waveform.sampling, Sampling::Continuous) {
            tick = new_tick;
            let (z0, om) = waveform.sample_at(t_next.min(waveform.duration))?;
            if z0 != ctrl.well_center || om != ctrl.target_freq {
                ctrl = solve_control(z0, om, model, ion)?;
            }
        }
        let a_new = force(s, &ctrl, u_at(k + 1))? / m;
        v += 0.5 * (a + a_new) * dt;
        a = a_new;
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            record(
                &mut times,
                &mut positions,
                &mut velocities,
                &mut energies,
                t_next,
                s,
                v,
                &ctrl,
            );
        }
    }

    let (z_f, om_f) = waveform.smooth_at(waveform.duration)?;
    let d = s - z_f;
    let final_energy = 0.5 * m * v * v + 0.5 * m * om_f * om_f * d * d;
    let gain_quanta =
        final_energy / (HBAR * om_f) + intrinsic_rate.unwrap_or(0.0) * waveform.duration;
    Ok(MotionalTrajectory {
        times,
        positions,
        velocities,
        energies,
        final_energy,
        final_omega: om_f,
        gain_quanta,
    })
}

/// Final secular energy expressed in quanta of a reference well
/// (default 3.6 MHz).
pub fn energy_gain_quanta(traj: &MotionalTrajectory, reference_freq_hz: f64) -> f64 {
    traj.final_energy / (HBAR * std::f64::consts::TAU * reference_freq_hz)
}

/// Waveform family for DAC update-rate scans: a fixed-frequency minimum-jerk
/// transport far from the barriers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanFamily {
    pub z_from: f64,
    pub z_to: f64,
    pub base_duration: f64,
    pub omega: f64,
}

impl Default for ScanFamily {
    fn default() -> Self {
        Self {
            z_from: -750.0e-6,
            z_to: -450.0e-6,
            base_duration: 100.0e-6,
            omega: std::f64::consts::TAU * 3.6e6,
        }
    }
}

impl ScanFamily {
    pub fn waveform(&self, rate: Sampling, stretch: f64) -> Result<TransportWaveform> {
        design_waveform(
            PathLabel::Custom {
                from: self.z_from,
                to: self.z_to,
            },
            self.base_duration * stretch,
            rate,
            FreqProfile::Fixed(self.omega),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub rate: f64,
    pub gain_quanta: f64,
}

/// Noiseless energy gain versus DAC update rate, one series per stretch
/// factor. Gains are referenced to the family's fixed axial frequency.
pub fn dac_resonance_scan(
    rates: &[f64],
    family: &ScanFamily,
    stretch_factors: &[f64],
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
    dt: f64,
) -> Result<Vec<Vec<ScanPoint>>> {
    if rates.is_empty() {
        return Err(Error::Domain("empty DAC rate list".into()));
    }
    for &r in rates {
        if !(0.05e6..=5.0e6).contains(&r) {
            return Err(Error::Domain(format!(
                "DAC rate {r} Hz outside the supported 0.05-5 MHz scan range"
            )));
        }
    }
    let f_ref = family.omega / std::f64::consts::TAU;
    stretch_factors
        .iter()
        .map(|&stretch| {
            rates
                .iter()
                .map(|&rate| {
                    let wf = family.waveform(Sampling::ZeroOrderHold(rate), stretch)?;
                    let traj = integrate_motion(&wf, model, ion, drive, None, None, dt)?;
                    Ok(ScanPoint {
                        rate,
                        gain_quanta: energy_gain_quanta(&traj, f_ref),
                    })
                })
                .collect()
        })
        .collect()
}

/// Grid search (default 201 points) for the update rate minimizing the
/// noiseless transport gain. Ties break toward the lower rate.
pub fn optimize_update_rate(
    search_range: (f64, f64),
    n_points: usize,
    family: &ScanFamily,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
    dt: f64,
) -> Result<f64> {
    let (lo, hi) = search_range;
    if !(lo > 0.0) || hi < lo {
        return Err(Error::Domain(format!(
            "bad search range [{lo}, {hi}] Hz"
        )));
    }
    let rates: Vec<f64> = if hi == lo || n_points <= 1 {
        vec![lo]
    } else {
        (0..n_points)
            .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
            .collect()
    };
    let scan = dac_resonance_scan(&rates, family, &[1.0], model, ion, drive, dt)?;
    let mut best = scan[0][0];
    for p in &scan[0] {
        if p.gain_quanta < best.gain_quanta {
            best = *p;
        }
    }
    Ok(best.rate)
}

/// Monte-Carlo per-pass energy gain over the RF barriers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerPassGain {
    pub mean_quanta: f64,
    pub stderr_quanta: f64,
    pub passes: usize,
    pub seeds: usize,
}

/// Estimates the mean energy gain per barrier crossing for ambient RF noise
/// at `ambient_dbc`, averaged over `seeds` independent noise realizations
/// derived from `master_seed`.
#[allow(clippy::too_many_arguments)]
pub fn per_pass_gain_estimate(
    waveform: &TransportWaveform,
    ambient_dbc: f64,
    seeds: usize,
    master_seed: u64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
    dt: f64,
) -> Result<PerPassGain> {
    if seeds < 10 {
        return Err(Error::Domain(format!(
            "need at least 10 seeds for a per-pass estimate, got {seeds}"
        )));
    }
    let passes = waveform.barrier_passes(model);
    if passes == 0 {
        return Err(Error::Domain(
            "waveform does not cross any pseudopotential barrier".into(),
        ));
    }
    let psd = crate::constants::dbc_to_fractional_psd(ambient_dbc);
    // Force-noise band covering every secular frequency the path visits,
    // with the 150 kHz test band as margin.
    let f_lo = waveform.freq.omega_min() / std::f64::consts::TAU - 75.0e3;
    let f_hi = waveform.freq.omega_max() / std::f64::consts::TAU + 75.0e3;
    let center = std::f64::consts::TAU * 0.5 * (f_lo + f_hi);
    let bandwidth = f_hi - f_lo;

    let mut gains = Vec::with_capacity(seeds);
    for i in 0..seeds {
        let spec = NoiseSpec::new(psd, center, bandwidth, task_seed(master_seed, i as u64))?;
        let traj = integrate_motion(waveform, model, ion, drive, Some(&spec), None, dt)?;
        gains.push(traj.gain_quanta / passes as f64);
    }
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let var = gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(PerPassGain {
        mean_quanta: mean,
        stderr_quanta: (var / n).sqrt(),
        passes,
        seeds,
    })
}
