//! Ramsey and spin-echo interferometry with transport inserted into the
//! free-precession windows.
//!
//! The qubit transition frequency varies along the trap axis through a
//! position-dependent B-field shift. Transporting the ion during one
//! free-precession half accumulates a net phase; transporting identically in
//! both halves of a spin-echo sequence cancels it. Pulses are ideal
//! rotations; their configured durations only consume timeline.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::potential::ZONE_SPAN;
use crate::transport::TransportWaveform;

/// Position-dependent fractional B-field profile and the qubit's response
/// to it.
///
/// The fractional shift is linear in |s|: zero at the outer zones and
/// `center_fraction` at the junction center. The detuning it produces is
/// `2 pi * sensitivity * base_field * fraction(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldShiftProfile {
    /// Fractional field deviation at s = 0 relative to the outer zones.
    pub center_fraction: f64,
    /// Qubit frequency sensitivity d(nu)/dB in Hz/T.
    ///
    /// The default of 1e10 Hz/T is a placeholder of a plausible magnitude,
    /// not a measured atomic constant; set it from a calibration before
    /// interpreting absolute phases.
    pub sensitivity_hz_per_tesla: f64,
    /// Quantization field in tesla.
    pub base_field: f64,
    /// Half-width of the valid axial range in meters.
    pub extent: f64,
}

impl Default for FieldShiftProfile {
    fn default() -> Self {
        Self {
            center_fraction: 0.004,
            sensitivity_hz_per_tesla: 1.0e10,
            base_field: 1.44e-3,
            extent: ZONE_SPAN,
        }
    }
}

impl FieldShiftProfile {
    /// Fractional field deviation at axial position `s`.
    pub fn fraction_at(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s.abs() > self.extent * (1.0 + 1e-12) {
            return Err(Error::OutsideExtent {
                position: s,
                min: -self.extent,
                max: self.extent,
            });
        }
        Ok(self.center_fraction * (1.0 - s.abs() / self.extent))
    }

    /// Detuning in rad/s at axial position `s`.
    pub fn detuning_at(&self, s: f64) -> Result<f64> {
        Ok(TAU * self.sensitivity_hz_per_tesla * self.base_field * self.fraction_at(s)?)
    }
}

/// Integrates `detuning(position(t))` over `[0, duration]` by composite
/// Simpson quadrature, doubling the grid until successive estimates agree
/// to 1e-6 relative.
pub fn accumulated_phase<F>(position: F, duration: f64, profile: &FieldShiftProfile) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(duration >= 0.0) {
        return Err(Error::Domain(format!("duration must be >= 0, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(0.0);
    }
    let integrand = |t: f64| profile.detuning_at(position(t));
    let mut n = 16usize;
    let mut prev = simpson(&integrand, duration, n)?;
    loop {
        n *= 2;
        let cur = simpson(&integrand, duration, n)?;
        let scale = cur.abs().max(1e-30);
        if (cur - prev).abs() <= 1e-6 * scale || n >= 1 << 22 {
            return Ok(cur);
        }
        prev = cur;
    }
}

fn simpson<F>(f: &F, duration: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = duration / n as f64;
    let mut total = f(0.0)? + f(duration)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * f(i as f64 * h)?;
    }
    Ok(total * h / 3.0)
}

/// Phase accumulated over a transport waveform's ideal well path.
pub fn waveform_phase(wf: &TransportWaveform, profile: &FieldShiftProfile) -> Result<f64> {
    let position = |t: f64| {
        wf.smooth_at(t.clamp(0.0, wf.duration))
            .expect("clamped time is in range")
            .0
    };
    accumulated_phase(position, wf.duration, profile)
}

/// Where transport is inserted in the Ramsey sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportPlacement {
    None,
    SecondHalf,
    BothHalves,
}

impl TransportPlacement {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" | "0" => Some(TransportPlacement::None),
            "second-half" | "1" => Some(TransportPlacement::SecondHalf),
            "both-halves" | "2" => Some(TransportPlacement::BothHalves),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TransportPlacement::None => "none",
            TransportPlacement::SecondHalf => "second-half",
            TransportPlacement::BothHalves => "both-halves",
        }
    }

    pub fn transport_count(&self) -> usize {
        match self {
            TransportPlacement::None => 0,
            TransportPlacement::SecondHalf => 1,
            TransportPlacement::BothHalves => 2,
        }
    }
}

/// Pulse timing and contrast parameters for one Ramsey/spin-echo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    /// First free-precession window in seconds.
    pub t1: f64,
    /// Second free-precession window in seconds.
    pub t2: f64,
    /// Insert a pi-pulse between the windows, flipping the sign of the
    /// phase accumulated in the first half.
    pub echo_enabled: bool,
    pub transports: TransportPlacement,
    /// Ideal-rotation pulse duration; consumes timeline only.
    pub pulse_duration: f64,
    /// Multiplicative fringe contrast in [0, 1].
    pub contrast_floor: f64,
}

impl Default for SequenceSpec {
    fn default() -> Self {
        Self {
            t1: 280.0e-6,
            t2: 280.0e-6,
            echo_enabled: true,
            transports: TransportPlacement::BothHalves,
            pulse_duration: 1.0e-6,
            contrast_floor: 0.85,
        }
    }
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(Error::Domain(format!(
                "free-precession windows must be positive, got T1 = {}, T2 = {}",
                self.t1, self.t2
            )));
        }
        if !(self.pulse_duration >= 0.0) {
            return Err(Error::Domain("pulse duration must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.contrast_floor) {
            return Err(Error::Domain(format!(
                "contrast floor must be in [0, 1], got {}",
                self.contrast_floor
            )));
        }
        Ok(())
    }
}

/// Computed fringe: population versus final-pulse phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeCurve {
    pub phases: Vec<f64>,
    pub populations: Vec<f64>,
    /// Net precession phase entering the fringe.
    pub net_phase: f64,
    pub contrast: f64,
    /// Phase accumulated during each free-precession half.
    pub half_phases: (f64, f64),
}

/// Runs the sequence and returns the fringe `P(phi) = (1 - C cos(phi -
/// Phi_net)) / 2` over `n_phase` points spanning exactly one full turn.
///
/// The net phase is `phi2 - phi1` with echo enabled, `phi1 + phi2`
/// otherwise, where each half's phase is the transport integral (the ion
/// sits at the zero-shift zone endpoint for the rest of the window).
pub fn run_sequence(
    spec: &SequenceSpec,
    waveform: &TransportWaveform,
    profile: &FieldShiftProfile,
    n_phase: usize,
) -> Result<FringeCurve> {
    spec.validate()?;
    if n_phase < 8 {
        return Err(Error::Domain(format!(
            "need at least 8 phase points, got {n_phase}"
        )));
    }
    let needs_transport = spec.transports.transport_count() > 0;
    if needs_transport {
        let window = match spec.transports {
            TransportPlacement::SecondHalf => spec.t2,
            _ => spec.t1.min(spec.t2),
        };
        if waveform.duration > window {
            return Err(Error::Domain(format!(
                "transport duration {:.3e} s exceeds the free-precession window {window:.3e} s",
                waveform.duration
            )));
        }
    }
    let transport_phase = if needs_transport {
        waveform_phase(waveform, profile)?
    } else {
        0.0
    };
    let (phi1, phi2) = match spec.transports {
        TransportPlacement::None => (0.0, 0.0),
        TransportPlacement::SecondHalf => (0.0, transport_phase),
        TransportPlacement::BothHalves => (transport_phase, transport_phase),
    };
    let net_phase = if spec.echo_enabled { phi2 - phi1 } else { phi1 + phi2 };
    let phases: Vec<f64> = (0..n_phase)
        .map(|i| TAU * i as f64 / (n_phase - 1) as f64)
        .collect();
    let populations = phases
        .iter()
        .map(|&phi| 0.5 * (1.0 - spec.contrast_floor * (phi - net_phase).cos()))
        .collect();
    Ok(FringeCurve {
        phases,
        populations,
        net_phase,
        contrast: spec.contrast_floor,
        half_phases: (phi1, phi2),
    })
}

/// Sinusoid fit of a fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastFit {
    pub contrast: f64,
    /// Phase offset in [0, 2 pi); meaningless when `phase_defined` is
    /// false.
    pub phase_offset: f64,
    pub phase_defined: bool,
    pub residual_rms: f64,
}

/// Least-squares fit of `P(phi) = a + A cos(phi) + B sin(phi)` to fringe
/// samples; contrast is `2 sqrt(A^2 + B^2)` and the offset is the phase of
/// the fringe minimum's complement, matching [`run_sequence`]'s convention.
pub fn fit_contrast(samples: &[(f64, f64)]) -> Result<ContrastFit> {
    if samples.len() < 8 {
        return Err(Error::Domain(format!(
            "need at least 8 fringe samples, got {}",
            samples.len()
        )));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < TAU * (1.0 - 1e-9) {
        return Err(Error::Domain(format!(
            "fringe samples must span at least 2 pi, got {:.3}",
            hi - lo
        )));
    }
    // Normal equations for the basis [1, cos, sin].
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(phi, p) in samples {
        let row = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * p;
        }
    }
    let coef = solve3(m, rhs).ok_or_else(|| {
        Error::FitFailure("singular normal equations in fringe fit".into())
    })?;
    let (a, b) = (coef[1], coef[2]);
    let contrast = 2.0 * (a * a + b * b).sqrt();
    let phase_defined = contrast > 1e-9;
    let phase_offset = if phase_defined {
        (-b).atan2(-a).rem_euclid(TAU)
    } else {
        0.0
    };
    let sse: f64 = samples
        .iter()
        .map(|&(phi, p)| {
            let model = coef[0] + a * phi.cos() + b * phi.sin();
            (p - model) * (p - model)
        })
        .sum();
    Ok(ContrastFit {
        contrast: contrast.min(1.0),
        phase_offset,
        phase_defined,
        residual_rms: (sse / samples.len() as f64).sqrt(),
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    Some([b[0] / m[0][0], b[1] / m[1][1], b[2] / m[2][2]])
}
