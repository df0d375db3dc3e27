//! RF-sideband noise: the noise force in a pseudopotential gradient, the
//! resulting heating rate, the heating-vs-position map, and synthesis of
//! band-limited Gaussian force noise for time-domain (Langevin) runs.
//!
//! Conventions: one-sided PSDs everywhere, and the Turchette denominator
//! `4 m hbar omega_z` for the force-noise heating rate. Voltage noise at
//! `Omega_RF + omega_z` is never simulated at the drive frequency; instead
//! force noise with the equivalent PSD is synthesized directly in the
//! secular-frequency band, which is what the downconversion produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::{IonSpecies, RFDrive, HBAR};
use crate::error::{Error, Result};
use crate::potential::AxialFieldModel;

/// RF-drive voltage-noise description near the sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// One-sided fractional PSD `S_V / V0^2`, 1/Hz.
    pub fractional_psd: f64,
    /// Band center offset from Omega_RF, rad/s. This is the secular-frame
    /// center frequency of the synthesized force noise.
    pub band_center_offset: f64,
    /// Flat band width, Hz. Defaults to the 150 kHz injected-noise test band.
    pub bandwidth: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn new(
        fractional_psd: f64,
        band_center_offset: f64,
        bandwidth: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if !(fractional_psd >= 0.0) {
            return Err(Error::Domain(format!(
                "fractional PSD must be >= 0, got {fractional_psd}"
            )));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::Domain(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            fractional_psd,
            band_center_offset,
            bandwidth,
            rng_seed,
        })
    }

    /// Enforces |omega| << Omega_RF, as the sideband model assumes.
    pub fn check_against_drive(&self, drive: &RFDrive) -> Result<()> {
        if self.band_center_offset.abs() >= drive.drive_angular_freq / 10.0 {
            return Err(Error::Domain(format!(
                "band center offset {:.3e} rad/s is not small against Omega_RF {:.3e} rad/s",
                self.band_center_offset, drive.drive_angular_freq
            )));
        }
        Ok(())
    }
}

/// Peak amplitude (with sign) of the noise force at relative noise amplitude
/// `xi_n`: `-(q^2 / (2 m Omega_RF^2)) dE0^2/ds * xi_n`, in N. The `cos(wt)`
/// envelope is factored out.
pub fn noise_force_amplitude(
    s: f64,
    xi_n: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<f64> {
    if !(xi_n >= 0.0) {
        return Err(Error::Domain(format!("xi_n must be >= 0, got {xi_n}")));
    }
    let de0sq = model.field_sq_gradient(s, ion, drive)?;
    let om = drive.drive_angular_freq;
    Ok(-(ion.charge * ion.charge) / (2.0 * ion.mass * om * om) * de0sq * xi_n)
}

/// Force-noise prefactor at position `s`: the force per unit relative noise
/// amplitude, `-(q^2 / (2 m Omega_RF^2)) dE0^2/ds`. Equal to `-2 dPhi_p/ds`.
pub fn force_prefactor(
    s: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<f64> {
    noise_force_amplitude(s, 1.0, model, ion, drive)
}

/// Heating rate for voltage noise around `Omega_RF + omega_z`, evaluated
/// from an explicit field-squared gradient:
///
/// `ndot = q^4 / (16 m^3 Omega_RF^4 hbar omega_z) * (dE0^2/ds)^2 * S_V/V0^2`
///
/// in quanta per second.
pub fn heating_rate_from_gradient(
    de0sq_ds: f64,
    fractional_psd: f64,
    omega_z: f64,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<f64> {
    if !(omega_z > 0.0) {
        return Err(Error::Domain(format!(
            "secular frequency must be positive, got {omega_z}"
        )));
    }
    let q = ion.charge;
    let m = ion.mass;
    let om = drive.drive_angular_freq;
    let q4 = q * q * q * q;
    let m3 = m * m * m;
    let om4 = om * om * om * om;
    Ok(q4 / (16.0 * m3 * om4 * HBAR * omega_z) * de0sq_ds * de0sq_ds * fractional_psd)
}

/// Heating rate at path position `s` for the given noise spec, in quanta/s.
pub fn heating_rate(
    s: f64,
    noise: &NoiseSpec,
    omega_z: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<f64> {
    let de0sq = model.field_sq_gradient(s, ion, drive)?;
    heating_rate_from_gradient(de0sq, noise.fractional_psd, omega_z, ion, drive)
}

/// One row of the heating map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingMapPoint {
    /// Path position, m.
    pub s: f64,
    /// `ndot / S_V`, quanta per second per V^2/Hz, times the calibration
    /// scale.
    pub ratio: f64,
    /// Pseudopotential at `s`, J.
    pub phi_p: f64,
}

/// Ratio of heating rate to absolute voltage noise PSD along a position
/// grid. `scale` is the calibration knob; 1.0 is the bare prediction, 1.4
/// reproduces the published fitted curve.
pub fn heating_map(
    s_grid: &[f64],
    noise: &NoiseSpec,
    omega_of_s: impl Fn(f64) -> f64,
    scale: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<Vec<HeatingMapPoint>> {
    if s_grid.is_empty() {
        return Err(Error::Domain("heating map grid is empty".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    // ndot / S_V = ndot / (S_frac V0^2); independent of the injected level.
    let psd = if noise.fractional_psd > 0.0 {
        noise.fractional_psd
    } else {
        1.0
    };
    let v0sq = drive.peak_voltage * drive.peak_voltage;
    s_grid
        .iter()
        .map(|&s| {
            let rate = heating_rate(s, &NoiseSpec { fractional_psd: psd, ..*noise }, omega_of_s(s), model, ion, drive)?;
            Ok(HeatingMapPoint {
                s,
                ratio: scale * rate / (psd * v0sq),
                phi_p: model.pseudopotential(s)?,
            })
        })
        .collect()
}

/// Band-limited Gaussian force-noise time series.
#[derive(Debug, Clone)]
pub struct ForceNoiseSeries {
    pub sample_period: f64,
    /// Force samples, N.
    pub samples: Vec<f64>,
    /// In-band PSD realized by the drawn spectrum, in the same units as the
    /// target (fractional or N^2/Hz depending on scaling).
    pub realized_psd: f64,
}

/// Synthesizes the dimensionless noise process `u(t)`: band-limited Gaussian
/// noise whose one-sided PSD equals `spec.fractional_psd` over
/// `[f_c - B/2, f_c + B/2]` and zero elsewhere. Reproducible for a fixed
/// seed.
///
/// Returns `(samples, realized_psd)` with `n_samples` entries.
pub fn sample_fractional_noise(
    duration: f64,
    sample_period: f64,
    spec: &NoiseSpec,
) -> Result<(Vec<f64>, f64)> {
    if !(duration > 0.0) {
        return Err(Error::Domain(format!("duration must be positive, got {duration}")));
    }
    if !(sample_period > 0.0) {
        return Err(Error::Sampling(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    let f_center = spec.band_center_offset.abs() / std::f64::consts::TAU;
    let f_hi = f_center + spec.bandwidth / 2.0;
    let f_lo = f_center - spec.bandwidth / 2.0;
    if f_lo <= 0.0 {
        return Err(Error::Sampling(format!(
            "band lower edge {f_lo} Hz must be positive"
        )));
    }
    if sample_period > 1.0 / (20.0 * f_hi) {
        return Err(Error::Sampling(format!(
            "sample period {sample_period} s too coarse for band upper edge {f_hi} Hz \
             (need <= {:.3e} s)",
            1.0 / (20.0 * f_hi)
        )));
    }
    let n_samples = (duration / sample_period).ceil() as usize + 1;
    if spec.fractional_psd == 0.0 {
        return Ok((vec![0.0; n_samples], 0.0));
    }
    let n_fft = n_samples.next_power_of_two().max(64);
    let fs = 1.0 / sample_period;
    let df = fs / n_fft as f64;

    let k_lo = (f_lo / df).ceil() as usize;
    let k_hi = ((f_hi / df).floor() as usize).min(n_fft / 2 - 1);
    if k_hi < k_lo {
        return Err(Error::Sampling(format!(
            "frequency grid (df = {df} Hz) cannot resolve the {b} Hz band",
            b = spec.bandwidth
        )));
    }

    // Hermitian spectrum with complex Gaussian coefficients in the band:
    // E|X_k|^2 = S * fs * N / 2 makes the one-sided periodogram equal S.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let amp = (spec.fractional_psd * fs * n_fft as f64 / 4.0).sqrt();
    let mut spectrum = vec![Complex::new(0.0, 0.0); n_fft];
    let mut band_power = 0.0;
    for k in k_lo..=k_hi {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let x = Complex::new(amp * a, amp * b);
        band_power += x.norm_sqr();
        spectrum[k] = x;
        spectrum[n_fft - k] = x.conj();
    }
    let realized = 2.0 * band_power / (fs * n_fft as f64) / (k_hi - k_lo + 1) as f64;

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n_fft);
    ifft.process(&mut spectrum);
    let scale = 1.0 / n_fft as f64;
    let samples = spectrum[..n_samples].iter().map(|c| c.re * scale).collect();
    Ok((samples, realized))
}

/// Force noise at a fixed position: the fractional process scaled by the
/// local force prefactor, so the one-sided in-band force PSD is
/// `prefactor^2 * S_V/V0^2`.
pub fn sample_force_noise(
    duration: f64,
    sample_period: f64,
    spec: &NoiseSpec,
    s: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
    drive: &RFDrive,
) -> Result<ForceNoiseSeries> {
    let prefactor = force_prefactor(s, model, ion, drive)?;
    let (u, realized) = sample_fractional_noise(duration, sample_period, spec)?;
    Ok(ForceNoiseSeries {
        sample_period,
        samples: u.into_iter().map(|x| prefactor * x).collect(),
        realized_psd: prefactor * prefactor * realized,
    })
}
