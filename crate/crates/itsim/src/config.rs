//! Flat key-value configuration: `section.key = value` lines, `#` comments,
//! defaults for every parameter, unknown keys rejected.
//!
//! Units are embedded in key names (`_hz`, `_ev`, `_um`, `_us`, `_t`).
//! Frequencies are ordinary frequencies in Hz; the simulator converts to
//! angular units internally.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coherence::{FieldShiftProfile, SequenceSpec, TransportPlacement};
use crate::constants::{dbc_to_fractional_psd, IonSpecies, RFDrive, ATOMIC_MASS, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::potential::AxialFieldModel;
use crate::thermometry::{StateKind, Transition};
use crate::transport::{FreqProfile, PathLabel, Sampling, TransportWaveform, design_waveform};

/// Ion parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonConfig {
    /// "be9", "mg24", or "custom" (then mass_u and charge_e apply).
    pub species: String,
    pub mass_u: f64,
    pub charge_e: f64,
}

impl Default for IonConfig {
    fn default() -> Self {
        Self {
            species: "be9".into(),
            mass_u: 9.012_183_1,
            charge_e: 1.0,
        }
    }
}

impl IonConfig {
    pub fn build(&self) -> Result<IonSpecies> {
        match self.species.as_str() {
            "be9" => Ok(IonSpecies::beryllium_9()),
            "mg24" => Ok(IonSpecies::magnesium_24()),
            "custom" => IonSpecies::new(
                self.mass_u * ATOMIC_MASS,
                self.charge_e * ELEMENTARY_CHARGE,
                "custom",
            ),
            other => Err(Error::Constraint {
                key: "ion.species".into(),
                message: format!("must be be9, mg24, or custom, got {other}"),
            }),
        }
    }
}

/// RF drive parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub v0_volts: f64,
    /// RF drive frequency Omega_RF / 2 pi in Hz.
    pub omega_rf_hz: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            v0_volts: 200.0,
            omega_rf_hz: 83.0e6,
        }
    }
}

impl DriveConfig {
    pub fn build(&self) -> Result<RFDrive> {
        RFDrive::new(self.v0_volts, TAU * self.omega_rf_hz).map_err(|e| Error::Constraint {
            key: "drive".into(),
            message: e.to_string(),
        })
    }
}

/// Axial field model parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldModelConfig {
    pub barrier_height_ev: f64,
    /// Barriers sit at +- this offset from the junction center.
    pub barrier_center_um: f64,
    pub sigma_um: f64,
    pub extent_um: f64,
    /// Keep only the barrier at + barrier_center_um.
    pub single_barrier: bool,
}

impl Default for FieldModelConfig {
    fn default() -> Self {
        Self {
            barrier_height_ev: 0.35,
            barrier_center_um: 130.0,
            sigma_um: 60.0,
            extent_um: 890.0,
            single_barrier: false,
        }
    }
}

impl FieldModelConfig {
    pub fn build(&self) -> Result<AxialFieldModel> {
        let centers = if self.single_barrier {
            vec![self.barrier_center_um]
        } else {
            vec![-self.barrier_center_um, self.barrier_center_um]
        };
        AxialFieldModel::new(
            self.barrier_height_ev,
            &centers,
            self.sigma_um,
            (-self.extent_um, self.extent_um),
        )
        .map_err(|e| Error::Constraint {
            key: "field-model.barrier_height_ev".into(),
            message: e.to_string(),
        })
    }
}

/// RF noise parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// One-sided sideband noise level in dBc; -inf disables injection.
    pub level_dbc: f64,
    pub bandwidth_hz: f64,
    /// Band center offset from the secular frequency, Hz. 0 centers the
    /// band on the frequency under study.
    pub center_offset_hz: f64,
    /// Constant background heating in quanta/s added to reported gains.
    pub intrinsic_quanta_per_s: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            level_dbc: -177.0,
            bandwidth_hz: 150.0e3,
            center_offset_hz: 0.0,
            intrinsic_quanta_per_s: 0.0,
        }
    }
}

impl NoiseConfig {
    /// Noise spec with the band centered on `secular_hz + center_offset_hz`.
    pub fn build(&self, secular_hz: f64, seed: u64) -> Result<NoiseSpec> {
        NoiseSpec::new(
            dbc_to_fractional_psd(self.level_dbc),
            TAU * (secular_hz + self.center_offset_hz),
            self.bandwidth_hz,
            seed,
        )
        .map_err(|e| Error::Constraint {
            key: "noise".into(),
            message: e.to_string(),
        })
    }
}

/// Transport waveform parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    /// "ece", "echce", or "ecvce".
    pub path: String,
    pub duration_us: f64,
    /// DAC update rate in Hz; 0 means continuous (no zero-order hold).
    pub dac_rate_hz: f64,
    /// Integrator step in seconds; 0 picks 1/(100 f_max).
    pub dt_s: f64,
    pub omega_zone_hz: f64,
    pub omega_center_hz: f64,
    pub freq_sigma_um: f64,
    pub seeds: u64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            path: "ece".into(),
            duration_us: 100.0,
            dac_rate_hz: 0.0,
            dt_s: 0.0,
            omega_zone_hz: 3.6e6,
            omega_center_hz: 5.7e6,
            freq_sigma_um: 60.0,
            seeds: 30,
        }
    }
}

impl WaveformConfig {
    pub fn freq_profile(&self) -> Result<FreqProfile> {
        if !(self.omega_zone_hz > 0.0 && self.omega_center_hz > 0.0 && self.freq_sigma_um > 0.0) {
            return Err(Error::Constraint {
                key: "waveform.omega_zone_hz".into(),
                message: "frequency profile parameters must be positive".into(),
            });
        }
        Ok(FreqProfile::Bump {
            omega_zone: TAU * self.omega_zone_hz,
            omega_center: TAU * self.omega_center_hz,
            sigma: self.freq_sigma_um * 1e-6,
        })
    }

    pub fn sampling(&self) -> Result<Sampling> {
        if self.dac_rate_hz == 0.0 {
            Ok(Sampling::Continuous)
        } else if self.dac_rate_hz > 0.0 {
            Ok(Sampling::ZeroOrderHold(self.dac_rate_hz))
        } else {
            Err(Error::Constraint {
                key: "waveform.dac_rate_hz".into(),
                message: format!("must be >= 0, got {}", self.dac_rate_hz),
            })
        }
    }

    pub fn build(&self) -> Result<TransportWaveform> {
        let path = PathLabel::parse(&self.path).ok_or_else(|| Error::Constraint {
            key: "waveform.path".into(),
            message: format!("must be ece, echce, or ecvce, got {}", self.path),
        })?;
        if !(self.duration_us > 0.0) {
            return Err(Error::Constraint {
                key: "waveform.duration_us".into(),
                message: format!("must be positive, got {}", self.duration_us),
            });
        }
        design_waveform(
            path,
            self.duration_us * 1e-6,
            self.sampling()?,
            self.freq_profile()?,
        )
    }

    /// Integrator step: configured value, or 1/(100 f_max) when zero.
    pub fn time_step(&self, freq: &FreqProfile) -> f64 {
        if self.dt_s > 0.0 {
            self.dt_s
        } else {
            1.0 / (100.0 * freq.omega_max() / TAU)
        }
    }
}

/// Thermometry parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermometryConfig {
    pub eta: f64,
    /// Base Rabi frequency Omega_0 / 2 pi in Hz.
    pub omega0_hz: f64,
    /// "carrier", "red", or "blue".
    pub transition: String,
    /// "thermal", "coherent", or "arbitrary".
    pub assume: String,
    pub nbar: f64,
    pub samples: u64,
}

impl Default for ThermometryConfig {
    fn default() -> Self {
        Self {
            eta: 0.24,
            omega0_hz: 250.0e3,
            transition: "blue".into(),
            assume: "thermal".into(),
            nbar: 5.0,
            samples: 160,
        }
    }
}

impl ThermometryConfig {
    pub fn transition(&self) -> Result<Transition> {
        Transition::parse(&self.transition).ok_or_else(|| Error::Constraint {
            key: "thermometry.transition".into(),
            message: format!("must be carrier, red, or blue, got {}", self.transition),
        })
    }

    pub fn assumption(&self) -> Result<StateKind> {
        StateKind::parse(&self.assume).ok_or_else(|| Error::Constraint {
            key: "thermometry.assume".into(),
            message: format!("must be thermal, coherent, or arbitrary, got {}", self.assume),
        })
    }

    pub fn omega0(&self) -> f64 {
        TAU * self.omega0_hz
    }
}

/// Ramsey/spin-echo parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceConfig {
    pub t1_us: f64,
    pub t2_us: f64,
    pub echo: bool,
    /// Transport count: 0 none, 1 second half, 2 both halves.
    pub transports: u64,
    pub pulse_us: f64,
    pub contrast_floor: f64,
    pub phase_points: u64,
    pub sensitivity_hz_per_tesla: f64,
    pub base_field_t: f64,
    pub center_fraction: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        let p = FieldShiftProfile::default();
        Self {
            t1_us: 280.0,
            t2_us: 280.0,
            echo: true,
            transports: 2,
            pulse_us: 1.0,
            contrast_floor: 0.85,
            phase_points: 64,
            sensitivity_hz_per_tesla: p.sensitivity_hz_per_tesla,
            base_field_t: p.base_field,
            center_fraction: p.center_fraction,
        }
    }
}

impl CoherenceConfig {
    pub fn sequence(&self) -> Result<SequenceSpec> {
        let transports = match self.transports {
            0 => TransportPlacement::None,
            1 => TransportPlacement::SecondHalf,
            2 => TransportPlacement::BothHalves,
            n => {
                return Err(Error::Constraint {
                    key: "coherence.transports".into(),
                    message: format!("must be 0, 1, or 2, got {n}"),
                })
            }
        };
        let spec = SequenceSpec {
            t1: self.t1_us * 1e-6,
            t2: self.t2_us * 1e-6,
            echo_enabled: self.echo,
            transports,
            pulse_duration: self.pulse_us * 1e-6,
            contrast_floor: self.contrast_floor,
        };
        spec.validate().map_err(|e| Error::Constraint {
            key: "coherence".into(),
            message: e.to_string(),
        })?;
        Ok(spec)
    }

    pub fn profile(&self) -> FieldShiftProfile {
        FieldShiftProfile {
            center_fraction: self.center_fraction,
            sensitivity_hz_per_tesla: self.sensitivity_hz_per_tesla,
            base_field: self.base_field_t,
            ..Default::default()
        }
    }
}

/// Full simulator configuration: every group plus the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SimConfig {
    pub ion: IonConfig,
    pub drive: DriveConfig,
    pub field_model: FieldModelConfig,
    pub noise: NoiseConfig,
    pub waveform: WaveformConfig,
    pub thermometry: ThermometryConfig,
    pub coherence: CoherenceConfig,
    pub master_seed: u64,
    pub output_dir: String,
}

impl SimConfig {
    /// Parses a config file, validating keys and constraints. A missing
    /// file is an `Io` error; unknown keys and invalid values carry their
    /// own error variants so the CLI can map them to distinct exit codes.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Constraint {
                    key: format!("line {}", lineno + 1),
                    message: format!("expected 'key = value', got {line:?}"),
                }
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::Constraint {
                key: key.into(),
                message: format!("expected a number, got {value:?}"),
            })
        };
        let int = || -> Result<u64> {
            value.parse::<u64>().map_err(|_| Error::Constraint {
                key: key.into(),
                message: format!("expected a nonnegative integer, got {value:?}"),
            })
        };
        let flag = || -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Constraint {
                    key: key.into(),
                    message: format!("expected a boolean, got {value:?}"),
                }),
            }
        };
        match key {
            "ion.species" => self.ion.species = value.into(),
            "ion.mass_u" => self.ion.mass_u = num()?,
            "ion.charge_e" => self.ion.charge_e = num()?,
            "drive.v0_volts" => self.drive.v0_volts = num()?,
            "drive.omega_rf_hz" => self.drive.omega_rf_hz = num()?,
            "field-model.barrier_height_ev" => self.field_model.barrier_height_ev = num()?,
            "field-model.barrier_center_um" => self.field_model.barrier_center_um = num()?,
            "field-model.sigma_um" => self.field_model.sigma_um = num()?,
            "field-model.extent_um" => self.field_model.extent_um = num()?,
            "field-model.single_barrier" => self.field_model.single_barrier = flag()?,
            "noise.level_dbc" => {
                self.noise.level_dbc = if value == "-inf" {
                    f64::NEG_INFINITY
                } else {
                    num()?
                }
            }
            "noise.bandwidth_hz" => self.noise.bandwidth_hz = num()?,
            "noise.center_offset_hz" => self.noise.center_offset_hz = num()?,
            "noise.intrinsic_quanta_per_s" => self.noise.intrinsic_quanta_per_s = num()?,
            "waveform.path" => self.waveform.path = value.into(),
            "waveform.duration_us" => self.waveform.duration_us = num()?,
            "waveform.dac_rate_hz" => self.waveform.dac_rate_hz = num()?,
            "waveform.dt_s" => self.waveform.dt_s = num()?,
            "waveform.omega_zone_hz" => self.waveform.omega_zone_hz = num()?,
            "waveform.omega_center_hz" => self.waveform.omega_center_hz = num()?,
            "waveform.freq_sigma_um" => self.waveform.freq_sigma_um = num()?,
            "waveform.seeds" => self.waveform.seeds = int()?,
            "thermometry.eta" => self.thermometry.eta = num()?,
            "thermometry.omega0_hz" => self.thermometry.omega0_hz = num()?,
            "thermometry.transition" => self.thermometry.transition = value.into(),
            "thermometry.assume" => self.thermometry.assume = value.into(),
            "thermometry.nbar" => self.thermometry.nbar = num()?,
            "thermometry.samples" => self.thermometry.samples = int()?,
            "coherence.t1_us" => self.coherence.t1_us = num()?,
            "coherence.t2_us" => self.coherence.t2_us = num()?,
            "coherence.echo" => self.coherence.echo = flag()?,
            "coherence.transports" => self.coherence.transports = int()?,
            "coherence.pulse_us" => self.coherence.pulse_us = num()?,
            "coherence.contrast_floor" => self.coherence.contrast_floor = num()?,
            "coherence.phase_points" => self.coherence.phase_points = int()?,
            "coherence.sensitivity_hz_per_tesla" => {
                self.coherence.sensitivity_hz_per_tesla = num()?
            }
            "coherence.base_field_t" => self.coherence.base_field_t = num()?,
            "coherence.center_fraction" => self.coherence.center_fraction = num()?,
            "master_seed" => self.master_seed = int()?,
            "output.dir" => self.output_dir = value.into(),
            _ => return Err(Error::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Builds every domain object once so any constraint violation
    /// surfaces at load time.
    pub fn validate(&self) -> Result<()> {
        self.ion.build()?;
        self.drive.build()?;
        self.field_model.build()?;
        self.waveform.build()?;
        if self.noise.level_dbc > f64::NEG_INFINITY {
            self.noise.build(self.waveform.omega_zone_hz, 0)?;
        }
        self.thermometry.transition()?;
        self.thermometry.assumption()?;
        self.coherence.sequence()?;
        Ok(())
    }

    /// Every parameter as flat `key = value` lines, defaults included, in
    /// sorted key order. This is the provenance block hashed into the run
    /// manifest.
    pub fn provenance_block(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("ion.species", self.ion.species.clone());
        map.insert("ion.mass_u", fmt(self.ion.mass_u));
        map.insert("ion.charge_e", fmt(self.ion.charge_e));
        map.insert("drive.v0_volts", fmt(self.drive.v0_volts));
        map.insert("drive.omega_rf_hz", fmt(self.drive.omega_rf_hz));
        map.insert(
            "field-model.barrier_height_ev",
            fmt(self.field_model.barrier_height_ev),
        );
        map.insert(
            "field-model.barrier_center_um",
            fmt(self.field_model.barrier_center_um),
        );
        map.insert("field-model.sigma_um", fmt(self.field_model.sigma_um));
        map.insert("field-model.extent_um", fmt(self.field_model.extent_um));
        map.insert(
            "field-model.single_barrier",
            self.field_model.single_barrier.to_string(),
        );
        map.insert("noise.level_dbc", fmt(self.noise.level_dbc));
        map.insert("noise.bandwidth_hz", fmt(self.noise.bandwidth_hz));
        map.insert("noise.center_offset_hz", fmt(self.noise.center_offset_hz));
        map.insert(
            "noise.intrinsic_quanta_per_s",
            fmt(self.noise.intrinsic_quanta_per_s),
        );
        map.insert("waveform.path", self.waveform.path.clone());
        map.insert("waveform.duration_us", fmt(self.waveform.duration_us));
        map.insert("waveform.dac_rate_hz", fmt(self.waveform.dac_rate_hz));
        map.insert("waveform.dt_s", fmt(self.waveform.dt_s));
        map.insert("waveform.omega_zone_hz", fmt(self.waveform.omega_zone_hz));
        map.insert(
            "waveform.omega_center_hz",
            fmt(self.waveform.omega_center_hz),
        );
        map.insert("waveform.freq_sigma_um", fmt(self.waveform.freq_sigma_um));
        map.insert("waveform.seeds", self.waveform.seeds.to_string());
        map.insert("thermometry.eta", fmt(self.thermometry.eta));
        map.insert("thermometry.omega0_hz", fmt(self.thermometry.omega0_hz));
        map.insert("thermometry.transition", self.thermometry.transition.clone());
        map.insert("thermometry.assume", self.thermometry.assume.clone());
        map.insert("thermometry.nbar", fmt(self.thermometry.nbar));
        map.insert("thermometry.samples", self.thermometry.samples.to_string());
        map.insert("coherence.t1_us", fmt(self.coherence.t1_us));
        map.insert("coherence.t2_us", fmt(self.coherence.t2_us));
        map.insert("coherence.echo", self.coherence.echo.to_string());
        map.insert("coherence.transports", self.coherence.transports.to_string());
        map.insert("coherence.pulse_us", fmt(self.coherence.pulse_us));
        map.insert(
            "coherence.contrast_floor",
            fmt(self.coherence.contrast_floor),
        );
        map.insert(
            "coherence.phase_points",
            self.coherence.phase_points.to_string(),
        );
        map.insert(
            "coherence.sensitivity_hz_per_tesla",
            fmt(self.coherence.sensitivity_hz_per_tesla),
        );
        map.insert("coherence.base_field_t", fmt(self.coherence.base_field_t));
        map.insert(
            "coherence.center_fraction",
            fmt(self.coherence.center_fraction),
        );
        map.insert("master_seed", self.master_seed.to_string());
        map.insert("output.dir", self.output_dir.clone());
        let mut out = String::new();
        for (k, v) in &map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = SimConfig::from_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_relative_eq!(cfg.drive.omega_rf_hz, 83.0e6, max_relative = 1e-15);
    }

    #[test]
    fn drive_frequency_round_trips() {
        let cfg = SimConfig::from_str("drive.omega_rf_hz = 83e6\n").unwrap();
        let drive = cfg.drive.build().unwrap();
        assert_relative_eq!(drive.drive_angular_freq / TAU, 83.0e6, max_relative = 1e-12);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = SimConfig::from_str(
            "# a comment\n\nnoise.level_dbc = -167  # trailing comment\n",
        )
        .unwrap();
        assert_eq!(cfg.noise.level_dbc, -167.0);
    }

    #[test]
    fn unknown_key_rejected() {
        match SimConfig::from_str("drive.frequency = 10\n") {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "drive.frequency"),
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn negative_barrier_names_offending_key() {
        match SimConfig::from_str("field-model.barrier_height_ev = -1\n") {
            Err(Error::Constraint { key, .. }) => {
                assert_eq!(key, "field-model.barrier_height_ev")
            }
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn bad_number_rejected() {
        assert!(SimConfig::from_str("noise.bandwidth_hz = wide\n").is_err());
        assert!(SimConfig::from_str("just some words\n").is_err());
    }

    #[test]
    fn neg_inf_noise_level_accepted() {
        let cfg = SimConfig::from_str("noise.level_dbc = -inf\n").unwrap();
        assert_eq!(cfg.noise.level_dbc, f64::NEG_INFINITY);
    }

    #[test]
    fn provenance_block_reparses_to_same_config() {
        let cfg = SimConfig::from_str("waveform.duration_us = 250\nmaster_seed = 42\n").unwrap();
        let block = cfg.provenance_block();
        let reparsed = SimConfig::from_str(&block).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn waveform_builds() {
        let cfg = SimConfig::default();
        let wf = cfg.waveform.build().unwrap();
        assert_relative_eq!(wf.duration, 100.0e-6, max_relative = 1e-12);
    }
}
