//! Axial pseudopotential model along the 1-D transport path and the solver
//! that places a moving harmonic well on top of it.
//!
//! The path coordinate `s` runs along one junction leg with the junction
//! center C at s = 0 and the zones (E/H/V) at +-890 um; by symmetry all legs
//! share the same profile. The pseudopotential is a sum of Gaussian barriers,
//! which is smooth, analytically differentiable, and qualitatively matches
//! the simulated barrier profile near the junction.

use serde::{Deserialize, Serialize};

use crate::constants::{IonSpecies, RFDrive, ELECTRON_VOLT};
use crate::error::{Error, Result};

/// Zone positions on the path coordinate, meters.
pub const ZONE_SPAN: f64 = 890.0e-6;

/// Parametric axial pseudopotential profile: a sum of Gaussian barriers.
///
/// All fields are SI (joules, meters); constructors accept the eV/um
/// boundary units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialFieldModel {
    /// Barrier height, J.
    barrier_height: f64,
    /// Barrier centers, m.
    barrier_centers: Vec<f64>,
    /// Gaussian width sigma, m.
    sigma: f64,
    /// Path extent [s_min, s_max], m.
    extent: (f64, f64),
}

impl AxialFieldModel {
    pub fn new(
        barrier_height_ev: f64,
        barrier_centers_um: &[f64],
        sigma_um: f64,
        extent_um: (f64, f64),
    ) -> Result<Self> {
        if !(barrier_height_ev > 0.0) {
            return Err(Error::Domain(format!(
                "barrier height must be positive, got {barrier_height_ev} eV"
            )));
        }
        if !(sigma_um > 0.0) {
            return Err(Error::Domain(format!(
                "barrier width must be positive, got {sigma_um} um"
            )));
        }
        if !(extent_um.0 < extent_um.1) {
            return Err(Error::Domain(format!(
                "path extent must be increasing, got [{}, {}] um",
                extent_um.0, extent_um.1
            )));
        }
        for &c in barrier_centers_um {
            // Barriers sit strictly between the zone endpoints and C.
            if !(c > extent_um.0 && c < extent_um.1) || c == 0.0 {
                return Err(Error::Domain(format!(
                    "barrier center {c} um must lie strictly inside the extent and off C"
                )));
            }
        }
        Ok(Self {
            barrier_height: barrier_height_ev * ELECTRON_VOLT,
            barrier_centers: barrier_centers_um.iter().map(|c| c * 1e-6).collect(),
            sigma: sigma_um * 1e-6,
            extent: (extent_um.0 * 1e-6, extent_um.1 * 1e-6),
        })
    }

    /// Single barrier centered at `center_um`, otherwise default parameters.
    pub fn single_barrier(center_um: f64) -> Self {
        Self::new(0.35, &[center_um], 60.0, (-890.0, 890.0)).expect("valid default")
    }

    pub fn barrier_height_j(&self) -> f64 {
        self.barrier_height
    }

    pub fn barrier_centers_m(&self) -> &[f64] {
        &self.barrier_centers
    }

    pub fn sigma_m(&self) -> f64 {
        self.sigma
    }

    pub fn extent_m(&self) -> (f64, f64) {
        self.extent
    }

    pub fn check_extent(&self, s: f64) -> Result<()> {
        // A micrometer of slack: trajectories start at the extent endpoints
        // and their secular oscillation may overshoot by nanometers.
        const SLACK: f64 = 1.0e-6;
        if s < self.extent.0 - SLACK || s > self.extent.1 + SLACK || !s.is_finite() {
            return Err(Error::OutsideExtent {
                position: s,
                min: self.extent.0,
                max: self.extent.1,
            });
        }
        Ok(())
    }

    /// Pseudopotential energy at `s`, in J.
    pub fn pseudopotential(&self, s: f64) -> Result<f64> {
        self.check_extent(s)?;
        Ok(self.phi_unchecked(s))
    }

    pub(crate) fn phi_unchecked(&self, s: f64) -> f64 {
        let inv2s2 = 1.0 / (2.0 * self.sigma * self.sigma);
        self.barrier_centers
            .iter()
            .map(|&c| {
                let d = s - c;
                self.barrier_height * (-d * d * inv2s2).exp()
            })
            .sum()
    }

    /// d(Phi_p)/ds at `s`, in J/m.
    pub fn pseudo_gradient(&self, s: f64) -> Result<f64> {
        self.check_extent(s)?;
        Ok(self.grad_unchecked(s))
    }

    pub(crate) fn grad_unchecked(&self, s: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let inv2s2 = 1.0 / (2.0 * s2);
        self.barrier_centers
            .iter()
            .map(|&c| {
                let d = s - c;
                -self.barrier_height * d / s2 * (-d * d * inv2s2).exp()
            })
            .sum()
    }

    /// d2(Phi_p)/ds2 at `s`, in J/m^2.
    pub fn pseudo_curvature(&self, s: f64) -> Result<f64> {
        self.check_extent(s)?;
        let s2 = self.sigma * self.sigma;
        let inv2s2 = 1.0 / (2.0 * s2);
        Ok(self
            .barrier_centers
            .iter()
            .map(|&c| {
                let d = s - c;
                self.barrier_height / s2 * (d * d / s2 - 1.0) * (-d * d * inv2s2).exp()
            })
            .sum())
    }

    /// Squared axial RF field amplitude `E0^2(s)` in V^2/m^2, obtained by
    /// inverting the pseudopotential relation
    /// `Phi_p = q^2 E0^2 / (4 m Omega_RF^2)` (the time average of cos^2
    /// contributes the factor 1/2).
    pub fn field_sq(&self, s: f64, ion: &IonSpecies, drive: &RFDrive) -> Result<f64> {
        let phi = self.pseudopotential(s)?;
        let om = drive.drive_angular_freq;
        Ok(4.0 * ion.mass * om * om * phi / (ion.charge * ion.charge))
    }

    /// Analytic derivative `d(E0^2)/ds` in V^2/m^3.
    pub fn field_sq_gradient(&self, s: f64, ion: &IonSpecies, drive: &RFDrive) -> Result<f64> {
        let dphi = self.pseudo_gradient(s)?;
        let om = drive.drive_angular_freq;
        Ok(4.0 * ion.mass * om * om * dphi / (ion.charge * ion.charge))
    }
}

impl Default for AxialFieldModel {
    /// Two 0.35 eV barriers at +-130 um, sigma = 60 um, extent +-890 um.
    fn default() -> Self {
        Self::new(0.35, &[-130.0, 130.0], 60.0, (-890.0, 890.0)).expect("valid default")
    }
}

/// Quadratic control potential that turns the pseudopotential into a
/// harmonic well: `Phi_total(s) = Phi_p(s) + a + b s + c s^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    /// Offset a, J.
    pub offset: f64,
    /// Linear coefficient b, J/m.
    pub linear: f64,
    /// Quadratic coefficient c, J/m^2.
    pub quadratic: f64,
    /// Well center z0, m.
    pub well_center: f64,
    /// Target axial angular frequency, rad/s.
    pub target_freq: f64,
}

/// Solves for the control quadratic that puts a stationary point of the
/// total potential at `z0` with curvature `m omega_z^2`.
///
/// Higher pseudopotential derivatives are deliberately not cancelled; the
/// residual anharmonicity is the physical source of transport excitation.
pub fn solve_control(
    z0: f64,
    omega_z: f64,
    model: &AxialFieldModel,
    ion: &IonSpecies,
) -> Result<ControlSolution> {
    model.check_extent(z0)?;
    if !(omega_z > 0.0) {
        return Err(Error::Domain(format!(
            "target frequency must be positive, got {omega_z}"
        )));
    }
    let required = ion.mass * omega_z * omega_z;
    let pseudo_curv = model.pseudo_curvature(z0)?;
    if required <= pseudo_curv {
        return Err(Error::InfeasibleWell {
            position_um: z0 * 1e6,
            required,
            pseudo: pseudo_curv,
        });
    }
    let c = 0.5 * (required - pseudo_curv);
    let b = -model.pseudo_gradient(z0)? - 2.0 * c * z0;
    let a = -(model.phi_unchecked(z0) + b * z0 + c * z0 * z0);
    Ok(ControlSolution {
        offset: a,
        linear: b,
        quadratic: c,
        well_center: z0,
        target_freq: omega_z,
    })
}

/// Total axial potential `Phi_p(s) + a + b s + c s^2`, in J.
pub fn total_potential(s: f64, ctrl: &ControlSolution, model: &AxialFieldModel) -> Result<f64> {
    model.check_extent(s)?;
    Ok(model.phi_unchecked(s) + ctrl.offset + ctrl.linear * s + ctrl.quadratic * s * s)
}

/// Gradient of the total axial potential, in J/m.
pub fn total_gradient(s: f64, ctrl: &ControlSolution, model: &AxialFieldModel) -> Result<f64> {
    model.check_extent(s)?;
    Ok(model.grad_unchecked(s) + ctrl.linear + 2.0 * ctrl.quadratic * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELECTRON_VOLT;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ion() -> IonSpecies {
        IonSpecies::beryllium_9()
    }

    fn drive() -> RFDrive {
        RFDrive::default()
    }

    #[test]
    fn barrier_peak_height() {
        let model = AxialFieldModel::single_barrier(-130.0);
        let phi = model.pseudopotential(-130.0e-6).unwrap() / ELECTRON_VOLT;
        assert_relative_eq!(phi, 0.35, max_relative = 1e-12);
    }

    #[test]
    fn tail_negligible_at_zone() {
        let model = AxialFieldModel::default();
        let phi = model.pseudopotential(-890.0e-6).unwrap() / ELECTRON_VOLT;
        assert!(phi < 1e-4, "tail {phi} eV too large");
    }

    #[test]
    fn mirror_symmetry() {
        let model = AxialFieldModel::default();
        for i in 1..40 {
            let s = i as f64 * 20.0e-6;
            let a = model.pseudopotential(s).unwrap();
            let b = model.pseudopotential(-s).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn extent_violation_errors() {
        let model = AxialFieldModel::default();
        assert!(matches!(
            model.pseudopotential(1.0e-3),
            Err(Error::OutsideExtent { .. })
        ));
    }

    #[test]
    fn pseudopotential_field_inversion_consistent() {
        // Phi_p must equal q^2 E0^2 / (4 m Omega^2) for all s.
        let model = AxialFieldModel::default();
        let (ion, drive) = (ion(), drive());
        let om = drive.drive_angular_freq;
        for i in -20..=20 {
            let s = i as f64 * 40.0e-6;
            let phi = model.pseudopotential(s).unwrap();
            let e0sq = model.field_sq(s, &ion, &drive).unwrap();
            let back = ion.charge * ion.charge * e0sq / (4.0 * ion.mass * om * om);
            if phi != 0.0 {
                assert_relative_eq!(back, phi, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn field_gradient_zero_at_peak() {
        let model = AxialFieldModel::single_barrier(-130.0);
        let g = model
            .field_sq_gradient(-130.0e-6, &ion(), &drive())
            .unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn field_gradient_odd_about_peak() {
        let model = AxialFieldModel::single_barrier(-130.0);
        let sigma = model.sigma_m();
        let gp = model
            .field_sq_gradient(-130.0e-6 + sigma, &ion(), &drive())
            .unwrap();
        let gm = model
            .field_sq_gradient(-130.0e-6 - sigma, &ion(), &drive())
            .unwrap();
        assert_relative_eq!(gp, -gm, max_relative = 1e-12);
    }

    #[test]
    fn field_gradient_matches_finite_difference() {
        let model = AxialFieldModel::default();
        let (ion, drive) = (ion(), drive());
        let h = 1.0e-9;
        for s_um in [-250.0, -190.0, -130.0, -70.0, -10.0, 55.0, 170.0] {
            let s = s_um * 1e-6;
            let g = model.field_sq_gradient(s, &ion, &drive).unwrap();
            let fd = (model.field_sq(s + h, &ion, &drive).unwrap()
                - model.field_sq(s - h, &ion, &drive).unwrap())
                / (2.0 * h);
            let scale = model
                .field_sq(s, &ion, &drive)
                .unwrap()
                .abs()
                .max(1.0)
                / model.sigma_m();
            assert!(
                (g - fd).abs() <= 1e-6 * scale.max(g.abs()),
                "s={s_um} um: analytic {g} vs fd {fd}"
            );
        }
    }

    #[test]
    fn control_far_from_barriers() {
        let ion = ion();
        let omega = 2.0 * PI * 3.6e6;
        let model = AxialFieldModel::default();
        let z0 = -700.0e-6;
        let ctrl = solve_control(z0, omega, &model, &ion).unwrap();
        let c_harm = 0.5 * ion.mass * omega * omega;
        assert_relative_eq!(ctrl.quadratic, c_harm, max_relative = 1e-3);
        assert_relative_eq!(ctrl.linear, -2.0 * ctrl.quadratic * z0, max_relative = 1e-2);
    }

    #[test]
    fn control_at_barrier_peak_needs_extra_curvature() {
        let ion = ion();
        let omega = 2.0 * PI * 3.6e6;
        let model = AxialFieldModel::single_barrier(-130.0);
        let ctrl = solve_control(-130.0e-6, omega, &model, &ion).unwrap();
        // Negative Gaussian curvature at the peak must be made up by c.
        assert!(ctrl.quadratic > 0.5 * ion.mass * omega * omega);
    }

    #[test]
    fn control_stationarity_and_curvature_oracle() {
        let ion = ion();
        let model = AxialFieldModel::default();
        let omega = 2.0 * PI * 3.6e6;
        for z0_um in [-700.0f64, -300.0, -190.0, -130.0, -60.0] {
            let z0 = z0_um * 1e-6;
            let omega_here = if z0_um.abs() < 120.0 {
                2.0 * PI * 5.7e6
            } else {
                omega
            };
            let ctrl = solve_control(z0, omega_here, &model, &ion).unwrap();
            // Offset convention: total potential vanishes at the well center.
            assert!(total_potential(z0, &ctrl, &model).unwrap().abs() < 1e-30);
            // Finite-difference stationarity (small h: truncation-limited)
            // and curvature (larger h: the second difference is
            // round-off-limited at small h).
            let h = 1.0e-9;
            let fp = total_potential(z0 + h, &ctrl, &model).unwrap();
            let fm = total_potential(z0 - h, &ctrl, &model).unwrap();
            let grad_fd = (fp - fm) / (2.0 * h);
            let curv_target = ion.mass * omega_here * omega_here;
            let grad_scale = curv_target * z0.abs().max(1e-6);
            assert!(
                grad_fd.abs() <= 1e-9 * grad_scale.max(1.0e-12),
                "z0={z0_um} um: residual gradient {grad_fd}"
            );
            let h2 = 1.0e-7;
            let fp2 = total_potential(z0 + h2, &ctrl, &model).unwrap();
            let fm2 = total_potential(z0 - h2, &ctrl, &model).unwrap();
            let f0 = total_potential(z0, &ctrl, &model).unwrap();
            let curv_fd = (fp2 - 2.0 * f0 + fm2) / (h2 * h2);
            assert_relative_eq!(curv_fd, curv_target, max_relative = 1e-5);
        }
    }

    #[test]
    fn infeasible_well_reported() {
        let ion = ion();
        let model = AxialFieldModel::default();
        // At the inner shoulder the pseudopotential curvature exceeds what a
        // slow well can supply.
        let r = solve_control(-26.0e-6, 2.0 * PI * 1.0e6, &model, &ion);
        match r {
            Err(Error::InfeasibleWell { position_um, .. }) => {
                assert_relative_eq!(position_um, -26.0, max_relative = 1e-9);
            }
            other => panic!("expected infeasible well, got {other:?}"),
        }
    }

    #[test]
    fn total_potential_harmonic_limit() {
        let ion = ion();
        let omega = 2.0 * PI * 3.6e6;
        let model = AxialFieldModel::default();
        let z0 = -700.0e-6;
        let ctrl = solve_control(z0, omega, &model, &ion).unwrap();
        let delta = 0.5e-6;
        for s in [z0 - delta, z0 + delta] {
            let v = total_potential(s, &ctrl, &model).unwrap();
            let harm = 0.5 * ion.mass * omega * omega * delta * delta;
            assert_relative_eq!(v, harm, max_relative = 0.01);
        }
    }

    #[test]
    fn total_potential_asymmetric_on_barrier_shoulder() {
        let ion = ion();
        let model = AxialFieldModel::default();
        let z0 = -190.0e-6;
        let ctrl = solve_control(z0, 2.0 * PI * 3.6e6, &model, &ion).unwrap();
        let delta = 20.0e-6;
        let up = total_potential(z0 + delta, &ctrl, &model).unwrap();
        let dn = total_potential(z0 - delta, &ctrl, &model).unwrap();
        assert!((up - dn).abs() > 1e-25, "expected anharmonic asymmetry");
    }
}
