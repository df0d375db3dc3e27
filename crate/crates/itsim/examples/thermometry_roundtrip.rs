//! Synthesizes blue-sideband flopping curves for thermal states and fits
//! nbar back under matching and mismatched state assumptions.
//!
//!     cargo run --example thermometry_roundtrip

use std::f64::consts::TAU;

use itsim::thermometry::{
    fit_nbar, flopping_curve, fock_rabi_rate, make_distribution, suggested_n_max, StateKind,
    Transition,
};

fn main() {
    let eta = 0.24;
    let om0 = TAU * 250.0e3;
    let w0 = fock_rabi_rate(0, Transition::BlueSideband, eta, om0).unwrap();

    for nbar in [1.0, 5.0, 20.0] {
        let dist = make_distribution(
            StateKind::Thermal,
            nbar,
            suggested_n_max(StateKind::Thermal, nbar),
        )
        .unwrap();
        let times: Vec<f64> = (0..160).map(|i| 8.0 * TAU / w0 * i as f64 / 160.0).collect();
        let curve = flopping_curve(&dist, &times, Transition::BlueSideband, eta, om0).unwrap();
        let samples: Vec<(f64, f64)> = times.iter().cloned().zip(curve.populations).collect();

        println!("true thermal nbar = {nbar}");
        for kind in [StateKind::Thermal, StateKind::Coherent, StateKind::Arbitrary] {
            let fit = fit_nbar(&samples, kind, Transition::BlueSideband, eta, om0).unwrap();
            println!(
                "  assume {:<9} -> nbar {:>7.3}  (rms residual {:.2e})",
                kind.name(),
                fit.nbar,
                fit.residual_rms
            );
        }
    }
}
