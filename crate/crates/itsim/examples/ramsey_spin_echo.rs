//! Ramsey fringe for the three transport placements: no transport, one
//! transport (net phase shift), transport in both echo halves (phase
//! cancelled).
//!
//!     cargo run --example ramsey_spin_echo

use itsim::coherence::{
    fit_contrast, run_sequence, FieldShiftProfile, SequenceSpec, TransportPlacement,
};
use itsim::transport::{design_waveform, FreqProfile, PathLabel, Sampling};

fn main() {
    let wf = design_waveform(
        PathLabel::Ece,
        100.0e-6,
        Sampling::Continuous,
        FreqProfile::default_bump(),
    )
    .unwrap();
    let profile = FieldShiftProfile::default();

    for placement in [
        TransportPlacement::None,
        TransportPlacement::SecondHalf,
        TransportPlacement::BothHalves,
    ] {
        let spec = SequenceSpec {
            transports: placement,
            ..Default::default()
        };
        let fringe = run_sequence(&spec, &wf, &profile, 64).unwrap();
        let samples: Vec<(f64, f64)> = fringe
            .phases
            .iter()
            .cloned()
            .zip(fringe.populations.iter().cloned())
            .collect();
        let fit = fit_contrast(&samples).unwrap();
        println!(
            "{:<12} net phase {:>9.4} rad, fitted contrast {:.4}, offset {:>7.4} rad",
            placement.name(),
            fringe.net_phase,
            fit.contrast,
            fit.phase_offset
        );
    }
}
