//! Noiseless round-trip transport energy gain versus duration: slower
//! transport is quieter than 1/T^4 over this range.
//!
//!     cargo run --example adiabatic_transport

use itsim::constants::{IonSpecies, RFDrive};
use itsim::potential::AxialFieldModel;
use itsim::transport::{design_waveform, integrate_motion, FreqProfile, PathLabel, Sampling};

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let freq = FreqProfile::default_bump();
    let dt = 1.0 / (100.0 * 5.7e6);

    println!("{:>14} {:>16}", "duration [us]", "gain [quanta]");
    for duration_us in [50.0, 100.0, 200.0, 400.0, 800.0] {
        let wf = design_waveform(
            PathLabel::Ece,
            duration_us * 1e-6,
            Sampling::Continuous,
            freq,
        )
        .unwrap();
        let traj = integrate_motion(&wf, &model, &ion, &drive, None, None, dt).unwrap();
        println!("{:>14.0} {:>16.3e}", duration_us, traj.gain_quanta);
    }
}
