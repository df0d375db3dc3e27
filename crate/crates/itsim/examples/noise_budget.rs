//! Mean energy gain per barrier crossing versus the RF sideband noise
//! level. At the ambient -177 dBc level the budget is a fraction of a
//! quantum per pass.
//!
//!     cargo run --example noise_budget

use itsim::constants::{IonSpecies, RFDrive};
use itsim::potential::AxialFieldModel;
use itsim::transport::{design_waveform, per_pass_gain_estimate, FreqProfile, PathLabel, Sampling};

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let wf = design_waveform(
        PathLabel::Ece,
        100.0e-6,
        Sampling::Continuous,
        FreqProfile::default_bump(),
    )
    .unwrap();
    let dt = 1.0 / (100.0 * 5.7e6);

    println!("{:>12} {:>18} {:>12}", "level [dBc]", "gain/pass [quanta]", "stderr");
    for level in [-187.0, -177.0, -167.0, -157.0] {
        let est = per_pass_gain_estimate(&wf, level, 20, 7, &model, &ion, &drive, dt).unwrap();
        println!("{:>12.0} {:>18.4} {:>12.4}", level, est.mean_quanta, est.stderr_quanta);
    }
}
