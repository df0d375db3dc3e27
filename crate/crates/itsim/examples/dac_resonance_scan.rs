//! Energy gain versus DAC update rate: zero-order-hold staircase error
//! excites the ion when the update rate divides the axial frequency.
//! Stretching the waveform over more updates narrows each resonance.
//!
//!     cargo run --example dac_resonance_scan

use itsim::constants::{IonSpecies, RFDrive};
use itsim::potential::AxialFieldModel;
use itsim::transport::{dac_resonance_scan, ScanFamily};

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let family = ScanFamily::default();
    let dt = 1.0 / (100.0 * 3.6e6);

    let rates: Vec<f64> = (0..=120).map(|i| 0.30e6 + 0.12e6 * i as f64 / 120.0).collect();
    let series = dac_resonance_scan(&rates, &family, &[1.0, 4.0], &model, &ion, &drive, dt)
        .unwrap();

    println!("axial frequency 3.6 MHz; expected resonances at 3.6/k MHz");
    println!("{:>12} {:>14} {:>14}", "rate [kHz]", "gain (1x)", "gain (4x)");
    for (p1, p4) in series[0].iter().zip(&series[1]) {
        println!(
            "{:>12.1} {:>14.4e} {:>14.4e}",
            p1.rate / 1e3,
            p1.gain_quanta,
            p4.gain_quanta
        );
    }
}
