//! Prints the axial pseudopotential and its field-squared gradient along
//! the transport path.
//!
//!     cargo run --example potential_profile

use itsim::constants::{IonSpecies, RFDrive, ELECTRON_VOLT};
use itsim::potential::AxialFieldModel;

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let (lo, hi) = model.extent_m();

    println!("{:>10} {:>12} {:>14}", "s [um]", "Phi_p [eV]", "dE0^2/ds");
    for i in 0..=60 {
        let s = lo + (hi - lo) * i as f64 / 60.0;
        let phi = model.pseudopotential(s).unwrap() / ELECTRON_VOLT;
        let grad = model.field_sq_gradient(s, &ion, &drive).unwrap();
        println!("{:>10.1} {:>12.5} {:>14.4e}", s * 1e6, phi, grad);
    }

    let peak = model.pseudopotential(130.0e-6).unwrap() / ELECTRON_VOLT;
    println!("\nbarrier height at +130 um: {peak:.4} eV");
}
