//! Compares the analytic sideband heating rate to a Monte-Carlo Langevin
//! measurement of energy growth in a static well on a barrier shoulder.
//!
//!     cargo run --example langevin_heating_check

use std::f64::consts::TAU;

use itsim::constants::{IonSpecies, RFDrive};
use itsim::noise::{heating_rate, NoiseSpec};
use itsim::potential::AxialFieldModel;
use itsim::validate::langevin_heating_rate;

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let om_z = TAU * 3.6e6;
    let s_v = 2.0e-18; // fractional PSD, about -177 dBc
    let bw = 150.0e3;

    println!("{:>9} {:>14} {:>14} {:>8}", "s [um]", "analytic [1/s]", "Langevin [1/s]", "ratio");
    for s_um in [-190.0, -170.0, -100.0] {
        let s = s_um * 1e-6;
        let spec = NoiseSpec::new(s_v, om_z, bw, 0).unwrap();
        let analytic = heating_rate(s, &spec, om_z, &model, &ion, &drive).unwrap();
        let mc = langevin_heating_rate(s, om_z, s_v, bw, 0.5e-3, 20, 42, &model, &ion, &drive)
            .unwrap();
        println!("{:>9.1} {:>14.4e} {:>14.4e} {:>8.3}", s_um, analytic, mc, mc / analytic);
    }
}
