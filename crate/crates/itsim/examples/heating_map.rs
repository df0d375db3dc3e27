//! Heating rate per unit voltage-noise PSD along the path: largest on the
//! barrier shoulders, zero at an isolated barrier peak.
//!
//!     cargo run --example heating_map

use std::f64::consts::TAU;

use itsim::constants::{IonSpecies, RFDrive};
use itsim::noise::{heating_map, NoiseSpec};
use itsim::potential::AxialFieldModel;

fn main() {
    let model = AxialFieldModel::default();
    let ion = IonSpecies::beryllium_9();
    let drive = RFDrive::default();
    let spec = NoiseSpec::new(1e-17, TAU * 3.6e6, 150.0e3, 0).unwrap();

    let grid: Vec<f64> = (0..=80).map(|i| -400.0e-6 + 800.0e-6 * i as f64 / 80.0).collect();
    let map = heating_map(&grid, &spec, |_| TAU * 3.6e6, 1.0, &model, &ion, &drive).unwrap();

    let peak = map.iter().map(|p| p.ratio).fold(0.0f64, f64::max);
    println!("{:>10} {:>12}  profile", "s [um]", "ratio");
    for p in &map {
        let bar = "#".repeat((60.0 * p.ratio / peak) as usize);
        println!("{:>10.1} {:>12.4e}  {bar}", p.s * 1e6, p.ratio);
    }
    println!("\npeak ratio {peak:.4e} quanta/s per V^2/Hz");
}
