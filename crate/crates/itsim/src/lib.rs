//! Desk-scale simulator for trapped-ion transport through an X-junction
//! trap array.
//!
//! The library models the axial (1-D) physics of moving-well ion transport:
//! pseudopotential barriers near the junction center, the heating that RF
//! voltage noise causes in a pseudopotential gradient, zero-order-hold DAC
//! sampling resonances, sideband Rabi-flopping thermometry, and qubit phase
//! evolution during Ramsey/spin-echo sequences interleaved with transport.
//!
//! All internal quantities are SI (meters, joules, rad/s, seconds);
//! electron-volts, micrometers, and motional quanta appear only at I/O
//! boundaries. The one-sided PSD convention is used throughout.
//!
//! See the crate examples for one runnable program per capability, and the
//! `itsim` binary for the file-based CLI front end.

pub mod coherence;
pub mod config;
pub mod constants;
pub mod error;
pub mod manifest;
pub mod noise;
pub mod output;
pub mod potential;
pub mod thermometry;
pub mod transport;
pub mod validate;

pub mod cli;

pub use error::Error;

/// Counter-based seed splitter. Derives a per-task seed from the master seed
/// so that parallel sweeps stay deterministic regardless of scheduling.
///
/// SplitMix64 finalizer over `master + golden-ratio * index`.
pub fn task_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
