//! Shared fixtures for the criterion benches. The crate ships no runtime
//! code; `cargo bench -p cvcluster-bench` is its only entry point.

use std::f64::consts::FRAC_PI_4;

use cvcluster_core::{BinRange, FreqWindow, PumpSpec};

/// Pump, window, and bin range sized like a realistic run: seven
/// frequency pairs, six time bins.
pub fn lattice_fixture() -> (PumpSpec, FreqWindow, BinRange) {
    (
        PumpSpec::dual(1, FRAC_PI_4, 3, FRAC_PI_4),
        FreqWindow::new(-2, 4).unwrap(),
        BinRange::new(0, 5).unwrap(),
    )
}
