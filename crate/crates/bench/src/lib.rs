//! Fixtures shared by the kernel benchmarks.

use splashwave_core::initdata::{preset, PresetName, PresetParams};
use splashwave_core::{PeriodicGrid, SheetState};

/// A smooth periodic sample with content across the spectrum.
pub fn smooth_samples(n: usize) -> Vec<f64> {
    let grid = PeriodicGrid::new(n).expect("n is a valid grid size");
    grid.nodes().iter().map(|a| (a.sin() * 2.0).exp() + 0.3 * (5.0 * a).cos()).collect()
}

/// Plain-domain standing wave with default parameters.
pub fn standing_wave(n: usize) -> SheetState {
    preset(PresetName::StandingWave, n, &PresetParams::default()).expect("standing wave builds").plain.expect("plain state")
}

/// Splash data in the desingularized domain.
pub fn splash_tilde(n: usize) -> SheetState {
    preset(PresetName::Splash, n, &PresetParams::default()).expect("splash builds").tilde.expect("tilde state")
}
