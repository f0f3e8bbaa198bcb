//! Grids, the fixed Fourier convention, convolution and unit conversions.

mod convolve;
mod fourier;
mod grid;
mod signal;
pub mod units;

pub use convolve::{convolve, impulse};
pub use fourier::{fourier_to_frequency, fourier_to_time, ALIAS_THRESHOLD};
pub use grid::{FrequencyGrid, TimeGrid};
pub use signal::{SampleGrid, Signal, Spectrum, TimeSignal};
pub use units::pulse_extent;

/// `sin(x)/x` with the removable singularity patched.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
