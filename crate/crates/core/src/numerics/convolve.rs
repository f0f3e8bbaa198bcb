use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::signal::TimeSignal;
use crate::error::{Error, Result};

/// Linear convolution `c(t) = \int dt' a(t') b(t - t')` on a shared time
/// grid, approximated by `dt * sum_j a(t_j) b(t - t_j)` with zero padding
/// outside the grid. The result lives on the same grid as the inputs.
pub fn convolve(a: &TimeSignal, b: &TimeSignal) -> Result<TimeSignal> {
    let grid = *a.grid();
    if !grid.same_as(b.grid()) {
        return Err(Error::GridMismatch(format!(
            "convolution of {}-point grid (step {}) with {}-point grid (step {})",
            grid.len(),
            grid.step(),
            b.grid().len(),
            b.grid().step()
        )));
    }
    let n = grid.len();
    let padded = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(padded);
    let inv = planner.plan_fft_inverse(padded);

    let pad = |s: &TimeSignal| {
        let mut v = s.values().to_vec();
        v.resize(padded, C64::new(0.0, 0.0));
        v
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);

    // full linear convolution index j + m maps onto output sample (j + m) - origin
    let scale = grid.step() / padded as f64;
    let origin = grid.origin();
    let values = (0..n).map(|k| fa[k + origin] * scale).collect();
    Ok(TimeSignal::new(grid, values)?.with_alias_flag(a.aliased() || b.aliased()))
}

/// Discrete stand-in for `delta(t)`: a single sample of height `1/dt` at the
/// origin.
pub fn impulse(grid: crate::numerics::TimeGrid) -> TimeSignal {
    let mut values = vec![C64::new(0.0, 0.0); grid.len()];
    values[grid.origin()] = C64::new(1.0 / grid.step(), 0.0);
    TimeSignal::new(grid, values).expect("finite impulse")
}
