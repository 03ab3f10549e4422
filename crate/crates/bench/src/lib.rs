//! Representative workloads shared by the benchmarks.

use dunkl_liyau::{Adaptive, MultiplicityZ2};

/// A mix of tilts covering the flat, moderate and saturated regimes.
pub const TILTS: [f64; 5] = [0.0, 0.7, -3.0, 40.0, -900.0];

/// `(t, x, y)` points for a two-dimensional kernel with one hyperplane point.
pub fn kernel_points() -> Vec<(f64, [f64; 2], [f64; 2])> {
    vec![
        (0.01, [0.3, -1.0], [0.3, 3.0]),
        (1.0, [0.0, 1.0], [-1.0, 10.0]),
        (100.0, [10.0, -3.0], [3.0, -0.3]),
    ]
}

pub fn multiplicity() -> MultiplicityZ2 {
    MultiplicityZ2::new(vec![0.5, 2.5]).expect("valid multiplicity")
}

pub fn adaptive() -> Adaptive {
    Adaptive::default()
}
