//! Default verification grids and a memoized Li–Yau sweep.
//!
//! The kernel is a product, so every grid point's decomposition is assembled
//! from per-coordinate terms `(t, x_i, y_i, kappa_i)`. Those are computed once
//! and rows are streamed to a sink instead of being collected.

use crate::dunkl::MultiplicityZ2;
use crate::error::Result;
use crate::inequalities::{coordinate_term, CoordinateTerm, LiYauDecomposition};
use crate::quadrature::Adaptive;

pub const DEFAULT_KAPPAS: [f64; 4] = [0.25, 0.5, 1.0, 2.5];
pub const DEFAULT_COORDS: [f64; 9] = [-10.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 10.0];

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k + 1 == n {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Nine log-spaced times in `[1e-2, 1e2]`.
pub fn default_t_grid() -> Vec<f64> {
    log_spaced(1e-2, 1e2, 9)
}

/// Calls `visit` with every multi-index in `{0..n}^d`, last index fastest.
pub fn for_each_index(n: usize, d: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let mut idx = vec![0; d];
    loop {
        visit(&idx)?;
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Every multiplicity vector in `values^d`, last coordinate fastest.
pub fn kappa_grid(values: &[f64], d: usize) -> Result<Vec<MultiplicityZ2>> {
    let mut out = Vec::new();
    for_each_index(values.len(), d, |idx| {
        out.push(MultiplicityZ2::new(idx.iter().map(|&k| values[k]).collect())?);
        Ok(())
    })?;
    Ok(out)
}

/// Aggregate over one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScanStats {
    pub points: usize,
    pub failures: usize,
    /// Smallest deficit seen.
    pub min_deficit: f64,
    /// Largest `|deficit|` among points with `y = 0`.
    pub max_equality_gap: f64,
    /// Largest `|deficit|` over all points.
    pub max_abs_deficit: f64,
}

impl ScanStats {
    fn new() -> Self {
        ScanStats {
            min_deficit: f64::INFINITY,
            ..Default::default()
        }
    }

    fn record(&mut self, d: &LiYauDecomposition, deficit: f64, tol: f64) {
        self.points += 1;
        if deficit < -tol {
            self.failures += 1;
        }
        self.min_deficit = self.min_deficit.min(deficit);
        self.max_abs_deficit = self.max_abs_deficit.max(deficit.abs());
        if d.y.iter().all(|&v| v == 0.0) {
            self.max_equality_gap = self.max_equality_gap.max(deficit.abs());
        }
    }

    pub fn merge(&mut self, other: &ScanStats) {
        self.points += other.points;
        self.failures += other.failures;
        self.min_deficit = self.min_deficit.min(other.min_deficit);
        self.max_equality_gap = self.max_equality_gap.max(other.max_equality_gap);
        self.max_abs_deficit = self.max_abs_deficit.max(other.max_abs_deficit);
    }
}

/// Sweeps `t in t_grid`, `x, y in coords^d` for one multiplicity. Rows reach
/// `sink` ordered by `(t, x, y)` lexicographically.
pub fn liyau_scan(
    t_grid: &[f64],
    coords: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
    tolerance: f64,
    mut sink: impl FnMut(&LiYauDecomposition) -> Result<()>,
) -> Result<ScanStats> {
    let d = kappa.dim();
    let n = coords.len();
    // table[i][((ti * n) + xi) * n + yi]
    let mut table: Vec<Vec<CoordinateTerm>> = Vec::with_capacity(d);
    for i in 0..d {
        let k = kappa.get(i);
        if let Some(j) = (0..i).find(|&j| kappa.get(j) == k) {
            table.push(table[j].clone());
            continue;
        }
        let mut terms = Vec::with_capacity(t_grid.len() * n * n);
        for &t in t_grid {
            for &x in coords {
                for &y in coords {
                    terms.push(coordinate_term(t, x, y, k, adaptive)?);
                }
            }
        }
        table.push(terms);
    }
    let mut stats = ScanStats::new();
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    for (ti, &t) in t_grid.iter().enumerate() {
        for_each_index(n, d, |xi| {
            for_each_index(n, d, |yi| {
                let terms: Vec<CoordinateTerm> = (0..d)
                    .map(|i| {
                        x[i] = coords[xi[i]];
                        y[i] = coords[yi[i]];
                        table[i][(ti * n + xi[i]) * n + yi[i]]
                    })
                    .collect();
                let dec = LiYauDecomposition::from_terms(t, &x, &y, kappa, terms);
                stats.record(&dec, dec.deficit(), tolerance);
                sink(&dec)
            })
        })?;
    }
    Ok(stats)
}
