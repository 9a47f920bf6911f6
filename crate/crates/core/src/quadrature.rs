//! Composite Simpson quadrature on uniform grids over [0, 1].
//!
//! Every grid here has `2^k + 1` nodes `x_i = i / (n - 1)`, so the number of
//! panels is even and the rule is the classic 1-4-2-4-...-4-1 weighting.

use crate::error::{Result, SpectralError};

/// Smallest `k` accepted in `2^k + 1`.
pub const MIN_GRID_EXPONENT: u32 = 3;

/// Default node count for quadrature of analytic and sampled potentials.
pub const DEFAULT_POINTS: usize = 4097;

pub fn is_valid_grid_size(n_points: usize) -> bool {
    n_points > 1 << MIN_GRID_EXPONENT && (n_points - 1).is_power_of_two()
}

pub fn check_grid_size(n_points: usize) -> Result<()> {
    if is_valid_grid_size(n_points) {
        Ok(())
    } else {
        Err(SpectralError::InvalidGridSize(n_points))
    }
}

/// Smallest admissible grid that resolves cosine coefficients up to
/// `max_index` (four nodes per index) and is at least `floor` nodes.
pub fn points_for_index(max_index: usize, floor: usize) -> usize {
    let need = (4 * max_index).max(floor).max(9);
    let mut intervals = 8usize;
    while intervals + 1 < need {
        intervals *= 2;
    }
    intervals + 1
}

/// Simpson weight of node `i` on a grid with `n` nodes, without the `h/3` factor.
#[inline]
fn weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Integral over [0, 1] of uniformly sampled values.
pub fn simpson(values: &[f64]) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = 1.0 / (n - 1) as f64;
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| weight(i, n) * v)
        .sum();
    sum * h / 3.0
}

/// Integral over [0, 1] of `f(x_i)` sampled on an `n`-node grid.
pub fn simpson_fn(n: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
    let h = 1.0 / (n - 1) as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += weight(i, n) * f(i);
    }
    sum * h / 3.0
}

/// Running integral `F(x_i) = ∫_0^{x_i} f`.
///
/// Even nodes carry the composite Simpson value; odd nodes add the
/// three-point half-panel rule `h (5 f0 + 8 f1 - f2) / 12` to the previous
/// even node. `F` at the last node equals [`simpson`] up to rounding.
pub fn cumulative_simpson(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = 1.0 / (n - 1) as f64;
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let (f0, f1, f2) = (values[i], values[i + 1], values[i + 2]);
        out[i + 1] = acc + h * (5.0 * f0 + 8.0 * f1 - f2) / 12.0;
        acc += h * (f0 + 4.0 * f1 + f2) / 3.0;
        out[i + 2] = acc;
        i += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert!(is_valid_grid_size(9));
        assert!(is_valid_grid_size(4097));
        assert!(!is_valid_grid_size(5));
        assert!(!is_valid_grid_size(10));
        assert_eq!(points_for_index(0, 0), 9);
        assert_eq!(points_for_index(300, 0), 2049);
        assert_eq!(points_for_index(3, 4097), 4097);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let n = 9;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / 8.0;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        assert!((simpson(&vals) - (0.25 - 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let n = 257;
        let vals: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::PI * i as f64 / 256.0).sin())
            .collect();
        let cum = cumulative_simpson(&vals);
        for (i, c) in cum.iter().enumerate() {
            let x = i as f64 / 256.0;
            let exact = (1.0 - (std::f64::consts::PI * x).cos()) / std::f64::consts::PI;
            assert!((c - exact).abs() < 1e-8, "node {i}: {c} vs {exact}");
        }
        assert!((cum[n - 1] - simpson(&vals)).abs() < 1e-15);
    }
}
