//! Small numeric helpers shared across modules.

/// `n` equally spaced points from `a` to `b` inclusive (n ≥ 2), with exact
/// endpoints.
pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * step })
        .collect()
}

/// Bracketing index and linear fraction for interpolation on an ascending
/// grid, clamped to the ends: returns (i, f) with x ≈ grid[i]·(1−f) +
/// grid[i+1]·f and f ∈ [0, 1].
pub(crate) fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    debug_assert!(n >= 2);
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[n - 1] {
        return (n - 2, 1.0);
    }
    let hi = grid.partition_point(|&g| g <= x).min(n - 1);
    let lo = hi - 1;
    (lo, (x - grid[lo]) / (grid[hi] - grid[lo]))
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_exact() {
        let xs = linspace(-1.0, 2.0, 7);
        assert_eq!(xs.len(), 7);
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[6], 2.0);
        assert!((xs[1] - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn locate_brackets_and_clamps() {
        let grid = [0.0, 1.0, 3.0];
        assert_eq!(locate(&grid, -1.0), (0, 0.0));
        assert_eq!(locate(&grid, 0.5), (0, 0.5));
        let (i, f) = locate(&grid, 2.0);
        assert_eq!(i, 1);
        assert!((f - 0.5).abs() < 1e-15);
        assert_eq!(locate(&grid, 5.0), (1, 1.0));
        assert_eq!(locate(&grid, 1.0), (1, 0.0));
    }

    #[test]
    fn mean_stderr_by_hand() {
        // [DERIVED] mean 2, sample variance 1, stderr 1/2.
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 2.0]);
        assert!((m - 2.0).abs() < 1e-15);
        let var: f64 = 2.0 / 3.0;
        assert!((se - (var / 4.0).sqrt()).abs() < 1e-15);
    }
}
