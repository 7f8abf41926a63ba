//! Symmetric tridiagonal matrices with unit off-diagonal.

/// Number of eigenvalues strictly below `x`, from the signs of the pivots
/// of `T − x = L D Lᵀ`.
pub fn count_below(diag: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        d = if i == 0 { a - x } else { a - x - 1.0 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a.abs() + x.abs() + 2.0).max(1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64]) -> (f64, f64) {
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0;
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0;
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on [`count_below`],
/// to an absolute width of `tol` (or the float spacing at its magnitude).
pub fn kth_eigenvalue(diag: &[f64], k: usize, bounds: (f64, f64), tol: f64) -> f64 {
    let (mut lo, mut hi) = bounds;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol.max(4.0 * f64::EPSILON * mid.abs()) || mid <= lo || mid >= hi {
            return mid;
        }
        if count_below(diag, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Solve `(T − shift) u = rhs` by Gaussian elimination with partial
/// pivoting; exactly zero pivots are nudged to the float spacing.
pub fn solve_shifted(diag: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(n, rhs.len());
    let mut d: Vec<f64> = diag.iter().map(|a| a - shift).collect();
    let mut b = rhs.to_vec();
    if n == 1 {
        return vec![b[0] / nonzero(d[0])];
    }
    let dl = vec![1.0f64; n - 1];
    let mut du = vec![1.0f64; n - 1];
    let mut du2 = vec![0.0f64; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let fact = dl[i] / nonzero(d[i]);
            d[i] = nonzero(d[i]);
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    let last = n - 1;
    b[last] /= nonzero(d[last]);
    b[last - 1] = (b[last - 1] - du[last - 1] * b[last]) / d[last - 1];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    b
}

fn nonzero(x: f64) -> f64 {
    if x == 0.0 {
        f64::EPSILON
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(diag: &[f64], shift: f64, u: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = (diag[i] - shift) * u[i];
                if i > 0 {
                    s += u[i - 1];
                }
                if i + 1 < n {
                    s += u[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn laplacian_counts() {
        let diag = [0.0; 3];
        assert_eq!(count_below(&diag, -1.5), 0);
        assert_eq!(count_below(&diag, -1.0), 1);
        assert_eq!(count_below(&diag, 0.5), 2);
        assert_eq!(count_below(&diag, 1.5), 3);
    }

    proptest! {
        #[test]
        fn pivoted_solve_has_small_residual(
            diag in proptest::collection::vec(-3.0f64..3.0, 1..40),
            shift in -2.0f64..2.0,
        ) {
            let rhs: Vec<f64> = (0..diag.len()).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
            let u = solve_shifted(&diag, shift, &rhs);
            let back = apply(&diag, shift, &u);
            let scale = u.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in back.iter().zip(&rhs) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
            }
        }
    }
}
