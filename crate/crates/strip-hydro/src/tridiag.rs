//! Per-mode linear solves: the Thomas algorithm for the tridiagonal systems,
//! plus a small pivoted dense solve for the composed projection operator.
//!
//! Every implicit solve in this crate reduces, mode by mode, to a real
//! matrix acting on a complex `y`-profile. The tridiagonal ones are either
//! strictly diagonally dominant (Crank-Nicolson with Dirichlet rows) or made
//! invertible by a gauge row, so the Thomas path needs no pivoting.

use rustfft::num_complex::Complex64;

/// Solves `A x = rhs` in place, where `A` has sub/main/super diagonals
/// `(lower, diag, upper)`; `lower[0]` and `upper[n-1]` are ignored.
///
/// Panics if a forward-elimination pivot collapses, which for the matrices
/// built in this crate indicates a programming error rather than data.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [Complex64]) {
    let n = diag.len();
    assert!(n >= 1 && lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut scratch = vec![0.0_f64; n];
    let d0 = diag[0];
    assert!(d0 != 0.0, "zero pivot in tridiagonal solve");
    scratch[0] = upper[0] / d0;
    rhs[0] /= d0;
    for i in 1..n {
        let m = diag[i] - lower[i] * scratch[i - 1];
        assert!(m != 0.0, "zero pivot in tridiagonal solve at row {i}");
        scratch[i] = upper[i] / m;
        rhs[i] = (rhs[i] - rhs[i - 1] * lower[i]) / m;
    }
    for i in (0..n - 1).rev() {
        let correction = rhs[i + 1] * scratch[i];
        rhs[i] -= correction;
    }
}

/// `y = A x` for the same banded layout; used by tests and for residual checks.
pub fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = x[i] * diag[i];
        if i > 0 {
            acc += x[i - 1] * lower[i];
        }
        if i + 1 < n {
            acc += x[i + 1] * upper[i];
        }
        y[i] = acc;
    }
    y
}

/// Gaussian elimination with partial pivoting for the one system in this
/// crate that is *not* tridiagonal: the composed projection operator, whose
/// interior stencil couples `j ± 2` and whose wall rows are one-sided.
///
/// `a` is row-major dense storage, destroyed by the elimination; the solution
/// lands in `rhs`. `kl`/`ku` are the lower/upper bandwidths: only rows within
/// `kl` of the pivot column are searched and eliminated, and only columns
/// within `kl + ku` of it are updated, which is exact for a banded matrix
/// under partial pivoting (row swaps stay inside the `kl` window, so fill-in
/// cannot reach past `kl + ku` superdiagonals). Passing `kl = ku = n - 1`
/// degrades to ordinary dense elimination.
///
/// Panics on a vanishing pivot for the same reason `solve_in_place` does: the
/// matrices assembled in this crate are provably invertible, so a collapse is
/// a bug, not a data condition.
pub fn solve_banded_in_place(kl: usize, ku: usize, a: &mut [Vec<f64>], rhs: &mut [Complex64]) {
    let n = rhs.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let width = kl + ku;
    for col in 0..n {
        let row_end = (col + kl).min(n - 1);
        let pivot_row = (col..=row_end)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty pivot search");
        assert!(a[pivot_row][col] != 0.0, "singular projection system at column {col}");
        if pivot_row != col {
            a.swap(col, pivot_row);
            rhs.swap(col, pivot_row);
        }
        let col_end = (col + width).min(n - 1);
        for r in col + 1..=row_end {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            a[r][col] = 0.0;
            for c in col + 1..=col_end {
                let head = a[col][c];
                a[r][c] -= factor * head;
            }
            let b = rhs[col];
            rhs[r] -= factor * b;
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in col + 1..=(col + width).min(n - 1) {
            acc -= a[col][c] * rhs[c];
        }
        rhs[col] = acc / a[col][col];
    }
}
