//! Dense linear solving via Gauss-Jordan elimination.

use crate::budget::{check_opt, Budget};
use crate::error::{Error, Result};
use crate::scalar::{smax, Scalar};

/// Relative pivot threshold: a pivot counts as zero when its magnitude falls
/// below this fraction of the largest entry of the initial matrix.
pub const PIVOT_TOL: f64 = 1e-13;

/// Solves `A x = b` by Gauss-Jordan elimination with partial pivoting.
///
/// `a` is row major and consumed along with `b`. Errors with
/// [`Error::Singular`] when the best available pivot is smaller than
/// [`PIVOT_TOL`] times the largest initial entry, and with
/// [`Error::BudgetExceeded`] when the optional budget expires (polled once
/// per elimination column).
pub fn solve_dense<S: Scalar>(
    mut a: Vec<Vec<S>>,
    mut b: Vec<S>,
    budget: Option<&Budget>,
) -> Result<Vec<S>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidModel(format!(
            "system shape mismatch: matrix {}x?, rhs {}",
            a.len(),
            n
        )));
    }
    if n == 0 {
        return Ok(b);
    }

    let mut max_entry = S::zero();
    for row in &a {
        for x in row {
            max_entry = smax(max_entry, x.abs());
        }
    }
    let tol = max_entry * S::from_f64_lossless(PIVOT_TOL);

    for col in 0..n {
        check_opt(budget)?;

        let mut pivot = col;
        let mut best = a[col][col].abs();
        for r in col + 1..n {
            let mag = a[r][col].abs();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best <= tol {
            return Err(Error::Singular(format!(
                "no usable pivot in column {col} (best {best}, threshold {tol})"
            )));
        }
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
        }

        let inv = S::one() / a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() * inv.clone();
        }
        b[col] = b[col].clone() * inv;

        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                a[r][j] = a[r][j].clone() - factor.clone() * a[col][j].clone();
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    Ok(b)
}
