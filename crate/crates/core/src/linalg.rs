//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value cutoff used by every least-squares solve.
pub const LSTSQ_RCOND: f64 = 1e-10;

/// Hermitian inner product `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scales `v` to unit norm; `None` for the zero vector.
pub fn normalized(v: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = norm(v);
    if n > 0.0 && n.is_finite() {
        Some(v.iter().map(|z| z / n).collect())
    } else {
        None
    }
}

pub fn to_dvector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// Matrix whose columns are the given vectors.
pub fn columns_to_matrix(cols: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let rows = cols.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Thin SVD `a = u diag(s) v_t`.
///
/// nalgebra's SVD loses accuracy on rank-deficient matrices with more columns
/// than rows, so those are decomposed through their adjoint.
struct Svd {
    u: DMatrix<Complex64>,
    s: DVector<f64>,
    v_t: DMatrix<Complex64>,
}

impl Svd {
    fn new(a: &DMatrix<Complex64>) -> Self {
        let tall = a.nrows() >= a.ncols();
        let m = if tall { a.clone() } else { a.adjoint() };
        let svd = m.svd(true, true);
        let u = svd.u.expect("left singular vectors were requested");
        let v_t = svd.v_t.expect("right singular vectors were requested");
        if tall {
            Svd {
                u,
                s: svd.singular_values,
                v_t,
            }
        } else {
            Svd {
                u: v_t.adjoint(),
                s: svd.singular_values,
                v_t: u.adjoint(),
            }
        }
    }

    fn smax(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    /// `v diag(1/s) u^H`, with singular values at or below `cutoff` dropped.
    fn pinv(&self, cutoff: f64) -> DMatrix<Complex64> {
        let inv = DMatrix::from_diagonal(
            &self
                .s
                .map(|x| Complex64::new(if x > cutoff { 1.0 / x } else { 0.0 }, 0.0)),
        );
        self.v_t.adjoint() * inv * self.u.adjoint()
    }
}

/// Minimum-norm least-squares solution of `a x = b` by SVD, discarding
/// singular values below `LSTSQ_RCOND` times the largest one.
pub fn lstsq(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = Svd::new(a);
    let smax = svd.smax();
    if smax == 0.0 {
        return DVector::zeros(a.ncols());
    }
    svd.pinv(smax * LSTSQ_RCOND) * b
}

/// Moore-Penrose pseudoinverse with the same relative cutoff as [`lstsq`],
/// additionally treating singular values below `abs_floor` as zero.
pub fn pinv(a: &DMatrix<Complex64>, abs_floor: f64) -> DMatrix<Complex64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = Svd::new(a);
    let smax = svd.smax();
    let cutoff = (smax * LSTSQ_RCOND).max(abs_floor);
    if smax <= cutoff {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    svd.pinv(cutoff)
}

/// 2-norm condition number; infinite when the smallest singular value is 0.
pub fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let s = Svd::new(a).s;
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
