//! Real symmetric embedding of complex Hermitian matrices.
//!
//! `C = A + jB` maps to `[[A, -B], [B, A]]`. For Hermitian `C` and `Y`,
//! `<embed(C), embed(Y)> = 2·tr(C Y)`, so constraint coefficients carry a factor ½.
//! The map from a general `2N×2N` PSD matrix back to a Hermitian one averages the
//! two diagonal blocks, which keeps positive semidefiniteness.

use nalgebra::DMatrix;

use crate::scalar::{cplx, lit, CMatrix, Real};

pub fn embed_hermitian<T: Real>(c: &CMatrix<T>) -> DMatrix<T> {
    let n = c.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = c[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn extract_hermitian<T: Real>(x: &DMatrix<T>) -> CMatrix<T> {
    let n = x.nrows() / 2;
    let half = lit::<T>(0.5);
    CMatrix::from_fn(n, n, |i, j| {
        cplx(
            (x[(i, j)] + x[(i + n, j + n)]) * half,
            (x[(i + n, j)] - x[(i, j + n)]) * half,
        )
    })
}
