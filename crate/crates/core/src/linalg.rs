//! Small dense helpers shared by the manifolds and objectives.

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

pub fn frob_inner(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn column(values: &[f64]) -> Mat {
    Mat::from_column_slice(values.len(), 1, values)
}

/// Thin QR with the diagonal of R forced positive, returning the Q factor.
///
/// For an input that is already close to orthonormal the result differs from the
/// input only by the rounding that was removed.
pub fn orthonormalize(a: &Mat) -> Mat {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormal basis of the columns of `a` restricted to directions with
/// singular value above `tol`, via SVD.
pub fn range_basis(a: &Mat, tol: f64) -> Mat {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = Mat::zeros(a.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Identity residual `‖XᵀX − I‖_F`.
pub fn orthonormality_residual(x: &Mat) -> f64 {
    let k = x.ncols();
    (x.transpose() * x - Mat::identity(k, k)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormalize_keeps_orthonormal_input() {
        let x = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let q = orthonormalize(&x);
        assert!((q - x).norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_fixes_sign() {
        let x = Mat::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 3.0]);
        let q = orthonormalize(&x);
        assert!((q[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((q[(1, 1)] - 1.0).abs() < 1e-15);
    }
}
