//! Small dense linear-algebra helpers on top of nalgebra: matrix norms,
//! symmetric (inverse) square roots, and the matrix exponential
//! (scaling-and-squaring with a Pade(6) approximant).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub fn hs_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Operator (spectral) norm via the symmetric eigenvalues of A^T A.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(ata);
    eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.max(0.0))).sqrt()
}

/// Symmetric square root of a positive-definite matrix.
pub fn sym_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_power(a, 0.5)
}

/// Symmetric inverse square root (the whitening map of a covariance).
pub fn sym_inv_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_power(a, -0.5)
}

fn sym_power(a: &DMatrix<f64>, pow: f64) -> Result<DMatrix<f64>> {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let max_eig = eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l));
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &l| m.min(l));
    if pow < 0.0 && (min_eig <= 0.0 || min_eig <= 1e-12 * max_eig) {
        return Err(Error::SingularCovariance { min_eig });
    }
    if pow > 0.0 && min_eig < 0.0 && min_eig.abs() > 1e-12 * max_eig.max(1.0) {
        return Err(Error::SingularCovariance { min_eig });
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).powf(pow)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Matrix exponential by scaling-and-squaring with a diagonal Pade(6)
/// approximant; adequate and fast for the n <= 64 generators used here.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().fold(0.0_f64, |m, &x| m.max(x.abs())) * n as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a_scaled = a * 2f64.powi(-s);

    // Pade(6): b_j = (12-j)! 6! / (12! (6-j)! j!)
    let m = 6usize;
    let mut b = vec![0.0_f64; m + 1];
    let fact = |k: usize| -> f64 { (1..=k).map(|x| x as f64).product::<f64>().max(1.0) };
    for (j, bj) in b.iter_mut().enumerate() {
        *bj = fact(2 * m - j) * fact(m) / (fact(2 * m) * fact(m - j) * fact(j));
    }

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    // U = A (b1 I + b3 A^2 + b5 A^4), V = b0 I + b2 A^2 + b4 A^4 + b6 A^6
    let u = &a_scaled * (&id * b[1] + &a2 * b[3] + &a4 * b[5]);
    let v = &id * b[0] + &a2 * b[2] + &a4 * b[4] + &a6 * b[6];
    let num = &v + &u;
    let den = &v - &u;
    let mut x = den.lu().solve(&num).expect("Pade denominator is invertible at this scaling");
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// exp(theta * (x y^T - y x^T)) for orthonormal x, y: the rotation by
/// `theta` in their plane, leaving the complement fixed.
pub fn plane_rotation(x: &DVector<f64>, y: &DVector<f64>, theta: f64) -> DMatrix<f64> {
    let n = x.len();
    let g = x * y.transpose() - y * x.transpose();
    let p = x * x.transpose() + y * y.transpose();
    DMatrix::identity(n, n) + g * theta.sin() - p * (1.0 - theta.cos())
}

pub fn orthogonality_drift(u: &DMatrix<f64>) -> f64 {
    let g = u.transpose() * u;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hs_and_op_norms() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert!((hs_norm(&a) - 5.0).abs() < 1e-12);
        assert!((op_norm(&a) - 4.0).abs() < 1e-10);
        // op <= hs <= sqrt(n) op
        assert!(op_norm(&a) <= hs_norm(&a) + 1e-12);
        assert!(hs_norm(&a) <= 2f64.sqrt() * op_norm(&a) + 1e-12);
    }

    #[test]
    fn inv_sqrt_whitens() {
        let c = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let w = sym_inv_sqrt(&c).unwrap();
        let should_be_id = &w * &c * &w;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((should_be_id[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_covariance_rejected() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(sym_inv_sqrt(&c), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn expm_matches_plane_rotation() {
        let n = 5;
        let x = DVector::from_fn(n, |i, _| if i == 1 { 1.0 } else { 0.0 });
        let y = DVector::from_fn(n, |i, _| if i == 3 { 1.0 } else { 0.0 });
        let theta = 0.83;
        let g = &x * y.transpose() - &y * x.transpose();
        let direct = plane_rotation(&x, &y, theta);
        let series = expm(&(g * theta));
        assert!(hs_norm(&(&direct - &series)) < 1e-13);
    }

    #[test]
    fn expm_of_antisymmetric_is_orthogonal() {
        let mut a = DMatrix::zeros(6, 6);
        let vals = [0.3, -0.7, 1.2, 0.05, -0.4, 0.9, 1.7, -1.1, 0.6, 0.2, -0.9, 0.35, 0.8, -0.25, 0.15];
        let mut k = 0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                a[(i, j)] = vals[k % vals.len()];
                a[(j, i)] = -a[(i, j)];
                k += 1;
            }
        }
        let u = expm(&a);
        assert!(orthogonality_drift(&u) < 1e-12);
        assert!((u.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expm_zero_is_identity() {
        let u = expm(&DMatrix::zeros(4, 4));
        assert!(orthogonality_drift(&u) < 1e-15);
    }
}
