//! Small dense linear-algebra kernels: SPD Cholesky factorization/solves and
//! symmetric eigenvalues via cyclic Jacobi. Sized for Gram matrices (tens of
//! columns) and the interior-point normal equations (up to a few thousand).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::Error;
use crate::Result;

/// In-place lower Cholesky factorization of a flat row-major SPD matrix.
///
/// The strict upper triangle is left untouched; callers must only read the
/// lower triangle afterwards.
pub fn cholesky_flat(a: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        let (head, tail) = a.split_at_mut(i * n);
        for j in 0..i {
            let row_j = &head[j * n..j * n + j];
            let mut s = 0.0;
            for t in 0..j {
                s += tail[t] * row_j[t];
            }
            tail[j] = (tail[j] - s) / head[j * n + j];
        }
        let mut s = 0.0;
        for t in 0..i {
            s += tail[t] * tail[t];
        }
        let d = tail[i] - s;
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::SingularGram {
                ratio: if d.is_finite() { d } else { f64::NAN },
            });
        }
        tail[i] = d.sqrt();
    }
    Ok(())
}

/// Solves L Lᵀ x = b given a flat lower factor from [`cholesky_flat`].
pub fn cholesky_solve_flat(l: &[f64], n: usize, b: &mut [f64]) {
    // forward: L y = b
    for i in 0..n {
        let mut s = b[i];
        let row = &l[i * n..i * n + i];
        for (t, lt) in row.iter().enumerate() {
            s -= lt * b[t];
        }
        b[i] = s / l[i * n + i];
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for t in i + 1..n {
            s -= l[t * n + i] * b[t];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_factor(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky expects square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut flat: Vec<f64> = a.iter().copied().collect();
    cholesky_flat(&mut flat, n)?;
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            l[[i, j]] = flat[i * n + j];
        }
    }
    Ok(l)
}

/// Solves A x = b for SPD A.
pub fn solve_spd(a: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_spd: matrix {}x{} vs rhs {}",
            n,
            a.ncols(),
            b.len()
        )));
    }
    let l = cholesky_factor(a)?;
    let mut x: Vec<f64> = b.to_vec();
    let flat: Vec<f64> = l.iter().copied().collect();
    cholesky_solve_flat(&flat, n, &mut x);
    Ok(Array1::from_vec(x))
}

/// Eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi rotations.
///
/// Intended for small matrices (Gram matrices of regression designs).
pub fn sym_eigenvalues(a: &ArrayView2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eigenvalues expects a square matrix");
    let mut m: Vec<f64> = a.iter().copied().collect();
    // symmetrize defensively against fp asymmetry in callers
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn cholesky_solves_identity() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let b = array![8.0, 7.0];
        let x = solve_spd(&a.view(), &b.view()).unwrap();
        // 4x + 2y = 8, 2x + 3y = 7 -> x = 5/4, y = 3/2
        assert_relative_eq!(x[0], 1.25, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        let b = array![1.0, 1.0];
        assert!(solve_spd(&a.view(), &b.view()).is_err());
    }

    #[test]
    fn jacobi_matches_hand_eigenvalues() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let e = sym_eigenvalues(&a.view());
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn jacobi_diag_passthrough() {
        let a = array![[5.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, 0.5]];
        let e = sym_eigenvalues(&a.view());
        assert_relative_eq!(e[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(e[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(e[2], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn larger_spd_roundtrip() {
        // A = M Mᵀ + I is SPD; check A x = b solve by residual.
        let n = 24;
        let mut m = Array2::<f64>::zeros((n, n));
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = next();
            }
        }
        let a = m.dot(&m.t()) + Array2::<f64>::eye(n);
        let b = Array1::from_iter((0..n).map(|i| (i as f64).sin()));
        let x = solve_spd(&a.view(), &b.view()).unwrap();
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-9));
    }
}
