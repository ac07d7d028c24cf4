//! Reference dense routines: eigen-decomposition with basis accumulation and
//! complex LU with partial pivoting.

use num_complex::Complex64;

use super::tridiag::tridiagonal_ql;
use crate::domain::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Full Hermitian eigen-decomposition. Returns eigenvalues (ascending) and
/// the unitary whose columns are the matching eigenvectors.
pub(crate) fn hermitian_eigen_with_basis(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    let mut a = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let alpha = (lo..n).map(|i| a.at(i, k).norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a.at(lo, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        for i in lo..n {
            v[i] = a.at(i, k);
        }
        v[lo] += phase * alpha;
        let beta = 1.0 / (alpha * alpha + x0.norm() * alpha);

        // A <- H A
        for j in 0..n {
            let s: Complex64 = (lo..n).map(|i| v[i].conj() * a.at(i, j)).sum();
            if s != ZERO {
                for i in lo..n {
                    *a.at_mut(i, j) -= beta * v[i] * s;
                }
            }
        }
        // A <- A H and Q <- Q H
        for m in [&mut a, &mut q] {
            for i in 0..n {
                let t: Complex64 = (lo..n).map(|j| m.at(i, j) * v[j]).sum();
                if t != ZERO {
                    for j in lo..n {
                        *m.at_mut(i, j) -= beta * t * v[j].conj();
                    }
                }
            }
        }
    }

    // Rephase the complex off-diagonal to real nonnegative values.
    let mut d: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let s = a.at(k + 1, k);
        e[k] = s.norm();
        phases[k + 1] = if e[k] > 0.0 { phases[k] * (s / e[k]) } else { phases[k] };
    }
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    // basis = Q * diag(phases) * Z, columns permuted into ascending order
    let mut basis = ComplexMatrix::zeros(n);
    for r in 0..n {
        let qrow: Vec<Complex64> = (0..n).map(|m| q.at(r, m) * phases[m]).collect();
        for (c, &src) in order.iter().enumerate() {
            *basis.at_mut(r, c) = (0..n).map(|m| qrow[m] * z[m * n + src]).sum();
        }
    }
    Ok((eigenvalues, basis))
}

/// LU factorization with partial pivoting, `P A = L U`, stored compactly.
pub(crate) struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub(crate) fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best == 0.0 {
                return Err(Error::Singular(k));
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = lu[k * n + k];
            let (top, rest) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            for row in rest.chunks_exact_mut(n) {
                let f = row[k] / pivot;
                row[k] = f;
                if f != ZERO {
                    for (x, y) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= f * y;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// `A^{-1}` column by column.
    pub(crate) fn inverse(&self) -> ComplexMatrix {
        let n = self.n;
        let mut inv = ComplexMatrix::zeros(n);
        let mut col = vec![ZERO; n];
        for c in 0..n {
            for (i, x) in col.iter_mut().enumerate() {
                *x = if self.perm[i] == c { Complex64::new(1.0, 0.0) } else { ZERO };
            }
            for i in 0..n {
                let mut s = col[i];
                for j in 0..i {
                    s -= self.lu[i * n + j] * col[j];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in i + 1..n {
                    s -= self.lu[i * n + j] * col[j];
                }
                col[i] = s / self.lu[i * n + i];
            }
            for (r, x) in col.iter().enumerate() {
                *inv.at_mut(r, c) = *x;
            }
        }
        inv
    }
}
