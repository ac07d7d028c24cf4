//! Exact block reductions implied by the index symmetries.
//!
//! With `P_ab = W[a][b]` and `Q_ab = W[a][-b]` over positive sites:
//!
//! * Central2: `W` commutes with the mirror `J e_x = e_-x`; on the mirror
//!   even/odd subspaces it acts as `P + Q` and `P - Q`.
//! * Quarter4: implies Central2, and in addition `conj(W) = J W`, so the
//!   even block is real symmetric and the odd block is `i K` with `K` real
//!   skew.
//! * RowMirror3: rows `x` and `-x` coincide (and so do the columns), so the
//!   odd block vanishes and the even block is twice the negative-site block.
//! * Flip1: `J K` (with `K` complex conjugation) is an antiunitary symmetry
//!   squaring to one; in the basis `(e_x + e_-x)/sqrt2`, `i (e_x - e_-x)/sqrt2`
//!   the matrix is real symmetric.

use super::tridiag::{reduce_hermitian, reduce_skew, reduce_symmetric, tridiagonal_eigenvalues};
use crate::domain::{HermitianMatrix, SymmetryClass};
use crate::error::Result;

/// Eigenvalues split by mirror parity where the class provides one.
#[derive(Debug, Clone, PartialEq)]
pub enum Sectors {
    /// No mirror-parity decomposition used.
    Whole(Vec<f64>),
    /// Eigenvalues on the mirror-even and mirror-odd subspaces.
    Mirror { even: Vec<f64>, odd: Vec<f64> },
}

impl Sectors {
    pub fn merged(self) -> Vec<f64> {
        let mut all = match self {
            Sectors::Whole(v) => v,
            Sectors::Mirror { mut even, odd } => {
                even.extend(odd);
                even
            }
        };
        all.sort_by(f64::total_cmp);
        all
    }
}

/// Position of positive site `a + 1` and of its mirror.
#[inline]
fn plus(n: usize, a: usize) -> usize {
    n + a
}

#[inline]
fn minus(n: usize, a: usize) -> usize {
    n - 1 - a
}

/// Dense eigenvalues of the whole matrix through the fast reduction.
pub(crate) fn dense_eigenvalues(w: &HermitianMatrix) -> Result<Vec<f64>> {
    let side = w.side();
    let mut re = vec![0.0; side * side];
    let mut im = vec![0.0; side * side];
    for p in 0..side {
        for q in 0..=p {
            let v = w.at(p, q);
            re[p * side + q] = v.re;
            im[p * side + q] = v.im;
        }
    }
    let (d, e) = reduce_hermitian(&mut re, &mut im, side);
    tridiagonal_eigenvalues(d, e)
}

fn hermitian_block(w: &HermitianMatrix, sign: f64) -> Result<Vec<f64>> {
    let n = w.half_size();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..=a {
            let v = w.at(plus(n, a), plus(n, b)) + sign * w.at(plus(n, a), minus(n, b));
            re[a * n + b] = v.re;
            im[a * n + b] = v.im;
        }
    }
    let (d, e) = reduce_hermitian(&mut re, &mut im, n);
    tridiagonal_eigenvalues(d, e)
}

/// Per-class reduction. The caller guarantees the class symmetry holds.
pub(crate) fn sector_eigenvalues(w: &HermitianMatrix, class: SymmetryClass) -> Result<Sectors> {
    let n = w.half_size();
    match class {
        SymmetryClass::Plain => Ok(Sectors::Whole(dense_eigenvalues(w)?)),
        SymmetryClass::Central2 => Ok(Sectors::Mirror { even: hermitian_block(w, 1.0)?, odd: hermitian_block(w, -1.0)? }),
        SymmetryClass::RowMirror3 => {
            let mut re = vec![0.0; n * n];
            let mut im = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..=a {
                    let v = w.at(minus(n, a), minus(n, b));
                    re[a * n + b] = v.re;
                    im[a * n + b] = v.im;
                }
            }
            let (d, e) = reduce_hermitian(&mut re, &mut im, n);
            let even = tridiagonal_eigenvalues(d, e)?.into_iter().map(|x| 2.0 * x).collect();
            Ok(Sectors::Mirror { even, odd: vec![0.0; n] })
        }
        SymmetryClass::Quarter4 => {
            let mut sym = vec![0.0; n * n];
            let mut skew = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..=a {
                    let pq = w.at(plus(n, a), plus(n, b));
                    let mq = w.at(plus(n, a), minus(n, b));
                    sym[a * n + b] = (pq + mq).re;
                    skew[a * n + b] = (pq - mq).im;
                }
            }
            let (d, e) = reduce_symmetric(&mut sym, n);
            let even = tridiagonal_eigenvalues(d, e)?;
            let (d, e) = reduce_skew(&mut skew, n);
            let odd = tridiagonal_eigenvalues(d, e)?;
            Ok(Sectors::Mirror { even, odd })
        }
        SymmetryClass::Flip1 => {
            let side = 2 * n;
            let mut r = vec![0.0; side * side];
            for a in 0..n {
                for b in 0..=a {
                    let pq = w.at(plus(n, a), plus(n, b));
                    let mq = w.at(plus(n, a), minus(n, b));
                    r[a * side + b] = (pq + mq).re;
                    r[(n + a) * side + (n + b)] = (pq - mq).re;
                }
                for b in 0..n {
                    // lower-left block: (w_a, u_b) = Im(Q - P)_{ba}
                    let pq = w.at(plus(n, b), plus(n, a));
                    let mq = w.at(plus(n, b), minus(n, a));
                    r[(n + a) * side + b] = (mq - pq).im;
                }
            }
            let (d, e) = reduce_symmetric(&mut r, side);
            Ok(Sectors::Whole(tridiagonal_eigenvalues(d, e)?))
        }
    }
}
