//! Householder reduction to tridiagonal form and implicit QL on the result.
//!
//! The eigenvalue-only reductions work on the lower triangle of a row-major
//! buffer and fuse the rank-2 update of step `k` with the matrix-vector
//! product of step `k+1`, so each trailing element is read and written once
//! per step. Complex matrices are held in split real/imaginary buffers.
//!
//! All three variants return `(d, e)`: the diagonal and the magnitudes of
//! the off-diagonal of a real symmetric tridiagonal matrix with the same
//! eigenvalues. A Hermitian tridiagonal matrix is unitarily similar to the
//! one with `|e_k|` on its off-diagonal, and `i T` for a real skew
//! tridiagonal `T` is similar to `tridiag(0, |e|)`.

use wide::f64x8;

use crate::error::{Error, Result};

const LANES: usize = 8;

/// Householder data for a real column: returns `(beta, new_subdiag)` and
/// turns `x` into the reflector `v` with `H = I - beta v v^T`.
#[inline]
fn real_reflector(x: &mut [f64]) -> (f64, f64) {
    let alpha = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if alpha == 0.0 {
        return (0.0, 0.0);
    }
    let x0 = x[0];
    let s = if x0 >= 0.0 { 1.0 } else { -1.0 };
    x[0] += s * alpha;
    let beta = 1.0 / (alpha * alpha + x0.abs() * alpha);
    (beta, -s * alpha)
}

#[inline(always)]
fn load(s: &[f64], c: usize) -> f64x8 {
    let a: [f64; LANES] = s[c..c + LANES].try_into().unwrap();
    f64x8::from(a)
}

#[inline(always)]
fn store(s: &mut [f64], c: usize, v: f64x8) {
    s[c..c + LANES].copy_from_slice(&v.to_array());
}

/// Symmetric row kernel: applies the pending update `-(u w^T + w u^T)` to
/// `row[j]`, then accumulates the new product. Returns `sum_j row[j] v[j]`.
#[inline(always)]
fn sym_row(row: &mut [f64], u: &[f64], w: &[f64], v: &[f64], p: &mut [f64], ui: f64, wi: f64, vi: f64) -> f64 {
    let len = row.len();
    let (sui, swi, svi) = (f64x8::splat(ui), f64x8::splat(wi), f64x8::splat(vi));
    let mut acc = f64x8::ZERO;
    let body = len - len % LANES;
    let mut c = 0;
    while c < body {
        let r = load(row, c) - (sui * load(w, c) + swi * load(u, c));
        store(row, c, r);
        acc = r.mul_add(load(v, c), acc);
        store(p, c, r.mul_add(svi, load(p, c)));
        c += LANES;
    }
    let mut tail = 0.0;
    for j in body..len {
        let r = row[j] - (ui * w[j] + wi * u[j]);
        row[j] = r;
        tail += r * v[j];
        p[j] += r * vi;
    }
    acc.reduce_add() + tail
}

/// Skew row kernel: pending update `+(u w^T - w u^T)`, product with
/// `a_ji = -a_ij`.
#[inline(always)]
fn skew_row(row: &mut [f64], u: &[f64], w: &[f64], v: &[f64], p: &mut [f64], ui: f64, wi: f64, vi: f64) -> f64 {
    let len = row.len();
    let (sui, swi, svi) = (f64x8::splat(ui), f64x8::splat(wi), f64x8::splat(vi));
    let mut acc = f64x8::ZERO;
    let body = len - len % LANES;
    let mut c = 0;
    while c < body {
        let r = load(row, c) + (sui * load(w, c) - swi * load(u, c));
        store(row, c, r);
        acc = r.mul_add(load(v, c), acc);
        store(p, c, load(p, c) - r * svi);
        c += LANES;
    }
    let mut tail = 0.0;
    for j in body..len {
        let r = row[j] + (ui * w[j] - wi * u[j]);
        row[j] = r;
        tail += r * v[j];
        p[j] -= r * vi;
    }
    acc.reduce_add() + tail
}

/// Eigenvalue-only reduction of a real symmetric matrix. Only the lower
/// triangle of `a` (row-major, `n x n`) is read; it is overwritten.
pub fn reduce_symmetric(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e);
    }
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut pending = false;

    for k in 0..n {
        // bring column k up to date
        if pending {
            let (uk, wk) = (u[k], w[k]);
            for i in k..n {
                a[i * n + k] -= u[i] * wk + w[i] * uk;
            }
        }
        d[k] = a[k * n + k];
        if k + 1 == n {
            break;
        }
        if k + 2 == n {
            e[k] = a[(k + 1) * n + k].abs();
            if pending {
                let t = &mut a[(k + 1) * n + k + 1];
                *t -= 2.0 * u[k + 1] * w[k + 1];
            }
            d[k + 1] = a[(k + 1) * n + k + 1];
            break;
        }
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        let (beta, sub) = real_reflector(&mut v[k + 1..]);
        e[k] = sub.abs();
        p[k + 1..].iter_mut().for_each(|t| *t = 0.0);
        if !pending {
            u[k + 1..].iter_mut().for_each(|t| *t = 0.0);
            w[k + 1..].iter_mut().for_each(|t| *t = 0.0);
        }
        let lo = k + 1;
        for i in lo..n {
            let (ui, wi, vi) = (u[i], w[i], v[i]);
            let row = &mut a[i * n + lo..i * n + i];
            let s = sym_row(row, &u[lo..i], &w[lo..i], &v[lo..i], &mut p[lo..i], ui, wi, vi);
            let diag = &mut a[i * n + i];
            *diag -= 2.0 * ui * wi;
            p[i] += s + *diag * vi;
        }
        if beta == 0.0 {
            // column already reduced; nothing pending from this step
            pending = false;
            continue;
        }
        let mut vp = 0.0;
        for i in lo..n {
            p[i] *= beta;
            vp += v[i] * p[i];
        }
        let kk = 0.5 * beta * vp;
        for i in lo..n {
            u[i] = v[i];
            w[i] = p[i] - kk * v[i];
        }
        pending = true;
    }
    (d, e)
}

/// Eigenvalue-only reduction of a real skew-symmetric matrix (lower
/// triangle of `a` holds `a_ij`, `i > j`). The diagonal of the result is
/// zero.
pub fn reduce_skew(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n < 2 {
        return (d, e);
    }
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut pending = false;

    for k in 0..n - 1 {
        if pending {
            let (uk, wk) = (u[k], w[k]);
            for i in k + 1..n {
                a[i * n + k] += u[i] * wk - w[i] * uk;
            }
        }
        if k + 2 == n {
            e[k] = a[(k + 1) * n + k].abs();
            break;
        }
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        let (beta, sub) = real_reflector(&mut v[k + 1..]);
        e[k] = sub.abs();
        p[k + 1..].iter_mut().for_each(|t| *t = 0.0);
        if !pending {
            u[k + 1..].iter_mut().for_each(|t| *t = 0.0);
            w[k + 1..].iter_mut().for_each(|t| *t = 0.0);
        }
        let lo = k + 1;
        for i in lo..n {
            let (ui, wi, vi) = (u[i], w[i], v[i]);
            let row = &mut a[i * n + lo..i * n + i];
            p[i] += skew_row(row, &u[lo..i], &w[lo..i], &v[lo..i], &mut p[lo..i], ui, wi, vi);
        }
        if beta == 0.0 {
            pending = false;
            continue;
        }
        for i in lo..n {
            u[i] = v[i];
            w[i] = beta * p[i];
        }
        pending = true;
    }
    (d, e)
}

/// Hermitian row kernel on split storage. Pending update
/// `-(u w^H + w u^H)`; accumulates `p_i += r_ij v_j` (returned) and
/// `p_j += conj(r_ij) v_i`.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn herm_row(
    rr: &mut [f64],
    ri: &mut [f64],
    ur: &[f64],
    ui: &[f64],
    wr: &[f64],
    wi: &[f64],
    vr: &[f64],
    vi: &[f64],
    pr: &mut [f64],
    pi: &mut [f64],
    (uir, uii, wir, wii, vir, vii): (f64, f64, f64, f64, f64, f64),
) -> (f64, f64) {
    let len = rr.len();
    let [uir8, uii8, wir8, wii8, vir8, vii8] = [uir, uii, wir, wii, vir, vii].map(f64x8::splat);
    let mut acc_r = f64x8::ZERO;
    let mut acc_i = f64x8::ZERO;
    let body = len - len % LANES;
    let mut c = 0;
    while c < body {
        let (wrj, wij, urj, uij) = (load(wr, c), load(wi, c), load(ur, c), load(ui, c));
        let (vrj, vij) = (load(vr, c), load(vi, c));
        // u_i conj(w_j) + w_i conj(u_j)
        let dr = uir8 * wrj + uii8 * wij + wir8 * urj + wii8 * uij;
        let di = uii8 * wrj - uir8 * wij + wii8 * urj - wir8 * uij;
        let ar = load(rr, c) - dr;
        let ai = load(ri, c) - di;
        store(rr, c, ar);
        store(ri, c, ai);
        acc_r = ar.mul_add(vrj, acc_r) - ai * vij;
        acc_i = ar.mul_add(vij, acc_i) + ai * vrj;
        store(pr, c, load(pr, c) + ar * vir8 + ai * vii8);
        store(pi, c, load(pi, c) + ar * vii8 - ai * vir8);
        c += LANES;
    }
    let (mut tr, mut ti) = (0.0, 0.0);
    for j in body..len {
        let dr = uir * wr[j] + uii * wi[j] + wir * ur[j] + wii * ui[j];
        let di = uii * wr[j] - uir * wi[j] + wii * ur[j] - wir * ui[j];
        let ar = rr[j] - dr;
        let ai = ri[j] - di;
        rr[j] = ar;
        ri[j] = ai;
        tr += ar * vr[j] - ai * vi[j];
        ti += ar * vi[j] + ai * vr[j];
        pr[j] += ar * vir + ai * vii;
        pi[j] += ar * vii - ai * vir;
    }
    (acc_r.reduce_add() + tr, acc_i.reduce_add() + ti)
}

/// Eigenvalue-only reduction of a complex Hermitian matrix given as split
/// real and imaginary parts (lower triangle read, overwritten).
pub fn reduce_hermitian(re: &mut [f64], im: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(re.len(), n * n);
    assert_eq!(im.len(), n * n);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e);
    }
    let z = || vec![0.0; n];
    let (mut ur, mut ui, mut wr, mut wi) = (z(), z(), z(), z());
    let (mut vr, mut vi, mut pr, mut pi) = (z(), z(), z(), z());
    let mut pending = false;

    for k in 0..n {
        if pending {
            let (ukr, uki, wkr, wki) = (ur[k], ui[k], wr[k], wi[k]);
            for i in k..n {
                // u_i conj(w_k) + w_i conj(u_k)
                let dr = ur[i] * wkr + ui[i] * wki + wr[i] * ukr + wi[i] * uki;
                let di = ui[i] * wkr - ur[i] * wki + wi[i] * ukr - wr[i] * uki;
                re[i * n + k] -= dr;
                im[i * n + k] -= di;
            }
            im[k * n + k] = 0.0;
        }
        d[k] = re[k * n + k];
        if k + 1 == n {
            break;
        }
        if k + 2 == n {
            let (sr, si) = (re[(k + 1) * n + k], im[(k + 1) * n + k]);
            e[k] = sr.hypot(si);
            let j = k + 1;
            let mut t = re[j * n + j];
            if pending {
                t -= 2.0 * (ur[j] * wr[j] + ui[j] * wi[j]);
            }
            d[j] = t;
            break;
        }
        let lo = k + 1;
        for i in lo..n {
            vr[i] = re[i * n + k];
            vi[i] = im[i * n + k];
        }
        let alpha = (lo..n).map(|i| vr[i] * vr[i] + vi[i] * vi[i]).sum::<f64>().sqrt();
        let mut beta = 0.0;
        if alpha > 0.0 {
            let x0 = vr[lo].hypot(vi[lo]);
            let (phr, phi) = if x0 > 0.0 { (vr[lo] / x0, vi[lo] / x0) } else { (1.0, 0.0) };
            vr[lo] += phr * alpha;
            vi[lo] += phi * alpha;
            beta = 1.0 / (alpha * alpha + x0 * alpha);
        }
        e[k] = alpha;
        for i in lo..n {
            pr[i] = 0.0;
            pi[i] = 0.0;
        }
        if !pending {
            for i in lo..n {
                ur[i] = 0.0;
                ui[i] = 0.0;
                wr[i] = 0.0;
                wi[i] = 0.0;
            }
        }
        for i in lo..n {
            let coeffs = (ur[i], ui[i], wr[i], wi[i], vr[i], vi[i]);
            let base = i * n;
            let (sr, si) = herm_row(
                &mut re[base + lo..base + i],
                &mut im[base + lo..base + i],
                &ur[lo..i],
                &ui[lo..i],
                &wr[lo..i],
                &wi[lo..i],
                &vr[lo..i],
                &vi[lo..i],
                &mut pr[lo..i],
                &mut pi[lo..i],
                coeffs,
            );
            let diag = re[base + i] - 2.0 * (ur[i] * wr[i] + ui[i] * wi[i]);
            re[base + i] = diag;
            im[base + i] = 0.0;
            pr[i] += sr + diag * vr[i];
            pi[i] += si + diag * vi[i];
        }
        if beta == 0.0 {
            pending = false;
            continue;
        }
        // K = (beta/2) Re(v^H p)
        let mut vp = 0.0;
        for i in lo..n {
            pr[i] *= beta;
            pi[i] *= beta;
            vp += vr[i] * pr[i] + vi[i] * pi[i];
        }
        let kk = 0.5 * beta * vp;
        for i in lo..n {
            ur[i] = vr[i];
            ui[i] = vi[i];
            wr[i] = pr[i] - kk * vr[i];
            wi[i] = pi[i] - kk * vi[i];
        }
        pending = true;
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` couples `i` and `i+1` (`e[n-1]` is
/// ignored). On success `d` holds the eigenvalues (unsorted). When `z` is
/// given (row-major `n x n`), its columns are rotated along, so passing the
/// identity yields the eigenvectors of the tridiagonal matrix as columns.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    const MAX_SWEEPS: usize = 30;
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // Absolute floor keeps clusters of (near) zero eigenvalues deflating.
    let norm = d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::SolverFailure { index: l, sweeps: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for row in z.chunks_exact_mut(n) {
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a tridiagonal matrix, sorted ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}
