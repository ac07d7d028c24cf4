//! Adaptive Simpson quadrature.

const MAX_DEPTH: u32 = 48;

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m - a <= f64::EPSILON * a.abs().max(1.0) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (Richardson-corrected Simpson).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, tol);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, fa, b, fb, m, fm, whole, tol, MAX_DEPTH)
}

/// Integral over `[a, b]` split at every interior breakpoint, with the
/// tolerance shared between the pieces.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    let share = tol / (points.len() - 1) as f64;
    points.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], share)).sum()
}
