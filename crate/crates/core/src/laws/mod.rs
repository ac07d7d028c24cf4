//! Limiting spectral laws: the semicircle, the self-consistent row-mirror
//! law `2f² + (z + 1/z) f + 1 = 0`, and the law forced by the exact block
//! reduction of the row-mirror ensemble.

pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use quadrature::{adaptive_simpson, integrate_with_breaks};

/// Weight of the atom at zero as printed alongside the row-mirror law.
pub const CASE3_PRINTED_ATOM: f64 = 0.25;

/// Imaginary-part margin a root needs to count as upper-half-plane.
pub const QUALIFY_TOL: f64 = 1e-12;

/// Offsets used to extrapolate `Im f(λ + iε)/π` to the real axis.
pub const DENSITY_EPSILONS: [f64; 3] = [1e-4, 5e-5, 2.5e-5];

/// Heights used to extrapolate `y Im f(iy)` to `y = 0`.
pub const RESIDUE_HEIGHTS: [f64; 3] = [1e-3, 1e-4, 1e-5];

const QUAD_TOL: f64 = 1e-10;
const CONTINUATION_STEPS: usize = 400;

/// Support edges `(λ-, λ+) = (sqrt(3 - 2 sqrt2), sqrt(3 + 2 sqrt2))`.
pub fn case3_edges() -> (f64, f64) {
    ((3.0 - 2.0 * SQRT_2).sqrt(), (3.0 + 2.0 * SQRT_2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SelectionRule {
    PositiveImaginaryPart,
    AsymptoticContinuation,
}

/// Which root of a defining quadratic was taken, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSelection {
    pub z: Complex64,
    pub candidates: Vec<Complex64>,
    pub chosen: Complex64,
    pub rule: SelectionRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Equation {
    /// `f² + z f + 1 = 0`
    Semicircle,
    /// `2f² + (z + 1/z) f + 1 = 0`
    Case3,
    /// `2h² + z h + 1 = 0`
    HalfScaled,
}

impl Equation {
    fn coeffs(self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Equation::Semicircle => (one, z, one),
            Equation::Case3 => (2.0 * one, z + 1.0 / z, one),
            Equation::HalfScaled => (2.0 * one, z, one),
        }
    }

    fn residual(self, z: Complex64, f: Complex64) -> Complex64 {
        let (a, b, c) = self.coeffs(z);
        (a * f + b) * f + c
    }

    fn roots(self, z: Complex64) -> [Complex64; 2] {
        let (a, b, c) = self.coeffs(z);
        let d = (b * b - 4.0 * a * c).sqrt();
        let q = if (b.conj() * d).re >= 0.0 { -0.5 * (b + d) } else { -0.5 * (b - d) };
        let mut r = if q == Complex64::new(0.0, 0.0) { [q, q] } else { [q / a, c / q] };
        for f in r.iter_mut() {
            // one Newton step cleans up cancellation in either formula
            let slope = 2.0 * a * *f + b;
            if slope.norm() > 1e-8 * (1.0 + f.norm()) {
                *f -= self.residual(z, *f) / slope;
            }
        }
        r
    }
}

fn check_offaxis(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("stieltjes transform needs Im z != 0, got {z}")));
    }
    Ok(())
}

fn nearest(candidates: &[Complex64; 2], target: Complex64) -> Complex64 {
    if (candidates[0] - target).norm() <= (candidates[1] - target).norm() {
        candidates[0]
    } else {
        candidates[1]
    }
}

/// Follows the root from the `-1/z` asymptote high above `z` straight
/// down to `z`, always taking the candidate nearest the previous value.
fn continue_down(eq: Equation, z: Complex64) -> Complex64 {
    let top = (10.0 * z.norm()).max(10.0);
    let start = Complex64::new(z.re, top);
    let mut f = nearest(&eq.roots(start), -1.0 / start);
    let ratio = (z.im / top).ln();
    for k in 1..=CONTINUATION_STEPS {
        let y = top * (ratio * k as f64 / CONTINUATION_STEPS as f64).exp();
        f = nearest(&eq.roots(Complex64::new(z.re, y)), f);
    }
    f
}

fn select(eq: Equation, z: Complex64) -> Result<RootSelection> {
    check_offaxis(z)?;
    if z.im < 0.0 {
        let mut upper = select(eq, z.conj())?;
        upper.z = z;
        upper.chosen = upper.chosen.conj();
        upper.candidates.iter_mut().for_each(|c| *c = c.conj());
        return Ok(upper);
    }
    let roots = eq.roots(z);
    let qualifying: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > QUALIFY_TOL).collect();
    let (chosen, rule) = if qualifying.len() == 1 {
        (qualifying[0], SelectionRule::PositiveImaginaryPart)
    } else {
        if (roots[0] - roots[1]).norm() <= QUALIFY_TOL {
            return Err(Error::BranchAmbiguity { z, qualifying: qualifying.len() });
        }
        (nearest(&roots, continue_down(eq, z)), SelectionRule::AsymptoticContinuation)
    };
    let scale = 1.0 + chosen.norm() * (1.0 + eq.coeffs(z).1.norm());
    if eq.residual(z, chosen).norm() > 1e-10 * scale {
        return Err(Error::Numerical(format!("root residual too large at z={z}")));
    }
    Ok(RootSelection { z, candidates: roots.to_vec(), chosen, rule })
}

pub fn semicircle_root(z: Complex64) -> Result<RootSelection> {
    select(Equation::Semicircle, z)
}

/// Nevanlinna solution of `f² + z f + 1 = 0`.
pub fn semicircle_stieltjes(z: Complex64) -> Result<Complex64> {
    Ok(semicircle_root(z)?.chosen)
}

pub fn case3_root(z: Complex64) -> Result<RootSelection> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("z = 0".into()));
    }
    select(Equation::Case3, z)
}

/// Nevanlinna solution of `2f² + (z + 1/z) f + 1 = 0`.
pub fn case3_stieltjes(z: Complex64) -> Result<Complex64> {
    Ok(case3_root(z)?.chosen)
}

/// Stieltjes transform of the block law, `(h - 1/z)/2` with
/// `2h² + z h + 1 = 0`.
pub fn blocklaw_stieltjes(z: Complex64) -> Result<Complex64> {
    let h = select(Equation::HalfScaled, z)?.chosen;
    Ok(0.5 * (h - 1.0 / z))
}

pub fn semicircle_density(lambda: f64) -> f64 {
    if lambda.abs() < 2.0 {
        (4.0 - lambda * lambda).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

pub fn semicircle_cdf(lambda: f64) -> f64 {
    if lambda <= -2.0 {
        0.0
    } else if lambda >= 2.0 {
        1.0
    } else {
        let v = 0.5 + lambda * (4.0 - lambda * lambda).sqrt() / (4.0 * PI) + (lambda / 2.0).asin() / PI;
        v.clamp(0.0, 1.0)
    }
}

fn in_case3_support(lambda: f64) -> bool {
    let (lo, hi) = case3_edges();
    let a = lambda.abs();
    a > lo && a < hi
}

/// `sqrt(6 - λ² - λ⁻²) / (4π)` on the support.
pub fn case3_density_closed(lambda: f64) -> f64 {
    if !in_case3_support(lambda) {
        return 0.0;
    }
    let l2 = lambda * lambda;
    (6.0 - l2 - 1.0 / l2).max(0.0).sqrt() / (4.0 * PI)
}

/// The radicand with the sign exactly as printed, `6 - (λ² - λ⁻²)`.
pub fn case3_density_printed(lambda: f64) -> f64 {
    if !in_case3_support(lambda) {
        return 0.0;
    }
    let l2 = lambda * lambda;
    (6.0 - (l2 - 1.0 / l2)).max(0.0).sqrt() / (4.0 * PI)
}

/// `Im f(λ + iε)/π` extrapolated to `ε = 0` from the three offsets in
/// [`DENSITY_EPSILONS`] (eliminates the `O(ε)` and `O(ε²)` terms).
pub fn density_by_extrapolation(stieltjes: impl Fn(Complex64) -> Result<Complex64>, lambda: f64) -> Result<f64> {
    let mut a = [0.0; 3];
    for (slot, eps) in a.iter_mut().zip(DENSITY_EPSILONS) {
        *slot = stieltjes(Complex64::new(lambda, eps))?.im / PI;
    }
    let b1 = 2.0 * a[1] - a[0];
    let b2 = 2.0 * a[2] - a[1];
    Ok((4.0 * b2 - b1) / 3.0)
}

/// Mass of an atom at zero: `lim y Im f(iy)` by polynomial extrapolation
/// through [`RESIDUE_HEIGHTS`].
pub fn atom_residue(stieltjes: impl Fn(Complex64) -> Result<Complex64>) -> Result<f64> {
    let ys = RESIDUE_HEIGHTS;
    let mut a = [0.0; 3];
    for (slot, y) in a.iter_mut().zip(ys) {
        *slot = y * stieltjes(Complex64::new(0.0, y))?.im;
    }
    // Neville at 0: linear through the last two, quadratic through all three
    let lin = |i: usize, j: usize| (ys[j] * a[i] - ys[i] * a[j]) / (ys[j] - ys[i]);
    let p01 = lin(0, 1);
    let p12 = lin(1, 2);
    let quad = (ys[2] * p01 - ys[0] * p12) / (ys[2] - ys[0]);
    let spread = (quad - p12).abs();
    if spread > 1e-4 {
        return Err(Error::Numerical(format!("atom residue extrapolation spread {spread:e}")));
    }
    Ok(quad)
}

pub fn case3_atom_residue() -> Result<f64> {
    atom_residue(case3_stieltjes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LawKind {
    Semicircle,
    Case3,
    Block,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::Semicircle => "semicircle",
            LawKind::Case3 => "case3",
            LawKind::Block => "block",
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "semicircle" | "sc" => Ok(LawKind::Semicircle),
            "case3" => Ok(LawKind::Case3),
            "block" | "blocklaw" => Ok(LawKind::Block),
            other => Err(Error::Domain(format!("unknown law `{other}` (semicircle, case3, block)"))),
        }
    }
}

/// Cumulative integral of the case-3 density over `[λ-, x]`, tabulated on
/// a uniform grid and finished by adaptive quadrature.
#[derive(Debug)]
struct PanelTable {
    lo: f64,
    step: f64,
    cumulative: Vec<f64>,
}

impl PanelTable {
    const PANELS: usize = 256;

    fn build(density: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Self {
        let step = (hi - lo) / Self::PANELS as f64;
        let mut cumulative = vec![0.0; Self::PANELS + 1];
        let tol = QUAD_TOL / Self::PANELS as f64;
        for k in 0..Self::PANELS {
            let a = lo + step * k as f64;
            cumulative[k + 1] = cumulative[k] + adaptive_simpson(&density, a, a + step, tol);
        }
        Self { lo, step, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn upto(&self, x: f64, density: impl Fn(f64) -> f64) -> f64 {
        let k = (((x - self.lo) / self.step).floor().max(0.0) as usize).min(Self::PANELS - 1);
        let a = self.lo + self.step * k as f64;
        self.cumulative[k] + adaptive_simpson(density, a, x, QUAD_TOL / Self::PANELS as f64)
    }
}

/// A limiting spectral law: continuous density, atoms, CDF and Stieltjes
/// transform.
#[derive(Debug, Clone)]
pub struct SpectralLaw {
    kind: LawKind,
    atoms: Vec<(f64, f64)>,
    edges: Vec<f64>,
    table: Option<Arc<PanelTable>>,
}

/// Boundary value `Im f(λ + i0)/π`: on the support the two roots at real
/// `λ` form a conjugate pair and the limit from above is the upper one.
fn case3_density_solved(lambda: f64) -> f64 {
    if !in_case3_support(lambda) {
        return 0.0;
    }
    let roots = Equation::Case3.roots(Complex64::new(lambda, 0.0));
    roots[0].im.abs().max(roots[1].im.abs()) / PI
}

pub fn semicircle_law() -> SpectralLaw {
    SpectralLaw { kind: LawKind::Semicircle, atoms: Vec::new(), edges: vec![-2.0, 2.0], table: None }
}

/// The row-mirror law solved from its self-consistent equation: density
/// from the boundary values of the root, atom mass from the residue.
pub fn case3_paper_law() -> SpectralLaw {
    static CACHE: OnceLock<SpectralLaw> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let (lo, hi) = case3_edges();
            let atom = case3_atom_residue().expect("residue extrapolation converges for the case-3 equation");
            let table = PanelTable::build(case3_density_solved, lo, hi);
            SpectralLaw { kind: LawKind::Case3, atoms: vec![(0.0, atom)], edges: vec![-hi, -lo, lo, hi], table: Some(Arc::new(table)) }
        })
        .clone()
}

/// Half an atom at zero plus half a semicircle on `[-2 sqrt2, 2 sqrt2]`.
pub fn blocklaw() -> SpectralLaw {
    let e = 2.0 * SQRT_2;
    SpectralLaw { kind: LawKind::Block, atoms: vec![(0.0, 0.5)], edges: vec![-e, e], table: None }
}

pub fn law_by_kind(kind: LawKind) -> SpectralLaw {
    match kind {
        LawKind::Semicircle => semicircle_law(),
        LawKind::Case3 => case3_paper_law(),
        LawKind::Block => blocklaw(),
    }
}

impl SpectralLaw {
    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Continuous part, per unit λ.
    pub fn density(&self, lambda: f64) -> f64 {
        match self.kind {
            LawKind::Semicircle => semicircle_density(lambda),
            LawKind::Case3 => case3_density_solved(lambda),
            LawKind::Block => 0.5 * semicircle_density(lambda / SQRT_2) / SQRT_2,
        }
    }

    /// Right-continuous distribution function.
    pub fn cdf(&self, lambda: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|(x, _)| *x <= lambda).map(|(_, m)| m).sum();
        let continuous = match self.kind {
            LawKind::Semicircle => semicircle_cdf(lambda),
            LawKind::Block => 0.5 * semicircle_cdf(lambda / SQRT_2),
            LawKind::Case3 => {
                let table = self.table.as_ref().expect("case-3 law carries its table");
                let (lo, hi) = case3_edges();
                let half = table.total();
                let a = lambda.abs();
                let inner = if a <= lo {
                    0.0
                } else if a >= hi {
                    half
                } else {
                    table.upto(a, case3_density_solved)
                };
                if lambda >= 0.0 {
                    half + inner
                } else {
                    half - inner
                }
            }
        };
        (atoms + continuous).clamp(0.0, 1.0)
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        match self.kind {
            LawKind::Semicircle => semicircle_stieltjes(z),
            LawKind::Case3 => case3_stieltjes(z),
            LawKind::Block => blocklaw_stieltjes(z),
        }
    }

    /// `∫ density` by quadrature, split at the support edges.
    pub fn continuous_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    fn integrate(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        integrate_with_breaks(|x| weight(x) * self.density(x), lo, hi, &self.edges, QUAD_TOL)
    }
}

/// `Σ atoms x^k m + ∫ λ^k density`, `k ≤ 8`.
pub fn law_moment(law: &SpectralLaw, k: usize) -> Result<f64> {
    if k > 8 {
        return Err(Error::UnsupportedOrder(k));
    }
    let atoms: f64 = law.atoms().iter().map(|(x, m)| x.powi(k as i32) * m).sum();
    Ok(atoms + law.integrate(|x| x.powi(k as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn semicircle_examples() {
        let f = semicircle_stieltjes(c(0.0, 2.0)).unwrap();
        assert!((f - c(0.0, SQRT_2 - 1.0)).norm() < 1e-15);
        let r = semicircle_root(c(3.0, 1e-13)).unwrap();
        assert_eq!(r.rule, SelectionRule::AsymptoticContinuation);
        assert!((r.chosen.re - (-3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-9);
        let z = c(60.0, 80.0);
        assert!((z * semicircle_stieltjes(z).unwrap() + 1.0).norm() < 1.1e-4);
        assert!(matches!(semicircle_stieltjes(c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn semicircle_density_and_cdf() {
        assert!((semicircle_density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_density(2.0), 0.0);
        assert_eq!(semicircle_density(-2.0), 0.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        assert_eq!(semicircle_cdf(-7.0), 0.0);
    }

    #[test]
    fn case3_examples() {
        let f = case3_stieltjes(c(0.0, 1.0)).unwrap();
        assert!((f - c(0.0, 1.0 / SQRT_2)).norm() < 1e-15);
        let f2 = case3_stieltjes(c(0.0, 2.0)).unwrap();
        assert!((f2 - c(0.0, (-1.5 + 10.25f64.sqrt()) / 4.0)).norm() < 1e-15);
        assert!((f2.im - 0.425390).abs() < 1e-6);
        assert!(matches!(case3_stieltjes(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn blocklaw_examples() {
        assert!((blocklaw_stieltjes(c(0.0, 1.0)).unwrap() - c(0.0, 0.75)).norm() < 1e-15);
        let f = blocklaw_stieltjes(c(0.0, 2.0)).unwrap();
        assert!((f.im - 0.433013).abs() < 1e-6);
        let h = select(Equation::HalfScaled, c(0.0, 2.0)).unwrap().chosen;
        assert!((h - c(0.0, (3f64.sqrt() - 1.0) / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn case3_edges_and_closed_density() {
        let (lo, hi) = case3_edges();
        assert!((lo - 0.414214).abs() < 1e-6 && (hi - 2.414214).abs() < 1e-6);
        assert_eq!(case3_density_closed(lo), 0.0);
        assert_eq!(case3_density_closed(hi), 0.0);
        assert!((case3_density_closed(1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        // the radicand as printed does not vanish at the edges
        let l2 = hi * hi;
        assert!(6.0 - (l2 - 1.0 / l2) > 0.3);
        assert!(case3_density_printed(1.0) > 0.0);
    }

    #[test]
    fn residues() {
        let a = case3_atom_residue().unwrap();
        assert!((a - 0.5).abs() < 1e-4);
        let y = 1e-3;
        assert!((y * case3_stieltjes(c(0.0, y)).unwrap().im - 0.5).abs() < 1e-3);
        assert!(atom_residue(semicircle_stieltjes).unwrap().abs() < 1e-6);
        assert!((atom_residue(blocklaw_stieltjes).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn moments() {
        let sc = semicircle_law();
        assert!((law_moment(&sc, 2).unwrap() - 1.0).abs() < 1e-8);
        assert!((law_moment(&sc, 4).unwrap() - 2.0).abs() < 1e-8);
        assert!(matches!(law_moment(&sc, 9), Err(Error::UnsupportedOrder(9))));
        for law in [semicircle_law(), case3_paper_law(), blocklaw()] {
            assert!(law_moment(&law, 1).unwrap().abs() < 1e-9);
            let m0 = law_moment(&law, 0).unwrap();
            assert!((m0 - 1.0).abs() < 1e-8, "{} mass {m0}", law.name());
        }
    }

    #[test]
    fn law_names_parse() {
        for kind in [LawKind::Semicircle, LawKind::Case3, LawKind::Block] {
            assert_eq!(kind.name().parse::<LawKind>().unwrap(), kind);
        }
        assert!("nope".parse::<LawKind>().is_err());
    }
}
