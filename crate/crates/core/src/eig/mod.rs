//! Eigensolvers, resolvents and spectral functionals.

mod dense;
mod structured;
pub mod tridiag;

use num_complex::Complex64;

use crate::domain::{pos, ComplexMatrix, HermitianMatrix, Spectrum, SymmetryClass};
use crate::error::{Error, Result};
use crate::sampler::validate_symmetry;

pub use structured::Sectors;

/// Absolute threshold below which an eigenvalue counts as a forced zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Largest class-symmetry deviation accepted by the structured solvers.
pub const STRUCTURE_TOL: f64 = 1e-12;

const NEAR_REAL: f64 = 1e-12;

fn spectrum(eigenvalues: Vec<f64>) -> Result<Spectrum> {
    Spectrum::from_eigenvalues(eigenvalues).map_err(|_| Error::Numerical("eigensolver produced NaN".into()))
}

/// Dense Hermitian eigensolver. Eigenvalues only unless `want_basis`.
pub fn eigh(w: &HermitianMatrix, want_basis: bool) -> Result<Spectrum> {
    if want_basis {
        let (values, basis) = dense::hermitian_eigen_with_basis(&w.to_complex_matrix())?;
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("eigensolver produced NaN".into()));
        }
        Ok(Spectrum::with_basis(values, basis))
    } else {
        spectrum(structured::dense_eigenvalues(w)?)
    }
}

/// Eigenvalues split by mirror parity for the classes that commute with the
/// mirror, through the exact block reductions.
pub fn eigh_sectors(w: &HermitianMatrix, class: SymmetryClass) -> Result<Sectors> {
    let deviation = validate_symmetry(w, class);
    if deviation > STRUCTURE_TOL {
        return Err(Error::Precondition(format!("{class} symmetry deviation {deviation:e} exceeds {STRUCTURE_TOL:e}")));
    }
    structured::sector_eigenvalues(w, class)
}

/// Structure-exploiting eigensolver; the multiset agrees with [`eigh`].
pub fn eigh_structured(w: &HermitianMatrix, class: SymmetryClass) -> Result<Spectrum> {
    spectrum(eigh_sectors(w, class)?.merged())
}

/// `G(z) = (W - z)^{-1}` with signed-site addressing.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventMatrix {
    z: Complex64,
    n: usize,
    entries: ComplexMatrix,
}

impl ResolventMatrix {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn half_size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn get(&self, x: i64, y: i64) -> Result<Complex64> {
        Ok(self.entries.at(pos(x, self.n)?, pos(y, self.n)?))
    }

    /// `g(z) = (1/2n) Tr G`.
    pub fn g(&self) -> Complex64 {
        self.entries.normalized_trace()
    }

    /// `ĝ(z) = (1/2n) Σ G_{x,-x}`.
    pub fn g_hat(&self) -> Complex64 {
        anti_trace(&self.entries).expect("resolvent side is even")
    }

    /// `(1/2n) Tr P G` with `P_xy = G_{y,-x}`.
    pub fn trace_pg(&self) -> Complex64 {
        let side = 2 * self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..side {
            let row = self.entries.row(y);
            for x in 0..side {
                acc += row[side - 1 - x] * row[x];
            }
        }
        acc / side as f64
    }

    /// `max |((W - z) G - I)_{jk}|`.
    pub fn defect(&self, w: &HermitianMatrix) -> f64 {
        let mut shifted = w.to_complex_matrix();
        for i in 0..shifted.dim() {
            *shifted.at_mut(i, i) -= self.z;
        }
        let prod = shifted.matmul(&self.entries);
        let mut worst: f64 = 0.0;
        for i in 0..prod.dim() {
            for j in 0..prod.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod.at(i, j) - target).norm());
            }
        }
        worst
    }
}

fn check_off_axis(z: Complex64) -> Result<()> {
    if z.im.abs() < NEAR_REAL || !z.is_finite() {
        return Err(Error::NearRealAxis(z));
    }
    Ok(())
}

/// Resolvent by complex LU with partial pivoting.
pub fn resolvent_matrix(w: &HermitianMatrix, z: Complex64) -> Result<ResolventMatrix> {
    check_off_axis(z)?;
    let mut shifted = w.to_complex_matrix();
    for i in 0..shifted.dim() {
        *shifted.at_mut(i, i) -= z;
    }
    let entries = dense::ComplexLu::factor(&shifted)?.inverse();
    Ok(ResolventMatrix { z, n: w.half_size(), entries })
}

/// Resolvent assembled from an eigenbasis, `U diag(1/(λ - z)) U†`; cheaper
/// than LU once several `z` share one decomposition.
pub fn resolvent_from_basis(s: &Spectrum, z: Complex64) -> Result<ResolventMatrix> {
    check_off_axis(z)?;
    let basis = s.basis().ok_or_else(|| Error::Precondition("spectrum carries no eigenbasis".into()))?;
    let side = basis.dim();
    let weights: Vec<Complex64> = s.eigenvalues().iter().map(|&l| 1.0 / (l - z)).collect();
    let mut entries = ComplexMatrix::zeros(side);
    for i in 0..side {
        let ui: Vec<Complex64> = basis.row(i).iter().zip(&weights).map(|(u, w)| u * w).collect();
        for j in 0..side {
            *entries.at_mut(i, j) = ui.iter().zip(basis.row(j)).map(|(a, b)| a * b.conj()).sum();
        }
    }
    Ok(ResolventMatrix { z, n: side / 2, entries })
}

fn check_nonreal(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("spectral parameter {z} must be off the real axis")));
    }
    Ok(())
}

/// `(1/N) Σ 1/(λ_i - z)` over a raw eigenvalue list.
pub fn stieltjes_sum(eigenvalues: &[f64], z: Complex64) -> Result<Complex64> {
    check_nonreal(z)?;
    let s: Complex64 = eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
    Ok(s / eigenvalues.len() as f64)
}

/// `(1/N) Σ 1/(λ_i - z)^2` over a raw eigenvalue list.
pub fn resolvent_square_sum(eigenvalues: &[f64], z: Complex64) -> Result<Complex64> {
    check_nonreal(z)?;
    let s: Complex64 = eigenvalues
        .iter()
        .map(|&l| {
            let r = 1.0 / (l - z);
            r * r
        })
        .sum();
    Ok(s / eigenvalues.len() as f64)
}

/// Stieltjes transform of the normalized counting measure.
pub fn stieltjes_from_spectrum(s: &Spectrum, z: Complex64) -> Result<Complex64> {
    stieltjes_sum(s.eigenvalues(), z)
}

/// `(1/2n) Tr G(z)^2`.
pub fn trace_resolvent_square(s: &Spectrum, z: Complex64) -> Result<Complex64> {
    resolvent_square_sum(s.eigenvalues(), z)
}

/// `(1/2n) Σ_x M_{x,-x}` for a matrix of side `2n` in raw ordering.
pub fn anti_trace(m: &ComplexMatrix) -> Result<Complex64> {
    let side = m.dim();
    if side == 0 || side % 2 == 1 {
        return Err(Error::Shape(format!("anti-trace needs an even side, got {side}")));
    }
    let s: Complex64 = (0..side).map(|p| m.at(p, side - 1 - p)).sum();
    Ok(s / side as f64)
}

/// Fraction of eigenvalues with `|λ| < tol`.
pub fn atom_mass_estimate(s: &Spectrum, tol: f64) -> f64 {
    zero_count(s.eigenvalues(), tol) as f64 / s.len() as f64
}

pub fn zero_count(eigenvalues: &[f64], tol: f64) -> usize {
    eigenvalues.iter().filter(|l| l.abs() < tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn swap2() -> HermitianMatrix {
        HermitianMatrix::from_rows(1, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn two_by_two_examples() {
        let s = eigh(&swap2(), false).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15 && (s.eigenvalues()[1] - 1.0).abs() < 1e-15);
        let d = HermitianMatrix::from_rows(1, vec![c(0.7, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.3, 0.0)]).unwrap();
        assert_eq!(eigh(&d, true).unwrap().eigenvalues(), &[-0.3, 0.7]);
    }

    #[test]
    fn resolvent_of_swap_at_i() {
        let g = resolvent_matrix(&swap2(), c(0.0, 1.0)).unwrap();
        let expect = [[c(0.0, 0.5), c(0.5, 0.0)], [c(0.5, 0.0), c(0.0, 0.5)]];
        for (i, row) in expect.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((g.entries().at(i, j) - v).norm() < 1e-15);
            }
        }
        assert!((g.g_hat() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(g.defect(&swap2()) < 1e-15);
    }

    #[test]
    fn near_real_axis_rejected() {
        assert!(matches!(resolvent_matrix(&swap2(), c(1.0, 1e-13)), Err(Error::NearRealAxis(_))));
        assert!(matches!(stieltjes_sum(&[1.0], c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn functional_examples() {
        let s = Spectrum::from_eigenvalues(vec![-1.0, 1.0]).unwrap();
        assert!((stieltjes_from_spectrum(&s, c(0.0, 1.0)).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
        assert!(trace_resolvent_square(&s, c(0.0, 1.0)).unwrap().norm() < 1e-15);
        let z = s.eigenvalues();
        assert_eq!(zero_count(z, 1e-8), 0);
        let atoms = Spectrum::from_eigenvalues(vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(atom_mass_estimate(&atoms, 1e-8), 0.5);
        assert_eq!(anti_trace(&ComplexMatrix::identity(6)).unwrap(), c(0.0, 0.0));
        assert!(matches!(anti_trace(&ComplexMatrix::identity(3)), Err(Error::Shape(_))));
    }

    #[test]
    fn row_mirror_rank_one() {
        let a = 0.37;
        let w = HermitianMatrix::from_rows(1, vec![c(a, 0.0); 4]).unwrap();
        let s = eigh_structured(&w, SymmetryClass::RowMirror3).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 2.0 * a]);
    }

    #[test]
    fn structured_rejects_asymmetric_input() {
        let w = HermitianMatrix::from_rows(1, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!(matches!(eigh_structured(&w, SymmetryClass::Central2), Err(Error::Precondition(_))));
    }
}
