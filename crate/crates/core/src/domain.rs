//! Signed-site conventions and the value types shared by every module.
//!
//! Matrices in this crate are `2n x 2n` and their rows and columns are
//! labelled by signed sites `x in {-n, ..., -1, 1, ..., n}`. Site `0` does
//! not exist. Storage is row-major over array positions `pos(x) in 0..2n`,
//! which run `-n, ..., -1, 1, ..., n` in order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps a signed site onto its array position.
pub fn pos(x: i64, n: usize) -> Result<usize> {
    let ni = n as i64;
    if x == 0 || x < -ni || x > ni {
        return Err(Error::SiteOutOfDomain { site: x, n });
    }
    Ok(if x < 0 { (x + ni) as usize } else { (x + ni - 1) as usize })
}

/// Inverse of [`pos`].
pub fn site(p: usize, n: usize) -> Result<i64> {
    if p >= 2 * n {
        return Err(Error::IndexOutOfRange { index: p, side: 2 * n });
    }
    let ni = n as i64;
    let p = p as i64;
    Ok(if p < ni { p - ni } else { p - ni + 1 })
}

/// Array position of the mirrored site `-x`, given the position of `x`.
#[inline]
pub(crate) fn mirror_pos(p: usize, n: usize) -> usize {
    2 * n - 1 - p
}

/// The five ensembles: plain GUE and the four index symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymmetryClass {
    /// No constraint beyond Hermiticity.
    Plain,
    /// `W[x][y] = W[-y][-x]`.
    Flip1,
    /// `W[x][y] = W[-x][-y]`.
    Central2,
    /// `W[x][y] = W[-x][y]`.
    RowMirror3,
    /// `W[x][y] = W[y][-x]`.
    Quarter4,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 5] = [
        SymmetryClass::Plain,
        SymmetryClass::Flip1,
        SymmetryClass::Central2,
        SymmetryClass::RowMirror3,
        SymmetryClass::Quarter4,
    ];

    /// Numeric tag: 0 for plain, 1..=4 for the symmetry cases.
    pub fn index(self) -> u8 {
        match self {
            SymmetryClass::Plain => 0,
            SymmetryClass::Flip1 => 1,
            SymmetryClass::Central2 => 2,
            SymmetryClass::RowMirror3 => 3,
            SymmetryClass::Quarter4 => 4,
        }
    }

    pub fn from_index(tag: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.index() == tag)
            .ok_or_else(|| Error::InvalidClass(tag.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Plain => "plain",
            SymmetryClass::Flip1 => "flip1",
            SymmetryClass::Central2 => "central2",
            SymmetryClass::RowMirror3 => "rowmirror3",
            SymmetryClass::Quarter4 => "quarter4",
        }
    }

    /// The position map `sigma` whose invariance defines the class, on
    /// signed sites. `None` for [`SymmetryClass::Plain`].
    pub fn map(self, x: i64, y: i64) -> Option<(i64, i64)> {
        match self {
            SymmetryClass::Plain => None,
            SymmetryClass::Flip1 => Some((-y, -x)),
            SymmetryClass::Central2 => Some((-x, -y)),
            SymmetryClass::RowMirror3 => Some((-x, y)),
            SymmetryClass::Quarter4 => Some((y, -x)),
        }
    }

    /// Same map on array positions.
    #[inline]
    pub(crate) fn map_pos(self, p: usize, q: usize, n: usize) -> Option<(usize, usize)> {
        let m = |i| mirror_pos(i, n);
        match self {
            SymmetryClass::Plain => None,
            SymmetryClass::Flip1 => Some((m(q), m(p))),
            SymmetryClass::Central2 => Some((m(p), m(q))),
            SymmetryClass::RowMirror3 => Some((m(p), q)),
            SymmetryClass::Quarter4 => Some((q, m(p))),
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let class = match key.as_str() {
            "plain" | "gue" | "0" => SymmetryClass::Plain,
            "flip1" | "flip" | "1" => SymmetryClass::Flip1,
            "central2" | "central" | "2" => SymmetryClass::Central2,
            "rowmirror3" | "rowmirror" | "3" => SymmetryClass::RowMirror3,
            "quarter4" | "quarter" | "4" => SymmetryClass::Quarter4,
            _ => return Err(Error::InvalidClass(s.to_string())),
        };
        Ok(class)
    }
}

/// Everything needed to sample one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub class: SymmetryClass,
    /// Half-size; the matrix side is `2n`.
    pub n: usize,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(class: SymmetryClass, n: usize, master_seed: u64) -> Result<Self> {
        let spec = Self { class, n, master_seed };
        validate_spec(&spec)?;
        Ok(spec)
    }

    pub fn side(&self) -> usize {
        2 * self.n
    }

    /// `E|W_xy|^2 = 1/(2n)`.
    pub fn entry_variance(&self) -> f64 {
        1.0 / (2.0 * self.n as f64)
    }
}

/// Accepts a spec iff `n >= 1`. Class membership is enforced when the class
/// is parsed, see [`SymmetryClass::from_str`] and [`SymmetryClass::from_index`].
pub fn validate_spec(spec: &EnsembleSpec) -> Result<()> {
    if spec.n == 0 {
        return Err(Error::InvalidSize(spec.n));
    }
    Ok(())
}

/// Dense square complex matrix in row-major order, addressed by array
/// position. Used for resolvents, products of resolvents and eigenbases.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Shape(format!("expected {} entries, got {}", dim * dim, data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Entry at signed sites, for matrices of side `2n`.
    pub fn get(&self, x: i64, y: i64) -> Result<Complex64> {
        let n = self.half_size()?;
        Ok(self.at(pos(x, n)?, pos(y, n)?))
    }

    fn half_size(&self) -> Result<usize> {
        if self.dim % 2 != 0 || self.dim == 0 {
            return Err(Error::Shape(format!("side {} is not a positive even number", self.dim)));
        }
        Ok(self.dim / 2)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            let out_row = &mut out.data[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(&other.data[k * d..(k + 1) * d]) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    /// `(1/dim) Tr M`.
    pub fn normalized_trace(&self) -> Complex64 {
        self.trace() / self.dim as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Dense `2n x 2n` Hermitian matrix. The lower and upper triangles are
/// kept bitwise conjugate and the diagonal is exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        Ok(Self { n, data: vec![Complex64::new(0.0, 0.0); 4 * n * n] })
    }

    /// Builds from a full row-major array, rejecting anything that is not
    /// exactly Hermitian.
    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        let side = 2 * n;
        if data.len() != side * side {
            return Err(Error::Shape(format!("expected {} entries, got {}", side * side, data.len())));
        }
        for p in 0..side {
            for q in 0..=p {
                let a = data[p * side + q];
                let b = data[q * side + p].conj();
                if a != b {
                    return Err(Error::NotHermitian((a - b).norm(), p, q));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a function of signed sites evaluated on the lower
    /// triangle; the upper triangle is filled by conjugation and the
    /// diagonal keeps only the real part.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(i64, i64) -> Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        let ni = n as i64;
        let label = |p: usize| if (p as i64) < ni { p as i64 - ni } else { p as i64 - ni + 1 };
        Ok(Self::from_lower_raw(n, |p, q| f(label(p), label(q))))
    }

    /// Same as [`Self::from_lower_fn`] over array positions. `n >= 1`.
    pub(crate) fn from_lower_raw(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        const TILE: usize = 32;
        let side = 2 * n;
        let mut data = vec![Complex64::new(0.0, 0.0); side * side];
        for p in 0..side {
            let row = &mut data[p * side..p * side + p + 1];
            for (q, slot) in row.iter_mut().enumerate() {
                *slot = f(p, q);
            }
            row[p].im = 0.0;
        }
        // mirror tile by tile so the strided writes stay in cache
        for pb in (0..side).step_by(TILE) {
            for qb in (0..=pb).step_by(TILE) {
                for p in pb..(pb + TILE).min(side) {
                    for q in qb..(qb + TILE).min(p) {
                        data[q * side + p] = data[p * side + q].conj();
                    }
                }
            }
        }
        Self { n, data }
    }

    pub fn half_size(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, x: i64, y: i64) -> Result<Complex64> {
        Ok(self.at(pos(x, self.n)?, pos(y, self.n)?))
    }

    /// Sets `(x,y)` and its Hermitian partner `(y,x)`.
    pub fn set(&mut self, x: i64, y: i64, value: Complex64) -> Result<()> {
        let (p, q) = (pos(x, self.n)?, pos(y, self.n)?);
        self.set_raw(p, q, value);
        Ok(())
    }

    #[inline]
    pub(crate) fn at(&self, p: usize, q: usize) -> Complex64 {
        self.data[p * 2 * self.n + q]
    }

    pub(crate) fn set_raw(&mut self, p: usize, q: usize, value: Complex64) {
        let side = 2 * self.n;
        if p == q {
            self.data[p * side + p] = Complex64::new(value.re, 0.0);
        } else {
            self.data[p * side + q] = value;
            self.data[q * side + p] = value.conj();
        }
    }

    /// Row-major entries as `(x, y, value)` over signed sites.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let side = self.side();
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, v)| {
            let x = site(k / side, n).expect("position in range");
            let y = site(k % side, n).expect("position in range");
            (x, y, *v)
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |W_xy - conj(W_yx)|`; zero for every value of this type.
    pub fn hermiticity_deviation(&self) -> f64 {
        let side = self.side();
        let mut worst = 0.0_f64;
        for p in 0..side {
            for q in 0..=p {
                worst = worst.max((self.at(p, q) - self.at(q, p).conj()).norm());
            }
        }
        worst
    }

    pub fn to_complex_matrix(&self) -> ComplexMatrix {
        ComplexMatrix { dim: self.side(), data: self.data.clone() }
    }

    /// `W v` for a vector indexed by array position.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let side = self.side();
        (0..side)
            .map(|p| self.data[p * side..(p + 1) * side].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Ascending eigenvalues, optionally with an orthonormal eigenbasis whose
/// column `i` belongs to eigenvalue `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    basis: Option<ComplexMatrix>,
}

impl Spectrum {
    /// Sorts the given values; NaNs are rejected.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("NaN eigenvalue".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self { eigenvalues, basis: None })
    }

    pub(crate) fn with_basis(eigenvalues: Vec<f64>, basis: ComplexMatrix) -> Self {
        Self { eigenvalues, basis: Some(basis) }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn into_eigenvalues(self) -> Vec<f64> {
        self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn basis(&self) -> Option<&ComplexMatrix> {
        self.basis.as_ref()
    }

    /// Eigenvector `i` as a column, if the basis was requested.
    pub fn vector(&self, i: usize) -> Option<Vec<Complex64>> {
        let b = self.basis.as_ref()?;
        Some((0..b.dim()).map(|r| b.at(r, i)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}
