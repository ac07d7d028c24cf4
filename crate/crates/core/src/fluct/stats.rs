//! Estimators over replicate records.

use num_complex::Complex64;
use serde::Serialize;

use super::mc::ReplicateRecord;
use crate::error::{Error, Result};

/// Minimum record count for covariance estimates.
pub const MIN_COVARIANCE_RECORDS: usize = 16;

/// Which per-replicate quantity an estimator reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Statistic {
    #[default]
    G,
    GHat,
    TraceG2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub value: Complex64,
    /// Jackknife standard errors of the real and imaginary parts.
    pub stderr: Complex64,
    pub replicates: usize,
}

impl MeanEstimate {
    pub fn stderr_norm(&self) -> f64 {
        self.stderr.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub z1: Complex64,
    pub z2: Complex64,
    pub value: Complex64,
    pub stderr: f64,
    pub replicates: usize,
}

pub fn values_of(records: &[ReplicateRecord], z: Complex64, stat: Statistic) -> Result<Vec<Complex64>> {
    records
        .iter()
        .map(|r| {
            match stat {
                Statistic::G => r.g(z),
                Statistic::GHat => r.g_hat(z),
                Statistic::TraceG2 => r.trace_g2(z),
            }
            .ok_or(Error::MissingProbe(z))
        })
        .collect()
}

/// Mean and delete-one jackknife error of complex samples. For the mean
/// the jackknife reduces to the usual `s / sqrt(R)` per component.
pub fn mean_of_values(values: &[Complex64]) -> Result<MeanEstimate> {
    let r = values.len();
    if r < 2 {
        return Err(Error::SampleSize { needed: 2, got: r });
    }
    let rf = r as f64;
    let shift = values[0];
    let offset = values.iter().map(|v| v - shift).sum::<Complex64>() / rf;
    let mean = shift + offset;
    let (mut sre, mut sim) = (0.0, 0.0);
    for v in values {
        let d = v - shift - offset;
        sre += d.re * d.re;
        sim += d.im * d.im;
    }
    let scale = 1.0 / (rf * (rf - 1.0));
    Ok(MeanEstimate { value: mean, stderr: Complex64::new((sre * scale).sqrt(), (sim * scale).sqrt()), replicates: r })
}

/// Mean of `g(z)` over records.
pub fn mc_mean(records: &[ReplicateRecord], z: Complex64) -> Result<MeanEstimate> {
    mc_mean_of(records, z, Statistic::G)
}

pub fn mc_mean_of(records: &[ReplicateRecord], z: Complex64, stat: Statistic) -> Result<MeanEstimate> {
    mean_of_values(&values_of(records, z, stat)?)
}

/// `(1/R) Σ a_i b_i - mean(a) mean(b)` (no conjugation) with a
/// closed-form delete-one jackknife error.
pub fn covariance_of_values(a: &[Complex64], b: &[Complex64]) -> Result<(Complex64, f64)> {
    let r = a.len();
    if r != b.len() {
        return Err(Error::Shape(format!("{} vs {} samples", a.len(), b.len())));
    }
    if r < MIN_COVARIANCE_RECORDS {
        return Err(Error::SampleSize { needed: MIN_COVARIANCE_RECORDS, got: r });
    }
    let rf = r as f64;
    // shifting both samples leaves the covariance unchanged
    let a: Vec<Complex64> = a.iter().map(|x| x - a[0]).collect();
    let b: Vec<Complex64> = b.iter().map(|y| y - b[0]).collect();
    let sa = a.iter().sum::<Complex64>();
    let sb = b.iter().sum::<Complex64>();
    let sab = a.iter().zip(&b).map(|(x, y)| x * y).sum::<Complex64>();
    let value = sab / rf - (sa / rf) * (sb / rf);
    let leave_out: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| {
            let m = rf - 1.0;
            (sab - x * y) / m - ((sa - x) / m) * ((sb - y) / m)
        })
        .collect();
    let centre = leave_out.iter().sum::<Complex64>() / rf;
    let spread = leave_out.iter().map(|v| (v - centre).norm_sqr()).sum::<f64>();
    Ok((value, ((rf - 1.0) / rf * spread).sqrt()))
}

/// Estimate of `F_n(z1, z2) = E[g°(z1) g°(z2)]`.
pub fn mc_covariance(records: &[ReplicateRecord], z1: Complex64, z2: Complex64) -> Result<CovarianceEstimate> {
    mc_covariance_of(records, z1, z2, Statistic::G)
}

pub fn mc_covariance_of(records: &[ReplicateRecord], z1: Complex64, z2: Complex64, stat: Statistic) -> Result<CovarianceEstimate> {
    let a = values_of(records, z1, stat)?;
    // Conjugate probes are read through the conjugate symmetry of g.
    let b = match values_of(records, z2, stat) {
        Ok(b) => b,
        Err(_) => values_of(records, z2.conj(), stat)?.into_iter().map(|v| v.conj()).collect(),
    };
    let (value, stderr) = covariance_of_values(&a, &b)?;
    Ok(CovarianceEstimate { z1, z2, value, stderr, replicates: records.len() })
}

/// `E|g°(z)|²`, the covariance at `(z, z̄)`.
pub fn mc_variance(records: &[ReplicateRecord], z: Complex64) -> Result<CovarianceEstimate> {
    mc_covariance(records, z, z.conj())
}

/// Kolmogorov distance between the empirical distribution of sorted
/// samples and `cdf`. Runs of equal samples are treated as one jump, and
/// the target's left limit is taken just below the jump so atoms in the
/// target are handled.
pub fn ks_distance(sorted_samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let n = sorted_samples.len();
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    if sorted_samples.windows(2).any(|w| w[0] > w[1]) || sorted_samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Precondition("samples must be sorted".into()));
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = sorted_samples[i];
        let mut j = i;
        while j < n && sorted_samples[j] == x {
            j += 1;
        }
        let above = (j as f64 / nf - cdf(x)).abs();
        let below = (i as f64 / nf - cdf(x.next_down())).abs();
        d = d.max(above).max(below);
        i = j;
    }
    Ok(d.min(1.0))
}

/// Least-squares slope of `log v` against `log size`.
pub fn variance_slope(sizes: &[usize], variances: &[f64]) -> Result<f64> {
    if sizes.len() != variances.len() {
        return Err(Error::Shape(format!("{} sizes, {} variances", sizes.len(), variances.len())));
    }
    if sizes.len() < 3 {
        return Err(Error::SampleSize { needed: 3, got: sizes.len() });
    }
    if let Some(v) = variances.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!("nonpositive variance {v}")));
    }
    if sizes.contains(&0) {
        return Err(Error::Domain("zero size".into()));
    }
    let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all sizes equal".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert!((ks_distance(&[0.5], |x| x.clamp(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        let step = |x: f64| if x >= 1.0 { 1.0 } else if x >= 0.0 { 0.5 } else { 0.0 };
        assert_eq!(ks_distance(&[0.0, 1.0], step).unwrap(), 0.0);
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn slopes() {
        let sizes = [64, 128, 256, 512];
        let v2: Vec<f64> = sizes.iter().map(|&s| 3.0 / (s as f64).powi(2)).collect();
        assert!((variance_slope(&sizes, &v2).unwrap() + 2.0).abs() < 1e-12);
        let v1: Vec<f64> = sizes.iter().map(|&s| 3.0 / s as f64).collect();
        assert!((variance_slope(&sizes, &v1).unwrap() + 1.0).abs() < 1e-12);
        assert!(variance_slope(&sizes, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn constant_samples() {
        let v = vec![Complex64::new(0.3, -0.2); 20];
        let m = mean_of_values(&v).unwrap();
        assert_eq!(m.value, v[0]);
        assert_eq!(m.stderr, Complex64::new(0.0, 0.0));
        let (c, s) = covariance_of_values(&v, &v).unwrap();
        assert!(c.norm() < 1e-15 && s < 1e-15);
    }
}
