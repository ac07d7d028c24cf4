//! Limiting correlator formulas and the `(1/2n) Tr G²` limits.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::{case3_stieltjes, semicircle_stieltjes};

/// Below this separation the semicircle correlator switches to its
/// confluent form and the case-3 formula refuses to evaluate.
pub const CONFLUENT_GAP: f64 = 1e-6;

fn semicircle_derivative(z: Complex64, f: Complex64) -> Complex64 {
    -f / (z + 2.0 * f)
}

fn case3_derivative(z: Complex64, f: Complex64) -> Complex64 {
    let zi = 1.0 / z;
    -f * (1.0 - zi * zi) / (z + zi + 4.0 * f)
}

/// GOE-type correlator `2 / ((1 - f1²)(1 - f2²)) * ((f1 - f2)/(z1 - z2))²`.
pub fn s_goe(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let f1 = semicircle_stieltjes(z1)?;
    let f2 = semicircle_stieltjes(z2)?;
    let slope = if (z1 - z2).norm() < CONFLUENT_GAP {
        semicircle_derivative(z1, f1)
    } else {
        (f1 - f2) / (z1 - z2)
    };
    Ok(2.0 / ((1.0 - f1 * f1) * (1.0 - f2 * f2)) * slope * slope)
}

/// Half of [`s_goe`].
pub fn s_gue(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    Ok(0.5 * s_goe(z1, z2)?)
}

/// Row-mirror correlator exactly as printed, with `f` the solution of
/// `2f² + (z + 1/z) f + 1 = 0`. Diverges like `(z1 - z2)^-2`.
pub fn c_case3(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    if (z1 - z2).norm() < CONFLUENT_GAP {
        return Err(Error::CoincidentPoints(z1, z2));
    }
    let f1 = case3_stieltjes(z1)?;
    let f2 = case3_stieltjes(z2)?;
    let d = z1 - z2;
    let first = 2.0 * (f1 * f1 + f2 * f2) / (f1 * f2 * d * d);
    let second = (z2 * f2 + z1 * f1) / (2.0 * z1 * z1 * z2 * z2 * f1 * f2);
    let denom = (z1 + 1.0 / z1 + 4.0 * f1) * (z2 + 1.0 / z2 + 4.0 * f2);
    Ok((first + second) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceLaw {
    Semicircle,
    Case3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum TraceVariant {
    /// `d f / dz` by implicit differentiation.
    #[default]
    Derivative,
    /// The right-hand sides as printed: `f/(1 - f²)` and
    /// `-(f/z)(1 - z⁻²)/(1 + f z⁻¹ + z⁻²)`.
    AsPrinted,
}

/// Limit of `(1/2n) Tr G(z)²`.
pub fn tr_g2_limit(law: TraceLaw, z: Complex64, variant: TraceVariant) -> Result<Complex64> {
    match law {
        TraceLaw::Semicircle => {
            let f = semicircle_stieltjes(z)?;
            Ok(match variant {
                TraceVariant::Derivative => semicircle_derivative(z, f),
                TraceVariant::AsPrinted => f / (1.0 - f * f),
            })
        }
        TraceLaw::Case3 => {
            let f = case3_stieltjes(z)?;
            Ok(match variant {
                TraceVariant::Derivative => case3_derivative(z, f),
                TraceVariant::AsPrinted => {
                    let zi = 1.0 / z;
                    -(f * zi) * (1.0 - zi * zi) / (1.0 + f * zi + zi * zi)
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn goe_examples() {
        let s = s_goe(c(0.0, 2.0), c(0.0, 2.0)).unwrap();
        assert!((s - c(1.0 / 32.0, 0.0)).norm() < 1e-15);
        let s = s_goe(c(0.0, 2.0), c(0.0, 3.0)).unwrap();
        assert!((s.re - 0.019419).abs() < 1e-6 && s.im.abs() < 1e-15);
        assert!((s_gue(c(0.0, 2.0), c(0.0, 2.0)).unwrap().re - 1.0 / 64.0).abs() < 1e-15);
        assert!((s_gue(c(0.0, 2.0), c(0.0, 3.0)).unwrap().re - 0.0097095).abs() < 5e-7);
    }

    #[test]
    fn case3_correlator_example() {
        let v = c_case3(c(0.0, 1.0), c(0.0, 2.0)).unwrap();
        // independent evaluation of the printed formula gives 0.4285065
        assert!((v.re - 0.4285065).abs() < 1e-6, "{v}");
        assert!((v.re - 0.428501).abs() < 1e-5);
        assert!(v.im.abs() < 1e-12);
        assert!(matches!(c_case3(c(0.0, 1.0), c(0.0, 1.0)), Err(Error::CoincidentPoints(..))));
    }

    #[test]
    fn trace_limits() {
        let v = tr_g2_limit(TraceLaw::Semicircle, c(0.0, 2.0), TraceVariant::Derivative).unwrap();
        assert!((v - c(-(1.0 - 0.5f64.sqrt()) / 2.0, 0.0)).norm() < 1e-15);
        let v = tr_g2_limit(TraceLaw::Case3, c(0.0, 1.0), TraceVariant::Derivative).unwrap();
        assert!((v - c(-0.5, 0.0)).norm() < 1e-15);
    }
}
