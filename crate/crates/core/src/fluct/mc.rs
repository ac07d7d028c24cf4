//! Monte Carlo replicates: per-replicate Stieltjes values and extras.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{EnsembleSpec, HermitianMatrix, SymmetryClass};
use crate::eig::{anti_trace, eigh_sectors, resolvent_matrix, resolvent_square_sum, stieltjes_sum, zero_count, Sectors, ZERO_EIGENVALUE_TOL};
use crate::error::{Error, Result};
use crate::sampler::{validate_symmetry, Sampler};

/// Optional per-replicate quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Extras {
    pub anti_trace: bool,
    pub atom_count: bool,
    pub max_abs: bool,
    pub trace_g2: bool,
    pub eigenvalues: bool,
    pub identities: bool,
}

impl Extras {
    pub fn any(&self) -> bool {
        self.anti_trace || self.atom_count || self.max_abs || self.trace_g2 || self.eigenvalues || self.identities
    }
}

/// Residual of one exact per-sample identity. `asserted` is false for
/// negative controls that are expected to fail for the class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub asserted: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecordExtras {
    /// `ĝ(z)` per probe.
    pub g_hat: Option<Vec<Complex64>>,
    pub atom_count: Option<usize>,
    pub max_abs_eigenvalue: Option<f64>,
    /// `(1/2n) Tr G(z)²` per probe.
    pub trace_g2: Option<Vec<Complex64>>,
    pub eigenvalues: Option<Vec<f64>>,
    pub identities: Option<BTreeMap<String, IdentityCheck>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub size_2n: usize,
    pub class: SymmetryClass,
    /// `(z, g(z))` in probe order.
    pub g_values: Vec<(Complex64, Complex64)>,
    pub extras: Option<RecordExtras>,
}

impl ReplicateRecord {
    pub fn g(&self, z: Complex64) -> Option<Complex64> {
        self.g_values.iter().find(|(p, _)| *p == z).map(|(_, g)| *g)
    }

    fn probe_index(&self, z: Complex64) -> Option<usize> {
        self.g_values.iter().position(|(p, _)| *p == z)
    }

    pub fn g_hat(&self, z: Complex64) -> Option<Complex64> {
        let i = self.probe_index(z)?;
        self.extras.as_ref()?.g_hat.as_ref().map(|v| v[i])
    }

    pub fn trace_g2(&self, z: Complex64) -> Option<Complex64> {
        let i = self.probe_index(z)?;
        self.extras.as_ref()?.trace_g2.as_ref().map(|v| v[i])
    }
}

/// Residuals of every exact identity that applies to one sample, plus
/// negative controls, at all probes and probe pairs.
pub fn identity_residuals(w: &HermitianMatrix, class: SymmetryClass, probes: &[Complex64]) -> Result<BTreeMap<String, IdentityCheck>> {
    let mut out: BTreeMap<String, IdentityCheck> = BTreeMap::new();
    let mut record = |name: &str, asserted: bool, r: f64| {
        let e = out.entry(name.to_string()).or_insert(IdentityCheck { asserted, residual: 0.0 });
        e.residual = e.residual.max(r);
    };
    record("hermiticity", true, w.hermiticity_deviation());
    record("class_symmetry", true, validate_symmetry(w, class));

    let n = w.half_size();
    let side = 2 * n;
    let resolvents = probes.iter().map(|&z| resolvent_matrix(w, z)).collect::<Result<Vec<_>>>()?;
    let mirror = |p: usize| side - 1 - p;
    for g in &resolvents {
        let z = g.z();
        let m = g.entries();
        record("resolvent_defect", true, g.defect(w));
        let mut worst: f64 = 0.0;
        for j in 0..side {
            for k in 0..side {
                let r = match class {
                    SymmetryClass::Flip1 => (m.at(j, k) - m.at(mirror(k), mirror(j))).norm(),
                    SymmetryClass::Central2 => (m.at(j, k) - m.at(mirror(j), mirror(k))).norm(),
                    SymmetryClass::RowMirror3 => {
                        let delta = f64::from(u8::from(j == k)) - f64::from(u8::from(mirror(j) == k));
                        (m.at(j, k) - (m.at(mirror(j), k) - delta / z)).norm()
                    }
                    _ => 0.0,
                };
                worst = worst.max(r);
            }
        }
        match class {
            SymmetryClass::Flip1 => record("resolvent_flip", true, worst),
            SymmetryClass::Central2 => record("resolvent_central", true, worst),
            SymmetryClass::RowMirror3 => record("resolvent_rowmirror", true, worst),
            _ => {}
        }
        let is3 = class == SymmetryClass::RowMirror3;
        record("ghat_minus_g", is3, (g.g_hat() - g.g() - 1.0 / z).norm());
    }
    for (a, g1) in resolvents.iter().enumerate() {
        let g1sq = g1.entries().matmul(g1.entries());
        let tr_sq = g1sq.normalized_trace();
        for (b, g2) in resolvents.iter().enumerate() {
            if a == b {
                continue;
            }
            let (z1, z2) = (g1.z(), g2.z());
            let triple = g1sq.matmul(g2.entries());
            let lhs = triple.normalized_trace();
            let rhs = (tr_sq - (g1.g() - g2.g()) / (z1 - z2)) / (z1 - z2);
            record("g1g2", true, (lhs - rhs).norm());
            let anti = anti_trace(&triple)?;
            record("antidiagonal_case3", class == SymmetryClass::RowMirror3, (anti - lhs - 1.0 / (z1 * z1 * z2)).norm());
        }
    }
    Ok(out)
}

/// `ĝ(z)` from mirror-sector spectra: `(1/2n)(Tr G₊ - Tr G₋)`.
fn g_hat_from_sectors(even: &[f64], odd: &[f64], z: Complex64) -> Complex64 {
    let total = (even.len() + odd.len()) as f64;
    let s = |v: &[f64]| v.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>();
    (s(even) - s(odd)) / total
}

fn one_replicate(sampler: &Sampler, replicate: u64, probes: &[Complex64], extras: Extras) -> Result<ReplicateRecord> {
    let spec = sampler.spec();
    let w = sampler.sample(replicate);
    let sectors = eigh_sectors(&w, spec.class)?;
    let mut eigenvalues = match &sectors {
        Sectors::Whole(v) => v.clone(),
        Sectors::Mirror { even, odd } => even.iter().chain(odd).copied().collect(),
    };
    eigenvalues.sort_by(f64::total_cmp);
    let g_values = probes.iter().map(|&z| Ok((z, stieltjes_sum(&eigenvalues, z)?))).collect::<Result<Vec<_>>>()?;

    let extras = if extras.any() {
        let mut x = RecordExtras::default();
        if extras.anti_trace {
            let values = match &sectors {
                Sectors::Mirror { even, odd } => probes.iter().map(|&z| g_hat_from_sectors(even, odd, z)).collect(),
                Sectors::Whole(_) => probes.iter().map(|&z| Ok(resolvent_matrix(&w, z)?.g_hat())).collect::<Result<Vec<_>>>()?,
            };
            x.g_hat = Some(values);
        }
        if extras.atom_count {
            x.atom_count = Some(zero_count(&eigenvalues, ZERO_EIGENVALUE_TOL));
        }
        if extras.max_abs {
            x.max_abs_eigenvalue = Some(eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs())));
        }
        if extras.trace_g2 {
            x.trace_g2 = Some(probes.iter().map(|&z| resolvent_square_sum(&eigenvalues, z)).collect::<Result<Vec<_>>>()?);
        }
        if extras.identities {
            x.identities = Some(identity_residuals(&w, spec.class, probes)?);
        }
        if extras.eigenvalues {
            x.eigenvalues = Some(eigenvalues);
        }
        Some(x)
    } else {
        None
    };
    Ok(ReplicateRecord { replicate, size_2n: spec.side(), class: spec.class, g_values, extras })
}

/// Replicates `0..replicates` of `spec`, evaluated in parallel on the
/// current rayon pool and returned in replicate order. Each record depends
/// only on `(master_seed, replicate)`.
pub fn mc_run(spec: &EnsembleSpec, probes: &[Complex64], replicates: usize, extras: Extras) -> Result<Vec<ReplicateRecord>> {
    if let Some(z) = probes.iter().find(|z| z.im == 0.0 || !z.is_finite()) {
        return Err(Error::Domain(format!("probe {z} lies on the real axis")));
    }
    if replicates < 2 {
        return Err(Error::SampleSize { needed: 2, got: replicates });
    }
    let sampler = Sampler::new(*spec)?;
    (0..replicates as u64).into_par_iter().map(|r| one_replicate(&sampler, r, probes, extras)).collect()
}
