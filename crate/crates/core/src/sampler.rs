//! Constraint orbits and the matrix sampler.
//!
//! Hermiticity together with a class map identifies matrix positions with
//! one another: `(x,y) ~ (y,x)` with conjugation and `(x,y) ~ sigma(x,y)`
//! without. Each equivalence class (orbit) carries exactly one independent
//! Gaussian, drawn at the orbit representative and copied to every member
//! with the conjugation parity found by the closure. An orbit where two
//! paths reach the same position with different parities forces
//! `v = conj(v)` and is real.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{site, EnsembleSpec, HermitianMatrix, SymmetryClass};
use crate::error::Result;
use crate::rng::{replicate_key, substream_key, CounterRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reality {
    ComplexFree,
    RealConstrained,
}

/// One constraint orbit. Positions are signed site pairs; the flag is
/// `true` when the member holds the conjugate of the representative value.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub representative: (i64, i64),
    pub members: Vec<((i64, i64), bool)>,
    pub reality: Reality,
}

#[derive(Debug, Clone)]
pub struct OrbitSystem {
    n: usize,
    class: SymmetryClass,
    orbits: Vec<Orbit>,
    /// Per array position `p * 2n + q`: orbit id and conjugation parity.
    slots: Vec<(u32, bool)>,
}

impl OrbitSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    /// Orbit id and parity of the position `(x, y)`.
    pub fn orbit_of(&self, x: i64, y: i64) -> Result<(usize, bool)> {
        let p = crate::domain::pos(x, self.n)?;
        let q = crate::domain::pos(y, self.n)?;
        let (o, par) = self.slots[p * 2 * self.n + q];
        Ok((o as usize, par))
    }
}

/// Closure of all `(2n)^2` positions under the Hermitian map and the class
/// map. Orbits are discovered in row-major order of array positions, so the
/// first position reached is the lexicographic minimum and becomes the
/// representative.
pub fn build_orbit_system(class: SymmetryClass, n: usize) -> Result<OrbitSystem> {
    crate::domain::validate_spec(&EnsembleSpec { class, n, master_seed: 0 })?;
    let side = 2 * n;
    const UNSEEN: u32 = u32::MAX;
    let mut slots = vec![(UNSEEN, false); side * side];
    let mut orbits = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..side * side {
        if slots[start].0 != UNSEEN {
            continue;
        }
        let id = orbits.len() as u32;
        let mut members = Vec::new();
        let mut real = false;
        slots[start] = (id, false);
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            let (p, q) = (k / side, k % side);
            let parity = slots[k].1;
            members.push((k, parity));
            let mut neighbours = [(q * side + p, !parity), (usize::MAX, false)];
            if let Some((a, b)) = class.map_pos(p, q, n) {
                neighbours[1] = (a * side + b, parity);
            }
            for &(next, next_parity) in neighbours.iter().filter(|(k, _)| *k != usize::MAX) {
                match slots[next] {
                    (UNSEEN, _) => {
                        slots[next] = (id, next_parity);
                        queue.push_back(next);
                    }
                    (_, seen_parity) => {
                        if seen_parity != next_parity {
                            real = true;
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        let to_sites = |k: usize| -> (i64, i64) {
            (site(k / side, n).expect("in range"), site(k % side, n).expect("in range"))
        };
        orbits.push(Orbit {
            representative: to_sites(start),
            members: members.into_iter().map(|(k, par)| (to_sites(k), par)).collect(),
            reality: if real { Reality::RealConstrained } else { Reality::ComplexFree },
        });
    }
    Ok(OrbitSystem { n, class, orbits, slots })
}

/// Real dimension of the space of matrices obeying the constraints.
pub fn free_parameter_count(sys: &OrbitSystem) -> usize {
    sys.orbits
        .iter()
        .map(|o| match o.reality {
            Reality::ComplexFree => 2,
            Reality::RealConstrained => 1,
        })
        .sum()
}

fn orbit_cache() -> &'static Mutex<HashMap<(SymmetryClass, usize), Arc<OrbitSystem>>> {
    static CACHE: OnceLock<Mutex<HashMap<(SymmetryClass, usize), Arc<OrbitSystem>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Orbit system for `(class, n)`, built once per process.
pub fn cached_orbit_system(class: SymmetryClass, n: usize) -> Result<Arc<OrbitSystem>> {
    if let Some(sys) = orbit_cache().lock().expect("orbit cache poisoned").get(&(class, n)) {
        return Ok(Arc::clone(sys));
    }
    let sys = Arc::new(build_orbit_system(class, n)?);
    orbit_cache()
        .lock()
        .expect("orbit cache poisoned")
        .entry((class, n))
        .or_insert_with(|| Arc::clone(&sys));
    Ok(sys)
}

/// Draws replicates of one ensemble.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: EnsembleSpec,
    system: Arc<OrbitSystem>,
}

impl Sampler {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        crate::domain::validate_spec(&spec)?;
        let system = cached_orbit_system(spec.class, spec.n)?;
        Ok(Self { spec, system })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn system(&self) -> &OrbitSystem {
        &self.system
    }

    /// Replicate `replicate`: a pure function of `(master_seed, replicate)`.
    pub fn sample(&self, replicate: u64) -> HermitianMatrix {
        let n = self.spec.n;
        // complex entries: Re and Im each N(0, 1/(4n)); real entries N(0, 1/(2n))
        let sd_complex = (1.0 / (4.0 * n as f64)).sqrt();
        let sd_real = (1.0 / (2.0 * n as f64)).sqrt();
        let rkey = replicate_key(self.spec.master_seed, replicate);
        let values: Vec<Complex64> = self
            .system
            .orbits
            .iter()
            .enumerate()
            .map(|(id, orbit)| {
                let (a, b) = CounterRng::new(substream_key(rkey, id as u64)).next_normal_pair();
                match orbit.reality {
                    Reality::ComplexFree => Complex64::new(sd_complex * a, sd_complex * b),
                    Reality::RealConstrained => Complex64::new(sd_real * a, 0.0),
                }
            })
            .collect();
        let side = 2 * n;
        HermitianMatrix::from_lower_raw(n, |p, q| {
            let (o, parity) = self.system.slots[p * side + q];
            let v = values[o as usize];
            if parity {
                v.conj()
            } else {
                v
            }
        })
    }
}

/// Convenience wrapper over [`Sampler`] using the process-wide orbit cache.
pub fn sample_matrix(spec: &EnsembleSpec, replicate: u64) -> Result<HermitianMatrix> {
    Ok(Sampler::new(*spec)?.sample(replicate))
}

/// `max |W_xy - W_sigma(x,y)|` for the class map; `0.0` for the plain class.
pub fn validate_symmetry(w: &HermitianMatrix, class: SymmetryClass) -> f64 {
    let n = w.half_size();
    let side = 2 * n;
    let mut worst = 0.0_f64;
    for p in 0..side {
        for q in 0..side {
            if let Some((a, b)) = class.map_pos(p, q, n) {
                worst = worst.max((w.at(p, q) - w.at(a, b)).norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::pos;

    fn count(class: SymmetryClass, n: usize) -> usize {
        free_parameter_count(&build_orbit_system(class, n).unwrap())
    }

    /// Dimension of the real solution space of the linear constraints,
    /// by Gaussian elimination on the constraint rows. Independent of the
    /// orbit closure.
    fn brute_force_dimension(class: SymmetryClass, n: usize) -> usize {
        let side = 2 * n;
        let unknowns = 2 * side * side;
        let re = |p: usize, q: usize| 2 * (p * side + q);
        let im = |p: usize, q: usize| 2 * (p * side + q) + 1;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut push = |terms: &[(usize, f64)]| {
            let mut row = vec![0.0; unknowns];
            for &(k, c) in terms {
                row[k] += c;
            }
            rows.push(row);
        };
        for p in 0..side {
            for q in 0..side {
                push(&[(re(p, q), 1.0), (re(q, p), -1.0)]);
                push(&[(im(p, q), 1.0), (im(q, p), 1.0)]);
                if let Some((a, b)) = class.map_pos(p, q, n) {
                    push(&[(re(p, q), 1.0), (re(a, b), -1.0)]);
                    push(&[(im(p, q), 1.0), (im(a, b), -1.0)]);
                }
            }
        }
        let mut rank = 0;
        for col in 0..unknowns {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col].abs() > 1e-9) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for r in 0..rows.len() {
                if r != rank && rows[r][col].abs() > 1e-9 {
                    let f = rows[r][col] / pivot_row[col];
                    for (x, y) in rows[r].iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
            rank += 1;
        }
        unknowns - rank
    }

    #[test]
    fn n1_orbit_examples() {
        let plain = build_orbit_system(SymmetryClass::Plain, 1).unwrap();
        assert_eq!(plain.orbits().len(), 3);
        assert_eq!(free_parameter_count(&plain), 4);

        let row = build_orbit_system(SymmetryClass::RowMirror3, 1).unwrap();
        assert_eq!(row.orbits().len(), 1);
        assert_eq!(row.orbits()[0].reality, Reality::RealConstrained);
        assert_eq!(free_parameter_count(&row), 1);

        let quarter = build_orbit_system(SymmetryClass::Quarter4, 1).unwrap();
        assert_eq!(quarter.orbits().len(), 1);
        assert_eq!(quarter.orbits()[0].reality, Reality::RealConstrained);
        assert_eq!(count(SymmetryClass::Quarter4, 1), 1);
        assert_eq!(count(SymmetryClass::Flip1, 1), 3);
        assert_eq!(count(SymmetryClass::Central2, 1), 2);
    }

    #[test]
    fn counts_match_closed_forms() {
        for n in 1..=6 {
            assert_eq!(count(SymmetryClass::Plain, n), 4 * n * n);
            assert_eq!(count(SymmetryClass::RowMirror3, n), n * n);
            assert_eq!(count(SymmetryClass::Central2, n), 2 * n * n);
        }
    }

    #[test]
    fn counts_match_brute_force() {
        for n in 1..=3 {
            for class in SymmetryClass::ALL {
                assert_eq!(count(class, n), brute_force_dimension(class, n), "{class} n={n}");
            }
        }
    }

    #[test]
    fn orbits_partition_positions() {
        for class in SymmetryClass::ALL {
            let n = 4;
            let sys = build_orbit_system(class, n).unwrap();
            let total: usize = sys.orbits().iter().map(|o| o.members.len()).sum();
            assert_eq!(total, 4 * n * n);
            let mut seen = std::collections::HashSet::new();
            for (id, orbit) in sys.orbits().iter().enumerate() {
                let min = orbit.members.iter().map(|((x, y), _)| (pos(*x, n).unwrap(), pos(*y, n).unwrap())).min().unwrap();
                let rep = (pos(orbit.representative.0, n).unwrap(), pos(orbit.representative.1, n).unwrap());
                assert_eq!(min, rep);
                for &((x, y), par) in &orbit.members {
                    assert!(seen.insert((x, y)));
                    assert_eq!(sys.orbit_of(x, y).unwrap(), (id, par));
                    if (x, y) == orbit.representative {
                        assert!(!par);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_orbits_are_real() {
        for class in SymmetryClass::ALL {
            let sys = build_orbit_system(class, 3).unwrap();
            for x in [-3i64, -1, 2] {
                let (o, _) = sys.orbit_of(x, x).unwrap();
                assert_eq!(sys.orbits()[o].reality, Reality::RealConstrained);
            }
        }
        let quarter = build_orbit_system(SymmetryClass::Quarter4, 3).unwrap();
        let (o, _) = quarter.orbit_of(2, -2).unwrap();
        assert_eq!(quarter.orbits()[o].reality, Reality::RealConstrained);
    }

    #[test]
    fn samples_are_deterministic_and_symmetric() {
        for class in SymmetryClass::ALL {
            let spec = EnsembleSpec::new(class, 5, 99).unwrap();
            let a = sample_matrix(&spec, 3).unwrap();
            let b = sample_matrix(&spec, 3).unwrap();
            let c = sample_matrix(&spec, 4).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert_eq!(a.hermiticity_deviation(), 0.0);
            assert_eq!(validate_symmetry(&a, class), 0.0);
        }
    }

    #[test]
    fn rowmirror_n1_is_constant() {
        for seed in 0..20 {
            let w = sample_matrix(&EnsembleSpec::new(SymmetryClass::RowMirror3, 1, seed).unwrap(), 0).unwrap();
            let a = w.get(-1, -1).unwrap();
            assert_eq!(a.im, 0.0);
            for (_, _, v) in w.entries() {
                assert_eq!(v, a);
            }
        }
    }

    #[test]
    fn rowmirror_column_symmetry_is_discovered() {
        let n = 6;
        let w = sample_matrix(&EnsembleSpec::new(SymmetryClass::RowMirror3, n, 5).unwrap(), 0).unwrap();
        let ni = n as i64;
        for x in (-ni..=ni).filter(|&x| x != 0) {
            for y in (-ni..=ni).filter(|&y| y != 0) {
                assert_eq!(w.get(x, y).unwrap(), w.get(x, -y).unwrap());
            }
        }
    }

    #[test]
    fn plain_sample_breaks_other_symmetries() {
        let w = sample_matrix(&EnsembleSpec::new(SymmetryClass::Plain, 4, 1).unwrap(), 0).unwrap();
        for class in SymmetryClass::ALL.into_iter().skip(1) {
            assert!(validate_symmetry(&w, class) > 0.0);
        }
        assert_eq!(validate_symmetry(&w, SymmetryClass::Plain), 0.0);
    }
}
