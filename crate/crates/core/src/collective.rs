//! Single-site Pauli operators on an N-qubit register and the collective
//! angular momentum components J_l = (1/2) sum_k sigma_l^(k).
//!
//! Site 1 is the most significant tensor factor, i.e. bit `N - k` of a basis index.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{kron, pauli, CVector, ComplexMatrix, C64, I, ZERO};

/// Largest register handled anywhere in the crate.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Self::ALL.get(i).copied()
    }

    pub fn unit(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Parameter(format!("unknown axis '{other}'"))),
        }
    }
}

/// Unit vector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction([f64; 3]);

impl Direction {
    pub const NORM_TOL: f64 = 1e-12;

    /// Accepts only vectors already normalized within [`Self::NORM_TOL`].
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Parameter(format!("direction {v:?} has norm {norm}, expected 1")));
        }
        Ok(Self(v))
    }

    /// Rescales any nonzero finite vector onto the unit sphere.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Parameter(format!("cannot normalize direction {v:?}")));
        }
        Ok(Self(v.map(|x| x / norm)))
    }

    pub fn along(axis: Axis) -> Self {
        Self(axis.unit())
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Direction::normalized(v)
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> [f64; 3] {
        d.0
    }
}

pub(crate) fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::Parameter("register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::DimensionCap { dim: 1usize << n_qubits.min(63), cap: 1 << MAX_QUBITS });
    }
    Ok(())
}

/// sigma_l acting on site `site` (1-based) of an `n_qubits` register, via Kronecker products.
pub fn pauli_at(axis: Axis, site: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    check_qubits(n_qubits)?;
    if site == 0 || site > n_qubits {
        return Err(Error::Index { index: site, max: n_qubits });
    }
    let id2 = ComplexMatrix::identity(2);
    let mut acc = if site == 1 { pauli(axis.index()) } else { id2.clone() };
    for k in 2..=n_qubits {
        let factor = if k == site { pauli(axis.index()) } else { id2.clone() };
        acc = kron(&acc, &factor)?;
    }
    Ok(acc)
}

/// Dense J_l, filled directly from the bit structure of each basis index.
pub fn collective_j(axis: Axis, n_qubits: usize) -> Result<ComplexMatrix> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::zeros(dim).into_inner();
    for col in 0..dim {
        for bit in 0..n_qubits {
            let mask = 1usize << bit;
            let set = col & mask != 0;
            match axis {
                Axis::X => m[(col ^ mask, col)] += C64::new(0.5, 0.0),
                // sigma_y|0> = i|1>, sigma_y|1> = -i|0>
                Axis::Y => m[(col ^ mask, col)] += if set { -I * 0.5 } else { I * 0.5 },
                Axis::Z => m[(col, col)] += C64::new(if set { -0.5 } else { 0.5 }, 0.0),
            }
        }
    }
    Ok(ComplexMatrix::from_raw(m))
}

/// n_x J_x + n_y J_y + n_z J_z
pub fn j_direction(direction: Direction, n_qubits: usize) -> Result<ComplexMatrix> {
    let ops = CollectiveSpin::cached(n_qubits)?;
    let [nx, ny, nz] = direction.components();
    let mut acc = ops.j(Axis::X).scale(nx);
    acc = &acc + &ops.j(Axis::Y).scale(ny);
    acc = &acc + &ops.j(Axis::Z).scale(nz);
    Ok(acc)
}

/// J_l |v> without materializing J_l; O(N 2^N).
pub fn apply_j(axis: Axis, n_qubits: usize, v: &CVector) -> CVector {
    let dim = v.len();
    debug_assert_eq!(dim, 1usize << n_qubits);
    let mut out = CVector::from_element(dim, ZERO);
    for idx in 0..dim {
        let amp = v[idx];
        if amp == ZERO {
            continue;
        }
        for bit in 0..n_qubits {
            let mask = 1usize << bit;
            let set = idx & mask != 0;
            match axis {
                Axis::X => out[idx ^ mask] += amp * 0.5,
                Axis::Y => out[idx ^ mask] += amp * if set { -I * 0.5 } else { I * 0.5 },
                Axis::Z => out[idx] += amp * if set { -0.5 } else { 0.5 },
            }
        }
    }
    out
}

/// J_n |v> for an arbitrary direction.
pub fn apply_j_direction(direction: Direction, n_qubits: usize, v: &CVector) -> CVector {
    let [nx, ny, nz] = direction.components();
    apply_j(Axis::X, n_qubits, v) * C64::new(nx, 0.0)
        + apply_j(Axis::Y, n_qubits, v) * C64::new(ny, 0.0)
        + apply_j(Axis::Z, n_qubits, v) * C64::new(nz, 0.0)
}

/// The three dense collective operators for one register size.
#[derive(Debug)]
pub struct CollectiveSpin {
    n_qubits: usize,
    ops: [ComplexMatrix; 3],
}

impl CollectiveSpin {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Ok(Self {
            n_qubits,
            ops: [
                collective_j(Axis::X, n_qubits)?,
                collective_j(Axis::Y, n_qubits)?,
                collective_j(Axis::Z, n_qubits)?,
            ],
        })
    }

    /// Process-wide memoized operators; safe to share between threads.
    pub fn cached(n_qubits: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CollectiveSpin>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(hit) = cache.lock().expect("collective cache poisoned").get(&n_qubits) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(Self::new(n_qubits)?);
        let mut guard = cache.lock().expect("collective cache poisoned");
        Ok(Arc::clone(guard.entry(n_qubits).or_insert(built)))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn j(&self, axis: Axis) -> &ComplexMatrix {
        &self.ops[axis.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::eigh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        &(a * b) - &(b * a)
    }

    #[test]
    fn pauli_at_examples() {
        assert_eq!(pauli_at(Axis::Z, 1, 1).unwrap(), ComplexMatrix::from_real_diagonal(&[1.0, -1.0]));
        let expected = kron(&ComplexMatrix::identity(2), &pauli(0)).unwrap();
        assert_eq!(pauli_at(Axis::X, 2, 2).unwrap(), expected);
        assert!(pauli_at(Axis::Y, 3, 4).unwrap().trace().norm() < 1e-15);
    }

    #[test]
    fn pauli_at_rejects_bad_site() {
        assert_eq!(pauli_at(Axis::X, 0, 3), Err(Error::Index { index: 0, max: 3 }));
        assert_eq!(pauli_at(Axis::X, 4, 3), Err(Error::Index { index: 4, max: 3 }));
    }

    #[test]
    fn pauli_at_is_hermitian_unitary_and_local() {
        for n in 1..=4 {
            for axis in Axis::ALL {
                for k in 1..=n {
                    let p = pauli_at(axis, k, n).unwrap();
                    assert!(p.hermiticity_residue() < 1e-15);
                    assert!((&p * &p).max_abs_diff(&ComplexMatrix::identity(1 << n)) < 1e-15);
                }
            }
        }
        let a = pauli_at(Axis::X, 1, 3).unwrap();
        let b = pauli_at(Axis::Y, 3, 3).unwrap();
        assert!(commutator(&a, &b).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn collective_matches_sum_of_kron_paulis() {
        for n in 1..=5 {
            for axis in Axis::ALL {
                let mut sum = ComplexMatrix::zeros(1 << n);
                for k in 1..=n {
                    sum = &sum + &pauli_at(axis, k, n).unwrap();
                }
                let j = collective_j(axis, n).unwrap();
                assert!(j.max_abs_diff(&sum.scale(0.5)) < 1e-14, "axis {axis} n {n}");
            }
        }
    }

    #[test]
    fn collective_examples() {
        assert_eq!(
            collective_j(Axis::Z, 2).unwrap(),
            ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, -1.0])
        );
        let ev = eigh(&collective_j(Axis::X, 3).unwrap()).unwrap().eigenvalues;
        let expected = [-1.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 1.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        for axis in Axis::ALL {
            assert!(collective_j(axis, 1).unwrap().max_abs_diff(&pauli(axis.index()).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn direction_examples() {
        let jz = j_direction(Direction::along(Axis::Z), 3).unwrap();
        assert_eq!(jz, collective_j(Axis::Z, 3).unwrap());
        let jx = j_direction(Direction::new([1.0, 0.0, 0.0]).unwrap(), 1).unwrap();
        assert!(jx.max_abs_diff(&pauli(0).scale(0.5)) < 1e-15);

        let diag = Direction::normalized([1.0, 1.0, 1.0]).unwrap();
        let ev = eigh(&j_direction(diag, 2).unwrap()).unwrap().eigenvalues;
        for (a, b) in ev.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn direction_rejects_unnormalized() {
        assert!(Direction::new([1.0, 1.0, 0.0]).is_err());
        assert!(Direction::normalized([0.0, 0.0, 0.0]).is_err());
        let d: Direction = serde_json::from_str("[0, 3, 4]").unwrap();
        assert!((d.components()[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn commutation_relations() {
        for n in 1..=6 {
            let s = CollectiveSpin::cached(n).unwrap();
            for (a, b, c) in [(Axis::X, Axis::Y, Axis::Z), (Axis::Y, Axis::Z, Axis::X), (Axis::Z, Axis::X, Axis::Y)] {
                let lhs = commutator(s.j(a), s.j(b));
                let rhs = ComplexMatrix::from_raw(s.j(c).inner() * I);
                assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            }
        }
    }

    #[test]
    fn casimir_maximum() {
        for n in 1..=6 {
            let s = CollectiveSpin::cached(n).unwrap();
            let mut j2 = ComplexMatrix::zeros(1 << n);
            for a in Axis::ALL {
                j2 = &j2 + &(s.j(a) * s.j(a));
            }
            let top = *eigh(&j2).unwrap().eigenvalues.last().unwrap();
            let j = n as f64 / 2.0;
            assert!((top - j * (j + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn fast_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            let v = CVector::from_fn(1 << n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            for axis in Axis::ALL {
                let dense = collective_j(axis, n).unwrap().apply(&v);
                assert!((dense - apply_j(axis, n, &v)).norm() < 1e-13);
            }
            let d = Direction::normalized([0.3, -1.0, 0.7]).unwrap();
            let dense = j_direction(d, n).unwrap().apply(&v);
            assert!((dense - apply_j_direction(d, n, &v)).norm() < 1e-13);
        }
    }

    #[test]
    fn register_size_limits() {
        assert!(collective_j(Axis::X, 0).is_err());
        assert!(matches!(collective_j(Axis::X, 13), Err(Error::DimensionCap { .. })));
    }
}
