//! Random states for property tests and sampling. All generators take the RNG
//! explicitly so callers control seeding.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::collective::{check_qubits, Direction};
use crate::error::{param, Result};
use crate::matcore::{kron_vec, CVector, ComplexMatrix, C64, ONE};

use super::QuantumState;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    QuantumState::from_pure(n_qubits, gaussian_vector(1 << n_qubits, rng))
}

/// Tensor product of independent random single-qubit states.
pub fn random_product_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<QuantumState> {
    random_block_product(n_qubits, 1, rng)
}

/// Tensor product of random pure blocks, each of at most `max_block` qubits.
pub fn random_block_product<R: Rng + ?Sized>(
    n_qubits: usize,
    max_block: usize,
    rng: &mut R,
) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if max_block == 0 {
        return param("block size must be positive");
    }
    let mut v = CVector::from_element(1, ONE);
    let mut left = n_qubits;
    while left > 0 {
        let size = rng.random_range(1..=max_block.min(left));
        let block = gaussian_vector(1 << size, rng);
        let norm = block.norm();
        v = kron_vec(&v, &block.unscale(norm));
        left -= size;
    }
    QuantumState::from_pure(n_qubits, v)
}

/// Random mixed state G G^dagger / Tr(G G^dagger) with a Ginibre matrix of `rank` columns.
pub fn random_mixed<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    if rank == 0 || rank > dim {
        return param(format!("rank {rank} outside 1..={dim}"));
    }
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    QuantumState::from_density_matrix(n_qubits, ComplexMatrix::new(rho.unscale(tr.re))?)
}

/// Random convex mixture of `terms` random product states.
pub fn random_separable_mixture<R: Rng + ?Sized>(
    n_qubits: usize,
    terms: usize,
    rng: &mut R,
) -> Result<QuantumState> {
    if terms == 0 {
        return param("need at least one term");
    }
    let parts: Vec<QuantumState> =
        (0..terms).map(|_| random_product_pure(n_qubits, rng)).collect::<Result<_>>()?;
    let raw: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weighted: Vec<(f64, &QuantumState)> = raw.iter().map(|w| w / total).zip(&parts).collect();
    let sum: f64 = weighted.iter().map(|(w, _)| w).sum();
    let mut weighted = weighted;
    weighted[0].0 += 1.0 - sum;
    QuantumState::mixture(&weighted)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    ComplexMatrix::from_raw(q)
}

/// Uniformly random unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Ok(d) = Direction::normalized(v) {
            return d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(8, &mut rng);
        let prod = &u * &u.adjoint();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=4 {
            let p = random_pure(n, &mut rng).unwrap();
            assert!((p.purity() - 1.0).abs() < 1e-12);
            let m = random_mixed(n, 2.min(1 << n), &mut rng).unwrap();
            assert!((m.rho().trace().re - 1.0).abs() < 1e-12);
            let s = random_separable_mixture(n, 3, &mut rng).unwrap();
            assert!(s.spectrum().weights.iter().all(|&w| w > -1e-12));
            let b = random_block_product(n, 2, &mut rng).unwrap();
            assert!((b.purity() - 1.0).abs() < 1e-12);
        }
        assert!(random_mixed(2, 5, &mut rng).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_pure(3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_pure(3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.rho().max_abs_diff(b.rho()), 0.0);
    }
}
