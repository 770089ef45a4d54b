//! N-qubit density matrices and constructors for the state families used
//! throughout the crate (GHZ, Dicke, Bloch products, even-parity symmetric
//! superpositions, Dicke superpositions, G states, white-noise mixtures).
//!
//! A [`QuantumState`] always carries its spectrum. Pure states and
//! pure-plus-white-noise states keep it in closed form, so no eigensolver runs
//! for them; general density matrices are diagonalized once at construction.

mod random;
mod spec;

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::collective::{check_qubits, Axis};
use crate::error::{param, Error, Result};
use crate::matcore::{eigh, kron_vec, CVector, ComplexMatrix, C64, I, ONE, ZERO};

pub use random::{
    random_block_product, random_direction, random_mixed, random_product_pure, random_pure,
    random_separable_mixture, random_unitary,
};
pub use spec::{from_spec, from_spec_capped, ComplexValue, EvenParityTerm, StateSpec};

/// Tolerances for density-matrix validation.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenpairs of a density matrix: explicit (weight, vector) pairs plus one
/// eigenvalue `remainder` shared by the whole orthogonal complement of the
/// explicit vectors (zero for pure states, the noise floor for noisy ones).
#[derive(Debug, Clone)]
pub struct StateSpectrum {
    pub weights: Vec<f64>,
    /// Orthonormal columns, one per entry of `weights`.
    pub vectors: DMatrix<C64>,
    pub remainder: f64,
}

impl StateSpectrum {
    pub fn rank_hint(&self) -> usize {
        self.weights.len()
    }

    /// Moves eigenvalues at or below `eps` out of the explicit list when the
    /// remainder is itself zero; they are then treated as exactly zero.
    pub fn truncated(&self, eps: f64) -> StateSpectrum {
        if self.remainder > eps {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.weights.len()).filter(|&k| self.weights[k] > eps).collect();
        let d = self.vectors.nrows();
        StateSpectrum {
            weights: keep.iter().map(|&k| self.weights[k]).collect(),
            vectors: DMatrix::from_fn(d, keep.len(), |i, j| self.vectors[(i, keep[j])]),
            remainder: 0.0,
        }
    }

    /// Every eigenvalue, including the remainder multiplicity, in ascending order.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let d = self.vectors.nrows();
        let mut ev = self.weights.clone();
        ev.extend(std::iter::repeat_n(self.remainder, d - self.weights.len()));
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Pure(CVector),
    NoisyPure { psi: CVector, p: f64 },
    Dense,
}

/// Validated N-qubit density matrix.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n_qubits: usize,
    repr: Repr,
    spectrum: StateSpectrum,
    rho: OnceLock<ComplexMatrix>,
    hermiticity_residue: f64,
}

impl QuantumState {
    /// Pure state from a state vector; the vector is normalized here.
    pub fn from_pure(n_qubits: usize, psi: CVector) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: psi.len() });
        }
        let norm = psi.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return param("state vector has zero or non-finite norm");
        }
        let psi = psi.unscale(norm);
        let spectrum = StateSpectrum {
            weights: vec![1.0],
            vectors: DMatrix::from_column_slice(dim, 1, psi.as_slice()),
            remainder: 0.0,
        };
        Ok(Self { n_qubits, repr: Repr::Pure(psi), spectrum, rho: OnceLock::new(), hermiticity_residue: 0.0 })
    }

    /// General density matrix; validates Hermiticity, unit trace and positivity.
    pub fn from_density_matrix(n_qubits: usize, rho: ComplexMatrix) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: rho.dim() });
        }
        let mut failures = Vec::new();
        let residue = rho.hermiticity_residue();
        if residue > STATE_TOL {
            failures.push(format!("not Hermitian: max |rho - rho^dagger| = {residue:e}"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            failures.push(format!("trace is {} + {}i, expected 1", tr.re, tr.im));
        }
        if !failures.is_empty() {
            return Err(Error::DensityMatrix(failures));
        }
        let rho = rho.symmetrized();
        let decomposition = eigh(&rho)?;
        let min_ev = decomposition.eigenvalues[0];
        if min_ev < -STATE_TOL {
            return Err(Error::DensityMatrix(vec![format!("negative eigenvalue {min_ev:e}")]));
        }
        let spectrum = StateSpectrum {
            weights: decomposition.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            vectors: decomposition.eigenvectors,
            remainder: 0.0,
        };
        let cell = OnceLock::new();
        let _ = cell.set(rho);
        Ok(Self { n_qubits, repr: Repr::Dense, spectrum, rho: cell, hermiticity_residue: residue })
    }

    /// Convex combination sum_k w_k rho_k; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &QuantumState)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return param("mixture needs at least one component");
        };
        let n = first.n_qubits;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > STATE_TOL {
            return param(format!("mixture weights must be nonnegative and sum to 1 (sum {total})"));
        }
        let mut acc = ComplexMatrix::zeros(first.dim());
        for (w, s) in parts {
            if s.n_qubits != n {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: s.dim() });
            }
            acc = &acc + &s.rho().scale(*w);
        }
        Self::from_density_matrix(n, acc)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn spectrum(&self) -> &StateSpectrum {
        &self.spectrum
    }

    /// Hermiticity residue of the input matrix before symmetrization.
    pub fn hermiticity_residue(&self) -> f64 {
        self.hermiticity_residue
    }

    /// State vector when the state is known to be pure.
    pub fn pure_vector(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Pure(psi) => Some(psi),
            _ => None,
        }
    }

    pub fn rho(&self) -> &ComplexMatrix {
        self.rho.get_or_init(|| match &self.repr {
            Repr::Pure(psi) => ComplexMatrix::outer(psi),
            Repr::NoisyPure { psi, p } => {
                let d = self.dim() as f64;
                let floor = ComplexMatrix::identity(self.dim()).scale((1.0 - p) / d);
                &ComplexMatrix::outer(psi).scale(*p) + &floor
            }
            Repr::Dense => unreachable!("dense states store rho at construction"),
        })
    }

    /// Tr(rho A)
    pub fn expect(&self, a: &ComplexMatrix) -> C64 {
        match &self.repr {
            Repr::Pure(psi) => psi.dotc(&a.apply(psi)),
            Repr::NoisyPure { psi, p } => {
                psi.dotc(&a.apply(psi)) * *p + a.trace() * ((1.0 - p) / self.dim() as f64)
            }
            Repr::Dense => self.rho().trace_product(a),
        }
    }

    /// Tr(rho^2)
    pub fn purity(&self) -> f64 {
        let s = &self.spectrum;
        let rest = (self.dim() - s.weights.len()) as f64;
        s.weights.iter().map(|w| w * w).sum::<f64>() + rest * s.remainder * s.remainder
    }

    /// U rho U^dagger for a unitary U of matching dimension.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.dim() });
        }
        let spectrum = StateSpectrum {
            weights: self.spectrum.weights.clone(),
            vectors: u.inner() * &self.spectrum.vectors,
            remainder: self.spectrum.remainder,
        };
        let repr = match &self.repr {
            Repr::Pure(psi) => Repr::Pure(u.apply(psi)),
            Repr::NoisyPure { psi, p } => Repr::NoisyPure { psi: u.apply(psi), p: *p },
            Repr::Dense => Repr::Dense,
        };
        let rho = OnceLock::new();
        if let Repr::Dense = repr {
            let _ = rho.set((&(u * self.rho()) * &u.adjoint()).symmetrized());
        }
        Ok(Self { n_qubits: self.n_qubits, repr, spectrum, rho, hermiticity_residue: self.hermiticity_residue })
    }

    /// Applies the same single-qubit unitary to every site.
    pub fn rotated_locally(&self, u: &[[C64; 2]; 2]) -> Result<Self> {
        match &self.repr {
            Repr::Pure(psi) => Self::from_pure(self.n_qubits, apply_local_unitary(u, self.n_qubits, psi)),
            _ => {
                let dim = self.dim();
                let mut full = DMatrix::<C64>::identity(dim, dim);
                for mut col in full.column_iter_mut() {
                    let v = apply_local_unitary(u, self.n_qubits, &col.clone_owned());
                    col.copy_from(&v);
                }
                self.conjugated(&ComplexMatrix::new(full)?)
            }
        }
    }
}

/// U^{(x)N} |v>, site 1 on the most significant bit.
pub fn apply_local_unitary(u: &[[C64; 2]; 2], n_qubits: usize, v: &CVector) -> CVector {
    let mut out = v.clone();
    for bit in 0..n_qubits {
        let mask = 1usize << bit;
        for idx in 0..out.len() {
            if idx & mask == 0 {
                let a0 = out[idx];
                let a1 = out[idx | mask];
                out[idx] = u[0][0] * a0 + u[0][1] * a1;
                out[idx | mask] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }
    out
}

/// Single-qubit unitary whose columns are the +/- eigenvectors of sigma_l;
/// conjugation by it maps sigma_z onto sigma_l.
pub fn basis_unitary(axis: Axis) -> [[C64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(h, 0.0);
    match axis {
        Axis::Z => [[ONE, ZERO], [ZERO, ONE]],
        Axis::X => [[r, r], [r, -r]],
        Axis::Y => [[r, r], [I * h, -I * h]],
    }
}

fn in_basis(n_qubits: usize, z_state: CVector, basis: Axis) -> Result<QuantumState> {
    let v = match basis {
        Axis::Z => z_state,
        other => apply_local_unitary(&basis_unitary(other), n_qubits, &z_state),
    };
    QuantumState::from_pure(n_qubits, v)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unnormalized-free z-basis Dicke vector with `m` excitations (|1>'s).
pub(crate) fn dicke_vector(n_qubits: usize, m: usize) -> CVector {
    let dim = 1usize << n_qubits;
    let amp = C64::new(binomial(n_qubits, m).sqrt().recip(), 0.0);
    CVector::from_fn(dim, |i, _| if i.count_ones() as usize == m { amp } else { ZERO })
}

pub(crate) fn dicke_vector_in(n_qubits: usize, m: usize, basis: Axis) -> CVector {
    let v = dicke_vector(n_qubits, m);
    match basis {
        Axis::Z => v,
        other => apply_local_unitary(&basis_unitary(other), n_qubits, &v),
    }
}

/// (|0...0> + |1...1>)/sqrt(2), rotated into `basis`.
pub fn ghz(n_qubits: usize, basis: Axis) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut v = CVector::from_element(dim, ZERO);
    v[0] = h;
    v[dim - 1] += h;
    in_basis(n_qubits, v, basis)
}

/// Symmetric Dicke state with `m` excitations in `basis`.
pub fn dicke(n_qubits: usize, m: usize, basis: Axis) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if m > n_qubits {
        return param(format!("excitation count {m} exceeds {n_qubits} qubits"));
    }
    in_basis(n_qubits, dicke_vector(n_qubits, m), basis)
}

/// [(1 + c.sigma)/2]^{(x)N/2} (x) [(1 - c.sigma)/2]^{(x)N/2} for a unit Bloch vector c.
pub fn product_bloch(bloch: [f64; 3], n_qubits: usize) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if !n_qubits.is_multiple_of(2) {
        return param(format!("Bloch product state needs an even register, got {n_qubits}"));
    }
    let norm2: f64 = bloch.iter().map(|c| c * c).sum();
    if (norm2 - 1.0).abs() > STATE_TOL {
        return param(format!("Bloch coefficients must satisfy sum c_l^2 = 1 (got {norm2})"));
    }
    let up = bloch_ket(bloch);
    let down = bloch_ket(bloch.map(|c| -c));
    let mut v = CVector::from_element(1, ONE);
    for k in 0..n_qubits {
        v = kron_vec(&v, if k < n_qubits / 2 { &up } else { &down });
    }
    QuantumState::from_pure(n_qubits, v)
}

/// Single-qubit ket with Bloch vector `c` (|c| = 1).
pub(crate) fn bloch_ket(c: [f64; 3]) -> CVector {
    let [x, y, z] = c;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    CVector::from_vec(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Allowed term indices of the even-parity family for an even register.
pub fn even_parity_indices(n_qubits: usize) -> Vec<usize> {
    let half = n_qubits / 2;
    let mut idx: Vec<usize> = (0..half.saturating_sub(1)).step_by(2).collect();
    idx.push(half);
    idx
}

/// sum_n c_n (|D^n> + |D^{N-n}>)/sqrt(2) + c_{N/2} |D^{N/2}>, n = 0, 2, ..., N/2 - 2.
pub fn even_parity(coefficients: &[(usize, C64)], n_qubits: usize) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if !n_qubits.is_multiple_of(2) {
        return param(format!("even-parity superposition needs an even register, got {n_qubits}"));
    }
    let allowed = even_parity_indices(n_qubits);
    let mut seen = Vec::new();
    for &(n, _) in coefficients {
        if !allowed.contains(&n) {
            return param(format!("term index {n} not in the allowed set {allowed:?}"));
        }
        if seen.contains(&n) {
            return param(format!("term index {n} given twice"));
        }
        seen.push(n);
    }
    let norm2: f64 = coefficients.iter().map(|(_, c)| c.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > STATE_TOL {
        return param(format!("coefficients must satisfy sum |c_n|^2 = 1 (got {norm2})"));
    }
    let half = n_qubits / 2;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::from_element(1usize << n_qubits, ZERO);
    for &(n, c) in coefficients {
        if n == half {
            v += dicke_vector(n_qubits, n) * c;
        } else {
            v += (dicke_vector(n_qubits, n) + dicke_vector(n_qubits, n_qubits - n)) * (c * h);
        }
    }
    QuantumState::from_pure(n_qubits, v)
}

/// alpha_x |D^{N/2}>_x + alpha_y |D^{N/2}>_y + alpha_z |D^{N/2}>_z, renormalized
/// (the three kets overlap).
pub fn dicke_superposition(alpha: [C64; 3], n_qubits: usize) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if !n_qubits.is_multiple_of(4) {
        return param(format!("Dicke superposition needs N divisible by 4, got {n_qubits}"));
    }
    if alpha.iter().all(|a| a.norm() == 0.0) {
        return param("all-zero superposition coefficients");
    }
    let mut v = CVector::from_element(1usize << n_qubits, ZERO);
    for axis in Axis::ALL {
        let a = alpha[axis.index()];
        if a != ZERO {
            v += dicke_vector_in(n_qubits, n_qubits / 2, axis) * a;
        }
    }
    QuantumState::from_pure(n_qubits, v)
}

/// |1> (x) |D_{N-1}^{(N/2-1)}>, rotated into `basis`.
pub fn g_state(n_qubits: usize, basis: Axis) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    if !n_qubits.is_multiple_of(2) || n_qubits < 4 {
        return param(format!("G state needs an even register of at least 4 qubits, got {n_qubits}"));
    }
    let one = CVector::from_vec(vec![ZERO, ONE]);
    let v = kron_vec(&one, &dicke_vector(n_qubits - 1, n_qubits / 2 - 1));
    in_basis(n_qubits, v, basis)
}

/// I / 2^N
pub fn completely_mixed(n_qubits: usize) -> Result<QuantumState> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let spectrum = StateSpectrum { weights: vec![], vectors: DMatrix::zeros(dim, 0), remainder: 1.0 / dim as f64 };
    let rho = OnceLock::new();
    let _ = rho.set(ComplexMatrix::identity(dim).scale(1.0 / dim as f64));
    Ok(QuantumState { n_qubits, repr: Repr::Dense, spectrum, rho, hermiticity_residue: 0.0 })
}

/// p rho + (1 - p) I / 2^N
pub fn white_noise_mix(state: &QuantumState, p: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("noise weight p = {p} outside [0, 1]"));
    }
    let d = state.dim() as f64;
    let floor = (1.0 - p) / d;
    let s = &state.spectrum;
    let spectrum = StateSpectrum {
        weights: s.weights.iter().map(|w| p * w + floor).collect(),
        vectors: s.vectors.clone(),
        remainder: p * s.remainder + floor,
    };
    let repr = match &state.repr {
        Repr::Pure(psi) => Repr::NoisyPure { psi: psi.clone(), p },
        Repr::NoisyPure { psi, p: q } => Repr::NoisyPure { psi: psi.clone(), p: p * q },
        Repr::Dense => Repr::Dense,
    };
    let rho = OnceLock::new();
    if let Repr::Dense = repr {
        let noise = ComplexMatrix::identity(state.dim()).scale(floor);
        let _ = rho.set(&state.rho().scale(p) + &noise);
    }
    Ok(QuantumState { n_qubits: state.n_qubits, repr, spectrum, rho, hermiticity_residue: state.hermiticity_residue })
}
