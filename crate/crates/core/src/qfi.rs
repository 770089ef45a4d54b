//! Quantum Fisher information for collective spin generators.
//!
//! Everything is evaluated from the state's spectrum. With eigenpairs
//! (lambda_l, |l>) the Fisher matrix for generators G_i is
//!
//! ```text
//! Gamma_ij = 2 sum_{l,m} w(lambda_l, lambda_m) <l|G_i|m><m|G_j|l>,
//! w(a, b)  = (a - b)^2 / (a + b),   pairs with a + b <= eps skipped.
//! ```
//!
//! States store only a few explicit eigenvectors plus a degenerate remainder
//! (eigenvalue mu on the orthogonal complement). Sums over the complement
//! collapse to `<l|G_i G_j|l> - sum_m <l|G_i|m><m|G_j|l>`, so the cost scales
//! with the number of explicit vectors instead of the Hilbert dimension.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::collective::{apply_j, apply_j_direction, Axis, Direction};
use crate::error::{Error, Result};
use crate::matcore::{CVector, ComplexMatrix, C64, HERMITICITY_TOL};
use crate::states::{QuantumState, StateSpectrum};

/// Eigenvalues and pair sums at or below this are treated as zero.
pub const DEFAULT_EPS: f64 = 1e-12;
/// Negative residues down to this are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-9;

/// (F_Q[J_x], F_Q[J_y], F_Q[J_z]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherTriple(pub [f64; 3]);

impl FisherTriple {
    pub fn get(&self, axis: Axis) -> f64 {
        self.0[axis.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Numerical side information collected while building a [`GammaMatrix`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GammaDiagnostics {
    /// Largest imaginary part discarded from the raw sums.
    pub imaginary_residue: f64,
    /// Largest |Gamma_ij - Gamma_ji| before symmetrization.
    pub asymmetry: f64,
    /// Hermiticity residue of the input density matrix.
    pub state_hermiticity_residue: f64,
    /// Negative eigenvalues or diagonal entries that were clamped to zero.
    pub clamped: Vec<f64>,
    /// Number of explicit eigenvectors used.
    pub explicit_rank: usize,
}

/// The 3x3 real symmetric Fisher matrix of the collective spin components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaMatrix {
    pub n_qubits: usize,
    pub gamma: [[f64; 3]; 3],
    /// Ascending.
    pub eigenvalues: [f64; 3],
    pub diagnostics: GammaDiagnostics,
}

impl GammaMatrix {
    pub fn fisher_triple(&self) -> FisherTriple {
        FisherTriple([0, 1, 2].map(|k| self.gamma[k][k]))
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|k| self.gamma[k][k]).sum()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[2]
    }

    /// n^T Gamma n
    pub fn along(&self, n: Direction) -> f64 {
        let c = n.components();
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += c[i] * self.gamma[i][j] * c[j];
            }
        }
        acc.max(0.0)
    }

    pub fn as_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.gamma[i][j])
    }

    /// Unit eigenvectors as columns, matching `eigenvalues`.
    pub fn eigenvectors(&self) -> [[f64; 3]; 3] {
        let (_, vecs) = sorted_eigen(&self.as_matrix());
        vecs
    }
}

fn sorted_eigen(m: &Matrix3<f64>) -> ([f64; 3], [[f64; 3]; 3]) {
    let eig = SymmetricEigen::new(*m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.map(|k| eig.eigenvalues[k]);
    let mut vecs = [[0.0; 3]; 3];
    for (c, &k) in order.iter().enumerate() {
        for r in 0..3 {
            vecs[r][c] = eig.eigenvectors[(r, k)];
        }
    }
    (vals, vecs)
}

fn pair_weight(a: f64, b: f64, eps: f64) -> f64 {
    let s = a + b;
    if s <= eps {
        0.0
    } else {
        (a - b) * (a - b) / s
    }
}

fn column(m: &DMatrix<C64>, k: usize) -> CVector {
    m.column(k).clone_owned()
}

/// Applies a generator to every explicit eigenvector.
fn applied_columns(vectors: &DMatrix<C64>, f: impl Fn(&CVector) -> CVector) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(vectors.nrows(), vectors.ncols());
    for k in 0..vectors.ncols() {
        out.set_column(k, &f(&column(vectors, k)));
    }
    out
}

/// Raw Fisher block for generators already applied to the explicit vectors.
/// Returns the complex sums (before taking real parts).
fn fisher_block(spectrum: &StateSpectrum, applied: &[DMatrix<C64>], eps: f64) -> DMatrix<C64> {
    let s = &spectrum.vectors;
    let r = spectrum.weights.len();
    let mu = spectrum.remainder;
    let k = applied.len();
    let projected: Vec<DMatrix<C64>> = applied.iter().map(|w| s.adjoint() * w).collect();
    let w_explicit = DMatrix::from_fn(r, r, |l, m| pair_weight(spectrum.weights[l], spectrum.weights[m], eps));
    let w_mixed: Vec<f64> = spectrum.weights.iter().map(|&l| pair_weight(l, mu, eps)).collect();
    let mixed_active = w_mixed.iter().any(|&w| w != 0.0);

    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let (ai, aj) = (&projected[i], &projected[j]);
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..r {
                for m in 0..r {
                    let w = w_explicit[(l, m)];
                    if w != 0.0 {
                        acc += ai[(l, m)] * aj[(m, l)] * w;
                    }
                }
            }
            if mixed_active {
                for l in 0..r {
                    if w_mixed[l] == 0.0 {
                        continue;
                    }
                    let full = applied[i].column(l).dotc(&applied[j].column(l));
                    let inside: C64 = (0..r).map(|m| ai[(l, m)] * aj[(m, l)]).sum();
                    acc += C64::new(2.0 * (full - inside).re * w_mixed[l], 0.0);
                }
            }
            out[(i, j)] = acc * 2.0;
            out[(j, i)] = (acc * 2.0).conj();
        }
    }
    out
}

/// Gamma with the default eigenvalue cutoff.
pub fn gamma_c(state: &QuantumState) -> Result<GammaMatrix> {
    gamma_c_with(state, DEFAULT_EPS)
}

/// Gamma with an explicit cutoff for "lambda_l + lambda_m != 0".
pub fn gamma_c_with(state: &QuantumState, eps: f64) -> Result<GammaMatrix> {
    let n = state.n_qubits();
    let spectrum = state.spectrum().truncated(eps);
    let applied: Vec<DMatrix<C64>> = Axis::ALL
        .iter()
        .map(|&a| applied_columns(&spectrum.vectors, |v| apply_j(a, n, v)))
        .collect();
    let raw = fisher_block(&spectrum, &applied, eps);

    let mut diagnostics = GammaDiagnostics {
        state_hermiticity_residue: state.hermiticity_residue(),
        explicit_rank: spectrum.weights.len(),
        ..Default::default()
    };
    let mut gamma = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let z = raw[(i, j)];
            diagnostics.imaginary_residue = diagnostics.imaginary_residue.max(z.im.abs());
            diagnostics.asymmetry = diagnostics.asymmetry.max((z.re - raw[(j, i)].re).abs());
            gamma[i][j] = 0.5 * (z.re + raw[(j, i)].re);
        }
    }
    if !gamma.iter().flatten().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    for (k, row) in gamma.iter_mut().enumerate() {
        if row[k] < 0.0 {
            if row[k] < -CLAMP_TOL {
                return Err(Error::Numerical(format!("negative Fisher diagonal {}", row[k])));
            }
            diagnostics.clamped.push(row[k]);
            row[k] = 0.0;
        }
    }
    let (mut eigenvalues, _) = sorted_eigen(&Matrix3::from_fn(|i, j| gamma[i][j]));
    for ev in eigenvalues.iter_mut() {
        if *ev < 0.0 {
            if *ev < -CLAMP_TOL * (1.0 + gamma_scale(&gamma)) {
                return Err(Error::Numerical(format!("Gamma has negative eigenvalue {ev}")));
            }
            diagnostics.clamped.push(*ev);
            *ev = 0.0;
        }
    }
    Ok(GammaMatrix { n_qubits: n, gamma, eigenvalues, diagnostics })
}

fn gamma_scale(g: &[[f64; 3]; 3]) -> f64 {
    g.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

/// F_Q[rho, J_n] evaluated directly from the spectrum.
pub fn qfi_direction(state: &QuantumState, n: Direction) -> Result<f64> {
    let nq = state.n_qubits();
    let spectrum = state.spectrum().truncated(DEFAULT_EPS);
    let w = applied_columns(&spectrum.vectors, |v| apply_j_direction(n, nq, v));
    Ok(clamp(fisher_block(&spectrum, &[w], DEFAULT_EPS)[(0, 0)].re))
}

/// F_Q[rho, A] for an arbitrary Hermitian generator.
pub fn qfi_generator(state: &QuantumState, a: &ComplexMatrix) -> Result<f64> {
    check_operator(state, a)?;
    let spectrum = state.spectrum().truncated(DEFAULT_EPS);
    let w = a.inner() * &spectrum.vectors;
    Ok(clamp(fisher_block(&spectrum, &[w], DEFAULT_EPS)[(0, 0)].re))
}

fn clamp(x: f64) -> f64 {
    if (-CLAMP_TOL..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

fn check_operator(state: &QuantumState, a: &ComplexMatrix) -> Result<()> {
    if a.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), got: a.dim() });
    }
    let r = a.hermiticity_residue();
    if r > HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_asymmetry: r });
    }
    Ok(())
}

/// (Delta A)^2 = <A^2> - <A>^2; small negative residues are clamped to zero.
pub fn variance(state: &QuantumState, a: &ComplexMatrix) -> Result<f64> {
    check_operator(state, a)?;
    let mean = state.expect(a).re;
    let second = state.expect(&(a * a)).re;
    let v = second - mean * mean;
    Ok(if (-HERMITICITY_TOL..0.0).contains(&v) { 0.0 } else { v })
}

/// First and second moments of the collective spin components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    /// <J_l>
    pub mean: [f64; 3],
    /// Symmetrized Re <J_i J_j>
    pub second: [[f64; 3]; 3],
}

impl SpinMoments {
    pub fn variances(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| (self.second[k][k] - self.mean[k] * self.mean[k]).max(0.0))
    }

    /// <(J_i J_j + J_j J_i)/2> - <J_i><J_j>
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = self.second[i][j] - self.mean[i] * self.mean[j];
            }
        }
        c
    }
}

/// Spin moments from the spectrum, using Tr J_l = 0 and Tr(J_i J_j) = delta_ij N 2^N / 4.
pub fn spin_moments(state: &QuantumState) -> SpinMoments {
    let n = state.n_qubits();
    let spectrum = state.spectrum();
    let mu = spectrum.remainder;
    let s = &spectrum.vectors;
    let applied: Vec<DMatrix<C64>> =
        Axis::ALL.iter().map(|&a| applied_columns(s, |v| apply_j(a, n, v))).collect();
    let mut mean = [0.0; 3];
    let mut second = [[0.0; 3]; 3];
    for i in 0..3 {
        for (l, &lam) in spectrum.weights.iter().enumerate() {
            mean[i] += (lam - mu) * s.column(l).dotc(&applied[i].column(l)).re;
        }
        for j in 0..3 {
            let mut acc = if i == j { mu * (n as f64) * state.dim() as f64 / 4.0 } else { 0.0 };
            for (l, &lam) in spectrum.weights.iter().enumerate() {
                acc += (lam - mu) * applied[i].column(l).dotc(&applied[j].column(l)).re;
            }
            second[i][j] = acc;
        }
    }
    SpinMoments { mean, second }
}

/// Tr(Gamma) / 3, the Fisher information averaged over all directions.
pub fn average_qfi(state: &QuantumState) -> Result<f64> {
    Ok(gamma_c(state)?.trace() / 3.0)
}

/// Wigner-Yanase skew information <A^2> - Tr(sqrt(rho) A sqrt(rho) A).
pub fn skew_information(state: &QuantumState, a: &ComplexMatrix) -> Result<f64> {
    check_operator(state, a)?;
    let spectrum = state.spectrum();
    let s = &spectrum.vectors;
    let r = spectrum.weights.len();
    let sq: Vec<f64> = spectrum.weights.iter().map(|w| w.max(0.0).sqrt()).collect();
    let sq_mu = spectrum.remainder.max(0.0).sqrt();
    let w = a.inner() * s;
    let proj = s.adjoint() * &w;

    // sum over the full eigenbasis of sqrt(l) sqrt(m) |A_lm|^2, split into
    // explicit/explicit, explicit/complement and complement/complement parts
    let mut explicit = 0.0;
    let mut inside_norms = vec![0.0; r];
    for l in 0..r {
        for m in 0..r {
            let a2 = proj[(l, m)].norm_sqr();
            explicit += sq[l] * sq[m] * a2;
            inside_norms[l] += a2;
        }
    }
    let row_norms: Vec<f64> = (0..r).map(|l| w.column(l).norm_squared()).collect();
    let mut cross = 0.0;
    for l in 0..r {
        cross += 2.0 * sq[l] * sq_mu * (row_norms[l] - inside_norms[l]);
    }
    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let comp = spectrum.remainder
        * (frob - 2.0 * row_norms.iter().sum::<f64>() + inside_norms.iter().sum::<f64>());
    let second = state.expect(&(a * a)).re;
    let v = second - (explicit + cross + comp);
    Ok(if (-HERMITICITY_TOL..0.0).contains(&v) { 0.0 } else { v })
}
