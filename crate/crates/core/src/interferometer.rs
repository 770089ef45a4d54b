//! Phase imprinting rho -> exp(-i theta J_n) rho exp(+i theta J_n), projective
//! measurements, and the classical Fisher information they extract.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collective::{check_qubits, j_direction, Axis, Direction};
use crate::error::{param, Error, Result};
use crate::matcore::{eigh, herm_exp, CVector, ComplexMatrix, C64, ONE, ZERO};
use crate::qfi::qfi_direction;
use crate::states::{apply_local_unitary, basis_unitary, random_unitary, QuantumState};

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_STEP: f64 = 1e-4;
pub const PROBABILITY_FLOOR: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSetting {
    pub theta: f64,
    pub direction: Direction,
}

impl PhaseSetting {
    pub fn new(theta: f64, direction: Direction) -> Result<Self> {
        if !theta.is_finite() {
            return param("phase must be finite");
        }
        Ok(Self { theta, direction })
    }
}

/// Complete projective measurement. Each outcome is stored as an orthonormal
/// basis of its projector's range (P = V V^dagger).
#[derive(Debug, Clone)]
pub struct Measurement {
    dim: usize,
    ranges: Vec<DMatrix<C64>>,
}

impl Measurement {
    /// From explicit projectors; checks P^2 = P and sum P = I.
    pub fn from_projectors(projectors: &[ComplexMatrix]) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return param("measurement needs at least one outcome");
        };
        let dim = first.dim();
        let mut total = ComplexMatrix::zeros(dim);
        let mut ranges = Vec::with_capacity(projectors.len());
        for (k, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            let idem = (p * p).max_abs_diff(p);
            if idem > PROJECTOR_TOL {
                return param(format!("outcome {k} is not idempotent (residue {idem:e})"));
            }
            let dec = eigh(p)?;
            let cols: Vec<usize> = (0..dim).filter(|&i| dec.eigenvalues[i] > 0.5).collect();
            ranges.push(DMatrix::from_fn(dim, cols.len(), |i, j| dec.eigenvectors[(i, cols[j])]));
            total = &total + p;
        }
        let complete = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if complete > PROJECTOR_TOL {
            return param(format!("projectors do not sum to the identity (residue {complete:e})"));
        }
        Ok(Self { dim, ranges })
    }

    /// Outcomes given directly by orthonormal range bases.
    fn from_ranges(dim: usize, ranges: Vec<DMatrix<C64>>) -> Self {
        Self { dim, ranges }
    }

    /// Projectors onto the +1 and -1 eigenspaces of sigma_axis on every qubit.
    pub fn parity(axis: Axis, n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let u = basis_unitary(axis);
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for b in 0..dim {
            let v = apply_local_unitary(&u, n_qubits, &unit(dim, b));
            if b.count_ones() % 2 == 0 { even.push(v) } else { odd.push(v) }
        }
        Ok(Self::from_ranges(dim, vec![columns(dim, &even), columns(dim, &odd)]))
    }

    /// Every qubit measured along `axis`: 2^N rank-one outcomes.
    pub fn local(axis: Axis, n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let u = basis_unitary(axis);
        let ranges = (0..dim).map(|b| columns(dim, &[apply_local_unitary(&u, n_qubits, &unit(dim, b))])).collect();
        Ok(Self::from_ranges(dim, ranges))
    }

    /// Eigenprojectors of J_n, one outcome per distinct eigenvalue.
    pub fn spin_eigenbasis(direction: Direction, n_qubits: usize) -> Result<Self> {
        let jn = j_direction(direction, n_qubits)?;
        let dec = eigh(&jn)?;
        let dim = jn.dim();
        let mut ranges = Vec::new();
        let mut start = 0;
        while start < dim {
            let level = (2.0 * dec.eigenvalues[start]).round();
            let mut end = start;
            while end < dim && (2.0 * dec.eigenvalues[end]).round() == level {
                end += 1;
            }
            ranges.push(dec.eigenvectors.columns(start, end - start).clone_owned());
            start = end;
        }
        Ok(Self::from_ranges(dim, ranges))
    }

    /// Rank-one projectors onto the columns of a Haar-random unitary.
    pub fn random_basis(n_qubits: usize, seed: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let u = random_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed));
        Ok(Self::from_ranges(dim, (0..dim).map(|k| u.columns(k, 1).clone_owned()).collect()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.ranges.iter().map(|r| ComplexMatrix::new(r * r.adjoint()).expect("finite")).collect()
    }

    /// Outcome probabilities Tr(P_k rho).
    pub fn probabilities(&self, state: &QuantumState) -> Result<Vec<f64>> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: state.dim() });
        }
        let spectrum = state.spectrum();
        let mu = spectrum.remainder;
        Ok(self
            .ranges
            .iter()
            .map(|r| {
                let overlaps = r.adjoint() * &spectrum.vectors;
                let explicit: f64 = spectrum
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(l, &w)| (w - mu) * overlaps.column(l).norm_squared())
                    .sum();
                explicit + mu * r.ncols() as f64
            })
            .collect())
    }
}

fn unit(dim: usize, k: usize) -> CVector {
    let mut v = CVector::from_element(dim, ZERO);
    v[k] = ONE;
    v
}

fn columns(dim: usize, vs: &[CVector]) -> DMatrix<C64> {
    DMatrix::from_fn(dim, vs.len(), |i, j| vs[j][i])
}

/// exp(-i theta J_n)
pub fn phase_unitary(setting: &PhaseSetting, n_qubits: usize) -> Result<ComplexMatrix> {
    herm_exp(&j_direction(setting.direction, n_qubits)?, -setting.theta)
}

pub fn evolve(state: &QuantumState, setting: &PhaseSetting) -> Result<QuantumState> {
    if setting.theta == 0.0 {
        return Ok(state.clone());
    }
    state.conjugated(&phase_unitary(setting, state.n_qubits())?)
}

/// Finite-difference controls for [`classical_fisher`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherProbe {
    pub step: f64,
    pub probability_floor: f64,
}

impl Default for FisherProbe {
    fn default() -> Self {
        Self { step: DEFAULT_STEP, probability_floor: PROBABILITY_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFisher {
    pub value: f64,
    pub probabilities: Vec<f64>,
    /// Outcomes skipped because their probability fell below the floor.
    pub excluded_outcomes: Vec<usize>,
}

/// F_cl(theta) = sum_k (d p_k / d theta)^2 / p_k by central differences.
pub fn classical_fisher(
    state: &QuantumState,
    setting: &PhaseSetting,
    measurement: &Measurement,
    probe: FisherProbe,
) -> Result<ClassicalFisher> {
    let n = state.n_qubits();
    let jn = j_direction(setting.direction, n)?;
    let dec = eigh(&jn)?;
    let at = |theta: f64| -> Result<Vec<f64>> {
        let u = dec.map_eigenvalues(|l| C64::from_polar(1.0, -theta * l));
        measurement.probabilities(&state.conjugated(&u)?)
    };
    let h = probe.step;
    let p0 = at(setting.theta)?;
    let plus = at(setting.theta + h)?;
    let minus = at(setting.theta - h)?;
    let mut value = 0.0;
    let mut excluded = Vec::new();
    for k in 0..p0.len() {
        if p0[k] < probe.probability_floor {
            excluded.push(k);
            continue;
        }
        let d = (plus[k] - minus[k]) / (2.0 * h);
        value += d * d / p0[k];
    }
    Ok(ClassicalFisher { value, probabilities: p0, excluded_outcomes: excluded })
}

/// Quantum Cramer-Rao limit on the phase uncertainty for one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CramerRao {
    Bounded { fisher: f64, min_std: f64 },
    /// No sensitivity to rotations about this axis.
    Unbounded { fisher: f64 },
}

impl CramerRao {
    pub fn min_std(&self) -> Option<f64> {
        match self {
            CramerRao::Bounded { min_std, .. } => Some(*min_std),
            CramerRao::Unbounded { .. } => None,
        }
    }
}

pub fn crb_bound(state: &QuantumState, direction: Direction, tol: f64) -> Result<CramerRao> {
    let fisher = qfi_direction(state, direction)?;
    Ok(if fisher <= tol {
        CramerRao::Unbounded { fisher }
    } else {
        CramerRao::Bounded { fisher, min_std: fisher.sqrt().recip() }
    })
}

/// Declarative measurement choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSpec {
    Parity { axis: Axis },
    Local { axis: Axis },
    SpinEigenbasis { direction: Direction },
    Random { seed: u64 },
}

impl MeasurementSpec {
    pub fn build(&self, n_qubits: usize) -> Result<Measurement> {
        match *self {
            MeasurementSpec::Parity { axis } => Measurement::parity(axis, n_qubits),
            MeasurementSpec::Local { axis } => Measurement::local(axis, n_qubits),
            MeasurementSpec::SpinEigenbasis { direction } => Measurement::spin_eigenbasis(direction, n_qubits),
            MeasurementSpec::Random { seed } => Measurement::random_basis(n_qubits, seed),
        }
    }
}

/// Quantum and classical Fisher information side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbReport {
    pub setting: PhaseSetting,
    pub quantum_fisher: f64,
    pub classical_fisher: f64,
    pub bound: CramerRao,
    /// F_cl <= F_Q + tolerance.
    pub ordering_holds: bool,
    pub excluded_outcomes: Vec<usize>,
}

pub fn crb_report(
    state: &QuantumState,
    setting: &PhaseSetting,
    measurement: &Measurement,
    probe: FisherProbe,
    tol: f64,
) -> Result<CrbReport> {
    let bound = crb_bound(state, setting.direction, tol)?;
    let quantum_fisher = match bound {
        CramerRao::Bounded { fisher, .. } | CramerRao::Unbounded { fisher } => fisher,
    };
    let cl = classical_fisher(state, setting, measurement, probe)?;
    Ok(CrbReport {
        setting: *setting,
        quantum_fisher,
        classical_fisher: cl.value,
        bound,
        ordering_holds: cl.value <= quantum_fisher + 1e-6,
        excluded_outcomes: cl.excluded_outcomes,
    })
}
