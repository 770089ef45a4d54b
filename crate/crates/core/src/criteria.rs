//! Entanglement bounds on the Fisher information of collective spin operators
//! and the reports built from them.
//!
//! All bound functions take the register size `n_qubits` (N). Block counts use
//! n = floor(N / k).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collective::{check_qubits, Axis};
use crate::error::{param, Result};
use crate::qfi::{gamma_c, spin_moments, FisherTriple, GammaMatrix};
use crate::states::QuantumState;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Which bound a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum CriterionId {
    /// sum_l F_l <= 2N
    SeparableSum,
    /// max_l F_l <= N
    SeparableSingle,
    /// sum_l F_l <= N(N+2), valid for every state
    MaxSum,
    /// max_l F_l <= n k^2 + (N - nk)^2
    KProducibleSingle { k: usize },
    /// sum_l F_l <= k-producible sum bound
    KProducibleSum { k: usize },
    /// max_l F_l <= (N-1)^2 + 1
    BiseparableSingle,
    /// sum_l F_l <= N^2 + 1
    BiseparableSum,
    /// sum_l F_l <= M + (N-M)(N-M+2)
    Unentangled { m: usize },
    /// sum_l (Delta J_l)^2 >= N/2
    VarianceSum,
    GammaTraceSeparable,
    GammaMaxEigenSeparable,
    GammaTraceKProducible { k: usize },
    GammaMaxEigenKProducible { k: usize },
    GammaTraceBiseparable,
    GammaMaxEigenBiseparable,
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionId::SeparableSum => write!(f, "separable_sum"),
            CriterionId::SeparableSingle => write!(f, "separable_single"),
            CriterionId::MaxSum => write!(f, "max_sum"),
            CriterionId::KProducibleSingle { k } => write!(f, "k_producible_single(k={k})"),
            CriterionId::KProducibleSum { k } => write!(f, "k_producible_sum(k={k})"),
            CriterionId::BiseparableSingle => write!(f, "biseparable_single"),
            CriterionId::BiseparableSum => write!(f, "biseparable_sum"),
            CriterionId::Unentangled { m } => write!(f, "unentangled(M={m})"),
            CriterionId::VarianceSum => write!(f, "variance_sum"),
            CriterionId::GammaTraceSeparable => write!(f, "gamma_trace_separable"),
            CriterionId::GammaMaxEigenSeparable => write!(f, "gamma_max_eigen_separable"),
            CriterionId::GammaTraceKProducible { k } => write!(f, "gamma_trace_k_producible(k={k})"),
            CriterionId::GammaMaxEigenKProducible { k } => write!(f, "gamma_max_eigen_k_producible(k={k})"),
            CriterionId::GammaTraceBiseparable => write!(f, "gamma_trace_biseparable"),
            CriterionId::GammaMaxEigenBiseparable => write!(f, "gamma_max_eigen_biseparable"),
        }
    }
}

/// What a violation certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Implication {
    Entangled,
    NotKProducible { k: usize },
    ContainsFewerThanMUnentangled { m: usize },
    GenuineMultipartite,
    /// The bound holds for every quantum state; a violation means bad input or numerics.
    Unphysical,
}

/// Whether the criterion holds as `value <= bound` or `value >= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub bound: f64,
    pub value: f64,
    /// Distance past the bound: value - bound for upper bounds, bound - value for lower bounds.
    pub margin: f64,
    pub violated: bool,
    pub sense: Sense,
    pub implication: Implication,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CriterionReport {
    pub fn new(criterion: CriterionId, sense: Sense, bound: f64, value: f64, implication: Implication, tol: f64) -> Self {
        let margin = match sense {
            Sense::Upper => value - bound,
            Sense::Lower => bound - value,
        };
        CriterionReport { criterion, bound, value, margin, violated: margin > tol, sense, implication, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthCertificate {
    /// The state contains entanglement of at least this many particles.
    pub depth_lower_bound: usize,
    /// Strongest violated criterion, absent when nothing is violated.
    pub witnessing_criterion: Option<CriterionId>,
    pub witness_value: Option<f64>,
    pub witness_bound: Option<f64>,
}

fn check_k(n_qubits: usize, k: usize) -> Result<()> {
    check_qubits(n_qubits)?;
    if k == 0 || k > n_qubits {
        return param(format!("k = {k} outside 1..={n_qubits}"));
    }
    Ok(())
}

pub fn bound_separable_sum(n_qubits: usize) -> f64 {
    2.0 * n_qubits as f64
}

pub fn bound_separable_single(n_qubits: usize) -> f64 {
    n_qubits as f64
}

pub fn bound_max_sum(n_qubits: usize) -> f64 {
    let n = n_qubits as f64;
    n * (n + 2.0)
}

/// n k^2 + (N - nk)^2 with n = floor(N/k).
pub fn bound_kprod_single(n_qubits: usize, k: usize) -> Result<f64> {
    check_k(n_qubits, k)?;
    let blocks = n_qubits / k;
    let rest = n_qubits - blocks * k;
    Ok((blocks * k * k + rest * rest) as f64)
}

/// n k (k+2) + (N - nk)(N - nk + 2), or n k (k+2) + 2 when a single qubit is left over.
pub fn bound_kprod_sum(n_qubits: usize, k: usize) -> Result<f64> {
    check_k(n_qubits, k)?;
    let blocks = n_qubits / k;
    Ok(block_sum(n_qubits, k, blocks))
}

fn block_sum(n_qubits: usize, k: usize, blocks: usize) -> f64 {
    let rest = n_qubits - blocks * k;
    let tail = if rest == 1 { 2 } else { rest * (rest + 2) };
    (blocks * k * (k + 2) + tail) as f64
}

/// ((N-1)^2 + 1, N^2 + 1): single-axis and sum bounds for biseparable states.
pub fn bounds_biseparable(n_qubits: usize) -> Result<(f64, f64)> {
    check_qubits(n_qubits)?;
    if n_qubits < 2 {
        return param("biseparability needs at least 2 qubits");
    }
    let n = n_qubits as f64;
    Ok(((n - 1.0).powi(2) + 1.0, n * n + 1.0))
}

/// Biseparable bounds obtained by maximizing the single-block (n = 1)
/// k-producible bounds over the larger block size k.
pub fn bounds_biseparable_by_maximization(n_qubits: usize) -> Result<(f64, f64)> {
    check_qubits(n_qubits)?;
    if n_qubits < 2 {
        return param("biseparability needs at least 2 qubits");
    }
    let mut best = (0.0f64, 0.0f64);
    for k in n_qubits.div_ceil(2)..n_qubits {
        let rest = n_qubits - k;
        best.0 = best.0.max((k * k + rest * rest) as f64);
        best.1 = best.1.max(block_sum(n_qubits, k, 1));
    }
    Ok(best)
}

/// M + (N-M)(N-M+2), evaluated as stated for states with at least M unentangled particles.
pub fn bound_unentangled(n_qubits: usize, m_unentangled: usize) -> Result<f64> {
    check_qubits(n_qubits)?;
    if m_unentangled > n_qubits {
        return param(format!("M = {m_unentangled} exceeds N = {n_qubits}"));
    }
    let (m, r) = (m_unentangled, n_qubits - m_unentangled);
    Ok((m + r * (r + 2)) as f64)
}

const UNENTANGLED_NOTE: &str = "each unentangled qubit is counted as contributing 1 to the sum; \
a pure single qubit contributes 2, so product states exceed this bound for large M";

/// Sum of the three spin variances against N/2; values below flag entanglement.
pub fn variance_criterion(state: &QuantumState, tol: f64) -> CriterionReport {
    let total: f64 = spin_moments(state).variances().iter().sum();
    variance_report(state.n_qubits(), total, tol)
}

fn variance_report(n_qubits: usize, total: f64, tol: f64) -> CriterionReport {
    CriterionReport::new(CriterionId::VarianceSum, Sense::Lower, n_qubits as f64 / 2.0, total, Implication::Entangled, tol)
        .with_note("detects sum_l (Delta J_l)^2 < N/2; product states sit exactly at N/2")
}

/// Rotation-invariant forms built from the trace and largest eigenvalue of Gamma.
pub fn gamma_criteria(gamma: &GammaMatrix, n_qubits: usize, k: usize, tol: f64) -> Result<Vec<CriterionReport>> {
    check_k(n_qubits, k)?;
    let tr = gamma.trace();
    let lmax = gamma.max_eigenvalue();
    let up = |id, bound, value, imp| CriterionReport::new(id, Sense::Upper, bound, value, imp, tol);
    let mut out = vec![
        up(CriterionId::GammaTraceSeparable, bound_separable_sum(n_qubits), tr, Implication::Entangled),
        up(CriterionId::GammaMaxEigenSeparable, bound_separable_single(n_qubits), lmax, Implication::Entangled),
        up(CriterionId::GammaTraceKProducible { k }, bound_kprod_sum(n_qubits, k)?, tr, Implication::NotKProducible { k }),
        up(
            CriterionId::GammaMaxEigenKProducible { k },
            bound_kprod_single(n_qubits, k)?,
            lmax,
            Implication::NotKProducible { k },
        ),
    ];
    if n_qubits >= 2 {
        let (single, sum) = bounds_biseparable(n_qubits)?;
        out.push(up(CriterionId::GammaTraceBiseparable, sum, tr, Implication::GenuineMultipartite));
        out.push(up(CriterionId::GammaMaxEigenBiseparable, single, lmax, Implication::GenuineMultipartite));
    }
    Ok(out)
}

/// Depth ladder over k = 1..N-1 on Gamma's trace and largest eigenvalue.
/// At k = 1 the trace is compared with 2N rather than the k-producible 3N.
pub fn depth_from_gamma(gamma: &GammaMatrix, tol: f64) -> Result<DepthCertificate> {
    let n = gamma.n_qubits;
    check_qubits(n)?;
    let tr = gamma.trace();
    let lmax = gamma.max_eigenvalue();
    let mut cert = DepthCertificate { depth_lower_bound: 1, witnessing_criterion: None, witness_value: None, witness_bound: None };
    for k in 1..n {
        let sum_bound = if k == 1 { bound_separable_sum(n) } else { bound_kprod_sum(n, k)? };
        let single_bound = bound_kprod_single(n, k)?;
        let candidates = [
            (CriterionId::GammaTraceKProducible { k }, tr, sum_bound),
            (CriterionId::GammaMaxEigenKProducible { k }, lmax, single_bound),
        ];
        if let Some(&(id, value, bound)) = candidates.iter().find(|(_, v, b)| v - b > tol) {
            cert = DepthCertificate {
                depth_lower_bound: k + 1,
                witnessing_criterion: Some(id),
                witness_value: Some(value),
                witness_bound: Some(bound),
            };
        }
    }
    Ok(cert)
}

pub fn depth_lower_bound(state: &QuantumState, tol: f64) -> Result<DepthCertificate> {
    depth_from_gamma(&gamma_c(state)?, tol)
}

/// Smallest M whose unentangled-particle bound is violated by `sum`, if any.
pub fn fewest_unentangled_claim(n_qubits: usize, sum: f64, tol: f64) -> Result<Option<usize>> {
    for m in 1..=n_qubits {
        if sum - bound_unentangled(n_qubits, m)? > tol {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Criteria that read only the axis triple (sum and max component).
pub fn triple_criteria(triple: FisherTriple, n_qubits: usize, tol: f64) -> Result<Vec<CriterionReport>> {
    check_qubits(n_qubits)?;
    let sum = triple.sum();
    let (arg, max) = Axis::ALL.iter().fold((Axis::X, f64::NEG_INFINITY), |(a, m), &ax| {
        let v = triple.get(ax);
        if v > m { (ax, v) } else { (a, m) }
    });
    let axis_note = format!("largest component along {arg}");
    let up = |id, bound, value, imp| CriterionReport::new(id, Sense::Upper, bound, value, imp, tol);

    let mut out = vec![
        up(CriterionId::SeparableSum, bound_separable_sum(n_qubits), sum, Implication::Entangled),
        up(CriterionId::SeparableSingle, bound_separable_single(n_qubits), max, Implication::Entangled).with_note(axis_note.clone()),
        up(CriterionId::MaxSum, bound_max_sum(n_qubits), sum, Implication::Unphysical),
    ];
    for k in 2..n_qubits {
        out.push(
            up(CriterionId::KProducibleSingle { k }, bound_kprod_single(n_qubits, k)?, max, Implication::NotKProducible { k })
                .with_note(axis_note.clone()),
        );
    }
    for k in 2..n_qubits {
        out.push(up(CriterionId::KProducibleSum { k }, bound_kprod_sum(n_qubits, k)?, sum, Implication::NotKProducible { k }));
    }
    if n_qubits >= 2 {
        let (single, total) = bounds_biseparable(n_qubits)?;
        out.push(up(CriterionId::BiseparableSingle, single, max, Implication::GenuineMultipartite).with_note(axis_note));
        out.push(up(CriterionId::BiseparableSum, total, sum, Implication::GenuineMultipartite));
    }
    for m in 1..=n_qubits {
        out.push(
            up(CriterionId::Unentangled { m }, bound_unentangled(n_qubits, m)?, sum, Implication::ContainsFewerThanMUnentangled { m })
                .with_note(UNENTANGLED_NOTE),
        );
    }
    Ok(out)
}

/// Everything the crate can say about one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub reports: Vec<CriterionReport>,
    pub depth: DepthCertificate,
    /// Smallest M for which "fewer than M unentangled particles" is certified.
    pub fewest_unentangled: Option<usize>,
}

impl Evaluation {
    pub fn violations(&self) -> impl Iterator<Item = &CriterionReport> {
        self.reports.iter().filter(|r| r.violated)
    }

    pub fn report(&self, id: CriterionId) -> Option<&CriterionReport> {
        self.reports.iter().find(|r| r.criterion == id)
    }
}

/// Full ordered report list from precomputed Fisher data.
pub fn evaluate_gamma(gamma: &GammaMatrix, variance_sum: f64, tol: f64) -> Result<Evaluation> {
    let n = gamma.n_qubits;
    let triple = gamma.fisher_triple();
    let mut reports = triple_criteria(triple, n, tol)?;
    reports.push(variance_report(n, variance_sum, tol));
    reports.extend(gamma_criteria(gamma, n, 1, tol)?.into_iter().filter(|r| {
        !matches!(r.criterion, CriterionId::GammaTraceKProducible { .. } | CriterionId::GammaMaxEigenKProducible { .. })
    }));
    for k in 2..n {
        reports.extend(gamma_criteria(gamma, n, k, tol)?.into_iter().filter(|r| {
            matches!(r.criterion, CriterionId::GammaTraceKProducible { .. } | CriterionId::GammaMaxEigenKProducible { .. })
        }));
    }
    Ok(Evaluation {
        reports,
        depth: depth_from_gamma(gamma, tol)?,
        fewest_unentangled: fewest_unentangled_claim(n, triple.sum(), tol)?,
    })
}

pub fn evaluate_all(state: &QuantumState, tol: f64) -> Result<Evaluation> {
    let gamma = gamma_c(state)?;
    let variance_sum = spin_moments(state).variances().iter().sum();
    evaluate_gamma(&gamma, variance_sum, tol)
}
