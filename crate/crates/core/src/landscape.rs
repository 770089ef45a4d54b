//! Geometry of the (F_x, F_y, F_z) space: named landmark states, convex
//! polytopes of reachable points, the plane of symmetric Dicke superpositions,
//! white-noise lines, and explicit states realizing interior points.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collective::{apply_j, check_qubits, Axis};
use crate::error::{param, Error, Result};
use crate::matcore::{CVector, C64, ZERO};
use crate::qfi::gamma_c;
use crate::states::{
    dicke_vector_in, from_spec, white_noise_mix, ComplexValue, QuantumState, StateSpec,
};

/// Default membership tolerance in Fisher-information units.
pub const GEOMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherPoint {
    pub p: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<StateSpec>,
}

impl FisherPoint {
    pub fn new(p: [f64; 3]) -> Self {
        Self { p, label: None, provenance: None }
    }

    pub fn labeled(p: [f64; 3], label: impl Into<String>) -> Self {
        Self { p, label: Some(label.into()), provenance: None }
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &[f64; 3]) -> f64 {
        (0..3).map(|k| (self.p[k] - other[k]).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> FisherPoint {
        FisherPoint::new(self.p.map(|x| x * s))
    }
}

/// Triple of a state as a point.
pub fn fisher_point(state: &QuantumState) -> Result<FisherPoint> {
    Ok(FisherPoint::new(gamma_c(state)?.fisher_triple().0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub name: String,
    pub vertices: Vec<FisherPoint>,
}

impl Polytope {
    pub fn new(name: impl Into<String>, vertices: Vec<FisherPoint>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Geometry("polytope needs at least one vertex".into()));
        }
        if vertices.iter().flat_map(|v| v.p).any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite vertex".into()));
        }
        Ok(Self { name: name.into(), vertices })
    }

    pub fn contains(&self, q: &[f64; 3], tol: f64) -> bool {
        polytope_contains(self, q, tol)
    }
}

/// Barycentric weights of `q` over a vertex subset, if it lies in their hull.
fn hull_weights(verts: &[&[f64; 3]], q: &[f64; 3], tol: f64) -> Option<Vec<f64>> {
    let m = verts.len();
    let a = DMatrix::from_fn(4, m, |r, c| if r < 3 { verts[c][r] } else { 1.0 });
    let b = DVector::from_vec(vec![q[0], q[1], q[2], 1.0]);
    let svd = a.clone().svd(true, true);
    let w = svd.solve(&b, 1e-12).ok()?;
    let resid = (&a * &w - &b).amax();
    (resid <= tol && w.iter().all(|&x| x >= -tol)).then(|| w.iter().copied().collect())
}

/// Convex-hull membership by enumerating every subset of at most four vertices.
pub fn polytope_contains(poly: &Polytope, q: &[f64; 3], tol: f64) -> bool {
    let verts: Vec<&[f64; 3]> = poly.vertices.iter().map(|v| &v.p).collect();
    let n = verts.len();
    for size in 1..=n.min(4) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let subset: Vec<&[f64; 3]> = idx.iter().map(|&i| verts[i]).collect();
            if hull_weights(&subset, q, tol).is_some() {
                return true;
            }
            // next combination
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    false
}

fn require_even(n_qubits: usize) -> Result<()> {
    check_qubits(n_qubits)?;
    if !n_qubits.is_multiple_of(2) {
        return param(format!("landmark families need an even register, got {n_qubits}"));
    }
    Ok(())
}

fn permutations(name: &str, z_point: [f64; 3]) -> Vec<FisherPoint> {
    // the z-labelled point has its distinguished coordinate last
    let [a, _, c] = z_point;
    vec![
        FisherPoint::labeled([c, a, a], format!("{name}_x")),
        FisherPoint::labeled([a, c, a], format!("{name}_y")),
        FisherPoint::labeled([a, a, c], format!("{name}_z")),
    ]
}

/// Tabulated landmark coordinates in a fixed order: C, S, D, G, GHZ.
pub fn landmark_points(n_qubits: usize) -> Result<Vec<FisherPoint>> {
    require_even(n_qubits)?;
    let n = n_qubits as f64;
    let mut out = vec![FisherPoint::labeled([0.0; 3], "C")];
    out.extend(permutations("S", [n, n, 0.0]));
    let d = n * (n + 2.0) / 2.0;
    out.extend(permutations("D", [d, d, 0.0]));
    let g = n * n / 2.0 + 0.5;
    out.extend(permutations("G", [g, g, 0.0]));
    out.extend(permutations("GHZ", [n, n, n * n]));
    Ok(out)
}

/// State spec realizing a landmark label (as produced by [`landmark_points`]).
pub fn landmark_spec(label: &str, n_qubits: usize) -> Result<StateSpec> {
    let (family, axis) = match label.rsplit_once('_') {
        Some((f, a)) => (f, Some(a.parse::<Axis>()?)),
        None => (label, None),
    };
    Ok(match (family, axis) {
        ("C", None) => StateSpec::CompletelyMixed { n_qubits },
        ("S", Some(a)) => StateSpec::ProductBloch { n_qubits, bloch: a.unit() },
        ("D", Some(basis)) => StateSpec::Dicke { n_qubits, excitations: n_qubits / 2, basis },
        ("G", Some(basis)) => StateSpec::GState { n_qubits, basis },
        ("GHZ", Some(basis)) => StateSpec::Ghz { n_qubits, basis },
        _ => return param(format!("unknown landmark {label}")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkCheck {
    pub label: String,
    pub tabulated: [f64; 3],
    pub computed: [f64; 3],
    pub deviation: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n_qubits: usize,
    pub checks: Vec<LandmarkCheck>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.consistent)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.consistent).map(|c| c.label.as_str()).collect()
    }

    pub fn check(&self, label: &str) -> Option<&LandmarkCheck> {
        self.checks.iter().find(|c| c.label == label)
    }
}

/// Rebuilds every landmark state and compares its triple with the tabulated point.
pub fn landmark_consistency(n_qubits: usize, tol: f64) -> Result<ConsistencyReport> {
    let checks = landmark_points(n_qubits)?
        .into_iter()
        .map(|pt| {
            let label = pt.label.clone().unwrap_or_default();
            let state = from_spec(&landmark_spec(&label, n_qubits)?)?;
            let computed = gamma_c(&state)?.fisher_triple().0;
            let deviation = pt.max_abs_diff(&computed);
            Ok(LandmarkCheck { label, tabulated: pt.p, computed, deviation, consistent: deviation <= tol })
        })
        .collect::<Result<_>>()?;
    Ok(ConsistencyReport { n_qubits, checks })
}

fn pick(points: &[FisherPoint], labels: &[&str]) -> Vec<FisherPoint> {
    labels
        .iter()
        .filter_map(|l| points.iter().find(|p| p.label.as_deref() == Some(l)).cloned())
        .collect()
}

/// {S_x, S_y, S_z, C}: points reachable by separable states.
pub fn separable_polytope(n_qubits: usize) -> Result<Polytope> {
    Polytope::new("S-C", pick(&landmark_points(n_qubits)?, &["S_x", "S_y", "S_z", "C"]))
}

/// {D_x, D_y, D_z}: the plane of maximal total Fisher information.
pub fn dicke_triangle(n_qubits: usize) -> Result<Polytope> {
    Polytope::new("D", pick(&landmark_points(n_qubits)?, &["D_x", "D_y", "D_z"]))
}

/// {C, D_x, D_y, D_z}
pub fn dicke_polytope(n_qubits: usize) -> Result<Polytope> {
    Polytope::new("C-D", pick(&landmark_points(n_qubits)?, &["C", "D_x", "D_y", "D_z"]))
}

/// {D_x, D_y, D_z, G_x, G_y, G_z} with G at its tabulated coordinates.
pub fn dicke_g_polytope(n_qubits: usize) -> Result<Polytope> {
    Polytope::new("D-G", pick(&landmark_points(n_qubits)?, &["D_x", "D_y", "D_z", "G_x", "G_y", "G_z"]))
}

/// Gamma scale factor p^2 / (p + (1 - p) 2^{-(N-1)}) of white-noise mixing of a pure state.
pub fn noise_scale(p: f64, n_qubits: usize) -> f64 {
    let delta = 2f64.powi(1 - n_qubits as i32);
    let den = p + (1.0 - p) * delta;
    if den == 0.0 { 0.0 } else { p * p / den }
}

/// Noise weight p in [0, 1] whose scale factor equals `s` in [0, 1].
pub fn noise_weight_for_scale(s: f64, n_qubits: usize) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&s) {
        return param(format!("scale {s} outside [0, 1]"));
    }
    let s = s.min(1.0);
    let delta = 2f64.powi(1 - n_qubits as i32);
    // p^2 - s(1 - delta) p - s delta = 0
    let b = s * (1.0 - delta);
    Ok(((b + (b * b + 4.0 * s * delta).sqrt()) / 2.0).clamp(0.0, 1.0))
}

/// Product state whose triple is `q`, for `q` on the {S_x, S_y, S_z} triangle.
pub fn fill_s_triangle(q: &[f64; 3], n_qubits: usize) -> Result<StateSpec> {
    require_even(n_qubits)?;
    let n = n_qubits as f64;
    let tri = Polytope::new("S", pick(&landmark_points(n_qubits)?, &["S_x", "S_y", "S_z"]))?;
    if !tri.contains(q, GEOMETRY_TOL) {
        return Err(Error::Geometry(format!("{q:?} is not on the S triangle for N = {n_qubits}")));
    }
    let mut c = q.map(|f| (1.0 - f / n).max(0.0).sqrt());
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c = c.map(|x| x / norm);
    Ok(StateSpec::ProductBloch { n_qubits, bloch: c })
}

/// Separable state for any point of the {S_x, S_y, S_z, C} polytope: a product
/// state on the S triangle mixed with white noise.
pub fn fill_s_polytope(q: &[f64; 3], n_qubits: usize) -> Result<StateSpec> {
    require_even(n_qubits)?;
    if !separable_polytope(n_qubits)?.contains(q, GEOMETRY_TOL) {
        return Err(Error::Geometry(format!("{q:?} is outside the separable polytope")));
    }
    let s = q.iter().sum::<f64>() / (2.0 * n_qubits as f64);
    if s <= GEOMETRY_TOL {
        return Ok(StateSpec::CompletelyMixed { n_qubits });
    }
    let on_plane = q.map(|x| x / s);
    let inner = fill_s_triangle(&on_plane, n_qubits)?;
    if (s - 1.0).abs() <= 1e-12 {
        return Ok(inner);
    }
    Ok(StateSpec::WhiteNoiseMix { p: noise_weight_for_scale(s, n_qubits)?, inner: Box::new(inner) })
}

/// The three symmetric half-filled Dicke vectors and the matrix elements
/// between them needed by the closed-form Gamma of their superpositions.
#[derive(Debug, Clone)]
pub struct DickePlane {
    n_qubits: usize,
    kets: [CVector; 3],
    triangle: Polytope,
}

impl DickePlane {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        if !n_qubits.is_multiple_of(4) {
            return param(format!("Dicke superpositions need N divisible by 4, got {n_qubits}"));
        }
        let kets = Axis::ALL.map(|a| dicke_vector_in(n_qubits, n_qubits / 2, a));
        Ok(Self { n_qubits, kets, triangle: dicke_triangle(n_qubits)? })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// N(N+2)/2
    pub fn vertex_value(&self) -> f64 {
        let n = self.n_qubits as f64;
        n * (n + 2.0) / 2.0
    }

    /// <D_a| J_l^2 |D_b>
    pub fn second_moment_element(&self, a: Axis, l: Axis, b: Axis) -> C64 {
        let jb = apply_j(l, self.n_qubits, &self.kets[b.index()]);
        let ja = apply_j(l, self.n_qubits, &self.kets[a.index()]);
        ja.dotc(&jb)
    }

    /// Q for the Gamma_ll entry: <D_a|J_l^2|D_b> with (l, a, b) cyclic.
    pub fn q(&self, l: Axis) -> C64 {
        let (a, b) = cyclic_pair(l);
        self.second_moment_element(a, l, b)
    }

    /// Normalized superposition vector and the post-normalization amplitudes.
    pub fn superpose(&self, alpha: [C64; 3]) -> Result<(CVector, [C64; 3])> {
        let mut v = CVector::from_element(1usize << self.n_qubits, ZERO);
        for k in 0..3 {
            v += &self.kets[k] * alpha[k];
        }
        let norm = v.norm();
        if norm < 1e-300 {
            return param("superposition vanishes");
        }
        Ok((v.unscale(norm), alpha.map(|a| a / norm)))
    }

    /// Direct Fisher triple of the normalized superposition.
    pub fn direct_triple(&self, alpha: [C64; 3]) -> Result<[f64; 3]> {
        let (v, _) = self.superpose(alpha)?;
        let state = QuantumState::from_pure(self.n_qubits, v)?;
        Ok(gamma_c(&state)?.fisher_triple().0)
    }

    /// Closed-form diagonal with a given cross-term coefficient:
    /// Gamma_ll = (|a_a|^2 + |a_b|^2) N(N+2)/2 + coef Re(a_a^* a_b Q_l).
    pub fn closed_form(&self, normalized_alpha: [C64; 3], cross_coefficient: f64) -> [f64; 3] {
        Axis::ALL.map(|l| {
            let (a, b) = cyclic_pair(l);
            let (aa, ab) = (normalized_alpha[a.index()], normalized_alpha[b.index()]);
            (aa.norm_sqr() + ab.norm_sqr()) * self.vertex_value() + cross_coefficient * (aa.conj() * ab * self.q(l)).re
        })
    }
}

fn cyclic_pair(l: Axis) -> (Axis, Axis) {
    match l {
        Axis::X => (Axis::Y, Axis::Z),
        Axis::Y => (Axis::Z, Axis::X),
        Axis::Z => (Axis::X, Axis::Y),
    }
}

/// Cross-term coefficient that follows from Gamma_ll = 4 <J_l^2> for these states.
pub const CROSS_COEFFICIENT: f64 = 8.0;
/// The coefficient as printed alongside the closed form.
pub const PRINTED_CROSS_COEFFICIENT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub n_qubits: usize,
    pub normalized_alpha: [ComplexValue; 3],
    /// Q_l = <D_a|J_l^2|D_b>, (l, a, b) cyclic.
    pub q: [ComplexValue; 3],
    pub direct: [f64; 3],
    pub closed_form: [f64; 3],
    pub max_residual: f64,
    pub max_off_diagonal: f64,
    /// Residual of the closed form with the printed cross-term coefficient.
    pub printed_form_residual: f64,
}

/// Compares the closed-form Gamma diagonal of a three-Dicke superposition with direct evaluation.
pub fn three_dicke_check(alpha: [C64; 3], n_qubits: usize) -> Result<ClosedFormReport> {
    let plane = DickePlane::new(n_qubits)?;
    closed_form_check(&plane, alpha)
}

pub fn closed_form_check(plane: &DickePlane, alpha: [C64; 3]) -> Result<ClosedFormReport> {
    let (v, normalized) = plane.superpose(alpha)?;
    let gamma = gamma_c(&QuantumState::from_pure(plane.n_qubits, v)?)?;
    let direct = gamma.fisher_triple().0;
    let closed = plane.closed_form(normalized, CROSS_COEFFICIENT);
    let printed = plane.closed_form(normalized, PRINTED_CROSS_COEFFICIENT);
    let diff = |a: &[f64; 3]| (0..3).map(|k| (a[k] - direct[k]).abs()).fold(0.0, f64::max);
    let mut off = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                off = off.max(gamma.gamma[i][j].abs());
            }
        }
    }
    Ok(ClosedFormReport {
        n_qubits: plane.n_qubits,
        normalized_alpha: normalized.map(ComplexValue::from),
        q: Axis::ALL.map(|l| plane.q(l).into()),
        direct,
        closed_form: closed,
        max_residual: diff(&closed),
        max_off_diagonal: off,
        printed_form_residual: diff(&printed),
    })
}

/// One random superposition: real and imaginary parts uniform in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSample {
    pub alpha: [ComplexValue; 3],
    pub point: FisherPoint,
    /// Whether the point lies in the {D_x, D_y, D_z} triangle (it is always in its plane).
    pub in_triangle: bool,
}

/// Coefficients of draw `index`; each draw has its own ChaCha stream so
/// results do not depend on evaluation order.
pub fn d_plane_alpha(seed: u64, index: u64) -> [C64; 3] {
    let mut rng = indexed_rng(seed, index);
    std::array::from_fn(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

pub fn d_plane_sample(plane: &DickePlane, seed: u64, index: u64) -> Result<PlaneSample> {
    let alpha = d_plane_alpha(seed, index);
    let spec = StateSpec::DickeSuperposition { n_qubits: plane.n_qubits, alpha: alpha.map(ComplexValue::from) };
    let point = FisherPoint { p: plane.direct_triple(alpha)?, label: None, provenance: Some(spec) };
    let in_triangle = plane.triangle.contains(&point.p, GEOMETRY_TOL);
    Ok(PlaneSample { alpha: alpha.map(ComplexValue::from), point, in_triangle })
}

pub fn sample_d_plane(n_qubits: usize, count: usize, seed: u64) -> Result<Vec<PlaneSample>> {
    let plane = DickePlane::new(n_qubits)?;
    (0..count as u64).map(|i| d_plane_sample(&plane, seed, i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub p: f64,
    pub direct: [[f64; 3]; 3],
    pub predicted: [[f64; 3]; 3],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLine {
    pub rows: Vec<NoiseRow>,
    pub max_residual: f64,
}

/// Gamma of p rho + (1-p) I/2^N along a grid of p, against the pure-state scaling law.
pub fn noise_line(state: &QuantumState, p_grid: &[f64]) -> Result<NoiseLine> {
    if state.pure_vector().is_none() {
        return param("the scaling law applies to pure states");
    }
    let base = gamma_c(state)?.gamma;
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let direct = gamma_c(&white_noise_mix(state, p)?)?.gamma;
        let f = noise_scale(p, state.n_qubits());
        let predicted = base.map(|r| r.map(|x| f * x));
        let residual = (0..9).map(|k| (direct[k / 3][k % 3] - predicted[k / 3][k % 3]).abs()).fold(0.0, f64::max);
        rows.push(NoiseRow { p, direct, predicted, residual });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(NoiseLine { rows, max_residual })
}

/// Coefficients found for a target point of the Dicke triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneInverse {
    pub alpha: [ComplexValue; 3],
    pub point: [f64; 3],
    pub residual: f64,
}

/// Accepted residual of the inverse search.
pub const INVERSE_TOL: f64 = 1e-6;

fn params_to_alpha(x: &[f64; 5]) -> [C64; 3] {
    [
        C64::new(x[0], 0.0),
        C64::from_polar(x[1], x[3]),
        C64::from_polar(x[2], x[4]),
    ]
}

/// Finds coefficients whose superposition lands on `target`, a point of the
/// {D_x, D_y, D_z} triangle, by damped Gauss-Newton on magnitudes and phases.
pub fn invert_d_triangle(plane: &DickePlane, target: &[f64; 3]) -> Result<PlaneInverse> {
    let tri = dicke_triangle(plane.n_qubits)?;
    if !tri.contains(target, GEOMETRY_TOL) {
        return Err(Error::Geometry(format!("{target:?} is not on the Dicke triangle")));
    }
    let scale = plane.vertex_value();
    // barycentric weight of D_l is 1 - F_l / (N(N+2)/2)
    let weights = target.map(|f| (1.0 - f / scale).max(0.0));
    let eval = |x: &[f64; 5]| -> Result<[f64; 3]> {
        let t = plane.direct_triple(params_to_alpha(x))?;
        Ok([0, 1, 2].map(|k| (t[k] - target[k]) / scale))
    };
    let phases = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, -std::f64::consts::FRAC_PI_2];
    let mut best: Option<(f64, [f64; 5])> = None;
    'starts: for &py in &phases {
        for &pz in &phases {
            let mut x = [weights[0].sqrt(), weights[1].sqrt(), weights[2].sqrt(), py, pz];
            if x[..3].iter().all(|&r| r == 0.0) {
                x[..3].copy_from_slice(&[1.0, 1.0, 1.0]);
            }
            let mut r = eval(&x)?;
            let mut cost: f64 = r.iter().map(|v| v * v).sum();
            let mut lambda = 1e-3;
            for _ in 0..200 {
                if cost.sqrt() * scale <= INVERSE_TOL * 1e-2 {
                    break;
                }
                let h = 1e-7;
                let mut jac = DMatrix::<f64>::zeros(3, 5);
                for c in 0..5 {
                    let mut xp = x;
                    xp[c] += h;
                    let mut xm = x;
                    xm[c] -= h;
                    let (rp, rm) = (eval(&xp)?, eval(&xm)?);
                    for k in 0..3 {
                        jac[(k, c)] = (rp[k] - rm[k]) / (2.0 * h);
                    }
                }
                let rv = DVector::from_row_slice(&r);
                let jt = jac.transpose();
                let mut improved = false;
                for _ in 0..20 {
                    let mut a = &jt * &jac;
                    for d in 0..5 {
                        a[(d, d)] += lambda * (1.0 + a[(d, d)]);
                    }
                    let Some(step) = a.lu().solve(&(-&jt * &rv)) else { break };
                    let mut xn = x;
                    for d in 0..5 {
                        xn[d] += step[d];
                    }
                    let rn = eval(&xn)?;
                    let cn: f64 = rn.iter().map(|v| v * v).sum();
                    if cn < cost {
                        x = xn;
                        r = rn;
                        cost = cn;
                        lambda = (lambda * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                    lambda *= 10.0;
                }
                if !improved {
                    break;
                }
            }
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, x));
            }
            if cost.sqrt() * scale <= INVERSE_TOL * 1e-2 {
                break 'starts;
            }
        }
    }
    let (cost, x) = best.expect("at least one start");
    let residual = cost.sqrt() * scale;
    let alpha = params_to_alpha(&x);
    let point = plane.direct_triple(alpha)?;
    if residual > INVERSE_TOL {
        return Err(Error::Numerical(format!("inverse search stalled at residual {residual:e}")));
    }
    let (_, normalized) = plane.superpose(alpha)?;
    Ok(PlaneInverse { alpha: normalized.map(ComplexValue::from), point, residual })
}

/// Explicit state for a point of the {C, D_x, D_y, D_z} polytope: a Dicke
/// superposition on the triangle, mixed with white noise.
pub fn fill_dicke_polytope(plane: &DickePlane, q: &[f64; 3]) -> Result<StateSpec> {
    let n = plane.n_qubits;
    if !dicke_polytope(n)?.contains(q, GEOMETRY_TOL) {
        return Err(Error::Geometry(format!("{q:?} is outside the C-D polytope")));
    }
    let s = q.iter().sum::<f64>() / (2.0 * plane.vertex_value());
    if s <= GEOMETRY_TOL {
        return Ok(StateSpec::CompletelyMixed { n_qubits: n });
    }
    let inv = invert_d_triangle(plane, &q.map(|x| x / s))?;
    let inner = StateSpec::DickeSuperposition { n_qubits: n, alpha: inv.alpha };
    if (s - 1.0).abs() <= 1e-12 {
        return Ok(inner);
    }
    Ok(StateSpec::WhiteNoiseMix { p: noise_weight_for_scale(s, n)?, inner: Box::new(inner) })
}

/// Uniform random point of a tetrahedron / triangle given by its vertices.
pub fn random_point_in<R: Rng + ?Sized>(poly: &Polytope, rng: &mut R) -> [f64; 3] {
    // flat Dirichlet weights via normalized exponentials
    let w: Vec<f64> = poly.vertices.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut q = [0.0; 3];
    for (v, wi) in poly.vertices.iter().zip(&w) {
        for k in 0..3 {
            q[k] += v.p[k] * wi / total;
        }
    }
    q
}

/// A target point of a polytope together with the state realizing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub target: [f64; 3],
    pub spec: StateSpec,
    pub realized: [f64; 3],
}

impl Realization {
    pub fn error(&self) -> f64 {
        (0..3).map(|k| (self.target[k] - self.realized[k]).abs()).fold(0.0, f64::max)
    }
}

fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw `index` of a seeded uniform sample of the separable polytope, realized explicitly.
pub fn separable_polytope_sample(n_qubits: usize, seed: u64, index: u64) -> Result<Realization> {
    let poly = separable_polytope(n_qubits)?;
    let target = random_point_in(&poly, &mut indexed_rng(seed, index));
    let spec = fill_s_polytope(&target, n_qubits)?;
    let realized = fisher_point(&from_spec(&spec)?)?.p;
    Ok(Realization { target, spec, realized })
}

/// Draw `index` of a seeded uniform sample of the {C, D_x, D_y, D_z} polytope, realized explicitly.
pub fn dicke_polytope_sample(plane: &DickePlane, seed: u64, index: u64) -> Result<Realization> {
    let poly = dicke_polytope(plane.n_qubits)?;
    let target = random_point_in(&poly, &mut indexed_rng(seed, index));
    let spec = fill_dicke_polytope(plane, &target)?;
    let realized = fisher_point(&from_spec(&spec)?)?.p;
    Ok(Realization { target, spec, realized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{I, ONE};

    #[test]
    fn landmark_coordinates() {
        let pts = landmark_points(6).unwrap();
        assert_eq!(pts.len(), 13);
        let get = |l: &str| pts.iter().find(|p| p.label.as_deref() == Some(l)).unwrap().p;
        assert_eq!(get("D_z"), [24.0, 24.0, 0.0]);
        assert_eq!(get("G_z"), [18.5, 18.5, 0.0]);
        assert_eq!(get("GHZ_z"), [6.0, 6.0, 36.0]);
        assert_eq!(get("S_x"), [0.0, 6.0, 6.0]);
        assert_eq!(get("S_z"), [6.0, 6.0, 0.0]);
        assert!(landmark_points(5).is_err());
    }

    #[test]
    fn polytope_membership() {
        let s = separable_polytope(6).unwrap();
        assert!(s.contains(&[4.0, 4.0, 4.0], GEOMETRY_TOL));
        assert!(s.contains(&[0.0, 0.0, 0.0], GEOMETRY_TOL));
        assert!(!s.contains(&[4.0, 4.0, 4.1], GEOMETRY_TOL));
        let dg = dicke_g_polytope(6).unwrap();
        assert!(!dg.contains(&[6.0, 6.0, 36.0], GEOMETRY_TOL));
        assert!(dg.contains(&[24.0, 12.0, 12.0], GEOMETRY_TOL));
        // collinear subsets must not confuse the solver
        let line = Polytope::new("line", vec![
            FisherPoint::new([0.0; 3]),
            FisherPoint::new([1.0, 1.0, 1.0]),
            FisherPoint::new([2.0, 2.0, 2.0]),
        ])
        .unwrap();
        assert!(line.contains(&[1.5, 1.5, 1.5], 1e-12));
        assert!(!line.contains(&[1.5, 1.5, 1.4], 1e-12));
        assert!(Polytope::new("empty", vec![]).is_err());
    }

    #[test]
    fn noise_weight_inverts_scale() {
        for n in [2, 4, 6, 8] {
            for s in [0.0, 0.1, 0.5, 0.77, 1.0] {
                let p = noise_weight_for_scale(s, n).unwrap();
                assert!((noise_scale(p, n) - s).abs() < 1e-14);
            }
        }
        assert!((noise_scale(0.6, 4) - 0.36 / (0.6 + 0.4 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn s_triangle_fill() {
        let spec = fill_s_triangle(&[0.0, 6.0, 6.0], 6).unwrap();
        assert_eq!(spec, StateSpec::ProductBloch { n_qubits: 6, bloch: [1.0, 0.0, 0.0] });
        for q in [[4.0, 4.0, 4.0], [2.0, 4.0, 6.0]] {
            let spec = fill_s_triangle(&q, 6).unwrap();
            let pt = fisher_point(&from_spec(&spec).unwrap()).unwrap();
            assert!(pt.max_abs_diff(&q) < 1e-8);
        }
        if let StateSpec::ProductBloch { bloch, .. } = fill_s_triangle(&[2.0, 4.0, 6.0], 6).unwrap() {
            let c2 = bloch.map(|c| c * c);
            assert!((c2[0] - 2.0 / 3.0).abs() < 1e-12 && (c2[1] - 1.0 / 3.0).abs() < 1e-12 && c2[2].abs() < 1e-12);
        }
        assert!(matches!(fill_s_triangle(&[6.0, 6.0, 6.0], 6), Err(Error::Geometry(_))));
        let q = [1.0, 2.0, 3.0];
        let pt = fisher_point(&from_spec(&fill_s_polytope(&q, 6).unwrap()).unwrap()).unwrap();
        assert!(pt.max_abs_diff(&q) < 1e-8);
    }

    #[test]
    fn closed_form_matches_direct() {
        let plane = DickePlane::new(8).unwrap();
        let r = closed_form_check(&plane, [ZERO, ZERO, ONE]).unwrap();
        assert!(r.max_residual < 1e-10);
        assert!((r.direct[0] - 40.0).abs() < 1e-10 && r.direct[2].abs() < 1e-10);
        let r = closed_form_check(&plane, [ZERO, ONE, ONE]).unwrap();
        assert!(r.max_residual < 1e-8, "{r:?}");
        assert!(r.max_off_diagonal < 1e-9);
        let r = closed_form_check(&plane, [C64::new(0.3, -0.2), C64::new(-0.5, 0.9), C64::new(0.1, 0.4)]).unwrap();
        assert!(r.max_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn halfway_point_between_dx_and_dy() {
        let plane = DickePlane::new(8).unwrap();
        let t = plane.direct_triple([I, ONE, ZERO]).unwrap();
        assert!((t[0] - 20.0).abs() < 1e-9 && (t[1] - 20.0).abs() < 1e-9 && (t[2] - 40.0).abs() < 1e-9, "{t:?}");
    }

    #[test]
    fn d_plane_samples_are_deterministic_and_coplanar() {
        let a = sample_d_plane(4, 20, 7).unwrap();
        let b = sample_d_plane(4, 20, 7).unwrap();
        assert_eq!(a, b);
        let tri = dicke_triangle(4).unwrap();
        for s in &a {
            assert!((s.point.sum() - 24.0).abs() < 1e-8);
            assert_eq!(s.in_triangle, tri.contains(&s.point.p, GEOMETRY_TOL));
        }
        // the plane extends past the triangle: components can exceed the vertex value 12
        assert!(a.iter().any(|s| !s.in_triangle));
        assert_ne!(d_plane_alpha(7, 0), d_plane_alpha(7, 1));
    }

    #[test]
    fn inverse_search_hits_triangle_points() {
        let plane = DickePlane::new(4).unwrap();
        let v = plane.vertex_value();
        for w in [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [1.0 / 3.0; 3], [0.2, 0.3, 0.5]] {
            let target = [w[1] * v + w[2] * v, w[0] * v + w[2] * v, w[0] * v + w[1] * v];
            let inv = invert_d_triangle(&plane, &target).unwrap();
            assert!(inv.residual <= INVERSE_TOL);
            let spec = StateSpec::DickeSuperposition { n_qubits: 4, alpha: inv.alpha };
            let pt = fisher_point(&from_spec(&spec).unwrap()).unwrap();
            assert!(pt.max_abs_diff(&target) < 1e-6);
        }
    }

    #[test]
    fn polytope_samples_are_realized() {
        for i in 0..5 {
            let r = separable_polytope_sample(6, 3, i).unwrap();
            assert!(r.error() < 1e-6, "{r:?}");
        }
        let plane = DickePlane::new(4).unwrap();
        for i in 0..5 {
            let r = dicke_polytope_sample(&plane, 3, i).unwrap();
            assert!(r.error() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn noise_line_endpoints() {
        let g = crate::states::ghz(4, Axis::Z).unwrap();
        let line = noise_line(&g, &[0.0, 0.6, 1.0]).unwrap();
        assert!(line.rows[0].direct.iter().flatten().all(|x| x.abs() < 1e-15));
        assert!(line.max_residual < 1e-9);
        assert_eq!(line.rows[2].direct[2][2], line.rows[2].predicted[2][2]);
    }
}
