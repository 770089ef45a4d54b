//! Acceptance suite: one test per criterion, each writing a single
//! `PASS`/`FAIL` line to stderr (uncaptured, so it shows in plain
//! `cargo test` output) before asserting.
//!
//! Reference values are typed in here or recomputed from dense matrices,
//! independent of the library's own landmark tables.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfisher::collective::{collective_j, j_direction, Axis, Direction};
use qfisher::criteria::{
    bound_kprod_single, bound_kprod_sum, depth_lower_bound, evaluate_all, gamma_criteria, CriterionId,
};
use qfisher::interferometer::{classical_fisher, FisherProbe, Measurement, PhaseSetting};
use qfisher::landscape::{closed_form_check, dicke_triangle, DickePlane};
use qfisher::matcore::{CVector, C64};
use qfisher::qfi::{gamma_c, qfi_direction, skew_information, variance};
use qfisher::states::{
    completely_mixed, dicke, g_state, ghz, product_bloch, random_block_product, random_direction, random_mixed,
    random_pure, random_separable_mixture, white_noise_mix, QuantumState,
};

/// Geometry and landmark coordinates.
const LANDMARK_TOL: f64 = 1e-8;
/// Exact sums, criteria and closed forms.
const EXACT_TOL: f64 = 1e-9;
/// Classical versus quantum Fisher information, finite differences included.
const CRB_TOL: f64 = 1e-6;
/// Monte Carlo direction average, relative.
const MC_REL_TOL: f64 = 0.02;

fn verdict(id: u32, title: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    let line = if failures.is_empty() {
        format!("acceptance {id:>2} {status} {title}: {detail}\n")
    } else {
        format!("acceptance {id:>2} {status} {title}: {}\n", failures.join("; "))
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "criterion {id} ({title}) failed: {}", failures.join("; "));
}

fn triple(state: &QuantumState) -> [f64; 3] {
    gamma_c(state).unwrap().fisher_triple().0
}

fn max_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

/// Coordinates as tabulated: z-labelled point (a, a, c), permuted for x and y.
fn tabulated(n: usize) -> Vec<(&'static str, [f64; 3])> {
    let n = n as f64;
    let families = [
        ("S", [n, n, 0.0]),
        ("D", [n * (n + 2.0) / 2.0, n * (n + 2.0) / 2.0, 0.0]),
        ("G", [n * n / 2.0 + 0.5, n * n / 2.0 + 0.5, 0.0]),
        ("GHZ", [n, n, n * n]),
    ];
    let mut out = vec![("C", [0.0; 3])];
    for (name, [a, _, c]) in families {
        let labels: [&'static str; 3] = match name {
            "S" => ["S_x", "S_y", "S_z"],
            "D" => ["D_x", "D_y", "D_z"],
            "G" => ["G_x", "G_y", "G_z"],
            _ => ["GHZ_x", "GHZ_y", "GHZ_z"],
        };
        out.push((labels[0], [c, a, a]));
        out.push((labels[1], [a, c, a]));
        out.push((labels[2], [a, a, c]));
    }
    out
}

fn landmark_state(label: &str, n: usize) -> QuantumState {
    let (family, axis) = label.rsplit_once('_').map_or((label, Axis::Z), |(f, a)| (f, a.parse().unwrap()));
    match family {
        "C" => completely_mixed(n),
        "S" => product_bloch(axis.unit(), n),
        "D" => dicke(n, n / 2, axis),
        "G" => g_state(n, axis),
        _ => ghz(n, axis),
    }
    .unwrap()
}

#[test]
fn criterion_01_landmark_reproduction() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in [4, 8] {
        for (label, want) in tabulated(n) {
            let got = triple(&landmark_state(label, n));
            checked += 1;
            if max_diff(&got, &want) > LANDMARK_TOL {
                failures.push(format!("N={n} {label} computed {got:.6?} vs tabulated {want:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("runtime {elapsed:?} exceeds 30 s"));
    }
    verdict(1, "landmark reproduction", &failures, &format!("{checked} landmarks within {LANDMARK_TOL:e} in {elapsed:.2?}"));
}

#[test]
fn criterion_02_saturation_of_maximal_sum() {
    let mut failures = Vec::new();
    for n in [4, 6, 8] {
        let bound = (n * (n + 2)) as f64;
        for (name, s) in [("ghz", ghz(n, Axis::Z).unwrap()), ("dicke", dicke(n, n / 2, Axis::Z).unwrap())] {
            let sum: f64 = triple(&s).iter().sum();
            if (sum - bound).abs() > EXACT_TOL {
                failures.push(format!("{name} N={n}: sum {sum} vs {bound}"));
            }
        }
    }
    verdict(2, "saturation of N(N+2)", &failures, "GHZ and Dicke sums equal N(N+2) for N = 4, 6, 8");
}

#[test]
fn criterion_03_dicke_plane_sampling() {
    let n = 8;
    let start = Instant::now();
    let plane = DickePlane::new(n).unwrap();
    let triangle = dicke_triangle(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut off_plane = 0;
    let mut outside = 0;
    let mut worst_plane = 0.0f64;
    for _ in 0..1000 {
        let alpha: [C64; 3] =
            std::array::from_fn(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)));
        let p = plane.direct_triple(alpha).unwrap();
        let dev = (p.iter().sum::<f64>() - 80.0).abs();
        worst_plane = worst_plane.max(dev);
        if dev > LANDMARK_TOL {
            off_plane += 1;
        }
        if !triangle.contains(&p, LANDMARK_TOL) {
            outside += 1;
        }
    }
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    if off_plane > 0 {
        failures.push(format!("{off_plane}/1000 off the plane sum = 80"));
    }
    if outside > 0 {
        failures.push(format!("{outside}/1000 outside the D triangle (all coplanar, max |sum - 80| = {worst_plane:.1e})"));
    }
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    verdict(3, "Dicke-plane sampling", &failures, &format!("1000 samples coplanar and in the triangle in {elapsed:.2?}"));
}

#[test]
fn criterion_04_no_false_violations() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let separable = [
        CriterionId::SeparableSum,
        CriterionId::SeparableSingle,
        CriterionId::VarianceSum,
        CriterionId::GammaTraceSeparable,
        CriterionId::GammaMaxEigenSeparable,
    ];
    for i in 0..200 {
        let n = 1 + i % 6;
        let terms = rng.random_range(1..=4);
        let s = random_separable_mixture(n, terms, &mut rng).unwrap();
        let eval = evaluate_all(&s, EXACT_TOL).unwrap();
        for id in separable {
            let r = eval.report(id).unwrap_or_else(|| panic!("{id} missing for N={n}"));
            if r.violated {
                failures.push(format!("separable #{i} (N={n}) violates {id}: {} vs {}", r.value, r.bound));
            }
        }
    }
    let n = 6;
    for i in 0..100 {
        let k = 2 + i % 2;
        let terms = rng.random_range(1..=3);
        let parts: Vec<QuantumState> = (0..terms).map(|_| random_block_product(n, k, &mut rng).unwrap()).collect();
        let mix: Vec<(f64, &QuantumState)> = parts.iter().map(|p| (1.0 / terms as f64, p)).collect();
        let s = QuantumState::mixture(&mix).unwrap();
        let g = gamma_c(&s).unwrap();
        let f = g.fisher_triple();
        let (sum_bound, single_bound) = (bound_kprod_sum(n, k).unwrap(), bound_kprod_single(n, k).unwrap());
        if f.sum() - sum_bound > EXACT_TOL || f.max() - single_bound > EXACT_TOL {
            failures.push(format!("{k}-producible #{i}: triple {:?}", f.0));
        }
        for r in gamma_criteria(&g, n, k, EXACT_TOL).unwrap() {
            let k_form = matches!(
                r.criterion,
                CriterionId::GammaTraceKProducible { .. } | CriterionId::GammaMaxEigenKProducible { .. }
            );
            if k_form && r.violated {
                failures.push(format!("{k}-producible #{i} violates {}", r.criterion));
            }
        }
    }
    verdict(4, "no false violations", &failures, "200 separable and 100 k-producible mixtures stay within their bounds");
}

#[test]
fn criterion_05_depth_certification() {
    let n = 6;
    let mut failures = Vec::new();
    let (sum5, single5) = (bound_kprod_sum(n, 5).unwrap(), bound_kprod_single(n, 5).unwrap());
    if (sum5, single5) != (37.0, 26.0) {
        failures.push(format!("k = 5 bounds ({sum5}, {single5}) instead of (37, 26)"));
    }
    for (name, s, trace, lmax) in [
        ("dicke(6,3,z)", dicke(n, 3, Axis::Z).unwrap(), 48.0, 24.0),
        ("ghz(6,z)", ghz(n, Axis::Z).unwrap(), 48.0, 36.0),
    ] {
        let cert = depth_lower_bound(&s, EXACT_TOL).unwrap();
        if cert.depth_lower_bound < 6 {
            failures.push(format!("{name} certifies depth {}", cert.depth_lower_bound));
        }
        let g = gamma_c(&s).unwrap();
        if (g.trace() - trace).abs() > EXACT_TOL || (g.max_eigenvalue() - lmax).abs() > EXACT_TOL {
            failures.push(format!("{name}: trace {} max eigenvalue {}", g.trace(), g.max_eigenvalue()));
        }
    }
    let g = gamma_c(&g_state(n, Axis::Z).unwrap()).unwrap();
    let reports = gamma_criteria(&g, n, 5, EXACT_TOL).unwrap();
    let bisep = reports.iter().find(|r| r.criterion == CriterionId::GammaTraceBiseparable).unwrap();
    if bisep.violated {
        failures.push(format!("g_state(6,z) flagged with sum {}", g.trace()));
    }
    if (g.trace() - 37.0).abs() > EXACT_TOL {
        failures.push(format!("g_state(6,z) sum is {} rather than exactly 37", g.trace()));
    }
    verdict(5, "depth certification", &failures, "Dicke and GHZ certify depth 6; G state sits at 37 unflagged");
}

#[test]
fn criterion_06_noise_closed_form() {
    let mut failures = Vec::new();
    let n = 4;
    for (name, s) in [("ghz(4,z)", ghz(n, Axis::Z).unwrap()), ("dicke(4,2,z)", dicke(n, 2, Axis::Z).unwrap())] {
        let pure = gamma_c(&s).unwrap().gamma;
        for step in 0..=10 {
            let p = step as f64 / 10.0;
            let scale = if p == 0.0 { 0.0 } else { p * p / (p + (1.0 - p) * 2f64.powi(-(n as i32 - 1))) };
            let direct = gamma_c(&white_noise_mix(&s, p).unwrap()).unwrap().gamma;
            let worst = (0..9).map(|k| (direct[k / 3][k % 3] - scale * pure[k / 3][k % 3]).abs()).fold(0.0, f64::max);
            if worst > EXACT_TOL {
                failures.push(format!("{name} p={p}: residual {worst:e}"));
            }
        }
    }
    verdict(6, "white-noise scaling", &failures, "direct Gamma matches the scaled pure Gamma on 11 grid points");
}

#[test]
fn criterion_07_pure_identity_and_ordering() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 5;
        let s = random_pure(n, &mut rng).unwrap();
        let d = random_direction(&mut rng);
        let jn = j_direction(d, n).unwrap();
        let gap = (qfi_direction(&s, d).unwrap() - 4.0 * variance(&s, &jn).unwrap()).abs();
        worst = worst.max(gap);
        if gap > EXACT_TOL {
            failures.push(format!("pure #{i} (N={n}): |F - 4 Var| = {gap:e}"));
        }
    }
    for i in 0..100 {
        let n = 1 + i % 5;
        let rank = rng.random_range(2..=4usize).min(1 << n);
        let s = random_mixed(n, rank, &mut rng).unwrap();
        let d = random_direction(&mut rng);
        let jn = j_direction(d, n).unwrap();
        let f = qfi_direction(&s, d).unwrap();
        let var = variance(&s, &jn).unwrap();
        let skew = skew_information(&s, &jn).unwrap();
        if f > 4.0 * var + EXACT_TOL || 4.0 * skew > f + EXACT_TOL {
            failures.push(format!("mixed #{i} (N={n}): 4 I = {}, F = {f}, 4 Var = {}", 4.0 * skew, 4.0 * var));
        }
    }
    verdict(7, "pure identity and ordering", &failures, &format!("max pure-state gap {worst:.1e}; mixed ordering holds"));
}

#[test]
fn criterion_08_cramer_rao_ordering() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let probe = FisherProbe::default();
    for i in 0..60 {
        let n = 1 + i % 5;
        let s = if i % 2 == 0 { random_pure(n, &mut rng) } else { random_mixed(n, 2, &mut rng) }.unwrap();
        let d = random_direction(&mut rng);
        let setting = PhaseSetting::new(rng.random_range(0.05..0.5), d).unwrap();
        let meas = match i % 3 {
            0 => Measurement::random_basis(n, i as u64),
            1 => Measurement::parity(Axis::ALL[i % 3], n),
            _ => Measurement::local(Axis::ALL[(i / 3) % 3], n),
        }
        .unwrap();
        let cl = classical_fisher(&s, &setting, &meas, probe).unwrap().value;
        let q = qfi_direction(&s, d).unwrap();
        if cl > q + CRB_TOL {
            failures.push(format!("case #{i} (N={n}): F_cl {cl} > F_Q {q}"));
        }
    }
    let mut rel = Vec::new();
    for n in [3, 4, 5] {
        let setting = PhaseSetting::new(std::f64::consts::PI / (2.0 * n as f64), Direction::along(Axis::Z)).unwrap();
        let meas = Measurement::parity(Axis::X, n).unwrap();
        let cl = classical_fisher(&ghz(n, Axis::Z).unwrap(), &setting, &meas, probe).unwrap().value;
        let target = (n * n) as f64;
        let r = (cl - target).abs() / target;
        rel.push(r);
        if r > CRB_TOL {
            failures.push(format!("GHZ parity N={n}: F_cl {cl} vs {target}"));
        }
    }
    verdict(8, "Cramer-Rao ordering", &failures, &format!("60 random settings ordered; GHZ parity relative errors [{}]", sci(&rel)));
}

#[test]
fn criterion_09_direction_average() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let refs = [
        ("ghz(4,z)", ghz(4, Axis::Z).unwrap()),
        ("dicke(6,3,x)", dicke(6, 3, Axis::X).unwrap()),
        ("random mixed N=4", random_mixed(4, 3, &mut rng).unwrap()),
    ];
    let mut devs = Vec::new();
    for (name, s) in &refs {
        let samples = 10_000;
        let mean = (0..samples).map(|_| qfi_direction(s, random_direction(&mut rng)).unwrap()).sum::<f64>() / samples as f64;
        let exact = gamma_c(s).unwrap().trace() / 3.0;
        let dev = (mean - exact).abs() / exact;
        devs.push(dev);
        if dev > MC_REL_TOL {
            failures.push(format!("{name}: average {mean} vs Tr/3 {exact}"));
        }
    }
    verdict(9, "direction average", &failures, &format!("relative deviations [{}]", sci(&devs)));
}

fn cyclic(l: Axis) -> (usize, usize) {
    match l {
        Axis::X => (1, 2),
        Axis::Y => (2, 0),
        Axis::Z => (0, 1),
    }
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(", ")
}

#[test]
fn criterion_10_three_dicke_closed_form() {
    let n = 8;
    let plane = DickePlane::new(n).unwrap();
    let kets: [CVector; 3] = Axis::ALL.map(|a| dicke(n, n / 2, a).unwrap().pure_vector().unwrap().clone());
    let jsq = Axis::ALL.map(|l| {
        let j = collective_j(l, n).unwrap();
        (&j * &j).inner().clone()
    });
    // Q_l = <D_a|J_l^2|D_b> with (l, a, b) cyclic, from dense matrices
    let q: [C64; 3] = Axis::ALL.map(|l| {
        let (a, b) = cyclic(l);
        kets[a].dotc(&(&jsq[l.index()] * &kets[b]))
    });
    let mut failures = Vec::new();
    for l in Axis::ALL {
        let gap = (plane.q(l) - q[l.index()]).norm();
        if gap > EXACT_TOL {
            failures.push(format!("Q_{l} library {} vs dense {}", plane.q(l), q[l.index()]));
        }
    }
    let vertex = (n * (n + 2)) as f64 / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst, mut worst_printed) = (0.0f64, f64::INFINITY);
    for i in 0..100 {
        let raw: [C64; 3] = std::array::from_fn(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)));
        let mut v = &kets[0] * raw[0] + &kets[1] * raw[1] + &kets[2] * raw[2];
        let norm = v.norm();
        v.unscale_mut(norm);
        let alpha = raw.map(|a| a / norm);
        let direct = triple(&QuantumState::from_pure(n, v).unwrap());
        let closed: [f64; 3] = Axis::ALL.map(|l| {
            let (a, b) = cyclic(l);
            (alpha[a].norm_sqr() + alpha[b].norm_sqr()) * vertex + 8.0 * (alpha[a].conj() * alpha[b] * q[l.index()]).re
        });
        let gap = max_diff(&direct, &closed);
        worst = worst.max(gap);
        if gap > LANDMARK_TOL {
            failures.push(format!("alpha #{i}: residual {gap:e}"));
        }
        let report = closed_form_check(&plane, raw).unwrap();
        worst_printed = worst_printed.min(report.printed_form_residual);
        if (report.max_residual - gap).abs() > LANDMARK_TOL {
            failures.push(format!("alpha #{i}: library residual {} vs {gap}", report.max_residual));
        }
    }
    verdict(
        10,
        "three-Dicke closed form",
        &failures,
        &format!("100 draws, max residual {worst:.1e}; printed cross coefficient leaves at least {worst_printed:.1e}"),
    );
}
