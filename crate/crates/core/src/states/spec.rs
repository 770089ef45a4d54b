use serde::{Deserialize, Serialize};

use crate::collective::{check_qubits, Axis};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, DEFAULT_DIMENSION_CAP, C64};

use super::QuantumState;

fn default_basis() -> Axis {
    Axis::Z
}

/// Complex number written as `{ "re": .., "im": .. }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for C64 {
    fn from(c: ComplexValue) -> Self {
        C64::new(c.re, c.im)
    }
}

impl From<C64> for ComplexValue {
    fn from(c: C64) -> Self {
        ComplexValue { re: c.re, im: c.im }
    }
}

/// One coefficient of the even-parity family: the term index `n` and its amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvenParityTerm {
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Declarative description of a state, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Ghz {
        #[serde(alias = "N")]
        n_qubits: usize,
        #[serde(default = "default_basis")]
        basis: Axis,
    },
    Dicke {
        #[serde(alias = "N")]
        n_qubits: usize,
        #[serde(alias = "m")]
        excitations: usize,
        #[serde(default = "default_basis")]
        basis: Axis,
    },
    ProductBloch {
        #[serde(alias = "N")]
        n_qubits: usize,
        #[serde(alias = "c")]
        bloch: [f64; 3],
    },
    EvenParity {
        #[serde(alias = "N")]
        n_qubits: usize,
        coefficients: Vec<EvenParityTerm>,
    },
    DickeSuperposition {
        #[serde(alias = "N")]
        n_qubits: usize,
        alpha: [ComplexValue; 3],
    },
    GState {
        #[serde(alias = "N")]
        n_qubits: usize,
        #[serde(default = "default_basis")]
        basis: Axis,
    },
    WhiteNoiseMix {
        p: f64,
        inner: Box<StateSpec>,
    },
    CompletelyMixed {
        #[serde(alias = "N")]
        n_qubits: usize,
    },
    /// Explicit density matrix as row-major real and imaginary parts.
    RawMatrix {
        #[serde(alias = "N")]
        n_qubits: usize,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl StateSpec {
    pub fn n_qubits(&self) -> usize {
        match self {
            StateSpec::Ghz { n_qubits, .. }
            | StateSpec::Dicke { n_qubits, .. }
            | StateSpec::ProductBloch { n_qubits, .. }
            | StateSpec::EvenParity { n_qubits, .. }
            | StateSpec::DickeSuperposition { n_qubits, .. }
            | StateSpec::GState { n_qubits, .. }
            | StateSpec::CompletelyMixed { n_qubits }
            | StateSpec::RawMatrix { n_qubits, .. } => *n_qubits,
            StateSpec::WhiteNoiseMix { inner, .. } => inner.n_qubits(),
        }
    }

    /// Short label, e.g. `ghz_z(6)` or `mix(0.3, dicke_z(4,2))`.
    pub fn label(&self) -> String {
        match self {
            StateSpec::Ghz { n_qubits, basis } => format!("ghz_{basis}({n_qubits})"),
            StateSpec::Dicke { n_qubits, excitations, basis } => format!("dicke_{basis}({n_qubits},{excitations})"),
            StateSpec::ProductBloch { n_qubits, bloch } => {
                format!("product({n_qubits};{},{},{})", bloch[0], bloch[1], bloch[2])
            }
            StateSpec::EvenParity { n_qubits, .. } => format!("even_parity({n_qubits})"),
            StateSpec::DickeSuperposition { n_qubits, .. } => format!("dicke_superposition({n_qubits})"),
            StateSpec::GState { n_qubits, basis } => format!("g_{basis}({n_qubits})"),
            StateSpec::WhiteNoiseMix { p, inner } => format!("mix({p},{})", inner.label()),
            StateSpec::CompletelyMixed { n_qubits } => format!("mixed({n_qubits})"),
            StateSpec::RawMatrix { n_qubits, .. } => format!("raw({n_qubits})"),
        }
    }
}

/// Builds the state with the default dimension cap.
pub fn from_spec(spec: &StateSpec) -> Result<QuantumState> {
    from_spec_capped(spec, DEFAULT_DIMENSION_CAP)
}

/// Builds the state, refusing registers whose Hilbert dimension exceeds `cap`.
pub fn from_spec_capped(spec: &StateSpec, cap: usize) -> Result<QuantumState> {
    let n = spec.n_qubits();
    check_qubits(n)?;
    let dim = 1usize << n;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    build(spec)
}

fn build(spec: &StateSpec) -> Result<QuantumState> {
    match spec {
        StateSpec::Ghz { n_qubits, basis } => super::ghz(*n_qubits, *basis),
        StateSpec::Dicke { n_qubits, excitations, basis } => super::dicke(*n_qubits, *excitations, *basis),
        StateSpec::ProductBloch { n_qubits, bloch } => super::product_bloch(*bloch, *n_qubits),
        StateSpec::EvenParity { n_qubits, coefficients } => {
            let c: Vec<(usize, C64)> = coefficients.iter().map(|t| (t.n, C64::new(t.re, t.im))).collect();
            super::even_parity(&c, *n_qubits)
        }
        StateSpec::DickeSuperposition { n_qubits, alpha } => {
            super::dicke_superposition(alpha.map(C64::from), *n_qubits)
        }
        StateSpec::GState { n_qubits, basis } => super::g_state(*n_qubits, *basis),
        StateSpec::WhiteNoiseMix { p, inner } => super::white_noise_mix(&build(inner)?, *p),
        StateSpec::CompletelyMixed { n_qubits } => super::completely_mixed(*n_qubits),
        StateSpec::RawMatrix { n_qubits, re, im } => {
            let dim = 1usize << n_qubits;
            let mut failures = Vec::new();
            let shape_ok = |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|r| r.len() == dim);
            if !shape_ok(re) {
                failures.push(format!("real part is not {dim}x{dim}"));
            }
            if let Some(im) = im {
                if !shape_ok(im) {
                    failures.push(format!("imaginary part is not {dim}x{dim}"));
                }
            }
            if !failures.is_empty() {
                return Err(Error::DensityMatrix(failures));
            }
            let m = ComplexMatrix::from_fn(dim, |i, j| {
                C64::new(re[i][j], im.as_ref().map_or(0.0, |im| im[i][j]))
            });
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::DensityMatrix(vec!["non-finite entry".into()]));
            }
            QuantumState::from_density_matrix(*n_qubits, m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    fn roundtrip(spec: &StateSpec) -> StateSpec {
        serde_json::from_str(&serde_json::to_string(spec).unwrap()).unwrap()
    }

    #[test]
    fn dispatch_matches_direct_constructors() {
        let spec: StateSpec = serde_json::from_str(r#"{"kind":"ghz","N":4,"basis":"z"}"#).unwrap();
        let a = from_spec(&spec).unwrap();
        assert!(a.rho().max_abs_diff(states::ghz(4, Axis::Z).unwrap().rho()) < 1e-15);

        let spec: StateSpec = serde_json::from_str(r#"{"kind":"completely_mixed","N":3}"#).unwrap();
        let c = from_spec(&spec).unwrap();
        assert!(c.rho().max_abs_diff(&ComplexMatrix::identity(8).scale(0.125)) < 1e-15);

        let spec: StateSpec = serde_json::from_str(
            r#"{"kind":"white_noise_mix","p":0.3,"inner":{"kind":"dicke","N":4,"m":2,"basis":"z"}}"#,
        )
        .unwrap();
        let m = from_spec(&spec).unwrap();
        let direct = states::white_noise_mix(&states::dicke(4, 2, Axis::Z).unwrap(), 0.3).unwrap();
        assert!(m.rho().max_abs_diff(direct.rho()) < 1e-15);
    }

    #[test]
    fn raw_matrix_validation() {
        let spec: StateSpec =
            serde_json::from_str(r#"{"kind":"raw_matrix","N":1,"re":[[0.5,0.0],[0.0,0.5]]}"#).unwrap();
        assert!(from_spec(&spec).is_ok());
        let spec: StateSpec =
            serde_json::from_str(r#"{"kind":"raw_matrix","N":1,"re":[[0.9,0.0],[0.0,0.9]]}"#).unwrap();
        assert!(matches!(from_spec(&spec), Err(Error::DensityMatrix(_))));
        let spec: StateSpec = serde_json::from_str(r#"{"kind":"raw_matrix","N":1,"re":[[1.0]]}"#).unwrap();
        assert!(matches!(from_spec(&spec), Err(Error::DensityMatrix(_))));
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(serde_json::from_str::<StateSpec>(r#"{"kind":"ghz","N":4,"bassis":"z"}"#).is_err());
        assert!(serde_json::from_str::<StateSpec>(r#"{"kind":"werner","N":4}"#).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let spec = StateSpec::Ghz { n_qubits: 10, basis: Axis::Z };
        assert_eq!(from_spec_capped(&spec, 512).unwrap_err(), Error::DimensionCap { dim: 1024, cap: 512 });
        let spec = StateSpec::Ghz { n_qubits: 13, basis: Axis::Z };
        assert!(matches!(from_spec(&spec), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn every_family_roundtrips() {
        let specs = vec![
            StateSpec::Ghz { n_qubits: 4, basis: Axis::Y },
            StateSpec::Dicke { n_qubits: 5, excitations: 2, basis: Axis::X },
            StateSpec::ProductBloch { n_qubits: 4, bloch: [0.6, 0.0, 0.8] },
            StateSpec::EvenParity {
                n_qubits: 8,
                coefficients: vec![
                    EvenParityTerm { n: 0, re: 0.6, im: 0.0 },
                    EvenParityTerm { n: 4, re: 0.0, im: 0.8 },
                ],
            },
            StateSpec::DickeSuperposition {
                n_qubits: 4,
                alpha: [
                    ComplexValue { re: 0.3, im: -0.1 },
                    ComplexValue { re: 0.0, im: 0.7 },
                    ComplexValue { re: 1.0 / 3.0, im: 0.0 },
                ],
            },
            StateSpec::GState { n_qubits: 6, basis: Axis::X },
            StateSpec::WhiteNoiseMix { p: 0.1 + 0.2, inner: Box::new(StateSpec::Ghz { n_qubits: 3, basis: Axis::Z }) },
            StateSpec::CompletelyMixed { n_qubits: 2 },
            StateSpec::RawMatrix {
                n_qubits: 1,
                re: vec![vec![0.75, 0.1], vec![0.1, 0.25]],
                im: Some(vec![vec![0.0, -0.2], vec![0.2, 0.0]]),
            },
        ];
        for spec in &specs {
            let back = roundtrip(spec);
            assert_eq!(&back, spec);
            let a = from_spec(spec).unwrap();
            let b = from_spec(&back).unwrap();
            assert!(a.rho().max_abs_diff(b.rho()) <= 1e-12, "{}", spec.label());
        }
    }
}
