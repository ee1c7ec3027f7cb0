//! Target operators: named gates, the generalized CNOT families, ancilla
//! embedding and isometries obtained by fixing inputs of a unitary.
//!
//! Basis convention: qubit 1 is the most significant bit of a computational
//! basis index and the ancilla is always the trailing tensor factor.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, ComplexVector, ONE};

/// Largest register handled by the dense kernels.
pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-10;

/// Problem dimensions: `n_qubits` register qubits, an ancilla of dimension
/// `ancilla_dim`, and `input_qubits` free inputs (`== n_qubits` for unitaries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct SystemShape {
    n_qubits: usize,
    ancilla_dim: usize,
    input_qubits: usize,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    n_qubits: usize,
    ancilla_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_qubits: Option<usize>,
}

impl TryFrom<RawShape> for SystemShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        SystemShape::new(
            raw.n_qubits,
            raw.ancilla_dim,
            raw.input_qubits.unwrap_or(raw.n_qubits),
        )
    }
}

impl From<SystemShape> for RawShape {
    fn from(s: SystemShape) -> Self {
        RawShape {
            n_qubits: s.n_qubits,
            ancilla_dim: s.ancilla_dim,
            input_qubits: (s.input_qubits != s.n_qubits).then_some(s.input_qubits),
        }
    }
}

impl SystemShape {
    pub fn new(n_qubits: usize, ancilla_dim: usize, input_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Shape(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if ancilla_dim < 2 {
            return Err(Error::Shape(format!(
                "ancilla dimension must be >= 2, got {ancilla_dim}"
            )));
        }
        if input_qubits == 0 || input_qubits > n_qubits {
            return Err(Error::Shape(format!(
                "input qubit count must be in 1..={n_qubits}, got {input_qubits}"
            )));
        }
        Ok(SystemShape {
            n_qubits,
            ancilla_dim,
            input_qubits,
        })
    }

    pub fn unitary(n_qubits: usize, ancilla_dim: usize) -> Result<Self> {
        Self::new(n_qubits, ancilla_dim, n_qubits)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn input_qubits(&self) -> usize {
        self.input_qubits
    }

    pub fn is_isometry(&self) -> bool {
        self.input_qubits < self.n_qubits
    }

    /// `2^N`.
    pub fn register_dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `2^N · D`.
    pub fn full_dim(&self) -> usize {
        self.register_dim() * self.ancilla_dim
    }

    /// `2^M`.
    pub fn input_dim(&self) -> usize {
        1 << self.input_qubits
    }

    pub fn with_ancilla(&self, ancilla_dim: usize) -> Result<Self> {
        Self::new(self.n_qubits, ancilla_dim, self.input_qubits)
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_isometry() {
            write!(
                f,
                "{}->{} D={}",
                self.input_qubits, self.n_qubits, self.ancilla_dim
            )
        } else {
            write!(f, "N={} D={}", self.n_qubits, self.ancilla_dim)
        }
    }
}

/// Which operator a [`GateSpec`] builds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Cnot,
    Cz,
    Cphase {
        #[serde(default = "default_cphase")]
        phase: f64,
    },
    Swap,
    Toffoli,
    Fredkin,
    #[serde(rename = "GEN_CNOT_1")]
    GenCnot1,
    #[serde(rename = "GEN_CNOT_2")]
    GenCnot2,
    RandomUnitary {
        seed: u64,
    },
    RandomIsometry {
        seed: u64,
    },
    Custom {
        #[serde(with = "crate::serde_matrix")]
        matrix: ComplexMatrix,
    },
}

/// Controlled-S; the phase that reproduces the tabulated CPHASE gaps.
pub const DEFAULT_CPHASE: f64 = PI / 2.0;

fn default_cphase() -> f64 {
    DEFAULT_CPHASE
}

impl GateKind {
    pub fn cphase() -> Self {
        GateKind::Cphase {
            phase: DEFAULT_CPHASE,
        }
    }

    /// Fixed qubit count, if the gate has one.
    pub fn natural_qubits(&self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Cphase { .. } | GateKind::Swap => Some(2),
            GateKind::Toffoli | GateKind::Fredkin => Some(3),
            GateKind::Custom { matrix } => {
                let n = matrix.nrows();
                n.is_power_of_two().then(|| n.trailing_zeros() as usize)
            }
            GateKind::GenCnot1
            | GateKind::GenCnot2
            | GateKind::RandomUnitary { .. }
            | GateKind::RandomIsometry { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::Cnot => "CNOT".into(),
            GateKind::Cz => "CZ".into(),
            GateKind::Cphase { phase } => {
                if (phase - DEFAULT_CPHASE).abs() < 1e-15 {
                    "CPHASE".into()
                } else {
                    format!("CPHASE({phase:.6})")
                }
            }
            GateKind::Swap => "SWAP".into(),
            GateKind::Toffoli => "TOFFOLI".into(),
            GateKind::Fredkin => "FREDKIN".into(),
            GateKind::GenCnot1 => "GEN_CNOT_1".into(),
            GateKind::GenCnot2 => "GEN_CNOT_2".into(),
            GateKind::RandomUnitary { seed } => format!("RANDOM_UNITARY({seed})"),
            GateKind::RandomIsometry { seed } => format!("RANDOM_ISOMETRY({seed})"),
            GateKind::Custom { .. } => "CUSTOM".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    #[serde(flatten)]
    pub kind: GateKind,
    pub shape: SystemShape,
}

impl GateSpec {
    pub fn new(kind: GateKind, shape: SystemShape) -> Result<Self> {
        let spec = GateSpec { kind, shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.shape.n_qubits();
        match &self.kind {
            GateKind::Custom { matrix } => {
                if !matrix.is_square() || self.kind.natural_qubits() != Some(n) {
                    return Err(Error::Shape(format!(
                        "custom matrix is {}x{}, expected {}x{} for N={n}",
                        matrix.nrows(),
                        matrix.ncols(),
                        1 << n,
                        1 << n
                    )));
                }
                numerics::ensure_finite(matrix, "custom gate")?;
                if !numerics::is_unitary(matrix, 1e-10) {
                    return Err(Error::Invalid("custom gate is not unitary".into()));
                }
            }
            GateKind::GenCnot1 | GateKind::GenCnot2 if n < 2 => {
                return Err(Error::Shape(format!(
                    "{} needs at least 2 qubits, got {n}",
                    self.kind.name()
                )));
            }
            kind => {
                if let Some(q) = kind.natural_qubits() {
                    if q != n {
                        return Err(Error::Shape(format!(
                            "{} acts on {q} qubits but shape has N={n}",
                            kind.name()
                        )));
                    }
                }
            }
        }
        if matches!(self.kind, GateKind::RandomIsometry { .. }) && !self.shape.is_isometry() {
            return Err(Error::Shape(
                "RANDOM_ISOMETRY needs input_qubits < n_qubits".into(),
            ));
        }
        Ok(())
    }
}

/// Bit of qubit `k` (1-based, qubit 1 most significant) in basis index `b`.
#[inline]
pub fn qubit_bit(b: usize, k: usize, n: usize) -> usize {
    (b >> (n - k)) & 1
}

#[inline]
fn flip(b: usize, k: usize, n: usize) -> usize {
    b ^ (1 << (n - k))
}

fn permutation_matrix(n: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    let dim = 1 << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(f(b), b)] = ONE;
    }
    m
}

fn diagonal_matrix(n: usize, f: impl Fn(usize) -> Complex64) -> ComplexMatrix {
    let dim = 1 << n;
    ComplexMatrix::from_diagonal(&ComplexVector::from_fn(dim, |b, _| f(b)))
}

/// `C^{(c)}`-NOT on an `n`-qubit register: controls are qubits `1..=c`, the
/// target is qubit `c + 1`.
fn multi_controlled_not(n: usize, c: usize) -> impl Fn(usize) -> usize {
    move |b| {
        if (1..=c).all(|k| qubit_bit(b, k, n) == 1) {
            flip(b, c + 1, n)
        } else {
            b
        }
    }
}

/// Multiply-controlled NOT on qubit `n` with controls `1..n`.
pub fn build_gen_cnot_1(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Shape(format!("GEN_CNOT_1 needs N >= 2, got {n}")));
    }
    Ok(permutation_matrix(n, multi_controlled_not(n, n - 1)))
}

/// Ladder `C^{(1)}-NOT · C^{(2)}-NOT ⋯ C^{(N−1)}-NOT`, factor `k` acting on
/// qubits `1..=k+1` (target `k+1`). The rightmost factor acts first.
pub fn build_gen_cnot_2(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Shape(format!("GEN_CNOT_2 needs N >= 2, got {n}")));
    }
    let factors: Vec<_> = (1..n).map(|k| multi_controlled_not(n, k)).collect();
    Ok(permutation_matrix(n, |b| {
        factors.iter().rev().fold(b, |acc, f| f(acc))
    }))
}

/// The `2^N × 2^N` unitary of `spec` in the computational basis.
///
/// For `RANDOM_ISOMETRY` this is the Haar unitary whose fixed-input column
/// block becomes the isometry in [`build_isometry`].
pub fn build_gate(spec: &GateSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.shape.n_qubits();
    let m = match &spec.kind {
        GateKind::Cnot => permutation_matrix(2, multi_controlled_not(2, 1)),
        GateKind::Cz => diagonal_matrix(2, |b| if b == 3 { -ONE } else { ONE }),
        GateKind::Cphase { phase } => diagonal_matrix(2, |b| {
            if b == 3 {
                Complex64::from_polar(1.0, *phase)
            } else {
                ONE
            }
        }),
        GateKind::Swap => permutation_matrix(2, |b| ((b & 1) << 1) | (b >> 1)),
        GateKind::Toffoli => permutation_matrix(3, multi_controlled_not(3, 2)),
        GateKind::Fredkin => permutation_matrix(3, |b| {
            if qubit_bit(b, 1, 3) == 1 && qubit_bit(b, 2, 3) != qubit_bit(b, 3, 3) {
                b ^ 0b011
            } else {
                b
            }
        }),
        GateKind::GenCnot1 => build_gen_cnot_1(n)?,
        GateKind::GenCnot2 => build_gen_cnot_2(n)?,
        GateKind::RandomUnitary { seed } | GateKind::RandomIsometry { seed } => {
            numerics::haar_random_unitary(1 << n, *seed)
        }
        GateKind::Custom { matrix } => matrix.clone(),
    };
    Ok(m)
}

/// `gate ⊗ 1_D`.
pub fn embed_with_ancilla(gate: &ComplexMatrix, ancilla_dim: usize) -> ComplexMatrix {
    numerics::kron(gate, &numerics::identity(ancilla_dim))
}

/// Reference states for the fixed inputs of an isometry: one single-qubit
/// state per qubit `M+1..=N` and the ancilla input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStates {
    #[serde(with = "crate::serde_matrix::vec_of_vectors")]
    pub qubits: Vec<ComplexVector>,
    #[serde(with = "crate::serde_matrix::vector")]
    pub ancilla: ComplexVector,
}

impl InitialStates {
    /// `|0⟩` on every fixed qubit and ancilla basis state 0.
    pub fn default_for(shape: &SystemShape) -> Self {
        let zero = ComplexVector::from_column_slice(&[ONE, Complex64::new(0.0, 0.0)]);
        let mut ancilla = ComplexVector::zeros(shape.ancilla_dim());
        ancilla[0] = ONE;
        InitialStates {
            qubits: vec![zero; shape.n_qubits() - shape.input_qubits()],
            ancilla,
        }
    }

    pub fn validate(&self, shape: &SystemShape) -> Result<()> {
        let fixed = shape.n_qubits() - shape.input_qubits();
        if self.qubits.len() != fixed {
            return Err(Error::dim(
                format!("{fixed} fixed-qubit states"),
                self.qubits.len(),
            ));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if q.len() != 2 {
                return Err(Error::dim("qubit state of length 2", q.len()));
            }
            check_normalized(
                q,
                &format!("qubit {} initial state", shape.input_qubits() + i + 1),
            )?;
        }
        if self.ancilla.len() != shape.ancilla_dim() {
            return Err(Error::dim(
                format!("ancilla state of length {}", shape.ancilla_dim()),
                self.ancilla.len(),
            ));
        }
        check_normalized(&self.ancilla, "ancilla initial state")
    }

    /// The `2^N·D × 2^M` map `1_{2^M} ⊗ ψ_{M+1} ⊗ ⋯ ⊗ ψ_N ⊗ φ`.
    pub fn input_embedding(&self, shape: &SystemShape) -> ComplexMatrix {
        let mut fixed = ComplexMatrix::from_element(1, 1, ONE);
        for q in &self.qubits {
            fixed = numerics::kron(
                &fixed,
                &ComplexMatrix::from_column_slice(2, 1, q.as_slice()),
            );
        }
        let anc = ComplexMatrix::from_column_slice(self.ancilla.len(), 1, self.ancilla.as_slice());
        let fixed = numerics::kron(&fixed, &anc);
        numerics::kron(&numerics::identity(shape.input_dim()), &fixed)
    }
}

fn check_normalized(v: &ComplexVector, what: &str) -> Result<()> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            what: what.to_string(),
            norm,
        });
    }
    Ok(())
}

/// `(U ⊗ 1_D)(1_{2^M} ⊗ ψ ⊗ φ)`: the embedded unitary with the inputs of
/// qubits `M+1..=N` and of the ancilla fixed.
pub fn build_isometry(spec: &GateSpec, states: &InitialStates) -> Result<ComplexMatrix> {
    states.validate(&spec.shape)?;
    let u = build_gate(spec)?;
    let embedded = embed_with_ancilla(&u, spec.shape.ancilla_dim());
    Ok(embedded * states.input_embedding(&spec.shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{frobenius_norm_sq, identity, is_unitary, isometry_defect};

    fn spec(kind: GateKind, n: usize) -> GateSpec {
        GateSpec::new(kind, SystemShape::unitary(n, 2).unwrap()).unwrap()
    }

    fn perm_target(m: &ComplexMatrix, col: usize) -> usize {
        (0..m.nrows()).find(|&r| m[(r, col)] == ONE).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(SystemShape::new(0, 2, 0).is_err());
        assert!(SystemShape::new(3, 1, 3).is_err());
        assert!(SystemShape::new(3, 2, 4).is_err());
        assert!(SystemShape::new(3, 2, 0).is_err());
        let s = SystemShape::new(3, 4, 1).unwrap();
        assert!(s.is_isometry());
        assert_eq!((s.full_dim(), s.input_dim()), (32, 2));
    }

    #[test]
    fn shape_serde_defaults_inputs() {
        let s: SystemShape = serde_json::from_str(r#"{"n_qubits":3,"ancilla_dim":2}"#).unwrap();
        assert_eq!(s.input_qubits(), 3);
        assert!(serde_json::from_str::<SystemShape>(r#"{"n_qubits":3,"ancilla_dim":1}"#).is_err());
    }

    #[test]
    fn cnot_permutation() {
        let g = build_gate(&spec(GateKind::Cnot, 2)).unwrap();
        assert_eq!(
            (0..4).map(|c| perm_target(&g, c)).collect::<Vec<_>>(),
            vec![0, 1, 3, 2]
        );
    }

    #[test]
    fn cphase_pi_is_cz() {
        let cp = build_gate(&spec(GateKind::Cphase { phase: PI }, 2)).unwrap();
        let cz = build_gate(&spec(GateKind::Cz, 2)).unwrap();
        assert!((cp - cz).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn toffoli_and_fredkin() {
        let t = build_gate(&spec(GateKind::Toffoli, 3)).unwrap();
        let perm: Vec<_> = (0..8).map(|c| perm_target(&t, c)).collect();
        assert_eq!(perm, vec![0, 1, 2, 3, 4, 5, 7, 6]);
        let f = build_gate(&spec(GateKind::Fredkin, 3)).unwrap();
        let perm: Vec<_> = (0..8).map(|c| perm_target(&f, c)).collect();
        assert_eq!(perm, vec![0, 1, 2, 3, 4, 6, 5, 7]);
    }

    #[test]
    fn swap_permutation() {
        let s = build_gate(&spec(GateKind::Swap, 2)).unwrap();
        assert_eq!(
            (0..4).map(|c| perm_target(&s, c)).collect::<Vec<_>>(),
            vec![0, 2, 1, 3]
        );
    }

    #[test]
    fn gen_cnot_1_base_cases() {
        let cnot = build_gate(&spec(GateKind::Cnot, 2)).unwrap();
        let toff = build_gate(&spec(GateKind::Toffoli, 3)).unwrap();
        assert_eq!(build_gen_cnot_1(2).unwrap(), cnot);
        assert_eq!(build_gen_cnot_1(3).unwrap(), toff);
        assert!(build_gen_cnot_1(1).is_err());
    }

    #[test]
    fn gen_cnot_1_five_qubits() {
        let g = build_gen_cnot_1(5).unwrap();
        let mut oracle = identity(32);
        oracle.swap_columns(0b11110, 0b11111);
        assert_eq!(g, oracle);
        assert_eq!(&g * &g, identity(32));
    }

    #[test]
    fn gen_cnot_2_matches_explicit_product() {
        let cnot12 = embed_with_ancilla(&build_gen_cnot_1(2).unwrap(), 2);
        let toff = build_gen_cnot_1(3).unwrap();
        assert_eq!(build_gen_cnot_2(2).unwrap(), build_gen_cnot_1(2).unwrap());
        assert_eq!(build_gen_cnot_2(3).unwrap(), cnot12 * toff);
        assert!(build_gen_cnot_2(1).is_err());
    }

    #[test]
    fn gen_cnot_2_block_structure_stable() {
        // the N+1 ladder restricted to the last qubit = |0> acts like the N ladder
        // on the leading qubits except where all N qubits are set
        for n in 3..6 {
            let small = build_gen_cnot_2(n).unwrap();
            let big = build_gen_cnot_2(n + 1).unwrap();
            let dim = 1 << n;
            let all_ones = dim - 1;
            for b in 0..dim {
                if b == all_ones {
                    continue;
                }
                let t_small = perm_target(&small, b);
                let t_big = perm_target(&big, b << 1);
                assert_eq!(t_big, t_small << 1, "n={n} b={b:b}");
            }
        }
    }

    #[test]
    fn embedding_norms() {
        assert_eq!(embed_with_ancilla(&identity(2), 2), identity(4));
        let cnot = build_gate(&spec(GateKind::Cnot, 2)).unwrap();
        let e = embed_with_ancilla(&cnot, 4);
        assert_eq!(e.shape(), (16, 16));
        assert_eq!(frobenius_norm_sq(&e), 16.0);
        // block-diagonal in the ancilla index
        for r in 0..16 {
            for c in 0..16 {
                if r % 4 != c % 4 {
                    assert_eq!(e[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let s3 = SystemShape::unitary(3, 2).unwrap();
        assert!(GateSpec::new(GateKind::Cnot, s3).is_err());
        assert!(GateSpec::new(GateKind::Toffoli, SystemShape::unitary(2, 2).unwrap()).is_err());
        assert!(GateSpec::new(
            GateKind::Custom {
                matrix: identity(3)
            },
            SystemShape::unitary(2, 2).unwrap()
        )
        .is_err());
        assert!(GateSpec::new(GateKind::RandomIsometry { seed: 1 }, s3).is_err());
    }

    #[test]
    fn built_gates_are_unitary() {
        let kinds = [
            (GateKind::Cnot, 2),
            (GateKind::Cz, 2),
            (GateKind::cphase(), 2),
            (GateKind::Swap, 2),
            (GateKind::Toffoli, 3),
            (GateKind::Fredkin, 3),
            (GateKind::GenCnot1, 6),
            (GateKind::GenCnot2, 6),
            (GateKind::RandomUnitary { seed: 4 }, 4),
        ];
        for (k, n) in kinds {
            assert!(
                is_unitary(&build_gate(&spec(k.clone(), n)).unwrap(), 1e-12),
                "{k:?}"
            );
        }
    }

    #[test]
    fn isometry_full_inputs_is_ancilla_column_block() {
        let shape = SystemShape::unitary(2, 2).unwrap();
        let sp = GateSpec::new(GateKind::Cnot, shape).unwrap();
        let states = InitialStates::default_for(&shape);
        let v = build_isometry(&sp, &states).unwrap();
        let full = embed_with_ancilla(&build_gate(&sp).unwrap(), 2);
        assert_eq!(v.shape(), (8, 4));
        for c in 0..4 {
            assert_eq!(v.column(c), full.column(2 * c));
        }
    }

    #[test]
    fn toffoli_one_to_three() {
        let shape = SystemShape::new(3, 2, 1).unwrap();
        let sp = GateSpec::new(GateKind::Toffoli, shape).unwrap();
        let v = build_isometry(&sp, &InitialStates::default_for(&shape)).unwrap();
        assert_eq!(v.shape(), (16, 2));
        // |x00> with ancilla 0 maps to itself
        assert_eq!(v[(0, 0)], ONE);
        assert_eq!(v[(0b100 * 2, 1)], ONE);
        assert!(isometry_defect(&v) < 1e-12);
    }

    #[test]
    fn random_isometry_columns_orthonormal() {
        let shape = SystemShape::new(3, 4, 2).unwrap();
        let sp = GateSpec::new(GateKind::RandomIsometry { seed: 17 }, shape).unwrap();
        let v = build_isometry(&sp, &InitialStates::default_for(&shape)).unwrap();
        assert_eq!(v.shape(), (32, 4));
        assert!(isometry_defect(&v) < 1e-12);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let shape = SystemShape::new(3, 2, 1).unwrap();
        let sp = GateSpec::new(GateKind::Toffoli, shape).unwrap();
        let mut st = InitialStates::default_for(&shape);
        st.qubits[0][0] = Complex64::new(1.0 + 1e-6, 0.0);
        assert!(matches!(
            build_isometry(&sp, &st),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn gate_spec_serde() {
        let json = r#"{"kind":"CPHASE","shape":{"n_qubits":2,"ancilla_dim":4}}"#;
        let sp: GateSpec = serde_json::from_str(json).unwrap();
        assert_eq!(sp.kind, GateKind::cphase());
        let json = r#"{"kind":"CUSTOM","matrix":[[[1,0],[0,0]],[[0,0],[1,0]]],"shape":{"n_qubits":1,"ancilla_dim":2}}"#;
        let sp: GateSpec = serde_json::from_str(json).unwrap();
        assert_eq!(build_gate(&sp).unwrap(), identity(2));
    }
}
