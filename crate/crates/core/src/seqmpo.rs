//! Sequential MPO: a chain of ancilla–qubit unitaries and its contractions.
//!
//! Site `k` carries a `2D × 2D` unitary acting on (qubit `k` ⊗ ancilla), with
//! row/column index `i·D + α` (qubit index `i`, ancilla index `α`). Its four
//! `D × D` ancilla blocks `U^{ij}[α, β] = W[i·D + α, j·D + β]` are the MPO
//! tensors; the bond dimension is the ancilla dimension `D`.
//!
//! The ancilla meets qubit 1 first, so the decomposed operator is
//!
//! ```text
//! U_seq = E_N ⋯ E_2 E_1,   E_k = 1_{1..k-1} ⊗ W_k(q_k, a) ⊗ 1_{k+1..N}
//! U_seq[(i, α), (j, β)] = (U_N^{i_N j_N} ⋯ U_1^{i_1 j_1})[α, β]
//! ```
//!
//! where the ancilla is the trailing (least significant) tensor factor.
//! Isometry targets keep the inputs of qubits `1..=M` free and contract the
//! inputs of qubits `M+1..=N` and of the ancilla with reference states.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatelib::{qubit_bit, InitialStates, SystemShape};
use crate::numerics::{self, ComplexMatrix, GeneratorBasis, ZERO};

/// Tolerance for accepting a site matrix as unitary.
pub const SITE_UNITARY_TOL: f64 = 1e-10;

/// One bipartite ancilla–qubit unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteUnitary {
    site_index: usize,
    ancilla_dim: usize,
    matrix: ComplexMatrix,
    h_coeffs: Option<Vec<f64>>,
    blocks: [ComplexMatrix; 4],
}

impl BipartiteUnitary {
    pub fn from_matrix(
        site_index: usize,
        ancilla_dim: usize,
        matrix: ComplexMatrix,
    ) -> Result<Self> {
        let dim = 2 * ancilla_dim;
        if matrix.shape() != (dim, dim) {
            return Err(Error::dim(
                format!("{dim}x{dim} site matrix"),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        numerics::ensure_finite(&matrix, "site matrix")?;
        let defect = numerics::isometry_defect(&matrix);
        if defect > SITE_UNITARY_TOL {
            return Err(Error::Invalid(format!(
                "site {site_index} matrix is not unitary (defect {defect:.2e})"
            )));
        }
        Ok(Self::build(site_index, ancilla_dim, matrix, None))
    }

    /// `exp(−i Σ h_{l,l'} σ_l ⊗ τ_l')` with the Pauli basis on the qubit and
    /// the generalized Gell-Mann basis on the ancilla.
    pub fn from_generator(
        site_index: usize,
        h: Vec<f64>,
        pauli: &GeneratorBasis,
        ancilla_basis: &GeneratorBasis,
    ) -> Result<Self> {
        let m = numerics::matrix_exp_hermitian_generator(&h, pauli, ancilla_basis)?;
        Ok(Self::build(site_index, ancilla_basis.dim(), m, Some(h)))
    }

    /// Attaches generator coordinates recovered from the principal logarithm
    /// of the site matrix.
    pub fn with_generator_coords(
        mut self,
        pauli: &GeneratorBasis,
        ancilla_basis: &GeneratorBasis,
    ) -> Result<Self> {
        let h = numerics::log_unitary(&self.matrix)?;
        self.h_coeffs = Some(numerics::generator_coordinates(&h, pauli, ancilla_basis));
        Ok(self)
    }

    pub fn identity(site_index: usize, ancilla_dim: usize) -> Self {
        let h = vec![0.0; 4 * ancilla_dim * ancilla_dim];
        Self::build(
            site_index,
            ancilla_dim,
            numerics::identity(2 * ancilla_dim),
            Some(h),
        )
    }

    pub fn haar_random<R: Rng + ?Sized>(
        site_index: usize,
        ancilla_dim: usize,
        rng: &mut R,
    ) -> Self {
        let m = numerics::haar_random_unitary_with(2 * ancilla_dim, rng);
        Self::build(site_index, ancilla_dim, m, None)
    }

    fn build(
        site_index: usize,
        ancilla_dim: usize,
        matrix: ComplexMatrix,
        h_coeffs: Option<Vec<f64>>,
    ) -> Self {
        let d = ancilla_dim;
        let block = |i: usize, j: usize| matrix.view((i * d, j * d), (d, d)).into_owned();
        let blocks = [block(0, 0), block(0, 1), block(1, 0), block(1, 1)];
        BipartiteUnitary {
            site_index,
            ancilla_dim,
            matrix,
            h_coeffs,
            blocks,
        }
    }

    pub fn site_index(&self) -> usize {
        self.site_index
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn h_coeffs(&self) -> Option<&[f64]> {
        self.h_coeffs.as_deref()
    }

    /// Ancilla block `U^{ij}` for qubit output `i` and input `j`.
    pub fn ancilla_block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * 2 + j]
    }
}

/// The decomposed operator: `N` sites sharing ancilla dimension `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialMPO {
    shape: SystemShape,
    sites: Vec<BipartiteUnitary>,
}

impl SequentialMPO {
    pub fn new(shape: SystemShape, sites: Vec<BipartiteUnitary>) -> Result<Self> {
        if sites.len() != shape.n_qubits() {
            return Err(Error::dim(
                format!("{} sites", shape.n_qubits()),
                sites.len(),
            ));
        }
        for (k, s) in sites.iter().enumerate() {
            if s.ancilla_dim() != shape.ancilla_dim() {
                return Err(Error::dim(
                    format!("ancilla dimension {}", shape.ancilla_dim()),
                    s.ancilla_dim(),
                ));
            }
            if s.site_index() != k + 1 {
                return Err(Error::Invalid(format!(
                    "site at position {} is labelled {}",
                    k + 1,
                    s.site_index()
                )));
            }
        }
        Ok(SequentialMPO { shape, sites })
    }

    pub fn identity(shape: SystemShape) -> Self {
        let sites = (1..=shape.n_qubits())
            .map(|k| BipartiteUnitary::identity(k, shape.ancilla_dim()))
            .collect();
        SequentialMPO { shape, sites }
    }

    pub fn haar_random<R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> Self {
        let sites = (1..=shape.n_qubits())
            .map(|k| BipartiteUnitary::haar_random(k, shape.ancilla_dim(), rng))
            .collect();
        SequentialMPO { shape, sites }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn sites(&self) -> &[BipartiteUnitary] {
        &self.sites
    }

    /// Site `k` (1-based).
    pub fn site(&self, k: usize) -> &BipartiteUnitary {
        &self.sites[k - 1]
    }

    pub fn set_site(&mut self, site: BipartiteUnitary) -> Result<()> {
        let k = site.site_index();
        if k == 0 || k > self.sites.len() || site.ancilla_dim() != self.shape.ancilla_dim() {
            return Err(Error::Invalid(format!("site {k} does not fit this chain")));
        }
        self.sites[k - 1] = site;
        Ok(())
    }

    pub fn site_matrices(&self) -> Vec<ComplexMatrix> {
        self.sites.iter().map(|s| s.matrix().clone()).collect()
    }

    /// Dense `2^N·D × 2^N·D` operator from the MPO sum.
    pub fn contract_to_dense(&self) -> ComplexMatrix {
        contract_sites(&self.site_matrices(), self.shape.ancilla_dim())
    }

    /// `Tr[target^H · U_seq]` through the block network.
    pub fn overlap_with_target(&self, target: &ComplexMatrix) -> Result<Complex64> {
        let bt = BlockTarget::from_unitary(target, &self.shape)?;
        Ok(bt.overlap(&self.site_matrices()))
    }

    /// Environment `E_k` with `overlap = Tr[E_k^H W_k]` for the site-`k` matrix.
    pub fn environment(&self, target: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
        self.check_site(k)?;
        let bt = BlockTarget::from_unitary(target, &self.shape)?;
        Ok(bt.environment(&self.site_matrices(), k))
    }

    /// `Tr[V_target^H · V_seq]` with `V_seq` the chain contracted on `states`.
    pub fn overlap_isometry(
        &self,
        target_isometry: &ComplexMatrix,
        states: &InitialStates,
    ) -> Result<Complex64> {
        let bt = BlockTarget::from_isometry(target_isometry, &self.shape, states)?;
        Ok(bt.overlap(&self.site_matrices()))
    }

    /// Dense `V_seq = U_seq (1_{2^M} ⊗ ψ ⊗ φ)`.
    pub fn contract_isometry(&self, states: &InitialStates) -> Result<ComplexMatrix> {
        states.validate(&self.shape)?;
        Ok(self.contract_to_dense() * states.input_embedding(&self.shape))
    }

    fn check_site(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.shape.n_qubits() {
            return Err(Error::Invalid(format!(
                "site index {k} outside 1..={}",
                self.shape.n_qubits()
            )));
        }
        Ok(())
    }
}

fn blocks_of(site: &ComplexMatrix, d: usize) -> [ComplexMatrix; 4] {
    let block = |i: usize, j: usize| site.view((i * d, j * d), (d, d)).into_owned();
    [block(0, 0), block(0, 1), block(1, 0), block(1, 1)]
}

/// Dense contraction of arbitrary (not necessarily unitary) site matrices,
/// accumulated site by site in time order.
pub fn contract_sites(sites: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    let mut acc = numerics::identity(d);
    for site in sites {
        let blocks = blocks_of(site, d);
        let regs = acc.nrows() / d;
        let mut next = ComplexMatrix::zeros(2 * acc.nrows(), 2 * acc.ncols());
        for bi in 0..regs {
            for bj in 0..regs {
                let old = acc.view((bi * d, bj * d), (d, d));
                for a in 0..2 {
                    for b in 0..2 {
                        let prod = &blocks[a * 2 + b] * old;
                        next.view_mut(((bi * 2 + a) * d, (bj * 2 + b) * d), (d, d))
                            .copy_from(&prod);
                    }
                }
            }
        }
        acc = next;
    }
    acc
}

/// Dense `E_k = 1 ⊗ W(q_k, a) ⊗ 1` on the full `2^N·D` space.
pub fn embedded_site(site: &ComplexMatrix, k: usize, n: usize, d: usize) -> ComplexMatrix {
    let reg = 1usize << n;
    let dim = reg * d;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let shift = n - k;
    for col_reg in 0..reg {
        let j = (col_reg >> shift) & 1;
        for beta in 0..d {
            let col = col_reg * d + beta;
            for i in 0..2 {
                let row_reg = (col_reg & !(1 << shift)) | (i << shift);
                for alpha in 0..d {
                    let v = site[(i * d + alpha, j * d + beta)];
                    if v != ZERO {
                        out[(row_reg * d + alpha, col)] = v;
                    }
                }
            }
        }
    }
    out
}

/// One nonzero `D × D` block of a target, keyed by output bits of all `N`
/// qubits and input bits of the free qubits.
#[derive(Debug, Clone)]
struct TargetBlock {
    out_bits: usize,
    in_bits: usize,
    /// Conjugate transpose of the target block.
    adj: ComplexMatrix,
}

/// A target operator decomposed into ancilla blocks, ready for overlaps and
/// environments against site matrices.
#[derive(Debug, Clone)]
pub struct BlockTarget {
    n: usize,
    m: usize,
    d: usize,
    fixed_states: Vec<[Complex64; 2]>,
    blocks: Vec<TargetBlock>,
    norm_sq: f64,
}

impl BlockTarget {
    /// Square `2^N·D` target (typically `U ⊗ 1_D`).
    pub fn from_unitary(target: &ComplexMatrix, shape: &SystemShape) -> Result<Self> {
        let dim = shape.register_dim() * shape.ancilla_dim();
        if target.shape() != (dim, dim) {
            return Err(Error::dim(
                format!("{dim}x{dim} target"),
                format!("{}x{}", target.nrows(), target.ncols()),
            ));
        }
        numerics::ensure_finite(target, "target")?;
        let d = shape.ancilla_dim();
        let reg = shape.register_dim();
        let mut blocks = Vec::new();
        for i in 0..reg {
            for j in 0..reg {
                let b = target.view((i * d, j * d), (d, d));
                if b.iter().any(|z| *z != ZERO) {
                    blocks.push(TargetBlock {
                        out_bits: i,
                        in_bits: j,
                        adj: b.adjoint(),
                    });
                }
            }
        }
        Ok(BlockTarget {
            n: shape.n_qubits(),
            m: shape.n_qubits(),
            d,
            fixed_states: Vec::new(),
            blocks,
            norm_sq: numerics::frobenius_norm_sq(target),
        })
    }

    /// `2^N·D × 2^M` isometry target, with the fixed inputs of qubits
    /// `M+1..=N` and of the ancilla set by `states`.
    pub fn from_isometry(
        target: &ComplexMatrix,
        shape: &SystemShape,
        states: &InitialStates,
    ) -> Result<Self> {
        states.validate(shape)?;
        let d = shape.ancilla_dim();
        let rows = shape.register_dim() * d;
        let cols = shape.input_dim();
        if target.shape() != (rows, cols) {
            return Err(Error::dim(
                format!("{rows}x{cols} isometry"),
                format!("{}x{}", target.nrows(), target.ncols()),
            ));
        }
        numerics::ensure_finite(target, "isometry target")?;
        let phi_adj = ComplexMatrix::from_row_slice(
            1,
            d,
            &states.ancilla.iter().map(|z| z.conj()).collect::<Vec<_>>(),
        );
        let mut blocks = Vec::new();
        for i in 0..shape.register_dim() {
            for j in 0..cols {
                let v = target.view((i * d, j), (d, 1));
                if v.iter().any(|z| *z != ZERO) {
                    // block = v φ^H, stored as its adjoint φ v^H
                    let block = v * &phi_adj;
                    blocks.push(TargetBlock {
                        out_bits: i,
                        in_bits: j,
                        adj: block.adjoint(),
                    });
                }
            }
        }
        Ok(BlockTarget {
            n: shape.n_qubits(),
            m: shape.input_qubits(),
            d,
            fixed_states: states.qubits.iter().map(|q| [q[0], q[1]]).collect(),
            blocks,
            norm_sq: numerics::frobenius_norm_sq(target),
        })
    }

    /// `‖target‖²_F`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `‖V_seq‖²_F` for unitary sites: `2^M·D` for unitaries (`M = N`), `2^M`
    /// for isometries.
    pub fn seq_norm_sq(&self) -> f64 {
        if self.m == self.n {
            ((1usize << self.n) * self.d) as f64
        } else {
            (1usize << self.m) as f64
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn check_sites(&self, sites: &[ComplexMatrix]) {
        assert_eq!(sites.len(), self.n, "site count");
        for s in sites {
            assert_eq!(s.shape(), (2 * self.d, 2 * self.d), "site shape");
        }
    }

    /// Transfer matrices per site: index `i·2 + j` for free sites, `i` for
    /// sites whose input is contracted with a reference state.
    fn transfers(&self, sites: &[ComplexMatrix]) -> Vec<Vec<ComplexMatrix>> {
        sites
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                let blocks = blocks_of(s, self.d);
                let k = idx + 1;
                if k <= self.m {
                    blocks.to_vec()
                } else {
                    let psi = self.fixed_states[k - self.m - 1];
                    (0..2)
                        .map(|i| &blocks[i * 2] * psi[0] + &blocks[i * 2 + 1] * psi[1])
                        .collect()
                }
            })
            .collect()
    }

    fn slot(&self, block: &TargetBlock, k: usize) -> usize {
        let i = qubit_bit(block.out_bits, k, self.n);
        if k <= self.m {
            i * 2 + qubit_bit(block.in_bits, k, self.m)
        } else {
            i
        }
    }

    /// `Σ_blocks Tr[B^H · A_N ⋯ A_1]`.
    pub fn overlap(&self, sites: &[ComplexMatrix]) -> Complex64 {
        self.check_sites(sites);
        let t = self.transfers(sites);
        let mut total = ZERO;
        for b in &self.blocks {
            let mut p = b.adj.clone();
            // Tr[B^H A_N ⋯ A_1]: multiply on the right from site N down to 1
            for k in (1..=self.n).rev() {
                p = &p * &t[k - 1][self.slot(b, k)];
            }
            total += p.trace();
        }
        total
    }

    /// Environment of site `k` (1-based): the `2D × 2D` matrix `E` with
    /// `overlap = Tr[E^H W]` when site `k`'s matrix is replaced by any `W`.
    pub fn environment(&self, sites: &[ComplexMatrix], k: usize) -> ComplexMatrix {
        self.check_sites(sites);
        assert!(k >= 1 && k <= self.n, "site index");
        let d = self.d;
        let t = self.transfers(sites);
        let free = k <= self.m;
        let nslots = if free { 4 } else { 2 };
        let mut g = vec![ComplexMatrix::zeros(d, d); nslots];
        for b in &self.blocks {
            // L = A_{k-1} ⋯ A_1, R = A_N ⋯ A_{k+1}; accumulate L B^H R
            let mut left = numerics::identity(d);
            for q in 1..k {
                left = &t[q - 1][self.slot(b, q)] * left;
            }
            let mut lbr = left * &b.adj;
            for q in (k + 1..=self.n).rev() {
                lbr = &lbr * &t[q - 1][self.slot(b, q)];
            }
            g[self.slot(b, k)] += lbr;
        }
        let mut env = ComplexMatrix::zeros(2 * d, 2 * d);
        for i in 0..2 {
            for j in 0..2 {
                let (gm, scale) = if free {
                    (&g[i * 2 + j], Complex64::new(1.0, 0.0))
                } else {
                    (&g[i], self.fixed_states[k - self.m - 1][j])
                };
                for alpha in 0..d {
                    for beta in 0..d {
                        env[(i * d + alpha, j * d + beta)] = (scale * gm[(beta, alpha)]).conj();
                    }
                }
            }
        }
        env
    }
}

pub const MPO_FORMAT: &str = "seqmpo";
pub const MPO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteRecord {
    site: usize,
    #[serde(with = "crate::serde_matrix")]
    matrix: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MpoFile {
    format: String,
    version: u32,
    shape: SystemShape,
    sites: Vec<SiteRecord>,
}

impl SequentialMPO {
    pub fn to_json(&self) -> Result<String> {
        let file = MpoFile {
            format: MPO_FORMAT.into(),
            version: MPO_FORMAT_VERSION,
            shape: self.shape,
            sites: self
                .sites
                .iter()
                .map(|s| SiteRecord {
                    site: s.site_index(),
                    matrix: s.matrix().clone(),
                    h_coeffs: s.h_coeffs.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MpoFile = serde_json::from_str(text)?;
        if file.format != MPO_FORMAT {
            return Err(Error::Config(format!(
                "expected format \"{MPO_FORMAT}\", found \"{}\"",
                file.format
            )));
        }
        if file.version != MPO_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported {MPO_FORMAT} version {}",
                file.version
            )));
        }
        let d = file.shape.ancilla_dim();
        let sites = file
            .sites
            .into_iter()
            .map(|r| {
                let mut s = BipartiteUnitary::from_matrix(r.site, d, r.matrix)?;
                s.h_coeffs = r.h_coeffs;
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        SequentialMPO::new(file.shape, sites)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
