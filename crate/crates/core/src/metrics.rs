//! Cost functions and the normalized fidelity gaps.
//!
//! * Frobenius gap: `C_F / (‖T‖²_F + ‖S‖²_F)`
//! * spectral gap:  `‖T − S‖²₂ / (‖T‖₂ + ‖S‖₂)²`
//! * renormalized Frobenius gap: `C_F / (‖T‖_F + ‖S‖_F)²`
//!
//! with `T` the target and `S` the sequentially decomposed operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};

fn check_same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dim(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    Ok(())
}

/// `‖T‖² + ‖S‖² − 2 Re Tr[T^H S]` given a precomputed trace term.
pub fn frobenius_cost_from_overlap(
    target_norm_sq: f64,
    seq_norm_sq: f64,
    overlap: Complex64,
) -> f64 {
    // tiny negative values are rounding in an exact decomposition
    (target_norm_sq + seq_norm_sq - 2.0 * overlap.re).max(0.0)
}

/// `‖target − seq‖²_F` through the trace expansion.
pub fn frobenius_cost(target: &ComplexMatrix, seq: &ComplexMatrix) -> Result<f64> {
    check_same_shape(target, seq)?;
    Ok(frobenius_cost_from_overlap(
        numerics::frobenius_norm_sq(target),
        numerics::frobenius_norm_sq(seq),
        numerics::trace_inner(target, seq),
    ))
}

pub fn gap_frobenius(cost: f64, target: &ComplexMatrix, seq: &ComplexMatrix) -> Result<f64> {
    check_same_shape(target, seq)?;
    let denom = numerics::frobenius_norm_sq(target) + numerics::frobenius_norm_sq(seq);
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(cost / denom)
}

pub fn gap_frobenius_renormalized(
    cost: f64,
    target: &ComplexMatrix,
    seq: &ComplexMatrix,
) -> Result<f64> {
    check_same_shape(target, seq)?;
    let denom =
        numerics::frobenius_norm_sq(target).sqrt() + numerics::frobenius_norm_sq(seq).sqrt();
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(cost / (denom * denom))
}

/// `‖target − seq‖²₂`.
pub fn pnorm_cost(target: &ComplexMatrix, seq: &ComplexMatrix) -> Result<f64> {
    check_same_shape(target, seq)?;
    let s = numerics::spectral_norm(&(target - seq))?;
    Ok(s * s)
}

pub fn gap_pnorm(target: &ComplexMatrix, seq: &ComplexMatrix) -> Result<f64> {
    let cost = pnorm_cost(target, seq)?;
    let denom = numerics::spectral_norm(target)? + numerics::spectral_norm(seq)?;
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(cost / (denom * denom))
}

/// Summary of a set of per-restart values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartStats {
    pub best: f64,
    pub mean: f64,
    pub stddev: f64,
    pub completed: usize,
    pub failed: usize,
}

impl RestartStats {
    pub fn from_values(values: &[f64], failed: usize) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(RestartStats {
            best: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            stddev: var.sqrt(),
            completed: values.len(),
            failed,
        })
    }
}

/// Converged costs and gaps for one gate × shape cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gate: String,
    pub n_qubits: usize,
    pub ancilla_dim: usize,
    pub input_qubits: usize,
    /// Cost that was optimized (`FROBENIUS` or `PNORM2`).
    #[serde(default = "default_metric")]
    pub metric: String,
    pub cost_frobenius: f64,
    pub gap_frobenius: f64,
    pub gap_frobenius_renorm: f64,
    #[serde(default)]
    pub cost_pnorm: Option<f64>,
    #[serde(default)]
    pub gap_pnorm: Option<f64>,
    pub target_norm_f_sq: f64,
    pub seq_norm_f_sq: f64,
    /// Per-restart Frobenius gaps.
    #[serde(default)]
    pub frobenius_restarts: Option<RestartStats>,
    /// Per-restart spectral gaps.
    #[serde(default)]
    pub pnorm_restarts: Option<RestartStats>,
    pub config_digest: String,
}

fn default_metric() -> String {
    "FROBENIUS".into()
}

impl GapReport {
    /// Frobenius quantities of the pair `(target, seq)`, computed from exact
    /// norms of the actual matrices.
    pub fn frobenius(
        gate: &str,
        shape: &crate::gatelib::SystemShape,
        target: &ComplexMatrix,
        seq: &ComplexMatrix,
        config_digest: &str,
    ) -> Result<Self> {
        let cost = frobenius_cost(target, seq)?;
        Ok(GapReport {
            gate: gate.to_string(),
            n_qubits: shape.n_qubits(),
            ancilla_dim: shape.ancilla_dim(),
            input_qubits: shape.input_qubits(),
            metric: default_metric(),
            cost_frobenius: cost,
            gap_frobenius: gap_frobenius(cost, target, seq)?,
            gap_frobenius_renorm: gap_frobenius_renormalized(cost, target, seq)?,
            cost_pnorm: None,
            gap_pnorm: None,
            target_norm_f_sq: numerics::frobenius_norm_sq(target),
            seq_norm_f_sq: numerics::frobenius_norm_sq(seq),
            frobenius_restarts: None,
            pnorm_restarts: None,
            config_digest: config_digest.to_string(),
        })
    }

    /// Adds the spectral cost and gap of the pair `(target, seq)`.
    pub fn with_pnorm(mut self, target: &ComplexMatrix, seq: &ComplexMatrix) -> Result<Self> {
        self.cost_pnorm = Some(pnorm_cost(target, seq)?);
        self.gap_pnorm = Some(gap_pnorm(target, seq)?);
        Ok(self)
    }

    /// Re-checks the range and ordering invariants of the gaps.
    pub fn check_invariants(&self) -> Result<()> {
        const SLACK: f64 = 1e-12;
        let in_unit = |g: f64| (-SLACK..=1.0 + SLACK).contains(&g);
        let mut gaps = vec![self.gap_frobenius, self.gap_frobenius_renorm];
        gaps.extend(self.gap_pnorm);
        if let Some(bad) = gaps.iter().find(|g| !in_unit(**g)) {
            return Err(Error::Invalid(format!("gap {bad} outside [0, 1]")));
        }
        if self.gap_frobenius_renorm > self.gap_frobenius + SLACK {
            return Err(Error::Invalid(
                "renormalized Frobenius gap exceeds Frobenius gap".into(),
            ));
        }
        Ok(())
    }

    pub const CSV_HEADER: &'static str = "gate,n_qubits,ancilla_dim,input_qubits,metric,cost_frobenius,gap_frobenius,gap_frobenius_renorm,cost_pnorm,gap_pnorm,pnorm_gap_best,pnorm_gap_mean,pnorm_gap_stddev,restarts_completed,restarts_failed,target_norm_f_sq,seq_norm_f_sq,config_digest";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        let stats = self.pnorm_restarts.or(self.frobenius_restarts);
        format!(
            "{},{},{},{},{},{:.12e},{:.12e},{:.12e},{},{},{},{},{},{},{},{:.12e},{:.12e},{}",
            self.gate,
            self.n_qubits,
            self.ancilla_dim,
            self.input_qubits,
            self.metric,
            self.cost_frobenius,
            self.gap_frobenius,
            self.gap_frobenius_renorm,
            opt(self.cost_pnorm),
            opt(self.gap_pnorm),
            opt(self.pnorm_restarts.map(|s| s.best)),
            opt(self.pnorm_restarts.map(|s| s.mean)),
            opt(self.pnorm_restarts.map(|s| s.stddev)),
            stats.map(|s| s.completed.to_string()).unwrap_or_default(),
            stats.map(|s| s.failed.to_string()).unwrap_or_default(),
            self.target_norm_f_sq,
            self.seq_norm_f_sq,
            self.config_digest,
        )
    }
}
