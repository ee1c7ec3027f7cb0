//! Variational sweeps over the sequential MPO.
//!
//! The Frobenius cost is linear in every site through its environment, so
//! each local step replaces the site by the unitary polar factor of the
//! environment (the global per-site optimum). The spectral cost is
//! non-smooth. Each site visit first descends a Schatten-q smoothing of it
//! (q doubling from 2 sweep by sweep), then polishes the exact cost by
//! coordinate search over the generator coordinates with step halving.
//! Converged restarts are perturbed and re-optimized a few times.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatelib::{InitialStates, SystemShape};
use crate::metrics::{self, RestartStats};
use crate::numerics::{self, ComplexMatrix, GeneratorBasis};
use crate::seqmpo::{embedded_site, BipartiteUnitary, BlockTarget, SequentialMPO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    Frobenius,
    #[serde(rename = "PNORM2")]
    Pnorm2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InitMode {
    Identity,
    HaarRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub metric: Metric,
    pub max_sweeps: usize,
    /// Sweeps stop once the normalized cost changes by less than this.
    pub rel_tol: f64,
    pub restarts: usize,
    pub init_mode: InitMode,
    pub seed: u64,
    /// Frobenius runs at even `D >= 4` on a target `U ⊗ 1_D` add one restart
    /// started from the `D/2` optimum tensored with `1_2`.
    pub lift_half_ancilla: bool,
    /// Initial coordinate step of the spectral-norm search.
    pub pnorm_step: f64,
    /// The search at a site ends once the step is halved below this.
    pub pnorm_min_step: f64,
    /// Cap on coordinate passes per site visit.
    pub pnorm_max_iters_per_site: usize,
    /// Schatten exponent of the smoothed spectral cost in the first sweep;
    /// it doubles every sweep up to `pnorm_q_max`.
    pub pnorm_q_start: f64,
    pub pnorm_q_max: f64,
    /// Gradient steps on the smoothed cost per site visit (0 disables).
    pub pnorm_descent_steps: usize,
    /// Perturb-and-reoptimize attempts per restart after convergence.
    pub pnorm_kicks: usize,
    /// Frobenius norm of the random generator of each kick.
    pub pnorm_kick_strength: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            metric: Metric::Frobenius,
            max_sweeps: 500,
            rel_tol: 1e-9,
            restarts: 10,
            init_mode: InitMode::HaarRandom,
            seed: 0,
            lift_half_ancilla: true,
            pnorm_step: 0.3,
            pnorm_min_step: 1e-4,
            pnorm_max_iters_per_site: 2,
            pnorm_q_start: 2.0,
            pnorm_q_max: 256.0,
            pnorm_descent_steps: 30,
            pnorm_kicks: 3,
            pnorm_kick_strength: 6.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::Config("restarts and max_sweeps must be >= 1".into()));
        }
        if !(self.pnorm_step > 0.0)
            || !(self.pnorm_min_step > 0.0)
            || self.pnorm_max_iters_per_site == 0
        {
            return Err(Error::Config(
                "p-norm search parameters must be positive".into(),
            ));
        }
        if !(self.pnorm_q_start >= 2.0) || !(self.pnorm_q_max >= self.pnorm_q_start) {
            return Err(Error::Config(
                "need 2 <= pnorm_q_start <= pnorm_q_max".into(),
            ));
        }
        Ok(())
    }

    /// Short stable fingerprint of the configuration, for report metadata.
    pub fn digest(&self) -> String {
        // FNV-1a over the canonical JSON encoding
        let text = serde_json::to_string(self).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Seed of restart `r`; nested restart sets share their prefix.
    pub fn restart_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// Cost before the first sweep followed by the cost after each sweep.
    pub costs: Vec<f64>,
    /// Cost after every individual site update.
    #[serde(default)]
    pub update_costs: Vec<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
    pub wall_time: f64,
}

impl ConvergenceTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,cost\n");
        for (i, c) in self.costs.iter().enumerate() {
            out.push_str(&format!("{i},{c:.15e}\n"));
        }
        out
    }

    pub fn final_cost(&self) -> f64 {
        *self
            .costs
            .last()
            .expect("trace always holds the initial cost")
    }
}

/// What happened to one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed: u64,
    /// Normalized gap reached, or `None` if the restart was aborted.
    pub gap: Option<f64>,
    pub error: Option<String>,
    /// Started from a lifted smaller-ancilla solution rather than `seed`.
    #[serde(default)]
    pub lifted: bool,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub mpo: SequentialMPO,
    pub trace: ConvergenceTrace,
    pub restarts: Vec<RestartRecord>,
}

impl Optimized {
    pub fn stats(&self) -> Option<RestartStats> {
        let gaps: Vec<f64> = self.restarts.iter().filter_map(|r| r.gap).collect();
        RestartStats::from_values(&gaps, self.restarts.len() - gaps.len())
    }

    pub fn best_gap(&self) -> f64 {
        self.stats().map(|s| s.best).unwrap_or(f64::NAN)
    }
}

/// Unitary `W` maximizing `Re Tr[env^H W]`: `U V^H` from `env = U S V^H`.
pub fn local_polar_update(env: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !env.is_square() {
        return Err(Error::dim(
            "square environment",
            format!("{}x{}", env.nrows(), env.ncols()),
        ));
    }
    let svd = numerics::svd(env)?;
    Ok(&svd.u * svd.v.adjoint())
}

/// Site visiting order of one sweep: `1..=N` and back down to 1.
pub fn sweep_order(n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.extend((1..n).rev());
    order
}

fn initial_sites(shape: &SystemShape, init: InitMode, seed: u64) -> Vec<ComplexMatrix> {
    match init {
        InitMode::Identity => SequentialMPO::identity(*shape).site_matrices(),
        InitMode::HaarRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SequentialMPO::haar_random(*shape, &mut rng).site_matrices()
        }
    }
}

fn assemble(shape: &SystemShape, sites: Vec<ComplexMatrix>) -> Result<SequentialMPO> {
    let d = shape.ancilla_dim();
    let sites = sites
        .into_iter()
        .enumerate()
        .map(|(k, m)| BipartiteUnitary::from_matrix(k + 1, d, m))
        .collect::<Result<Vec<_>>>()?;
    SequentialMPO::new(*shape, sites)
}

struct RestartResult {
    sites: Vec<ComplexMatrix>,
    trace: ConvergenceTrace,
    gap: f64,
}

/// Polar sweeps from the given starting sites until the normalized cost
/// stalls.
pub fn frobenius_sweeps(
    target: &BlockTarget,
    mut sites: Vec<ComplexMatrix>,
    cfg: &OptimizerConfig,
) -> Result<(Vec<ComplexMatrix>, ConvergenceTrace)> {
    let start = Instant::now();
    let t_norm = target.norm_sq();
    let s_norm = target.seq_norm_sq();
    let denom = t_norm + s_norm;
    let cost_of = |ov| metrics::frobenius_cost_from_overlap(t_norm, s_norm, ov);

    let mut costs = vec![cost_of(target.overlap(&sites))];
    let mut update_costs = Vec::new();
    let mut converged = false;
    let order = sweep_order(sites.len());
    for _ in 0..cfg.max_sweeps {
        for &k in &order {
            let env = target.environment(&sites, k);
            let w = local_polar_update(&env)?;
            // the new overlap is Tr[E^H W] = Σ singular values of E
            update_costs.push(cost_of(numerics::trace_inner(&env, &w)));
            sites[k - 1] = w;
        }
        let cost = cost_of(target.overlap(&sites));
        if !cost.is_finite() {
            return Err(Error::NonFinite("Frobenius cost".into()));
        }
        let prev = *costs.last().unwrap();
        costs.push(cost);
        if (prev - cost).abs() < cfg.rel_tol * denom {
            converged = true;
            break;
        }
    }
    let trace = ConvergenceTrace {
        sweeps_used: costs.len() - 1,
        costs,
        update_costs,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((sites, trace))
}

fn best_of(
    shape: &SystemShape,
    cfg: &OptimizerConfig,
    run: impl Fn(u64) -> Result<RestartResult> + Sync,
) -> Result<Optimized> {
    cfg.validate()?;
    let results: Vec<(u64, Result<RestartResult>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.restart_seed(r);
            (seed, run(seed))
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut best: Option<RestartResult> = None;
    for (seed, res) in results {
        match res {
            Ok(rr) => {
                records.push(RestartRecord {
                    seed,
                    gap: Some(rr.gap),
                    error: None,
                    lifted: false,
                });
                // ties keep the earliest restart
                if best.as_ref().is_none_or(|b| rr.gap < b.gap) {
                    best = Some(rr);
                }
            }
            Err(e) => records.push(RestartRecord {
                seed,
                gap: None,
                error: Some(e.to_string()),
                lifted: false,
            }),
        }
    }
    let best = best.ok_or_else(|| {
        Error::Invalid(format!(
            "all {} restarts failed: {}",
            records.len(),
            records
                .iter()
                .filter_map(|r| r.error.as_deref())
                .next()
                .unwrap_or("")
        ))
    })?;
    Ok(Optimized {
        mpo: assemble(shape, best.sites)?,
        trace: best.trace,
        restarts: records,
    })
}

fn check_square_target(target: &ComplexMatrix, shape: &SystemShape) -> Result<()> {
    let dim = shape.full_dim();
    if target.shape() != (dim, dim) {
        return Err(Error::dim(
            format!("{dim}x{dim} target for {shape}"),
            format!("{}x{}", target.nrows(), target.ncols()),
        ));
    }
    Ok(())
}

/// Minimizes `‖target − U_seq‖²_F` over the chain; `target` lives on the
/// full `2^N·D` space (typically `U ⊗ 1_D`).
pub fn optimize_frobenius(
    target: &ComplexMatrix,
    shape: &SystemShape,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    check_square_target(target, shape)?;
    let unitary_shape = SystemShape::unitary(shape.n_qubits(), shape.ancilla_dim())?;
    let bt = BlockTarget::from_unitary(target, &unitary_shape)?;
    let denom = bt.norm_sq() + bt.seq_norm_sq();
    let mut out = best_of(&unitary_shape, cfg, |seed| {
        let init = initial_sites(&unitary_shape, cfg.init_mode, seed);
        let (sites, trace) = frobenius_sweeps(&bt, init, cfg)?;
        let gap = trace.final_cost() / denom;
        Ok(RestartResult { sites, trace, gap })
    })?;
    if let Some(init) = lifted_start(target, &unitary_shape, cfg)? {
        let (sites, trace) = frobenius_sweeps(&bt, init, cfg)?;
        let gap = trace.final_cost() / denom;
        if gap < out.best_gap() {
            out.mpo = assemble(&unitary_shape, sites)?;
            out.trace = trace;
        }
        out.restarts.push(RestartRecord {
            seed: cfg.seed,
            gap: Some(gap),
            error: None,
            lifted: true,
        });
    }
    Ok(out)
}

/// `U` if `target` is `U ⊗ 1_d` up to rounding.
fn strip_ancilla_identity(target: &ComplexMatrix, d: usize) -> Option<ComplexMatrix> {
    let n = target.nrows() / d;
    let u = ComplexMatrix::from_fn(n, n, |i, j| target[(i * d, j * d)]);
    let tol = 1e-12 * (1.0 + numerics::frobenius_norm_sq(target).sqrt());
    let diff =
        numerics::frobenius_norm_sq(&(numerics::kron(&u, &numerics::identity(d)) - target)).sqrt();
    (diff <= tol).then_some(u)
}

/// Sites of the best `D/2` chain, each tensored with `1_2`. The lifted chain
/// contracts to `S ⊗ 1_2`, so its gap on `U ⊗ 1_D` equals the `D/2` gap.
fn lifted_start(
    target: &ComplexMatrix,
    shape: &SystemShape,
    cfg: &OptimizerConfig,
) -> Result<Option<Vec<ComplexMatrix>>> {
    let d = shape.ancilla_dim();
    if !cfg.lift_half_ancilla || d < 4 || !d.is_multiple_of(2) {
        return Ok(None);
    }
    let Some(u) = strip_ancilla_identity(target, d) else {
        return Ok(None);
    };
    let half = SystemShape::unitary(shape.n_qubits(), d / 2)?;
    let inner = optimize_frobenius(&numerics::kron(&u, &numerics::identity(d / 2)), &half, cfg)?;
    let one = numerics::identity(2);
    Ok(Some(
        inner
            .mpo
            .site_matrices()
            .iter()
            .map(|s| numerics::kron(s, &one))
            .collect(),
    ))
}

/// Minimizes `‖V_target − V_seq‖²_F` for an `M → N` isometry whose fixed
/// inputs are set by `states`.
pub fn optimize_isometry(
    target_isometry: &ComplexMatrix,
    shape: &SystemShape,
    states: &InitialStates,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    if cfg.metric != Metric::Frobenius {
        return Err(Error::Config(
            "isometry mode supports the Frobenius metric only".into(),
        ));
    }
    let bt = BlockTarget::from_isometry(target_isometry, shape, states)?;
    let denom = bt.norm_sq() + bt.seq_norm_sq();
    best_of(shape, cfg, |seed| {
        let init = initial_sites(shape, cfg.init_mode, seed);
        let (sites, trace) = frobenius_sweeps(&bt, init, cfg)?;
        let gap = trace.final_cost() / denom;
        Ok(RestartResult { sites, trace, gap })
    })
}

/// Spectral cost `‖P − blockdiag(W, …, W)‖₂` at one site, with `P` the
/// frozen remainder of the network permuted so that (qubit k, ancilla) are
/// the trailing factors.
struct SiteProblem {
    frozen: ComplexMatrix,
    block: usize,
}

impl SiteProblem {
    fn new(
        target: &ComplexMatrix,
        embedded: &[ComplexMatrix],
        k: usize,
        n: usize,
        d: usize,
    ) -> Self {
        let dim = target.nrows();
        // U_seq = R E_k L with L = E_{k-1} ⋯ E_1, R = E_N ⋯ E_{k+1};
        // ‖T − R E_k L‖₂ = ‖R^H T L^H − E_k‖₂
        let mut left = numerics::identity(dim);
        for e in &embedded[..k - 1] {
            left = e * left;
        }
        let mut right = numerics::identity(dim);
        for e in &embedded[k..] {
            right = e * right;
        }
        let core = right.adjoint() * target * left.adjoint();

        let shift = n - k;
        let perm: Vec<usize> = (0..dim)
            .map(|idx| {
                let (reg, alpha) = (idx / d, idx % d);
                let bit = (reg >> shift) & 1;
                let high = reg >> (shift + 1);
                let low = reg & ((1 << shift) - 1);
                let rest = (high << shift) | low;
                ((rest << 1) | bit) * d + alpha
            })
            .collect();
        let mut frozen = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            for r in 0..dim {
                frozen[(perm[r], perm[c])] = core[(r, c)];
            }
        }
        SiteProblem {
            frozen,
            block: 2 * d,
        }
    }

    fn diff(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let mut diff = self.frozen.clone();
        let b = self.block;
        for blk in 0..diff.nrows() / b {
            let mut v = diff.view_mut((blk * b, blk * b), (b, b));
            v -= w;
        }
        diff
    }

    fn cost(&self, w: &ComplexMatrix) -> Result<f64> {
        let s = numerics::singular_values(&self.diff(w))?[0];
        Ok(s * s)
    }

    /// Smoothed cost `‖X‖_q²` (Schatten q) and its gradient with respect to
    /// the site, `Γ = Σ_b G_bb` with `df = −Re Tr[Γ† dW]`.
    fn smooth_cost_grad(&self, w: &ComplexMatrix, q: f64) -> Result<(f64, ComplexMatrix)> {
        let svd = numerics::svd(&self.diff(w))?;
        let s1 = svd.s[0];
        if s1 <= 0.0 {
            return Ok((0.0, ComplexMatrix::zeros(self.block, self.block)));
        }
        let sum: f64 = svd.s.iter().map(|s| (s / s1).powf(q)).sum();
        let f = s1 * s1 * sum.powf(2.0 / q);
        let scale = 2.0 * s1 * sum.powf(2.0 / q - 1.0);
        let mut u = svd.u.clone();
        for (j, s) in svd.s.iter().enumerate() {
            let c = scale * (s / s1).powf(q - 1.0);
            let mut col = u.column_mut(j);
            col *= num_complex::Complex64::new(c, 0.0);
        }
        let g = u * svd.v.adjoint();
        let b = self.block;
        let mut gamma = ComplexMatrix::zeros(b, b);
        for blk in 0..g.nrows() / b {
            gamma += g.view((blk * b, blk * b), (b, b));
        }
        Ok((f, gamma))
    }

    fn smooth_cost(&self, w: &ComplexMatrix, q: f64) -> Result<f64> {
        let s = numerics::singular_values(&self.diff(w))?;
        if s[0] <= 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = s.iter().map(|x| (x / s[0]).powf(q)).sum();
        Ok(s[0] * s[0] * sum.powf(2.0 / q))
    }
}

/// Riemannian gradient descent on the smoothed spectral cost, moving along
/// `W ← exp(iεK) W` with `K = i(A − A†)/2`, `A = W Γ†`, and Armijo
/// backtracking on ε.
fn pnorm_smooth_descent(
    problem: &SiteProblem,
    w0: &ComplexMatrix,
    q: f64,
    steps: usize,
) -> Result<ComplexMatrix> {
    let mut w = w0.clone();
    let mut eps = 0.5;
    for _ in 0..steps {
        let (f, gamma) = problem.smooth_cost_grad(&w, q)?;
        if !f.is_finite() {
            return Err(Error::NonFinite("smoothed spectral cost".into()));
        }
        let a = &w * gamma.adjoint();
        let k = (&a - a.adjoint()) * numerics::I * num_complex::Complex64::new(0.5, 0.0);
        let slope = numerics::frobenius_norm_sq(&k);
        if slope < 1e-24 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial =
                numerics::exp_minus_i_hermitian(&(&k * num_complex::Complex64::new(-eps, 0.0)))
                    * &w;
            if problem.smooth_cost(&trial, q)? <= f - 1e-4 * eps * slope {
                w = trial;
                accepted = true;
                eps *= 2.0;
                break;
            }
            eps *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(w)
}

/// Coordinate descent over the generator coordinates `δ` of the update
/// `W = exp(−i Σ δ_c G_c) · W_0`, halving the step whenever a full pass
/// yields no improvement.
fn pnorm_local_search(
    problem: &SiteProblem,
    w0: &ComplexMatrix,
    generators: &[ComplexMatrix],
    cfg: &OptimizerConfig,
) -> Result<(ComplexMatrix, f64)> {
    let mut best_w = w0.clone();
    let mut best = problem.cost(w0)?;
    let mut gen = ComplexMatrix::zeros(w0.nrows(), w0.ncols());
    let mut step = cfg.pnorm_step;
    let mut passes = 0;
    while step >= cfg.pnorm_min_step && passes < cfg.pnorm_max_iters_per_site {
        passes += 1;
        let mut improved = false;
        for g in generators {
            for sign in [1.0, -1.0] {
                let trial_gen = &gen + g * num_complex::Complex64::new(sign * step, 0.0);
                let w = numerics::exp_minus_i_hermitian(&trial_gen) * w0;
                let c = problem.cost(&w)?;
                if !c.is_finite() {
                    return Err(Error::NonFinite("spectral cost".into()));
                }
                if c < best {
                    best = c;
                    best_w = w;
                    gen = trial_gen;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best_w, best))
}

/// Product basis `σ_l ⊗ τ_l'` of the site generators.
pub fn site_generators(pauli: &GeneratorBasis, ancilla: &GeneratorBasis) -> Vec<ComplexMatrix> {
    pauli
        .elements()
        .iter()
        .flat_map(|s| ancilla.elements().iter().map(move |t| numerics::kron(s, t)))
        .collect()
}

struct PnormRun {
    sites: Vec<ComplexMatrix>,
    costs: Vec<f64>,
    update_costs: Vec<f64>,
    converged: bool,
}

/// Spectral sweeps from `sites`, with the smoothing exponent doubling from
/// `pnorm_q_start` each sweep. Site updates never increase the exact cost.
fn pnorm_sweeps(
    target: &ComplexMatrix,
    mut sites: Vec<ComplexMatrix>,
    generators: &[ComplexMatrix],
    cfg: &OptimizerConfig,
    denom: f64,
    d: usize,
) -> Result<PnormRun> {
    let n = sites.len();
    let mut embedded: Vec<ComplexMatrix> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| embedded_site(s, i + 1, n, d))
        .collect();
    let dense_cost = |sites: &[ComplexMatrix]| -> Result<f64> {
        let seq = crate::seqmpo::contract_sites(sites, d);
        metrics::pnorm_cost(target, &seq)
    };
    let mut costs = vec![dense_cost(&sites)?];
    let mut update_costs = Vec::new();
    let mut converged = false;
    let order = sweep_order(n);
    let mut q = cfg.pnorm_q_start;
    for _ in 0..cfg.max_sweeps {
        for &k in &order {
            let problem = SiteProblem::new(target, &embedded, k, n, d);
            let mut start = sites[k - 1].clone();
            if cfg.pnorm_descent_steps > 0 {
                let smoothed = pnorm_smooth_descent(&problem, &start, q, cfg.pnorm_descent_steps)?;
                if problem.cost(&smoothed)? <= problem.cost(&start)? {
                    start = smoothed;
                }
            }
            let (w, c) = pnorm_local_search(&problem, &start, generators, cfg)?;
            update_costs.push(c);
            embedded[k - 1] = embedded_site(&w, k, n, d);
            sites[k - 1] = w;
        }
        let cost = dense_cost(&sites)?;
        if !cost.is_finite() {
            return Err(Error::NonFinite("spectral cost".into()));
        }
        let prev = *costs.last().unwrap();
        costs.push(cost);
        let q_settled = q >= cfg.pnorm_q_max;
        q = (2.0 * q).min(cfg.pnorm_q_max);
        if q_settled && (prev - cost).abs() < cfg.rel_tol * denom {
            converged = true;
            break;
        }
    }
    Ok(PnormRun {
        sites,
        costs,
        update_costs,
        converged,
    })
}

/// Multiplies every site by `exp(−i s H)` with `H` a random Hermitian
/// matrix of unit Frobenius norm.
fn kick_sites(sites: &[ComplexMatrix], strength: f64, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    use rand_distr::{Distribution, StandardNormal};
    sites
        .iter()
        .map(|w| {
            let dim = w.nrows();
            let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
                num_complex::Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
            });
            let mut h = &g + g.adjoint();
            let norm = numerics::frobenius_norm_sq(&h).sqrt();
            h /= num_complex::Complex64::new(norm / strength, 0.0);
            numerics::exp_minus_i_hermitian(&h) * w
        })
        .collect()
}

/// Minimizes `‖target − U_seq‖²₂`. Each restart converges, then tries
/// `pnorm_kicks` perturbed copies of its best sites and keeps any that
/// improve. The returned MPO is the best restart; [`Optimized::stats`]
/// carries best and mean spectral gaps over restarts.
pub fn optimize_pnorm(
    target: &ComplexMatrix,
    shape: &SystemShape,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    check_square_target(target, shape)?;
    let shape = SystemShape::unitary(shape.n_qubits(), shape.ancilla_dim())?;
    let d = shape.ancilla_dim();
    let pauli = numerics::generalized_gell_mann(2)?;
    let anc = numerics::generalized_gell_mann(d)?;
    let generators = site_generators(&pauli, &anc);
    let target_norm = numerics::spectral_norm(target)?;
    let denom = (target_norm + 1.0).powi(2);

    let optimized = best_of(&shape, cfg, |seed| {
        let start = Instant::now();
        let init = initial_sites(&shape, cfg.init_mode, seed);
        let mut run = pnorm_sweeps(target, init, &generators, cfg, denom, d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b69_636b);
        for _ in 0..cfg.pnorm_kicks {
            let kicked = kick_sites(&run.sites, cfg.pnorm_kick_strength, &mut rng);
            let trial = pnorm_sweeps(target, kicked, &generators, cfg, denom, d)?;
            let best = *run.costs.last().unwrap();
            let trial_cost = *trial.costs.last().unwrap();
            run.update_costs.extend_from_slice(&trial.update_costs);
            if trial_cost < best - cfg.rel_tol * denom {
                run.sites = trial.sites;
                run.costs.extend_from_slice(&trial.costs[1..]);
                run.converged = trial.converged;
            }
        }
        let gap = run.costs.last().unwrap() / denom;
        let trace = ConvergenceTrace {
            sweeps_used: run.costs.len() - 1,
            costs: run.costs,
            update_costs: run.update_costs,
            converged: run.converged,
            wall_time: start.elapsed().as_secs_f64(),
        };
        Ok(RestartResult {
            sites: run.sites,
            trace,
            gap,
        })
    })?;

    // attach generator coordinates to the winning sites
    let sites = optimized
        .mpo
        .sites()
        .iter()
        .map(|s| s.clone().with_generator_coords(&pauli, &anc))
        .collect::<Result<Vec<_>>>()?;
    Ok(Optimized {
        mpo: SequentialMPO::new(shape, sites)?,
        ..optimized
    })
}

/// Dispatches on `cfg.metric` for unitary targets.
pub fn optimize(
    target: &ComplexMatrix,
    shape: &SystemShape,
    cfg: &OptimizerConfig,
) -> Result<Optimized> {
    match cfg.metric {
        Metric::Frobenius => optimize_frobenius(target, shape, cfg),
        Metric::Pnorm2 => optimize_pnorm(target, shape, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelib::{build_gate, build_isometry, embed_with_ancilla, GateKind, GateSpec};
    use crate::numerics::{haar_random_unitary, identity, trace_inner};

    fn gate_target(kind: GateKind, n: usize, d: usize) -> (ComplexMatrix, SystemShape) {
        let shape = SystemShape::unitary(n, d).unwrap();
        let g = build_gate(&GateSpec::new(kind, shape).unwrap()).unwrap();
        (embed_with_ancilla(&g, d), shape)
    }

    #[test]
    fn lifted_restart_never_loses_to_half_ancilla() {
        let u = haar_random_unitary(4, 5);
        let cfg = OptimizerConfig::default();
        let half = optimize_frobenius(
            &numerics::kron(&u, &identity(2)),
            &SystemShape::unitary(2, 2).unwrap(),
            &cfg,
        )
        .unwrap();
        let full = optimize_frobenius(
            &numerics::kron(&u, &identity(4)),
            &SystemShape::unitary(2, 4).unwrap(),
            &cfg,
        )
        .unwrap();
        assert_eq!(full.restarts.len(), cfg.restarts + 1);
        assert!(full.restarts.last().unwrap().lifted);
        assert!(full.best_gap() <= half.best_gap() + 1e-9);
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let u = haar_random_unitary(4, 1);
        let w = local_polar_update(&u).unwrap();
        assert!((w - u).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn polar_of_positive_diagonal_is_identity() {
        let env = ComplexMatrix::from_diagonal(&numerics::ComplexVector::from_column_slice(&[
            num_complex::Complex64::new(3.0, 0.0),
            num_complex::Complex64::new(0.5, 0.0),
        ]));
        let w = local_polar_update(&env).unwrap();
        assert!((w - identity(2)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn polar_of_rank_deficient_env_is_unitary() {
        let mut env = ComplexMatrix::zeros(4, 4);
        env[(0, 1)] = num_complex::Complex64::new(2.0, 1.0);
        let w = local_polar_update(&env).unwrap();
        assert!(numerics::is_unitary(&w, 1e-12));
        assert!((trace_inner(&env, &w).re - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identity_target_converges_in_one_sweep() {
        let shape = SystemShape::unitary(3, 2).unwrap();
        let cfg = OptimizerConfig {
            init_mode: InitMode::Identity,
            restarts: 1,
            ..Default::default()
        };
        let out = optimize_frobenius(&identity(16), &shape, &cfg).unwrap();
        assert_eq!(out.trace.sweeps_used, 1);
        assert!(out.trace.converged);
        assert!(out.trace.final_cost() < 1e-12);
        assert!(out.best_gap() < 1e-12);
    }

    #[test]
    fn cnot_frobenius_gap() {
        let (t, shape) = gate_target(GateKind::Cnot, 2, 4);
        let out = optimize_frobenius(&t, &shape, &OptimizerConfig::default()).unwrap();
        let expected = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            (out.best_gap() - expected).abs() < 1e-3,
            "{}",
            out.best_gap()
        );
    }

    #[test]
    fn planted_target_recovered() {
        let shape = SystemShape::unitary(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let planted = SequentialMPO::haar_random(shape, &mut rng).contract_to_dense();
        let out = optimize_frobenius(&planted, &shape, &OptimizerConfig::default()).unwrap();
        assert!(out.trace.final_cost() < 1e-10, "{}", out.trace.final_cost());
    }

    #[test]
    fn sweeps_are_monotone() {
        let (t, shape) = gate_target(GateKind::RandomUnitary { seed: 3 }, 3, 2);
        let cfg = OptimizerConfig {
            restarts: 1,
            max_sweeps: 30,
            ..Default::default()
        };
        let out = optimize_frobenius(&t, &shape, &cfg).unwrap();
        let all: Vec<f64> = std::iter::once(out.trace.costs[0])
            .chain(out.trace.update_costs.iter().copied())
            .collect();
        assert!(all.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(out.trace.costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn failed_restarts_are_reported() {
        let (mut t, shape) = gate_target(GateKind::Cnot, 2, 2);
        t[(0, 0)] = num_complex::Complex64::new(f64::NAN, 0.0);
        assert!(optimize_frobenius(&t, &shape, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn pnorm_identity_target() {
        let shape = SystemShape::unitary(2, 2).unwrap();
        let cfg = OptimizerConfig {
            metric: Metric::Pnorm2,
            init_mode: InitMode::Identity,
            restarts: 1,
            ..Default::default()
        };
        let out = optimize_pnorm(&identity(8), &shape, &cfg).unwrap();
        assert!(out.best_gap() < 1e-12);
        for s in out.mpo.sites() {
            assert!(s.h_coeffs().is_some());
        }
    }

    #[test]
    fn pnorm_search_improves_cnot() {
        let (t, shape) = gate_target(GateKind::Cnot, 2, 2);
        let cfg = OptimizerConfig {
            metric: Metric::Pnorm2,
            restarts: 2,
            max_sweeps: 20,
            ..Default::default()
        };
        let out = optimize_pnorm(&t, &shape, &cfg).unwrap();
        let costs = &out.trace.costs;
        assert!(costs.last().unwrap() <= &costs[0]);
        let seq = out.mpo.contract_to_dense();
        let gap = metrics::gap_pnorm(&t, &seq).unwrap();
        assert!((gap - out.best_gap()).abs() < 1e-10);
        assert!(gap < 0.5, "{gap}");
    }

    #[test]
    fn isometry_toffoli_one_to_three() {
        let shape = SystemShape::new(3, 2, 1).unwrap();
        let states = InitialStates::default_for(&shape);
        let v = build_isometry(&GateSpec::new(GateKind::Toffoli, shape).unwrap(), &states).unwrap();
        let out = optimize_isometry(&v, &shape, &states, &OptimizerConfig::default()).unwrap();
        assert!(out.best_gap() < 1e-6);
    }

    #[test]
    fn isometry_rejects_pnorm() {
        let shape = SystemShape::new(3, 2, 1).unwrap();
        let states = InitialStates::default_for(&shape);
        let v = build_isometry(&GateSpec::new(GateKind::Toffoli, shape).unwrap(), &states).unwrap();
        let cfg = OptimizerConfig {
            metric: Metric::Pnorm2,
            ..Default::default()
        };
        assert!(optimize_isometry(&v, &shape, &states, &cfg).is_err());
    }

    #[test]
    fn config_validation_and_digest() {
        let mut cfg = OptimizerConfig::default();
        assert!(cfg.validate().is_ok());
        let d = cfg.digest();
        assert_eq!(d, OptimizerConfig::default().digest());
        cfg.rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        assert_ne!(cfg.digest(), d);
    }

    #[test]
    fn trace_csv() {
        let t = ConvergenceTrace {
            costs: vec![2.0, 1.0],
            update_costs: vec![],
            converged: true,
            sweeps_used: 1,
            wall_time: 0.0,
        };
        assert_eq!(t.to_csv().lines().count(), 3);
    }
}
