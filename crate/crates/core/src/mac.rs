//! Deterministic equivalents for the double-scattering MIMO multiple-access
//! channel.
//!
//! Everything is driven by the 3K coupled fundamental equations in
//! `(gbar_k, g_k, delta_k)`. On top of their solution sit the
//! mutual-information approximation, the per-stream MMSE SINR and sum-rate,
//! the iterative water-filling precoder optimization, the Rayleigh-product
//! closed form, and the Kronecker-channel equivalent used as a conditional
//! cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, herm_sqrt, hermitian_inverse, logdet_hpd};
use crate::matrix::ComplexMatrix;
use crate::roots::solve_cubic_in_interval;
use crate::solver::SolverOptions;

/// Divisor floor for the `delta` denominators during iteration.
const DELTA_FLOOR: f64 = 1e-300;

/// Outer-loop cap of the iterative water-filling algorithm.
pub const WATERFILL_OUTER_CAP: u64 = 500;

/// Per-transmitter inputs of the double-scattering model. The scatterer
/// correlation is stored as its diagonal (eigenvalues); unitary invariance of
/// the inner Gaussian factors makes this lossless for the channel statistics.
#[derive(Debug, Clone)]
pub struct MacTransmitter {
    /// Scatterer count N_k.
    pub scatterers: usize,
    /// Transmit antenna count n_k.
    pub antennas: usize,
    /// Receive correlation, N x N Hermitian PSD.
    pub r: ComplexMatrix,
    /// Scatterer correlation diagonal, length N_k, nonnegative.
    pub s: Vec<f64>,
    /// Transmit correlation, n_k x n_k Hermitian PSD.
    pub t: ComplexMatrix,
    /// Precoder, n_k x n_k Hermitian PSD.
    pub q: ComplexMatrix,
}

impl MacTransmitter {
    /// Uncorrelated transmitter: identity correlations and precoder.
    pub fn uncorrelated(n_rx: usize, scatterers: usize, antennas: usize) -> Self {
        Self {
            scatterers,
            antennas,
            r: ComplexMatrix::identity(n_rx),
            s: vec![1.0; scatterers],
            t: ComplexMatrix::identity(antennas),
            q: ComplexMatrix::identity(antennas),
        }
    }
}

#[derive(Debug, Clone)]
struct TxData {
    spec: MacTransmitter,
    r_sqrt: ComplexMatrix,
    t_sqrt: ComplexMatrix,
    s_sqrt: Vec<f64>,
    /// Eigenvalues of `T^{1/2} Q T^{1/2}`, descending, clamped at zero.
    ttilde_eigs: Vec<f64>,
}

/// Validated double-scattering MAC configuration with cached square roots
/// and effective transmit eigenvalues.
#[derive(Debug, Clone)]
pub struct MacConfig {
    n_rx: usize,
    rho: f64,
    tx: Vec<TxData>,
}

fn check_psd_square(
    m: &ComplexMatrix,
    dim: usize,
    what: &str,
    k: usize,
) -> Result<ComplexMatrix> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::InvalidConfig(format!(
            "transmitter {k}: {what} must be {dim}x{dim}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect > 1e-8 * (1.0 + m.max_abs()) {
        return Err(Error::InvalidConfig(format!(
            "transmitter {k}: {what} is not Hermitian (defect {defect:e})"
        )));
    }
    herm_sqrt(m).map_err(|e| match e {
        Error::NotPsd { min_eigenvalue } => Error::InvalidConfig(format!(
            "transmitter {k}: {what} is not PSD (min eigenvalue {min_eigenvalue:e})"
        )),
        other => other,
    })
}

impl MacConfig {
    pub fn new(n_rx: usize, rho: f64, transmitters: Vec<MacTransmitter>) -> Result<Self> {
        if n_rx == 0 {
            return Err(Error::InvalidConfig("receive antennas must be >= 1".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
        }
        if transmitters.is_empty() {
            return Err(Error::InvalidConfig("at least one transmitter".into()));
        }
        let tx = transmitters
            .into_iter()
            .enumerate()
            .map(|(k, spec)| Self::build_tx(n_rx, k, spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_rx, rho, tx })
    }

    fn build_tx(n_rx: usize, k: usize, spec: MacTransmitter) -> Result<TxData> {
        if spec.scatterers == 0 || spec.antennas == 0 {
            return Err(Error::InvalidConfig(format!(
                "transmitter {k}: scatterer and antenna counts must be >= 1"
            )));
        }
        if spec.s.len() != spec.scatterers {
            return Err(Error::InvalidConfig(format!(
                "transmitter {k}: S diagonal has {} entries, expected {}",
                spec.s.len(),
                spec.scatterers
            )));
        }
        if spec.s.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "transmitter {k}: S diagonal must be finite and >= 0"
            )));
        }
        let r_sqrt = check_psd_square(&spec.r, n_rx, "R", k)?;
        let t_sqrt = check_psd_square(&spec.t, spec.antennas, "T", k)?;
        check_psd_square(&spec.q, spec.antennas, "Q", k)?;
        let s_sqrt = spec.s.iter().map(|v| v.sqrt()).collect();
        let ttilde_eigs = effective_transmit_eigenvalues(&t_sqrt, &spec.q)?;
        Ok(TxData {
            spec,
            r_sqrt,
            t_sqrt,
            s_sqrt,
            ttilde_eigs,
        })
    }

    /// Number of transmitters K.
    pub fn transmitters(&self) -> usize {
        self.tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn scatterers(&self, k: usize) -> usize {
        self.tx[k].spec.scatterers
    }

    pub fn antennas(&self, k: usize) -> usize {
        self.tx[k].spec.antennas
    }

    pub fn r(&self, k: usize) -> &ComplexMatrix {
        &self.tx[k].spec.r
    }

    pub fn s(&self, k: usize) -> &[f64] {
        &self.tx[k].spec.s
    }

    pub fn t(&self, k: usize) -> &ComplexMatrix {
        &self.tx[k].spec.t
    }

    pub fn q(&self, k: usize) -> &ComplexMatrix {
        &self.tx[k].spec.q
    }

    pub(crate) fn r_sqrt(&self, k: usize) -> &ComplexMatrix {
        &self.tx[k].r_sqrt
    }

    pub(crate) fn t_sqrt(&self, k: usize) -> &ComplexMatrix {
        &self.tx[k].t_sqrt
    }

    pub(crate) fn s_sqrt(&self, k: usize) -> &[f64] {
        &self.tx[k].s_sqrt
    }

    /// Eigenvalues of the effective transmit matrix `T^{1/2} Q T^{1/2}`.
    pub fn effective_transmit_eigs(&self, k: usize) -> &[f64] {
        &self.tx[k].ttilde_eigs
    }

    /// Same configuration at a different SNR.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
        }
        let mut out = self.clone();
        out.rho = rho;
        Ok(out)
    }

    /// Same configuration with replaced precoders.
    pub fn with_precoders(&self, precoders: Vec<ComplexMatrix>) -> Result<Self> {
        if precoders.len() != self.tx.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} precoders, got {}",
                self.tx.len(),
                precoders.len()
            )));
        }
        let mut out = self.clone();
        for (k, q) in precoders.into_iter().enumerate() {
            check_psd_square(&q, out.tx[k].spec.antennas, "Q", k)?;
            out.tx[k].ttilde_eigs = effective_transmit_eigenvalues(&out.tx[k].t_sqrt, &q)?;
            out.tx[k].spec.q = q;
        }
        Ok(out)
    }
}

fn effective_transmit_eigenvalues(t_sqrt: &ComplexMatrix, q: &ComplexMatrix) -> Result<Vec<f64>> {
    let ttilde = t_sqrt.mul(q).mul(t_sqrt).hermitized();
    let (vals, _) = herm_eigen(&ttilde)?;
    // product of PSD factors; tiny negative rounding is clamped
    Ok(vals.into_iter().map(|v| v.max(0.0)).collect())
}

/// Converged solution of the 3K fundamental equations.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub gbar: Vec<f64>,
    pub g: Vec<f64>,
    pub delta: Vec<f64>,
    pub iterations: u64,
    /// Largest defining-equation residual at the converged point.
    pub residual: f64,
}

struct FundamentalState<'a> {
    cfg: &'a MacConfig,
    taus: &'a [Vec<f64>],
}

impl<'a> FundamentalState<'a> {
    fn gbar_rhs(&self, k: usize, g_k: f64) -> f64 {
        let n_k = self.cfg.antennas(k) as f64;
        self.taus[k].iter().map(|&t| t / (1.0 + g_k * t)).sum::<f64>() / n_k
    }

    fn g_rhs(&self, k: usize, gbar_k: f64, delta_k: f64) -> f64 {
        let n_k = self.cfg.antennas(k) as f64;
        self.cfg
            .s(k)
            .iter()
            .map(|&s| s * delta_k / (1.0 + gbar_k * s * delta_k))
            .sum::<f64>()
            / n_k
    }

    /// Resolvent matrix `sum_i w_i R_i + I/rho` with
    /// `w_i = (n_i/N_i) gbar_i g_i / delta_i`.
    fn resolvent(&self, gbar: &[f64], g: &[f64], delta: &[f64]) -> ComplexMatrix {
        let cfg = self.cfg;
        let mut m = ComplexMatrix::zeros(cfg.n_rx(), cfg.n_rx());
        m.add_scaled_identity(1.0 / cfg.rho());
        for i in 0..cfg.transmitters() {
            let w = cfg.antennas(i) as f64 / cfg.scatterers(i) as f64 * gbar[i] * g[i]
                / delta[i].max(DELTA_FLOOR);
            m.add_scaled_assign(w, cfg.r(i));
        }
        m
    }

    fn delta_rhs_all(&self, gbar: &[f64], g: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
        let minv = hermitian_inverse(&self.resolvent(gbar, g, delta))?;
        Ok((0..self.cfg.transmitters())
            .map(|k| self.cfg.r(k).trace_of_product(&minv).re / self.cfg.scatterers(k) as f64)
            .collect())
    }
}

/// Solves the fundamental equations by Gauss-Seidel sweeps from the all-ones
/// initialization.
pub fn solve_fundamental(cfg: &MacConfig, opts: &SolverOptions) -> Result<FundamentalSolution> {
    let kk = cfg.transmitters();
    solve_fundamental_with_init(cfg, opts, &vec![1.0; kk], &vec![1.0; kk], &vec![1.0; kk])
}

/// Multistart entry point: Theorem-level uniqueness makes the limit
/// independent of the (positive) initialization.
pub fn solve_fundamental_with_init(
    cfg: &MacConfig,
    opts: &SolverOptions,
    gbar0: &[f64],
    g0: &[f64],
    delta0: &[f64],
) -> Result<FundamentalSolution> {
    let taus: Vec<Vec<f64>> = (0..cfg.transmitters())
        .map(|k| cfg.effective_transmit_eigs(k).to_vec())
        .collect();
    solve_fundamental_with_tau(cfg, &taus, opts, gbar0, g0, delta0)
}

pub(crate) fn solve_fundamental_with_tau(
    cfg: &MacConfig,
    taus: &[Vec<f64>],
    opts: &SolverOptions,
    gbar0: &[f64],
    g0: &[f64],
    delta0: &[f64],
) -> Result<FundamentalSolution> {
    let kk = cfg.transmitters();
    assert_eq!(gbar0.len(), kk);
    assert_eq!(g0.len(), kk);
    assert_eq!(delta0.len(), kk);
    let state = FundamentalState { cfg, taus };

    let mut gbar = gbar0.to_vec();
    let mut g = g0.to_vec();
    let mut delta = delta0.to_vec();
    let mut last_update = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let mut max_update = 0.0f64;
        // gbar from the current g
        for k in 0..kk {
            let next = state.gbar_rhs(k, g[k]);
            max_update = max_update.max((next - gbar[k]).abs());
            gbar[k] = next;
        }
        // g from the current (gbar, delta)
        for k in 0..kk {
            let next = state.g_rhs(k, gbar[k], delta[k]);
            max_update = max_update.max((next - g[k]).abs());
            g[k] = next;
        }
        // delta from the current (gbar, g, delta)
        let next_delta = state.delta_rhs_all(&gbar, &g, &delta)?;
        for k in 0..kk {
            max_update = max_update.max((next_delta[k] - delta[k]).abs());
            delta[k] = next_delta[k];
        }

        last_update = max_update;
        if max_update <= opts.tol {
            if delta.iter().any(|&d| d <= 2.0 * DELTA_FLOOR) {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    last_update: max_update,
                });
            }
            let residual = fundamental_residual(&state, &gbar, &g, &delta)?;
            return Ok(FundamentalSolution {
                gbar,
                g,
                delta,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_update,
    })
}

fn fundamental_residual(
    state: &FundamentalState,
    gbar: &[f64],
    g: &[f64],
    delta: &[f64],
) -> Result<f64> {
    let kk = state.cfg.transmitters();
    let mut worst = 0.0f64;
    let delta_rhs = state.delta_rhs_all(gbar, g, delta)?;
    for k in 0..kk {
        worst = worst.max((state.gbar_rhs(k, g[k]) - gbar[k]).abs());
        worst = worst.max((state.g_rhs(k, gbar[k], delta[k]) - g[k]).abs());
        worst = worst.max((delta_rhs[k] - delta[k]).abs());
    }
    Ok(worst)
}

/// Defining-equation residuals of a candidate solution; used by the
/// acceptance checks.
pub fn fundamental_residuals(
    cfg: &MacConfig,
    gbar: &[f64],
    g: &[f64],
    delta: &[f64],
) -> Result<Vec<f64>> {
    let taus: Vec<Vec<f64>> = (0..cfg.transmitters())
        .map(|k| cfg.effective_transmit_eigs(k).to_vec())
        .collect();
    let state = FundamentalState { cfg, taus: &taus };
    let delta_rhs = state.delta_rhs_all(gbar, g, delta)?;
    let mut out = Vec::with_capacity(3 * cfg.transmitters());
    for k in 0..cfg.transmitters() {
        out.push((state.gbar_rhs(k, g[k]) - gbar[k]).abs());
        out.push((state.g_rhs(k, gbar[k], delta[k]) - g[k]).abs());
        out.push((delta_rhs[k] - delta[k]).abs());
    }
    Ok(out)
}

fn mutual_info_from_solution(
    cfg: &MacConfig,
    taus: &[Vec<f64>],
    sol: &FundamentalSolution,
) -> Result<f64> {
    let n = cfg.n_rx() as f64;
    let mut b = ComplexMatrix::identity(cfg.n_rx());
    for k in 0..cfg.transmitters() {
        let w = cfg.antennas(k) as f64 / cfg.scatterers(k) as f64 * sol.gbar[k] * sol.g[k]
            / sol.delta[k].max(DELTA_FLOOR);
        b.add_scaled_assign(cfg.rho() * w, cfg.r(k));
    }
    let mut total = logdet_hpd(&b.hermitized())? / n;
    for k in 0..cfg.transmitters() {
        let scatter: f64 = cfg
            .s(k)
            .iter()
            .map(|&s| (1.0 + sol.gbar[k] * sol.delta[k] * s).ln())
            .sum();
        let transmit: f64 = taus[k].iter().map(|&t| (1.0 + sol.g[k] * t).ln()).sum();
        total += (scatter + transmit - 2.0 * cfg.antennas(k) as f64 * sol.g[k] * sol.gbar[k]) / n;
    }
    Ok(total)
}

/// Mutual-information deterministic equivalent `Ibar_N(rho)`.
pub fn mutual_info_deteq(cfg: &MacConfig, opts: &SolverOptions) -> Result<f64> {
    let sol = solve_fundamental(cfg, opts)?;
    let taus: Vec<Vec<f64>> = (0..cfg.transmitters())
        .map(|k| cfg.effective_transmit_eigs(k).to_vec())
        .collect();
    mutual_info_from_solution(cfg, &taus, &sol)
}

/// Simultaneous eigenbasis of a commuting Hermitian pair `(T, Q)`. Returns
/// `(t, p, U)` with `T = U diag(t) U^H`, `Q = U diag(p) U^H`, `t` descending.
pub fn codiagonalize(
    t: &ComplexMatrix,
    q: &ComplexMatrix,
    transmitter: usize,
) -> Result<(Vec<f64>, Vec<f64>, ComplexMatrix)> {
    let commutator = t.mul(q).add(&q.mul(t).scaled(-1.0));
    let scale = (1.0 + t.frobenius_norm()) * (1.0 + q.frobenius_norm());
    let commutator_norm = commutator.frobenius_norm();
    if commutator_norm > 1e-10 * scale {
        return Err(Error::NotCodiagonalizable {
            transmitter,
            commutator_norm,
        });
    }

    let (t_vals, mut u) = herm_eigen(t)?;
    let n = t_vals.len();
    let b = u.conj_transpose().mul(q).mul(&u);
    let mut p_vals = vec![0.0f64; n];
    let group_tol = 1e-8 * (1.0 + t_vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    // Within each T-eigenvalue multiplicity group, rotate to diagonalize Q's
    // block; commutation kills the cross-group blocks.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (t_vals[end] - t_vals[start]).abs() <= group_tol {
            end += 1;
        }
        let size = end - start;
        if size == 1 {
            p_vals[start] = b[(start, start)].re;
        } else {
            let block = ComplexMatrix::from_fn(size, size, |i, j| b[(start + i, start + j)]);
            let (block_vals, block_vecs) = herm_eigen(&block)?;
            // rotate the U columns of this group
            let cols: Vec<Vec<Complex64>> = (0..size)
                .map(|j| {
                    (0..n)
                        .map(|row| {
                            (0..size)
                                .map(|m| u[(row, start + m)] * block_vecs[(m, j)])
                                .sum()
                        })
                        .collect()
                })
                .collect();
            for (j, col) in cols.iter().enumerate() {
                for row in 0..n {
                    u[(row, start + j)] = col[row];
                }
            }
            p_vals[start..end].copy_from_slice(&block_vals);
        }
        start = end;
    }
    Ok((t_vals, p_vals, u))
}

/// Per-stream MMSE SINR deterministic equivalents `gamma_{k,j} = p t g_k`,
/// for transmitters whose `T` and `Q` share an eigenbasis.
pub fn mmse_sinr_deteq(cfg: &MacConfig, opts: &SolverOptions) -> Result<Vec<Vec<f64>>> {
    let sol = solve_fundamental(cfg, opts)?;
    (0..cfg.transmitters())
        .map(|k| {
            let (t, p, _) = codiagonalize(cfg.t(k), cfg.q(k), k)?;
            Ok(t.iter()
                .zip(p.iter())
                .map(|(&tv, &pv)| pv * tv * sol.g[k])
                .collect())
        })
        .collect()
}

/// Sum-rate with MMSE detection, `(1/N) sum log(1 + gamma)`.
pub fn sum_rate_deteq(cfg: &MacConfig, opts: &SolverOptions) -> Result<f64> {
    let sinr = mmse_sinr_deteq(cfg, opts)?;
    let n = cfg.n_rx() as f64;
    Ok(sinr
        .iter()
        .flat_map(|row| row.iter())
        .map(|&gamma| (1.0 + gamma).ln())
        .sum::<f64>()
        / n)
}

/// Iterative water-filling result: per-transmitter eigenbasis, loadings,
/// water levels, and the fundamental solution at the optimum.
#[derive(Debug, Clone)]
pub struct WaterfillResult {
    pub eigenbases: Vec<ComplexMatrix>,
    pub t_eigenvalues: Vec<Vec<f64>>,
    pub loadings: Vec<Vec<f64>>,
    pub water_levels: Vec<f64>,
    pub gstar: Vec<f64>,
    pub outer_iterations: u64,
    pub precoders: Vec<ComplexMatrix>,
}

fn waterfill_level(g: f64, t_vals: &[f64], n_k: usize, budget: f64) -> (Vec<f64>, f64) {
    let active: Vec<usize> = (0..t_vals.len()).filter(|&j| t_vals[j] > 0.0).collect();
    if active.is_empty() || budget <= 0.0 || g <= 0.0 {
        return (vec![0.0; t_vals.len()], 0.0);
    }
    let n = n_k as f64;
    let fill = |mu: f64| -> f64 {
        active
            .iter()
            .map(|&j| (mu - 1.0 / (g * t_vals[j])).max(0.0))
            .sum::<f64>()
            / n
    };
    let mut lo = 0.0f64;
    // enough head room even when inactive modes carry none of the budget
    let mut hi = n / active.len() as f64 * budget
        + active
            .iter()
            .map(|&j| 1.0 / (g * t_vals[j]))
            .fold(0.0f64, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fill(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let p = (0..t_vals.len())
        .map(|j| {
            if t_vals[j] > 0.0 {
                (mu - 1.0 / (g * t_vals[j])).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    (p, mu)
}

/// Iterative water-filling over the transmit eigenmodes: alternates the
/// fundamental-equation solve with the KKT power update until the loadings
/// settle.
pub fn waterfill_optimal_q(
    cfg: &MacConfig,
    budgets: &[f64],
    eps: f64,
    opts: &SolverOptions,
) -> Result<WaterfillResult> {
    let kk = cfg.transmitters();
    if budgets.len() != kk {
        return Err(Error::InvalidConfig(format!(
            "expected {kk} power budgets, got {}",
            budgets.len()
        )));
    }
    if budgets.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidConfig("power budgets must be > 0".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig("eps must be > 0".into()));
    }

    let mut bases = Vec::with_capacity(kk);
    let mut t_vals = Vec::with_capacity(kk);
    for k in 0..kk {
        let (vals, vecs) = herm_eigen(cfg.t(k))?;
        t_vals.push(vals.into_iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
        bases.push(vecs);
    }

    let mut loadings: Vec<Vec<f64>> = (0..kk)
        .map(|k| vec![budgets[k]; cfg.antennas(k)])
        .collect();
    let mut water_levels = vec![0.0; kk];
    let mut gstar = vec![0.0; kk];
    let ones = vec![1.0; kk];

    let mut outer = 0u64;
    loop {
        outer += 1;
        let taus: Vec<Vec<f64>> = (0..kk)
            .map(|k| {
                t_vals[k]
                    .iter()
                    .zip(loadings[k].iter())
                    .map(|(&t, &p)| t * p)
                    .collect()
            })
            .collect();
        let sol = solve_fundamental_with_tau(cfg, &taus, opts, &ones, &ones, &ones)?;
        // the reported g* is the one that generates the final loadings, so
        // the KKT form p = max(0, mu - 1/(g* t)) holds exactly on return
        gstar = sol.g;

        let mut max_step = 0.0f64;
        for k in 0..kk {
            let (p_new, mu) = waterfill_level(gstar[k], &t_vals[k], cfg.antennas(k), budgets[k]);
            for (old, new) in loadings[k].iter().zip(p_new.iter()) {
                max_step = max_step.max((old - new).abs());
            }
            loadings[k] = p_new;
            water_levels[k] = mu;
        }

        if max_step <= eps {
            break;
        }
        if outer >= WATERFILL_OUTER_CAP {
            return Err(Error::NonConvergence {
                iterations: outer,
                last_update: max_step,
            });
        }
    }

    let precoders: Vec<ComplexMatrix> = (0..kk)
        .map(|k| {
            bases[k]
                .scale_cols(&loadings[k])
                .mul_conj_transpose(&bases[k])
                .hermitized()
        })
        .collect();

    Ok(WaterfillResult {
        eigenbases: bases,
        t_eigenvalues: t_vals,
        loadings,
        water_levels,
        gstar,
        outer_iterations: outer,
        precoders,
    })
}

/// Closed forms for the Rayleigh-product channel (`N_k = S`, `n_k = N`, all
/// correlations and precoders identity).
#[derive(Debug, Clone, Copy)]
pub struct RayleighProductDeteq {
    pub gbar: f64,
    pub mutual_info: f64,
    pub sinr: f64,
}

/// Solves the Rayleigh-product cubic on its bracketing interval and
/// evaluates the closed-form mutual information and MMSE SINR.
pub fn rayleigh_product_closed_form(
    n_antennas: usize,
    scatterers: usize,
    users: usize,
    rho: f64,
) -> Result<RayleighProductDeteq> {
    if n_antennas == 0 || scatterers == 0 || users == 0 {
        return Err(Error::InvalidConfig(
            "N, S, K must all be >= 1 for the Rayleigh-product form".into(),
        ));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
    }
    let s_over_n = scatterers as f64 / n_antennas as f64;
    let k = users as f64;
    let c3 = 1.0;
    let c2 = -(2.0 - s_over_n - 1.0 / k);
    let c1 = 1.0 - s_over_n - 1.0 / k + s_over_n / k * (1.0 + 1.0 / rho);
    let c0 = -s_over_n / (k * rho);
    let lo = 1.0 - (1.0 / k).min(s_over_n);
    let gbar = solve_cubic_in_interval(c3, c2, c1, c0, lo, 1.0)?;

    let n = n_antennas as f64;
    let s = scatterers as f64;
    let mutual_info = (1.0 + rho * n * k / s * gbar * (gbar + s / n - 1.0)).ln()
        - k * s / n * (1.0 + n / s * (gbar - 1.0)).ln()
        - k * gbar.ln()
        - 2.0 * k * (1.0 - gbar);
    let sinr = (1.0 - gbar) / gbar;
    Ok(RayleighProductDeteq {
        gbar,
        mutual_info,
        sinr,
    })
}

/// Deterministic equivalent of a Kronecker channel
/// `H_k = Z_k W_k Ttilde_k^{1/2} / sqrt(n_k)` with deterministic factors
/// `Z_k`; used as the conditional cross-check of the double-scattering
/// analysis.
pub fn kronecker_deteq(
    z: &[ComplexMatrix],
    t_tilde: &[ComplexMatrix],
    rho: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    if z.is_empty() || z.len() != t_tilde.len() {
        return Err(Error::InvalidConfig(
            "need one Z and one effective transmit matrix per transmitter".into(),
        ));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
    }
    let n_rx = z[0].rows();
    if z.iter().any(|m| m.rows() != n_rx) {
        return Err(Error::InvalidConfig(
            "all Z factors must share the receive dimension".into(),
        ));
    }
    let kk = z.len();
    let grams: Vec<ComplexMatrix> = z.iter().map(|m| m.mul_conj_transpose(m).hermitized()).collect();
    let mut taus = Vec::with_capacity(kk);
    let mut dims = Vec::with_capacity(kk);
    for tt in t_tilde {
        if !tt.is_square() {
            return Err(Error::InvalidConfig(
                "effective transmit matrices must be square".into(),
            ));
        }
        let (vals, _) = herm_eigen(tt)?;
        taus.push(vals.into_iter().map(|v| v.max(0.0)).collect::<Vec<f64>>());
        dims.push(tt.rows());
    }

    let mut ebar = vec![1.0f64; kk];
    let mut e = vec![1.0f64; kk];
    let mut converged = false;
    let mut last_update = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut max_update = 0.0f64;
        for k in 0..kk {
            let next = taus[k]
                .iter()
                .map(|&t| t / (1.0 + e[k] * t))
                .sum::<f64>()
                / dims[k] as f64;
            max_update = max_update.max((next - ebar[k]).abs());
            ebar[k] = next;
        }
        let mut m = ComplexMatrix::zeros(n_rx, n_rx);
        m.add_scaled_identity(1.0 / rho);
        for k in 0..kk {
            m.add_scaled_assign(ebar[k], &grams[k]);
        }
        let minv = hermitian_inverse(&m)?;
        for k in 0..kk {
            let next = grams[k].trace_of_product(&minv).re / dims[k] as f64;
            max_update = max_update.max((next - e[k]).abs());
            e[k] = next;
        }
        last_update = max_update;
        if max_update <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: opts.max_iter,
            last_update,
        });
    }

    let mut b = ComplexMatrix::identity(n_rx);
    for k in 0..kk {
        b.add_scaled_assign(rho * ebar[k], &grams[k]);
    }
    let n = n_rx as f64;
    let mut total = logdet_hpd(&b.hermitized())? / n;
    for k in 0..kk {
        let transmit: f64 = taus[k].iter().map(|&t| (1.0 + e[k] * t).ln()).sum();
        total += (transmit - dims[k] as f64 * e[k] * ebar[k]) / n;
    }
    Ok(total)
}

/// The standard interference map underlying the fundamental equations,
/// hosted on the receive-resolvent coordinates: for a candidate positive
/// vector `delta`, each transmitter's `(gbar_k, g_k)` pair is solved exactly
/// from the first two equations, and the right-hand side of the third
/// equation is returned. The unique fixed point of this map is the `delta`
/// component of [`solve_fundamental`]; positivity, componentwise
/// monotonicity, and scalability hold on the whole nonnegative orthant.
pub fn interference_map(cfg: &MacConfig, delta: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    let kk = cfg.transmitters();
    assert_eq!(delta.len(), kk);
    assert!(delta.iter().all(|v| *v >= 0.0 && v.is_finite()));

    // effective loadings w_k = gbar_k g_k / delta_k from the inner
    // per-transmitter solves
    let mut loadings = vec![0.0f64; kk];
    for k in 0..kk {
        let n_k = cfg.antennas(k) as f64;
        let taus = cfg.effective_transmit_eigs(k);
        let gbar_at = |g: f64| taus.iter().map(|&t| t / (1.0 + g * t)).sum::<f64>() / n_k;
        let d = delta[k];
        if d == 0.0 {
            // g and delta vanish together; their ratio tends to the mean
            // scatterer gain
            loadings[k] = gbar_at(0.0) * cfg.s(k).iter().sum::<f64>() / n_k;
            continue;
        }
        let mut g = 0.0f64;
        let mut gbar = gbar_at(0.0);
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..opts.max_iter {
            gbar = gbar_at(g);
            let next = cfg
                .s(k)
                .iter()
                .map(|&s| s * d / (1.0 + gbar * s * d))
                .sum::<f64>()
                / n_k;
            last_step = (next - g).abs();
            g = next;
            if last_step <= opts.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations: opts.max_iter,
                last_update: last_step,
            });
        }
        loadings[k] = gbar * g / d;
    }

    let mut m = ComplexMatrix::zeros(cfg.n_rx(), cfg.n_rx());
    m.add_scaled_identity(1.0 / cfg.rho());
    for i in 0..kk {
        let w = cfg.antennas(i) as f64 / cfg.scatterers(i) as f64 * loadings[i];
        m.add_scaled_assign(w, cfg.r(i));
    }
    let minv = hermitian_inverse(&m)?;
    Ok((0..kk)
        .map(|k| cfg.r(k).trace_of_product(&minv).re / cfg.scatterers(k) as f64)
        .collect())
}
