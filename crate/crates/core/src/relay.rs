//! Deterministic equivalents for the K-hop amplify-and-forward MIMO relay
//! chain.
//!
//! The mutual information after hop `k` is approximated by a difference of
//! log-det functionals `Jbar_k`, each of which is evaluated by a recursion
//! that peels off one random hop matrix at a time. Every level `k >= 1`
//! requires the solution `ebar_k` of a scalar fixed-point equation whose
//! right-hand side re-evaluates all lower levels at a shifted argument, so
//! the cost grows quickly with `k`; depth is capped by the config (default
//! 8 hops).

use crate::error::{Error, Result};
use crate::solver::SolverOptions;

pub const DEFAULT_RECURSION_CAP: usize = 8;

/// K-hop relay chain parameters. `dims` holds the antenna counts
/// `n_0..n_K` (source first), `alphas` the per-hop path losses
/// `alpha_1..alpha_K`, and `rhos` the power budgets `rho_0..rho_{K-1}`.
#[derive(Debug, Clone)]
pub struct RelayConfig {
    dims: Vec<usize>,
    alphas: Vec<f64>,
    rhos: Vec<f64>,
    recursion_cap: usize,
}

impl RelayConfig {
    pub fn new(dims: Vec<usize>, alphas: Vec<f64>, rhos: Vec<f64>) -> Result<Self> {
        Self::with_recursion_cap(dims, alphas, rhos, DEFAULT_RECURSION_CAP)
    }

    pub fn with_recursion_cap(
        dims: Vec<usize>,
        alphas: Vec<f64>,
        rhos: Vec<f64>,
        recursion_cap: usize,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidConfig(
                "dims must list the source and at least one hop (n_0..n_K)".into(),
            ));
        }
        let hops = dims.len() - 1;
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig("antenna counts must be >= 1".into()));
        }
        if alphas.len() != hops {
            return Err(Error::InvalidConfig(format!(
                "alphas: expected {hops} path-loss factors, got {}",
                alphas.len()
            )));
        }
        if rhos.len() != hops {
            return Err(Error::InvalidConfig(format!(
                "rhos: expected {hops} power budgets (rho_0..rho_{}), got {}",
                hops - 1,
                rhos.len()
            )));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidConfig(
                "path-loss factors must be finite and >= 0".into(),
            ));
        }
        if rhos.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidConfig(
                "power budgets must be finite and >= 0".into(),
            ));
        }
        if hops > recursion_cap {
            return Err(Error::InvalidConfig(format!(
                "hop count {hops} exceeds the recursion cap {recursion_cap}; \
                 raise recursion_cap to override"
            )));
        }
        Ok(Self {
            dims,
            alphas,
            rhos,
            recursion_cap,
        })
    }

    /// Number of hops K.
    pub fn hops(&self) -> usize {
        self.alphas.len()
    }

    /// Antenna count `n_k`, `k = 0..=K` (`n_0` is the source).
    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Path loss `alpha_k`, `k = 1..=K`.
    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas[k - 1]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Power budget `rho_k`, `k = 0..K`.
    pub fn rho(&self, k: usize) -> f64 {
        self.rhos[k]
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    /// Dimension ratio `c_k = n_{k-1} / n_k`, `k = 1..=K`.
    pub fn c(&self, k: usize) -> f64 {
        self.dims[k - 1] as f64 / self.dims[k] as f64
    }

    pub fn recursion_cap(&self) -> usize {
        self.recursion_cap
    }
}

/// Asymptotic power-normalization limits `betabar_0..betabar_{K-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaBar {
    values: Vec<f64>,
}

impl BetaBar {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Copy with the source entry zeroed; this is the `betabar'` vector of
    /// the mutual-information difference.
    pub fn with_zero_source(&self) -> BetaBar {
        let mut values = self.values.clone();
        values[0] = 0.0;
        BetaBar { values }
    }
}

/// `betabar_0 = rho_0`, `betabar_k = rho_k / (1 + alpha_k rho_{k-1})`.
pub fn asymptotic_betas(cfg: &RelayConfig) -> BetaBar {
    let hops = cfg.hops();
    let mut values = Vec::with_capacity(hops);
    values.push(cfg.rho(0));
    for k in 1..hops {
        values.push(cfg.rho(k) / (1.0 + cfg.alpha(k) * cfg.rho(k - 1)));
    }
    BetaBar { values }
}

/// Converged deterministic equivalents for hop `k` at `x = 1`.
#[derive(Debug, Clone)]
pub struct RelayDeteqResult {
    pub hop: usize,
    /// `ebar_{k-1}(1, betabar)`.
    pub ebar: f64,
    /// `Jbar_k(1, betabar)`.
    pub jbar: f64,
    /// Mutual-information approximation `Ibar_k(betabar)`.
    pub ibar: f64,
    /// Total fixed-point iterations spent across all nested solves.
    pub iterations: u64,
    /// Defining-equation residual of the top-level `ebar` solve.
    pub max_residual: f64,
}

/// Closed-form `ebar_0(x, betabar_0)`.
pub fn e0_closed_form(x: f64, beta0: f64, alpha1: f64, c1: f64) -> f64 {
    let a = x * alpha1 * beta0;
    let half = a * (1.0 - c1) + c1;
    -0.5 * half + 0.5 * (half * half + 4.0 * a * c1 * c1).sqrt()
}

/// Closed-form `mbar_0(x, betabar_0)`.
pub fn m0_closed_form(x: f64, beta0: f64, alpha1: f64, c1: f64) -> f64 {
    let e0 = e0_closed_form(x, beta0, alpha1, c1);
    c1 / (alpha1 * beta0 / (c1 + e0) + 1.0 / x) + (1.0 - c1) * x
}

/// Right-hand side of the `ebar_k` fixed point evaluated at `e`; exposed so
/// residuals of converged solutions can be checked directly.
pub fn ebar_fixed_point_rhs(
    k: usize,
    x: f64,
    e: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
) -> Result<f64> {
    assert!(k >= 1, "level 0 is closed form");
    let mut iterations = 0u64;
    ebar_rhs(k, x, e, betabar, cfg, opts, &mut iterations)
}

fn ebar_rhs(
    k: usize,
    x: f64,
    e: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
    iterations: &mut u64,
) -> Result<f64> {
    let c = cfg.c(k + 1);
    let a = x * cfg.alpha(k + 1) * betabar.get(k);
    let shifted = a / (c + a + e);
    let m_lower = mbar_rec(k - 1, shifted, betabar, cfg, opts, iterations)?;
    Ok(c * (c + e) - c * (c + e) * (c + e) / a * m_lower)
}

fn ebar_rec(
    k: usize,
    x: f64,
    init: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
    iterations: &mut u64,
) -> Result<f64> {
    if k == 0 {
        return Ok(e0_closed_form(x, betabar.get(0), cfg.alpha(1), cfg.c(1)));
    }
    // No signal power at this stage: the resolvent is the identity and the
    // fixed point is exactly zero.
    if x == 0.0 || cfg.alpha(k + 1) * betabar.get(k) == 0.0 {
        return Ok(0.0);
    }

    let mut e = init;
    let mut last_step = f64::INFINITY;
    for iter in 0..opts.max_iter {
        *iterations += 1;
        let f = ebar_rhs(k, x, e, betabar, cfg, opts, iterations)?;
        // Picard step; damping engages only as a safety net once the plain
        // iteration has failed to settle.
        let next = if iter < 100 { f } else { 0.5 * (e + f) };
        last_step = (next - e).abs();
        e = next;
        if last_step <= opts.tol {
            return Ok(e);
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_update: last_step,
    })
}

fn mbar_rec(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
    iterations: &mut u64,
) -> Result<f64> {
    if k == 0 {
        return Ok(m0_closed_form(x, betabar.get(0), cfg.alpha(1), cfg.c(1)));
    }
    let e = ebar_rec(k, x, 0.0, betabar, cfg, opts, iterations)?;
    let c = cfg.c(k + 1);
    Ok(x * c / (c + e))
}

fn jbar_rec(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
    iterations: &mut u64,
) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let c = cfg.c(k);
    let a = x * cfg.alpha(k) * betabar.get(k - 1);
    let e = ebar_rec(k - 1, x, 0.0, betabar, cfg, opts, iterations)?;
    let local = c * (1.0 + a / (c + e)).ln() + (1.0 + e / c).ln() - e / (c + e);
    if k == 1 {
        return Ok(local);
    }
    let shifted = a / (c + a + e);
    let lower = jbar_rec(k - 1, shifted, betabar, cfg, opts, iterations)?;
    Ok(c * lower + local)
}

/// `ebar_k(x, betabar_k)`: unique positive solution of the level-`k` fixed
/// point (closed form at `k = 0`).
pub fn ebar_k(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
) -> Result<f64> {
    ebar_k_with_init(k, x, betabar, cfg, opts, 0.0)
}

/// Same as [`ebar_k`] but starting the Picard iteration from `init`;
/// Theorem-level uniqueness makes the limit independent of the start, which
/// the multistart tests assert.
pub fn ebar_k_with_init(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
    init: f64,
) -> Result<f64> {
    assert!(k + 1 <= cfg.hops(), "ebar level {k} needs hop {}", k + 1);
    assert!(x >= 0.0 && x.is_finite());
    let mut iterations = 0;
    ebar_rec(k, x, init, betabar, cfg, opts, &mut iterations)
}

/// `mbar_k(x, betabar_k)`, the Stieltjes-transform deterministic equivalent
/// at `-1/x`.
pub fn mbar_k(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
) -> Result<f64> {
    assert!(k + 1 <= cfg.hops());
    assert!(x >= 0.0 && x.is_finite());
    let mut iterations = 0;
    mbar_rec(k, x, betabar, cfg, opts, &mut iterations)
}

/// `Jbar_k(x, betabar_{k-1})`, `k = 1..=K`.
pub fn jbar_k(
    k: usize,
    x: f64,
    betabar: &BetaBar,
    cfg: &RelayConfig,
    opts: &SolverOptions,
) -> Result<f64> {
    assert!(k >= 1 && k <= cfg.hops());
    assert!(x >= 0.0 && x.is_finite());
    let mut iterations = 0;
    jbar_rec(k, x, betabar, cfg, opts, &mut iterations)
}

/// Mutual-information deterministic equivalent after hop `k`:
/// `Ibar_k = (Jbar_k(1, betabar) - Jbar_k(1, betabar')) / K` with the source
/// entry of `betabar'` zeroed.
pub fn mutual_info_deteq(
    k: usize,
    cfg: &RelayConfig,
    opts: &SolverOptions,
) -> Result<RelayDeteqResult> {
    assert!(k >= 1 && k <= cfg.hops());
    let betabar = asymptotic_betas(cfg);
    let primed = betabar.with_zero_source();
    let mut iterations = 0;

    let j = jbar_rec(k, 1.0, &betabar, cfg, opts, &mut iterations)?;
    let j_primed = jbar_rec(k, 1.0, &primed, cfg, opts, &mut iterations)?;
    let ibar = (j - j_primed) / cfg.hops() as f64;

    let ebar = ebar_rec(k - 1, 1.0, 0.0, &betabar, cfg, opts, &mut iterations)?;
    let max_residual = if k >= 2 {
        let rhs = ebar_rhs(k - 1, 1.0, ebar, &betabar, cfg, opts, &mut iterations)?;
        (rhs - ebar).abs()
    } else {
        // level 0 is closed form
        0.0
    };

    Ok(RelayDeteqResult {
        hop: k,
        ebar,
        jbar: j,
        ibar,
        iterations,
        max_residual,
    })
}

/// The Fig. 2 system of the relay application: K = 4, dims (4, 8, 12, 8, 4),
/// path losses (1, 0.7, 0.5, 0.7), budgets rho = (1, 0.7, 0.5, 0.7) * rho_0.
pub fn fig2_config(rho0: f64) -> RelayConfig {
    RelayConfig::new(
        vec![4, 8, 12, 8, 4],
        vec![1.0, 0.7, 0.5, 0.7],
        vec![rho0, 0.7 * rho0, 0.5 * rho0, 0.7 * rho0],
    )
    .expect("fig2 parameters are valid")
}
