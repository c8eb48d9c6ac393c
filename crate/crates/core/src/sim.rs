//! The Monte Carlo oracle: exact channel realizations for both models,
//! finite-dimensional mutual information / SINR / power normalizations, and
//! a deterministic, seedable ergodic averaging harness.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{hermitian_solve, logdet_hpd};
use crate::mac::MacConfig;
use crate::matrix::ComplexMatrix;
use crate::relay::RelayConfig;
use crate::rng::{sample_standard_complex_gaussian, SimRng};

/// One draw of the relay chain: channels, realized power normalizations, and
/// the covariance recursion they induce.
#[derive(Debug, Clone)]
pub struct RelayRealization {
    pub config: RelayConfig,
    /// `H_1..H_K`; `H_k` is `n_k x n_{k-1}`.
    pub channels: Vec<ComplexMatrix>,
    /// Realized `beta_0..beta_{K-1}`.
    pub betas: Vec<f64>,
    /// `R_0..R_K` of the covariance recursion.
    pub covariances: Vec<ComplexMatrix>,
}

/// Samples the relay chain: i.i.d. standard complex Gaussian hops `H_1..H_K`
/// (in that order), then the exact covariance recursion
/// `R_k = I + (alpha_k beta_{k-1} / n_{k-1}) H_k R_{k-1} H_k^H` with
/// `beta_k = rho_k / ((1/n_k) tr R_k)`. The expectation behind each `beta_k`
/// is over transmit and noise vectors only, which the recursion realizes
/// exactly; no signal sampling is involved.
pub fn sample_relay(cfg: &RelayConfig, rng: &mut SimRng) -> RelayRealization {
    let hops = cfg.hops();
    let channels: Vec<ComplexMatrix> = (1..=hops)
        .map(|k| sample_standard_complex_gaussian(cfg.dim(k), cfg.dim(k - 1), rng))
        .collect();

    let mut covariances = Vec::with_capacity(hops + 1);
    covariances.push(ComplexMatrix::identity(cfg.dim(0)));
    let mut betas = vec![cfg.rho(0)];
    for k in 1..=hops {
        let h = &channels[k - 1];
        let scale = cfg.alpha(k) * betas[k - 1] / cfg.dim(k - 1) as f64;
        let mut r = h.mul(&covariances[k - 1]).mul_conj_transpose(h).hermitized().scaled(scale);
        r.add_scaled_identity(1.0);
        if k < hops {
            betas.push(cfg.rho(k) / (r.trace_re() / cfg.dim(k) as f64));
        }
        covariances.push(r);
    }

    RelayRealization {
        config: cfg.clone(),
        channels,
        betas,
        covariances,
    }
}

impl RelayRealization {
    /// `J_k(1, beta) = (1/n_k) log det R_k`.
    pub fn logdet_functional(&self, k: usize) -> f64 {
        logdet_hpd(&self.covariances[k]).expect("R_k is I + PSD")
            / self.config.dim(k) as f64
    }
}

/// Exact normalized mutual information after every hop, from one
/// realization: `I_k = (J_k(1, beta) - J_k(1, beta')) / K` with `beta'`
/// zeroing the source entry (the covariance chain is recomputed under
/// `beta'_0 = 0` with the same realized `beta_1..`).
pub fn relay_mutual_info_all(real: &RelayRealization) -> Vec<f64> {
    let cfg = &real.config;
    let hops = cfg.hops();
    let kf = hops as f64;

    let mut primed_prev = ComplexMatrix::identity(cfg.dim(1));
    let mut out = Vec::with_capacity(hops);
    for k in 1..=hops {
        let primed = if k == 1 {
            // beta'_0 = 0 collapses R'_1 to the identity
            ComplexMatrix::identity(cfg.dim(1))
        } else {
            let h = &real.channels[k - 1];
            let scale = cfg.alpha(k) * real.betas[k - 1] / cfg.dim(k - 1) as f64;
            let mut r = h.mul(&primed_prev).mul_conj_transpose(h).hermitized().scaled(scale);
            r.add_scaled_identity(1.0);
            r
        };
        let j = real.logdet_functional(k);
        let j_primed =
            logdet_hpd(&primed).expect("R'_k is I + PSD") / cfg.dim(k) as f64;
        out.push((j - j_primed) / kf);
        primed_prev = primed;
    }
    out
}

/// Exact normalized mutual information after hop `k` for one realization.
pub fn relay_mutual_info_exact(real: &RelayRealization, k: usize) -> f64 {
    assert!(k >= 1 && k <= real.config.hops());
    relay_mutual_info_all(real)[k - 1]
}

/// Antenna/scatterer correlation generator:
/// `[G(phi, d, n)]_{k,l} = (1/n) sum_j exp(i 2 pi d (k-l) sin(j phi / (1-n)))`
/// with `j` running over the `n` symmetric offsets `(1-n)/2 .. (n-1)/2`.
/// Hermitian Toeplitz with unit diagonal; PSD up to rounding.
pub fn correlation_matrix_g(phi: f64, d: f64, n: usize) -> ComplexMatrix {
    assert!(n >= 1);
    if n == 1 {
        return ComplexMatrix::identity(1);
    }
    let denom = 1.0 - n as f64;
    // first column as a function of the row offset
    let gamma: Vec<Complex64> = (0..n)
        .map(|offset| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..n {
                let j = (1.0 - n as f64) / 2.0 + m as f64;
                let angle = 2.0 * std::f64::consts::PI * d * offset as f64 * (j * phi / denom).sin();
                acc += Complex64::new(angle.cos(), angle.sin());
            }
            acc / n as f64
        })
        .collect();
    ComplexMatrix::from_fn(n, n, |k, l| {
        if k >= l {
            gamma[k - l]
        } else {
            gamma[l - k].conj()
        }
    })
}

/// Samples the double-scattering channels
/// `H_k = R_k^{1/2} W_1 S_k^{1/2} W_2 T_k^{1/2} / sqrt(N_k n_k)`, drawing
/// `W_1` then `W_2` per transmitter in index order.
pub fn sample_double_scattering(cfg: &MacConfig, rng: &mut SimRng) -> Vec<ComplexMatrix> {
    (0..cfg.transmitters())
        .map(|k| {
            let n_scatter = cfg.scatterers(k);
            let n_tx = cfg.antennas(k);
            let w1 = sample_standard_complex_gaussian(cfg.n_rx(), n_scatter, rng);
            let w2 = sample_standard_complex_gaussian(n_scatter, n_tx, rng);
            let inner = w1.scale_cols(cfg.s_sqrt(k)).mul(&w2);
            cfg.r_sqrt(k)
                .mul(&inner)
                .mul(cfg.t_sqrt(k))
                .scaled(1.0 / ((n_scatter * n_tx) as f64).sqrt())
        })
        .collect()
}

/// Exact normalized mutual information
/// `(1/N) log det(I_N + rho sum_k H_k Q_k H_k^H)`.
pub fn mac_mutual_info_exact(channels: &[ComplexMatrix], precoders: &[ComplexMatrix], rho: f64) -> f64 {
    assert_eq!(channels.len(), precoders.len());
    let n = channels[0].rows();
    let mut b = ComplexMatrix::identity(n);
    for (h, q) in channels.iter().zip(precoders.iter()) {
        let hqh = h.mul(q).mul_conj_transpose(h).hermitized();
        b.add_scaled_assign(rho, &hqh);
    }
    logdet_hpd(&b.hermitized()).expect("I + PSD is positive definite") / n as f64
}

/// Exact MMSE SINR of stream `(k, j)`. `channels` must already carry the
/// signaling powers (columns scaled by sqrt(p)); the detector output SINR is
/// `h^H (sum_i H_i H_i^H - h h^H + I/rho)^{-1} h`.
pub fn mac_mmse_sinr_exact(channels: &[ComplexMatrix], k: usize, j: usize, rho: f64) -> f64 {
    let n = channels[0].rows();
    let mut a = ComplexMatrix::zeros(n, n);
    for h in channels {
        a = a.add(&h.mul_conj_transpose(h));
    }
    let col = channels[k].col(j);
    for (row, &v) in col.iter().enumerate() {
        for (cix, &w) in col.iter().enumerate() {
            a[(row, cix)] -= v * w.conj();
        }
    }
    a.add_scaled_identity(1.0 / rho);
    let rhs = ComplexMatrix::from_fn(n, 1, |i, _| col[i]);
    let solved = hermitian_solve(&a.hermitized(), &rhs).expect("interference matrix is PD");
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        acc += col[i].conj() * solved[(i, 0)];
    }
    acc.re
}

/// Ergodic Monte Carlo verdict: sample mean, sample standard deviation, and
/// the standard error of the mean.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McReport {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn report_from_values(values: &[f64], seed: u64) -> McReport {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let std = (pairwise_sum(&sq) / (n - 1.0)).sqrt();
    McReport {
        mean,
        std,
        stderr: std / n.sqrt(),
        trials: values.len() as u64,
        seed,
    }
}

/// Runs `trials` independent realizations of a vector-valued metric and
/// aggregates each component. Trial `t` draws from RNG stream
/// `point * 2^32 + t`, so results are independent of worker scheduling, and
/// aggregation uses pairwise summation so they are independent of reduction
/// order too.
pub fn ergodic_mc_vec_at_point<F>(
    metric: F,
    n_metrics: usize,
    trials: u64,
    seed: u64,
    point: u64,
) -> Vec<McReport>
where
    F: Fn(&mut SimRng) -> Vec<f64> + Sync,
{
    assert!(trials >= 2, "need at least two trials");
    let root = SimRng::new(seed);
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = root.substream(SimRng::trial_stream(point, t));
            let row = metric(&mut rng);
            assert_eq!(row.len(), n_metrics, "metric arity changed between trials");
            row
        })
        .collect();
    (0..n_metrics)
        .map(|m| {
            let values: Vec<f64> = rows.iter().map(|r| r[m]).collect();
            report_from_values(&values, seed)
        })
        .collect()
}

/// Scalar-metric ergodic Monte Carlo at sweep point 0.
pub fn ergodic_mc<F>(metric: F, trials: u64, seed: u64) -> McReport
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    ergodic_mc_at_point(metric, trials, seed, 0)
}

/// Scalar-metric ergodic Monte Carlo on the stream block of `point`.
pub fn ergodic_mc_at_point<F>(metric: F, trials: u64, seed: u64, point: u64) -> McReport
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    ergodic_mc_vec_at_point(|rng| vec![metric(rng)], 1, trials, seed, point)
        .pop()
        .expect("one metric in, one report out")
}
