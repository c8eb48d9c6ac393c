//! Large-dimension Monte Carlo oracles for the relay deterministic
//! equivalents: single realizations of the exact random-matrix functionals
//! at sizes where almost-sure convergence has set in.

use deteq_core::linalg::{hermitian_inverse, logdet_hpd};
use deteq_core::relay::{
    asymptotic_betas, e0_closed_form, ebar_k, jbar_k, m0_closed_form, mbar_k, RelayConfig,
};
use deteq_core::rng::{sample_standard_complex_gaussian, SimRng};
use deteq_core::sim::sample_relay;
use deteq_core::SolverOptions;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// `(1/n) tr (alpha beta H H^H / n + I/x)^{-1}` against the closed forms at
/// square aspect ratio (c = 1), n = 512.
#[test]
fn m0_and_e0_match_resolvent_trace_at_512() {
    let n = 512;
    let (x, alpha_beta) = (1.0, 1.0);
    let mut rng = SimRng::new(2101);
    let h = sample_standard_complex_gaussian(n, n, &mut rng);
    let mut m = h.mul_conj_transpose(&h).hermitized().scaled(alpha_beta / n as f64);
    m.add_scaled_identity(1.0 / x);
    let m_hat = hermitian_inverse(&m).unwrap().trace_re() / n as f64;

    let m_bar = m0_closed_form(x, 1.0, 1.0, 1.0);
    assert!(
        (m_hat - m_bar).abs() / m_bar < 0.02,
        "mbar_0: {m_hat} vs {m_bar}"
    );

    // invert the Stieltjes relation at c = 1 to expose the empirical e_0
    let e_hat = alpha_beta / (1.0 / m_hat - 1.0 / x) - 1.0;
    let e_bar = e0_closed_form(x, 1.0, 1.0, 1.0);
    assert!(
        (e_hat - e_bar).abs() / e_bar < 0.02,
        "ebar_0: {e_hat} vs {e_bar}"
    );
}

/// The level-1 recursion against the exact resolvent of the two-hop chain
/// at 128x the reference dimensions (source n = 512).
#[test]
fn ebar1_and_mbar1_match_two_hop_resolvent() {
    let scale = 128;
    let rho0 = 10.0;
    let cfg = RelayConfig::new(
        vec![4 * scale, 8 * scale, 12 * scale],
        vec![1.0, 0.7],
        vec![rho0, 0.7 * rho0],
    )
    .unwrap();
    let mut rng = SimRng::new(777);
    let real = sample_relay(&cfg, &mut rng);

    // R_2 = alpha_2 beta_1 H_2 R_1 H_2^H / n_1 + I is the x = 1 resolvent
    let n2 = cfg.dim(2);
    let m_hat = hermitian_inverse(&real.covariances[2]).unwrap().trace_re() / n2 as f64;

    let betas = asymptotic_betas(&cfg);
    let m_bar = mbar_k(1, 1.0, &betas, &cfg, &opts()).unwrap();
    assert!(
        (m_hat - m_bar).abs() / m_bar < 0.02,
        "mbar_1: {m_hat} vs {m_bar}"
    );

    // empirical e_1 through mbar_1 = x c_2 / (c_2 + e_1)
    let c2 = cfg.c(2);
    let e_hat = c2 / m_hat - c2;
    let e_bar = ebar_k(1, 1.0, &betas, &cfg, &opts()).unwrap();
    assert!(
        (e_hat - e_bar).abs() / e_bar < 0.02,
        "ebar_1: {e_hat} vs {e_bar}"
    );
}

/// Initial log-det functional against one exact draw at n = 512, c_1 = 1.
#[test]
fn jbar1_matches_logdet_at_512() {
    let n = 512;
    let cfg = RelayConfig::new(vec![n, n], vec![1.0], vec![1.0]).unwrap();
    let betas = asymptotic_betas(&cfg);
    let mut rng = SimRng::new(31337);
    let h = sample_standard_complex_gaussian(n, n, &mut rng);
    let mut b = h.mul_conj_transpose(&h).hermitized().scaled(1.0 / n as f64);
    b.add_scaled_identity(1.0);
    let j_hat = logdet_hpd(&b).unwrap() / n as f64;
    let j_bar = jbar_k(1, 1.0, &betas, &cfg, &opts()).unwrap();
    assert!(
        (j_hat - j_bar).abs() / j_bar < 0.02,
        "jbar_1: {j_hat} vs {j_bar}"
    );
}

/// Second-hop log-det functional at 32x the reference dimensions.
#[test]
fn jbar2_matches_two_hop_logdet_at_x32() {
    let scale = 32;
    let rho0 = 10.0;
    let cfg = RelayConfig::new(
        vec![4 * scale, 8 * scale, 12 * scale],
        vec![1.0, 0.7],
        vec![rho0, 0.7 * rho0],
    )
    .unwrap();
    let mut rng = SimRng::new(555);
    let real = sample_relay(&cfg, &mut rng);
    let j_hat = logdet_hpd(&real.covariances[2]).unwrap() / cfg.dim(2) as f64;

    let betas = asymptotic_betas(&cfg);
    let j_bar = jbar_k(2, 1.0, &betas, &cfg, &opts()).unwrap();
    assert!(
        (j_hat - j_bar).abs() / j_bar < 0.02,
        "jbar_2: {j_hat} vs {j_bar}"
    );
}

/// Realized power normalizations approach the asymptotic ones (small-scale
/// version of the dedicated acceptance check).
#[test]
fn realized_betas_approach_lemma_values() {
    let scale = 16;
    let cfg = RelayConfig::new(
        vec![4 * scale, 8 * scale, 12 * scale, 8 * scale, 4 * scale],
        vec![1.0, 0.7, 0.5, 0.7],
        vec![10.0, 7.0, 5.0, 7.0],
    )
    .unwrap();
    let betas = asymptotic_betas(&cfg);
    let mut rng = SimRng::new(99);
    for _ in 0..5 {
        let real = sample_relay(&cfg, &mut rng);
        for k in 1..4 {
            let rel = (real.betas[k] - betas.get(k)).abs() / betas.get(k);
            assert!(rel < 0.05, "beta_{k}: relative error {rel}");
        }
    }
}

/// Exact mutual information shrinks to zero when the direct source power is
/// removed, and the realization, not the asymptotics, drives the exact
/// functional: quick structural checks on one mid-size draw.
#[test]
fn exact_chain_structural_checks_midsize() {
    let cfg = RelayConfig::new(
        vec![32, 64, 96, 64, 32],
        vec![1.0, 0.7, 0.5, 0.7],
        vec![5.0, 3.5, 2.5, 3.5],
    )
    .unwrap();
    let mut rng = SimRng::new(4);
    let real = sample_relay(&cfg, &mut rng);
    let all = deteq_core::sim::relay_mutual_info_all(&real);
    assert_eq!(all.len(), 4);
    for (k, v) in all.iter().enumerate() {
        assert!(*v > 0.0, "hop {}: nonpositive mutual info", k + 1);
    }
    // J-form consistency: J_k recomputed from the stored covariances
    for k in 1..=4usize {
        let j = logdet_hpd(&real.covariances[k]).unwrap() / cfg.dim(k) as f64;
        assert!(j > 0.0);
    }
    // beta identity (1/n_k) tr R_k * beta_k = rho_k
    for k in 1..4usize {
        let lhs = real.covariances[k].trace_re() / cfg.dim(k) as f64 * real.betas[k];
        assert!((lhs - cfg.rho(k)).abs() < 1e-10);
    }
}
