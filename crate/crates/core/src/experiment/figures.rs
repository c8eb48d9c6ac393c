//! Configurations behind the three reference experiments.

use crate::error::Result;
use crate::mac::{MacConfig, MacTransmitter};
use crate::relay::RelayConfig;
use crate::sim::correlation_matrix_g;
use std::f64::consts::PI;

use super::spec::{ExperimentSpec, McSpec, ModelSpec, OutputFormat, OutputSpec, RelaySpec, SweepSpec, Units};

/// Relay chain sweep: K = 4, dims (4, 8, 12, 8, 4), budgets scaled from the
/// source SNR, swept from -10 to 30 dB in 5 dB steps.
pub fn fig2_spec(mc: Option<McSpec>, output_path: &str, format: OutputFormat) -> ExperimentSpec {
    ExperimentSpec {
        model: ModelSpec::Relay(RelaySpec {
            dims: vec![4, 8, 12, 8, 4],
            alphas: vec![1.0, 0.7, 0.5, 0.7],
            rho_scales: vec![1.0, 0.7, 0.5, 0.7],
            recursion_cap: None,
        }),
        sweep: SweepSpec {
            variable: "rho0_db".into(),
            grid: None,
            from: Some(-10.0),
            to: Some(30.0),
            step: Some(5.0),
        },
        mc,
        waterfill: None,
        output: OutputSpec {
            path: output_path.into(),
            format,
        },
        units: Units::Nats,
    }
}

pub fn fig2_relay_config(rho0: f64) -> RelayConfig {
    crate::relay::fig2_config(rho0)
}

/// Multi-keyhole scatterer counts of the second experiment.
pub const FIG3_SCATTERERS: [usize; 5] = [1, 2, 3, 4, 100];

/// SNR grid (dB) of the multi-keyhole experiment.
pub fn fig3_grid() -> Vec<f64> {
    (0..=6).map(|i| 5.0 * i as f64).collect()
}

/// Multi-keyhole channel: a single transmitter, N = n_1 = 4, all
/// correlations identity, `n1` scatterers.
pub fn fig3_config(n1: usize, rho: f64) -> Result<MacConfig> {
    MacConfig::new(4, rho, vec![MacTransmitter::uncorrelated(4, n1, 4)])
}

/// SNR grid (dB) of the three-user double-scattering experiment.
pub fn fig4_grid() -> Vec<f64> {
    (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect()
}

/// Per-transmitter power budgets of the third experiment, `P_k = 1/n_k`.
pub fn fig4_budgets() -> Vec<f64> {
    vec![1.0 / 3.0; 3]
}

/// Water-filling stopping threshold used for the third experiment.
pub const FIG4_WATERFILL_EPS: f64 = 1e-8;

/// Three-user double-scattering MAC: N = 4, N_k = 11 scatterers, n_k = 3
/// antennas, generator-based correlations with angular spreads
/// (pi/4, pi/2, pi), uniform precoders at the budget.
pub fn fig4_config(rho: f64) -> Result<MacConfig> {
    let phis = [PI / 4.0, PI / 2.0, PI];
    let scatter_corr = correlation_matrix_g(PI / 8.0, 50.0, 11);
    let (scatter_eigs, _) = crate::linalg::herm_eigen(&scatter_corr)?;
    let s: Vec<f64> = scatter_eigs.into_iter().map(|v| v.max(0.0)).collect();

    let tx = phis
        .iter()
        .map(|&phi| MacTransmitter {
            scatterers: 11,
            antennas: 3,
            r: correlation_matrix_g(phi, 0.25, 4),
            s: s.clone(),
            t: correlation_matrix_g(phi, 0.25, 3),
            q: crate::matrix::ComplexMatrix::identity(3).scaled(1.0 / 3.0),
        })
        .collect();
    MacConfig::new(4, rho, tx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4_config_builds_at_all_grid_points() {
        for db in fig4_grid() {
            let rho = 10f64.powf(db / 10.0);
            let cfg = fig4_config(rho).unwrap();
            assert_eq!(cfg.transmitters(), 3);
            assert_eq!(cfg.n_rx(), 4);
            assert_eq!(cfg.scatterers(0), 11);
            assert_eq!(cfg.antennas(0), 3);
        }
    }

    #[test]
    fn fig3_keyhole_count_matches() {
        let cfg = fig3_config(100, 1.0).unwrap();
        assert_eq!(cfg.scatterers(0), 100);
    }
}
