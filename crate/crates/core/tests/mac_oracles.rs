//! Monte Carlo oracles for the double-scattering deterministic equivalents.

use deteq_core::mac::{mutual_info_deteq, MacConfig, MacTransmitter};
use deteq_core::matrix::ComplexMatrix;
use deteq_core::sim::{ergodic_mc, mac_mutual_info_exact, sample_double_scattering};
use deteq_core::SolverOptions;

fn keyhole_family(scale: usize, rho: f64) -> MacConfig {
    // one transmitter, twice as many scatterers as antennas, all identities
    MacConfig::new(
        4 * scale,
        rho,
        vec![MacTransmitter::uncorrelated(4 * scale, 8 * scale, 4 * scale)],
    )
    .unwrap()
}

/// Growing the dimensions at fixed ratios pulls the ergodic Monte Carlo
/// mean toward the deterministic equivalent: tripling the size must shrink
/// the gap in at least 2 of 3 independent studies.
#[test]
fn mc_mean_converges_toward_deteq_with_dimension() {
    let rho = 5.0;
    let trials = 3_000;
    let mut improvements = 0;
    for (study, seed) in [(0u64, 11u64), (1, 22), (2, 33)] {
        let gaps: Vec<f64> = [1usize, 3, 9]
            .iter()
            .map(|&scale| {
                let cfg = keyhole_family(scale, rho);
                let deteq = mutual_info_deteq(&cfg, &SolverOptions::default()).unwrap();
                let precoders = vec![ComplexMatrix::identity(4 * scale)];
                let cfg_mc = cfg.clone();
                let report = ergodic_mc(
                    move |rng| {
                        let h = sample_double_scattering(&cfg_mc, rng);
                        mac_mutual_info_exact(&h, &precoders, rho)
                    },
                    trials,
                    seed,
                );
                (report.mean - deteq).abs()
            })
            .collect();
        let improved = gaps[1] < gaps[0] && gaps[2] < gaps[1];
        println!("study {study}: gaps {gaps:?} improved={improved}");
        if improved {
            improvements += 1;
        }
    }
    assert!(
        improvements >= 2,
        "gap shrank in only {improvements} of 3 studies"
    );
}

/// At triple the reference dimensions the ergodic mean sits within a few
/// standard errors of the deterministic equivalent: the asymptotic bias has
/// dropped below the Monte Carlo resolution there.
#[test]
fn multi_keyhole_spot_check_at_triple_size() {
    let rho = 10.0;
    let cfg = MacConfig::new(12, rho, vec![MacTransmitter::uncorrelated(12, 6, 12)]).unwrap();
    let deteq = mutual_info_deteq(&cfg, &SolverOptions::default()).unwrap();
    let precoders = vec![ComplexMatrix::identity(12)];
    let cfg_mc = cfg.clone();
    let report = ergodic_mc(
        move |rng| {
            let h = sample_double_scattering(&cfg_mc, rng);
            mac_mutual_info_exact(&h, &precoders, rho)
        },
        10_000,
        2026,
    );
    let gap = (report.mean - deteq).abs();
    assert!(
        gap <= 3.0 * report.stderr,
        "gap {gap} vs 3 stderr {}",
        3.0 * report.stderr
    );
}
