//! End-to-end checks of the `deteq` binary: exit codes, diagnostics, and
//! emitted files.

use std::process::Command;

fn deteq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deteq"))
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("deteq-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_writes_csv_and_exits_zero() {
    let dir = temp_dir("run");
    let out = dir.join("relay.csv");
    let spec = format!(
        r#"{{
            "model": "relay",
            "config": {{
                "dims": [4, 8, 12, 8, 4],
                "alphas": [1.0, 0.7, 0.5, 0.7],
                "rho_scales": [1.0, 0.7, 0.5, 0.7]
            }},
            "sweep": {{"variable": "rho0_db", "grid": [0.0, 10.0]}},
            "output": {{"path": "{}", "format": "csv"}}
        }}"#,
        out.display()
    );
    let spec_path = dir.join("spec.json");
    std::fs::write(&spec_path, spec).unwrap();

    let status = deteq()
        .env("DETEQ_THREADS", "1")
        .arg("run")
        .arg(&spec_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("rho0_db,hop,deteq\n"), "{text}");
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn validate_reports_every_violation_and_exits_two() {
    let dir = temp_dir("validate");
    let spec = r#"{
        "model": "relay",
        "config": {
            "dims": [4, 8],
            "alphas": [-1.0],
            "rho_scales": [1.0]
        },
        "sweep": {"variable": "rho_db", "grid": [10.0, 0.0]},
        "output": {"path": "x.csv", "format": "csv"}
    }"#;
    let spec_path = dir.join("bad.json");
    std::fs::write(&spec_path, spec).unwrap();

    let output = deteq().arg("validate").arg(&spec_path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("alphas[0]"), "{stderr}");
    assert!(stderr.contains("strictly increasing"), "{stderr}");
    assert!(stderr.contains("rho0_db"), "{stderr}");
}

#[test]
fn solver_failure_names_the_grid_point_and_exits_three() {
    let dir = temp_dir("nonconv");
    let out = dir.join("mac.csv");
    let spec = format!(
        r#"{{
            "model": "mac",
            "config": {{
                "n_rx": 4,
                "transmitters": [{{
                    "scatterers": 4, "antennas": 4,
                    "r": {{"type": "identity"}}, "s": {{"type": "identity"}},
                    "t": {{"type": "identity"}}, "q": {{"type": "identity"}}
                }}]
            }},
            "sweep": {{"variable": "rho_db", "grid": [5.0]}},
            "output": {{"path": "{}", "format": "csv"}}
        }}"#,
        out.display()
    );
    let spec_path = dir.join("spec.json");
    std::fs::write(&spec_path, spec).unwrap();

    // a one-iteration cap cannot satisfy the tolerance
    let output = deteq()
        .arg("run")
        .arg(&spec_path)
        .arg("--max-iter")
        .arg("1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("rho_db = 5"), "{stderr}");
}

#[test]
fn figure_subcommand_writes_the_table() {
    let dir = temp_dir("figure");
    let status = deteq()
        .args(["figure", "fig2", "--trials", "50", "--seed", "1", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("fig2.csv")).unwrap();
    assert!(text.starts_with("rho0_db,hop,deteq,mc_mean,mc_std,mc_stderr,trials\n"));
    assert_eq!(text.lines().count(), 1 + 9 * 4);
}

#[test]
fn bits_flag_scales_information_columns() {
    let dir = temp_dir("units");
    let out_nats = dir.join("nats.csv");
    let out_bits = dir.join("bits.csv");
    let write_spec = |path: &std::path::Path, out: &std::path::Path| {
        let spec = format!(
            r#"{{
                "model": "rayleigh-product",
                "config": {{"n": 4, "s": 4, "k": 1}},
                "sweep": {{"variable": "rho_db", "grid": [10.0]}},
                "output": {{"path": "{}", "format": "csv"}}
            }}"#,
            out.display()
        );
        std::fs::write(path, spec).unwrap();
    };
    let nats_spec = dir.join("nats.json");
    let bits_spec = dir.join("bits.json");
    write_spec(&nats_spec, &out_nats);
    write_spec(&bits_spec, &out_bits);

    assert_eq!(deteq().arg("run").arg(&nats_spec).status().unwrap().code(), Some(0));
    assert_eq!(
        deteq()
            .args(["run"])
            .arg(&bits_spec)
            .args(["--units", "bits"])
            .status()
            .unwrap()
            .code(),
        Some(0)
    );

    let value = |path: &std::path::Path, metric: &str| -> f64 {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .find(|l| l.contains(metric))
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    let nats = value(&out_nats, "mutual_info");
    let bits = value(&out_bits, "mutual_info");
    assert!((nats / std::f64::consts::LN_2 - bits).abs() < 1e-9);
    // non-information rows are not rescaled
    let gbar_nats = value(&out_nats, "gbar");
    let gbar_bits = value(&out_bits, "gbar");
    assert_eq!(gbar_nats.to_bits(), gbar_bits.to_bits());
}
