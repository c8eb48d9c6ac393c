//! Executes experiment specs: deterministic-equivalent sweeps, optional
//! Monte Carlo columns, water-filling payloads, and CSV/JSON rendering.

use serde_json::json;

use crate::error::Error;
use crate::mac::{self, MacConfig};
use crate::matrix::ComplexMatrix;
use crate::relay;
use crate::sim::{self, McReport};
use crate::solver::SolverOptions;

use super::figures;
use super::spec::{
    ExperimentSpec, MacSpec, McSpec, ModelSpec, OutputFormat, RayleighSpec, RelaySpec, Units,
    WaterfillSpec,
};

/// How a run failed; drives the CLI exit code.
#[derive(Debug)]
pub enum RunFailure {
    /// Structural or semantic spec problems (exit 2).
    Validation(Vec<String>),
    /// A solver did not converge at a named grid point (exit 3).
    Solver {
        variable: String,
        grid_point: f64,
        source: Error,
    },
    /// Filesystem trouble writing the output.
    Io(String),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Validation(problems) => {
                writeln!(f, "spec validation failed:")?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
            RunFailure::Solver {
                variable,
                grid_point,
                source,
            } => write!(f, "solver failure at {variable} = {grid_point}: {source}"),
            RunFailure::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub opts: SolverOptions,
    pub units_override: Option<Units>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            opts: SolverOptions::default(),
            units_override: None,
        }
    }
}

/// One output row of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub grid_db: f64,
    /// hop number (relay) or metric label (mac / rayleigh-product)
    pub key: String,
    pub deteq: f64,
    pub mc: Option<McReport>,
    /// per-transmitter water-filling payload, attached to waterfill rows
    pub waterfill: Option<WaterfillPayload>,
    /// whether the value is an information quantity subject to nats->bits
    pub convertible: bool,
}

#[derive(Debug, Clone)]
pub struct WaterfillPayload {
    pub budgets: Vec<f64>,
    pub loadings: Vec<Vec<f64>>,
    pub water_levels: Vec<f64>,
    pub sum_power: Vec<f64>,
    pub outer_iterations: u64,
}

/// Fully rendered run: rows plus the serialized artifact.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<SweepRow>,
    pub rendered: String,
    pub path: String,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn unit_scale(units: Units) -> f64 {
    match units {
        Units::Nats => 1.0,
        Units::Bits => 1.0 / std::f64::consts::LN_2,
    }
}

fn scaled_report(r: &McReport, scale: f64) -> McReport {
    McReport {
        mean: r.mean * scale,
        std: r.std * scale,
        stderr: r.stderr * scale,
        trials: r.trials,
        seed: r.seed,
    }
}

fn solver_failure(variable: &str, grid_point: f64) -> impl Fn(Error) -> RunFailure + '_ {
    move |source| match source {
        Error::InvalidConfig(_) => RunFailure::Validation(vec![source.to_string()]),
        other => RunFailure::Solver {
            variable: variable.to_string(),
            grid_point,
            source: other,
        },
    }
}

/// Relay sweep: per (SNR, hop) the deteq column carries the figure
/// normalization `(n_k / n) Ibar_k`, and the Monte Carlo columns average the
/// identically normalized exact mutual information.
pub fn relay_rows(
    spec: &RelaySpec,
    grid_db: &[f64],
    mc: Option<McSpec>,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>, RunFailure> {
    let mut rows = Vec::new();
    for (pi, &db) in grid_db.iter().enumerate() {
        let fail = solver_failure("rho0_db", db);
        let cfg = spec.build(db_to_linear(db)).map_err(&fail)?;
        let hops = cfg.hops();
        let n = cfg.dim(0) as f64;

        let mut deteqs = Vec::with_capacity(hops);
        for k in 1..=hops {
            let r = relay::mutual_info_deteq(k, &cfg, opts).map_err(&fail)?;
            deteqs.push(cfg.dim(k) as f64 / n * r.ibar);
        }

        let reports: Option<Vec<McReport>> = mc.map(|mc| {
            let cfg = cfg.clone();
            sim::ergodic_mc_vec_at_point(
                move |rng| {
                    let real = sim::sample_relay(&cfg, rng);
                    sim::relay_mutual_info_all(&real)
                        .iter()
                        .enumerate()
                        .map(|(i, v)| cfg.dim(i + 1) as f64 / n * v)
                        .collect()
                },
                hops,
                mc.trials,
                mc.seed,
                pi as u64,
            )
        });

        for k in 1..=hops {
            rows.push(SweepRow {
                grid_db: db,
                key: k.to_string(),
                deteq: deteqs[k - 1],
                mc: reports.as_ref().map(|r| r[k - 1]),
                waterfill: None,
                convertible: true,
            });
        }
    }
    Ok(rows)
}

/// Per-stream effective channels `H_k U_k diag(sqrt(p))` for the MMSE SINR
/// simulation in the shared (T, Q) eigenbasis.
fn effective_channel_factors(cfg: &MacConfig) -> crate::error::Result<Vec<ComplexMatrix>> {
    (0..cfg.transmitters())
        .map(|k| {
            let (_t, p, u) = mac::codiagonalize(cfg.t(k), cfg.q(k), k)?;
            let sqrt_p: Vec<f64> = p.iter().map(|v| v.max(0.0).sqrt()).collect();
            Ok(u.scale_cols(&sqrt_p))
        })
        .collect()
}

fn mac_sum_rate_mc_metric(
    channels: &[ComplexMatrix],
    factors: &[ComplexMatrix],
    rho: f64,
    n_rx: usize,
) -> f64 {
    let effective: Vec<ComplexMatrix> = channels
        .iter()
        .zip(factors.iter())
        .map(|(h, f)| h.mul(f))
        .collect();
    let mut rate = 0.0;
    for (k, h) in effective.iter().enumerate() {
        for j in 0..h.cols() {
            rate += (1.0 + sim::mac_mmse_sinr_exact(&effective, k, j, rho)).ln();
        }
    }
    rate / n_rx as f64
}

/// MAC sweep rows. Emits `mutual_info` always, `sum_rate` when every
/// transmitter's (T, Q) pair shares an eigenbasis, and
/// `mutual_info_waterfill` / `sum_rate_waterfill` when a water-filling block
/// is present.
pub fn mac_rows(
    spec: &MacSpec,
    grid_db: &[f64],
    mc: Option<McSpec>,
    waterfill: Option<&WaterfillSpec>,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>, RunFailure> {
    let mut rows = Vec::new();
    for (pi, &db) in grid_db.iter().enumerate() {
        let fail = solver_failure("rho_db", db);
        let rho = db_to_linear(db);
        let cfg = spec.build(rho).map_err(&fail)?;

        let mi = mac::mutual_info_deteq(&cfg, opts).map_err(&fail)?;
        let sum_rate = match mac::sum_rate_deteq(&cfg, opts) {
            Ok(v) => Some(v),
            Err(Error::NotCodiagonalizable { .. }) => None,
            Err(e) => return Err(fail(e)),
        };

        let wf = waterfill
            .map(|w| {
                let result = mac::waterfill_optimal_q(&cfg, &w.budgets, w.eps, opts)?;
                let optimal = cfg.with_precoders(result.precoders.clone())?;
                let mi_opt = mac::mutual_info_deteq(&optimal, opts)?;
                let rate_opt = mac::sum_rate_deteq(&optimal, opts)?;
                Ok::<_, Error>((result, optimal, mi_opt, rate_opt))
            })
            .transpose()
            .map_err(&fail)?;

        let uniform_factors = sum_rate
            .is_some()
            .then(|| effective_channel_factors(&cfg))
            .transpose()
            .map_err(&fail)?;

        // one Monte Carlo pass per grid point: all requested metrics share
        // the same channel realizations
        let mut metric_keys: Vec<&str> = vec!["mutual_info"];
        if sum_rate.is_some() {
            metric_keys.push("sum_rate");
        }
        if wf.is_some() {
            metric_keys.push("mutual_info_waterfill");
            metric_keys.push("sum_rate_waterfill");
        }

        let reports: Option<Vec<McReport>> = match mc {
            Some(mc) => {
                let cfg_mc = cfg.clone();
                let precoders: Vec<ComplexMatrix> =
                    (0..cfg.transmitters()).map(|k| cfg.q(k).clone()).collect();
                let uniform_factors = uniform_factors.clone();
                let wf_data = wf
                    .as_ref()
                    .map(|(result, optimal, _, _)| {
                        let factors = effective_channel_factors(optimal)?;
                        Ok::<_, Error>((result.precoders.clone(), factors))
                    })
                    .transpose()
                    .map_err(&fail)?;
                let n_metrics = metric_keys.len();
                let n_rx = cfg.n_rx();
                Some(sim::ergodic_mc_vec_at_point(
                    move |rng| {
                        let channels = sim::sample_double_scattering(&cfg_mc, rng);
                        let mut out =
                            vec![sim::mac_mutual_info_exact(&channels, &precoders, rho)];
                        if let Some(factors) = &uniform_factors {
                            out.push(mac_sum_rate_mc_metric(&channels, factors, rho, n_rx));
                        }
                        if let Some((q_opt, factors_opt)) = &wf_data {
                            out.push(sim::mac_mutual_info_exact(&channels, q_opt, rho));
                            out.push(mac_sum_rate_mc_metric(&channels, factors_opt, rho, n_rx));
                        }
                        out
                    },
                    n_metrics,
                    mc.trials,
                    mc.seed,
                    pi as u64,
                ))
            }
            None => None,
        };

        let mut metric_idx = 0usize;
        let mut push = |key: &str, deteq: f64, payload: Option<WaterfillPayload>| {
            rows.push(SweepRow {
                grid_db: db,
                key: key.to_string(),
                deteq,
                mc: reports.as_ref().map(|r| r[metric_idx]),
                waterfill: payload,
                convertible: true,
            });
            metric_idx += 1;
        };

        push("mutual_info", mi, None);
        if let Some(rate) = sum_rate {
            push("sum_rate", rate, None);
        }
        if let Some((result, _optimal, mi_opt, rate_opt)) = &wf {
            let w = waterfill.expect("waterfill spec present");
            let payload = WaterfillPayload {
                budgets: w.budgets.clone(),
                loadings: result.loadings.clone(),
                water_levels: result.water_levels.clone(),
                sum_power: result
                    .loadings
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p.iter().sum::<f64>() / cfg.antennas(k) as f64)
                    .collect(),
                outer_iterations: result.outer_iterations,
            };
            push("mutual_info_waterfill", *mi_opt, Some(payload));
            push("sum_rate_waterfill", *rate_opt, None);
        }
    }
    Ok(rows)
}

/// Rayleigh-product sweep: closed-form `gbar`, mutual information, and MMSE
/// SINR per grid point; Monte Carlo is attached to the mutual-information
/// rows.
pub fn rayleigh_rows(
    spec: &RayleighSpec,
    grid_db: &[f64],
    mc: Option<McSpec>,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>, RunFailure> {
    let _ = opts;
    let mut rows = Vec::new();
    for (pi, &db) in grid_db.iter().enumerate() {
        let fail = solver_failure("rho_db", db);
        let rho = db_to_linear(db);
        let closed =
            mac::rayleigh_product_closed_form(spec.n, spec.s, spec.k, rho).map_err(&fail)?;

        let report = match mc {
            Some(mc) => {
                let cfg = MacConfig::new(
                    spec.n,
                    rho,
                    (0..spec.k)
                        .map(|_| mac::MacTransmitter::uncorrelated(spec.n, spec.s, spec.n))
                        .collect(),
                )
                .map_err(&fail)?;
                let precoders: Vec<ComplexMatrix> =
                    (0..spec.k).map(|_| ComplexMatrix::identity(spec.n)).collect();
                Some(sim::ergodic_mc_at_point(
                    move |rng| {
                        let channels = sim::sample_double_scattering(&cfg, rng);
                        sim::mac_mutual_info_exact(&channels, &precoders, rho)
                    },
                    mc.trials,
                    mc.seed,
                    pi as u64,
                ))
            }
            None => None,
        };

        rows.push(SweepRow {
            grid_db: db,
            key: "mutual_info".into(),
            deteq: closed.mutual_info,
            mc: report,
            waterfill: None,
            convertible: true,
        });
        rows.push(SweepRow {
            grid_db: db,
            key: "gbar".into(),
            deteq: closed.gbar,
            mc: None,
            waterfill: None,
            convertible: false,
        });
        rows.push(SweepRow {
            grid_db: db,
            key: "mmse_sinr".into(),
            deteq: closed.sinr,
            mc: None,
            waterfill: None,
            convertible: false,
        });
    }
    Ok(rows)
}

fn render_csv(rows: &[SweepRow], grid_label: &str, key_label: &str, with_mc: bool, units: Units) -> String {
    let mut out = String::new();
    out.push_str(grid_label);
    out.push(',');
    out.push_str(key_label);
    out.push_str(",deteq");
    if with_mc {
        out.push_str(",mc_mean,mc_std,mc_stderr,trials");
    }
    out.push('\n');
    let scale = unit_scale(units);
    for row in rows {
        let s = if row.convertible { scale } else { 1.0 };
        out.push_str(&fmt_float(row.grid_db));
        out.push(',');
        out.push_str(&row.key);
        out.push(',');
        out.push_str(&fmt_float(row.deteq * s));
        if with_mc {
            match &row.mc {
                Some(mc) => {
                    let mc = scaled_report(mc, s);
                    out.push_str(&format!(
                        ",{},{},{},{}",
                        fmt_float(mc.mean),
                        fmt_float(mc.std),
                        fmt_float(mc.stderr),
                        mc.trials
                    ));
                }
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    out
}

fn render_json(
    rows: &[SweepRow],
    grid_label: &str,
    key_label: &str,
    model: &str,
    units: Units,
) -> String {
    let scale = unit_scale(units);
    let json_rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let s = if row.convertible { scale } else { 1.0 };
            let mut obj = json!({
                grid_label: row.grid_db,
                key_label: row.key,
                "deteq": row.deteq * s,
            });
            if let Some(mc) = &row.mc {
                obj["mc"] = serde_json::to_value(scaled_report(mc, s)).expect("mc serializes");
            }
            if let Some(wf) = &row.waterfill {
                obj["waterfill"] = json!({
                    "budgets": wf.budgets,
                    "loadings": wf.loadings,
                    "water_levels": wf.water_levels,
                    "sum_power": wf.sum_power,
                    "outer_iterations": wf.outer_iterations,
                });
            }
            obj
        })
        .collect();
    let doc = json!({
        "model": model,
        "units": match units { Units::Nats => "nats", Units::Bits => "bits" },
        "rows": json_rows,
    });
    serde_json::to_string_pretty(&doc).expect("json renders")
}

/// Runs a parsed spec end to end, returning the rendered artifact without
/// touching the filesystem.
pub fn run_spec(spec: &ExperimentSpec, settings: &RunSettings) -> Result<RunOutput, RunFailure> {
    let problems = spec.validate();
    if !problems.is_empty() {
        return Err(RunFailure::Validation(problems));
    }
    let units = settings.units_override.unwrap_or(spec.units);
    let grid = spec.sweep.build_grid().expect("validated above");

    let (rows, grid_label, key_label, model) = match &spec.model {
        ModelSpec::Relay(rs) => (
            relay_rows(rs, &grid, spec.mc, &settings.opts)?,
            "rho0_db",
            "hop",
            "relay",
        ),
        ModelSpec::Mac(ms) => (
            mac_rows(ms, &grid, spec.mc, spec.waterfill.as_ref(), &settings.opts)?,
            "rho_db",
            "metric",
            "mac",
        ),
        ModelSpec::RayleighProduct(rp) => (
            rayleigh_rows(rp, &grid, spec.mc, &settings.opts)?,
            "rho_db",
            "metric",
            "rayleigh-product",
        ),
    };

    let rendered = match spec.output.format {
        OutputFormat::Csv => render_csv(&rows, grid_label, key_label, spec.mc.is_some(), units),
        OutputFormat::Json => render_json(&rows, grid_label, key_label, model, units),
    };
    Ok(RunOutput {
        rows,
        rendered,
        path: spec.output.path.clone(),
    })
}

/// Runs a spec and writes its output file (creating parent directories).
pub fn run_spec_to_file(
    spec: &ExperimentSpec,
    settings: &RunSettings,
) -> Result<RunOutput, RunFailure> {
    let out = run_spec(spec, settings)?;
    if let Some(parent) = std::path::Path::new(&out.path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| RunFailure::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(&out.path, out.rendered.as_bytes())
        .map_err(|e| RunFailure::Io(format!("{}: {e}", out.path)))?;
    Ok(out)
}

/// Rows behind the multi-keyhole experiment: one block per scatterer count.
pub fn fig3_rows(
    trials: u64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<(usize, SweepRow)>, RunFailure> {
    let grid = figures::fig3_grid();
    let mut rows = Vec::new();
    for (ni, &n1) in figures::FIG3_SCATTERERS.iter().enumerate() {
        for (gi, &db) in grid.iter().enumerate() {
            let fail = solver_failure("rho_db", db);
            let rho = db_to_linear(db);
            let cfg = figures::fig3_config(n1, rho).map_err(&fail)?;
            let deteq = mac::mutual_info_deteq(&cfg, opts).map_err(&fail)?;
            let point = (ni * grid.len() + gi) as u64;
            let cfg_mc = cfg.clone();
            let precoders = vec![ComplexMatrix::identity(4)];
            let report = sim::ergodic_mc_at_point(
                move |rng| {
                    let channels = sim::sample_double_scattering(&cfg_mc, rng);
                    sim::mac_mutual_info_exact(&channels, &precoders, rho)
                },
                trials,
                seed,
                point,
            );
            rows.push((
                n1,
                SweepRow {
                    grid_db: db,
                    key: "mutual_info".into(),
                    deteq,
                    mc: Some(report),
                    waterfill: None,
                    convertible: true,
                },
            ));
        }
    }
    Ok(rows)
}

/// Renders the multi-keyhole rows with a leading scatterer column.
pub fn fig3_csv(rows: &[(usize, SweepRow)], units: Units) -> String {
    let scale = unit_scale(units);
    let mut out = String::from("scatterers,rho_db,deteq,mc_mean,mc_std,mc_stderr,trials\n");
    for (n1, row) in rows {
        let s = if row.convertible { scale } else { 1.0 };
        let mc = row.mc.as_ref().expect("fig3 rows always carry mc");
        let mc = scaled_report(mc, s);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            n1,
            fmt_float(row.grid_db),
            fmt_float(row.deteq * s),
            fmt_float(mc.mean),
            fmt_float(mc.std),
            fmt_float(mc.stderr),
            mc.trials
        ));
    }
    out
}

/// Rows behind the three-user double-scattering experiment: uniform and
/// water-filled mutual information plus MMSE sum-rates, all sharing channel
/// realizations per grid point.
pub fn fig4_rows(trials: u64, seed: u64, opts: &SolverOptions) -> Result<Vec<SweepRow>, RunFailure> {
    let grid = figures::fig4_grid();
    let mut rows = Vec::new();
    for (pi, &db) in grid.iter().enumerate() {
        let fail = solver_failure("rho_db", db);
        let rho = db_to_linear(db);
        let cfg = figures::fig4_config(rho).map_err(&fail)?;

        let mi_uniform = mac::mutual_info_deteq(&cfg, opts).map_err(&fail)?;
        let rate_uniform = mac::sum_rate_deteq(&cfg, opts).map_err(&fail)?;
        let wf = mac::waterfill_optimal_q(&cfg, &figures::fig4_budgets(), figures::FIG4_WATERFILL_EPS, opts)
            .map_err(&fail)?;
        let optimal = cfg.with_precoders(wf.precoders.clone()).map_err(&fail)?;
        let mi_opt = mac::mutual_info_deteq(&optimal, opts).map_err(&fail)?;
        let rate_opt = mac::sum_rate_deteq(&optimal, opts).map_err(&fail)?;

        let uniform_factors = effective_channel_factors(&cfg).map_err(&fail)?;
        let optimal_factors = effective_channel_factors(&optimal).map_err(&fail)?;
        let uniform_q: Vec<ComplexMatrix> =
            (0..cfg.transmitters()).map(|k| cfg.q(k).clone()).collect();
        let optimal_q = wf.precoders.clone();

        let cfg_mc = cfg.clone();
        let reports = sim::ergodic_mc_vec_at_point(
            move |rng| {
                let channels = sim::sample_double_scattering(&cfg_mc, rng);
                vec![
                    sim::mac_mutual_info_exact(&channels, &uniform_q, rho),
                    sim::mac_mutual_info_exact(&channels, &optimal_q, rho),
                    mac_sum_rate_mc_metric(&channels, &uniform_factors, rho, 4),
                    mac_sum_rate_mc_metric(&channels, &optimal_factors, rho, 4),
                ]
            },
            4,
            trials,
            seed,
            pi as u64,
        );

        let payload = WaterfillPayload {
            budgets: figures::fig4_budgets(),
            loadings: wf.loadings.clone(),
            water_levels: wf.water_levels.clone(),
            sum_power: wf
                .loadings
                .iter()
                .map(|p| p.iter().sum::<f64>() / 3.0)
                .collect(),
            outer_iterations: wf.outer_iterations,
        };

        let entries = [
            ("mutual_info_uniform", mi_uniform, None),
            ("mutual_info_waterfill", mi_opt, Some(payload)),
            ("sum_rate_uniform", rate_uniform, None),
            ("sum_rate_waterfill", rate_opt, None),
        ];
        for (mi_idx, (key, deteq, wf_payload)) in entries.into_iter().enumerate() {
            rows.push(SweepRow {
                grid_db: db,
                key: key.into(),
                deteq,
                mc: Some(reports[mi_idx]),
                waterfill: wf_payload,
                convertible: true,
            });
        }
    }
    Ok(rows)
}

/// Which reference experiment to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(format!("unknown figure '{other}' (expected fig2|fig3|fig4)")),
        }
    }
}

/// Regenerates the data table behind one of the reference figures and writes
/// `<out_dir>/<figure>.csv`. Returns the written path.
pub fn reproduce_figure(
    which: Figure,
    trials: u64,
    seed: u64,
    out_dir: &str,
    units: Units,
    opts: &SolverOptions,
) -> Result<String, RunFailure> {
    std::fs::create_dir_all(out_dir).map_err(|e| RunFailure::Io(format!("{out_dir}: {e}")))?;
    let (name, rendered) = match which {
        Figure::Fig2 => {
            let spec = figures::fig2_spec(
                Some(McSpec { trials, seed }),
                "fig2.csv",
                OutputFormat::Csv,
            );
            let rows = match &spec.model {
                ModelSpec::Relay(rs) => relay_rows(
                    rs,
                    &spec.sweep.build_grid().expect("fig2 grid is valid"),
                    spec.mc,
                    opts,
                )?,
                _ => unreachable!("fig2 is a relay spec"),
            };
            ("fig2.csv", render_csv(&rows, "rho0_db", "hop", true, units))
        }
        Figure::Fig3 => {
            let rows = fig3_rows(trials, seed, opts)?;
            ("fig3.csv", fig3_csv(&rows, units))
        }
        Figure::Fig4 => {
            let rows = fig4_rows(trials, seed, opts)?;
            ("fig4.csv", render_csv(&rows, "rho_db", "metric", true, units))
        }
    };
    let path = std::path::Path::new(out_dir).join(name);
    std::fs::write(&path, rendered.as_bytes())
        .map_err(|e| RunFailure::Io(format!("{}: {e}", path.display())))?;
    Ok(path.display().to_string())
}
