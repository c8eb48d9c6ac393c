//! JSON experiment descriptions: schema types, semantic validation, and
//! conversion into solver configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::herm_eigen;
use crate::mac::{MacConfig, MacTransmitter};
use crate::matrix::ComplexMatrix;
use crate::relay::{RelayConfig, DEFAULT_RECURSION_CAP};
use crate::sim::correlation_matrix_g;
use num_complex::Complex64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub mc: Option<McSpec>,
    #[serde(default)]
    pub waterfill: Option<WaterfillSpec>,
    pub output: OutputSpec,
    #[serde(default)]
    pub units: Units,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", content = "config", rename_all = "kebab-case")]
pub enum ModelSpec {
    Relay(RelaySpec),
    Mac(MacSpec),
    RayleighProduct(RayleighSpec),
}

/// Relay chain description. Budgets are relative to the swept source SNR:
/// `rho_k = rho_scales[k] * rho_0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaySpec {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub rho_scales: Vec<f64>,
    #[serde(default)]
    pub recursion_cap: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MacSpec {
    pub n_rx: usize,
    pub transmitters: Vec<TransmitterSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmitterSpec {
    pub scatterers: usize,
    pub antennas: usize,
    pub r: MatrixSpec,
    pub s: MatrixSpec,
    pub t: MatrixSpec,
    pub q: MatrixSpec,
}

/// Correlation/precoder descriptor: identity, uniform power, a generator
/// `G(phi, d, n)`, an explicit diagonal, or dense real/imag entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatrixSpec {
    Identity,
    Uniform { p: f64 },
    G { phi: f64, d: f64, n: usize },
    Diag { values: Vec<f64> },
    Dense { re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayleighSpec {
    pub n: usize,
    pub s: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `rho0_db` for relay sweeps, `rho_db` for the MAC models.
    pub variable: String,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McSpec {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaterfillSpec {
    pub budgets: Vec<f64>,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl SweepSpec {
    /// Materializes the grid (explicit list, or `from..=to` by `step`).
    pub fn build_grid(&self) -> Result<Vec<f64>> {
        let grid = if let Some(g) = &self.grid {
            g.clone()
        } else {
            match (self.from, self.to, self.step) {
                (Some(from), Some(to), Some(step)) => {
                    if !(step > 0.0) {
                        return Err(Error::InvalidConfig("sweep.step: must be > 0".into()));
                    }
                    if to < from {
                        return Err(Error::InvalidConfig(
                            "sweep.to: must be >= sweep.from".into(),
                        ));
                    }
                    let mut g = Vec::new();
                    let mut i = 0u32;
                    loop {
                        let v = from + step * i as f64;
                        if v > to + 1e-9 * step {
                            break;
                        }
                        g.push(v);
                        i += 1;
                    }
                    g
                }
                _ => {
                    return Err(Error::InvalidConfig(
                        "sweep: provide either a grid list or from/to/step".into(),
                    ))
                }
            }
        };
        if grid.is_empty() {
            return Err(Error::InvalidConfig("sweep.grid: must be nonempty".into()));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidConfig(
                    "sweep.grid: must be strictly increasing".into(),
                ));
            }
        }
        Ok(grid)
    }
}

fn dense_matrix(
    re: &[Vec<f64>],
    im: Option<&Vec<Vec<f64>>>,
    what: &str,
) -> Result<ComplexMatrix> {
    let rows = re.len();
    if rows == 0 {
        return Err(Error::InvalidConfig(format!("{what}: dense matrix is empty")));
    }
    let cols = re[0].len();
    if re.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidConfig(format!(
            "{what}: dense rows have inconsistent lengths"
        )));
    }
    if rows != cols {
        return Err(Error::InvalidConfig(format!(
            "{what}: correlation matrix must be square, got {rows}x{cols}"
        )));
    }
    if let Some(im) = im {
        if im.len() != rows || im.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidConfig(format!(
                "{what}: imaginary part shape does not match the real part"
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(re[i][j], im.map_or(0.0, |im| im[i][j]))
    }))
}

impl MatrixSpec {
    /// Resolves to a square matrix of the expected size.
    pub fn build_square(&self, size: usize, what: &str) -> Result<ComplexMatrix> {
        let m = match self {
            MatrixSpec::Identity => ComplexMatrix::identity(size),
            MatrixSpec::Uniform { p } => {
                if !(*p >= 0.0) {
                    return Err(Error::InvalidConfig(format!("{what}.p: must be >= 0")));
                }
                ComplexMatrix::identity(size).scaled(*p)
            }
            MatrixSpec::G { phi, d, n } => correlation_matrix_g(*phi, *d, *n),
            MatrixSpec::Diag { values } => {
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "{what}.values: diagonal entries must be finite and >= 0"
                    )));
                }
                ComplexMatrix::from_real_diagonal(values)
            }
            MatrixSpec::Dense { re, im } => dense_matrix(re, im.as_ref(), what)?,
        };
        if m.rows() != size {
            return Err(Error::InvalidConfig(format!(
                "{what}: expected a {size}x{size} matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(m)
    }

    /// Resolves to the diagonal of a scatterer correlation: direct for
    /// identity/diagonal inputs, eigenvalues (descending, clamped at 0) for
    /// matrix-valued inputs. Unitary invariance of the inner Gaussian
    /// factors makes the eigenvalue reduction exact for the channel
    /// statistics.
    pub fn build_diagonal(&self, size: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            MatrixSpec::Identity => Ok(vec![1.0; size]),
            MatrixSpec::Uniform { p } => {
                if !(*p >= 0.0) {
                    return Err(Error::InvalidConfig(format!("{what}.p: must be >= 0")));
                }
                Ok(vec![*p; size])
            }
            MatrixSpec::Diag { values } => {
                if values.len() != size {
                    return Err(Error::InvalidConfig(format!(
                        "{what}.values: expected {size} entries, got {}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "{what}.values: diagonal entries must be finite and >= 0"
                    )));
                }
                Ok(values.clone())
            }
            MatrixSpec::G { .. } | MatrixSpec::Dense { .. } => {
                let m = self.build_square(size, what)?;
                let (vals, _) = herm_eigen(&m)?;
                Ok(vals.into_iter().map(|v| v.max(0.0)).collect())
            }
        }
    }
}

impl RelaySpec {
    pub fn build(&self, rho0: f64) -> Result<RelayConfig> {
        let rhos: Vec<f64> = self.rho_scales.iter().map(|s| s * rho0).collect();
        RelayConfig::with_recursion_cap(
            self.dims.clone(),
            self.alphas.clone(),
            rhos,
            self.recursion_cap.unwrap_or(DEFAULT_RECURSION_CAP),
        )
    }
}

impl MacSpec {
    pub fn build(&self, rho: f64) -> Result<MacConfig> {
        let tx = self
            .transmitters
            .iter()
            .enumerate()
            .map(|(k, t)| {
                Ok(MacTransmitter {
                    scatterers: t.scatterers,
                    antennas: t.antennas,
                    r: t.r.build_square(self.n_rx, &format!("transmitters[{k}].r"))?,
                    s: t.s
                        .build_diagonal(t.scatterers, &format!("transmitters[{k}].s"))?,
                    t: t.t
                        .build_square(t.antennas, &format!("transmitters[{k}].t"))?,
                    q: t.q
                        .build_square(t.antennas, &format!("transmitters[{k}].q"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MacConfig::new(self.n_rx, rho, tx)
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("spec parse error: {e}"))
    }

    /// Full structural and semantic validation; returns every violation
    /// found rather than stopping at the first.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();

        let expected_var = match &self.model {
            ModelSpec::Relay(_) => "rho0_db",
            _ => "rho_db",
        };
        if self.sweep.variable != expected_var {
            problems.push(format!(
                "sweep.variable: expected \"{expected_var}\" for this model, got \"{}\"",
                self.sweep.variable
            ));
        }
        let grid = match self.sweep.build_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        };

        match &self.model {
            ModelSpec::Relay(spec) => {
                for (i, a) in spec.alphas.iter().enumerate() {
                    if !a.is_finite() || *a < 0.0 {
                        problems.push(format!("config.alphas[{i}]: must be finite and >= 0"));
                    }
                }
                for (i, s) in spec.rho_scales.iter().enumerate() {
                    if !s.is_finite() || *s < 0.0 {
                        problems.push(format!("config.rho_scales[{i}]: must be finite and >= 0"));
                    }
                }
                // probe at a neutral SNR to catch structural issues
                if let Err(e) = spec.build(1.0) {
                    problems.push(format!("config: {e}"));
                }
                if self.waterfill.is_some() {
                    problems.push("waterfill: only applies to the mac model".into());
                }
            }
            ModelSpec::Mac(spec) => {
                match spec.build(1.0) {
                    Ok(_) => {}
                    Err(e) => problems.push(format!("config: {e}")),
                }
                if let Some(wf) = &self.waterfill {
                    if wf.budgets.len() != spec.transmitters.len() {
                        problems.push(format!(
                            "waterfill.budgets: expected {} entries, got {}",
                            spec.transmitters.len(),
                            wf.budgets.len()
                        ));
                    }
                    for (i, p) in wf.budgets.iter().enumerate() {
                        if !(*p > 0.0) {
                            problems.push(format!("waterfill.budgets[{i}]: must be > 0"));
                        }
                    }
                    if !(wf.eps > 0.0) {
                        problems.push("waterfill.eps: must be > 0".into());
                    }
                }
            }
            ModelSpec::RayleighProduct(spec) => {
                if spec.n == 0 || spec.s == 0 || spec.k == 0 {
                    problems.push("config: n, s, k must all be >= 1".into());
                }
                if self.waterfill.is_some() {
                    problems.push("waterfill: only applies to the mac model".into());
                }
            }
        }

        if let Some(mc) = &self.mc {
            if mc.trials < 2 {
                problems.push("mc.trials: must be >= 2".into());
            }
        }
        if let (Some(grid), ModelSpec::RayleighProduct(_)) = (&grid, &self.model) {
            for &db in grid {
                if 10f64.powf(db / 10.0) <= 0.0 {
                    problems.push(format!("sweep.grid: rho must be positive at {db} dB"));
                }
            }
        }
        if self.output.path.is_empty() {
            problems.push("output.path: must not be empty".into());
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_relay_json() -> String {
        r#"{
            "model": "relay",
            "config": {
                "dims": [4, 8, 12, 8, 4],
                "alphas": [1.0, 0.7, 0.5, 0.7],
                "rho_scales": [1.0, 0.7, 0.5, 0.7]
            },
            "sweep": {"variable": "rho0_db", "from": -10, "to": 30, "step": 5},
            "output": {"path": "out.csv", "format": "csv"}
        }"#
        .to_string()
    }

    #[test]
    fn relay_spec_parses_and_validates() {
        let spec = ExperimentSpec::from_json(&minimal_relay_json()).unwrap();
        assert!(spec.validate().is_empty());
        let grid = spec.sweep.build_grid().unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], -10.0);
        assert_eq!(grid[8], 30.0);
    }

    #[test]
    fn negative_budget_scale_is_named() {
        let text = minimal_relay_json().replace(
            r#""rho_scales": [1.0, 0.7, 0.5, 0.7]"#,
            r#""rho_scales": [1.0, 0.7, -0.5, 0.7]"#,
        );
        let spec = ExperimentSpec::from_json(&text).unwrap();
        let problems = spec.validate();
        assert!(
            problems.iter().any(|p| p.contains("rho_scales[2]")),
            "{problems:?}"
        );
    }

    #[test]
    fn recursion_cap_violation_cites_the_limit() {
        let text = r#"{
            "model": "relay",
            "config": {
                "dims": [4,4,4,4,4,4,4,4,4,4,4,4,4],
                "alphas": [1,1,1,1,1,1,1,1,1,1,1,1],
                "rho_scales": [1,1,1,1,1,1,1,1,1,1,1,1]
            },
            "sweep": {"variable": "rho0_db", "grid": [0.0]},
            "output": {"path": "out.csv", "format": "csv"}
        }"#;
        let spec = ExperimentSpec::from_json(text).unwrap();
        let problems = spec.validate();
        assert!(
            problems
                .iter()
                .any(|p| p.contains("recursion cap") && p.contains("12")),
            "{problems:?}"
        );
    }

    #[test]
    fn non_square_dense_matrix_is_named() {
        let text = r#"{
            "model": "mac",
            "config": {
                "n_rx": 2,
                "transmitters": [{
                    "scatterers": 2,
                    "antennas": 2,
                    "r": {"type": "dense", "re": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]},
                    "s": {"type": "identity"},
                    "t": {"type": "identity"},
                    "q": {"type": "identity"}
                }]
            },
            "sweep": {"variable": "rho_db", "grid": [0.0, 10.0]},
            "output": {"path": "out.json", "format": "json"}
        }"#;
        let spec = ExperimentSpec::from_json(text).unwrap();
        let problems = spec.validate();
        assert!(
            problems
                .iter()
                .any(|p| p.contains("transmitters[0].r") && p.contains("square")),
            "{problems:?}"
        );
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let text = minimal_relay_json().replace(
            r#""from": -10, "to": 30, "step": 5"#,
            r#""grid": [0.0, -5.0]"#,
        );
        let spec = ExperimentSpec::from_json(&text).unwrap();
        let problems = spec.validate();
        assert!(problems.iter().any(|p| p.contains("strictly increasing")));
    }

    #[test]
    fn g_descriptor_builds_unit_diagonal_correlation() {
        let spec = MatrixSpec::G {
            phi: std::f64::consts::PI / 2.0,
            d: 0.25,
            n: 4,
        };
        let m = spec.build_square(4, "r").unwrap();
        for i in 0..4 {
            assert!((m[(i, i)].re - 1.0).abs() < 1e-12);
        }
        // and as a scatterer input it reduces to eigenvalues
        let diag = spec.build_diagonal(4, "s").unwrap();
        assert_eq!(diag.len(), 4);
        let total: f64 = diag.iter().sum();
        assert!((total - 4.0).abs() < 1e-10, "eigenvalue sum {total}");
    }
}
