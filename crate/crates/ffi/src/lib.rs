//! C ABI over the deterministic-equivalent solvers.
//!
//! Conventions: configurations are opaque handles created and freed here;
//! every fallible call returns a [`DeteqStatus`] and writes results through
//! out-pointers; complex matrices cross the boundary as row-major
//! interleaved `re, im` doubles (length `2 * rows * cols`). A textual
//! description of the most recent failure on the calling thread is
//! available through [`deteq_last_error`].

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use deteq_core::error::Error;
use deteq_core::mac::{self, MacConfig, MacTransmitter};
use deteq_core::matrix::ComplexMatrix;
use deteq_core::relay::{self, RelayConfig};
use deteq_core::SolverOptions;
use num_complex::Complex64;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeteqStatus {
    Ok = 0,
    /// A pointer argument was null or a size was out of range.
    InvalidArgument = 1,
    /// The configuration failed validation.
    InvalidConfig = 2,
    /// A fixed-point iteration hit its cap.
    NonConvergence = 3,
    /// A matrix expected to be (semi)definite was not.
    NotPositiveDefinite = 4,
    /// Root bracketing failed.
    NoRoot = 5,
    /// T and Q of some transmitter do not share an eigenbasis.
    NotCodiagonalizable = 6,
    /// An unexpected internal failure.
    InternalError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn status_from_error(err: &Error) -> DeteqStatus {
    let status = match err {
        Error::InvalidConfig(_) => DeteqStatus::InvalidConfig,
        Error::NonConvergence { .. } => DeteqStatus::NonConvergence,
        Error::NotPositiveDefinite | Error::NotPsd { .. } => {
            DeteqStatus::NotPositiveDefinite
        }
        Error::NoRootInInterval { .. } => DeteqStatus::NoRoot,
        Error::NotCodiagonalizable { .. } => DeteqStatus::NotCodiagonalizable,
    };
    set_last_error(err.to_string());
    status
}

fn guard<F: FnOnce() -> DeteqStatus>(f: F) -> DeteqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal error: {msg}"));
            DeteqStatus::InternalError
        }
    }
}

fn invalid_argument(what: &str) -> DeteqStatus {
    set_last_error(format!("invalid argument: {what}"));
    DeteqStatus::InvalidArgument
}

/// Copies the last error message of this thread into `buf` (truncated to
/// `cap - 1` bytes, NUL-terminated) and returns the full message length.
/// Passing a null buffer just queries the length.
#[no_mangle]
pub unsafe extern "C" fn deteq_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

unsafe fn matrix_from_interleaved(ptr: *const f64, rows: usize, cols: usize) -> ComplexMatrix {
    let data = unsafe { std::slice::from_raw_parts(ptr, 2 * rows * cols) };
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let base = 2 * (i * cols + j);
        Complex64::new(data[base], data[base + 1])
    })
}

/// Opaque relay-chain configuration.
pub struct DeteqRelayConfig {
    inner: RelayConfig,
}

/// Creates a K-hop relay configuration. `dims` has `hops + 1` antenna
/// counts (source first), `alphas` and `rhos` have `hops` entries.
#[no_mangle]
pub unsafe extern "C" fn deteq_relay_config_new(
    hops: usize,
    dims: *const usize,
    alphas: *const f64,
    rhos: *const f64,
    out: *mut *mut DeteqRelayConfig,
) -> DeteqStatus {
    guard(|| {
        if hops == 0 || dims.is_null() || alphas.is_null() || rhos.is_null() || out.is_null() {
            return invalid_argument("deteq_relay_config_new");
        }
        let dims = unsafe { std::slice::from_raw_parts(dims, hops + 1) }.to_vec();
        let alphas = unsafe { std::slice::from_raw_parts(alphas, hops) }.to_vec();
        let rhos = unsafe { std::slice::from_raw_parts(rhos, hops) }.to_vec();
        match RelayConfig::new(dims, alphas, rhos) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(DeteqRelayConfig { inner })) };
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn deteq_relay_config_free(cfg: *mut DeteqRelayConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Writes the asymptotic power normalizations `betabar_0..betabar_{K-1}`.
#[no_mangle]
pub unsafe extern "C" fn deteq_relay_asymptotic_betas(
    cfg: *const DeteqRelayConfig,
    out: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return invalid_argument("deteq_relay_asymptotic_betas");
        }
        let cfg = unsafe { &(*cfg).inner };
        let betas = relay::asymptotic_betas(cfg);
        let out = unsafe { std::slice::from_raw_parts_mut(out, cfg.hops()) };
        out.copy_from_slice(betas.values());
        DeteqStatus::Ok
    })
}

/// Mutual-information deterministic equivalent after `hop` (1-based).
#[no_mangle]
pub unsafe extern "C" fn deteq_relay_mutual_info(
    cfg: *const DeteqRelayConfig,
    hop: usize,
    out: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return invalid_argument("deteq_relay_mutual_info");
        }
        let cfg = unsafe { &(*cfg).inner };
        if hop == 0 || hop > cfg.hops() {
            return invalid_argument("hop out of range");
        }
        match relay::mutual_info_deteq(hop, cfg, &SolverOptions::default()) {
            Ok(r) => {
                unsafe { *out = r.ibar };
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

/// Opaque double-scattering MAC configuration builder.
pub struct DeteqMacConfig {
    n_rx: usize,
    rho: f64,
    transmitters: Vec<MacTransmitter>,
}

impl DeteqMacConfig {
    fn build(&self) -> Result<MacConfig, Error> {
        MacConfig::new(self.n_rx, self.rho, self.transmitters.clone())
    }
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_config_new(
    n_rx: usize,
    rho: f64,
    out: *mut *mut DeteqMacConfig,
) -> DeteqStatus {
    guard(|| {
        if n_rx == 0 || out.is_null() {
            return invalid_argument("deteq_mac_config_new");
        }
        unsafe {
            *out = Box::into_raw(Box::new(DeteqMacConfig {
                n_rx,
                rho,
                transmitters: Vec::new(),
            }));
        }
        DeteqStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_config_free(cfg: *mut DeteqMacConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_set_rho(cfg: *mut DeteqMacConfig, rho: f64) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() {
            return invalid_argument("deteq_mac_set_rho");
        }
        unsafe { (*cfg).rho = rho };
        DeteqStatus::Ok
    })
}

/// Appends a transmitter. Matrix arguments are row-major interleaved
/// complex doubles; `r` is `n_rx x n_rx`, `t` and `q` are
/// `antennas x antennas`, and `s_diag` is a real vector of `scatterers`
/// entries. Null pointers select identities (uniform unit power for `q`).
#[no_mangle]
pub unsafe extern "C" fn deteq_mac_add_transmitter(
    cfg: *mut DeteqMacConfig,
    scatterers: usize,
    antennas: usize,
    r: *const f64,
    s_diag: *const f64,
    t: *const f64,
    q: *const f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || scatterers == 0 || antennas == 0 {
            return invalid_argument("deteq_mac_add_transmitter");
        }
        let handle = unsafe { &mut *cfg };
        let tx = MacTransmitter {
            scatterers,
            antennas,
            r: if r.is_null() {
                ComplexMatrix::identity(handle.n_rx)
            } else {
                unsafe { matrix_from_interleaved(r, handle.n_rx, handle.n_rx) }
            },
            s: if s_diag.is_null() {
                vec![1.0; scatterers]
            } else {
                unsafe { std::slice::from_raw_parts(s_diag, scatterers) }.to_vec()
            },
            t: if t.is_null() {
                ComplexMatrix::identity(antennas)
            } else {
                unsafe { matrix_from_interleaved(t, antennas, antennas) }
            },
            q: if q.is_null() {
                ComplexMatrix::identity(antennas)
            } else {
                unsafe { matrix_from_interleaved(q, antennas, antennas) }
            },
        };
        handle.transmitters.push(tx);
        // validate eagerly so the failure surfaces on this call
        match handle.build() {
            Ok(_) => DeteqStatus::Ok,
            Err(e) => {
                handle.transmitters.pop();
                status_from_error(&e)
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_transmitter_count(cfg: *const DeteqMacConfig) -> usize {
    if cfg.is_null() {
        return 0;
    }
    unsafe { (*cfg).transmitters.len() }
}

/// Solves the fundamental equations; `gbar`, `g`, `delta` receive one value
/// per transmitter.
#[no_mangle]
pub unsafe extern "C" fn deteq_mac_solve_fundamental(
    cfg: *const DeteqMacConfig,
    gbar: *mut f64,
    g: *mut f64,
    delta: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || gbar.is_null() || g.is_null() || delta.is_null() {
            return invalid_argument("deteq_mac_solve_fundamental");
        }
        let handle = unsafe { &*cfg };
        let built = match handle.build() {
            Ok(c) => c,
            Err(e) => return status_from_error(&e),
        };
        match mac::solve_fundamental(&built, &SolverOptions::default()) {
            Ok(sol) => {
                let k = built.transmitters();
                unsafe {
                    std::slice::from_raw_parts_mut(gbar, k).copy_from_slice(&sol.gbar);
                    std::slice::from_raw_parts_mut(g, k).copy_from_slice(&sol.g);
                    std::slice::from_raw_parts_mut(delta, k).copy_from_slice(&sol.delta);
                }
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_mutual_info(
    cfg: *const DeteqMacConfig,
    out: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return invalid_argument("deteq_mac_mutual_info");
        }
        let handle = unsafe { &*cfg };
        let built = match handle.build() {
            Ok(c) => c,
            Err(e) => return status_from_error(&e),
        };
        match mac::mutual_info_deteq(&built, &SolverOptions::default()) {
            Ok(v) => {
                unsafe { *out = v };
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn deteq_mac_sum_rate(
    cfg: *const DeteqMacConfig,
    out: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return invalid_argument("deteq_mac_sum_rate");
        }
        let handle = unsafe { &*cfg };
        let built = match handle.build() {
            Ok(c) => c,
            Err(e) => return status_from_error(&e),
        };
        match mac::sum_rate_deteq(&built, &SolverOptions::default()) {
            Ok(v) => {
                unsafe { *out = v };
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

/// Iterative water-filling. `budgets` has one entry per transmitter;
/// `loadings` receives the per-mode powers flattened in transmitter order
/// (`sum_k antennas_k` doubles) and `water_levels` one level per
/// transmitter.
#[no_mangle]
pub unsafe extern "C" fn deteq_mac_waterfill(
    cfg: *const DeteqMacConfig,
    budgets: *const f64,
    eps: f64,
    loadings: *mut f64,
    water_levels: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if cfg.is_null() || budgets.is_null() || loadings.is_null() || water_levels.is_null() {
            return invalid_argument("deteq_mac_waterfill");
        }
        let handle = unsafe { &*cfg };
        let built = match handle.build() {
            Ok(c) => c,
            Err(e) => return status_from_error(&e),
        };
        let k = built.transmitters();
        let budgets = unsafe { std::slice::from_raw_parts(budgets, k) };
        match mac::waterfill_optimal_q(&built, budgets, eps, &SolverOptions::default()) {
            Ok(wf) => {
                let total: usize = (0..k).map(|i| built.antennas(i)).sum();
                let out = unsafe { std::slice::from_raw_parts_mut(loadings, total) };
                let mut at = 0;
                for p in &wf.loadings {
                    out[at..at + p.len()].copy_from_slice(p);
                    at += p.len();
                }
                unsafe {
                    std::slice::from_raw_parts_mut(water_levels, k)
                        .copy_from_slice(&wf.water_levels);
                }
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

/// Closed-form Rayleigh-product equivalents: `gbar`, mutual information,
/// and per-stream MMSE SINR.
#[no_mangle]
pub unsafe extern "C" fn deteq_rayleigh_product(
    n_antennas: usize,
    scatterers: usize,
    users: usize,
    rho: f64,
    out_gbar: *mut f64,
    out_mutual_info: *mut f64,
    out_sinr: *mut f64,
) -> DeteqStatus {
    guard(|| {
        if out_gbar.is_null() || out_mutual_info.is_null() || out_sinr.is_null() {
            return invalid_argument("deteq_rayleigh_product");
        }
        match mac::rayleigh_product_closed_form(n_antennas, scatterers, users, rho) {
            Ok(r) => {
                unsafe {
                    *out_gbar = r.gbar;
                    *out_mutual_info = r.mutual_info;
                    *out_sinr = r.sinr;
                }
                DeteqStatus::Ok
            }
            Err(e) => status_from_error(&e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_round_trip_over_the_c_surface() {
        let dims = [4usize, 8, 12, 8, 4];
        let alphas = [1.0, 0.7, 0.5, 0.7];
        let rho0 = 10.0;
        let rhos = [rho0, 0.7 * rho0, 0.5 * rho0, 0.7 * rho0];
        let mut cfg: *mut DeteqRelayConfig = std::ptr::null_mut();
        let status = unsafe {
            deteq_relay_config_new(4, dims.as_ptr(), alphas.as_ptr(), rhos.as_ptr(), &mut cfg)
        };
        assert_eq!(status, DeteqStatus::Ok);

        let mut betas = [0.0f64; 4];
        assert_eq!(
            unsafe { deteq_relay_asymptotic_betas(cfg, betas.as_mut_ptr()) },
            DeteqStatus::Ok
        );
        let reference = relay::asymptotic_betas(&relay::fig2_config(rho0));
        assert_eq!(betas.as_slice(), reference.values());

        let mut mi = 0.0f64;
        assert_eq!(
            unsafe { deteq_relay_mutual_info(cfg, 2, &mut mi) },
            DeteqStatus::Ok
        );
        let direct = relay::mutual_info_deteq(2, &relay::fig2_config(rho0), &SolverOptions::default())
            .unwrap()
            .ibar;
        assert_eq!(mi.to_bits(), direct.to_bits());

        unsafe { deteq_relay_config_free(cfg) };
    }

    #[test]
    fn invalid_relay_config_reports_a_message() {
        let dims = [4usize, 0, 4];
        let alphas = [1.0, 1.0];
        let rhos = [1.0, 1.0];
        let mut cfg: *mut DeteqRelayConfig = std::ptr::null_mut();
        let status = unsafe {
            deteq_relay_config_new(2, dims.as_ptr(), alphas.as_ptr(), rhos.as_ptr(), &mut cfg)
        };
        assert_eq!(status, DeteqStatus::InvalidConfig);
        let needed = unsafe { deteq_last_error(std::ptr::null_mut(), 0) };
        assert!(needed > 0);
        let mut buf = vec![0i8; needed + 1];
        unsafe { deteq_last_error(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }
            .to_string_lossy()
            .into_owned();
        assert!(msg.contains("antenna"), "{msg}");
    }

    #[test]
    fn mac_surface_matches_library_values() {
        let mut cfg: *mut DeteqMacConfig = std::ptr::null_mut();
        assert_eq!(
            unsafe { deteq_mac_config_new(4, 3.0, &mut cfg) },
            DeteqStatus::Ok
        );
        // one uncorrelated transmitter with 4 scatterers and 4 antennas
        assert_eq!(
            unsafe {
                deteq_mac_add_transmitter(
                    cfg,
                    4,
                    4,
                    std::ptr::null(),
                    std::ptr::null(),
                    std::ptr::null(),
                    std::ptr::null(),
                )
            },
            DeteqStatus::Ok
        );
        assert_eq!(unsafe { deteq_mac_transmitter_count(cfg) }, 1);

        let mut mi = 0.0f64;
        assert_eq!(
            unsafe { deteq_mac_mutual_info(cfg, &mut mi) },
            DeteqStatus::Ok
        );
        let closed = mac::rayleigh_product_closed_form(4, 4, 1, 3.0).unwrap();
        assert!((mi - closed.mutual_info).abs() < 1e-8);

        let (mut gbar, mut g, mut delta) = ([0.0], [0.0], [0.0]);
        assert_eq!(
            unsafe {
                deteq_mac_solve_fundamental(
                    cfg,
                    gbar.as_mut_ptr(),
                    g.as_mut_ptr(),
                    delta.as_mut_ptr(),
                )
            },
            DeteqStatus::Ok
        );
        assert!((gbar[0] - closed.gbar).abs() < 1e-8);

        let budgets = [1.0];
        let mut loadings = [0.0f64; 4];
        let mut levels = [0.0f64; 1];
        assert_eq!(
            unsafe {
                deteq_mac_waterfill(
                    cfg,
                    budgets.as_ptr(),
                    1e-9,
                    loadings.as_mut_ptr(),
                    levels.as_mut_ptr(),
                )
            },
            DeteqStatus::Ok
        );
        let spent: f64 = loadings.iter().sum::<f64>() / 4.0;
        assert!((spent - 1.0).abs() < 1e-10);

        unsafe { deteq_mac_config_free(cfg) };
    }

    #[test]
    fn rayleigh_product_over_the_c_surface() {
        let (mut gbar, mut mi, mut sinr) = (0.0, 0.0, 0.0);
        let status = unsafe {
            deteq_rayleigh_product(4, 4, 1, 3.0, &mut gbar, &mut mi, &mut sinr)
        };
        assert_eq!(status, DeteqStatus::Ok);
        let reference = mac::rayleigh_product_closed_form(4, 4, 1, 3.0).unwrap();
        assert_eq!(gbar.to_bits(), reference.gbar.to_bits());

        // invalid SNR surfaces as InvalidConfig
        let status = unsafe {
            deteq_rayleigh_product(4, 4, 1, -1.0, &mut gbar, &mut mi, &mut sinr)
        };
        assert_eq!(status, DeteqStatus::InvalidConfig);
    }
}
