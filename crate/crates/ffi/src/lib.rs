//! C ABI for dwlab.
//!
//! Every function returns a [`DwlabStatus`]; on failure the message is kept
//! per thread and can be read with [`dwlab_last_error_message`]. Trajectories
//! and ledgers are opaque handles owned by the caller and released with their
//! `_free` function. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use dwlab::asymptotics::{det_gamma_audit, rate_dw, rate_joint, rate_rho, rate_theta};
use dwlab::model::{sample_noise, simulate_with_innovations};
use dwlab::rng::seeded;
use dwlab::{Error, ModelParams, NoiseFamily, NoiseSpec, StatLedger, Trajectory};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwlabStatus {
    Ok = 0,
    NullPointer = 1,
    Stability = 2,
    Domain = 3,
    Degenerate = 4,
    Singular = 5,
    Io = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwlabNoiseFamily {
    Gaussian = 0,
    /// `shape` is the tail exponent β in (0, 1).
    SymmetricWeibull = 1,
    /// `shape` is the degrees of freedom ν > 2.
    StudentT = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwlabParams {
    pub theta: f64,
    pub rho: f64,
    pub sigma2: f64,
    pub x0: f64,
    pub eps0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwlabNoise {
    pub family: DwlabNoiseFamily,
    pub shape: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DwlabLedgerValues {
    pub n: usize,
    pub l_n: f64,
    pub m_n: f64,
    pub n_n: f64,
    pub q_n: f64,
    pub s_n: f64,
    pub s_nm1: f64,
    pub p_n: f64,
    pub j_n: f64,
    pub j_nm1: f64,
    pub theta_hat: f64,
    pub rho_hat: f64,
    pub dw: f64,
    pub f_n: f64,
    pub t_n: f64,
    pub r_theta: f64,
    pub t4_n: f64,
    pub gamma4_n: f64,
    pub eps_hat0: f64,
}

/// Matrices are row-major.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DwlabSummary {
    pub theta_star: f64,
    pub rho_star: f64,
    pub d_star: f64,
    pub ell: f64,
    pub ell1: f64,
    pub ell2: f64,
    pub sigma2_theta: f64,
    pub sigma2_rho: f64,
    pub sigma2_d: f64,
    pub gamma: [f64; 4],
    pub lambda: [f64; 4],
    pub a_limit: [f64; 4],
    pub t_limit: f64,
    pub j_limit: f64,
    pub det_gamma: f64,
    /// det(Γ) from the closed form with (1 + ρ²) in the denominator.
    pub det_gamma_printed: f64,
}

/// Opaque simulated or imported trajectory.
pub struct DwlabTrajectory {
    inner: Trajectory,
}

/// Opaque statistics of one trajectory.
pub struct DwlabLedger {
    inner: StatLedger,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DwlabStatus {
    match e {
        Error::Stability(_) => DwlabStatus::Stability,
        Error::Domain(_) => DwlabStatus::Domain,
        Error::Degenerate(_) => DwlabStatus::Degenerate,
        Error::Singular(_) => DwlabStatus::Singular,
        Error::Io(_) => DwlabStatus::Io,
        Error::Csv(_) | Error::Json(_) | Error::Parse(_) => DwlabStatus::Parse,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), DwlabStatus>) -> DwlabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DwlabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("internal panic".into());
            DwlabStatus::Panic
        }
    }
}

fn fail(e: Error) -> DwlabStatus {
    let s = status_of(&e);
    set_last_error(e.to_string());
    s
}

fn null(what: &str) -> DwlabStatus {
    set_last_error(format!("{what} is null"));
    DwlabStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, DwlabStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, DwlabStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

fn to_params(p: &DwlabParams) -> ModelParams {
    ModelParams::new(p.theta, p.rho, p.sigma2).with_initial(p.x0, p.eps0)
}

fn to_noise(n: &DwlabNoise, sigma2: f64) -> NoiseSpec {
    let family = match n.family {
        DwlabNoiseFamily::Gaussian => NoiseFamily::Gaussian,
        DwlabNoiseFamily::SymmetricWeibull => NoiseFamily::SymmetricWeibull { beta: n.shape },
        DwlabNoiseFamily::StudentT => NoiseFamily::StudentT { nu: n.shape },
    };
    NoiseSpec { family, sigma2 }
}

fn checked_params(p: *const DwlabParams) -> Result<ModelParams, DwlabStatus> {
    let p = unsafe { deref(p, "params")? };
    dwlab::validate_params(to_params(p)).map_err(fail)
}

/// Length in bytes of the last error message on this thread, including the
/// terminating NUL; 0 when there is none.
#[no_mangle]
pub extern "C" fn dwlab_last_error_length() -> usize {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(0, |c| c.as_bytes_with_nul().len())
    })
}

/// Copies the last error message into `buf` as a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dwlab_last_error_message(buf: *mut c_char, len: usize) -> DwlabStatus {
    if buf.is_null() {
        return DwlabStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&b"\0"[..], |c| c.as_bytes_with_nul());
        if bytes.len() > len {
            return DwlabStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        DwlabStatus::Ok
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dwlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Checks |θ| < 1, |ρ| < 1, σ² > 0 and finite initial values.
#[no_mangle]
pub unsafe extern "C" fn dwlab_validate_params(params: *const DwlabParams) -> DwlabStatus {
    guard(|| checked_params(params).map(|_| ()))
}

/// Simulates `n` steps with innovations from `noise` (variance `params.sigma2`)
/// using the generator seeded with `seed`.
#[no_mangle]
pub unsafe extern "C" fn dwlab_simulate(
    params: *const DwlabParams,
    noise: *const DwlabNoise,
    n: usize,
    seed: u64,
    out_traj: *mut *mut DwlabTrajectory,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_traj, "out_traj")?;
        *slot = ptr::null_mut();
        let p = checked_params(params)?;
        let spec = to_noise(deref(noise, "noise")?, p.sigma2);
        let inner = dwlab::simulate(&p, &spec, n, &mut seeded(seed)).map_err(fail)?;
        *slot = Box::into_raw(Box::new(DwlabTrajectory { inner }));
        Ok(())
    })
}

/// Builds a trajectory from `n` given innovations `v[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn dwlab_trajectory_from_innovations(
    params: *const DwlabParams,
    v: *const f64,
    n: usize,
    out_traj: *mut *mut DwlabTrajectory,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_traj, "out_traj")?;
        *slot = ptr::null_mut();
        let p = checked_params(params)?;
        if v.is_null() {
            return Err(null("v"));
        }
        let v = std::slice::from_raw_parts(v, n);
        let inner = simulate_with_innovations(&p, v).map_err(fail)?;
        *slot = Box::into_raw(Box::new(DwlabTrajectory { inner }));
        Ok(())
    })
}

/// Draws `n` innovations into `buf`.
#[no_mangle]
pub unsafe extern "C" fn dwlab_sample_noise(
    noise: *const DwlabNoise,
    sigma2: f64,
    n: usize,
    seed: u64,
    buf: *mut f64,
) -> DwlabStatus {
    guard(|| {
        let spec = to_noise(deref(noise, "noise")?, sigma2);
        if buf.is_null() {
            return Err(null("buf"));
        }
        let draws = sample_noise(&spec, n, &mut seeded(seed)).map_err(fail)?;
        ptr::copy_nonoverlapping(draws.as_ptr(), buf, n);
        Ok(())
    })
}

/// Number of steps n; the path has n + 1 points X₀..Xₙ.
#[no_mangle]
pub unsafe extern "C" fn dwlab_trajectory_len(
    traj: *const DwlabTrajectory,
    out_n: *mut usize,
) -> DwlabStatus {
    guard(|| {
        *out(out_n, "out_n")? = deref(traj, "traj")?.inner.n();
        Ok(())
    })
}

/// Copies X₀..Xₙ into `buf`, which must hold n + 1 values.
#[no_mangle]
pub unsafe extern "C" fn dwlab_trajectory_x(
    traj: *const DwlabTrajectory,
    buf: *mut f64,
    len: usize,
) -> DwlabStatus {
    guard(|| copy_out(&deref(traj, "traj")?.inner.x, buf, len))
}

/// Copies ε₀..εₙ into `buf`, which must hold n + 1 values.
#[no_mangle]
pub unsafe extern "C" fn dwlab_trajectory_eps(
    traj: *const DwlabTrajectory,
    buf: *mut f64,
    len: usize,
) -> DwlabStatus {
    guard(|| copy_out(&deref(traj, "traj")?.inner.eps, buf, len))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), DwlabStatus> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        set_last_error(format!("buffer holds {len} values, need {}", src.len()));
        return Err(DwlabStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn dwlab_trajectory_free(traj: *mut DwlabTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Computes the estimators and functionals of `traj` under `params`.
#[no_mangle]
pub unsafe extern "C" fn dwlab_ledger_compute(
    traj: *const DwlabTrajectory,
    params: *const DwlabParams,
    out_ledger: *mut *mut DwlabLedger,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_ledger, "out_ledger")?;
        *slot = ptr::null_mut();
        let t = &deref(traj, "traj")?.inner;
        let p = checked_params(params)?.with_initial(t.x[0], t.eps[0]);
        let inner = dwlab::ledger(t, &p).map_err(fail)?;
        *slot = Box::into_raw(Box::new(DwlabLedger { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dwlab_ledger_values(
    ledger: *const DwlabLedger,
    out_values: *mut DwlabLedgerValues,
) -> DwlabStatus {
    guard(|| {
        let l = &deref(ledger, "ledger")?.inner;
        *out(out_values, "out_values")? = DwlabLedgerValues {
            n: l.n,
            l_n: l.l_n,
            m_n: l.m_n,
            n_n: l.n_n,
            q_n: l.q_n,
            s_n: l.s_n,
            s_nm1: l.s_nm1,
            p_n: l.p_n,
            j_n: l.j_n,
            j_nm1: l.j_nm1,
            theta_hat: l.theta_hat,
            rho_hat: l.rho_hat,
            dw: l.dw,
            f_n: l.f_n,
            t_n: l.t_n,
            r_theta: l.r_theta,
            t4_n: l.t4_n,
            gamma4_n: l.gamma4_n,
            eps_hat0: l.eps_hat0,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dwlab_ledger_free(ledger: *mut DwlabLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}

fn flat(m: &dwlab::numeric::Matrix2) -> [f64; 4] {
    [m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]]
}

/// Limits, asymptotic variances and the matrices Γ, Λ, A.
#[no_mangle]
pub unsafe extern "C" fn dwlab_summary(
    params: *const DwlabParams,
    out_summary: *mut DwlabSummary,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_summary, "out_summary")?;
        let p = checked_params(params)?;
        let s = dwlab::summary(&p).map_err(fail)?;
        let det = det_gamma_audit(&s);
        *slot = DwlabSummary {
            theta_star: s.theta_star,
            rho_star: s.rho_star,
            d_star: s.d_star,
            ell: s.ell,
            ell1: s.ell1,
            ell2: s.ell2,
            sigma2_theta: s.sigma2_theta,
            sigma2_rho: s.sigma2_rho,
            sigma2_d: s.sigma2_d,
            gamma: flat(&s.gamma),
            lambda: flat(&s.lambda),
            a_limit: flat(&s.a_limit),
            t_limit: s.t_limit,
            j_limit: s.j_limit,
            det_gamma: det.direct,
            det_gamma_printed: det.printed_formula,
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwlabRate {
    Theta = 0,
    Rho = 1,
    Dw = 2,
}

/// Moderate-deviation rate I(x) of θ̂ₙ, ρ̂ₙ or D̂ₙ.
#[no_mangle]
pub unsafe extern "C" fn dwlab_rate(
    params: *const DwlabParams,
    which: DwlabRate,
    x: f64,
    out_rate: *mut f64,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_rate, "out_rate")?;
        let s = dwlab::summary(&checked_params(params)?).map_err(fail)?;
        *slot = match which {
            DwlabRate::Theta => rate_theta(x, &s),
            DwlabRate::Rho => rate_rho(x, &s),
            DwlabRate::Dw => rate_dw(x, &s),
        };
        Ok(())
    })
}

/// Joint rate K(v) = ½ vᵀΓ⁻¹v; fails with `Singular` when θ = −ρ.
#[no_mangle]
pub unsafe extern "C" fn dwlab_rate_joint(
    params: *const DwlabParams,
    v0: f64,
    v1: f64,
    out_rate: *mut f64,
) -> DwlabStatus {
    guard(|| {
        let slot = out(out_rate, "out_rate")?;
        let s = dwlab::summary(&checked_params(params)?).map_err(fail)?;
        *slot = rate_joint([v0, v1], &s).map_err(fail)?;
        Ok(())
    })
}
