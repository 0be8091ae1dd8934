//! LAPACK backend for the dense eigenvalue problems in this crate.
//!
//! Negativity evaluation needs all eigenvalues of Hermitian matrices up to
//! 16384×16384. The two-stage reduction drivers (`zheev_2stage`) are several
//! times faster than the classic one-stage drivers when only eigenvalues are
//! requested, so we bind them directly from the system OpenBLAS (which
//! bundles LAPACK >= 3.7).
//!
//! The library is loaded with `dlopen` at first use rather than linked at
//! build time: OpenBLAS selects its kernel set inside an ELF constructor, and
//! on hypervisors that hide the CPU model that selection falls back to a
//! pre-AVX kernel set costing ~10x on large eigenproblems. Loading lazily
//! lets us pin `OPENBLAS_CORETYPE` first when the host plainly supports
//! better (an explicit value in the environment always wins).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ffi::c_char;
use std::sync::OnceLock;

type ZheevStage2 = unsafe extern "C" fn(
    jobz: *const c_char,
    uplo: *const c_char,
    n: *const i32,
    a: *mut Complex64,
    lda: *const i32,
    w: *mut f64,
    work: *mut Complex64,
    lwork: *const i32,
    rwork: *mut f64,
    info: *mut i32,
);

type Zgeev = unsafe extern "C" fn(
    jobvl: *const c_char,
    jobvr: *const c_char,
    n: *const i32,
    a: *mut Complex64,
    lda: *const i32,
    w: *mut Complex64,
    vl: *mut Complex64,
    ldvl: *const i32,
    vr: *mut Complex64,
    ldvr: *const i32,
    work: *mut Complex64,
    lwork: *const i32,
    rwork: *mut f64,
    info: *mut i32,
);

type SetNumThreads = unsafe extern "C" fn(n: i32);

struct Backend {
    zheev_2stage: ZheevStage2,
    zgeev: Zgeev,
    set_num_threads: Option<SetNumThreads>,
}

// function pointers into a library we never unload
unsafe impl Send for Backend {}
unsafe impl Sync for Backend {}

static BACKEND: OnceLock<std::result::Result<Backend, String>> = OnceLock::new();

/// Work around OpenBLAS CPU misdetection in virtualized environments: if the
/// host reports no usable model string but clearly supports AVX-512, pin the
/// matching kernel set before the library initialises.
fn tune_blas_environment() {
    if std::env::var_os("OPENBLAS_CORETYPE").is_some() {
        return;
    }
    if let Ok(cpuinfo) = std::fs::read_to_string("/proc/cpuinfo") {
        let model_unknown = cpuinfo
            .lines()
            .find(|l| l.starts_with("model name"))
            .map_or(true, |l| l.contains("unknown"));
        if model_unknown && cpuinfo.contains("avx512f") {
            std::env::set_var("OPENBLAS_CORETYPE", "SKYLAKEX");
        }
    }
}

fn load_backend() -> std::result::Result<Backend, String> {
    tune_blas_environment();
    let candidates = [
        "libopenblas.so.0\0",
        "libopenblas.so\0",
        "libopenblas64.so.0\0",
    ];
    let mut handle = std::ptr::null_mut();
    for name in candidates {
        handle = unsafe { libc::dlopen(name.as_ptr().cast(), libc::RTLD_NOW | libc::RTLD_LOCAL) };
        if !handle.is_null() {
            break;
        }
    }
    if handle.is_null() {
        return Err("cannot load OpenBLAS (tried libopenblas.so[.0]); install a system \
                    OpenBLAS with bundled LAPACK"
            .to_string());
    }
    let sym = |name: &'static str| -> std::result::Result<*mut libc::c_void, String> {
        let c_name = std::ffi::CString::new(name).expect("symbol name");
        let ptr = unsafe { libc::dlsym(handle, c_name.as_ptr()) };
        if ptr.is_null() {
            Err(format!(
                "symbol {name} missing from OpenBLAS; LAPACK >= 3.7 with the _2stage \
                 drivers is required"
            ))
        } else {
            Ok(ptr)
        }
    };
    unsafe {
        Ok(Backend {
            zheev_2stage: std::mem::transmute::<*mut libc::c_void, ZheevStage2>(sym(
                "zheev_2stage_",
            )?),
            zgeev: std::mem::transmute::<*mut libc::c_void, Zgeev>(sym("zgeev_")?),
            set_num_threads: sym("openblas_set_num_threads")
                .ok()
                .map(|p| std::mem::transmute::<*mut libc::c_void, SetNumThreads>(p)),
        })
    }
}

fn backend() -> Result<&'static Backend> {
    BACKEND
        .get_or_init(load_backend)
        .as_ref()
        .map_err(|msg| Error::BackendUnavailable(msg.clone()))
}

/// Cap the BLAS thread pool; used by sweep runners that parallelise over
/// samples so that nested BLAS threading does not oversubscribe cores.
pub fn set_blas_threads(n: usize) {
    if let Ok(b) = backend() {
        if let Some(set) = b.set_num_threads {
            unsafe { set(n as i32) };
        }
    }
}

/// All eigenvalues of a Hermitian matrix in ascending order.
///
/// `a` is the row-major matrix, destroyed in place. LAPACK reads it
/// column-major, i.e. as the (conjugate) transpose, which shares the
/// spectrum of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &mut [Complex64], dim: usize) -> Result<Vec<f64>> {
    let lapack = backend()?;
    assert_eq!(a.len(), dim * dim, "matrix buffer size mismatch");
    let n = dim as i32;
    let mut w = vec![0.0f64; dim];
    let mut rwork = vec![0.0f64; (3 * dim).max(1)];
    let mut info = 0i32;
    let jobz = b"N\0".as_ptr().cast::<c_char>();
    let uplo = b"U\0".as_ptr().cast::<c_char>();

    let mut work_query = Complex64::new(0.0, 0.0);
    let lwork_query = -1i32;
    unsafe {
        (lapack.zheev_2stage)(
            jobz,
            uplo,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            &mut work_query,
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    let lwork = work_query.re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        (lapack.zheev_2stage)(
            jobz,
            uplo,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    Ok(w)
}

/// Eigenvalues of a general complex matrix (used for gate eigenphase checks).
pub fn complex_eigenvalues(a: &mut [Complex64], dim: usize) -> Result<Vec<Complex64>> {
    let lapack = backend()?;
    assert_eq!(a.len(), dim * dim, "matrix buffer size mismatch");
    let n = dim as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut rwork = vec![0.0f64; (2 * dim).max(1)];
    let mut info = 0i32;
    let jobv = b"N\0".as_ptr().cast::<c_char>();

    // a matrix and its transpose share the same spectrum, so the row-major
    // buffer can be handed over as-is
    let mut work_query = Complex64::new(0.0, 0.0);
    let lwork_query = -1i32;
    unsafe {
        (lapack.zgeev)(
            jobv,
            jobv,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            &mut work_query,
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    let lwork = work_query.re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        (lapack.zgeev)(
            jobv,
            jobv,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    Ok(w)
}
