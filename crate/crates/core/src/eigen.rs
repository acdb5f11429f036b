//! Eigensolver backend. Hermitian paths use the LAPACK divide-and-conquer
//! drivers (dsyevd/zheevd) with a real fast path; general complex spectra go
//! through zgeev. Deterministic given identical input.

use crate::error::{Error, Result};
use ndarray::prelude::*;
use num_complex::Complex64;

/// Hermitian eigendecomposition: ascending values, eigenvector k in column k.
pub struct EighResult {
    pub values: Vec<f64>,
    pub vectors: Array2<Complex64>,
}

/// Real symmetric eigendecomposition (the fast path the propagation module
/// keeps in f64 end to end).
pub struct EighRealResult {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Capability contract for the spectral module: Hermitian decompositions with
/// LAPACK-grade backward error, general complex eigenvalues up to n = 4096,
/// deterministic given identical input.
pub trait EigenBackend: Send + Sync {
    fn eigh(&self, h: &Array2<Complex64>) -> Result<EighResult>;
    fn eigh_values(&self, h: &Array2<Complex64>) -> Result<Vec<f64>>;
    fn eig_values(&self, m: &Array2<Complex64>) -> Result<Vec<Complex64>>;
}

pub struct LapackBackend;

pub const BACKEND: LapackBackend = LapackBackend;

fn check_square_finite_c(h: &Array2<Complex64>) -> Result<usize> {
    let (r, c) = h.dim();
    if r != c {
        return Err(Error::InvalidInput(format!("matrix not square: {r}x{c}")));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
    }
    Ok(r)
}

fn is_real(h: &Array2<Complex64>) -> bool {
    h.iter().all(|z| z.im == 0.0)
}

fn to_col_major_c(h: &Array2<Complex64>) -> Vec<Complex64> {
    let n = h.nrows();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            buf[i + j * n] = h[[i, j]];
        }
    }
    buf
}

fn dsyevd(n: usize, a: &mut [f64], jobz_v: bool) -> Result<Vec<f64>> {
    let nn = n as i32;
    let jobz = if jobz_v { b'V' } else { b'N' } as std::os::raw::c_char;
    let uplo = b'L' as std::os::raw::c_char;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let query = -1i32;
    unsafe {
        let (mut wq, mut iwq) = (0.0f64, 0i32);
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(),
            &mut wq, &query, &mut iwq, &query, &mut info,
        );
        if info != 0 {
            return Err(Error::Backend { context: "dsyevd workspace".into(), info });
        }
        let lwork = wq as i32;
        let liwork = iwq;
        let mut work = vec![0.0f64; lwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend { context: "dsyevd".into(), info });
    }
    Ok(w)
}

fn zheevd(n: usize, a: &mut [Complex64], jobz_v: bool) -> Result<Vec<f64>> {
    let nn = n as i32;
    let jobz = if jobz_v { b'V' } else { b'N' } as std::os::raw::c_char;
    let uplo = b'L' as std::os::raw::c_char;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let query = -1i32;
    unsafe {
        let mut wq = Complex64::new(0.0, 0.0);
        let (mut rwq, mut iwq) = (0.0f64, 0i32);
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            &mut wq as *mut _ as *mut _, &query, &mut rwq, &query, &mut iwq, &query, &mut info,
        );
        if info != 0 {
            return Err(Error::Backend { context: "zheevd workspace".into(), info });
        }
        let lwork = wq.re as i32;
        let lrwork = rwq as i32;
        let liwork = iwq;
        let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
        let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _, &lwork, rwork.as_mut_ptr(), &lrwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend { context: "zheevd".into(), info });
    }
    Ok(w)
}

/// Real symmetric eigendecomposition, values ascending, vectors in columns.
pub fn eigh_real(h: &Array2<f64>) -> Result<EighRealResult> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::InvalidInput("matrix not square".into()));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
    }
    let mut buf = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            buf[i + j * n] = h[[i, j]];
        }
    }
    let values = dsyevd(n, &mut buf, true)?;
    let mut vectors = Array2::zeros((n, n));
    for k in 0..n {
        for i in 0..n {
            vectors[[i, k]] = buf[i + k * n];
        }
    }
    Ok(EighRealResult { values, vectors })
}

pub fn eigh_real_values(h: &Array2<f64>) -> Result<Vec<f64>> {
    let n = h.nrows();
    let mut buf = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            buf[i + j * n] = h[[i, j]];
        }
    }
    dsyevd(n, &mut buf, false)
}

impl EigenBackend for LapackBackend {
    fn eigh(&self, h: &Array2<Complex64>) -> Result<EighResult> {
        let n = check_square_finite_c(h)?;
        if is_real(h) {
            let hr = h.mapv(|z| z.re);
            let r = eigh_real(&hr)?;
            let vectors = r.vectors.mapv(|x| Complex64::new(x, 0.0));
            return Ok(EighResult { values: r.values, vectors });
        }
        let mut buf = to_col_major_c(h);
        let values = zheevd(n, &mut buf, true)?;
        let mut vectors = Array2::zeros((n, n));
        for k in 0..n {
            for i in 0..n {
                vectors[[i, k]] = buf[i + k * n];
            }
        }
        Ok(EighResult { values, vectors })
    }

    fn eigh_values(&self, h: &Array2<Complex64>) -> Result<Vec<f64>> {
        let n = check_square_finite_c(h)?;
        if is_real(h) {
            let hr = h.mapv(|z| z.re);
            return eigh_real_values(&hr);
        }
        let mut buf = to_col_major_c(h);
        zheevd(n, &mut buf, false)
    }

    fn eig_values(&self, m: &Array2<Complex64>) -> Result<Vec<Complex64>> {
        let n = check_square_finite_c(m)?;
        if n > 4096 {
            return Err(Error::InvalidInput(format!(
                "general eigenproblem capped at 4096, got {n}"
            )));
        }
        let nn = n as i32;
        let jobn = b'N' as std::os::raw::c_char;
        let mut a = to_col_major_c(m);
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let mut rwork = vec![0.0f64; 2 * n];
        let mut info = 0i32;
        let mut vl = [Complex64::new(0.0, 0.0)];
        let mut vr = [Complex64::new(0.0, 0.0)];
        let one = 1i32;
        let query = -1i32;
        unsafe {
            let mut wq = Complex64::new(0.0, 0.0);
            lapack_sys::zgeev_(
                &jobn, &jobn, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr() as *mut _,
                vl.as_mut_ptr() as *mut _, &one, vr.as_mut_ptr() as *mut _, &one,
                &mut wq as *mut _ as *mut _, &query, rwork.as_mut_ptr(), &mut info,
            );
            if info != 0 {
                return Err(Error::Backend { context: "zgeev workspace".into(), info });
            }
            let lwork = wq.re as i32;
            let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
            lapack_sys::zgeev_(
                &jobn, &jobn, &nn, a.as_mut_ptr() as *mut _, &nn, w.as_mut_ptr() as *mut _,
                vl.as_mut_ptr() as *mut _, &one, vr.as_mut_ptr() as *mut _, &one,
                work.as_mut_ptr() as *mut _, &lwork, rwork.as_mut_ptr(), &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Backend { context: "zgeev".into(), info });
        }
        // deterministic order
        w.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(w)
    }
}

/// Operator 2-norm (largest singular value) via the Hermitian spectrum of
/// M^H M.
pub fn opnorm2(m: &Array2<Complex64>) -> Result<f64> {
    let (r, c) = m.dim();
    if r == 0 || c == 0 {
        return Ok(0.0);
    }
    // form the smaller Gram matrix
    let gram = if r >= c {
        let mh = m.mapv(|z| z.conj());
        zgemm_tn(&mh, m)
    } else {
        let mh = m.mapv(|z| z.conj());
        zgemm_nt(m, &mh)
    };
    let vals = BACKEND.eigh_values(&gram)?;
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    Ok(top.sqrt())
}

// ---------------------------------------------------------------------
// BLAS level-3 helpers (row-major via cblas)

use cblas_sys::{CBLAS_LAYOUT, CBLAS_TRANSPOSE};

fn as_slice<T>(a: &Array2<T>) -> &[T] {
    a.as_slice().expect("matrix must be contiguous row-major")
}

/// C = A * B for f64 row-major matrices.
pub fn dgemm(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    dgemm_opts(a, b, false, false)
}

/// C = op(A) * op(B), op = transpose when the flag is set.
pub fn dgemm_opts(a: &Array2<f64>, b: &Array2<f64>, ta: bool, tb: bool) -> Array2<f64> {
    let (am, ak) = if ta { (a.ncols(), a.nrows()) } else { (a.nrows(), a.ncols()) };
    let (bk, bn) = if tb { (b.ncols(), b.nrows()) } else { (b.nrows(), b.ncols()) };
    assert_eq!(ak, bk, "gemm inner dimension mismatch");
    let mut c = Array2::<f64>::zeros((am, bn));
    unsafe {
        cblas_sys::cblas_dgemm(
            CBLAS_LAYOUT::CblasRowMajor,
            if ta { CBLAS_TRANSPOSE::CblasTrans } else { CBLAS_TRANSPOSE::CblasNoTrans },
            if tb { CBLAS_TRANSPOSE::CblasTrans } else { CBLAS_TRANSPOSE::CblasNoTrans },
            am as i32, bn as i32, ak as i32,
            1.0,
            as_slice(a).as_ptr(), a.ncols() as i32,
            as_slice(b).as_ptr(), b.ncols() as i32,
            0.0,
            c.as_slice_mut().unwrap().as_mut_ptr(), bn as i32,
        );
    }
    c
}

fn zgemm_raw(a: &Array2<Complex64>, b: &Array2<Complex64>, ta: bool, tb: bool) -> Array2<Complex64> {
    let (am, ak) = if ta { (a.ncols(), a.nrows()) } else { (a.nrows(), a.ncols()) };
    let (bk, bn) = if tb { (b.ncols(), b.nrows()) } else { (b.nrows(), b.ncols()) };
    assert_eq!(ak, bk, "gemm inner dimension mismatch");
    let mut c = Array2::<Complex64>::zeros((am, bn));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    unsafe {
        cblas_sys::cblas_zgemm(
            CBLAS_LAYOUT::CblasRowMajor,
            if ta { CBLAS_TRANSPOSE::CblasTrans } else { CBLAS_TRANSPOSE::CblasNoTrans },
            if tb { CBLAS_TRANSPOSE::CblasTrans } else { CBLAS_TRANSPOSE::CblasNoTrans },
            am as i32, bn as i32, ak as i32,
            &one as *const _ as *const _,
            as_slice(a).as_ptr() as *const _, a.ncols() as i32,
            as_slice(b).as_ptr() as *const _, b.ncols() as i32,
            &zero as *const _ as *const _,
            c.as_slice_mut().unwrap().as_mut_ptr() as *mut _, bn as i32,
        );
    }
    c
}

/// C = A * B for complex row-major matrices.
pub fn zgemm(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    zgemm_raw(a, b, false, false)
}

/// C = A^T * B (plain transpose; conjugate beforehand for adjoints).
pub fn zgemm_tn(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    zgemm_raw(a, b, true, false)
}

/// C = A * B^T.
pub fn zgemm_nt(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    zgemm_raw(a, b, false, true)
}
