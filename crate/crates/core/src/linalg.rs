//! Dense linear algebra helpers.
//!
//! Eigensolvers and the SVD call LAPACK directly (divide-and-conquer drivers
//! `dsyevd`, `zheevd`, `dgesdd`). Matrices are stored row-major in `ndarray`,
//! so LAPACK sees the transpose; the wrappers undo that.

use std::os::raw::{c_char, c_int};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn lapack_dim(n: usize) -> Result<c_int> {
    c_int::try_from(n).map_err(|_| Error::InvalidParameter(format!("matrix dimension {n} too large")))
}

/// Spectral decomposition of a real symmetric matrix.
///
/// Returns ascending eigenvalues and a matrix whose columns are the
/// orthonormal eigenvectors.
pub fn eigh_real(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = square_dim(a.dim())?;
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let w = dsyevd(n, &mut buf, true)?;
    // The buffer holds eigenvectors column-major, i.e. row k of the row-major
    // view is eigenvector k.
    let rows = Array2::from_shape_vec((n, n), buf).expect("shape");
    Ok((w, rows.reversed_axes()))
}

/// Eigenvalues (ascending) of a real symmetric matrix.
pub fn eigvalsh_real(a: &Array2<f64>) -> Result<Vec<f64>> {
    let n = square_dim(a.dim())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut buf: Vec<f64> = a.iter().copied().collect();
    dsyevd(n, &mut buf, false)
}

fn dsyevd(n: usize, a: &mut [f64], vectors: bool) -> Result<Vec<f64>> {
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let nn = lapack_dim(n)?;
    let mut w = vec![0.0; n];
    let mut info: c_int = 0;
    let mut wq = [0.0f64];
    let mut iq = [0 as c_int];
    let query: c_int = -1;
    unsafe {
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), wq.as_mut_ptr(), &query,
            iq.as_mut_ptr(), &query, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    let lwork = wq[0] as c_int;
    let liwork = iq[0];
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), work.as_mut_ptr(), &lwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    Ok(w)
}

/// Spectral decomposition of a complex Hermitian matrix; eigenvectors in columns.
pub fn eigh(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = square_dim(a.dim())?;
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut buf: Vec<C64> = a.iter().copied().collect();
    let w = zheevd(n, &mut buf, true)?;
    // LAPACK diagonalized the transpose (= conjugate) of `a`; row k of the
    // row-major buffer is the conjugate of eigenvector k.
    let rows = Array2::from_shape_vec((n, n), buf).expect("shape");
    Ok((w, rows.reversed_axes().mapv(|z| z.conj())))
}

/// Eigenvalues (ascending) of a complex Hermitian matrix.
pub fn eigvalsh(a: &Array2<C64>) -> Result<Vec<f64>> {
    let n = square_dim(a.dim())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut buf: Vec<C64> = a.iter().copied().collect();
    zheevd(n, &mut buf, false)
}

fn zheevd(n: usize, a: &mut [C64], vectors: bool) -> Result<Vec<f64>> {
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let nn = lapack_dim(n)?;
    let mut w = vec![0.0; n];
    let mut info: c_int = 0;
    let mut wq = [ZERO];
    let mut rq = [0.0f64];
    let mut iq = [0 as c_int];
    let query: c_int = -1;
    let ap = a.as_mut_ptr() as *mut lapack_sys::__BindgenComplex<f64>;
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            ap,
            &nn,
            w.as_mut_ptr(),
            wq.as_mut_ptr() as *mut lapack_sys::__BindgenComplex<f64>,
            &query,
            rq.as_mut_ptr(),
            &query,
            iq.as_mut_ptr(),
            &query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    let lwork = wq[0].re as c_int;
    let lrwork = rq[0] as c_int;
    let liwork = iq[0];
    let mut work = vec![ZERO; lwork.max(1) as usize];
    let mut rwork = vec![0.0; lrwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            ap,
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut lapack_sys::__BindgenComplex<f64>,
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    Ok(w)
}

/// Full singular value decomposition `a = u · diag(s) · vt` of a real matrix.
///
/// Singular values are returned in descending order.
pub fn svd_real(a: &Array2<f64>) -> Result<(Array2<f64>, Vec<f64>, Array2<f64>)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok((Array2::eye(m), Vec::new(), Array2::eye(n)));
    }
    // LAPACK sees the n x m matrix a^T = U' S V'^T, hence a = V' S U'^T.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let (mm, nn) = (lapack_dim(n)?, lapack_dim(m)?);
    let jobz = b'A' as c_char;
    let mut s = vec![0.0; k];
    let mut u_f = vec![0.0; n * n];
    let mut vt_f = vec![0.0; m * m];
    let mut iwork = vec![0 as c_int; 8 * k];
    let mut info: c_int = 0;
    let mut wq = [0.0f64];
    let query: c_int = -1;
    unsafe {
        lapack_sys::dgesdd_(
            &jobz, &mm, &nn, buf.as_mut_ptr(), &mm, s.as_mut_ptr(), u_f.as_mut_ptr(), &mm,
            vt_f.as_mut_ptr(), &nn, wq.as_mut_ptr(), &query, iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgesdd", info });
    }
    let lwork = wq[0] as c_int;
    let mut work = vec![0.0; lwork.max(1) as usize];
    unsafe {
        lapack_sys::dgesdd_(
            &jobz, &mm, &nn, buf.as_mut_ptr(), &mm, s.as_mut_ptr(), u_f.as_mut_ptr(), &mm,
            vt_f.as_mut_ptr(), &nn, work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgesdd", info });
    }
    // Row-major reading of a column-major buffer yields the transpose.
    let u = Array2::from_shape_vec((m, m), vt_f).expect("shape"); // V' as row-major
    let vt = Array2::from_shape_vec((n, n), u_f).expect("shape"); // U'^T as row-major
    Ok((u, s, vt))
}

fn square_dim((r, c): (usize, usize)) -> Result<usize> {
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, found: c });
    }
    Ok(r)
}

/// Conjugate transpose.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Largest entry of `|a - a†|`.
pub fn hermiticity_defect(a: &ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Symmetrize `(a + a†)/2` in place.
pub fn hermitize(a: &mut Array2<C64>) {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let v = (a[[i, j]] + a[[j, i]].conj()) * 0.5;
            a[[i, j]] = v;
            a[[j, i]] = v.conj();
        }
    }
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &x| *o = s * x);
        }
    }
    out
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, ONE)
}

/// `V diag(f(λ)) V†` for a Hermitian matrix.
pub fn hermitian_function(a: &Array2<C64>, f: impl Fn(f64) -> f64) -> Result<Array2<C64>> {
    let (w, v) = eigh(a)?;
    Ok(reconstruct(&v, &w.iter().map(|&x| f(x)).collect::<Vec<_>>()))
}

/// `V diag(d) V†`.
pub fn reconstruct(v: &Array2<C64>, d: &[f64]) -> Array2<C64> {
    let mut vd = v.clone();
    for (mut col, &x) in vd.axis_iter_mut(Axis(1)).zip(d) {
        col.mapv_inplace(|z| z * x);
    }
    vd.dot(&dagger(v))
}

/// Square root of a positive semidefinite matrix (negative rounding noise clipped).
pub fn sqrt_psd(a: &Array2<C64>) -> Result<Array2<C64>> {
    hermitian_function(a, |x| x.max(0.0).sqrt())
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_op_norm(a: &Array2<C64>) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Trace norm of a Hermitian matrix.
pub fn hermitian_trace_norm(a: &Array2<C64>) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().map(|x| x.abs()).sum())
}

pub fn to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|x| C64::new(x, 0.0))
}

pub fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Frobenius inner product `Tr[a† b]`.
pub fn frobenius_inner(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
