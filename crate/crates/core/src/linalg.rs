//! Dense complex linear-algebra helpers shared by every module.
//!
//! All matrices are stored dense (`nalgebra::DMatrix<Complex64>`). The
//! Hermitian routines symmetrize their input before factorizing so that
//! round-off asymmetry never leaks into eigenvalues or log-determinants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative tolerance used by the Hermitian checks on user-supplied matrices.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Relative tolerance on the most negative eigenvalue of a PSD input.
pub const PSD_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

/// Largest entry of `m - m^H` relative to the largest entry of `m`.
pub fn hermitian_asymmetry(m: &CMat) -> f64 {
    let scale = max_abs(m).max(1.0);
    max_abs(&(m - m.adjoint())) / scale
}

pub fn ensure_square(m: &CMat, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn ensure_hermitian(m: &CMat, name: &'static str) -> Result<()> {
    ensure_square(m, name)?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { name, asymmetry });
    }
    Ok(())
}

/// Hermitian with eigenvalues no smaller than `-PSD_TOL * max(lambda_max, 1e-300)`.
pub fn ensure_psd(m: &CMat, name: &'static str) -> Result<()> {
    ensure_hermitian(m, name)?;
    if m.nrows() == 0 {
        return Ok(());
    }
    let (vals, _) = eigh(m);
    let max = vals[0];
    let min = vals[vals.len() - 1];
    if min < -PSD_TOL * max.abs().max(1e-300) {
        return Err(Error::NotPsd { name, min_eig: min });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; column `k` of the returned matrix pairs with `vals[k]`.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// Relative width of the eigenvalue cluster treated as degenerate with the maximum.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Leading eigenpair of a Hermitian matrix with a deterministic choice inside
/// a (near-)degenerate top eigenspace.
///
/// Among the unit vectors of the top eigenspace, returns the one with the
/// lexicographically largest absolute first nonzero component (the
/// normalized projection of the first basis vector `e_k` that is not
/// orthogonal to the space), phase-rotated so that component is real
/// positive.
pub fn principal_eigenvector(m: &CMat) -> (f64, CVec) {
    let n = m.nrows();
    let (vals, vecs) = eigh(m);
    let top = vals[0];
    let cutoff = top - DEGENERACY_TOL * top.abs().max(1e-300);
    let k_top = vals.iter().take_while(|&&v| v >= cutoff).count().max(1);
    let basis = vecs.columns(0, k_top).into_owned();
    let mut best = basis.column(0).into_owned();
    for k in 0..n {
        // P e_k = V V^H e_k = V conj(row k of V)
        let coeffs = basis.row(k).adjoint();
        let proj = &basis * coeffs;
        let norm = proj.norm();
        if norm > 1e-8 {
            best = proj.unscale(norm);
            break;
        }
    }
    if let Some(pivot) = best.iter().find(|z| z.norm() > 1e-12).copied() {
        let rot = pivot.conj() / pivot.norm();
        best *= rot;
    }
    (top, best)
}

/// Rebuilds `V diag(f(lambda)) V^H` from a Hermitian eigen-decomposition.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        if fv == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        out += (&col * col.adjoint()).scale(fv);
    }
    hermitian_part(&out)
}

/// Principal square root of a PSD matrix (negative round-off eigenvalues clipped).
pub fn sqrt_psd(m: &CMat) -> CMat {
    hermitian_map(m, |v| v.max(0.0).sqrt())
}

/// `m^{-1/2}` for a Hermitian positive-definite matrix.
pub fn inv_sqrt_pd(m: &CMat) -> Result<CMat> {
    let (vals, _) = eigh(m);
    if vals.last().copied().unwrap_or(1.0) <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(hermitian_map(m, |v| 1.0 / v.sqrt()))
}

/// Cholesky factorization of the Hermitian part of `m`, failing unless `m` is
/// positive definite.
///
/// nalgebra's complex factorization takes complex square roots of negative
/// pivots instead of failing, so the pivots are checked here.
pub fn cholesky(m: &CMat) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = hermitian_part(m)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let pivots_ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re);
    if !pivots_ok {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(chol)
}

/// Natural-log determinant of a Hermitian positive-definite matrix.
pub fn logdet_pd(m: &CMat) -> Result<f64> {
    let chol = cholesky(m)?;
    Ok(logdet_from_cholesky(&chol))
}

pub fn logdet_from_cholesky(chol: &nalgebra::Cholesky<C64, nalgebra::Dyn>) -> f64 {
    chol.l_dirty()
        .diagonal()
        .iter()
        .map(|d| 2.0 * d.re.ln())
        .sum()
}

/// Inverse of a Hermitian positive-definite matrix, returned exactly Hermitian.
pub fn inverse_pd(m: &CMat) -> Result<CMat> {
    let chol = cholesky(m)?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Solves `m x = b` for Hermitian positive-definite `m`.
pub fn solve_pd(m: &CMat, b: &CMat) -> Result<CMat> {
    let chol = cholesky(m)?;
    Ok(chol.solve(b))
}

/// `I_l ⊗ m`, i.e. `l` copies of `m` on the block diagonal.
pub fn kron_identity(l: usize, m: &CMat) -> CMat {
    let (r, cc) = m.shape();
    let mut out = CMat::zeros(l * r, l * cc);
    for b in 0..l {
        out.view_mut((b * r, b * cc), (r, cc)).copy_from(m);
    }
    out
}

/// General Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Real part of `tr(a b)` without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Hermitian quadratic form `x^H m x` (real part).
pub fn quad_form(m: &CMat, x: &CVec) -> f64 {
    (x.adjoint() * m * x)[(0, 0)].re
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Numerical rank: singular values above `rel_tol * sigma_max`.
pub fn numeric_rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries with
/// `E|h_ij|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMat {
    let s = (variance / 2.0).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(s * re, s * im)
    })
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> CVec {
    let m = complex_gaussian(rng, n, 1, variance);
    CVec::from_iterator(n, m.iter().copied())
}

/// Random Hermitian PSD matrix `G G^H / cols` with a Gaussian factor.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let g = complex_gaussian(rng, n, rank.max(1), 1.0);
    hermitian_part(&(&g * g.adjoint()))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    hermitian_part(&complex_gaussian(rng, n, n, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_rejects_indefinite_hermitian() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1e-3, 0.0)]));
        assert!(cholesky(&m).is_err());
        assert!(logdet_pd(&m).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let h = random_hermitian(&mut rng, 4);
            let definite = eigvalsh(&h)[3] > 0.0;
            assert_eq!(cholesky(&h).is_ok(), definite);
        }
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_hermitian(&mut rng, 5);
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let diag = CMat::from_diagonal(&CVec::from_iterator(5, vals.iter().map(|&v| c(v, 0.0))));
        let rebuilt = &vecs * diag * vecs.adjoint();
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
    }

    #[test]
    fn logdet_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_psd(&mut rng, 4, 6) + identity(4);
        let direct: f64 = eigvalsh(&m).iter().map(|v| v.ln()).sum();
        assert!((logdet_pd(&m).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_squares_to_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_psd(&mut rng, 3, 5) + identity(3);
        let r = inv_sqrt_pd(&m).unwrap();
        let prod = &r * &m * &r;
        assert!(max_abs_diff(&prod, &identity(3)) < 1e-12);
    }

    #[test]
    fn psd_check_rejects_indefinite() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-2.0, 0.0)]));
        assert!(matches!(ensure_psd(&m, "m"), Err(Error::NotPsd { .. })));
        let mut h = identity(2);
        h[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(
            ensure_psd(&h, "h"),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn kron_identity_matches_general_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = complex_gaussian(&mut rng, 2, 3, 1.0);
        assert_eq!(kron_identity(3, &m), kron(&identity(3), &m));
    }
}
