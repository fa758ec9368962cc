//! Dense complex linear algebra helpers on top of `faer`.
//!
//! States are plain `Vec<C64>`; operators are column-major `faer::Mat<C64>`.

use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Deterministic generator used for every sampled quantity.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unnormalized state with i.i.d. standard complex Gaussian components.
pub fn random_state<R: rand::Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    norm_sqr(v).sqrt()
}

pub fn sub_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn check_len(v: &[C64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

pub fn mat_vec(m: &CMat, v: &[C64]) -> Vec<C64> {
    debug_assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        let col = m.col(j);
        for (o, a) in out.iter_mut().zip(col.iter()) {
            *o += a * x;
        }
    }
    out
}

/// `m^† v`.
pub fn adjoint_mat_vec(m: &CMat, v: &[C64]) -> Vec<C64> {
    debug_assert_eq!(m.nrows(), v.len());
    (0..m.ncols())
        .map(|j| m.col(j).iter().zip(v).map(|(a, x)| a.conj() * x).sum())
        .collect()
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    m.col(j).iter().copied().collect()
}

pub fn from_columns(nrows: usize, cols: &[Vec<C64>]) -> CMat {
    Mat::from_fn(nrows, cols.len(), |i, j| cols[j][i])
}

pub fn scaled(m: &CMat, s: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

/// `B B^†` for a basis stored column-wise.
pub fn projector_from_basis(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values = (0..m.nrows()).map(|i| evd.S()[i].re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Eigen-decomposition of a real symmetric matrix (used for Lanczos tridiagonals).
pub fn real_symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values = (0..m.nrows()).map(|i| evd.S()[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Operator (spectral) norm by dense SVD.
pub fn spectral_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Largest singular value and its right singular vector.
pub fn top_singular(m: &CMat) -> Result<(f64, Vec<C64>)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((0.0, vec![ZERO; m.ncols()]));
    }
    let svd = m.svd().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let sigma = svd.S()[0].re;
    let v = svd.V().col(0).iter().copied().collect();
    Ok((sigma, v))
}

/// Orthonormal basis of the column space of `m`, dropping singular values at
/// or below `rel_tol · σ_max`.
pub fn range_basis(m: &CMat, rel_tol: f64) -> Result<CMat> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(CMat::zeros(m.nrows(), 0));
    }
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let k = svd.S().dim();
    let top = svd.S()[0].re;
    let rank = (0..k).take_while(|&i| svd.S()[i].re > rel_tol * top).count();
    Ok(svd.U().subcols(0, rank).to_owned())
}

pub fn hermiticity_defect(m: &CMat) -> Result<f64> {
    let diff = m - m.adjoint();
    spectral_norm(&diff)
}

pub fn idempotency_defect(m: &CMat) -> Result<f64> {
    let sq = m * m;
    spectral_norm(&(&sq - m))
}

/// Orthonormal basis of the span of the columns (two-pass Gram-Schmidt).
/// Columns whose residual falls below `drop_tol` relative to their norm are dropped.
pub fn orthonormalize(cols: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for c in cols {
        let original = norm(c);
        if original == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let n = norm(&v);
        if n > drop_tol * original {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Operator norm of an implicitly given operator by power iteration on `A^† A`.
///
/// The returned value is `‖A v‖` for the final unit vector `v`, which is accurate
/// to second order in the eigenvector error.
pub fn power_norm<F, G>(dim: usize, apply: F, apply_adjoint: G, seed: u64, tol: f64) -> f64
where
    F: Fn(&[C64]) -> Vec<C64>,
    G: Fn(&[C64]) -> Vec<C64>,
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = seeded_rng(seed);
    let mut v = random_state(dim, &mut rng);
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    let mut sigma = 0.0;
    for _ in 0..20_000 {
        let w = apply(&v);
        let next_sigma = norm(&w);
        let mut u = apply_adjoint(&w);
        let un = norm(&u);
        if un == 0.0 {
            return next_sigma;
        }
        u.iter_mut().for_each(|x| *x /= un);
        v = u;
        if (next_sigma - sigma).abs() <= tol * next_sigma.max(1e-300) {
            sigma = next_sigma;
            break;
        }
        sigma = next_sigma;
    }
    sigma.max(norm(&apply(&v)))
}

/// Round a non-negative quantity one ulp towards zero.
pub fn round_down(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, m: usize, seed: u64) -> CMat {
        let mut rng = seeded_rng(seed);
        let data = random_state(n * m, &mut rng);
        Mat::from_fn(n, m, |i, j| data[i * m + j])
    }

    #[test]
    fn power_iteration_matches_dense_svd() {
        for (n, seed) in [(16usize, 1u64), (64, 2), (200, 3), (512, 4)] {
            let a = random_matrix(n, n, seed);
            let dense = spectral_norm(&a).unwrap();
            let power = power_norm(
                n,
                |v| mat_vec(&a, v),
                |v| adjoint_mat_vec(&a, v),
                seed + 100,
                1e-15,
            );
            assert!(
                (dense - power).abs() <= 1e-9 * dense.max(1.0),
                "n={n}: dense {dense} vs power {power}"
            );
        }
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let a = vec![ONE, ZERO, ZERO];
        let b = vec![ONE, ONE, ZERO];
        let c = vec![C64::new(2.0, 0.0), ONE, ZERO];
        let basis = orthonormalize(&[a, b, c], 1e-10);
        assert_eq!(basis.len(), 2);
        assert!(inner(&basis[0], &basis[1]).norm() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_sorted() {
        let a = random_matrix(10, 10, 9);
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let v0 = column(&vecs, 0);
        let hv = mat_vec(&h, &v0);
        let r: f64 = hv
            .iter()
            .zip(&v0)
            .map(|(x, y)| (x - y * vals[0]).norm_sqr())
            .sum();
        assert!(r.sqrt() < 1e-10);
    }

    #[test]
    fn round_down_is_below() {
        assert!(round_down(1.0) < 1.0);
        assert_eq!(round_down(0.0), 0.0);
    }
}
