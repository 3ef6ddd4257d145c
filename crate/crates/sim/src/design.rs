//! Covariance designs for the correlated-covariate models.
//!
//! `C1 = U D1 Uᵀ`, where `U` holds the eigenvectors of the equicorrelation
//! matrix with off-diagonal 0.8 and `D1` spreads the spectrum evenly over
//! `[0.1, 2]`.
//!
//! The leading eigenvector is the normalized ones vector (eigenvalue
//! `0.2 + 0.8 q`); every vector orthogonal to it has eigenvalue 0.2. That
//! eigenspace is degenerate, so its basis is a choice. A sparse basis such as
//! Helmert contrasts would tie the first covariates to the smallest entries
//! of `D1`; instead the basis is fixed by orthonormalizing seeded Gaussian
//! vectors against the ones vector, which spreads every covariate over the
//! whole spectrum the way a generic eigensolver does.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SimError};

pub const EIG_MIN: f64 = 0.1;
pub const EIG_MAX: f64 = 2.0;
pub const EQUICORRELATION: f64 = 0.8;
const BASIS_SEED: u64 = 0xc1_ba515;

fn check_dim(q: usize) -> Result<()> {
    if q < 2 {
        return Err(SimError::invalid(format!("covariate dimension {q} must be at least 2")));
    }
    Ok(())
}

/// Diagonal of `D1`: `q` points from 0.1 to 2 inclusive, equally spaced.
pub fn d1_diagonal(q: usize) -> Result<Array1<f64>> {
    check_dim(q)?;
    let step = (EIG_MAX - EIG_MIN) / (q - 1) as f64;
    let mut d = Array1::from_shape_fn(q, |j| EIG_MIN + step * j as f64);
    d[q - 1] = EIG_MAX;
    Ok(d)
}

/// Eigenvalues of the equicorrelation matrix, in descending order.
pub fn equicorrelation_spectrum(q: usize) -> Array1<f64> {
    let rest = 1.0 - EQUICORRELATION;
    Array1::from_shape_fn(q, |j| if j == 0 { rest + EQUICORRELATION * q as f64 } else { rest })
}

/// Orthonormal eigenvectors of the equicorrelation matrix as columns,
/// ordered by descending eigenvalue, first nonzero entry of each positive.
pub fn equicorrelation_basis(q: usize) -> Result<Array2<f64>> {
    check_dim(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(BASIS_SEED);
    let seeds = DMatrix::from_fn(q, q, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let qm = seeds.qr().q();
    let mut u = Array2::from_shape_fn((q, q), |(i, j)| qm[(i, j)]);
    for mut col in u.columns_mut() {
        let lead = col.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    Ok(u)
}

fn spectral(q: usize, f: impl Fn(f64) -> f64) -> Result<Array2<f64>> {
    let u = equicorrelation_basis(q)?;
    let d = d1_diagonal(q)?.mapv(f);
    let scaled = &u * &d;
    Ok(scaled.dot(&u.t()))
}

/// `C1 = U D1 Uᵀ` for `q = p - 1` covariates.
pub fn build_c1(q: usize) -> Result<Array2<f64>> {
    spectral(q, |d| d)
}

/// Symmetric square root `U D1^{1/2} Uᵀ` of `C1`.
pub fn c1_sqrt(q: usize) -> Result<Array2<f64>> {
    spectral(q, f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_grid() {
        let d = d1_diagonal(3).unwrap();
        assert_eq!(d.to_vec(), vec![0.1, 1.05, 2.0]);
    }

    #[test]
    fn dimension_one_is_rejected() {
        assert!(build_c1(1).is_err());
        assert!(d1_diagonal(0).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        let u = equicorrelation_basis(7).unwrap();
        let g = u.t().dot(&u);
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sqrt_squares_to_c1() {
        let c = build_c1(6).unwrap();
        let s = c1_sqrt(6).unwrap();
        let diff = &s.dot(&s) - &c;
        assert!(diff.iter().all(|v| v.abs() < 1e-13));
    }
}
