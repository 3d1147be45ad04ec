//! Closed-form OT between Gaussian measures under the squared Euclidean cost.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measures::GaussianMeasure;

const EIGEN_FLOOR: f64 = 1e-14;
const SPD_TOL: f64 = 1e-12;

/// The affine OT map `T(x) = D x + shift` and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOt {
    pub d: DMatrix<f64>,
    /// `b - D a`.
    pub shift: DVector<f64>,
    pub cost: f64,
    source_mean: DVector<f64>,
    target_mean: DVector<f64>,
}

impl GaussianOt {
    pub fn map(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.d * x + &self.shift
    }

    /// `∇f(x) = 2([I - D] x + D a - b)`, i.e. `2 (x - T(x))`.
    pub fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.d.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        ((&id - &self.d) * x + &self.d * &self.source_mean - &self.target_mean) * 2.0
    }

    /// Mean and covariance of `T # N(a, A)`.
    pub fn pushforward(&self, source: &GaussianMeasure) -> (DVector<f64>, DMatrix<f64>) {
        let mean = self.map(source.mean());
        let cov = &self.d * source.covariance() * self.d.transpose();
        (mean, cov)
    }
}

/// `f(M)` for symmetric `M`, applying `f` to the eigenvalues after flooring
/// them at `EIGEN_FLOOR`.
fn spectral<F: Fn(f64) -> f64>(m: &DMatrix<f64>, f: F) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue <= -SPD_TOL {
        return Err(Error::NotSpd { min_eigenvalue });
    }
    let lambda = eig.eigenvalues.map(|l| f(l.max(EIGEN_FLOOR)));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&lambda) * eig.eigenvectors.transpose())
}

pub fn sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral(m, |l| l.sqrt())
}

fn check_spd(m: &DMatrix<f64>) -> Result<()> {
    let min_eigenvalue = m.clone().symmetric_eigen().eigenvalues.min();
    if min_eigenvalue <= SPD_TOL {
        return Err(Error::NotSpd { min_eigenvalue });
    }
    Ok(())
}

/// `D = A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}`, `T(x) = D x - D a + b`.
pub fn gaussian_ot(mu: &GaussianMeasure, nu: &GaussianMeasure) -> Result<GaussianOt> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "gaussians of dimension {} and {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let (a, b) = (mu.mean(), nu.mean());
    let (ca, cb) = (mu.covariance(), nu.covariance());
    check_spd(ca)?;
    check_spd(cb)?;
    let a_half = sqrt_spd(ca)?;
    let a_neg_half = spectral(ca, |l| 1.0 / l.sqrt())?;
    let cross = sqrt_spd(&(&a_half * cb * &a_half))?;
    let d = &a_neg_half * &cross * &a_neg_half;
    let d = (&d + d.transpose()) * 0.5;
    let shift = b - &d * a;
    let cost = (a - b).norm_squared() + ca.trace() + cb.trace() - 2.0 * cross.trace();
    Ok(GaussianOt {
        d,
        shift,
        cost: cost.max(0.0),
        source_mean: a.clone(),
        target_mean: b.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_measures_give_identity() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let mu = GaussianMeasure::new(DVector::from_vec(alloc::vec![1.0, -1.0]), cov).unwrap();
        let ot = gaussian_ot(&mu, &mu).unwrap();
        assert!((&ot.d - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!(ot.shift.amax() < 1e-12);
        assert!(ot.cost.abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_scaling() {
        let mu = GaussianMeasure::univariate(0.0, 1.0).unwrap();
        let nu = GaussianMeasure::univariate(1.0, 4.0).unwrap();
        let ot = gaussian_ot(&mu, &nu).unwrap();
        assert!((ot.d[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((ot.shift[0] - 1.0).abs() < 1e-12);
        assert!((ot.cost - 2.0).abs() < 1e-12);
    }
}
