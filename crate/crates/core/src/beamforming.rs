//! Linearly constrained minimum variance (LCMV) beamforming.
//!
//! For a noise covariance `R` and constraints `Λ^H w = f`,
//!
//! ```text
//! w = R^{-1} Λ (Λ^H R^{-1} Λ)^{-1} f,     w^H R w = f^H (Λ^H R^{-1} Λ)^{-1} f.
//! ```
//!
//! MVDR is the single-constraint case `Λ = a`, `f = 1`. Solves go through a
//! Cholesky factorization of `R` and of the `U x U` Gram matrix; both must
//! have condition numbers below [`MAX_CONDITION`](crate::linalg::MAX_CONDITION).

use alloc::vec::Vec;

use crate::linalg::{hermitian_eigenvalues, hermitian_part, HermitianFactor, MAX_CONDITION};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// The pair `(Λ, f)` with `U` constraints over `M` sensors.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraintSet {
    lambda: CMatrix,
    f: CVector,
}

impl LinearConstraintSet {
    pub fn new(lambda: CMatrix, f: CVector) -> Result<Self> {
        let (m, u) = lambda.shape();
        if u == 0 || u > m {
            return Err(Error::invalid(alloc::format!(
                "constraint count {u} must be in 1..={m}"
            )));
        }
        if f.len() != u {
            return Err(Error::DimensionMismatch {
                what: "constraint response f",
                expected: u,
                found: f.len(),
            });
        }
        let gram = lambda.adjoint() * &lambda;
        let ev = hermitian_eigenvalues(&gram);
        let condition = if ev[0] > 0.0 { ev[u - 1] / ev[0] } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        Ok(Self { lambda, f })
    }

    /// Unit response toward every column of `a`.
    pub fn distortionless(a: &CMatrix) -> Result<Self> {
        Self::new(a.clone(), CVector::from_element(a.ncols(), Complex64::new(1.0, 0.0)))
    }

    /// Unit response toward the targets `a` and zero response toward the
    /// interferers `b`.
    pub fn distortionless_with_nulls(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let m = a.nrows();
        let (i, j) = (a.ncols(), b.ncols());
        let mut lambda = CMatrix::zeros(m, i + j);
        lambda.columns_mut(0, i).copy_from(a);
        lambda.columns_mut(i, j).copy_from(b);
        let f = CVector::from_fn(i + j, |r, _| {
            if r < i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(lambda, f)
    }

    pub fn lambda(&self) -> &CMatrix {
        &self.lambda
    }

    pub fn f(&self) -> &CVector {
        &self.f
    }

    pub fn num_sensors(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn num_constraints(&self) -> usize {
        self.lambda.ncols()
    }

    /// Constraints restricted to the sensors in `subset` (rows of `Λ`).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let lambda = self.lambda.select_rows(subset);
        Self::new(lambda, self.f.clone())
    }
}

/// Beamformer coefficients for one frequency bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerWeights {
    pub w: CVector,
}

impl BeamformerWeights {
    /// `w^H y`.
    pub fn apply(&self, y: &CVector) -> Complex64 {
        self.w.dotc(y)
    }
}

/// LCMV weights together with the output noise power they attain.
#[derive(Clone, Debug, PartialEq)]
pub struct LcmvSolution {
    pub weights: BeamformerWeights,
    pub noise_power: f64,
}

fn check_dims(noise_cov: &CMatrix, constraints: &LinearConstraintSet) -> Result<()> {
    let m = constraints.num_sensors();
    if noise_cov.nrows() != m || noise_cov.ncols() != m {
        return Err(Error::DimensionMismatch {
            what: "noise covariance",
            expected: m,
            found: noise_cov.nrows(),
        });
    }
    Ok(())
}

pub fn lcmv(noise_cov: &CMatrix, constraints: &LinearConstraintSet) -> Result<LcmvSolution> {
    check_dims(noise_cov, constraints)?;
    let r = HermitianFactor::new(noise_cov, "noise covariance")?;
    let rinv_lambda = r.solve(constraints.lambda());
    let gram = hermitian_part(&(constraints.lambda().adjoint() * &rinv_lambda));
    let g = HermitianFactor::new(&gram, "constraint Gram matrix")?;
    let f = CMatrix::from_column_slice(constraints.f().len(), 1, constraints.f().as_slice());
    let y = g.solve(&f);
    let w = &rinv_lambda * &y;
    let noise_power = (f.adjoint() * &y)[(0, 0)].re;
    Ok(LcmvSolution {
        weights: BeamformerWeights {
            w: CVector::from_column_slice(w.as_slice()),
        },
        noise_power,
    })
}

pub fn lcmv_weights(noise_cov: &CMatrix, constraints: &LinearConstraintSet) -> Result<BeamformerWeights> {
    lcmv(noise_cov, constraints).map(|s| s.weights)
}

/// `f^H (Λ^H R^{-1} Λ)^{-1} f`.
pub fn output_noise_power(noise_cov: &CMatrix, constraints: &LinearConstraintSet) -> Result<f64> {
    lcmv(noise_cov, constraints).map(|s| s.noise_power)
}

pub fn mvdr_weights(noise_cov: &CMatrix, steering: &CVector) -> Result<BeamformerWeights> {
    let a = CMatrix::from_column_slice(steering.len(), 1, steering.as_slice());
    lcmv_weights(noise_cov, &LinearConstraintSet::distortionless(&a)?)
}

/// `w^H R w`, the power a fixed beamformer passes from noise with
/// covariance `R`.
pub fn passed_power(weights: &BeamformerWeights, cov: &CMatrix) -> f64 {
    weights.w.dotc(&(cov * &weights.w)).re
}

/// Applies one beamformer per bin: `out[bin] = w[bin]^H y[bin]`.
pub fn apply_beamformer(spectra: &[CVector], weights: &[BeamformerWeights]) -> Result<Vec<Complex64>> {
    if spectra.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            what: "bin count",
            expected: weights.len(),
            found: spectra.len(),
        });
    }
    spectra
        .iter()
        .zip(weights)
        .map(|(y, w)| {
            if y.len() != w.w.len() {
                Err(Error::DimensionMismatch {
                    what: "channel count",
                    expected: w.w.len(),
                    found: y.len(),
                })
            } else {
                Ok(w.apply(y))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_pd(rng: &mut impl Rng, m: usize) -> CMatrix {
        let g = CMatrix::from_fn(m, m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &g * g.adjoint() + CMatrix::identity(m, m).scale(0.5)
    }

    fn random_constraints(rng: &mut impl Rng, m: usize, u: usize) -> LinearConstraintSet {
        let lambda = CMatrix::from_fn(m, u, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let f = CVector::from_fn(u, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        LinearConstraintSet::new(lambda, f).unwrap()
    }

    /// Projected gradient descent on the constraint set, independent of the
    /// closed form.
    fn projected_gradient(r: &CMatrix, cons: &LinearConstraintSet) -> CVector {
        let l = cons.lambda();
        let gram_inv = (l.adjoint() * l).try_inverse().unwrap();
        let proj = CMatrix::identity(l.nrows(), l.nrows()) - l * &gram_inv * l.adjoint();
        let mut w = l * (&gram_inv * cons.f());
        let step = 1.0 / hermitian_eigenvalues(r).last().unwrap();
        for _ in 0..20_000 {
            let grad = r * &w;
            w -= (&proj * grad).scale(step);
        }
        w
    }

    #[test]
    fn identity_noise_all_ones_steering() {
        let a = CMatrix::from_element(4, 1, c(1.0));
        let w = lcmv_weights(&CMatrix::identity(4, 4), &LinearConstraintSet::distortionless(&a).unwrap()).unwrap();
        for k in 0..4 {
            assert!((w.w[k] - c(0.25)).norm() < 1e-15);
        }
    }

    #[test]
    fn full_constraints_fix_weights() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let r = random_pd(&mut rng, 3);
        let f = CVector::from_vec(alloc::vec![c(1.0), Complex64::new(0.5, -0.2), c(-2.0)]);
        let cons = LinearConstraintSet::new(CMatrix::identity(3, 3), f.clone()).unwrap();
        let w = lcmv_weights(&r, &cons).unwrap();
        assert!((&w.w - &f).norm() < 1e-12);
    }

    #[test]
    fn matches_projected_gradient_oracle() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let r = random_pd(&mut rng, 5);
        let cons = random_constraints(&mut rng, 5, 2);
        let w = lcmv_weights(&r, &cons).unwrap();
        let oracle = projected_gradient(&r, &cons);
        assert!((&w.w - &oracle).norm() <= 1e-6 * oracle.norm());
    }

    #[test]
    fn noise_power_closed_forms() {
        let a = CMatrix::from_fn(4, 1, |k, _| Complex64::from_polar(1.0, 0.7 * k as f64));
        let cons = LinearConstraintSet::distortionless(&a).unwrap();
        let p = output_noise_power(&CMatrix::identity(4, 4), &cons).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        let p3 = output_noise_power(&CMatrix::identity(4, 4).scale(3.0), &cons).unwrap();
        assert!((p3 - 0.75).abs() < 1e-14);
    }

    #[test]
    fn weights_and_noise_power_agree() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let m = rng.random_range(2..8);
            let u = rng.random_range(1..=m.min(3));
            let r = random_pd(&mut rng, m);
            let cons = random_constraints(&mut rng, m, u);
            let sol = lcmv(&r, &cons).unwrap();
            let direct = passed_power(&sol.weights, &r);
            assert!((direct - sol.noise_power).abs() <= 1e-8 * sol.noise_power);
            let resid = (cons.lambda().adjoint() * &sol.weights.w - cons.f()).norm();
            assert!(resid <= 1e-8 * cons.f().norm());
        }
    }

    #[test]
    fn mvdr_delegates_to_lcmv() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(29);
        for _ in 0..3 {
            let r = random_pd(&mut rng, 4);
            let a = CVector::from_fn(4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let mvdr = mvdr_weights(&r, &a).unwrap();
            let cons = LinearConstraintSet::new(CMatrix::from_column_slice(4, 1, a.as_slice()), CVector::from_element(1, c(1.0))).unwrap();
            let lcmv = lcmv_weights(&r, &cons).unwrap();
            assert!((&mvdr.w - &lcmv.w).norm() < 1e-14);
            assert!((mvdr.w.dotc(&a) - c(1.0)).norm() < 1e-12);
        }
        let mut e1 = CVector::zeros(3);
        e1[0] = c(1.0);
        let w = mvdr_weights(&CMatrix::identity(3, 3), &e1).unwrap();
        assert!((&w.w - &e1).norm() < 1e-15);
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        let r = random_pd(&mut rng, 4);
        let cons = random_constraints(&mut rng, 4, 2);
        let base = lcmv(&r, &cons).unwrap();
        let scaled = lcmv(&r.scale(7.5), &cons).unwrap();
        assert!((scaled.noise_power - 7.5 * base.noise_power).abs() <= 1e-10 * scaled.noise_power);
        assert!((&scaled.weights.w - &base.weights.w).norm() <= 1e-10 * base.weights.w.norm());
    }

    #[test]
    fn ill_conditioning_is_reported() {
        let a = CMatrix::from_element(3, 1, c(1.0));
        let cons = LinearConstraintSet::distortionless(&a).unwrap();
        let sing = CMatrix::from_element(3, 3, c(1.0));
        assert!(matches!(lcmv(&sing, &cons), Err(Error::IllConditioned { .. })));
        let dup = CMatrix::from_element(3, 2, c(1.0));
        assert!(LinearConstraintSet::distortionless(&dup).is_err());
    }

    #[test]
    fn apply_selects_and_preserves() {
        let mut e1 = CVector::zeros(3);
        e1[0] = c(1.0);
        let y = CVector::from_vec(alloc::vec![Complex64::new(0.3, 0.1), c(2.0), c(-1.0)]);
        let out = apply_beamformer(std::slice::from_ref(&y), &[BeamformerWeights { w: e1 }]).unwrap();
        assert_eq!(out[0], y[0]);

        let a = CVector::from_fn(3, |k, _| Complex64::from_polar(1.0 / (1.0 + k as f64), 0.4 * k as f64));
        let w = mvdr_weights(&CMatrix::identity(3, 3), &a).unwrap();
        let s = Complex64::new(0.7, -1.3);
        let out = apply_beamformer(&[a.scale(1.0).map(|z| z * s)], &[w]).unwrap();
        assert!((out[0] - s).norm() < 1e-12);

        assert!(apply_beamformer(&[y], &[]).is_err());
    }
}
