//! Small dense linear-algebra helpers shared by the beamforming and
//! optimization modules.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::{CMatrix, Error, Result};

/// Largest condition number accepted before a solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `4^b` for a non-negative rate. Integral rates take the exact power path.
pub fn pow4(bits: f64) -> f64 {
    if bits.fract() == 0.0 && bits.abs() < 500.0 {
        libm::pow(4.0, bits)
    } else {
        libm::exp2(2.0 * bits)
    }
}

/// `log_4 t`.
pub fn log4(t: f64) -> f64 {
    0.5 * libm::log2(t)
}

/// Largest entry magnitude of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |m - m^H|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Fails unless `m` is square and Hermitian to within [`HERMITIAN_TOL`]
/// relative to its largest entry.
pub fn ensure_hermitian(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * max_abs(m).max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> alloc::vec::Vec<f64> {
    let mut ev: alloc::vec::Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> alloc::vec::Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: alloc::vec::Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Cholesky factor of a Hermitian positive definite matrix whose condition
/// number has been checked against [`MAX_CONDITION`].
pub struct HermitianFactor {
    chol: Cholesky<crate::Complex64, Dyn>,
    condition: f64,
}

impl HermitianFactor {
    pub fn new(m: &CMatrix, what: &'static str) -> Result<Self> {
        ensure_hermitian(m, what)?;
        let h = hermitian_part(m);
        let ev = hermitian_eigenvalues(&h);
        let (lo, hi) = match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::invalid(alloc::format!("{what} is empty"))),
        };
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        let chol = Cholesky::new(h).ok_or(Error::IllConditioned { condition })?;
        Ok(Self { chol, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        self.chol.solve(rhs)
    }

    pub fn inverse(&self) -> CMatrix {
        let inv = self.chol.inverse();
        hermitian_part(&inv)
    }
}
