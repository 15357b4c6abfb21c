use alloc::vec::Vec;

use super::problem::SdpProblem;
use crate::linalg::symmetric_eigenvalues;

pub struct Verification {
    /// `x` clamped into its bounds.
    pub x: Vec<f64>,
    pub min_eigenvalues: Vec<f64>,
    pub bound_violation: f64,
}

/// Checks `x` against the original (unscaled) problem: the normalized
/// smallest eigenvalue of every block, evaluated after clamping to bounds,
/// and the relative bound violation before clamping.
pub fn verify(problem: &SdpProblem, x: &[f64]) -> Verification {
    let mut clamped = x.to_vec();
    let mut bound_violation = 0.0_f64;
    for (i, xi) in clamped.iter_mut().enumerate() {
        let (lo, hi) = problem.bounds(i);
        if *xi < lo {
            bound_violation = bound_violation.max((lo - *xi) / lo.abs().max(1.0));
            *xi = lo;
        }
        if *xi > hi {
            bound_violation = bound_violation.max((*xi - hi) / hi.abs().max(1.0));
            *xi = hi;
        }
    }
    let min_eigenvalues = problem
        .blocks()
        .iter()
        .map(|b| {
            let m = b.evaluate(&clamped);
            let scale = m.amax().max(1.0);
            symmetric_eigenvalues(&m).first().copied().unwrap_or(0.0) / scale
        })
        .collect();
    Verification {
        x: clamped,
        min_eigenvalues,
        bound_violation,
    }
}
