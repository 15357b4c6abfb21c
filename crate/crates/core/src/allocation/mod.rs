//! Rate allocation and sensor selection.
//!
//! Given the noise covariance, LCMV constraints and channel costs, pick
//! per-sensor bit rates `b_k ∈ {0, ..., b0}` of minimum total transmission
//! energy such that the LCMV output noise power, with the quantization noise
//! those rates imply, stays below `β / α`. `β` is the noise power reached
//! when every sensor sends `b0` bits.
//!
//! With `t_k = 4^{b_k}` the quantization noise precision is `diag(e ⊙ t)`,
//! `e_k = 12 / A_k²`, and the noise constraint becomes two LMIs that are
//! affine in `t` and in an auxiliary Hermitian `U x U` matrix `Z`:
//!
//! ```text
//! [ Z    f   ]                 [ R⁻¹ + diag(e ⊙ t)   R⁻¹ Λ          ]
//! [ f^H  β/α ]  ⪰ 0,           [ Λ^H R⁻¹             Λ^H R⁻¹ Λ − Z  ]  ⪰ 0
//! ```
//!
//! Sensor selection is the same program over `p = t / 4^{b0}` with distance
//! costs; a selected sensor sends `b0` bits, an unselected one nothing.

mod oracle;
mod rd;
mod rounding;
mod selection;

pub use oracle::{exhaustive_oracle, OracleResult, ORACLE_CAP};
pub use rd::{
    boolean_form_energy, build_boolean_form, build_md_selection_sdp, build_rd_lcmv_sdp, solve_boolean_form,
    solve_rd_lcmv, RdSolution,
};
pub use rounding::{randomized_round, DEFAULT_DRAWS};
pub use selection::{bisection_threshold, md_lcmv_select, SelectionOutcome, ThresholdResult};

use alloc::format;
use alloc::vec::Vec;

use crate::beamforming::{output_noise_power, LinearConstraintSet};
use crate::energy::ChannelModel;
use crate::linalg::{ensure_hermitian, log4, pow4};
use crate::quantization::quant_noise_variance;
use crate::{CMatrix, Complex64, Error, Result};

/// Two rates closer than this (in bits) are the same rate.
pub const RATE_TIE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RateAllocationProblem {
    noise_cov: CMatrix,
    constraints: LinearConstraintSet,
    channel: ChannelModel,
    amplitudes: Vec<f64>,
    b0: u32,
    alpha: f64,
    beta: f64,
    e: Vec<f64>,
}

impl RateAllocationProblem {
    /// Builds the problem and computes `β` with every sensor at `b0`.
    pub fn new(
        noise_cov: CMatrix,
        constraints: LinearConstraintSet,
        channel: ChannelModel,
        amplitudes: Vec<f64>,
        b0: u32,
        alpha: f64,
    ) -> Result<Self> {
        Self::with_beta(noise_cov, constraints, channel, amplitudes, b0, alpha, None)
    }

    /// As [`new`](Self::new) but with a caller-supplied `β` when `beta` is
    /// `Some`.
    pub fn with_beta(
        noise_cov: CMatrix,
        constraints: LinearConstraintSet,
        channel: ChannelModel,
        amplitudes: Vec<f64>,
        b0: u32,
        alpha: f64,
        beta: Option<f64>,
    ) -> Result<Self> {
        let m = constraints.num_sensors();
        for (what, found) in [
            ("noise covariance", noise_cov.nrows()),
            ("noise covariance", noise_cov.ncols()),
            ("channel", channel.len()),
            ("amplitudes", amplitudes.len()),
        ] {
            if found != m {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: m,
                    found,
                });
            }
        }
        ensure_hermitian(&noise_cov, "noise covariance")?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")));
        }
        if b0 == 0 || b0 > 32 {
            return Err(Error::invalid(format!("b0 {b0} outside 1..=32")));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::invalid(format!("amplitude {a} must be positive")));
        }
        let e = amplitudes.iter().map(|a| 12.0 / (a * a)).collect();
        let mut problem = Self {
            noise_cov,
            constraints,
            channel,
            amplitudes,
            b0,
            alpha,
            beta: f64::NAN,
            e,
        };
        problem.beta = match beta {
            Some(b) => b,
            None => compute_beta(&problem)?,
        };
        if !(problem.beta > 0.0 && problem.beta.is_finite()) {
            return Err(Error::invalid(format!("beta {} must be positive", problem.beta)));
        }
        Ok(problem)
    }

    /// Same problem with a different `α` (and the same `β`).
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn noise_cov(&self) -> &CMatrix {
        &self.noise_cov
    }

    pub fn constraints(&self) -> &LinearConstraintSet {
        &self.constraints
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn b0(&self) -> u32 {
        self.b0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `12 / A_k²`.
    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn num_sensors(&self) -> usize {
        self.amplitudes.len()
    }

    /// `β / α`.
    pub fn noise_bound(&self) -> f64 {
        self.beta / self.alpha
    }

    /// `R_nn + R_qq(b)` over all sensors. Zero-rate sensors stay in with
    /// variance `A²/12`.
    pub fn total_noise_cov(&self, bits: &[f64]) -> CMatrix {
        let mut r = self.noise_cov.clone();
        for (k, &b) in bits.iter().enumerate() {
            r[(k, k)] += Complex64::new(quant_noise_variance(self.amplitudes[k], b), 0.0);
        }
        r
    }

    /// LCMV output noise power with every sensor quantized at `bits`.
    pub fn noise_at_rates(&self, bits: &[f64]) -> Result<f64> {
        if bits.len() != self.num_sensors() {
            return Err(Error::DimensionMismatch {
                what: "allocation",
                expected: self.num_sensors(),
                found: bits.len(),
            });
        }
        output_noise_power(&self.total_noise_cov(bits), &self.constraints)
    }

    pub fn is_feasible(&self, bits: &[f64]) -> Result<bool> {
        Ok(self.noise_at_rates(bits)? <= self.noise_bound())
    }

    /// Output noise power when only `subset` transmits, each at `b0` bits.
    /// `None` when the subset cannot satisfy the constraints at all (fewer
    /// sensors than constraints, or a rank-deficient restriction).
    pub fn subset_noise(&self, subset: &[usize]) -> Option<f64> {
        if subset.len() < self.constraints.num_constraints() {
            return None;
        }
        let cons = self.constraints.restrict(subset).ok()?;
        let b0 = self.b0 as f64;
        let r = CMatrix::from_fn(subset.len(), subset.len(), |i, j| {
            let (k, l) = (subset[i], subset[j]);
            let mut v = self.noise_cov[(k, l)];
            if i == j {
                v += Complex64::new(quant_noise_variance(self.amplitudes[k], b0), 0.0);
            }
            v
        });
        output_noise_power(&r, &cons).ok()
    }

    pub fn energy(&self, bits: &[f64]) -> f64 {
        self.channel.total_energy(bits)
    }
}

/// Output noise power with every sensor at `b0` bits.
pub fn compute_beta(problem: &RateAllocationProblem) -> Result<f64> {
    let full = alloc::vec![problem.b0 as f64; problem.num_sensors()];
    problem.noise_at_rates(&full)
}

/// Per-sensor rates in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector {
    pub bits: Vec<f64>,
}

impl RateVector {
    pub fn new(bits: Vec<f64>) -> Self {
        Self { bits }
    }

    pub fn from_t(t: &[f64]) -> Self {
        Self {
            bits: t.iter().map(|&t| log4(t)).collect(),
        }
    }

    /// `4^{b_k}`.
    pub fn t(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| pow4(b)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.bits.iter().all(|b| b.fract() == 0.0)
    }

    /// Sensors with a nonzero rate.
    pub fn active(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&k| self.bits[k] > 0.0).collect()
    }
}

impl AsRef<[f64]> for RateVector {
    fn as_ref(&self) -> &[f64] {
        &self.bits
    }
}

/// Relaxed (`p ∈ [0, 1]`) or final (`p ∈ {0, 1}`) selection.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionVector {
    pub p: Vec<f64>,
}

impl SelectionVector {
    pub fn from_subset(m: usize, subset: &[usize]) -> Self {
        let mut p = alloc::vec![0.0; m];
        for &k in subset {
            p[k] = 1.0;
        }
        Self { p }
    }

    pub fn is_boolean(&self) -> bool {
        self.p.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    pub fn subset(&self) -> Vec<usize> {
        (0..self.p.len()).filter(|&k| self.p[k] >= 0.5).collect()
    }

    /// `b0` on selected sensors, 0 elsewhere.
    pub fn to_rates(&self, b0: u32) -> RateVector {
        RateVector::new(self.p.iter().map(|&p| if p >= 0.5 { b0 as f64 } else { 0.0 }).collect())
    }
}

/// Groups sensor indices by descending `score`, merging neighbours whose
/// scores differ by at most `tol`.
pub(crate) fn descending_groups(score: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NAN;
    for k in order {
        match groups.last_mut() {
            Some(g) if last == score[k] || last - score[k] <= tol => g.push(k),
            _ => groups.push(alloc::vec![k]),
        }
        last = score[k];
    }
    groups
}

/// Smallest prefix of `groups` whose union is feasible, found by bisection
/// on the prefix length (output noise never increases as sensors are
/// added). Returns the number of groups, or `None` when even all of them
/// fail.
pub(crate) fn smallest_feasible_prefix(
    groups: &[Vec<usize>],
    max_iter: usize,
    mut feasible: impl FnMut(&[usize]) -> bool,
) -> Option<usize> {
    let prefix = |n: usize| -> Vec<usize> {
        let mut s: Vec<usize> = groups[..n].iter().flatten().copied().collect();
        s.sort_unstable();
        s
    };
    let n = groups.len();
    if n == 0 || !feasible(&prefix(n)) {
        return None;
    }
    // invariant: prefix(hi) feasible, prefix(lo) infeasible (lo = 0 is empty)
    let (mut lo, mut hi) = (0usize, n);
    let mut iter = 0;
    while hi - lo > 1 && iter < max_iter {
        let mid = lo + (hi - lo) / 2;
        if feasible(&prefix(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    Some(hi)
}
