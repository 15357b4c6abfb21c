use alloc::vec::Vec;

use super::{RateAllocationProblem, RateVector, SelectionVector};
use crate::linalg::{hermitian_part, log4, pow4, HermitianFactor};
use crate::sdp::{solve, HermitianLmi, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
use crate::{Complex64, Error, Result};

/// Variable layout shared by every form: one rate variable per sensor,
/// then the real diagonal of `Z`, then `(Re, Im)` of each `Z_uv`, `u < v`.
struct Layout {
    m: usize,
    u: usize,
}

impl Layout {
    fn num_vars(&self) -> usize {
        self.m + self.u * self.u
    }

    fn z_diag(&self, u: usize) -> usize {
        self.m + u
    }

    /// `(re, im)` variable indices of `Z_uv` for `u < v`.
    fn z_off(&self, u: usize, v: usize) -> (usize, usize) {
        // row-major position of (u, v) in the strict upper triangle
        let pos = u * (2 * self.u - u - 1) / 2 + (v - u - 1);
        let base = self.m + self.u + 2 * pos;
        (base, base + 1)
    }
}

fn one(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Both LMIs with the quantization precision `diag(e ⊙ rate_scale · x)` in
/// the rate variables `x`, objective `weights · x` and bounds `[lo, hi]` on
/// every rate variable.
///
/// Each block is congruence-scaled (which leaves `⪰ 0` unchanged) so that
/// its constant diagonal is 1: sensor rows by `1/sqrt((R⁻¹)_kk)`,
/// constraint rows by `1/sqrt((Λ^H R⁻¹ Λ)_uu)` and the bound row by
/// `sqrt(α/β)`.
fn build(problem: &RateAllocationProblem, rate_scale: f64, weights: &[f64], lo: f64, hi: f64) -> Result<SdpProblem> {
    let m = problem.num_sensors();
    let cons = problem.constraints();
    let u = cons.num_constraints();
    let layout = Layout { m, u };

    let rinv = HermitianFactor::new(problem.noise_cov(), "noise covariance")?.inverse();
    let p = &rinv * cons.lambda();
    let g = hermitian_part(&(cons.lambda().adjoint() * &p));
    let delta: Vec<f64> = (0..m).map(|k| 1.0 / rinv[(k, k)].re.sqrt()).collect();
    let sigma: Vec<f64> = (0..u).map(|i| 1.0 / g[(i, i)].re.sqrt()).collect();
    if delta.iter().chain(&sigma).any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    let s = (problem.alpha() / problem.beta()).sqrt();

    let mut sdp = SdpProblem::new(layout.num_vars());
    for k in 0..m {
        sdp.set_objective(k, weights[k]);
        sdp.set_bounds(k, lo, hi);
    }

    // [Z f; f^H β/α]
    let mut top = HermitianLmi::new(u + 1);
    for i in 0..u {
        top.push(i, i, Some(layout.z_diag(i)), one(sigma[i] * sigma[i]));
        for j in i + 1..u {
            let (re, im) = layout.z_off(i, j);
            let sc = sigma[i] * sigma[j];
            top.push(i, j, Some(re), one(sc));
            top.push(i, j, Some(im), Complex64::new(0.0, sc));
        }
        top.push(i, u, None, cons.f()[i] * (sigma[i] * s));
    }
    top.push(u, u, None, one(problem.beta() / problem.alpha() * s * s));
    sdp.add_block(top.to_real_block());

    // [R⁻¹ + diag(e ⊙ t)  R⁻¹Λ; Λ^H R⁻¹  Λ^H R⁻¹ Λ − Z]
    let mut bottom = HermitianLmi::new(m + u);
    let e = problem.e();
    for k in 0..m {
        bottom.push(k, k, None, one(rinv[(k, k)].re * delta[k] * delta[k]));
        bottom.push(k, k, Some(k), one(e[k] * rate_scale * delta[k] * delta[k]));
        for l in k + 1..m {
            bottom.push(k, l, None, rinv[(k, l)] * (delta[k] * delta[l]));
        }
        for i in 0..u {
            bottom.push(k, m + i, None, p[(k, i)] * (delta[k] * sigma[i]));
        }
    }
    for i in 0..u {
        let sc = sigma[i] * sigma[i];
        bottom.push(m + i, m + i, None, one(g[(i, i)].re * sc));
        bottom.push(m + i, m + i, Some(layout.z_diag(i)), one(-sc));
        for j in i + 1..u {
            let sc = sigma[i] * sigma[j];
            bottom.push(m + i, m + j, None, g[(i, j)] * sc);
            let (re, im) = layout.z_off(i, j);
            bottom.push(m + i, m + j, Some(re), one(-sc));
            bottom.push(m + i, m + j, Some(im), Complex64::new(0.0, -sc));
        }
    }
    sdp.add_block(bottom.to_real_block());
    Ok(sdp)
}

fn cost_weights(problem: &RateAllocationProblem) -> Vec<f64> {
    (0..problem.num_sensors()).map(|k| problem.channel().cost_weight(k)).collect()
}

/// Rate allocation SDP over `t_k = 4^{b_k}`, `0 ≤ t_k ≤ 4^{b0}`, with
/// objective `Σ d_k^r V_k t_k` (the constant `-Σ d_k^r V_k` is dropped).
///
/// `t_k < 1` is a "negative rate": the relaxation then assumes more
/// quantization noise than a silent sensor produces.
pub fn build_rd_lcmv_sdp(problem: &RateAllocationProblem) -> Result<SdpProblem> {
    build(problem, 1.0, &cost_weights(problem), 0.0, pow4(problem.b0() as f64))
}

/// The same program over `p_k = t_k / 4^{b0}`, `0 ≤ p_k ≤ 1`, with
/// objective `4^{b0} Σ d_k^r V_k p_k`. Its optimal value, less
/// `Σ d_k^r V_k`, is the rate allocation energy.
pub fn build_boolean_form(problem: &RateAllocationProblem) -> Result<SdpProblem> {
    let scale = pow4(problem.b0() as f64);
    let w: Vec<f64> = cost_weights(problem).iter().map(|c| c * scale).collect();
    build(problem, scale, &w, 0.0, 1.0)
}

/// Sensor selection relaxation: objective `Σ d_k^r p_k`, `0 ≤ p_k ≤ 1`.
pub fn build_md_selection_sdp(problem: &RateAllocationProblem) -> Result<SdpProblem> {
    let w: Vec<f64> = (0..problem.num_sensors())
        .map(|k| problem.channel().distance_weight(k))
        .collect();
    build(problem, pow4(problem.b0() as f64), &w, 0.0, 1.0)
}

/// Solution of the rate allocation relaxation.
#[derive(Clone, Debug)]
pub struct RdSolution {
    /// Raw `t_k = 4^{b_k}` in `[0, 4^{b0}]`.
    pub t: Vec<f64>,
    /// `log4 t_k` clamped to `[0, b0]`.
    pub rates: RateVector,
    /// Relaxation optimum `Σ d_k^r V_k (t_k - 1)`, a lower bound on the
    /// energy of every feasible integer allocation.
    pub energy: f64,
    /// `None` when the bound leaves no slack and the program was not solved
    /// (see [`solve_rd_lcmv`]).
    pub sdp: Option<SdpSolution>,
}

impl RdSolution {
    /// Unclamped `log4 t_k`, negative (or `-inf`) below one bit of
    /// precision. Used to rank sensors for thresholding.
    pub fn ranking(&self) -> RateVector {
        RateVector::from_t(&self.t)
    }
}

pub(crate) fn require_optimal(sol: &SdpSolution, what: &str) -> Result<()> {
    if sol.status == SdpStatus::Optimal {
        Ok(())
    } else {
        Err(Error::failed(alloc::format!("{what} relaxation not solved"), Some(sol.status)))
    }
}

/// Relative slack below which `β/α` is treated as equal to the all-`b0`
/// noise power.
const TIGHT_RTOL: f64 = 1e-9;

/// `Ok(true)` when the bound equals the all-`b0` noise power, so that
/// (for any sensor the beamformer uses) the only feasible point is every
/// sensor at `b0`. Such programs have no strictly feasible point.
pub(crate) fn bound_is_tight(problem: &RateAllocationProblem) -> Result<bool> {
    let full = problem.noise_at_rates(&alloc::vec![problem.b0() as f64; problem.num_sensors()])?;
    if full > problem.noise_bound() {
        return Err(Error::failed("infeasible even with every sensor at b0", None));
    }
    Ok(full >= problem.noise_bound() * (1.0 - TIGHT_RTOL))
}

/// Solves the relaxation and maps `t` back to rates. A bound with no slack
/// (`α = 1` with the computed `β`) returns `b0` everywhere without calling
/// the solver.
pub fn solve_rd_lcmv(problem: &RateAllocationProblem, opts: &SdpOptions) -> Result<RdSolution> {
    let m = problem.num_sensors();
    let b0 = problem.b0() as f64;
    let (t, sdp) = if bound_is_tight(problem)? {
        (alloc::vec![pow4(b0); m], None)
    } else {
        let sol = solve(&build_rd_lcmv_sdp(problem)?, opts)?;
        require_optimal(&sol, "rate allocation")?;
        (sol.x[..m].to_vec(), Some(sol))
    };
    let bits: Vec<f64> = t.iter().map(|&t| log4(t).clamp(0.0, b0)).collect();
    let energy = (0..m).map(|k| problem.channel().cost_weight(k) * (t[k] - 1.0)).sum();
    Ok(RdSolution {
        t,
        rates: RateVector::new(bits),
        energy,
        sdp,
    })
}

/// Solves the Boolean form and returns the relaxed `p` with the SDP result.
pub fn solve_boolean_form(problem: &RateAllocationProblem, opts: &SdpOptions) -> Result<(SelectionVector, SdpSolution)> {
    let sdp = build_boolean_form(problem)?;
    let sol = solve(&sdp, opts)?;
    require_optimal(&sol, "boolean form")?;
    let p = sol.x[..problem.num_sensors()].to_vec();
    Ok((SelectionVector { p }, sol))
}

/// Energy of the rates `b_k = log4 p_k + b0` encoded by a Boolean-form `p`.
pub fn boolean_form_energy(problem: &RateAllocationProblem, p: &SelectionVector) -> f64 {
    let scale = pow4(problem.b0() as f64);
    p.p.iter()
        .enumerate()
        .map(|(k, &pk)| problem.channel().cost_weight(k) * (scale * pk - 1.0))
        .sum()
}
