use alloc::vec;
use alloc::vec::Vec;

use super::rd::{bound_is_tight, build_md_selection_sdp, require_optimal};
use super::{descending_groups, smallest_feasible_prefix, RateAllocationProblem, RateVector, SelectionVector, RATE_TIE_TOL};
use crate::linalg::log4;
use crate::sdp::{solve, SdpOptions, SdpSolution};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SelectionOutcome {
    pub relaxed: SelectionVector,
    pub selection: SelectionVector,
    /// Output noise power of the selected subset at `b0` bits.
    pub noise_power: f64,
    /// `None` when the bound left no slack and everyone was selected.
    pub sdp: Option<SdpSolution>,
}

/// Sensor selection: solve the relaxed program over `p ∈ [0, 1]`, then keep
/// the smallest feasible set of top-ranked sensors by relaxed `p`.
///
/// Sensors whose `p` agree to within [`RATE_TIE_TOL`] in the `log4` domain
/// enter together.
pub fn md_lcmv_select(problem: &RateAllocationProblem, opts: &SdpOptions) -> Result<SelectionOutcome> {
    let m = problem.num_sensors();
    let (p, sdp) = if bound_is_tight(problem)? {
        (vec![1.0; m], None)
    } else {
        let sol = solve(&build_md_selection_sdp(problem)?, opts)?;
        require_optimal(&sol, "selection")?;
        (sol.x[..m].iter().map(|p| p.clamp(0.0, 1.0)).collect(), Some(sol))
    };
    let score: Vec<f64> = p.iter().map(|&p| if p > 0.0 { log4(p) } else { f64::NEG_INFINITY }).collect();
    let groups = descending_groups(&score, RATE_TIE_TOL);
    let bound = problem.noise_bound();
    let n = smallest_feasible_prefix(&groups, usize::MAX, |s| {
        problem.subset_noise(s).is_some_and(|tau| tau <= bound)
    })
    .ok_or_else(|| Error::failed("infeasible even with every sensor selected", sdp.as_ref().map(|s| s.status)))?;
    let subset: Vec<usize> = groups[..n].iter().flatten().copied().collect();
    let selection = SelectionVector::from_subset(m, &subset);
    let noise_power = problem
        .subset_noise(&selection.subset())
        .ok_or_else(|| Error::failed("selected subset lost feasibility", None))?;
    Ok(SelectionOutcome {
        relaxed: SelectionVector { p },
        selection,
        noise_power,
        sdp,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    /// Selected sensors are those with rate at least this.
    pub threshold: f64,
    pub subset: Vec<usize>,
    pub noise_power: f64,
}

/// Threshold on continuous rates (normally [`RdSolution::ranking`](super::RdSolution::ranking))
/// whose selected set `{k : b_k ≥ T}`, every
/// member at `b0` bits, meets `τ ≤ (β/α)(1 + epsilon)`.
///
/// Candidate thresholds are the distinct rates (merged within
/// [`RATE_TIE_TOL`]); the largest feasible one is found by bisection over
/// that sorted grid, taking at most `max_iter` halvings.
pub fn bisection_threshold(
    rates: &RateVector,
    problem: &RateAllocationProblem,
    epsilon: f64,
    max_iter: usize,
) -> Result<ThresholdResult> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(alloc::format!("epsilon {epsilon} must be positive")));
    }
    if rates.len() != problem.num_sensors() {
        return Err(Error::DimensionMismatch {
            what: "rates",
            expected: problem.num_sensors(),
            found: rates.len(),
        });
    }
    let groups = descending_groups(&rates.bits, RATE_TIE_TOL);
    let bound = problem.noise_bound() * (1.0 + epsilon);
    let n = smallest_feasible_prefix(&groups, max_iter, |s| {
        problem.subset_noise(s).is_some_and(|tau| tau <= bound)
    })
    .ok_or_else(|| Error::failed("infeasible even with every sensor selected", None))?;
    let mut subset: Vec<usize> = groups[..n].iter().flatten().copied().collect();
    subset.sort_unstable();
    let threshold = subset.iter().map(|&k| rates.bits[k]).fold(f64::INFINITY, f64::min);
    let noise_power = problem
        .subset_noise(&subset)
        .ok_or_else(|| Error::failed("selected subset lost feasibility", None))?;
    Ok(ThresholdResult {
        threshold,
        subset,
        noise_power,
    })
}
