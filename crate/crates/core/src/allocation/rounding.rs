use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RateAllocationProblem, RateVector, RATE_TIE_TOL};
use crate::{Error, Result};

pub const DEFAULT_DRAWS: usize = 64;

fn snap(b: f64) -> f64 {
    let r = libm::round(b);
    if (b - r).abs() <= RATE_TIE_TOL {
        r
    } else {
        b
    }
}

/// Integer rates from continuous ones.
///
/// Each draw rounds every `b_k` up with probability `frac(b_k)` and down
/// otherwise; the cheapest feasible draw wins. Draw `i` uses a ChaCha8
/// stream `i` under `seed`, so results do not depend on evaluation order.
/// Rates within [`RATE_TIE_TOL`] of an integer are taken as that integer.
///
/// Without a feasible draw the fallbacks are, in order, the ceiling of the
/// snapped rates, the ceiling of the raw rates and `b0` everywhere.
pub fn randomized_round(
    rates: &RateVector,
    problem: &RateAllocationProblem,
    draws: usize,
    seed: u64,
) -> Result<RateVector> {
    let m = problem.num_sensors();
    if rates.len() != m {
        return Err(Error::DimensionMismatch {
            what: "rates",
            expected: m,
            found: rates.len(),
        });
    }
    let b0 = problem.b0() as f64;
    let snapped: Vec<f64> = rates.bits.iter().map(|&b| snap(b.clamp(0.0, b0))).collect();
    let floor: Vec<f64> = snapped.iter().map(|b| libm::floor(*b)).collect();
    let frac: Vec<f64> = snapped.iter().zip(&floor).map(|(b, f)| b - f).collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw as u64);
        let cand: Vec<f64> = (0..m)
            .map(|k| {
                let u: f64 = rng.random();
                if u < frac[k] {
                    floor[k] + 1.0
                } else {
                    floor[k]
                }
            })
            .collect();
        if seen.contains(&cand) {
            continue;
        }
        let energy = problem.energy(&cand);
        let cheaper = best.as_ref().is_none_or(|(e, _)| energy < *e);
        if cheaper && problem.is_feasible(&cand)? {
            best = Some((energy, cand.clone()));
        }
        seen.push(cand);
    }
    if let Some((_, bits)) = best {
        return Ok(RateVector::new(bits));
    }

    let fallbacks = [
        snapped.iter().map(|b| libm::ceil(*b)).collect::<Vec<_>>(),
        rates.bits.iter().map(|b| libm::ceil(b.clamp(0.0, b0))).collect(),
        alloc::vec![b0; m],
    ];
    for cand in fallbacks {
        if problem.is_feasible(&cand)? {
            return Ok(RateVector::new(cand));
        }
    }
    Err(Error::failed("infeasible even with every sensor at b0", None))
}
