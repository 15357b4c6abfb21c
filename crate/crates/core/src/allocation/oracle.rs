use alloc::vec;

use super::{RateAllocationProblem, RateVector};
use crate::{Error, Result};

/// Largest enumeration [`exhaustive_oracle`] accepts.
pub const ORACLE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// `None` when no allocation meets the noise bound.
    pub best_rates: Option<RateVector>,
    pub best_energy: Option<f64>,
    /// Number of allocations considered, `(b0 + 1)^M`.
    pub evaluated: u128,
}

/// Exact integer optimum by enumerating every allocation in
/// `{0, ..., b0}^M`. Candidates that cannot beat the incumbent's energy
/// skip the noise evaluation but still count as evaluated.
pub fn exhaustive_oracle(problem: &RateAllocationProblem) -> Result<OracleResult> {
    let m = problem.num_sensors();
    let base = problem.b0() as u128 + 1;
    let mut total: u128 = 1;
    for _ in 0..m {
        total = total.saturating_mul(base);
        if total > ORACLE_CAP {
            return Err(Error::TooLarge {
                candidates: base.saturating_pow(m as u32),
                cap: ORACLE_CAP,
            });
        }
    }

    let b0 = problem.b0() as f64;
    let mut bits = vec![0.0; m];
    let mut best: Option<(f64, RateVector)> = None;
    let mut evaluated: u128 = 0;
    loop {
        evaluated += 1;
        let energy = problem.energy(&bits);
        if best.as_ref().is_none_or(|(e, _)| energy < *e) && problem.is_feasible(&bits)? {
            best = Some((energy, RateVector::new(bits.clone())));
        }
        // odometer, least significant digit first
        let mut k = 0;
        while k < m && bits[k] == b0 {
            bits[k] = 0.0;
            k += 1;
        }
        if k == m {
            break;
        }
        bits[k] += 1.0;
    }
    let (best_energy, best_rates) = match best {
        Some((e, r)) => (Some(e), Some(r)),
        None => (None, None),
    };
    Ok(OracleResult {
        best_rates,
        best_energy,
        evaluated,
    })
}
