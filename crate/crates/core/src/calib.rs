//! Fairness calibration of the coupling `J`.
//!
//! Both players use the Pauli strategy compiled into z-y-z pulses. On a
//! single spin that pins Bob at 1/2; with a hidden second spin his mean payoff
//! depends on `J`, and a coupling where it returns to 1/2 hides the extra spin.

use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::error::{Error, Result};
use crate::game::{correlated_alice, independent_alice, GameSpec};
use crate::strategy::{pauli_control_strategy, PauliTable};

/// How Alice's two Pauli moves are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// 4 x 4 independent choices; with Bob's 4 that is 64 joint plays.
    #[default]
    Independent,
    /// Alice repeats her first choice; 4 x 4 joint plays.
    Correlated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Convention {
    pub table: PauliTable,
    pub averaging: Averaging,
}

/// Bob's exact mean payoff when everyone plays the Pauli control strategy.
pub fn bob_payoff_at(coupling: f64, chain: &ChainConfig, convention: Convention) -> Result<f64> {
    let spec = GameSpec::new(chain.with_coupling(coupling)?);
    let pauli = pauli_control_strategy(convention.table, chain.move_time).realize(spec.system());
    let alice = match convention.averaging {
        Averaging::Independent => independent_alice(&pauli, &pauli),
        Averaging::Correlated => correlated_alice(&pauli),
    };
    Ok(1.0 - spec.mean_payoff(&alice, &pauli)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

/// `(J, mean p_bob)` samples with strictly increasing `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffCurve {
    pub samples: Vec<(f64, f64)>,
}

impl PayoffCurve {
    /// Brackets `[J_k, J_{k+1}]` where `p_bob - 1/2` changes sign.
    pub fn crossings(&self) -> Vec<(f64, f64)> {
        self.samples
            .windows(2)
            .filter(|w| changes_sign(w[0].1 - 0.5, w[1].1 - 0.5))
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }
}

/// Offsets below this are rounding noise, not a side of 1/2.
const OFFSET_NOISE: f64 = 1e-13;

fn side(x: f64) -> i8 {
    if x.abs() <= OFFSET_NOISE {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

fn changes_sign(a: f64, b: f64) -> bool {
    side(a) * side(b) < 0
}

pub fn grid(min: f64, max: f64, steps: usize, scale: GridScale) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::InvalidConfig(format!("need J_min < J_max, got [{min}, {max}]")));
    }
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 grid points, got {steps}")));
    }
    let last = (steps - 1) as f64;
    match scale {
        GridScale::Linear => Ok((0..steps)
            .map(|k| if k + 1 == steps { max } else { min + (max - min) * k as f64 / last })
            .collect()),
        GridScale::Log => {
            if min <= 0.0 {
                return Err(Error::InvalidConfig(format!("log grid needs J_min > 0, got {min}")));
            }
            let (lo, hi) = (min.ln(), max.ln());
            Ok((0..steps)
                .map(|k| match k {
                    0 => min,
                    k if k + 1 == steps => max,
                    k => (lo + (hi - lo) * k as f64 / last).exp(),
                })
                .collect())
        }
    }
}

pub fn scan(
    min: f64,
    max: f64,
    steps: usize,
    scale: GridScale,
    chain: &ChainConfig,
    convention: Convention,
) -> Result<PayoffCurve> {
    let samples = grid(min, max, steps, scale)?
        .into_iter()
        .map(|j| Ok((j, bob_payoff_at(j, chain, convention)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PayoffCurve { samples })
}

/// Step of the coarse scan that locates the first crossing.
pub const COARSE_STEP: f64 = 0.05;
/// Where the coarse scan starts; `J = 0` is trivially fair.
pub const COARSE_START: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairCoupling {
    pub coupling: f64,
    pub bracket: (f64, f64),
    pub payoff_offset: f64,
}

/// Smallest coupling in `[lower, upper]` at which Bob's mean payoff crosses 1/2.
///
/// Walks up from `lower` in steps of [`COARSE_STEP`] to the first sign change
/// of `p_bob - 1/2`, then bisects that bracket down to `tol`.
pub fn find_fair_coupling(
    chain: &ChainConfig,
    lower: f64,
    upper: f64,
    tol: f64,
    convention: Convention,
) -> Result<FairCoupling> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
        return Err(Error::InvalidConfig(format!("invalid search range [{lower}, {upper}]")));
    }
    let offset = |j: f64| bob_payoff_at(j, chain, convention).map(|p| p - 0.5);

    // A start exactly on 1/2 carries no side information; the first point
    // with a side anchors the bracket.
    let mut lo = lower;
    let mut f_lo = offset(lo)?;
    let mut bracket = None;
    let mut k = 1;
    while bracket.is_none() {
        let hi = (lower + k as f64 * COARSE_STEP).min(upper);
        let f_hi = offset(hi)?;
        if changes_sign(f_lo, f_hi) {
            bracket = Some((lo, hi, f_lo));
        } else if hi >= upper {
            return Err(Error::NoRoot { lower, upper });
        }
        if side(f_hi) != 0 || side(f_lo) == 0 {
            lo = hi;
            f_lo = f_hi;
        }
        k += 1;
    }
    let (mut lo, mut hi, mut f_lo) = bracket.expect("loop exits with a bracket");
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = offset(mid)?;
        if side(f_mid) == 0 {
            lo = mid;
            hi = mid;
            break;
        }
        if changes_sign(f_lo, f_mid) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let coupling = 0.5 * (lo + hi);
    Ok(FairCoupling {
        coupling,
        bracket: (lo, hi),
        payoff_offset: offset(coupling)?,
    })
}

/// Default search window for [`find_fair_coupling`].
pub const DEFAULT_SEARCH_UPPER: f64 = 20.0;

/// First fair coupling of a two-spin chain with move time `move_time`.
pub fn two_spin_fair_coupling(move_time: f64, tol: f64) -> Result<FairCoupling> {
    let chain = ChainConfig::new(2, 0.0, move_time)?;
    find_fair_coupling(
        &chain,
        COARSE_START,
        DEFAULT_SEARCH_UPPER / move_time,
        tol,
        Convention::default(),
    )
}
