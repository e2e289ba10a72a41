//! Browser bindings for three interactive operations: the calibration curve,
//! a single-qubit round with Bob's move set by Euler angles, and a short
//! pulse optimization on the two-spin chain.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic can
//! be unit-tested natively.

use qubitflip::calib::{self, Convention, GridScale};
use qubitflip::chain::ChainConfig;
use qubitflip::game::play_unitary;
use qubitflip::optim::{optimize, OptimizationProblem, Player};
use qubitflip::qla::{hadamard, pauli, Axis};
use qubitflip::report::OptimizationReport;
use qubitflip::strategy::{pauli_strategy, EulerAngles};
use wasm_bindgen::prelude::*;

/// Keeps a browser tab responsive.
const MAX_RESTARTS: usize = 20;
const MAX_PULSES: usize = 9;
const FAIR_TOL: f64 = 1e-8;

pub fn payoff_curve(j_min: f64, j_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    let chain = ChainConfig::new(2, 0.0, 1.0).map_err(|e| e.to_string())?;
    let curve = calib::scan(j_min, j_max, steps, GridScale::Linear, &chain, Convention::default())
        .map_err(|e| e.to_string())?;
    Ok(curve.samples.into_iter().map(|(_, p)| p).collect())
}

pub fn fair_coupling() -> Result<f64, String> {
    calib::two_spin_fair_coupling(1.0, FAIR_TOL)
        .map(|f| f.coupling)
        .map_err(|e| e.to_string())
}

/// Alice's winning probability when Bob plays the given SU(2) element,
/// first against Alice's Hadamard trick `(H, X H)`, then against her uniform Pauli mix.
pub fn single_round(phi: f64, psi: f64, theta: f64) -> Result<[f64; 2], String> {
    let bob = EulerAngles { phi, psi, theta }.reconstruct();
    let h = hadamard();
    let vs_hadamard = play_unitary(&h, &bob, &(pauli(Axis::X) * &h)).map_err(|e| e.to_string())?.p_alice;
    let pauli = pauli_strategy();
    let mut vs_pauli = 0.0;
    for (a1, w1) in pauli.iter() {
        for (a2, w2) in pauli.iter() {
            vs_pauli += w1 * w2 * play_unitary(a1, &bob, a2).map_err(|e| e.to_string())?.p_alice;
        }
    }
    Ok([vs_hadamard, vs_pauli])
}

/// Optimization report JSON for `player` at the fair two-spin coupling.
pub fn optimize_report(player: &str, pulses: usize, restarts: usize, seed: u64) -> Result<String, String> {
    let player: Player = player.parse().map_err(|e: qubitflip::Error| e.to_string())?;
    if !(1..=MAX_PULSES).contains(&pulses) {
        return Err(format!("pulses per move must be in 1..={MAX_PULSES}"));
    }
    let restarts = restarts.clamp(1, MAX_RESTARTS);
    let chain = ChainConfig::new(2, fair_coupling()?, 1.0).map_err(|e| e.to_string())?;
    let problem = OptimizationProblem::new(chain, player, pulses).map_err(|e| e.to_string())?;
    let result = optimize(&problem, restarts, seed).map_err(|e| e.to_string())?;
    OptimizationReport::new(&problem, &result, restarts)
        .to_json()
        .map_err(|e| e.to_string())
}

fn js_err(msg: String) -> JsError {
    JsError::new(&msg)
}

/// Bob's mean payoff on an evenly spaced coupling grid.
#[wasm_bindgen(js_name = payoffCurve)]
pub fn payoff_curve_js(j_min: f64, j_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    payoff_curve(j_min, j_max, steps).map_err(js_err)
}

#[wasm_bindgen(js_name = fairCoupling)]
pub fn fair_coupling_js() -> Result<f64, JsError> {
    fair_coupling().map_err(js_err)
}

#[wasm_bindgen(js_name = singleRound)]
pub fn single_round_js(phi: f64, psi: f64, theta: f64) -> Result<Vec<f64>, JsError> {
    single_round(phi, psi, theta).map(Vec::from).map_err(js_err)
}

#[wasm_bindgen(js_name = optimizeControls)]
pub fn optimize_controls_js(player: &str, pulses: usize, restarts: usize, seed: u64) -> Result<String, JsError> {
    optimize_report(player, pulses, restarts, seed).map_err(js_err)
}
