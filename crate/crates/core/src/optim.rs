//! Cheating by optimal control: maximize one player's mean payoff over pulse amplitudes.
//!
//! The opponent plays a fixed mixed strategy (the Pauli strategy compiled to
//! pulses, by default). Alice controls both of her moves; Bob controls his one
//! move. Gradients are exact: each pulse propagator is differentiated through
//! its spectral decomposition, and sensitivities are accumulated by
//! propagating states forward and costates backward through the move.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cg::{self, CgSettings, Termination};
use crate::chain::{ChainConfig, ChainSystem, ControlAxis, ControlSequence};
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::qla::{self, CMatrix, CVector, HermitianEigen, C64};
use crate::strategy::{pauli_control_strategy, MixedStrategy, PauliTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn moves(self) -> usize {
        match self {
            Player::Alice => 2,
            Player::Bob => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Alice => "alice",
            Player::Bob => "bob",
        }
    }
}

impl std::str::FromStr for Player {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(Player::Alice),
            "bob" => Ok(Player::Bob),
            other => Err(Error::InvalidConfig(format!("unknown player `{other}`"))),
        }
    }
}

/// Everything needed to differentiate through one pulse.
struct PulseFactor {
    eigen: HermitianEigen,
    propagator: CMatrix,
    /// `K o (V^dagger A V)`, the derivative in the eigenbasis.
    derivative: CMatrix,
}

/// `sigma_axis (x) 1` applied to the rows of `m` without a dense product.
fn apply_control(axis: ControlAxis, m: &CMatrix) -> CMatrix {
    let half = m.nrows() / 2;
    let mut out = m.clone();
    match axis {
        ControlAxis::Z => {
            out.rows_mut(half, half).iter_mut().for_each(|z| *z = -*z);
        }
        ControlAxis::Y => {
            // [[0, -i], [i, 0]]: top <- -i * bottom, bottom <- i * top
            let top = m.rows(0, half) * C64::new(0.0, 1.0);
            let bottom = m.rows(half, half) * C64::new(0.0, -1.0);
            out.rows_mut(0, half).copy_from(&bottom);
            out.rows_mut(half, half).copy_from(&top);
        }
    }
    out
}

/// A move's pulses, differentiated.
struct MoveFactors {
    pulses: Vec<(ControlAxis, PulseFactor)>,
    unitary: CMatrix,
}

impl MoveFactors {
    fn new(system: &ChainSystem, seq: &ControlSequence) -> Self {
        let dt = seq.slice_duration(system.config().move_time);
        let mut unitary = qla::identity(system.dim());
        let pulses = seq
            .pulses()
            .iter()
            .map(|p| {
                let eigen = system.pulse_eigen(p);
                let propagator = eigen.propagator(dt);
                let v = &eigen.vectors;
                let control_eig = v.adjoint() * apply_control(p.axis, v);
                let derivative = control_eig.component_mul(&eigen.frechet_kernel(dt));
                unitary = &propagator * &unitary;
                (p.axis, PulseFactor { eigen, propagator, derivative })
            })
            .collect();
        Self { pulses, unitary }
    }

    /// `d/dh_k sum_m 2 Re <costate_m| U |input_m>` for every pulse `k`.
    fn gradient(&self, inputs: &[CVector], costates: &[CVector]) -> Vec<f64> {
        let n = self.pulses.len();
        // forward states before each pulse
        let mut states: Vec<Vec<CVector>> = Vec::with_capacity(n);
        let mut current: Vec<CVector> = inputs.to_vec();
        for (_, f) in &self.pulses {
            let next = current.iter().map(|s| &f.propagator * s).collect();
            states.push(current);
            current = next;
        }
        let mut grad = vec![0.0; n];
        let mut back: Vec<CVector> = costates.to_vec();
        for k in (0..n).rev() {
            let f = &self.pulses[k].1;
            let v = &f.eigen.vectors;
            let mut total = 0.0;
            for (lam, phi) in back.iter().zip(&states[k]) {
                let lam_e = v.adjoint() * lam;
                let phi_e = v.adjoint() * phi;
                total += 2.0 * lam_e.dotc(&(&f.derivative * phi_e)).re;
            }
            grad[k] = total;
            back = back.iter().map(|l| f.propagator.adjoint() * l).collect();
        }
        grad
    }
}

/// Projects onto the first spin being `|1>` (`outcome = true`) or `|0>`.
fn project_first(psi: &CVector, outcome: bool) -> CVector {
    let half = psi.len() / 2;
    let mut out = psi.clone();
    let zero_range = if outcome { 0..half } else { half..psi.len() };
    for i in zero_range {
        out[i] = qla::ZERO;
    }
    out
}

fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// One player's payoff maximization against a fixed mixed opponent.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    spec: GameSpec,
    player: Player,
    pulses_per_move: usize,
    opponent: MixedStrategy<ControlSequence>,
    opponent_unitaries: MixedStrategy<CMatrix>,
}

impl OptimizationProblem {
    /// Opponent plays the published Pauli table.
    pub fn new(chain: ChainConfig, player: Player, pulses_per_move: usize) -> Result<Self> {
        let opponent = pauli_control_strategy(PauliTable::Printed, chain.move_time);
        Self::with_opponent(chain, player, pulses_per_move, opponent)
    }

    pub fn with_opponent(
        chain: ChainConfig,
        player: Player,
        pulses_per_move: usize,
        opponent: MixedStrategy<ControlSequence>,
    ) -> Result<Self> {
        if pulses_per_move == 0 {
            return Err(Error::InvalidConfig("need at least one pulse per move".into()));
        }
        let spec = GameSpec::new(chain);
        let opponent_unitaries = opponent.realize(spec.system());
        Ok(Self {
            spec,
            player,
            pulses_per_move,
            opponent,
            opponent_unitaries,
        })
    }

    pub fn chain(&self) -> &ChainConfig {
        self.spec.chain()
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn pulses_per_move(&self) -> usize {
        self.pulses_per_move
    }

    pub fn opponent(&self) -> &MixedStrategy<ControlSequence> {
        &self.opponent
    }

    pub fn variable_count(&self) -> usize {
        self.player.moves() * self.pulses_per_move
    }

    /// The z-first sequences encoded by an amplitude vector, one per move.
    pub fn sequences(&self, amplitudes: &[f64]) -> Vec<ControlSequence> {
        assert_eq!(amplitudes.len(), self.variable_count(), "amplitude vector length");
        amplitudes
            .chunks(self.pulses_per_move)
            .map(ControlSequence::z_first)
            .collect()
    }

    pub fn objective(&self, amplitudes: &[f64]) -> f64 {
        self.evaluate_moves(&self.sequences(amplitudes))
    }

    pub fn gradient(&self, amplitudes: &[f64]) -> Vec<f64> {
        self.value_and_gradient(amplitudes).1
    }

    /// Mean payoff of explicit move sequences (any pulse count or axis pattern).
    pub fn evaluate_moves(&self, moves: &[ControlSequence]) -> f64 {
        assert_eq!(moves.len(), self.player.moves(), "one sequence per move");
        let system = self.spec.system();
        let start = self.spec.initial_state();
        let value = match self.player {
            Player::Alice => {
                let u1 = system.evolve(&moves[0]);
                let u2 = system.evolve(&moves[1]);
                let after = &u1 * &start;
                self.opponent_unitaries
                    .iter()
                    .map(|(v, w)| w * qla::first_qubit_one_probability(&(&u2 * (v * &after))))
                    .sum::<f64>()
            }
            Player::Bob => {
                let b = system.evolve(&moves[0]);
                let mut total = 0.0;
                for (ma, wa) in self.opponent_unitaries.iter() {
                    let mid = &b * (ma * &start);
                    for (mb, wb) in self.opponent_unitaries.iter() {
                        total += wa * wb * (1.0 - qla::first_qubit_one_probability(&(mb * &mid)));
                    }
                }
                total
            }
        };
        value.clamp(0.0, 1.0)
    }

    pub fn value_and_gradient(&self, amplitudes: &[f64]) -> (f64, Vec<f64>) {
        let seqs = self.sequences(amplitudes);
        let system = self.spec.system();
        let start = self.spec.initial_state();
        match self.player {
            Player::Alice => {
                let m1 = MoveFactors::new(system, &seqs[0]);
                let m2 = MoveFactors::new(system, &seqs[1]);
                let after_first = &m1.unitary * &start;
                let mut value = 0.0;
                let mut first_costate = CVector::zeros(start.len());
                let mut second_inputs = Vec::new();
                let mut second_costates = Vec::new();
                for (v, w) in self.opponent_unitaries.iter() {
                    let before_second = v * &after_first;
                    let psi = &m2.unitary * &before_second;
                    let tails = project_first(&psi, true);
                    value += w * norm_sqr(&tails);
                    let lam = tails * C64::new(w, 0.0);
                    first_costate += v.adjoint() * (m2.unitary.adjoint() * &lam);
                    second_inputs.push(before_second);
                    second_costates.push(lam);
                }
                let mut grad = m1.gradient(&[start], &[first_costate]);
                grad.extend(m2.gradient(&second_inputs, &second_costates));
                (value, grad)
            }
            Player::Bob => {
                let mb_move = MoveFactors::new(system, &seqs[0]);
                let mut value = 0.0;
                let mut inputs = Vec::new();
                let mut costates = Vec::new();
                for (ma, wa) in self.opponent_unitaries.iter() {
                    let input = ma * &start;
                    let mid = &mb_move.unitary * &input;
                    let mut lam = CVector::zeros(start.len());
                    for (mb, wb) in self.opponent_unitaries.iter() {
                        let heads = project_first(&(mb * &mid), false);
                        let w = wa * wb;
                        value += w * norm_sqr(&heads);
                        lam += mb.adjoint() * heads * C64::new(w, 0.0);
                    }
                    inputs.push(input);
                    costates.push(lam);
                }
                (value, mb_move.gradient(&inputs, &costates))
            }
        }
    }

    /// Half-width of the uniform initialization box: one full `[-pi, pi]`
    /// rotation angle per pulse.
    pub fn init_amplitude_bound(&self) -> f64 {
        PI * self.pulses_per_move as f64 / self.chain().move_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_amplitudes: Vec<f64>,
    pub best_payoff: f64,
    pub restarts_run: usize,
    /// Index of the winning start.
    pub best_restart: usize,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub termination: Termination,
    pub seed: u64,
}

/// Starting point of restart `index`: uniform in the initialization box,
/// drawn from ChaCha8 seeded with `seed + index`.
pub fn initial_point(problem: &OptimizationProblem, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let bound = problem.init_amplitude_bound();
    (0..problem.variable_count())
        .map(|_| rng.random_range(-bound..=bound))
        .collect()
}

/// Runs CG ascent from `x0`.
pub fn ascend(problem: &OptimizationProblem, x0: &[f64], settings: CgSettings) -> cg::CgOutcome {
    let mut out = cg::minimize(
        |x| {
            let (v, g) = problem.value_and_gradient(x);
            (-v, g.into_iter().map(|gi| -gi).collect())
        },
        x0,
        settings,
    );
    out.value = -out.value;
    out.gradient.iter_mut().for_each(|g| *g = -*g);
    out.history.iter_mut().for_each(|v| *v = -*v);
    out
}

/// Multi-start maximization. Deterministic in `seed`; ties go to the lowest start.
pub fn optimize(problem: &OptimizationProblem, restarts: usize, seed: u64) -> Result<OptimizationResult> {
    optimize_with(problem, restarts, seed, CgSettings::default())
}

pub fn optimize_with(
    problem: &OptimizationProblem,
    restarts: usize,
    seed: u64,
    settings: CgSettings,
) -> Result<OptimizationResult> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("need at least one restart".into()));
    }
    let mut best: Option<(usize, cg::CgOutcome)> = None;
    let consider = |index: usize, out: cg::CgOutcome, best: &mut Option<(usize, cg::CgOutcome)>| {
        if best.as_ref().is_none_or(|(_, b)| out.value > b.value) {
            *best = Some((index, out));
        }
    };
    for r in 0..restarts {
        let out = ascend(problem, &initial_point(problem, seed, r), settings);
        consider(r, out, &mut best);
    }
    let mut restarts_run = restarts;
    // Never report less than doing nothing: ascend from all-zero controls if
    // every random start got stuck below it.
    let zeros = vec![0.0; problem.variable_count()];
    if best.as_ref().is_some_and(|(_, b)| b.value < problem.objective(&zeros)) {
        let out = ascend(problem, &zeros, settings);
        consider(restarts, out, &mut best);
        restarts_run += 1;
    }
    let (best_restart, out) = best.expect("at least one restart");
    Ok(OptimizationResult {
        best_payoff: out.value.clamp(0.0, 1.0),
        gradient_norm: out.gradient_norm(),
        best_amplitudes: out.x,
        restarts_run,
        best_restart,
        iterations: out.iterations,
        termination: out.termination,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length: usize,
    pub best_payoff: f64,
    pub result: OptimizationResult,
}

/// Bob's best payoff per chain length at a fixed coupling.
pub fn chain_sweep(
    lengths: &[usize],
    pulses_per_move: usize,
    restarts: usize,
    seed: u64,
    coupling: f64,
    move_time: f64,
) -> Result<Vec<SweepRow>> {
    lengths
        .iter()
        .map(|&length| {
            if !(2..=crate::chain::MAX_CHAIN_LENGTH).contains(&length) {
                return Err(Error::InvalidConfig(format!(
                    "sweep lengths must lie in 2..={}, got {length}",
                    crate::chain::MAX_CHAIN_LENGTH
                )));
            }
            let chain = ChainConfig::new(length, coupling, move_time)?;
            let problem = OptimizationProblem::new(chain, Player::Bob, pulses_per_move)?;
            let result = optimize(&problem, restarts, seed)?;
            Ok(SweepRow {
                length,
                best_payoff: result.best_payoff,
                result,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::independent_alice;

    const FAIR_J: f64 = 4.10469;

    fn central_difference(problem: &OptimizationProblem, x: &[f64], step: f64) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                let mut plus = x.to_vec();
                let mut minus = x.to_vec();
                plus[k] += step;
                minus[k] -= step;
                (problem.objective(&plus) - problem.objective(&minus)) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn apply_control_matches_dense_product() {
        let cfg = ChainConfig::new(3, 1.0, 1.0).unwrap();
        let m = CMatrix::from_fn(8, 8, |i, j| C64::new(i as f64 - 0.5 * j as f64, (i * j) as f64 * 0.1));
        for axis in [ControlAxis::Y, ControlAxis::Z] {
            let dense = crate::chain::control_operator(&cfg, axis) * &m;
            assert!(qla::max_abs_diff(&apply_control(axis, &m), &dense) < 1e-15);
        }
    }

    #[test]
    fn alice_zero_controls_single_qubit() {
        let p = OptimizationProblem::new(ChainConfig::new(1, 0.0, 1.0).unwrap(), Player::Alice, 3).unwrap();
        assert!((p.objective(&[0.0; 6]) - 0.5).abs() < 1e-12);
        assert!(p.gradient(&[0.0; 6]).iter().all(|g| g.is_finite()));
    }

    #[test]
    fn alice_zero_controls_match_game_engine() {
        let chain = ChainConfig::new(2, FAIR_J, 1.0).unwrap();
        let p = OptimizationProblem::new(chain, Player::Alice, 3).unwrap();
        let spec = GameSpec::new(chain);
        let idle = MixedStrategy::pure(spec.system().evolve(&ControlSequence::zeros(3)));
        let bob = pauli_control_strategy(PauliTable::Printed, 1.0).realize(spec.system());
        let oracle = spec.mean_payoff(&independent_alice(&idle, &idle), &bob).unwrap();
        assert!((p.objective(&[0.0; 6]) - oracle).abs() < 1e-12);
    }

    #[test]
    fn bob_objective_matches_game_engine() {
        let chain = ChainConfig::new(3, 2.0, 1.0).unwrap();
        let p = OptimizationProblem::new(chain, Player::Bob, 4).unwrap();
        let x = [0.4, -2.0, 7.1, 3.3];
        let spec = GameSpec::new(chain);
        let pauli = pauli_control_strategy(PauliTable::Printed, 1.0).realize(spec.system());
        let bob = MixedStrategy::pure(spec.system().evolve(&ControlSequence::z_first(&x)));
        let oracle = 1.0 - spec.mean_payoff(&independent_alice(&pauli, &pauli), &bob).unwrap();
        assert!((p.objective(&x) - oracle).abs() < 1e-12);
    }

    #[test]
    fn bob_cannot_beat_single_qubit() {
        let p = OptimizationProblem::new(ChainConfig::new(1, 0.0, 1.0).unwrap(), Player::Bob, 5).unwrap();
        for x in [[0.0; 5], [1.0, -2.0, 3.0, 0.5, 9.0]] {
            assert!((p.objective(&x) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn value_and_gradient_agree_on_value() {
        let chain = ChainConfig::new(2, 1.3, 1.0).unwrap();
        for player in [Player::Alice, Player::Bob] {
            let p = OptimizationProblem::new(chain, player, 3).unwrap();
            let x: Vec<f64> = (0..p.variable_count()).map(|k| 0.7 * k as f64 - 1.0).collect();
            assert!((p.value_and_gradient(&x).0 - p.objective(&x)).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let chain = ChainConfig::new(2, FAIR_J, 1.0).unwrap();
        for player in [Player::Alice, Player::Bob] {
            let p = OptimizationProblem::new(chain, player, 3).unwrap();
            let x = initial_point(&p, 99, 0);
            let analytic = p.gradient(&x);
            let numeric = central_difference(&p, &x, 1e-6);
            for (a, n) in analytic.iter().zip(&numeric) {
                assert!((a - n).abs() <= 1e-4 * n.abs().max(1e-4), "{a} vs {n}");
            }
        }
    }

    #[test]
    fn optimizer_reaches_stationary_point() {
        let chain = ChainConfig::new(2, FAIR_J, 1.0).unwrap();
        let p = OptimizationProblem::new(chain, Player::Bob, 3).unwrap();
        let r = optimize(&p, 2, 5).unwrap();
        assert!(r.gradient_norm < 1e-6, "{r:?}");
        let g = p.gradient(&r.best_amplitudes);
        assert!(g.iter().all(|x| x.abs() < 1e-6));
    }

    #[test]
    fn optimize_is_deterministic() {
        let chain = ChainConfig::new(2, FAIR_J, 1.0).unwrap();
        let p = OptimizationProblem::new(chain, Player::Alice, 3).unwrap();
        let a = optimize(&p, 3, 11).unwrap();
        let b = optimize(&p, 3, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn initialization_box_covers_one_rotation() {
        let chain = ChainConfig::new(2, 1.0, 2.0).unwrap();
        let p = OptimizationProblem::new(chain, Player::Alice, 6).unwrap();
        let bound = p.init_amplitude_bound();
        // rotation angle per pulse = amplitude * T / N
        assert!((bound * 2.0 / 6.0 - PI).abs() < 1e-15);
        for r in 0..5 {
            assert!(initial_point(&p, 0, r).iter().all(|x| x.abs() <= bound));
        }
    }

    #[test]
    fn refined_solution_keeps_payoff() {
        let chain = ChainConfig::new(2, FAIR_J, 1.0).unwrap();
        let coarse = OptimizationProblem::new(chain, Player::Alice, 3).unwrap();
        let x = initial_point(&coarse, 1, 0);
        let refined: Vec<_> = coarse.sequences(&x).iter().map(|s| s.refine(2)).collect();
        assert!((coarse.evaluate_moves(&refined) - coarse.objective(&x)).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_single_spin() {
        assert!(chain_sweep(&[1], 3, 1, 0, FAIR_J, 1.0).is_err());
    }

    #[test]
    fn player_parsing() {
        assert_eq!("alice".parse::<Player>().unwrap(), Player::Alice);
        assert!("carol".parse::<Player>().is_err());
    }
}
