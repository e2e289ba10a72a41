//! The penny-flip game: classical table, ideal single-qubit play, and play on a chain.
//!
//! Alice moves, Bob moves, Alice moves again, then the first spin is measured.
//! Alice wins on `|1>` (tails), Bob on `|0>` (heads).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, ChainSystem, ControlSequence};
use crate::error::{Error, Result};
use crate::qla::{self, CMatrix, CVector, STRUCTURE_TOL};
use crate::strategy::MixedStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Penny {
    /// Leave the coin.
    N,
    /// Flip the coin.
    F,
}

/// Alice's classical payoff: `+1` if the coin ends tails up, `-1` otherwise.
pub fn classical_payoff(alice_first: Penny, bob: Penny, alice_second: Penny) -> i8 {
    let flips = [alice_first, bob, alice_second]
        .iter()
        .filter(|&&m| m == Penny::F)
        .count();
    if flips % 2 == 1 { 1 } else { -1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffResult {
    pub p_alice: f64,
    pub p_bob: f64,
}

impl PayoffResult {
    pub fn from_alice(p_alice: f64) -> Self {
        let p_alice = p_alice.clamp(0.0, 1.0);
        Self {
            p_alice,
            p_bob: 1.0 - p_alice,
        }
    }

    /// `<sigma_z>` of the measured spin, `1 - 2 p_alice`.
    pub fn sigma_z(&self) -> f64 {
        self.p_bob - self.p_alice
    }
}

fn require_unitary(u: &CMatrix, dim: usize) -> Result<()> {
    if u.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.nrows(),
        });
    }
    let deviation = qla::unitarity_error(u);
    if deviation >= STRUCTURE_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `|psi_f> = U_A2 U_B U_A1 |0>` on a single qubit.
pub fn play_unitary(alice_first: &CMatrix, bob: &CMatrix, alice_second: &CMatrix) -> Result<PayoffResult> {
    for u in [alice_first, bob, alice_second] {
        require_unitary(u, 2)?;
    }
    let psi = alice_second * bob * alice_first * qla::basis_state(2, 0);
    Ok(PayoffResult::from_alice(psi[1].norm_sqr()))
}

/// Alice's two moves drawn jointly.
pub type AliceStrategy = MixedStrategy<[CMatrix; 2]>;

/// Product distribution: each move drawn independently.
pub fn independent_alice(first: &MixedStrategy<CMatrix>, second: &MixedStrategy<CMatrix>) -> AliceStrategy {
    let mut elements = Vec::with_capacity(first.len() * second.len());
    let mut weights = Vec::with_capacity(first.len() * second.len());
    for (u1, w1) in first.iter() {
        for (u2, w2) in second.iter() {
            elements.push([u1.clone(), u2.clone()]);
            weights.push(w1 * w2);
        }
    }
    MixedStrategy::new(elements, weights).expect("product of probability vectors")
}

/// Both moves use the same drawn element.
pub fn correlated_alice(strategy: &MixedStrategy<CMatrix>) -> AliceStrategy {
    MixedStrategy::new(
        strategy.elements().iter().map(|u| [u.clone(), u.clone()]).collect(),
        strategy.weights().to_vec(),
    )
    .expect("weights copied from a valid strategy")
}

/// The game on a chain initialised in `|0...0>`, measured on the first spin.
#[derive(Debug, Clone)]
pub struct GameSpec {
    system: ChainSystem,
}

impl GameSpec {
    pub fn new(chain: ChainConfig) -> Self {
        Self {
            system: ChainSystem::new(chain),
        }
    }

    pub fn chain(&self) -> &ChainConfig {
        self.system.config()
    }

    pub fn system(&self) -> &ChainSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn initial_state(&self) -> CVector {
        qla::basis_state(self.dim(), 0)
    }

    /// Outcome probabilities of a final state, via the reduced state of spin 1.
    pub fn measure(&self, psi: &CVector) -> Result<PayoffResult> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let reduced = qla::partial_trace_keep_first(&qla::density(psi))?;
        Ok(PayoffResult::from_alice(reduced[(1, 1)].re))
    }

    pub fn play_unitaries(&self, alice_first: &CMatrix, bob: &CMatrix, alice_second: &CMatrix) -> Result<PayoffResult> {
        for u in [alice_first, bob, alice_second] {
            require_unitary(u, self.dim())?;
        }
        self.measure(&(alice_second * bob * alice_first * self.initial_state()))
    }

    pub fn play(
        &self,
        alice_first: &ControlSequence,
        bob: &ControlSequence,
        alice_second: &ControlSequence,
    ) -> Result<PayoffResult> {
        let [a1, b, a2] = [alice_first, bob, alice_second].map(|s| self.system.evolve(s));
        self.play_unitaries(&a1, &b, &a2)
    }

    /// Expected `p_alice` over every joint draw of the two strategies.
    pub fn mean_payoff(&self, alice: &AliceStrategy, bob: &MixedStrategy<CMatrix>) -> Result<f64> {
        let dim = self.dim();
        for [u1, u2] in alice.elements() {
            require_unitary(u1, dim)?;
            require_unitary(u2, dim)?;
        }
        bob.elements().iter().try_for_each(|u| require_unitary(u, dim))?;
        let start = self.initial_state();
        let mut total = 0.0;
        for ([u1, u2], wa) in alice.iter() {
            let after_first = u1 * &start;
            for (ub, wb) in bob.iter() {
                let psi = u2 * (ub * &after_first);
                total += wa * wb * qla::first_qubit_one_probability(&psi);
            }
        }
        Ok(total.clamp(0.0, 1.0))
    }
}

/// `play_chain` with explicit control sequences for all three moves.
pub fn play_chain(
    spec: &GameSpec,
    alice_first: &ControlSequence,
    bob: &ControlSequence,
    alice_second: &ControlSequence,
) -> Result<PayoffResult> {
    spec.play(alice_first, bob, alice_second)
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl SampleStats {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            std_error: 0.0,
            samples: 0,
        }
    }
}

pub fn sample_mean<R: Rng + ?Sized>(rng: &mut R, samples: usize, mut draw: impl FnMut(&mut R) -> f64) -> SampleStats {
    assert!(samples >= 1);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=samples {
        let x = draw(rng);
        let delta = x - mean;
        mean += delta / k as f64;
        m2 += delta * (x - mean);
    }
    let std_error = if samples > 1 {
        (m2 / (samples - 1) as f64 / samples as f64).sqrt()
    } else {
        0.0
    };
    SampleStats { mean, std_error, samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{hadamard, pauli, Axis, C64};
    use crate::strategy::{haar_su2, params_to_sequence, pauli_control_params, pauli_strategy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Penny::{F, N};

    #[test]
    fn classical_table() {
        assert_eq!(classical_payoff(N, N, N), -1);
        assert_eq!(classical_payoff(N, N, F), 1);
        assert_eq!(classical_payoff(F, F, F), 1);
        // Bob's row N: NN NF FN FF -> -1 1 1 -1; row F flips the signs.
        let cols = [(N, N), (N, F), (F, N), (F, F)];
        let row_n: Vec<i8> = cols.iter().map(|&(a1, a2)| classical_payoff(a1, N, a2)).collect();
        let row_f: Vec<i8> = cols.iter().map(|&(a1, a2)| classical_payoff(a1, F, a2)).collect();
        assert_eq!(row_n, vec![-1, 1, 1, -1]);
        assert_eq!(row_f, vec![1, -1, -1, 1]);
    }

    #[test]
    fn hadamard_trick_wins() {
        let h = hadamard();
        let x = pauli(Axis::X);
        let r = play_unitary(&h, &x, &(&x * &h)).unwrap();
        assert!((r.p_alice - 1.0).abs() < 1e-15);
        let r = play_unitary(&h, &qla::identity(2), &(&x * &h)).unwrap();
        assert!((r.p_alice - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_single_qubit_games() {
        let id = qla::identity(2);
        assert_eq!(play_unitary(&id, &id, &id).unwrap().p_alice, 0.0);
        assert_eq!(play_unitary(&id, &pauli(Axis::X), &id).unwrap().p_alice, 1.0);
    }

    #[test]
    fn non_unitary_moves_rejected() {
        let id = qla::identity(2);
        assert!(play_unitary(&id.scale(2.0), &id, &id).is_err());
        assert!(play_unitary(&qla::identity(4), &id, &id).is_err());
    }

    #[test]
    fn chain_with_table_sequences() {
        let spec = GameSpec::new(ChainConfig::new(1, 0.0, 1.0).unwrap());
        let seq = |i| params_to_sequence(pauli_control_params(i), 1.0);
        let r = spec.play(&seq(1), &seq(0), &seq(0)).unwrap();
        assert!((r.p_alice - 1.0).abs() < 1e-12);
        assert!((r.p_alice + r.p_bob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_identity_game() {
        let spec = GameSpec::new(ChainConfig::new(2, 0.0, 1.0).unwrap());
        let z = ControlSequence::zeros(3);
        assert!(spec.play(&z, &z, &z).unwrap().p_alice < 1e-15);
    }

    #[test]
    fn chain_zero_controls_match_dense_oracle() {
        // all moves are exp(-i T H0); evaluate with a Taylor-series exponential
        let (j, t) = (4.10469, 1.0);
        let cfg = ChainConfig::new(2, j, t).unwrap();
        let spec = GameSpec::new(cfg);
        let z = ControlSequence::zeros(3);
        let r = spec.play(&z, &z, &z).unwrap();

        let h = crate::chain::drift_hamiltonian(&cfg);
        let generator = h * C64::new(0.0, -3.0 * t);
        let mut term = qla::identity(4);
        let mut u = qla::identity(4);
        // scale down by 2^10, Taylor, then square back up
        let small = generator.scale(1.0 / 1024.0);
        for k in 1..30 {
            term = &term * &small / C64::new(k as f64, 0.0);
            u += &term;
        }
        for _ in 0..10 {
            u = &u * &u;
        }
        let psi = u * qla::basis_state(4, 0);
        let oracle = psi[2].norm_sqr() + psi[3].norm_sqr();
        assert!((r.p_alice - oracle).abs() < 1e-10, "{} vs {oracle}", r.p_alice);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let spec = GameSpec::new(ChainConfig::new(2, 1.0, 1.0).unwrap());
        let id = qla::identity(2);
        assert!(matches!(
            spec.play_unitaries(&id, &id, &id),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nash_lemma_for_random_alice() {
        let spec = GameSpec::new(ChainConfig::new(1, 0.0, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let alice = MixedStrategy::pure([haar_su2(&mut rng), haar_su2(&mut rng)]);
            let p = spec.mean_payoff(&alice, &pauli_strategy()).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
        }
        let h = hadamard();
        let alice = MixedStrategy::pure([h.clone(), pauli(Axis::X) * &h]);
        assert!((spec.mean_payoff(&alice, &pauli_strategy()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn global_phase_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let [a, b, c] = [0, 1, 2].map(|_| haar_su2(&mut rng));
        let phase = C64::from_polar(1.0, 0.731);
        let r0 = play_unitary(&a, &b, &c).unwrap();
        let r1 = play_unitary(&(&a * phase), &b, &(&c * phase.conj())).unwrap();
        assert!((r0.p_alice - r1.p_alice).abs() < 1e-14);
    }

    #[test]
    fn sigma_z_is_affine_in_payoff() {
        let r = PayoffResult::from_alice(0.3);
        assert!((r.sigma_z() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn correlated_and_independent_supports() {
        let p = pauli_strategy();
        assert_eq!(independent_alice(&p, &p).len(), 16);
        assert_eq!(correlated_alice(&p).len(), 4);
    }

    #[test]
    fn sample_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut k = 0.0;
        let s = sample_mean(&mut rng, 4, |_| {
            k += 1.0;
            k
        });
        assert_eq!(s.mean, 2.5);
        // sample variance 5/3, standard error sqrt(5/12)
        assert!((s.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
