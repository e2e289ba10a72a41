//! Heisenberg spin chains driven by piecewise-constant fields on the first spin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::{self, Axis, CMatrix, HermitianEigen};

pub const MAX_CHAIN_LENGTH: usize = 7;

/// Chain length, exchange coupling `J` and the duration `T` of one move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub coupling: f64,
    pub move_time: f64,
}

impl ChainConfig {
    pub fn new(n: usize, coupling: f64, move_time: f64) -> Result<Self> {
        if !(1..=MAX_CHAIN_LENGTH).contains(&n) {
            return Err(Error::InvalidConfig(format!(
                "chain length must be in 1..={MAX_CHAIN_LENGTH}, got {n}"
            )));
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidConfig(format!("coupling must be finite, got {coupling}")));
        }
        if !(move_time > 0.0 && move_time.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "move time must be positive, got {move_time}"
            )));
        }
        Ok(Self { n, coupling, move_time })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn with_coupling(self, coupling: f64) -> Result<Self> {
        Self::new(self.n, coupling, self.move_time)
    }
}

/// Field direction available to the players. There is no x control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlAxis {
    Y,
    Z,
}

impl ControlAxis {
    pub fn pauli_axis(self) -> Axis {
        match self {
            ControlAxis::Y => Axis::Y,
            ControlAxis::Z => Axis::Z,
        }
    }

    pub fn other(self) -> Self {
        match self {
            ControlAxis::Y => ControlAxis::Z,
            ControlAxis::Z => ControlAxis::Y,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControlAxis::Y => "y",
            ControlAxis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPulse {
    pub axis: ControlAxis,
    pub amplitude: f64,
}

/// The pulses of one move. Every pulse lasts `T / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ControlPulse>", into = "Vec<ControlPulse>")]
pub struct ControlSequence {
    pulses: Vec<ControlPulse>,
}

impl ControlSequence {
    /// Builds a sequence, requiring at least one pulse and alternating axes.
    pub fn new(pulses: Vec<ControlPulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidConfig("control sequence needs at least one pulse".into()));
        }
        if let Some(k) = pulses.windows(2).position(|w| w[0].axis == w[1].axis) {
            return Err(Error::InvalidConfig(format!(
                "pulses {k} and {} share the {} axis; axes must alternate",
                k + 1,
                pulses[k].axis.as_str()
            )));
        }
        if let Some(p) = pulses.iter().find(|p| !p.amplitude.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite amplitude {}", p.amplitude)));
        }
        Ok(Self { pulses })
    }

    /// Alternating axes starting from `first`.
    ///
    /// # Panics
    /// If `amplitudes` is empty.
    pub fn alternating(first: ControlAxis, amplitudes: &[f64]) -> Self {
        assert!(!amplitudes.is_empty(), "control sequence needs at least one pulse");
        let mut axis = first;
        let pulses = amplitudes
            .iter()
            .map(|&amplitude| {
                let p = ControlPulse { axis, amplitude };
                axis = axis.other();
                p
            })
            .collect();
        Self { pulses }
    }

    /// The default `z, y, z, ...` pattern.
    pub fn z_first(amplitudes: &[f64]) -> Self {
        Self::alternating(ControlAxis::Z, amplitudes)
    }

    pub fn zeros(len: usize) -> Self {
        Self::z_first(&vec![0.0; len])
    }

    /// Splits every pulse into `factor` consecutive copies of itself.
    ///
    /// With each copy lasting `1/factor` of the original slice this is the
    /// same evolution on a finer time grid. The result has runs of equal axes,
    /// so it is the one way to obtain a non-alternating sequence.
    pub fn refine(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        let pulses = self
            .pulses
            .iter()
            .flat_map(|p| std::iter::repeat_n(*p, factor))
            .collect();
        Self { pulses }
    }

    pub fn pulses(&self) -> &[ControlPulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.amplitude).collect()
    }

    pub fn is_alternating(&self) -> bool {
        self.pulses.windows(2).all(|w| w[0].axis != w[1].axis)
    }

    pub fn slice_duration(&self, move_time: f64) -> f64 {
        move_time / self.pulses.len() as f64
    }
}

impl TryFrom<Vec<ControlPulse>> for ControlSequence {
    type Error = Error;

    fn try_from(pulses: Vec<ControlPulse>) -> Result<Self> {
        Self::new(pulses)
    }
}

impl From<ControlSequence> for Vec<ControlPulse> {
    fn from(seq: ControlSequence) -> Self {
        seq.pulses
    }
}

/// Open-boundary isotropic Heisenberg exchange with uniform coupling.
pub fn drift_hamiltonian(config: &ChainConfig) -> CMatrix {
    let n = config.n;
    let mut h = CMatrix::zeros(config.dim(), config.dim());
    for site in 0..n.saturating_sub(1) {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let p = qla::pauli(axis);
            let pair = qla::embed_single(&p, site, n) * qla::embed_single(&p, site + 1, n);
            h += pair;
        }
    }
    h.scale(config.coupling)
}

/// `sigma_axis` on the first spin, identity elsewhere.
pub fn control_operator(config: &ChainConfig, axis: ControlAxis) -> CMatrix {
    qla::embed_single(&qla::pauli(axis.pauli_axis()), 0, config.n)
}

pub fn control_hamiltonian(config: &ChainConfig, pulse: &ControlPulse) -> CMatrix {
    control_operator(config, pulse.axis).scale(pulse.amplitude)
}

/// Precomputed operators of one chain, shared by every pulse evaluation.
#[derive(Debug, Clone)]
pub struct ChainSystem {
    config: ChainConfig,
    drift: CMatrix,
    control_y: CMatrix,
    control_z: CMatrix,
}

impl ChainSystem {
    pub fn new(config: ChainConfig) -> Self {
        Self {
            drift: drift_hamiltonian(&config),
            control_y: control_operator(&config, ControlAxis::Y),
            control_z: control_operator(&config, ControlAxis::Z),
            config,
        }
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn control(&self, axis: ControlAxis) -> &CMatrix {
        match axis {
            ControlAxis::Y => &self.control_y,
            ControlAxis::Z => &self.control_z,
        }
    }

    /// Total Hamiltonian during one pulse.
    pub fn hamiltonian(&self, pulse: &ControlPulse) -> CMatrix {
        &self.drift + self.control(pulse.axis).scale(pulse.amplitude)
    }

    pub fn pulse_eigen(&self, pulse: &ControlPulse) -> HermitianEigen {
        HermitianEigen::new(&self.hamiltonian(pulse)).expect("drift plus control is Hermitian")
    }

    pub fn pulse_propagator(&self, pulse: &ControlPulse, duration: f64) -> CMatrix {
        self.pulse_eigen(pulse).propagator(duration)
    }

    /// Unitary of a whole move; pulse 0 acts first.
    pub fn evolve(&self, seq: &ControlSequence) -> CMatrix {
        let dt = seq.slice_duration(self.config.move_time);
        seq.pulses()
            .iter()
            .fold(qla::identity(self.dim()), |acc, p| self.pulse_propagator(p, dt) * acc)
    }
}

/// `U = prod_k exp(-i dt (H0 + H_c(k)))`, later pulses to the left.
pub fn evolve_move(config: &ChainConfig, seq: &ControlSequence) -> CMatrix {
    ChainSystem::new(*config).evolve(seq)
}
