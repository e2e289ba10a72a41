//! Mixed strategies, unitary 1-designs and their realization as control pulses.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSystem, ControlSequence};
use crate::error::{Error, Result};
use crate::qla::{self, Axis, CMatrix, C64, I, ONE};

/// Finite support with a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy<T> {
    elements: Vec<T>,
    weights: Vec<f64>,
}

impl<T> MixedStrategy<T> {
    pub fn new(elements: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidConfig("mixed strategy needs at least one element".into()));
        }
        if elements.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: elements.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidConfig("weights must be nonnegative".into()));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-15 {
            return Err(Error::InvalidConfig(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { elements, weights })
    }

    pub fn uniform(elements: Vec<T>) -> Result<Self> {
        let w = 1.0 / elements.len() as f64;
        let weights = vec![w; elements.len()];
        Self::new(elements, weights)
    }

    pub fn pure(element: T) -> Self {
        Self {
            elements: vec![element],
            weights: vec![1.0],
        }
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.elements.iter().zip(self.weights.iter().copied())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> MixedStrategy<U> {
        MixedStrategy {
            elements: self.elements.iter().map(f).collect(),
            weights: self.weights.clone(),
        }
    }
}

impl MixedStrategy<CMatrix> {
    /// Requires every element to be unitary within `tol`.
    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        for u in &self.elements {
            let deviation = qla::unitarity_error(u);
            if deviation >= tol {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(())
    }
}

impl MixedStrategy<ControlSequence> {
    /// Move unitaries produced by each control sequence on `system`.
    pub fn realize(&self, system: &ChainSystem) -> MixedStrategy<CMatrix> {
        self.map(|seq| system.evolve(seq))
    }
}

/// Neumaier summation; uniform weights over 10^5 elements still sum to 1 within an ulp.
fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Uniform choice among `{1, i sigma_x, i sigma_y, i sigma_z}`.
pub fn pauli_strategy() -> MixedStrategy<CMatrix> {
    let mut elements = vec![qla::identity(2)];
    elements.extend([Axis::X, Axis::Y, Axis::Z].map(|a| qla::pauli(a) * I));
    MixedStrategy::uniform(elements).expect("four elements")
}

/// SU(2) Euler parameters of
/// `[[e^{i phi} cos theta, e^{i psi} sin theta], [-e^{-i psi} sin theta, e^{-i phi} cos theta]]`,
/// which factors as `e^{i (phi+psi)/2 Z} e^{i theta Y} e^{i (phi-psi)/2 Z}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub psi: f64,
    pub theta: f64,
}

impl EulerAngles {
    pub fn reconstruct(&self) -> CMatrix {
        let (s, c) = self.theta.sin_cos();
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(c, self.phi),
                C64::from_polar(s, self.psi),
                -C64::from_polar(s, -self.psi),
                C64::from_polar(c, -self.phi),
            ],
        )
    }

    /// Rotation angles `xi` with `exp(-i xi3 Z) exp(-i xi2 Y) exp(-i xi1 Z)` equal to
    /// [`EulerAngles::reconstruct`].
    pub fn pulse_angles(&self) -> PulseAngles {
        PulseAngles([
            -(self.phi - self.psi) / 2.0,
            -self.theta,
            -(self.phi + self.psi) / 2.0,
        ])
    }
}

/// Rotation angles `(xi1, xi2, xi3)` of a z-y-z pulse triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseAngles(pub [f64; 3]);

impl PulseAngles {
    /// `exp(-i xi3 Z) exp(-i xi2 Y) exp(-i xi1 Z)`.
    pub fn rotation(&self) -> CMatrix {
        let [x1, x2, x3] = self.0;
        let rz = |a: f64| {
            CMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -a), qla::ZERO, qla::ZERO, C64::from_polar(1.0, a)])
        };
        let (s, c) = x2.sin_cos();
        // exp(-i a Y) = cos a - i sin a Y = [[c, -s], [s, c]]
        let ry = CMatrix::from_row_slice(2, 2, &[ONE * c, -ONE * s, ONE * s, ONE * c]);
        rz(x3) * ry * rz(x1)
    }
}

/// Haar-distributed SU(2) parameters: `phi, psi ~ U(0, 2 pi)`, `theta = asin(sqrt p)`, `p ~ U(0, 1)`.
pub fn haar_euler<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let phi = rng.random_range(0.0..TAU);
    let psi = rng.random_range(0.0..TAU);
    let p: f64 = rng.random_range(0.0..1.0);
    EulerAngles {
        phi,
        psi,
        theta: p.sqrt().asin(),
    }
}

pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    haar_euler(rng).reconstruct()
}

/// Below this modulus a matrix entry is treated as zero when choosing Euler angles.
const DEGENERATE_EPS: f64 = 1e-12;

/// Inverse of [`EulerAngles::reconstruct`] on SU(2).
///
/// Returns `theta` in `[0, pi/2]` and `phi, psi` in `[0, 2 pi)`. When
/// `theta = 0` the off-diagonal phase is meaningless and `psi = 0`; when
/// `theta = pi/2` the diagonal phase is meaningless and `phi = 0`.
pub fn euler_decompose(u: &CMatrix) -> Result<EulerAngles> {
    if u.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.nrows(),
        });
    }
    let unitarity = qla::unitarity_error(u);
    let det = (qla::det2(u) - ONE).norm();
    if unitarity >= 1e-10 || det >= 1e-10 {
        return Err(Error::NotSpecialUnitary { unitarity, det });
    }
    let (a, b) = (u[(0, 0)], u[(0, 1)]);
    let theta = b.norm().atan2(a.norm());
    let wrap = |x: f64| {
        let r = x.rem_euclid(TAU);
        if r >= TAU { 0.0 } else { r }
    };
    let phi = if a.norm() < DEGENERATE_EPS { 0.0 } else { wrap(a.arg()) };
    let psi = if b.norm() < DEGENERATE_EPS { 0.0 } else { wrap(b.arg()) };
    Ok(EulerAngles { phi, psi, theta })
}

/// Which angle table realizes the Pauli strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliTable {
    /// The published table. Its `i sigma_x` row composes to `i sigma_y`, so
    /// the realized set is `{1, i sigma_y, i sigma_y, i sigma_z}`.
    #[default]
    Printed,
    /// `i sigma_x` row replaced by `(pi/4, -pi/2, -pi/4)`, which does give
    /// `i sigma_x`. The realized set is the true Pauli 1-design.
    Corrected,
}

impl PauliTable {
    pub fn row(self, index: usize) -> PulseAngles {
        match (self, index) {
            (PauliTable::Corrected, 1) => PulseAngles([FRAC_PI_4, -FRAC_PI_2, -FRAC_PI_4]),
            _ => pauli_control_params(index),
        }
    }

    pub fn rows(self) -> [PulseAngles; 4] {
        [0, 1, 2, 3].map(|i| self.row(i))
    }
}

/// Published rotation angles for the Pauli elements `1, i sigma_x, i sigma_y, i sigma_z`.
///
/// # Panics
/// If `index > 3`.
pub fn pauli_control_params(index: usize) -> PulseAngles {
    match index {
        0 => PulseAngles([0.0, 0.0, 0.0]),
        1 => PulseAngles([FRAC_PI_4, -FRAC_PI_2, FRAC_PI_4]),
        2 => PulseAngles([0.0, -FRAC_PI_2, 0.0]),
        3 => PulseAngles([-FRAC_PI_4, 0.0, -FRAC_PI_4]),
        _ => panic!("Pauli strategy has four elements, got index {index}"),
    }
}

/// Three z-y-z pulses of amplitude `(3/T) xi_k`, each lasting `T/3`.
pub fn params_to_sequence(xi: PulseAngles, move_time: f64) -> ControlSequence {
    let scale = 3.0 / move_time;
    ControlSequence::z_first(&xi.0.map(|x| scale * x))
}

/// The Pauli strategy as uniformly chosen control sequences.
pub fn pauli_control_strategy(table: PauliTable, move_time: f64) -> MixedStrategy<ControlSequence> {
    let seqs = table.rows().map(|xi| params_to_sequence(xi, move_time)).to_vec();
    MixedStrategy::uniform(seqs).expect("four elements")
}

/// First moment `sum_k w_k U_k (x) conj(U_k)`.
pub fn first_moment(strategy: &MixedStrategy<CMatrix>) -> CMatrix {
    let d = strategy.elements()[0].nrows();
    strategy
        .iter()
        .fold(CMatrix::zeros(d * d, d * d), |acc, (u, w)| {
            acc + qla::kron(u, &u.conjugate()).scale(w)
        })
}

/// Haar first moment on U(d): `[(i,k),(j,l)] -> delta_ik delta_jl / d`.
pub fn haar_first_moment(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, k) = (row / d, row % d);
        let (j, l) = (col / d, col % d);
        if i == k && j == l {
            C64::new(1.0 / d as f64, 0.0)
        } else {
            qla::ZERO
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCheck {
    pub is_design: bool,
    pub deviation: f64,
}

/// Compares the strategy's first moment with the Haar moment entrywise.
pub fn is_unitary_design(strategy: &MixedStrategy<CMatrix>, t: u32, tol: f64) -> Result<DesignCheck> {
    if t != 1 {
        return Err(Error::UnsupportedDesignOrder(t));
    }
    let d = strategy.elements()[0].nrows();
    if let Some(u) = strategy.elements().iter().find(|u| u.shape() != (d, d)) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.nrows(),
        });
    }
    strategy.check_unitary(1e-10)?;
    let deviation = qla::max_abs_diff(&first_moment(strategy), &haar_first_moment(d));
    Ok(DesignCheck {
        is_design: deviation < tol,
        deviation,
    })
}

/// Uniform empirical strategy from `samples` Haar draws.
pub fn haar_sample_strategy<R: Rng + ?Sized>(rng: &mut R, samples: usize) -> Result<MixedStrategy<CMatrix>> {
    MixedStrategy::uniform((0..samples).map(|_| haar_su2(rng)).collect())
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r == -PI { PI } else { r }
}
