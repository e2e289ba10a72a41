//! Single-qubit move specifications given on the command line.

use qubitflip::qla::{self, Axis, CMatrix};
use qubitflip::strategy::{haar_su2, pauli_strategy, EulerAngles, MixedStrategy};
use rand::Rng;

use crate::CliError;

#[derive(Debug, Clone)]
pub enum MoveSpec {
    /// A finite mixture, enumerable exhaustively.
    Mixed(MixedStrategy<CMatrix>),
    /// A fresh Haar draw per play; only Monte Carlo.
    Haar,
}

impl MoveSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let fixed = |u: CMatrix| MoveSpec::Mixed(MixedStrategy::pure(u));
        match text {
            "pauli" => Ok(MoveSpec::Mixed(pauli_strategy())),
            "haar" => Ok(MoveSpec::Haar),
            "identity" => Ok(fixed(qla::identity(2))),
            "hadamard" => Ok(fixed(qla::hadamard())),
            "flip" => Ok(fixed(qla::pauli(Axis::X))),
            _ => {
                let Some(args) = text.strip_prefix("euler:") else {
                    return Err(CliError::Usage(format!(
                        "unknown move `{text}`; expected pauli, haar, identity, hadamard, flip or euler:<phi>,<psi>,<theta>"
                    )));
                };
                let values = args
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("bad Euler angles `{args}`: {e}")))?;
                match values[..] {
                    [phi, psi, theta] if values.iter().all(|v| v.is_finite()) => {
                        Ok(fixed(EulerAngles { phi, psi, theta }.reconstruct()))
                    }
                    _ => Err(CliError::Usage(format!("euler: needs three finite angles, got `{args}`"))),
                }
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        match self {
            MoveSpec::Haar => haar_su2(rng),
            MoveSpec::Mixed(s) => {
                let mut u: f64 = rng.random();
                for (m, w) in s.iter() {
                    if u < w {
                        return m.clone();
                    }
                    u -= w;
                }
                s.elements().last().expect("non-empty strategy").clone()
            }
        }
    }

    pub fn mixture(&self) -> Option<&MixedStrategy<CMatrix>> {
        match self {
            MoveSpec::Mixed(s) => Some(s),
            MoveSpec::Haar => None,
        }
    }
}
