//! On-disk formats: payoff curves as CSV, optimized controls as JSON.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::calib::PayoffCurve;
use crate::chain::{ChainConfig, ControlAxis, ControlSequence};
use crate::error::{Error, Result};
use crate::optim::{OptimizationProblem, OptimizationResult, Player};

pub const CURVE_HEADER: &str = "J,bob_mean_payoff";
pub const SCHEMA_VERSION: u32 = 1;

fn curve_row(j: f64, p: f64) -> String {
    format!("{j:.12},{p:.12}")
}

pub fn write_curve_csv<W: Write>(curve: &PayoffCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for &(j, p) in &curve.samples {
        writeln!(out, "{}", curve_row(j, p))?;
    }
    out.flush()
}

pub fn read_curve_csv<R: BufRead>(input: R) -> Result<PayoffCurve> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?
        .unwrap_or_default();
    if header != CURVE_HEADER {
        return Err(Error::InvalidConfig(format!("unexpected CSV header `{header}`")));
    }
    let mut samples = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let parsed = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)));
        match parsed {
            Some(pair) => samples.push(pair),
            None => return Err(Error::InvalidConfig(format!("bad CSV row {}: `{line}`", k + 2))),
        }
    }
    Ok(PayoffCurve { samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlEntry {
    /// 1-based move of the optimizing player.
    #[serde(rename = "move")]
    pub move_number: u8,
    pub index: usize,
    pub axis: ControlAxis,
    pub amplitude: f64,
}

/// Result file of an optimization run. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub schema_version: u32,
    pub player: Player,
    pub n: usize,
    #[serde(rename = "J")]
    pub coupling: f64,
    #[serde(rename = "T")]
    pub move_time: f64,
    pub pulses_per_move: usize,
    pub restarts: usize,
    pub seed: u64,
    pub payoff: f64,
    pub controls: Vec<ControlEntry>,
}

impl OptimizationReport {
    pub fn new(problem: &OptimizationProblem, result: &OptimizationResult, restarts: usize) -> Self {
        let chain = problem.chain();
        let controls = problem
            .sequences(&result.best_amplitudes)
            .iter()
            .enumerate()
            .flat_map(|(m, seq)| {
                seq.pulses().iter().enumerate().map(move |(index, p)| ControlEntry {
                    move_number: m as u8 + 1,
                    index,
                    axis: p.axis,
                    amplitude: p.amplitude,
                })
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            player: problem.player(),
            n: chain.n,
            coupling: chain.coupling,
            move_time: chain.move_time,
            pulses_per_move: problem.pulses_per_move(),
            restarts,
            seed: result.seed,
            payoff: result.best_payoff,
            controls,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {}",
                report.schema_version
            )));
        }
        report.moves()?;
        Ok(report)
    }

    pub fn chain(&self) -> Result<ChainConfig> {
        ChainConfig::new(self.n, self.coupling, self.move_time)
    }

    /// Control sequences per move, validated against the header fields.
    pub fn moves(&self) -> Result<Vec<ControlSequence>> {
        let count = self.player.moves();
        let mut moves = Vec::with_capacity(count);
        for m in 1..=count {
            let mut entries: Vec<&ControlEntry> =
                self.controls.iter().filter(|c| c.move_number as usize == m).collect();
            entries.sort_by_key(|c| c.index);
            if entries.len() != self.pulses_per_move
                || entries.iter().enumerate().any(|(k, c)| c.index != k)
            {
                return Err(Error::InvalidConfig(format!(
                    "move {m} needs pulses indexed 0..{}",
                    self.pulses_per_move
                )));
            }
            let pulses = entries
                .iter()
                .map(|c| crate::chain::ControlPulse { axis: c.axis, amplitude: c.amplitude })
                .collect();
            moves.push(ControlSequence::new(pulses)?);
        }
        if self.controls.len() != count * self.pulses_per_move {
            return Err(Error::InvalidConfig(format!(
                "{} has {count} move(s); found controls for other moves",
                self.player.as_str()
            )));
        }
        Ok(moves)
    }

    /// Mean payoff of the stored controls against the Pauli opponent.
    pub fn reevaluate(&self) -> Result<f64> {
        let problem = OptimizationProblem::new(self.chain()?, self.player, self.pulses_per_move)?;
        Ok(problem.evaluate_moves(&self.moves()?))
    }
}
