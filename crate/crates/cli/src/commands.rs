use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qubitflip::calib::{self, Convention, GridScale};
use qubitflip::chain::{ChainConfig, ChainSystem};
use qubitflip::game::{play_unitary, sample_mean, SampleStats};
use qubitflip::optim::{self, chain_sweep, OptimizationProblem, Player};
use qubitflip::qla::{self, Axis};
use qubitflip::report::{write_curve_csv, OptimizationReport};
use qubitflip::strategy::{haar_sample_strategy, is_unitary_design, pauli_control_strategy, pauli_strategy, PauliTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::moves::MoveSpec;
use crate::CliError;

/// Tolerance used when the coupling has to be calibrated on the fly.
const CALIBRATION_TOL: f64 = 1e-8;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source }
}

fn write_output(out: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, contents).map_err(io_err(path)),
        None => io::stdout().write_all(contents).map_err(stdout_err),
    }
}

fn resolve_coupling(coupling: Option<f64>, move_time: f64) -> Result<f64, CliError> {
    match coupling {
        Some(j) => Ok(j),
        None => {
            let fair = calib::two_spin_fair_coupling(move_time, CALIBRATION_TOL)?;
            eprintln!("using calibrated fair coupling J = {:.8}", fair.coupling);
            Ok(fair.coupling)
        }
    }
}

pub fn design_check(set: &str, tol: f64, seed: u64) -> Result<(), CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let strategy = match set {
        "pauli" => pauli_strategy(),
        "printed" | "corrected" => {
            let table = if set == "printed" { PauliTable::Printed } else { PauliTable::Corrected };
            let system = ChainSystem::new(ChainConfig::new(1, 0.0, 1.0)?);
            pauli_control_strategy(table, 1.0).realize(&system)
        }
        _ => {
            let samples = set
                .strip_prefix("haar:")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| {
                    CliError::Usage(format!("unknown set `{set}`; expected pauli, printed, corrected or haar:<samples>"))
                })?;
            haar_sample_strategy(&mut ChaCha8Rng::seed_from_u64(seed), samples)?
        }
    };
    let check = is_unitary_design(&strategy, 1, tol)?;
    println!("set: {set}");
    println!("elements: {}", strategy.len());
    println!("deviation: {:.3e}", check.deviation);
    println!("tolerance: {tol:.3e}");
    println!("unitary 1-design: {}", if check.is_design { "yes" } else { "no" });
    if check.is_design {
        Ok(())
    } else {
        Err(CliError::NoSolution(format!(
            "`{set}` is not a 1-design at tolerance {tol:e} (deviation {:.3e})",
            check.deviation
        )))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn scan_j(
    min: f64,
    max: f64,
    steps: usize,
    scale: GridScale,
    n: usize,
    move_time: f64,
    out: Option<&Path>,
    convention: Convention,
) -> Result<(), CliError> {
    let chain = ChainConfig::new(n, 0.0, move_time)?;
    let curve = calib::scan(min, max, steps, scale, &chain, convention)?;
    let mut buf = Vec::new();
    write_curve_csv(&curve, &mut buf).expect("writing to memory");
    write_output(out, &buf)?;
    if let Some(path) = out {
        eprintln!("wrote {} rows to {}", curve.samples.len(), path.display());
    }
    Ok(())
}

pub fn find_fair_j(
    n: usize,
    move_time: f64,
    tol: f64,
    lower: f64,
    upper: f64,
    convention: Convention,
) -> Result<(), CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let chain = ChainConfig::new(n, 0.0, move_time)?;
    match calib::find_fair_coupling(&chain, lower, upper, tol, convention) {
        Ok(fair) => {
            println!("{:.6}", fair.coupling);
            eprintln!(
                "bracket [{:.10}, {:.10}], p_bob - 1/2 = {:.3e}",
                fair.bracket.0, fair.bracket.1, fair.payoff_offset
            );
            Ok(())
        }
        Err(qubitflip::Error::NoRoot { lower, upper }) => Err(CliError::NoSolution(format!(
            "Bob's mean payoff never crosses 1/2 for J in [{lower}, {upper}] (n = {n}, T = {move_time})"
        ))),
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn optimize(
    player: Player,
    n: usize,
    coupling: Option<f64>,
    move_time: f64,
    pulses: usize,
    restarts: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if restarts == 0 || pulses == 0 {
        return Err(CliError::Usage("--restarts and --N must be at least 1".into()));
    }
    let chain = ChainConfig::new(n, 0.0, move_time)?;
    let chain = chain.with_coupling(resolve_coupling(coupling, move_time)?)?;
    let problem = OptimizationProblem::new(chain, player, pulses)?;
    let result = optim::optimize(&problem, restarts, seed)?;
    let report = OptimizationReport::new(&problem, &result, restarts);
    write_output(out, report.to_json()?.as_bytes())?;
    eprintln!(
        "{} payoff {:.6} (restart {}, {} iterations, |g| = {:.1e}, {:?})",
        player.as_str(),
        result.best_payoff,
        result.best_restart,
        result.iterations,
        result.gradient_norm,
        result.termination
    );
    Ok(())
}

pub fn sweep(
    lengths: &[usize],
    coupling: Option<f64>,
    move_time: f64,
    pulses: usize,
    restarts: usize,
    seed: u64,
) -> Result<(), CliError> {
    if restarts == 0 || pulses == 0 {
        return Err(CliError::Usage("--restarts and --N must be at least 1".into()));
    }
    let coupling = resolve_coupling(coupling, move_time)?;
    println!("n,bob_best_payoff");
    for &length in lengths {
        let row = chain_sweep(&[length], pulses, restarts, seed, coupling, move_time)?.remove(0);
        println!("{},{:.6}", row.length, row.best_payoff);
    }
    Ok(())
}

pub fn play_demo() -> Result<(), CliError> {
    let h = qla::hadamard();
    let x = qla::pauli(Axis::X);
    let alice_second = &x * &h;
    println!("coin starts heads: |0>");
    println!("Alice plays H, putting the coin in (|0> + |1>)/sqrt 2");
    for (name, bob) in [("N (identity)", qla::identity(2)), ("F (sigma_x)", x.clone())] {
        let r = play_unitary(&h, &bob, &alice_second)?;
        println!("Bob plays {name}; Alice plays sigma_x H -> p_alice = {:.12}", r.p_alice);
    }
    let mix = qubitflip::strategy::MixedStrategy::uniform(vec![qla::identity(2), x])?;
    let mut mean = 0.0;
    for (bob, w) in mix.iter() {
        mean += w * play_unitary(&h, bob, &alice_second)?.p_alice;
    }
    println!("against any classical mix Bob loses: p_alice = {mean:.12}");
    Ok(())
}

fn print_stats(label: &str, stats: SampleStats) {
    println!("{label}: mean payoff {:.12}", stats.mean);
    println!("{label}: standard error {:.3e}", stats.std_error);
}

pub fn play_single(alice: &str, alice2: Option<&str>, bob: &str, samples: &str, seed: u64) -> Result<(), CliError> {
    let a1 = MoveSpec::parse(alice)?;
    let a2 = MoveSpec::parse(alice2.unwrap_or(alice))?;
    let b = MoveSpec::parse(bob)?;
    println!("Alice: {alice}, then {}", alice2.unwrap_or(alice));
    println!("Bob: {bob}");
    let p_alice = if samples == "exhaustive" {
        let (Some(m1), Some(mb), Some(m2)) = (a1.mixture(), b.mixture(), a2.mixture()) else {
            return Err(CliError::Usage("Haar moves need a Monte Carlo sample count, not `exhaustive`".into()));
        };
        let mut mean = 0.0;
        for (u1, w1) in m1.iter() {
            for (ub, wb) in mb.iter() {
                for (u2, w2) in m2.iter() {
                    mean += w1 * wb * w2 * play_unitary(u1, ub, u2)?.p_alice;
                }
            }
        }
        SampleStats::exact(mean)
    } else {
        let count: usize = samples
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| CliError::Usage(format!("--samples must be `exhaustive` or a positive count, got `{samples}`")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failure = None;
        let stats = sample_mean(&mut rng, count, |rng| {
            let (u1, ub, u2) = (a1.draw(rng), b.draw(rng), a2.draw(rng));
            match play_unitary(&u1, &ub, &u2) {
                Ok(r) => r.p_alice,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        });
        if let Some(e) = failure {
            return Err(e.into());
        }
        stats
    };
    print_stats("alice", p_alice);
    println!("bob: mean payoff {:.12}", 1.0 - p_alice.mean);
    Ok(())
}

pub fn play_chain(
    n: usize,
    coupling: Option<f64>,
    move_time: f64,
    controls: Option<&Path>,
    convention: Convention,
) -> Result<(), CliError> {
    match controls {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let report = OptimizationReport::from_json(&text)?;
            let chain = report.chain()?;
            if chain.n != n || coupling.is_some_and(|j| j != chain.coupling) {
                eprintln!("note: chain parameters are taken from {}", path.display());
            }
            let payoff = report.reevaluate()?;
            println!(
                "{} controls on n = {}, J = {}, T = {} against the Pauli strategy",
                report.player.as_str(),
                chain.n,
                chain.coupling,
                chain.move_time
            );
            println!("stored payoff: {:.12}", report.payoff);
            println!("replayed payoff: {payoff:.12}");
            println!("difference: {:.3e}", (payoff - report.payoff).abs());
        }
        None => {
            let chain = ChainConfig::new(n, resolve_coupling(coupling, move_time)?, move_time)?;
            let p_bob = calib::bob_payoff_at(chain.coupling, &chain, convention)?;
            println!(
                "Pauli against Pauli on n = {}, J = {}, T = {} ({:?} table, {:?} averaging)",
                chain.n, chain.coupling, chain.move_time, convention.table, convention.averaging
            );
            print_stats("alice", SampleStats::exact(1.0 - p_bob));
            println!("bob: mean payoff {p_bob:.12}");
        }
    }
    Ok(())
}
