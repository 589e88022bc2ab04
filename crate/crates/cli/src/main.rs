//! Command-line front end for color-code simulations and verification.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use colorcode::circuit::{build_round_schedule, build_stabilizer_circuit, max_residual_weight, verify_flag_property};
use colorcode::decoder::Variant;
use colorcode::graph::{enumerate_round_faults, FlagScheme, GraphSet};
use colorcode::harness::{
    estimate_threshold, exhaustive_distance_check, from_csv, run_montecarlo, sampled_distance_check, to_csv,
    trace_point, write_campaign, ExperimentConfig, Setup,
};
use colorcode::lattice::dual_lattice;
use colorcode::pauli::Basis;
use colorcode::sim::NoiseKind;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "colorcode", version, about = "Color-code simulation with flag qubits and a restriction decoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo logical error rates.
    Simulate(RunArgs),
    /// Monte Carlo sweep followed by a threshold estimate.
    Threshold {
        #[command(flatten)]
        run: RunArgs,
        /// Estimate from an existing results.csv instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Checks the flag property of every stabilizer circuit.
    VerifyFlags {
        #[arg(long, value_delimiter = ',', default_value = "5,7")]
        distance: Vec<usize>,
    },
    /// Checks that every data error up to a weight is corrected.
    VerifyDistance {
        #[arg(long, default_value_t = 5)]
        distance: usize,
        /// Defaults to (d - 1) / 2.
        #[arg(long)]
        weight: Option<usize>,
        /// Uniform samples instead of exhaustive enumeration.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value = "adapted")]
        decoder: Variant,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Lattice, faces, boundaries and dual edges as JSON.
    DumpLattice {
        #[arg(long, default_value_t = 5)]
        distance: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matching graphs as JSON.
    DumpGraph {
        #[arg(long, default_value_t = 5)]
        distance: usize,
        #[arg(long, default_value = "circuit")]
        noise: NoiseKind,
        #[arg(long, default_value = "renorm")]
        flag_scheme: FlagScheme,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leading-order edge probabilities of the circuit-level graphs as CSV.
    EdgeWeights {
        #[arg(long, default_value_t = 5)]
        distance: usize,
        #[arg(long, default_value = "renorm")]
        flag_scheme: FlagScheme,
        /// Rate at which probabilities and weights are evaluated.
        #[arg(long, default_value_t = 0.001)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Campaign options. Flags override values read from `--config`.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON file with an experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    distance: Option<Vec<usize>>,
    /// Comma-separated rates or `start:stop:step`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    decoder: Option<Variant>,
    #[arg(long)]
    flag_scheme: Option<FlagScheme>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for results.csv, manifest.json and trace.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write decoder traces of the first trials of each point.
    #[arg(long)]
    verbose: bool,
    #[arg(long, default_value_t = 10)]
    trace_trials: u64,
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
fn parse_rates(s: &str) -> Result<Vec<f64>> {
    if let Some((start, rest)) = s.split_once(':') {
        let (stop, step) = rest.split_once(':').context("range needs start:stop:step")?;
        let (a, b, h): (f64, f64, f64) = (start.parse()?, stop.parse()?, step.parse()?);
        if h <= 0.0 || b < a {
            bail!("empty rate range {s}");
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| ((a + h * i as f64) * 1e12).round() / 1e12).collect());
    }
    s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad rate {x:?}"))).collect()
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &self.distance {
            c.distances = d.clone();
        }
        if let Some(p) = &self.p {
            c.rates = parse_rates(p)?;
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { c.$g = v; })* };
        }
        set!(trials => trials, noise => noise, decoder => decoder, flag_scheme => flag_scheme,
             alpha => alpha, seed => seed, workers => workers);
        if self.rounds.is_some() {
            c.rounds = self.rounds;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// Writes a line to stdout; a closed pipe ends output quietly.
fn say(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => say(text),
    }
}

fn simulate(run: &RunArgs) -> Result<Vec<colorcode::harness::ResultRow>> {
    let config = run.config()?;
    let campaign = run_montecarlo(&config)?;
    if let Some(dir) = &config.out {
        write_campaign(dir, &config, &campaign)?;
        if run.verbose {
            let mut traces = Vec::new();
            for &d in &config.distances {
                let setup = Setup::new(d, &config)?;
                for &p in &config.rates {
                    traces.push(serde_json::json!({
                        "d": d,
                        "p": p,
                        "trials": trace_point(&setup, p, run.trace_trials.min(config.trials), config.seed),
                    }));
                }
            }
            std::fs::write(dir.join("trace.json"), serde_json::to_string_pretty(&traces)?)?;
        }
    } else if run.verbose {
        bail!("--verbose needs --out");
    }
    Ok(campaign.rows)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(run) => {
            let rows = simulate(&run)?;
            say(to_csv(&rows).trim_end())?;
        }
        Command::Threshold { run, input } => {
            let rows = match input {
                Some(path) => from_csv(&std::fs::read_to_string(&path)?)?,
                None => simulate(&run)?,
            };
            let mut report = serde_json::Map::new();
            for basis in Basis::BOTH {
                let value = match estimate_threshold(&rows, basis) {
                    Ok(est) => serde_json::to_value(est)?,
                    Err(e) => serde_json::json!({ "error": e.to_string() }),
                };
                report.insert(basis.to_string(), value);
            }
            say(&serde_json::to_string_pretty(&report)?)?;
        }
        Command::VerifyFlags { distance } => {
            let mut ok = true;
            for d in distance {
                let dual = dual_lattice(d)?;
                let l = &dual.lattice;
                let schedule = build_round_schedule(l)?;
                let (mut checked, mut worst) = (0, 0);
                for (f, face) in l.faces.iter().enumerate() {
                    for basis in Basis::BOTH {
                        let c = build_stabilizer_circuit(l, &schedule.timings, f, basis)?;
                        let t = if face.weight() == 6 { 2 } else { 1 };
                        if let Err(e) = verify_flag_property(&c, &face.qubits, t) {
                            ok = false;
                            say(&format!("d={d} face={f} basis={basis} FAIL {e:?}"))?;
                        }
                        worst = worst.max(max_residual_weight(&c, &face.qubits, 1));
                        checked += 1;
                    }
                }
                say(&format!("d={d} circuits={checked} max_single_fault_residual={worst}"))?;
            }
            if !ok {
                bail!("flag property violated");
            }
        }
        Command::VerifyDistance { distance, weight, samples, decoder, seed } => {
            let dual = dual_lattice(distance)?;
            let w = weight.unwrap_or((distance - 1) / 2);
            let report = match samples {
                Some(n) => sampled_distance_check(&dual, w, n, seed, decoder),
                None => exhaustive_distance_check(&dual, w, decoder),
            };
            say(&serde_json::to_string_pretty(&serde_json::json!({
                "passed": report.passed(),
                "report": report,
            }))?)?;
        }
        Command::DumpLattice { distance, out } => {
            let dual = dual_lattice(distance)?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&dual.dump())?)?;
        }
        Command::DumpGraph { distance, noise, flag_scheme, out } => {
            let dual = dual_lattice(distance)?;
            let set = match noise {
                NoiseKind::CodeCapacity => GraphSet::lattice(&dual),
                NoiseKind::CircuitLevel => {
                    let config = ExperimentConfig { noise, flag_scheme, ..Default::default() };
                    let setup = Setup::new(distance, &config)?;
                    GraphSet { graphs: setup.decoders.map(|d| d.graphs) }
                }
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&set)?)?;
        }
        Command::EdgeWeights { distance, flag_scheme, p, out } => {
            let dual = dual_lattice(distance)?;
            let schedule = build_round_schedule(&dual.lattice)?;
            let direct = match flag_scheme {
                FlagScheme::Direct => {
                    Some(colorcode::circuit::DirectFlagTables::build(&dual.lattice, &schedule.timings)?)
                }
                _ => None,
            };
            let faults = enumerate_round_faults(&schedule, direct.as_ref());
            let set = GraphSet::from_faults(&dual, &faults, flag_scheme);
            let mut text = String::from("stack,pair,kind,u,v,delta,coefficient,order,locations,probability,weight\n");
            for stack in set.graphs.iter() {
                for g in stack {
                    let probs = |r: &colorcode::graph::EdgeReport| -> f64 {
                        let idx = match r.kind {
                            colorcode::graph::EdgeKind::Vertical | colorcode::graph::EdgeKind::Diagonal => {
                                g.cross_edge(r.u, r.v).map(|i| g.cross[i].probability.evaluate(p))
                            }
                            _ => g.spatial_edge(r.u, r.v).map(|i| g.spatial[i].probability[r.delta].evaluate(p)),
                        };
                        idx.unwrap_or(0.0)
                    };
                    for r in g.polynomials() {
                        let q = probs(&r);
                        text.push_str(&format!(
                            "{},{:?},{:?},{},{},{},{},{},{},{:.6e},{:.6}\n",
                            r.stack,
                            r.pair,
                            r.kind,
                            r.u,
                            r.v,
                            r.delta,
                            r.polynomial.coefficient,
                            r.polynomial.order,
                            r.locations,
                            q,
                            -q.ln()
                        ));
                    }
                }
            }
            emit(out.as_deref(), text.trim_end())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::parse_rates;

    #[test]
    fn rate_ranges_are_inclusive() {
        let r = parse_rates("0.10:0.15:0.005").unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r[0], 0.1);
        assert_eq!(r[10], 0.15);
        assert_eq!(parse_rates("0.001, 0.002").unwrap(), vec![0.001, 0.002]);
        assert!(parse_rates("0.2:0.1:0.01").is_err());
    }
}
