mod config;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qtanner::complex::LeftRightCayleyComplex;
use qtanner::decoder::{DecoderConfig, OsdStrategy};
use qtanner::distance::{default_trials, estimate_distance, exhaustive_low_weight};
use qtanner::groups::{DihedralGroup, GeneratorSet};
use qtanner::harness::{
    append_csv, overhead, pseudo_threshold, run_memory, sweep_distances, write_json, ShotPolicy, SweepConfig,
    ThresholdSearch,
};
use qtanner::noise::{NoiseKind, NoiseModel, TwoQubitNoise};
use qtanner::qcode::{fixture_names, fixture_spec, load_fixture, random_tanner_code, CssCode};

#[derive(Parser, Debug)]
#[command(name = "qtanner", version, about = "Quantum Tanner codes on dihedral groups")]
pub struct Cli {
    /// JSON file whose keys mirror the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for bundles, CSV and JSON output.
    #[arg(long, global = true, env = "QTANNER_OUT_DIR", default_value = "results")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random code from a dihedral group, generator size and seed.
    #[command(args_override_self = true)]
    Construct(ConstructArgs),
    /// Write a named fixture as a code bundle.
    #[command(args_override_self = true)]
    Fixture(FixtureArgs),
    /// Structural invariant report.
    #[command(args_override_self = true)]
    Check(CodeArg),
    /// Randomized distance upper bound.
    #[command(args_override_self = true)]
    Distance(DistanceArgs),
    /// Spectra of the Cayley graphs and of the complex.
    #[command(args_override_self = true)]
    Spectra(SpectraArgs),
    /// Memory experiment; appends one CSV row per p.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Pseudo-threshold by bisection.
    #[command(args_override_self = true)]
    Threshold(ThresholdArgs),
    /// Space-time overhead.
    #[command(args_override_self = true)]
    Overhead(OverheadArgs),
    /// Maximum distance over random instances per (Δ, d_A, d_B).
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct CodeArg {
    /// Fixture name or bundle directory.
    #[arg(long)]
    code: String,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// n of the dihedral group D_n.
    #[arg(long)]
    group: u32,
    #[arg(long)]
    delta: usize,
    /// Defaults to Δ/2.
    #[arg(long)]
    ka: Option<usize>,
    /// Defaults to Δ - k_A.
    #[arg(long)]
    kb: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bundle directory; defaults to `<out-dir>/<code name>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[command(flatten)]
    code: CodeArg,
    /// Defaults to 1e5 for n ≤ 100, else 1e6.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also enumerate every logical up to this weight.
    #[arg(long)]
    exhaustive: Option<usize>,
}

#[derive(Args, Debug)]
struct SpectraArgs {
    #[arg(long, conflicts_with_all = ["group", "a", "b"])]
    code: Option<String>,
    #[arg(long, requires_all = ["a", "b"])]
    group: Option<u32>,
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    a: Vec<String>,
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    b: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Phenom,
    Circuit,
    Capacity,
}

impl From<Model> for NoiseKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Phenom => NoiseKind::Phenomenological,
            Model::Circuit => NoiseKind::Circuit,
            Model::Capacity => NoiseKind::CodeCapacity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Order0,
    CombinationSweep,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TwoQubit {
    Split,
    Depolarizing,
}

#[derive(Args, Debug)]
struct DecoderArgs {
    #[arg(long, default_value_t = 0.625)]
    bp_alpha: f64,
    /// Integer, `n` (block length) or `columns` (decoding matrix width).
    #[arg(long, default_value = "n")]
    bp_max_iters: String,
    #[arg(long, default_value_t = 9)]
    osd_order: usize,
    #[arg(long, value_enum, default_value = "combination-sweep")]
    osd_strategy: Strategy,
}

impl DecoderArgs {
    fn resolve(&self, code: &CssCode) -> Result<DecoderConfig> {
        let max_iters = match self.bp_max_iters.as_str() {
            "n" => Some(code.n),
            "columns" => None,
            s => Some(s.parse().with_context(|| format!("--bp-max-iters {s}"))?),
        };
        let config = DecoderConfig {
            alpha: self.bp_alpha,
            max_iters,
            osd_order: self.osd_order,
            osd_strategy: match self.osd_strategy {
                Strategy::Order0 => OsdStrategy::Order0,
                Strategy::CombinationSweep => OsdStrategy::CombinationSweep,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct ShotArgs {
    /// Fixed shot count per memory component; disables early stopping.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, default_value_t = 10_000_000)]
    max_shots: usize,
    #[arg(long, default_value_t = 100)]
    target_failures: usize,
    #[arg(long, default_value_t = 1024)]
    batch: usize,
}

impl ShotArgs {
    fn policy(&self) -> ShotPolicy {
        let mut policy = match self.shots {
            Some(s) => ShotPolicy::fixed(s),
            None => ShotPolicy {
                max_shots: self.max_shots,
                target_failures: self.target_failures,
                batch: self.batch,
            },
        };
        policy.batch = self.batch;
        policy
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArg,
    #[arg(long, value_enum)]
    model: Model,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, required = true)]
    p: Vec<f64>,
    /// Defaults to the published distance of a fixture.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "split")]
    two_qubit: TwoQubit,
    #[arg(long, default_value_t = 0.1)]
    idle_factor: f64,
    /// Defaults to `<out-dir>/results.csv`.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    shots: ShotArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    code: CodeArg,
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    lo: f64,
    #[arg(long)]
    hi: f64,
    #[arg(long, default_value_t = 0.05)]
    rel_width: f64,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    shots: ShotArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args, Debug)]
struct OverheadArgs {
    #[command(flatten)]
    code: CodeArg,
    #[arg(long)]
    rounds: Option<usize>,
}

fn parse_target(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected d_Axd_B, got `{s}`"))?;
    Ok((
        a.trim().parse().map_err(|e| format!("{s}: {e}"))?,
        b.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    ))
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Dihedral group parameters n.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_value = "4,6,8,10,12,14,16")]
    groups: Vec<u32>,
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_value = "3,5")]
    deltas: Vec<usize>,
    /// Local distance pairs as `d_Axd_B`.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, value_parser = parse_target,
          default_value = "1x1,1x2,2x2,2x3,3x3")]
    targets: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    code_attempts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load_code(spec: &str) -> Result<CssCode> {
    if fixture_names().contains(&spec) {
        return Ok(load_fixture(spec)?);
    }
    let dir = Path::new(spec);
    if dir.is_dir() {
        return CssCode::read_bundle(dir).with_context(|| format!("reading bundle {spec}"));
    }
    bail!("`{spec}` is neither a fixture ({}) nor a bundle directory", fixture_names().join(", "))
}

fn default_rounds(code: &CssCode, rounds: Option<usize>) -> Result<usize> {
    if let Some(r) = rounds {
        return Ok(r);
    }
    code.provenance
        .as_ref()
        .and_then(|p| p.fixture.as_deref())
        .map(|f| Ok(fixture_spec(f)?.reference.d))
        .unwrap_or_else(|| Err(anyhow!("--rounds is required for codes that are not fixtures")))
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn safe_name(name: &str) -> String {
    name.chars().map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

#[derive(Serialize)]
struct CheckReport {
    code: String,
    n: usize,
    k: usize,
    commutes: bool,
    expected_n: Option<usize>,
    max_row_weight: usize,
    row_weight_bound: Option<usize>,
    max_qubit_degree: usize,
    qubit_degree_bound: Option<f64>,
    ok: bool,
}

fn check(code: &CssCode) -> CheckReport {
    let params = code.parameters();
    let prov = code.provenance.as_ref();
    let expected_n = prov.map(|p| p.delta_a * p.delta_b * 2 * p.group_n as usize / 2);
    let row_weight_bound = prov.map(|p| p.delta_a * p.delta_b);
    let commutes = code.commutes();
    let ok = commutes
        && expected_n.is_none_or(|e| e == code.n)
        && row_weight_bound.is_none_or(|b| params.max_row_weight <= b)
        && params
            .qubit_degree_bound
            .is_none_or(|b| params.max_qubit_degree as f64 <= b + 1e-9);
    CheckReport {
        code: code.name.clone(),
        n: code.n,
        k: code.k,
        commutes,
        expected_n,
        max_row_weight: params.max_row_weight,
        row_weight_bound,
        max_qubit_degree: params.max_qubit_degree,
        qubit_degree_bound: params.qubit_degree_bound,
        ok,
    }
}

fn model(kind: Model, p: f64, rounds: usize, args: &SimulateArgs) -> Result<NoiseModel> {
    let mut m = NoiseModel::new(kind.into(), p, rounds)?;
    m.idle_factor = args.idle_factor;
    m.two_qubit = match args.two_qubit {
        TwoQubit::Split => TwoQubitNoise::Split,
        TwoQubit::Depolarizing => TwoQubitNoise::Depolarizing,
    };
    Ok(m)
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Construct(a) => {
            let k_a = a.ka.unwrap_or(a.delta / 2);
            let k_b = a.kb.unwrap_or(a.delta.saturating_sub(k_a));
            let code = random_tanner_code(a.group, a.delta, k_a, k_b, a.seed)?;
            let dir = a.out.unwrap_or_else(|| out_dir.join(safe_name(&code.name)));
            code.write_bundle(&dir)?;
            eprintln!("wrote {}", dir.display());
            print(&code.parameters())
        }
        Command::Fixture(a) => {
            let code = load_fixture(&a.name)?;
            let dir = a.out.unwrap_or_else(|| out_dir.join(&a.name));
            code.write_bundle(&dir)?;
            eprintln!("wrote {}", dir.display());
            print(&code.parameters())
        }
        Command::Check(a) => {
            let report = check(&load_code(&a.code)?);
            print(&report)?;
            if !report.ok {
                bail!("invariant check failed");
            }
            Ok(())
        }
        Command::Distance(a) => {
            let code = load_code(&a.code.code)?;
            let trials = a.trials.unwrap_or_else(|| default_trials(code.n));
            let estimate = estimate_distance(&code, trials, a.seed)?;
            print(&serde_json::json!({
                "code": code.name,
                "estimate": estimate,
                "exhaustive": a.exhaustive.map(|w| exhaustive_low_weight(&code, w)
                    .map(|(pauli, support)| serde_json::json!({"pauli": format!("{pauli:?}"), "support": support}))),
            }))
        }
        Command::Spectra(a) => {
            let (n, gens_a, gens_b) = match (&a.code, a.group) {
                (Some(spec), _) => {
                    let code = load_code(spec)?;
                    let p = code
                        .provenance
                        .ok_or_else(|| anyhow!("bundle has no construction provenance"))?;
                    (p.group_n, p.a, p.b)
                }
                (None, Some(n)) => (n, a.a.clone(), a.b.clone()),
                (None, None) => bail!("give --code or --group with --a and --b"),
            };
            let group = DihedralGroup::new(n)?;
            let ga = GeneratorSet::parse(&group, &gens_a.iter().map(String::as_str).collect::<Vec<_>>())?;
            let gb = GeneratorSet::parse(&group, &gens_b.iter().map(String::as_str).collect::<Vec<_>>())?;
            print(&LeftRightCayleyComplex::build(group, ga, gb)?.summary()?)
        }
        Command::Simulate(a) => {
            let code = load_code(&a.code.code)?;
            let rounds = default_rounds(&code, a.rounds)?;
            let config = a.decoder.resolve(&code)?;
            let policy = a.shots.policy();
            let csv = a.csv.clone().unwrap_or_else(|| out_dir.join("results.csv"));
            for &p in &a.p {
                let m = model(a.model, p, rounds, &a)?;
                let result = run_memory(&code, &m, &config, &policy, a.seed)?;
                append_csv(&csv, std::slice::from_ref(&result))?;
                println!("{}", serde_json::to_string(&result)?);
            }
            eprintln!("appended to {}", csv.display());
            Ok(())
        }
        Command::Threshold(a) => {
            let code = load_code(&a.code.code)?;
            let search = ThresholdSearch {
                kind: a.model.into(),
                lo: a.lo,
                hi: a.hi,
                rel_width: a.rel_width,
                rounds: default_rounds(&code, a.rounds)?,
                policy: a.shots.policy(),
                seed: a.seed,
            };
            let result = pseudo_threshold(&code, &a.decoder.resolve(&code)?, &search)?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!(
                "threshold-{}-{}.json",
                safe_name(&code.name),
                search.kind.label()
            ));
            write_json(&path, &result)?;
            eprintln!("wrote {}", path.display());
            print(&result)
        }
        Command::Overhead(a) => {
            let code = load_code(&a.code.code)?;
            let reference = code
                .provenance
                .as_ref()
                .and_then(|p| p.fixture.as_deref())
                .and_then(|f| fixture_spec(f).ok())
                .map(|f| f.reference.overhead_per_logical);
            print(&serde_json::json!({
                "code": code.name,
                "overhead": overhead(&code, default_rounds(&code, a.rounds)?),
                "published_per_logical": reference,
            }))
        }
        Command::Sweep(a) => {
            let config = SweepConfig {
                groups: a.groups,
                deltas: a.deltas,
                targets: a.targets,
                instances: a.instances,
                trials: a.trials,
                code_attempts: a.code_attempts,
                seed: a.seed,
            };
            let cells = sweep_distances(&config);
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("sweep.json");
            write_json(&path, &serde_json::json!({"config": config, "cells": cells}))?;
            eprintln!("wrote {}", path.display());
            print(&cells)
        }
    }
}

fn main() -> Result<()> {
    let args = config::expand(std::env::args_os().collect())?;
    run(Cli::parse_from(args))
}
