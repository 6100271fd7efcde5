//! The `prosk` command line: verification suites, the word compiler and Cayley graph
//! measurements, all reporting JSON that embeds the full run configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{FilteredGroup, GroupDescriptor, DEFAULT_ELEMENT_BUDGET};
use crate::rings::RingDescriptor;
use crate::skcompiler::{CompileOptions, Compiler, GenSpec, GeneratingSet, HasOracle, Plan};
use crate::spectral::{
    diameter_bfs, extension_bound_check, spectral_gap, spectral_report, suggested_walk_length, walk_statistics,
    Coordinates, ExtensionMode, IndexedGroup, Letters, MixingMode, WalkOptions,
};
use crate::verify::{self, Suite, Target, VerifyOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Approximate bytes held per enumerated element, for `PROSK_BUDGET_MB`.
const BYTES_PER_ELEMENT: u128 = 256;

/// Longest word written out letter by letter.
const PRINT_LIMIT: u128 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "prosk", version, about = "Word compiler and Cayley graph measurements for congruence quotients")]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout; series also go to the same path with a
    /// `.csv` extension.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a property suite.
    Verify(VerifyArgs),
    /// Compile a target element into a word.
    Compile(CompileArgs),
    /// Exact Cayley graph diameter by breadth-first search.
    Diam(GroupArgs),
    /// Diameter, spectral gap and mixing profile.
    Spectral(SpectralArgs),
    /// Monte Carlo random walks against exact convolution.
    Walk(WalkArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// rings, filtration, lie, nottingham, sk, spectral or all.
    #[arg(long)]
    pub suite: String,
    #[arg(long, conflicts_with = "group")]
    pub ring: Option<String>,
    #[arg(long)]
    pub group: Option<String>,
    /// Random cases per property.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// e.g. `SL:d=2,Zp:p=3,N=8` or `Nottingham,Fq[[t]]:q=5,N=6`.
    #[arg(long)]
    pub group: String,
    /// Quotient level `n` of `G/K_n`; defaults to the truncation.
    #[arg(long)]
    pub level: Option<u32>,
    /// `standard`, `sampled:k:seed` or `file:path`.
    #[arg(long, default_value = "standard")]
    pub gens: String,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long, default_value = "dyadic")]
    pub plan: String,
    /// `random`, a JSON element, or Nottingham shorthand such as `t+2t^3`.
    #[arg(long, default_value = "random")]
    pub target: String,
    /// Seed for a random target.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base level multiplier, instead of the smallest admissible one.
    #[arg(long)]
    pub n0: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Longest walk in the mixing profile.
    #[arg(long, default_value_t = 50)]
    pub mixing: u32,
    /// Use floating point for the mixing profile even where exact arithmetic is possible.
    #[arg(long)]
    pub float: bool,
    /// Also check the extension bound over the kernel `K_m/K_n`.
    #[arg(long)]
    pub kernel_level: Option<u32>,
    /// Sampled generating sets for the extension check; exhaustive when omitted.
    #[arg(long, requires = "kernel_level")]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Walk length; defaults to `10 ceil(1/(1-ρ)) log |G|`.
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evenly spaced lengths reported up to `l`.
    #[arg(long, default_value_t = 10)]
    pub checkpoints: u32,
    /// first-kind, second-kind or nottingham-coeffs.
    #[arg(long)]
    pub coordinates: Option<String>,
}

#[derive(Debug, Serialize)]
struct RunConfig {
    subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ring: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gens: Option<String>,
    #[serde(flatten)]
    extra: Value,
    budget_elements: u128,
}

/// Element budget from `PROSK_BUDGET_MB`, or the default.
pub fn element_budget() -> Result<u128> {
    match std::env::var("PROSK_BUDGET_MB") {
        Ok(v) => {
            let mb: u128 = v.trim().parse().map_err(|_| Error::Decode(format!("PROSK_BUDGET_MB={v:?}")))?;
            if mb == 0 {
                return Err(Error::Decode("PROSK_BUDGET_MB must be positive".into()));
            }
            Ok((mb * 1_000_000 / BYTES_PER_ELEMENT).max(1))
        }
        Err(_) => Ok(DEFAULT_ELEMENT_BUDGET),
    }
}

fn level_of(args: &GroupArgs, desc: &GroupDescriptor) -> Result<u32> {
    let n = args.level.unwrap_or(desc.ring.truncation);
    if n == 0 || n > desc.ring.truncation {
        return Err(Error::LevelTooLarge { level: n, truncation: desc.ring.truncation });
    }
    Ok(n)
}

fn config(sub: &'static str, args: &GroupArgs, desc: &GroupDescriptor, extra: Value, budget: u128) -> Result<RunConfig> {
    Ok(RunConfig {
        subcommand: sub,
        group: Some(desc.to_string()),
        ring: None,
        level: Some(level_of(args, desc)?),
        gens: Some(args.gens.parse::<GenSpec>()?.to_string()),
        extra,
        budget_elements: budget,
    })
}

/// A finished run: the JSON report and optional CSV series.
pub struct Output {
    pub report: Value,
    pub csv: Option<String>,
    /// Whether the run met its own pass criterion (verification suites only).
    pub pass: bool,
}

fn envelope(cfg: RunConfig, result: Value) -> Value {
    json!({ "prosk_version": VERSION, "config": cfg, "result": result })
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<Output> {
    let threads = cli.threads.unwrap_or_else(verify::default_threads).max(1);
    let budget = element_budget()?;
    match &cli.command {
        Command::Verify(a) => cmd_verify(a, threads, budget),
        Command::Compile(a) => cmd_compile(a, budget),
        Command::Diam(a) => cmd_diam(a, budget),
        Command::Spectral(a) => cmd_spectral(a, budget),
        Command::Walk(a) => cmd_walk(a, threads, budget),
    }
}

fn cmd_verify(a: &VerifyArgs, threads: usize, budget: u128) -> Result<Output> {
    let suite: Suite = a.suite.parse()?;
    let target = match (&a.ring, &a.group) {
        (Some(r), _) => Target::Ring(r.parse::<RingDescriptor>()?),
        (None, Some(g)) => Target::Group(g.parse()?),
        (None, None) => Target::Default,
    };
    if a.samples == Some(0) {
        return Err(Error::Decode("--samples must be positive".into()));
    }
    let opts = VerifyOptions { samples: a.samples, seed: a.seed, threads, budget };
    let report = verify::run(suite, &target, &opts)?;
    let cfg = RunConfig {
        subcommand: "verify",
        group: a.group.clone(),
        ring: a.ring.clone(),
        level: None,
        gens: None,
        extra: json!({ "suite": suite.name(), "samples": a.samples, "seed": a.seed }),
        budget_elements: budget,
    };
    let pass = report.pass;
    Ok(Output { report: envelope(cfg, serde_json::to_value(&report).expect("report serializes")), csv: None, pass })
}

fn cmd_compile(a: &CompileArgs, budget: u128) -> Result<Output> {
    let desc: GroupDescriptor = a.group.group.parse()?;
    let plan: Plan = a.plan.parse()?;
    let cfg = config(
        "compile",
        &a.group,
        &desc,
        json!({ "plan": plan, "target": a.target, "seed": a.seed, "n0": a.n0 }),
        budget,
    )?;
    let n = level_of(&a.group, &desc)?;
    let spec: GenSpec = a.group.gens.parse()?;
    let result = with_group!(&desc, |g| compile_on(&g, &spec, n, plan, a, budget))?;
    Ok(Output { report: envelope(cfg, result), csv: None, pass: true })
}

fn parse_target<G: FilteredGroup>(g: &G, s: &str, seed: u64) -> Result<G::Elem> {
    if s == "random" {
        return Ok(g.random_element(&mut verify::rng_for(seed, 0)));
    }
    let v = serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()));
    let x = g.element_from_json(&v)?;
    if !g.is_member(&x) {
        return Err(Error::Decode(format!("{s} is not an element of {}", g.descriptor())));
    }
    Ok(x)
}

fn compile_on<G: HasOracle>(g: &G, spec: &GenSpec, n: u32, plan: Plan, a: &CompileArgs, budget: u128) -> Result<Value> {
    let gens = GeneratingSet::from_spec(g, spec)?;
    let target = parse_target(g, &a.target, a.seed)?;
    let opts = CompileOptions { n0: a.n0, budget, ..CompileOptions::default() };
    let compiler = Compiler::new(g, &gens, n, plan, opts)?;
    let c = compiler.compile(&target, &opts)?;
    let word = if c.word.len() <= PRINT_LIMIT {
        serde_json::to_value(c.word.flatten(PRINT_LIMIT)?).expect("word serializes")
    } else {
        Value::Null
    };
    Ok(json!({
        "generators": gens.to_json(g),
        "target": g.element_to_json(&target),
        "value": g.element_to_json(&c.value),
        "schedule": compiler.schedule(),
        "certificate": c.certificate,
        "word": word,
    }))
}

fn cmd_diam(a: &GroupArgs, budget: u128) -> Result<Output> {
    let desc: GroupDescriptor = a.group.parse()?;
    let cfg = config("diam", a, &desc, json!({}), budget)?;
    let n = level_of(a, &desc)?;
    let spec: GenSpec = a.gens.parse()?;
    let result = with_group!(&desc, |g| {
        let q = g.truncated(n);
        let gens = GeneratingSet::from_spec(&q, &spec)?;
        let diameter = diameter_bfs(&q, n, &gens.elems, budget)?;
        Ok::<_, Error>(json!({
            "group": q.descriptor().to_string(),
            "level": n,
            "order": q.quotient_order(n).map(|o| o.to_string()),
            "generators": gens.to_json(&q),
            "diameter": diameter,
        }))
    })?;
    Ok(Output { report: envelope(cfg, result), csv: None, pass: true })
}

fn cmd_spectral(a: &SpectralArgs, budget: u128) -> Result<Output> {
    let desc: GroupDescriptor = a.group.group.parse()?;
    let extension = a.kernel_level.map(|m| {
        let mode = match a.trials {
            Some(trials) => ExtensionMode::Sampled { trials, seed: a.seed },
            None => ExtensionMode::Exhaustive,
        };
        (m, mode)
    });
    let cfg = config(
        "spectral",
        &a.group,
        &desc,
        json!({ "mixing": a.mixing, "float": a.float, "kernel_level": a.kernel_level, "trials": a.trials, "seed": a.seed }),
        budget,
    )?;
    let n = level_of(&a.group, &desc)?;
    let spec: GenSpec = a.group.gens.parse()?;
    let (result, csv) = with_group!(&desc, |g| {
        let ig = IndexedGroup::new(&g, n, budget)?;
        let gens = GeneratingSet::from_spec(ig.group(), &spec)?;
        let mode = if a.float || ig.order() > crate::spectral::RATIONAL_LIMIT {
            MixingMode::Float
        } else {
            MixingMode::Rational
        };
        let report = spectral_report(&ig, &gens.elems, Some((a.mixing, mode)))?;
        let ext = extension.map(|(m, mode)| extension_bound_check(&g, n, m, mode, budget)).transpose()?;
        let mut csv = String::from("l,deviation,bound,within_bound\n");
        for p in report.mixing.iter().flat_map(|m| &m.points) {
            csv.push_str(&format!("{},{:e},{:e},{}\n", p.l, p.deviation, p.bound, p.within_bound));
        }
        Ok::<_, Error>((json!({ "generators": gens.to_json(ig.group()), "report": report, "extension": ext }), csv))
    })?;
    Ok(Output { report: envelope(cfg, result), csv: Some(csv), pass: true })
}

fn cmd_walk(a: &WalkArgs, threads: usize, budget: u128) -> Result<Output> {
    let desc: GroupDescriptor = a.group.group.parse()?;
    let coordinates: Option<Coordinates> = a.coordinates.as_deref().map(str::parse).transpose()?;
    let cfg = config(
        "walk",
        &a.group,
        &desc,
        json!({ "l": a.l, "trials": a.trials, "seed": a.seed, "checkpoints": a.checkpoints, "coordinates": coordinates }),
        budget,
    )?;
    let n = level_of(&a.group, &desc)?;
    let spec: GenSpec = a.group.gens.parse()?;
    let (result, csv) = with_group!(&desc, |g| {
        let ig = IndexedGroup::new(&g, n, budget)?;
        let gens = GeneratingSet::from_spec(ig.group(), &spec)?;
        let letters = Letters::symmetric(&ig, &gens.elems, true);
        let (rho, _) = spectral_gap(&letters)?;
        let l = a.l.unwrap_or_else(|| suggested_walk_length(rho, ig.order()));
        let opts = WalkOptions { l, trials: a.trials, seed: a.seed, checkpoints: a.checkpoints, threads, coordinates };
        let report = walk_statistics(&ig, &gens.elems, &opts)?;
        let mut csv = String::from("l,tv_monte_carlo,tv_exact,agrees\n");
        for p in &report.series {
            csv.push_str(&format!("{},{:e},{:e},{}\n", p.l, p.tv_monte_carlo, p.tv_exact, p.agrees));
        }
        Ok::<_, Error>((json!({ "generators": gens.to_json(ig.group()), "rho": rho, "l": l, "report": report }), csv))
    })?;
    Ok(Output { report: envelope(cfg, result), csv: Some(csv), pass: true })
}

/// Writes the report (and CSV next to it when `out` is given) and returns the process exit code.
pub fn emit(out: Option<&Path>, output: &Output) -> std::io::Result<i32> {
    let text = serde_json::to_string_pretty(&output.report).expect("report serializes") + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            if let Some(csv) = &output.csv {
                std::fs::write(path.with_extension("csv"), csv)?;
            }
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(if output.pass { 0 } else { 1 })
}

/// Entry point behind `main`: parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli).map(|o| emit(cli.out.as_deref(), &o)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
