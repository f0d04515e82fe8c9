//! Command-line front end.
//!
//! Exit codes: `0` success, `1` a verified property failed, `2` the instance
//! is invalid or could not be read, `3` the stopping time is missing or is
//! not a stopping time.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Error;
use crate::events::{EnumerationBound, Event, Partition, SampleSpace, ENUMERATION_BOUND_ENV};
use crate::filtration::{
    is_adapted, is_stopping_time, sigma_of_tau, stopping_process, StoppingCheck,
};
use crate::generate::{gen_instance, GenConfig, ALGORITHM};
use crate::instance::{
    parse_decimal, parse_instance, serialize_instance, GeneratorInfo, Instance, InstanceError,
    ParseOptions,
};
use crate::render::{render_ascii, render_dot};
use crate::stopped::{
    stopped_atoms, stopped_atoms_forced, stopped_layers, verify_prop3, verify_structure,
    verify_theorem1_with, BlockRule, Check, Layer, Report,
};
use crate::time::Time;
use crate::{Rational, RationalFiltration, RationalStoppingTime};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILED: i32 = 1;
pub const EXIT_INVALID_INSTANCE: i32 = 2;
pub const EXIT_NOT_STOPPING: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "stopsigma",
    version,
    about = "Atoms of stopping-time sigma-algebras on finite filtered spaces"
)]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Suppress warnings and summaries; requested data is still printed.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Reject unknown keys in instance files.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Largest atom count for which a sigma-algebra is listed explicitly.
    #[arg(long, global = true, env = ENUMERATION_BOUND_ENV, default_value_t = EnumerationBound::DEFAULT.0)]
    pub max_atoms: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the atoms of F_t, of F_tau, or of sigma(tau).
    Atoms(AtomsArgs),
    /// Verify the atom characterisation of F_tau and sigma(tau) inside F_tau.
    Check(InstanceArg),
    /// Run the verification on seeded random instances.
    Fuzz(FuzzArgs),
    /// Draw the filtration as a tree.
    Render(RenderArgs),
    /// Write a generated instance file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArg {
    /// Instance file (JSON).
    pub file: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["time", "stopped", "sigma_tau"]))]
pub struct AtomsArgs {
    pub file: PathBuf,

    /// Atoms of F_t; `inf` selects the terminal sigma-algebra.
    #[arg(long, value_name = "T")]
    pub time: Option<String>,

    /// Atoms of F_tau.
    #[arg(long)]
    pub stopped: bool,

    /// Atoms of sigma(tau).
    #[arg(long)]
    pub sigma_tau: bool,

    /// With --stopped, build the layers even if tau is not a stopping time.
    #[arg(long, requires = "stopped")]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Ascii,
    Dot,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = RenderFormat::Ascii)]
    pub format: RenderFormat,
}

#[derive(Debug, Clone, Args)]
pub struct GenFlags {
    #[arg(long, default_value_t = GenConfig::default().seed)]
    pub seed: u64,

    #[arg(long, default_value_t = GenConfig::default().n_outcomes)]
    pub n_outcomes: usize,

    #[arg(long, default_value_t = GenConfig::default().n_times)]
    pub n_times: usize,

    #[arg(long, default_value_t = GenConfig::default().split_prob)]
    pub split_prob: f64,

    #[arg(long, default_value_t = GenConfig::default().stop_prob)]
    pub stop_prob: f64,

    #[arg(long, default_value_t = GenConfig::default().infinity_prob)]
    pub infinity_prob: f64,
}

impl GenFlags {
    pub fn config(&self) -> GenConfig {
        GenConfig {
            seed: self.seed,
            n_outcomes: self.n_outcomes,
            n_times: self.n_times,
            split_prob: self.split_prob,
            stop_prob: self.stop_prob,
            infinity_prob: self.infinity_prob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mutant {
    Intersecting,
    Cumulative,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Instances to generate; sizes are drawn up to --n-outcomes and --n-times.
    #[arg(long, default_value_t = 1000)]
    pub iterations: u64,

    #[command(flatten)]
    pub gen: GenFlags,

    /// Directory receiving instance files of failed iterations.
    #[arg(long, default_value = "fuzz-failures")]
    pub dump_dir: PathBuf,

    /// Swap in a broken layer construction to exercise the harness.
    #[arg(long, value_enum, hide = true)]
    pub mutant: Option<Mutant>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub gen: GenFlags,

    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

struct Context<'a> {
    json: bool,
    quiet: bool,
    options: ParseOptions,
    bound: EnumerationBound,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Failure carrying its exit code.
struct Exit(i32, String);

impl From<InstanceError> for Exit {
    fn from(e: InstanceError) -> Self {
        Exit(EXIT_INVALID_INSTANCE, e.to_string())
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotAStoppingTime { .. } => EXIT_NOT_STOPPING,
            _ => EXIT_INVALID_INSTANCE,
        };
        Exit(code, e.to_string())
    }
}

impl From<std::io::Error> for Exit {
    fn from(e: std::io::Error) -> Self {
        Exit(EXIT_INVALID_INSTANCE, e.to_string())
    }
}

/// Runs a parsed command line, writing to `out` and `err`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut ctx = Context {
        json: cli.json,
        quiet: cli.quiet,
        options: ParseOptions { strict: cli.strict },
        bound: EnumerationBound(cli.max_atoms),
        out,
        err,
    };
    let result = match &cli.command {
        Command::Atoms(args) => cmd_atoms(&mut ctx, args),
        Command::Check(args) => cmd_check(&mut ctx, &args.file),
        Command::Fuzz(args) => cmd_fuzz(&mut ctx, args),
        Command::Render(args) => cmd_render(&mut ctx, args),
        Command::Gen(args) => cmd_gen(&mut ctx, args),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, message)) => {
            let _ = writeln!(ctx.err, "error: {message}");
            code
        }
    }
}

fn load(ctx: &mut Context, path: &Path) -> Result<Instance, Exit> {
    let text = fs::read_to_string(path)
        .map_err(|e| Exit(EXIT_INVALID_INSTANCE, format!("{}: {e}", path.display())))?;
    let parsed = parse_instance(&text, ctx.options)?;
    if !ctx.quiet {
        for w in &parsed.warnings {
            let _ = writeln!(ctx.err, "warning: {w}");
        }
    }
    Ok(parsed.instance)
}

fn require_tau(instance: &Instance) -> Result<&RationalStoppingTime, Exit> {
    instance
        .tau
        .as_ref()
        .ok_or_else(|| Exit(EXIT_NOT_STOPPING, "instance has no \"tau\"".into()))
}

fn labels(space: &SampleSpace, e: &Event) -> Value {
    Value::Array(e.iter().map(|i| Value::from(space.label(i))).collect())
}

fn blocks_json(space: &SampleSpace, blocks: &[Event]) -> Value {
    Value::Array(blocks.iter().map(|b| labels(space, b)).collect())
}

fn show_blocks(space: &SampleSpace, blocks: &[Event]) -> String {
    let parts: Vec<String> = blocks.iter().map(|b| space.show_event(b)).collect();
    format!("{{{}}}", parts.join(","))
}

fn layers_json(space: &SampleSpace, layers: &[Layer<Rational>]) -> Value {
    Value::Array(
        layers
            .iter()
            .map(|l| json!({"time": l.time.to_string(), "blocks": blocks_json(space, &l.blocks)}))
            .collect(),
    )
}

fn print(ctx: &mut Context, text: &str) -> Result<(), Exit> {
    ctx.out.write_all(text.as_bytes())?;
    Ok(())
}

fn print_json(ctx: &mut Context, value: &Value) -> Result<(), Exit> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    writeln!(ctx.out, "{text}")?;
    Ok(())
}

fn cmd_atoms(ctx: &mut Context, args: &AtomsArgs) -> Result<i32, Exit> {
    let instance = load(ctx, &args.file)?;
    let f = &instance.filtration;
    let space = f.space();

    let (kind, partition, layers): (String, Vec<Event>, Option<Vec<Layer<Rational>>>) =
        if let Some(t) = &args.time {
            let time = if t == "inf" {
                Time::Infinity
            } else {
                Time::Finite(parse_decimal(t)?)
            };
            let atoms = f.atoms_at(&time)?;
            (format!("time {time}"), atoms.blocks().to_vec(), None)
        } else if args.stopped {
            let tau = require_tau(&instance)?;
            if args.force {
                let layers = stopped_atoms_forced(tau, f)?;
                let mut blocks: Vec<Event> = layers
                    .iter()
                    .flat_map(|l| l.blocks.iter().cloned())
                    .collect();
                blocks.sort_by_key(|b| b.min_index());
                if !ctx.quiet && !is_stopping_time(tau, f)?.is_valid() {
                    let _ = writeln!(
                        ctx.err,
                        "warning: tau is not a stopping time; these blocks need not generate a sigma-algebra"
                    );
                }
                ("stopped (forced)".into(), blocks, Some(layers))
            } else {
                let result = stopped_atoms(tau, f)?;
                (
                    "stopped".into(),
                    result.atoms.into_blocks(),
                    Some(result.per_time),
                )
            }
        } else {
            let tau = require_tau(&instance)?;
            let atoms = sigma_of_tau(tau, f)?;
            ("sigma-tau".into(), atoms.into_blocks(), None)
        };

    if ctx.json {
        let mut value = json!({"kind": kind, "atoms": blocks_json(space, &partition)});
        if let Some(layers) = &layers {
            value["per_time"] = layers_json(space, layers);
        }
        print_json(ctx, &value)?;
    } else {
        let line = format!("{}\n", show_blocks(space, &partition));
        print(ctx, &line)?;
    }
    Ok(EXIT_OK)
}

fn check_json(space: &SampleSpace, c: &Check) -> Value {
    json!({
        "name": c.name,
        "passed": c.passed,
        "detail": c.detail,
        "counterexample": c.counterexample.as_ref().map(|e| labels(space, e)),
    })
}

fn cmd_check(ctx: &mut Context, path: &Path) -> Result<i32, Exit> {
    let instance = load(ctx, path)?;
    let f = &instance.filtration;
    let space = f.space();
    let tau = require_tau(&instance)?;

    let mut report = Report::default();
    let stopping = is_stopping_time(tau, f)?;
    report.checks.push(match &stopping {
        StoppingCheck::Valid => Check::pass("stopping_time", "{tau <= t} is in F_t for every t"),
        StoppingCheck::Violation { time, block } => Check::fail(
            "stopping_time",
            format!("{{tau <= {time}}} splits block {}", space.show_event(block)),
            Some(block.clone()),
        ),
    });
    let adapted = is_adapted(&stopping_process(tau, f)?, f)?;
    report.checks.push(if adapted == stopping.is_valid() {
        Check::pass(
            "process_adapted",
            format!("X^tau adapted: {adapted}, matching the stopping-time check"),
        )
    } else {
        Check::fail(
            "process_adapted",
            "adaptedness disagrees with the stopping-time check",
            None,
        )
    });

    let mut notes = Vec::new();
    let mut sizes = None;
    if stopping.is_valid() {
        let result = stopped_atoms(tau, f)?;
        report.extend(verify_structure(&result.per_time, tau, f.len()));
        report.extend(verify_theorem1_with(
            tau,
            f,
            ctx.bound,
            BlockRule::Contained,
        )?);
        let p3 = verify_prop3(tau, f, ctx.bound)?;
        report.extend(p3.to_report());
        sizes = Some((p3.sigma_tau_events, p3.stopped_events));
        if p3.strict {
            notes.push(format!(
                "sigma(tau) is a strict subset of F_tau ({} vs {} events)",
                p3.sigma_tau_events, p3.stopped_events
            ));
        } else if p3.included {
            notes.push("sigma(tau) = F_tau".to_string());
        }
        for t in f.axis().extended() {
            if f.atoms_at(&t)? == &result.atoms {
                notes.push(format!("F_tau = F_{t}"));
            }
        }
    }

    let passed = report.passed();
    let code = if !stopping.is_valid() {
        EXIT_NOT_STOPPING
    } else if passed {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILED
    };

    if ctx.json {
        let value = json!({
            "passed": passed,
            "checks": report.checks.iter().map(|c| check_json(space, c)).collect::<Vec<_>>(),
            "notes": notes,
            "sigma_tau_events": sizes.map(|s| s.0),
            "stopped_events": sizes.map(|s| s.1),
        });
        print_json(ctx, &value)?;
    } else if !ctx.quiet {
        let mut text = String::new();
        for c in &report.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!("{mark} {}: {}", c.name, c.detail));
            if let Some(w) = &c.counterexample {
                text.push_str(&format!(" [witness {}]", space.show_event(w)));
            }
            text.push('\n');
        }
        for n in &notes {
            text.push_str(&format!("note: {n}\n"));
        }
        text.push_str(if passed {
            "all checks passed\n"
        } else {
            "some checks failed\n"
        });
        print(ctx, &text)?;
    }
    Ok(code)
}

/// Verdict for one fuzzing iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub iteration: u64,
    pub config: GenConfig,
    pub failures: Vec<String>,
    pub infinity_layer: bool,
    pub single_time: bool,
}

/// Generates and verifies one instance: layer structure, the comparison
/// with the brute-force `F_τ`, `σ(τ) ⊆ F_τ`, and adaptedness of `X^τ`.
pub fn fuzz_iteration(
    base: &GenConfig,
    iteration: u64,
    bound: EnumerationBound,
    rule: BlockRule,
) -> Result<(IterationOutcome, RationalFiltration, RationalStoppingTime), Error> {
    let config = base.for_iteration(iteration);
    let (f, tau) = gen_instance::<Rational>(&config)?;
    let mut failures = Vec::new();

    let layers = stopped_layers(&tau, &f, rule)?;
    let mut report = verify_structure(&layers, &tau, f.len());
    report.extend(verify_theorem1_with(&tau, &f, bound, rule)?);
    report.extend(verify_prop3(&tau, &f, bound)?.to_report());
    failures.extend(
        report
            .failures()
            .map(|c| format!("{}: {}", c.name, c.detail)),
    );

    let stopping = is_stopping_time(&tau, &f)?.is_valid();
    let adapted = is_adapted(&stopping_process(&tau, &f)?, &f)?;
    if !stopping || !adapted {
        failures.push(format!("stopping time {stopping}, X^tau adapted {adapted}"));
    }

    let nonempty: Vec<&Layer<Rational>> = layers.iter().filter(|l| !l.blocks.is_empty()).collect();
    let outcome = IterationOutcome {
        iteration,
        config,
        failures,
        infinity_layer: nonempty.iter().any(|l| l.time.is_infinite()),
        single_time: nonempty.len() == 1,
    };
    Ok((outcome, f, tau))
}

fn cmd_fuzz(ctx: &mut Context, args: &FuzzArgs) -> Result<i32, Exit> {
    let base = args.gen.config();
    base.validate()?;
    let rule = match args.mutant {
        None => BlockRule::Contained,
        Some(Mutant::Intersecting) => BlockRule::Intersecting,
        Some(Mutant::Cumulative) => BlockRule::Cumulative,
    };
    if args.iterations == 0 && !ctx.quiet {
        let _ = writeln!(ctx.err, "warning: --iterations 0, nothing to verify");
    }

    let bound = ctx.bound;
    let mut results: Vec<_> = (0..args.iterations)
        .into_par_iter()
        .map(|i| fuzz_iteration(&base, i, bound, rule))
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|(o, _, _)| o.iteration);

    let mut failed = Vec::new();
    for (outcome, f, tau) in &results {
        if outcome.failures.is_empty() {
            continue;
        }
        fs::create_dir_all(&args.dump_dir)?;
        let path = args
            .dump_dir
            .join(format!("fuzz-{}-{}.json", base.seed, outcome.iteration));
        let instance = Instance {
            filtration: f.clone(),
            tau: Some(tau.clone()),
            generator: Some(GeneratorInfo::new(outcome.config.clone())),
        };
        fs::write(&path, serialize_instance(&instance)?)?;
        failed.push((outcome, path));
    }

    let infinity = results.iter().filter(|(o, _, _)| o.infinity_layer).count();
    let single = results.iter().filter(|(o, _, _)| o.single_time).count();

    if ctx.json {
        let value = json!({
            "algorithm": ALGORITHM,
            "seed": base.seed,
            "iterations": args.iterations,
            "failures": failed.len(),
            "failed": failed.iter().map(|(o, p)| json!({
                "iteration": o.iteration,
                "file": p.display().to_string(),
                "reasons": o.failures,
            })).collect::<Vec<_>>(),
            "coverage": {"infinity_layer": infinity, "single_time": single},
        });
        print_json(ctx, &value)?;
    } else if !ctx.quiet {
        let mut text = String::new();
        for (o, p) in &failed {
            text.push_str(&format!(
                "FAIL iteration {} ({}): {}\n",
                o.iteration,
                p.display(),
                o.failures.join("; ")
            ));
        }
        text.push_str(&format!(
            "{} iterations, {} failures (seed {}, {ALGORITHM})\n",
            args.iterations,
            failed.len(),
            base.seed
        ));
        text.push_str(&format!(
            "coverage: {infinity} with a nonempty infinity layer, {single} stopped at a single time\n"
        ));
        print(ctx, &text)?;
    }
    Ok(if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILED
    })
}

fn cmd_render(ctx: &mut Context, args: &RenderArgs) -> Result<i32, Exit> {
    let instance = load(ctx, &args.file)?;
    let tau = instance.tau.as_ref();
    let text = match args.format {
        RenderFormat::Ascii => render_ascii(&instance.filtration, tau),
        RenderFormat::Dot => render_dot(&instance.filtration, tau),
    };
    print(ctx, &text)?;
    Ok(EXIT_OK)
}

fn cmd_gen(ctx: &mut Context, args: &GenArgs) -> Result<i32, Exit> {
    let config = args.gen.config();
    let (filtration, tau) = gen_instance::<Rational>(&config)?;
    let instance = Instance {
        filtration,
        tau: Some(tau),
        generator: Some(GeneratorInfo::new(config)),
    };
    let text = serialize_instance(&instance)?;
    match &args.output {
        Some(path) => fs::write(path, text)?,
        None => print(ctx, &text)?,
    }
    Ok(EXIT_OK)
}

/// Canonical text for a partition, as printed by `atoms`.
pub fn show_partition(space: &SampleSpace, p: &Partition) -> String {
    show_blocks(space, p.blocks())
}
