mod report;

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use efxw::io::{read_allocation, read_instance, write_text};
use efxw::model::{format_rational, parse_rational, Rational};
use efxw::oracle::{OracleError, DEFAULT_BUDGET};
use efxw::radical::{RadicalError, DEFAULT_PRECISION_CAP};
use efxw::welfare::{pmean_decimal, WelfareError};
use efxw::{
    decide_compatibility, exists_fair_po, gen_example_compat, gen_hoarding_family, gen_partition_gadget,
    gen_private_shared_family, gen_random, global_optimum, is_fair, optimize_within_fair, price_of_fairness,
    serialize_allocation, serialize_instance, solve_nmu, utilities, Allocation, AllocationTable, Compatibility,
    EnvyWitness, FairnessNotion, Filter, GadgetVariant, Instance, Optimum, PExponent, PartitionGadgetSpec, PriceReport,
    SolverConfig, SolverError, SolverResult, WelfareOptions,
};
use serde_json::{json, Value};

use report::{write_csv, Format, Report, DIGITS, FORMAT_VERSION, PRICE_HEADER};

#[derive(Parser)]
#[command(name = "efxw", version, about = "Exact welfare optimization under EFX and EFX0 fairness constraints")]
struct Cli {
    /// Worker threads for the solver and oracle [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format [default: human, or csv for sweep]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Show exact score keys instead of decimal welfare in tables
    #[arg(long, global = true)]
    exact: bool,
    /// Largest number of allocations the exhaustive oracle may enumerate
    #[arg(
        long,
        global = true,
        env = "EFXW_BUDGET",
        default_value_t = DEFAULT_BUDGET,
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    budget: u64,
    /// Precision cap in bits when comparing welfare under fractional exponents
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_CAP, value_parser = clap::value_parser!(u32).range(16..))]
    precision_bits: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an allocation against a fairness notion; exits 1 with a witness if it fails
    Check {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, default_value = "efx")]
        notion: FairnessNotion,
    },
    /// Find a welfare-optimal allocation
    Solve(SolveArgs),
    /// Price of fairness of one instance as a table row
    Price(PriceArgs),
    /// Write a generated instance document
    Generate(GenerateArgs),
    /// Price-of-fairness rows over a grid of generated instances
    Sweep(SweepArgs),
    /// Exhaustive search over every allocation
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Best allocation satisfying the notion
    Within,
    /// Best allocation overall
    Global,
    /// Whether some fair allocation is globally optimal
    Compat,
    /// Fair optimum for instances where every value is positive
    Nmu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Solver for p <= 0, oracle otherwise
    Auto,
    Oracle,
    Solver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    ExampleCompat,
    Hoarding,
    PrivateShared,
    Random,
    PartitionGadget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Compatibility,
    Optimization,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Welfare exponent: 1, 0, a rational below 1, or -inf
    #[arg(long, allow_hyphen_values = true)]
    p: PExponent,
    #[arg(long, default_value = "efx")]
    notion: FairnessNotion,
    #[arg(long, value_enum, default_value_t = Mode::Within)]
    mode: Mode,
    /// Write the allocation document here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    instance: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    p: PExponent,
    #[arg(long, default_value = "efx")]
    notion: FairnessNotion,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
}

#[derive(Args)]
struct GeneratorParams {
    #[arg(long, default_value = "1/1000", value_parser = parse_rational)]
    eps: Rational,
    /// Largest value drawn by the random family
    #[arg(long, default_value_t = 9)]
    max_value: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw every value positive
    #[arg(long)]
    nmu: bool,
    /// Probability that a random value is zero
    #[arg(long, default_value = "1/3", value_parser = parse_rational)]
    zero_density: Rational,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[command(flatten)]
    params: GeneratorParams,
    /// Partition weights for the gadget
    #[arg(long, value_delimiter = ',')]
    weights: Vec<u64>,
    /// Gadget exponent in (0, 1]
    #[arg(long, default_value = "1")]
    p: PExponent,
    #[arg(long)]
    lambda: Option<u64>,
    #[arg(long, value_enum, default_value_t = Variant::Compatibility)]
    variant: Variant,
    /// Indices of one half of an equal split, to emit the fair witness
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<usize>>,
    /// Write the gadget witness allocation here
    #[arg(long, requires = "split")]
    witness: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2, 3])]
    c: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values = ["0", "-1", "-2"])]
    p: Vec<PExponent>,
    #[arg(long = "eps-list", value_delimiter = ',', default_values = ["1/1000"], value_parser = parse_rational)]
    eps_list: Vec<Rational>,
    #[arg(long, default_value = "efx")]
    notion: FairnessNotion,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    /// Random instances per (n, c)
    #[arg(long, default_value_t = 3)]
    count: u64,
    #[command(flatten)]
    params: GeneratorParams,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append rows to an existing output file instead of replacing it
    #[arg(long, requires = "out")]
    append: bool,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "fair_po")]
    p: Option<PExponent>,
    #[arg(long, default_value = "all")]
    filter: Filter,
    /// Look for an allocation that is fair and Pareto-optimal instead
    #[arg(long)]
    fair_po: bool,
    #[arg(long, default_value = "efx")]
    notion: FairnessNotion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Positive,
    Negative,
}

/// A decision that could not be reached within the configured limits.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct LimitReached(String);

struct Settings {
    format: Option<Format>,
    exact: bool,
    config: SolverConfig,
}

impl Settings {
    fn opts(&self) -> &WelfareOptions {
        &self.config.welfare
    }

    fn budget(&self) -> u64 {
        self.config.oracle_budget
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    }
    let settings = Settings {
        format: cli.format,
        exact: cli.exact,
        config: SolverConfig {
            welfare: WelfareOptions { max_precision_bits: cli.precision_bits, ..Default::default() },
            oracle_budget: cli.budget,
            ..Default::default()
        },
    };
    match run(cli.command, &settings) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if exhausted(&err) { 3 } else { 2 })
        }
    }
}

fn exhausted(err: &anyhow::Error) -> bool {
    let precision = |e: &WelfareError| matches!(e, WelfareError::Precision(RadicalError::PrecisionExhausted { .. }));
    let oracle = |e: &OracleError| match e {
        OracleError::BudgetExceeded { .. } => true,
        OracleError::Welfare(w) => precision(w),
    };
    err.chain().any(|e| {
        if let Some(e) = e.downcast_ref::<SolverError>() {
            return match e {
                SolverError::Hardness { .. } => true,
                SolverError::Oracle(o) => oracle(o),
                SolverError::Welfare(w) => precision(w),
                _ => false,
            };
        }
        if let Some(e) = e.downcast_ref::<OracleError>() {
            return oracle(e);
        }
        if let Some(e) = e.downcast_ref::<WelfareError>() {
            return precision(e);
        }
        matches!(e.downcast_ref::<RadicalError>(), Some(RadicalError::PrecisionExhausted { .. }))
            || e.downcast_ref::<LimitReached>().is_some()
    })
}

fn run(command: Command, settings: &Settings) -> Result<Outcome> {
    let format = settings.format.unwrap_or(Format::Human);
    let (report, outcome) = match command {
        Command::Check { instance, allocation, notion } => check(&instance, &allocation, notion)?,
        Command::Solve(args) => solve(&args, settings)?,
        Command::Price(args) => price(&args, settings)?,
        Command::Oracle(args) => oracle(&args, settings)?,
        Command::Generate(args) => return generate(&args),
        Command::Sweep(args) => return sweep(&args, settings),
    };
    report.write(format, io::stdout().lock())?;
    Ok(outcome)
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn load(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading instance {}", path.display()))
}

fn allocation_json(inst: &Instance, alloc: &Allocation) -> Value {
    serde_json::from_str(&serialize_allocation(inst, alloc)).expect("serialized allocations are valid JSON")
}

fn welfare_decimal(inst: &Instance, alloc: &Allocation, p: &PExponent) -> String {
    pmean_decimal(&utilities(inst, alloc), p, DIGITS)
}

fn witness_fields(inst: &Instance, w: &EnvyWitness) -> [String; 5] {
    [
        inst.agents()[w.envier].clone(),
        inst.agents()[w.envied].clone(),
        w.dropped_good.map_or_else(String::new, |g| inst.goods()[g].clone()),
        format_rational(&w.lhs),
        format_rational(&w.rhs),
    ]
}

fn check(inst_path: &Path, alloc_path: &Path, notion: FairnessNotion) -> Result<(Report, Outcome)> {
    let inst = load(inst_path)?;
    let alloc =
        read_allocation(&inst, alloc_path).with_context(|| format!("reading allocation {}", alloc_path.display()))?;
    let id = instance_id(inst_path);
    let header = ["format_version", "instance", "notion", "fair", "envier", "envied", "dropped_good", "lhs", "rhs"];
    let mut row = vec![FORMAT_VERSION.to_string(), id.clone(), notion.to_string()];
    Ok(match is_fair(&inst, &alloc, notion) {
        Ok(()) => {
            row.push("true".into());
            row.extend(std::iter::repeat_n(String::new(), 5));
            let human = format!("{} is {notion}\n", alloc.display(&inst));
            let json = json!({ "instance": id, "notion": notion.name(), "fair": true, "witness": null });
            (Report::new(human, &header, vec![row], json), Outcome::Positive)
        }
        Err(w) => {
            let [envier, envied, dropped, lhs, rhs] = witness_fields(&inst, &w);
            row.push("false".into());
            row.extend([envier.clone(), envied.clone(), dropped.clone(), lhs.clone(), rhs.clone()]);
            let human = format!("not {notion}: {}\n", w.describe(&inst));
            let json = json!({
                "instance": id,
                "notion": notion.name(),
                "fair": false,
                "witness": { "envier": envier, "envied": envied, "dropped_good": dropped, "lhs": lhs, "rhs": rhs },
            });
            (Report::new(human, &header, vec![row], json), Outcome::Negative)
        }
    })
}

fn solve(args: &SolveArgs, settings: &Settings) -> Result<(Report, Outcome)> {
    let inst = load(&args.instance)?;
    let (p, notion, config) = (&args.p, args.notion, &settings.config);
    let id = instance_id(&args.instance);
    let header = ["format_version", "instance", "p", "notion", "mode", "status", "key", "welfare", "allocation"];
    let result: SolverResult = match args.mode {
        Mode::Compat => return compat(&inst, args, settings),
        Mode::Within => optimize_within_fair(&inst, p, notion, config)?,
        Mode::Global => global_optimum(&inst, p, config)?,
        Mode::Nmu => solve_nmu(&inst, p, notion, config)?,
    };
    let mode = args.mode.to_possible_value().expect("no skipped modes").get_name().to_string();
    let key = result.key.to_string();
    let mut human = format!("status: {}\n", result.status.name());
    let (welfare, shown, alloc_json) = match &result.allocation {
        Some(alloc) => {
            if let Some(out) = &args.out {
                write_text(out, &serialize_allocation(&inst, alloc))?;
            }
            human += &format!("allocation: {}\n", alloc.display(&inst));
            (welfare_decimal(&inst, alloc, p), alloc.display(&inst).to_string(), allocation_json(&inst, alloc))
        }
        None => ("0".to_string(), String::new(), Value::Null),
    };
    human += &format!("key: {key}\nwelfare: {welfare}\n");
    if let Some(note) = &result.note {
        human += &format!("note: {note}\n");
    }
    let row = vec![
        FORMAT_VERSION.to_string(),
        id.clone(),
        p.to_string(),
        notion.to_string(),
        mode.clone(),
        result.status.name().to_string(),
        key.clone(),
        welfare.clone(),
        shown,
    ];
    let json = json!({
        "instance": id,
        "p": p.to_string(),
        "notion": notion.name(),
        "mode": mode,
        "status": result.status.name(),
        "key": key,
        "welfare": welfare,
        "allocation": alloc_json,
        "note": result.note,
    });
    let outcome = if result.allocation.is_some() { Outcome::Positive } else { Outcome::Negative };
    Ok((Report::new(human, &header, vec![row], json), outcome))
}

fn compat(inst: &Instance, args: &SolveArgs, settings: &Settings) -> Result<(Report, Outcome)> {
    let (p, notion) = (&args.p, args.notion);
    let id = instance_id(&args.instance);
    let header = ["format_version", "instance", "p", "notion", "compatible", "opt_key", "fair_key"];
    let (answer, opt_key, fair_key, alloc) = match decide_compatibility(inst, p, notion, &settings.config)? {
        Compatibility::Yes { allocation, key } => ("yes", key.to_string(), key.to_string(), Some(allocation)),
        Compatibility::No { opt_key, fair_key } => ("no", opt_key.to_string(), fair_key.to_string(), None),
        Compatibility::Unknown { note } => return Err(LimitReached(note).into()),
    };
    let mut human = format!("{answer}: optimum {opt_key}, best {notion} {fair_key}\n");
    if let Some(alloc) = &alloc {
        human += &format!("allocation: {}\n", alloc.display(inst));
        if let Some(out) = &args.out {
            write_text(out, &serialize_allocation(inst, alloc))?;
        }
    }
    let row = vec![
        FORMAT_VERSION.to_string(),
        id.clone(),
        p.to_string(),
        notion.to_string(),
        answer.to_string(),
        opt_key.clone(),
        fair_key.clone(),
    ];
    let json = json!({
        "instance": id,
        "p": p.to_string(),
        "notion": notion.name(),
        "compatible": answer == "yes",
        "opt_key": opt_key,
        "fair_key": fair_key,
        "allocation": alloc.as_ref().map(|a| allocation_json(inst, a)),
    });
    let outcome = if answer == "yes" { Outcome::Positive } else { Outcome::Negative };
    Ok((Report::new(human, &header, vec![row], json), outcome))
}

fn price_report(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    engine: Engine,
    s: &Settings,
) -> Result<PriceReport> {
    let use_oracle = match engine {
        Engine::Auto => p.is_positive(),
        Engine::Oracle => true,
        Engine::Solver if p.is_positive() => bail!("the solver engine requires p <= 0; use --engine oracle"),
        Engine::Solver => false,
    };
    if use_oracle {
        return Ok(price_of_fairness(inst, p, notion, s.opts(), s.budget())?);
    }
    let opt = global_optimum(inst, p, &s.config)?;
    let fair = optimize_within_fair(inst, p, notion, &s.config)?;
    let opt_alloc = opt.allocation.context("the solver returned no global optimum")?;
    let opt = Optimum::from_allocation(inst, opt_alloc, opt.key);
    let fair = fair.allocation.map(|a| Optimum::from_allocation(inst, a, fair.key));
    Ok(PriceReport::new(p.clone(), notion, opt, fair))
}

fn price_row(id: &str, inst: &Instance, report: &PriceReport, exact: bool) -> Vec<String> {
    let (opt, fair) = if exact {
        (report.opt.key.to_string(), report.fair_key().to_string())
    } else {
        let fair =
            report.fair.as_ref().map_or_else(|| "0".to_string(), |f| pmean_decimal(&f.profile, &report.p, DIGITS));
        (pmean_decimal(&report.opt.profile, &report.p, DIGITS), fair)
    };
    vec![
        FORMAT_VERSION.to_string(),
        id.to_string(),
        inst.n().to_string(),
        inst.m().to_string(),
        inst.surplus().to_string(),
        report.p.to_string(),
        report.notion.to_string(),
        opt,
        fair,
        report.ratio.name().to_string(),
        report.ratio_decimal(DIGITS),
    ]
}

fn row_json(row: &[String]) -> Value {
    let field = |k: &str, v: &String| match k {
        "format_version" | "n" | "m" | "c" => v.parse::<i64>().map_or_else(|_| json!(v), |x| json!(x)),
        _ => json!(v),
    };
    Value::Object(PRICE_HEADER.iter().zip(row).map(|(k, v)| (k.to_string(), field(k, v))).collect())
}

fn price(args: &PriceArgs, settings: &Settings) -> Result<(Report, Outcome)> {
    let inst = load(&args.instance)?;
    let id = instance_id(&args.instance);
    let report = price_report(&inst, &args.p, args.notion, args.engine, settings)?;
    let row = price_row(&id, &inst, &report, settings.exact);
    let mut human = format!("instance: {id} (n = {}, m = {}, c = {})\n", inst.n(), inst.m(), inst.surplus());
    human += &format!("optimum: {} [key {}]\n", row[7], report.opt.key);
    let fair = report.fair.as_ref().map_or_else(|| "none".to_string(), |f| f.allocation.display(&inst).to_string());
    human += &format!("best {}: {} [key {}] {fair}\n", args.notion, row[8], report.fair_key());
    human += &format!("ratio: {} ({})\n", row[10], row[9]);
    let json = row_json(&row);
    Ok((Report::new(human, &PRICE_HEADER, vec![row], json), Outcome::Positive))
}

fn oracle(args: &OracleArgs, settings: &Settings) -> Result<(Report, Outcome)> {
    let inst = load(&args.instance)?;
    let id = instance_id(&args.instance);
    if args.fair_po {
        let notion = args.notion;
        let header = ["format_version", "instance", "notion", "fair_po", "allocation"];
        let found = exists_fair_po(&inst, notion, settings.budget())?;
        let shown = found.as_ref().map_or_else(String::new, |a| a.display(&inst).to_string());
        let human = match &found {
            Some(a) => format!("{notion} and Pareto-optimal: {}\n", a.display(&inst)),
            None => format!("no {notion} allocation is Pareto-optimal\n"),
        };
        let row = vec![FORMAT_VERSION.to_string(), id.clone(), notion.to_string(), found.is_some().to_string(), shown];
        let json = json!({
            "instance": id,
            "notion": notion.name(),
            "fair_po": found.is_some(),
            "allocation": found.as_ref().map(|a| allocation_json(&inst, a)),
        });
        let outcome = if found.is_some() { Outcome::Positive } else { Outcome::Negative };
        return Ok((Report::new(human, &header, vec![row], json), outcome));
    }
    let p = args.p.as_ref().expect("clap requires --p without --fair-po");
    let table = AllocationTable::build(&inst, settings.budget())?;
    let passing = table.indices(args.filter).count();
    let result = table.brute_opt(p, args.filter, settings.opts())?;
    let key = result.key.to_string();
    let welfare = result.allocation.as_ref().map_or_else(|| "0".to_string(), |a| welfare_decimal(&inst, a, p));
    let shown = result.allocation.as_ref().map_or_else(String::new, |a| a.display(&inst).to_string());
    let mut human = format!("{} allocations, {passing} pass {}\n", table.len(), args.filter);
    if let Some(a) = &result.allocation {
        human += &format!("best: {}\nkey: {key}\nwelfare: {welfare}\n", a.display(&inst));
    }
    let header =
        ["format_version", "instance", "p", "filter", "allocations", "passing", "key", "welfare", "allocation"];
    let row = vec![
        FORMAT_VERSION.to_string(),
        id.clone(),
        p.to_string(),
        args.filter.to_string(),
        table.len().to_string(),
        passing.to_string(),
        key.clone(),
        welfare.clone(),
        shown,
    ];
    let json = json!({
        "instance": id,
        "p": p.to_string(),
        "filter": args.filter.to_string(),
        "allocations": table.len(),
        "passing": passing,
        "key": key,
        "welfare": welfare,
        "allocation": result.allocation.as_ref().map(|a| allocation_json(&inst, a)),
    });
    let outcome = if passing > 0 { Outcome::Positive } else { Outcome::Negative };
    Ok((Report::new(human, &header, vec![row], json), outcome))
}

fn required(value: Option<usize>, flag: &str, family: Family) -> Result<usize> {
    value.with_context(|| format!("--{flag} is required for the {family:?} family"))
}

fn generate(args: &GenerateArgs) -> Result<Outcome> {
    let params = &args.params;
    let inst = match args.family {
        Family::ExampleCompat => gen_example_compat(),
        Family::Hoarding => {
            let (n, c) = (required(args.n, "n", args.family)?, required(args.c, "c", args.family)?);
            gen_hoarding_family(n, c as i64, &params.eps)?
        }
        Family::PrivateShared => {
            let (n, c) = (required(args.n, "n", args.family)?, required(args.c, "c", args.family)?);
            gen_private_shared_family(n, c, &params.eps)?
        }
        Family::Random => {
            let (n, c) = (required(args.n, "n", args.family)?, required(args.c, "c", args.family)?);
            gen_random(n, c as i64, params.max_value, params.seed, params.nmu, &params.zero_density)?
        }
        Family::PartitionGadget => {
            let spec = PartitionGadgetSpec {
                weights: args.weights.clone(),
                c: args.c.unwrap_or(0),
                p: args.p.clone(),
                lambda: args.lambda,
            };
            let variant = match args.variant {
                Variant::Compatibility => GadgetVariant::Compatibility,
                Variant::Optimization => GadgetVariant::Optimization,
            };
            let gadget = gen_partition_gadget(&spec, variant, args.split.as_deref())?;
            eprintln!("lambda = {}, doubled weights sum to {}", gadget.lambda, gadget.total);
            if let (Some(path), Some(witness)) = (&args.witness, &gadget.witness) {
                write_text(path, &serialize_allocation(&gadget.instance, witness))?;
            }
            gadget.instance
        }
    };
    let text = serialize_instance(&inst);
    match &args.out {
        Some(path) => write_text(path, &text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(Outcome::Positive)
}

fn sweep_instances(args: &SweepArgs) -> Result<Vec<(String, Instance)>> {
    let params = &args.params;
    let mut out = Vec::new();
    if args.family == Family::ExampleCompat {
        out.push(("example-compat".to_string(), gen_example_compat()));
        return Ok(out);
    }
    for &n in &args.n {
        for &c in &args.c {
            match args.family {
                Family::Random => {
                    for t in 0..args.count {
                        let seed = params.seed.wrapping_add(t);
                        let inst = gen_random(n, c as i64, params.max_value, seed, params.nmu, &params.zero_density)?;
                        out.push((format!("random-n{n}-c{c}-s{seed}"), inst));
                    }
                }
                Family::Hoarding | Family::PrivateShared => {
                    for eps in &args.eps_list {
                        let inst = if args.family == Family::Hoarding {
                            gen_hoarding_family(n, c as i64, eps)?
                        } else {
                            gen_private_shared_family(n, c, eps)?
                        };
                        let name = if args.family == Family::Hoarding { "hoarding" } else { "private-shared" };
                        out.push((format!("{name}-n{n}-c{c}-eps{}", format_rational(eps)), inst));
                    }
                }
                _ => bail!("the partition gadget has no sweep grid"),
            }
        }
    }
    Ok(out)
}

fn sweep(args: &SweepArgs, settings: &Settings) -> Result<Outcome> {
    let mut rows = Vec::new();
    for (id, inst) in sweep_instances(args)? {
        for p in &args.p {
            let report = price_report(&inst, p, args.notion, args.engine, settings)
                .with_context(|| format!("instance {id}, p = {p}"))?;
            rows.push(price_row(&id, &inst, &report, settings.exact));
        }
    }
    let header: Vec<String> = PRICE_HEADER.iter().map(|s| s.to_string()).collect();
    let format = settings.format.unwrap_or(Format::Csv);
    let mut buffer = Vec::new();
    match format {
        Format::Json => {
            let list: Vec<Value> = rows.iter().map(|r| row_json(r)).collect();
            writeln!(buffer, "{}", serde_json::to_string_pretty(&list)?)?;
        }
        Format::Csv | Format::Human => {
            let appending = args.append && args.out.as_ref().is_some_and(|p| p.exists());
            if appending {
                write_csv(&[], &rows, &mut buffer)?;
            } else {
                write_csv(&header, &rows, &mut buffer)?;
            }
        }
    }
    match &args.out {
        Some(path) => {
            let mut file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(args.append)
                .truncate(!args.append)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            file.write_all(&buffer)?;
        }
        None => io::stdout().lock().write_all(&buffer)?,
    }
    Ok(Outcome::Positive)
}
