use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dgoim::conformance::{run_all, Config};
use dgoim::corpus::{gen_corpus, standard_corpus, Family};
use dgoim::cost::{dgoim_check_bounds, efficiency_fit, CostReport, FamilyPoint, StatsRecord};
use dgoim::dgoim::{dgoim_run_with, DgoimRun, MachineState, Observer, RunOptions, StepInfo};
use dgoim::sam::{sam_check_bounds, sam_run, SamRun};
use dgoim::sim::{lockstep, related, SyncReport};
use dgoim::term::{is_closed_well_named, rename_fresh, size, NameSupply};
use dgoim::{parse, Term};

const EXIT_INVALID: u8 = 2;
const EXIT_FUEL: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;
const EXIT_BOUNDS: u8 = 5;

#[derive(Parser)]
#[command(
    name = "dgoim",
    version,
    about = "Call-by-need evaluation with a token-passing graph machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed term and print one JSON stats record per machine.
    Eval(EvalArgs),
    /// Evaluate and export a step-by-step trace.
    Trace(TraceArgs),
    /// Run a program family and fit the cost model.
    Bench(BenchArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
    /// Print a generated corpus, one term per line.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Machine {
    Sam,
    Dgoim,
    Both,
    Lockstep,
}

#[derive(Args)]
struct Input {
    /// Term source, e.g. "(\x. x) (\z. z)".
    #[arg(required_unless_present = "file")]
    term: Option<String>,
    /// Read the term from a file instead.
    #[arg(long, short, conflicts_with = "term")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "both")]
    machine: Machine,
    /// Step limit. For the graph machine, the limit on transitions.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
    #[arg(long)]
    stop_at_first_divergence: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    eval: EvalArgs,
    /// Output directory for `trace.jsonl` and DOT frames.
    #[arg(long)]
    trace_out: PathBuf,
    /// Write a DOT frame every N graph-machine transitions (0 disables).
    #[arg(long, default_value_t = 0)]
    dot_every: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    ChurchApp,
    ChurchCompose,
    Random,
    Ski,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "church-app")]
    family: FamilyName,
    /// Parameter range `FROM..TO` (inclusive): numeral, maximum size or count.
    #[arg(long, default_value = "2..16", value_parser = parse_range)]
    n: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Print only this family instead of the standard corpus.
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long, default_value = "4..40", value_parser = parse_range)]
    n: (usize, usize),
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected FROM..TO")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = b
        .trim_start_matches('=')
        .trim()
        .parse()
        .map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// Invalid input: reported with exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Parse and rename bound variables apart so that terms like
/// `(\x. x x)(\x. x x)` are accepted.
fn read_term(input: &Input) -> Result<Term> {
    let src = match (&input.term, &input.file) {
        (_, Some(path)) => {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        (Some(s), None) => s.clone(),
        (None, None) => bail!(Invalid("no term given".into())),
    };
    let t = parse(&src).map_err(|e| Invalid(e.to_string()))?;
    let t = if is_closed_well_named(&t) {
        t
    } else {
        rename_fresh(&t, &mut NameSupply::above(&t))
    };
    if !is_closed_well_named(&t) {
        bail!(Invalid("term is not closed".into()));
    }
    Ok(t)
}

/// Worst outcome seen so far, as an exit code.
#[derive(Default)]
struct Status(u8);

impl Status {
    fn raise(&mut self, code: u8) {
        let rank = |c: u8| match c {
            EXIT_DIVERGENCE => 3,
            EXIT_FUEL => 2,
            EXIT_BOUNDS => 1,
            _ => 0,
        };
        if rank(code) > rank(self.0) {
            self.0 = code;
        }
    }
}

fn sam_record(run: &SamRun, n: usize, related: Option<bool>) -> StatsRecord {
    StatsRecord {
        term_size: n,
        machine: "sam".into(),
        b: run.stats.b,
        s: run.stats.s,
        o: run.stats.o,
        total: run.stats.total(),
        cost_total: run.stats.total(),
        halted: run.outcome.halted(),
        related,
    }
}

fn dgoim_record(run: &DgoimRun, n: usize, related: Option<bool>) -> StatsRecord {
    StatsRecord {
        term_size: n,
        machine: "dgoim".into(),
        b: run.stats.b,
        s: run.stats.s,
        o: run.stats.o,
        total: run.stats.total(),
        cost_total: CostReport::from_run(run, n).total,
        halted: run.outcome.halted(),
        related,
    }
}

fn emit(out: &mut impl std::io::Write, record: &StatsRecord) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(record)?)?;
    Ok(())
}

fn run_sam(t: &Term, fuel: usize, keep_trace: bool, status: &mut Status) -> Result<SamRun> {
    let run = sam_run(t, fuel, keep_trace).map_err(|e| Invalid(e.to_string()))?;
    if !run.outcome.halted() {
        status.raise(EXIT_FUEL);
    }
    if !sam_check_bounds(&run.stats, size(t)) {
        status.raise(EXIT_BOUNDS);
    }
    Ok(run)
}

fn run_dgoim(
    t: &Term,
    fuel: usize,
    keep_trace: bool,
    observer: Option<Observer<'_>>,
    status: &mut Status,
) -> Result<DgoimRun> {
    let opts = RunOptions {
        fuel,
        keep_trace,
        names: NameSupply::new(),
        observer,
    };
    let run = dgoim_run_with(t, opts).map_err(|e| Invalid(e.to_string()))?;
    if !run.outcome.halted() {
        status.raise(EXIT_FUEL);
    }
    if !dgoim_check_bounds(&run.stats, size(t)) {
        status.raise(EXIT_BOUNDS);
    }
    Ok(run)
}

fn run_lockstep(t: &Term, args: &EvalArgs, status: &mut Status) -> Result<SyncReport> {
    let report = lockstep(t, args.fuel as usize, args.stop_at_first_divergence)
        .map_err(|e| Invalid(e.to_string()))?;
    if !report.passed() {
        status.raise(EXIT_DIVERGENCE);
    } else if !report.sam_halted {
        status.raise(EXIT_FUEL);
    }
    Ok(report)
}

fn eval(args: &EvalArgs) -> Result<u8> {
    let t = read_term(&args.input)?;
    let n = size(&t);
    let fuel = args.fuel as usize;
    let mut status = Status::default();
    let mut out = std::io::stdout().lock();
    match args.machine {
        Machine::Sam => {
            let run = run_sam(&t, fuel, false, &mut status)?;
            eprintln!("result: {}", run.outcome.configuration());
            emit(&mut out, &sam_record(&run, n, None))?;
        }
        Machine::Dgoim => {
            let run = run_dgoim(&t, fuel, false, None, &mut status)?;
            let s = run.outcome.state();
            eprintln!(
                "result: {} nodes, token at {:?}",
                s.graph.node_count(),
                s.position
            );
            emit(&mut out, &dgoim_record(&run, n, None))?;
        }
        Machine::Both => {
            let sam = run_sam(&t, fuel, false, &mut status)?;
            let dg = run_dgoim(
                &t,
                fuel.saturating_mul(4).saturating_add(16),
                false,
                None,
                &mut status,
            )?;
            let ok = sam.outcome.halted()
                && dg.outcome.halted()
                && related(sam.outcome.configuration(), dg.outcome.state());
            if sam.outcome.halted() && !ok {
                status.raise(EXIT_DIVERGENCE);
            }
            eprintln!("result: {}", sam.outcome.configuration());
            eprintln!("endpoints related: {ok}");
            emit(&mut out, &sam_record(&sam, n, Some(ok)))?;
            emit(&mut out, &dgoim_record(&dg, n, Some(ok)))?;
        }
        Machine::Lockstep => {
            let report = run_lockstep(&t, args, &mut status)?;
            eprintln!("verdict: {}", serde_json::to_string(&report.verdict)?);
            let record = StatsRecord {
                term_size: n,
                machine: "lockstep".into(),
                b: report
                    .per_sam_step
                    .iter()
                    .map(|s| s.labels.matches('b').count())
                    .sum(),
                s: report
                    .per_sam_step
                    .iter()
                    .map(|s| s.labels.matches('s').count())
                    .sum(),
                o: report
                    .per_sam_step
                    .iter()
                    .map(|s| s.labels.matches('o').count())
                    .sum(),
                total: report.dgoim_steps,
                cost_total: report.dgoim_steps,
                halted: report.sam_halted,
                related: Some(report.passed()),
            };
            emit(&mut out, &record)?;
        }
    }
    Ok(status.0)
}

fn write_dot(dir: &Path, index: usize, s: &MachineState) -> std::io::Result<()> {
    let dot = s.graph.to_dot(Some((s.position.edge, s.position.dir)));
    fs::write(dir.join(format!("frame-{index:06}.dot")), dot)
}

fn trace(args: &TraceArgs) -> Result<u8> {
    let eval = &args.eval;
    let t = read_term(&eval.input)?;
    let n = size(&t);
    let fuel = eval.fuel as usize;
    fs::create_dir_all(&args.trace_out)
        .with_context(|| format!("creating {}", args.trace_out.display()))?;
    let mut lines = std::io::BufWriter::new(fs::File::create(args.trace_out.join("trace.jsonl"))?);
    let mut status = Status::default();
    let mut records = Vec::new();

    if matches!(eval.machine, Machine::Sam | Machine::Both) {
        let run = run_sam(&t, fuel, true, &mut status)?;
        for (i, step) in run.trace.iter().enumerate() {
            let line = json!({
                "machine": "sam", "index": i, "rule": step.rule.to_string(),
                "label": step.label, "term": step.before.plugged().to_string(),
            });
            writeln!(lines, "{line}")?;
        }
        records.push(sam_record(&run, n, None));
    }
    if matches!(eval.machine, Machine::Dgoim | Machine::Both) {
        let dir = args.trace_out.clone();
        let every = args.dot_every;
        let mut io_error = None;
        let mut observer = |i: usize, s: &MachineState, _: &StepInfo| {
            if every > 0 && (i + 1).is_multiple_of(every) && io_error.is_none() {
                io_error = write_dot(&dir, i + 1, s).err();
            }
        };
        if every > 0 {
            let s0 = dgoim::dgoim::initial_state(&t, NameSupply::new());
            write_dot(&dir, 0, &s0)?;
        }
        let dfuel = if eval.machine == Machine::Both {
            fuel.saturating_mul(4).saturating_add(16)
        } else {
            fuel
        };
        let run = run_dgoim(&t, dfuel, true, Some(&mut observer), &mut status)?;
        if let Some(e) = io_error {
            return Err(e).context("writing DOT frames");
        }
        let costs = CostReport::from_run(&run, n).per_transition_costs;
        for (frame, cost) in run.trace.iter().zip(costs) {
            let mut line = serde_json::to_value(frame)?;
            line["machine"] = json!("dgoim");
            line["cost"] = json!(cost);
            writeln!(lines, "{line}")?;
        }
        records.push(dgoim_record(&run, n, None));
    }
    if eval.machine == Machine::Lockstep {
        let report = run_lockstep(&t, eval, &mut status)?;
        for (i, step) in report.per_sam_step.iter().enumerate() {
            let mut line = serde_json::to_value(step)?;
            line["machine"] = json!("lockstep");
            line["index"] = json!(i);
            writeln!(lines, "{line}")?;
        }
        writeln!(lines, "{}", serde_json::to_string(&report.verdict)?)?;
    }
    lines.flush()?;
    let mut out = std::io::stdout().lock();
    for r in &records {
        emit(&mut out, r)?;
    }
    Ok(status.0)
}

fn family_terms(family: FamilyName, (from, to): (usize, usize), seed: u64) -> Vec<Term> {
    let f = match family {
        FamilyName::ChurchApp => Family::ChurchApp { from, to },
        FamilyName::ChurchCompose => Family::ChurchCompose { max: to },
        FamilyName::Random => Family::Random {
            count: 100,
            min_size: from.max(2),
            max_size: to.max(2),
        },
        FamilyName::Ski => Family::Ski {
            count: 100,
            max_leaves: to.max(2),
        },
    };
    gen_corpus(&f, seed)
}

fn bench(args: &BenchArgs) -> Result<u8> {
    let mut status = Status::default();
    let mut points = Vec::new();
    let mut out = std::io::stdout().lock();
    for t in family_terms(args.family, args.n, args.seed) {
        let n = size(&t);
        let run = run_dgoim(&t, args.fuel as usize, false, None, &mut status)?;
        let record = dgoim_record(&run, n, None);
        emit(&mut out, &record)?;
        points.push(FamilyPoint {
            input_size: n,
            stats: run.stats,
            total_cost: record.cost_total,
        });
    }
    match efficiency_fit(&points) {
        Ok(fit) => {
            let summary = json!({
                "fit": { "c": fit.c, "d": fit.d, "spread": fit.spread, "min_ratio": fit.min_ratio,
                         "max_ratio": fit.max_ratio, "degenerate": fit.degenerate,
                         "flagged": fit.flagged.len() },
            });
            writeln!(out, "{summary}")?;
        }
        Err(e) => eprintln!("no fit: {e}"),
    }
    Ok(status.0)
}

fn check(args: &CheckArgs) -> Result<u8> {
    let cfg = Config {
        seed: args.seed,
        ..Config::default()
    };
    let results = run_all(&cfg, |r| println!("{r}"));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    Ok(if failed.is_empty() {
        0
    } else if failed.iter().all(|id| matches!(id, 4 | 5)) {
        EXIT_BOUNDS
    } else {
        EXIT_DIVERGENCE
    })
}

fn corpus(args: &CorpusArgs) -> Result<u8> {
    let terms = match args.family {
        Some(f) => family_terms(f, args.n, args.seed),
        None => standard_corpus(args.seed),
    };
    let mut out = std::io::stdout().lock();
    for t in terms {
        writeln!(out, "{t}")?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Trace(a) => trace(a),
        Command::Bench(a) => bench(a),
        Command::Check(a) => check(a),
        Command::Corpus(a) => corpus(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
