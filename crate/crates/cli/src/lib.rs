//! Command-line front end: one subcommand per pipeline step.
//!
//! Exit codes: 0 on success, 1 when verification finds a counterexample
//! (a witness, an assertion violation or a deadlock), 2 on usage, parse
//! and I/O errors.

pub mod config;
pub mod repair;

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tailcheck::discovery::{discover, LabeledSample};
use tailcheck::eventlog::{
    extract_traces, filter_traces, parse_csv, summarize, write_traces, Abbreviations, EventLog,
    FilterPolicy,
};
use tailcheck::ltl::{
    parse_ltl, read_trail, replay, verify, write_trail, LtlFormula, Property, Verdict,
    VerifyOptions,
};
use tailcheck::sim::{
    self, generate_examples, generate_traces, normalize_external_trace, simulate_interactive,
    simulate_random, Classification, SimulationRun, VarSnapshot,
};
use tailcheck::vmodel::{compile_with, emit_promela, Marker, VerificationModel};
use tailcheck::ProcessModel;

use config::WorkbenchConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tailcheck",
    version,
    about = "Process discovery, simulation and model checking"
)]
pub struct Cli {
    /// Workbench configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Event, case, activity and resource counts of a CSV log.
    Summarize(SummarizeArgs),
    /// Extract one trace per case.
    Traces(TracesArgs),
    /// Learn a process model with k-tails.
    Discover(DiscoverArgs),
    /// Compile a model to Promela.
    Transform(TransformArgs),
    /// Random or interactive simulation.
    Simulate(SimulateArgs),
    /// Collect positive or negative example runs.
    Examples(ExamplesArgs),
    /// Check an LTL property, an assertion or deadlock freedom.
    Verify(VerifyArgs),
    /// Trace statistics for generated or recorded runs.
    Stats(StatsArgs),
    /// Feed classified runs back into discovery.
    RepairLoop(RepairArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AbbrevMode {
    /// Activity names with spaces removed.
    Labels,
    /// Short names (Newres, ChIn, ...).
    Short,
    /// Raw activity names.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Positive,
    Negative,
}

impl From<KindArg> for Classification {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Positive => Classification::Positive,
            KindArg::Negative => Classification::Negative,
        }
    }
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TracesArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to `labels`, or to the config's abbreviation table.
    #[arg(long, value_enum)]
    pub abbrev: Option<AbbrevMode>,
    /// Drop traces whose variant occurs fewer times than this.
    #[arg(long, default_value_t = 0)]
    pub min_frequency: usize,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// CSV event log; every extracted trace is a positive example.
    #[arg(long, group = "input")]
    pub log: Option<PathBuf>,
    /// Trace file, one positive trace per line.
    #[arg(long, group = "input")]
    pub traces: Option<PathBuf>,
    /// Labeled sample (`#negative` section for negatives).
    #[arg(long, group = "input")]
    pub sample: Option<PathBuf>,
    /// Extra negative traces, one per line.
    #[arg(long)]
    pub negatives: Option<PathBuf>,
    #[arg(long)]
    pub abbrev: Option<AbbrevMode>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write JSON instead of DOT.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub dot: PathBuf,
    #[arg(long)]
    pub pml: Option<PathBuf>,
    /// Claim to append; defaults to `<> end_state == 1`.
    #[arg(long)]
    pub ltl: Option<String>,
    /// Add one counter per event label.
    #[arg(long)]
    pub instrument: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Choose each step from a numbered list read from standard input.
    #[arg(long, conflicts_with = "batch")]
    pub interactive: bool,
    /// Number of runs, with seeds seed, seed+1, ...
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "positive")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_attempts: usize,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("property").args(["ltl", "assert", "deadlock", "replay"]).required(true)))]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Search for a run satisfying this formula.
    #[arg(long)]
    pub ltl: Option<String>,
    /// Search for a reachable state violating this state formula.
    #[arg(long)]
    pub assert: Option<String>,
    /// Search for a reachable state without options.
    #[arg(long)]
    pub deadlock: bool,
    /// Replay a trail file instead of verifying.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Negate the formula first, so that a counterexample violates it.
    #[arg(long, requires = "ltl")]
    pub positive_property: bool,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub counter_cap: Option<u64>,
    /// Defaults to the model path with a `.trail` extension.
    #[arg(long)]
    pub trail: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").args(["model", "runs"]).required(true)))]
pub struct StatsArgs {
    /// Generate `--n` runs from this model.
    #[arg(long, requires = "n")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Recorded runs, one per line, with END/SINK markers.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub json: bool,
    /// Also write the generated runs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// The sample the model was learned from.
    #[arg(long)]
    pub sample: PathBuf,
    /// Classified runs in sample format; a line is cut at its first END
    /// marker and other markers are dropped.
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    /// Length bound for the language diff.
    #[arg(long, default_value_t = 8)]
    pub diff_len: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the augmented sample here.
    #[arg(long)]
    pub sample_out: Option<PathBuf>,
}

const DEFAULT_K: usize = 2;

/// Counterexample found (exit 1) rather than an error.
struct Found;

type Outcome = anyhow::Result<Option<Found>>;

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the CLI against the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let mut stdin = stdin.lock();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run_with_io(argv, &mut stdin, &mut stdout, &mut stderr)
}

/// Runs the CLI with explicit streams; `argv[0]` is the program name.
pub fn run_with_io<I, T>(
    argv: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    let result = WorkbenchConfig::load_opt(cli.config.as_deref())
        .and_then(|cfg| dispatch(&cli.command, &cfg, &mut io));
    match result {
        Ok(None) => EXIT_OK,
        Ok(Some(Found)) => EXIT_COUNTEREXAMPLE,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

impl WorkbenchConfig {
    fn load_opt(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

fn dispatch(cmd: &Command, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    match cmd {
        Command::Summarize(a) => cmd_summarize(a, cfg, io),
        Command::Traces(a) => cmd_traces(a, cfg, io),
        Command::Discover(a) => cmd_discover(a, cfg, io),
        Command::Transform(a) => cmd_transform(a, cfg, io),
        Command::Simulate(a) => cmd_simulate(a, cfg, io),
        Command::Examples(a) => cmd_examples(a, cfg, io),
        Command::Verify(a) => cmd_verify(a, cfg, io),
        Command::Stats(a) => cmd_stats(a, cfg, io),
        Command::RepairLoop(a) => cmd_repair(a, cfg, io),
    }
    .map_err(|e| {
        log::debug!("command failed: {e:?}");
        e
    })
}

/// Writes `contents` to a temporary file beside `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `out` if given, else to standard output.
fn emit(io: &mut Io, out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            writeln!(io.stderr, "wrote {}", p.display())?;
        }
        None => io.stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_log(path: &Path, cfg: &WorkbenchConfig) -> anyhow::Result<EventLog> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&bytes, &cfg.mapping()).with_context(|| format!("parsing {}", path.display()))
}

fn abbreviations(mode: Option<AbbrevMode>, cfg: &WorkbenchConfig) -> Option<Abbreviations> {
    match mode {
        Some(AbbrevMode::Labels) => Some(Abbreviations::hotel_labels()),
        Some(AbbrevMode::Short) => Some(Abbreviations::hotel_short()),
        Some(AbbrevMode::None) => None,
        None => Some(cfg.abbreviations()),
    }
}

/// Loads a model from DOT, or from JSON when the extension is `.json`.
pub fn load_model(path: &Path) -> anyhow::Result<ProcessModel> {
    let text = read(path)?;
    let model = if path.extension().is_some_and(|e| e == "json") {
        let json =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        ProcessModel::from_json(&json)?
    } else {
        ProcessModel::from_dot(&text)?
    };
    Ok(model)
}

fn load_vm(
    path: &Path,
    cfg: &WorkbenchConfig,
    instrument: bool,
) -> anyhow::Result<VerificationModel> {
    let model = load_model(path).with_context(|| format!("loading model {}", path.display()))?;
    Ok(compile_with(&model, instrument, &cfg.counter_naming()))
}

fn formula(text: &str) -> anyhow::Result<LtlFormula> {
    parse_ltl(text).map_err(|e| anyhow!("invalid formula `{text}`: {e}"))
}

fn runs_text(runs: &[SimulationRun]) -> String {
    let mut out = String::new();
    for r in runs {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

fn cmd_summarize(a: &SummarizeArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let s = summarize(&load_log(&a.log, cfg)?);
    if a.json {
        writeln!(io.stdout, "{}", serde_json::to_string_pretty(&s)?)?;
        return Ok(None);
    }
    writeln!(io.stdout, "events: {}", s.event_count)?;
    writeln!(io.stdout, "cases: {}", s.case_count)?;
    for (title, map) in [
        ("activities", &s.distinct_activities),
        ("resources", &s.distinct_resources),
    ] {
        writeln!(io.stdout, "{title}: {}", map.len())?;
        for (name, n) in map {
            writeln!(io.stdout, "  {name}: {n}")?;
        }
    }
    writeln!(io.stdout, "trace lengths:")?;
    for (len, n) in &s.trace_length_histogram {
        writeln!(io.stdout, "  {len}: {n}")?;
    }
    Ok(None)
}

fn cmd_traces(a: &TracesArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let log = load_log(&a.log, cfg)?;
    let abbrev = abbreviations(a.abbrev, cfg);
    let traces = extract_traces(&log, abbrev.as_ref());
    let policy = FilterPolicy {
        min_variant_frequency: a.min_frequency,
        variant_whitelist: None,
    };
    let kept = filter_traces(&traces, &policy);
    if kept.len() < traces.len() {
        writeln!(io.stderr, "kept {} of {} traces", kept.len(), traces.len())?;
    }
    emit(io, a.out.as_deref(), &write_traces(&kept))?;
    Ok(None)
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<Vec<String>>> {
    Ok(read(path)?
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect())
}

fn cmd_discover(a: &DiscoverArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let mut sample = if let Some(log) = &a.log {
        let traces = extract_traces(&load_log(log, cfg)?, abbreviations(a.abbrev, cfg).as_ref());
        LabeledSample::from_traces(&traces, &[])
    } else if let Some(t) = &a.traces {
        LabeledSample {
            positives: read_lines(t)?,
            negatives: Vec::new(),
        }
    } else if let Some(s) = &a.sample {
        LabeledSample::parse(&read(s)?).with_context(|| format!("parsing {}", s.display()))?
    } else {
        bail!("one of --log, --traces or --sample is required");
    };
    if let Some(n) = &a.negatives {
        sample.negatives.extend(read_lines(n)?);
    }
    let k = a.k.or(cfg.k).unwrap_or(DEFAULT_K);
    let model = discover(&sample, k)?;
    writeln!(
        io.stderr,
        "k={k}: {} states, {} transitions from {} positive and {} negative traces",
        model.state_count(),
        model.transition_count(),
        sample.positives.len(),
        sample.negatives.len()
    )?;
    let text = if a.json {
        serde_json::to_string_pretty(&model.to_json())? + "\n"
    } else {
        model.to_dot()
    };
    emit(io, a.out.as_deref(), &text)?;
    Ok(None)
}

fn cmd_transform(a: &TransformArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let vm = load_vm(&a.dot, cfg, a.instrument)?;
    let claim = a.ltl.as_deref().map(formula).transpose()?;
    let text = emit_promela(&vm, claim.as_ref())?;
    emit(io, a.pml.as_deref(), &text)?;
    Ok(None)
}

fn prompt_choice(
    io: &mut Io,
    marker: Option<Marker>,
    options: &[tailcheck::vmodel::Choice],
) -> usize {
    loop {
        match marker {
            Some(m) => writeln!(io.stdout, "Select a statement [{m}]"),
            None => writeln!(io.stdout, "Select a statement"),
        }
        .ok();
        for (i, c) in options.iter().enumerate() {
            let _ = writeln!(io.stdout, "  choice {}: {c}", i + 1);
        }
        let _ = write!(io.stdout, "Select [1-{}]: ", options.len());
        let _ = io.stdout.flush();
        let mut line = String::new();
        match io.stdin.read_line(&mut line) {
            Ok(0) | Err(_) => return usize::MAX,
            Ok(_) => {}
        }
        match line.trim().parse::<usize>() {
            Ok(n) if (1..=options.len()).contains(&n) => return n - 1,
            _ => {
                let _ = writeln!(io.stdout, "invalid choice `{}`", line.trim());
            }
        }
    }
}

fn cmd_simulate(a: &SimulateArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let vm = load_vm(&a.model, cfg, true)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let max_steps = a
        .max_steps
        .or(cfg.max_steps)
        .unwrap_or(sim::DEFAULT_MAX_STEPS);
    let runs = if a.interactive {
        let run = simulate_interactive(
            &vm,
            |block, options| prompt_choice(io, block.marker, options),
            max_steps,
        )
        .map_err(|_| anyhow!("input ended before the run stopped"))?;
        vec![run]
    } else if let Some(n) = a.batch {
        generate_traces(&vm, n, seed, max_steps)
    } else {
        vec![simulate_random(&vm, seed, max_steps)]
    };
    emit(io, a.out.as_deref(), &runs_text(&runs))?;
    if a.interactive || a.batch.is_none() {
        let run = &runs[0];
        writeln!(
            io.stderr,
            "{:?} after {} steps; {}",
            run.outcome,
            run.steps,
            vars_text(&run.final_vars)
        )?;
    }
    Ok(None)
}

fn vars_text(v: &VarSnapshot) -> String {
    let mut parts = vec![
        format!("end_state={}", v.end_state),
        format!("sink_state={}", v.sink_state),
    ];
    parts.extend(v.counters.iter().map(|(k, n)| format!("{k}={n}")));
    parts.join(" ")
}

fn cmd_examples(a: &ExamplesArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let vm = load_vm(&a.model, cfg, true)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let max_steps = a
        .max_steps
        .or(cfg.max_steps)
        .unwrap_or(sim::DEFAULT_MAX_STEPS);
    let set = generate_examples(&vm, a.kind.into(), a.count, seed, a.max_attempts, max_steps)?;
    emit(io, a.out.as_deref(), &runs_text(set.collected()))?;
    writeln!(
        io.stderr,
        "{} {:?} examples after {} runs: {} unique, {} duplicates",
        set.collected().len(),
        set.kind,
        set.attempts,
        set.variants.len(),
        set.duplicates()
    )?;
    Ok(None)
}

fn cmd_verify(a: &VerifyArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let vm = load_vm(&a.model, cfg, true)?;
    if let Some(path) = &a.replay {
        let (trail, _) =
            read_trail(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let run = replay(&vm, &trail).with_context(|| format!("replaying {}", path.display()))?;
        writeln!(io.stdout, "{run}")?;
        writeln!(io.stdout, "{}", vars_text(&run.final_vars))?;
        return Ok(None);
    }
    let property = if let Some(f) = &a.ltl {
        let f = formula(f)?;
        Property::Ltl(if a.positive_property {
            LtlFormula::not(f)
        } else {
            f
        })
    } else if let Some(p) = &a.assert {
        Property::Assert(formula(p)?)
    } else {
        Property::DeadlockOnly
    };
    let options = VerifyOptions {
        max_depth: a
            .max_depth
            .or(cfg.max_depth)
            .unwrap_or(VerifyOptions::default().max_depth),
        counter_cap: a
            .counter_cap
            .or(cfg.counter_cap)
            .unwrap_or(VerifyOptions::default().counter_cap),
    };
    let start = Instant::now();
    let verdict = verify(&vm, &property, &options)?;
    let elapsed = start.elapsed().as_secs_f64();
    let cx = match &verdict {
        Verdict::NoCounterexample {
            states_explored,
            max_depth_hit,
        } => {
            writeln!(io.stdout, "No counterexample found!")?;
            writeln!(io.stdout, "states explored: {states_explored}")?;
            if *max_depth_hit {
                writeln!(
                    io.stdout,
                    "warning: search depth {} reached; the result may be incomplete",
                    options.max_depth
                )?;
            }
            writeln!(io.stdout, "time: {elapsed:.3} s")?;
            return Ok(None);
        }
        Verdict::CounterexampleFound(c) => {
            writeln!(io.stdout, "Counterexample found!")?;
            c
        }
        Verdict::AssertViolated(c) => {
            writeln!(io.stdout, "Assertion violated!")?;
            c
        }
        Verdict::DeadlockFound(c) => {
            writeln!(io.stdout, "Deadlock found!")?;
            c
        }
    };
    writeln!(io.stdout, "{}", cx.run)?;
    writeln!(io.stdout, "{}", vars_text(&cx.run.final_vars))?;
    writeln!(io.stdout, "states explored: {}", cx.states_explored)?;
    writeln!(io.stdout, "time: {elapsed:.3} s")?;
    let trail_path = a
        .trail
        .clone()
        .unwrap_or_else(|| a.model.with_extension("trail"));
    write_atomic(
        &trail_path,
        write_trail(&cx.trail, cx.cycle_start).as_bytes(),
    )?;
    writeln!(io.stderr, "wrote {}", trail_path.display())?;
    Ok(Some(Found))
}

/// Recorded runs as simulation runs; an END marker is placed after the
/// last event since its original position is not kept.
fn recorded_runs(text: &str) -> (Vec<SimulationRun>, usize) {
    let n = normalize_external_trace(text);
    let runs = n
        .runs
        .into_iter()
        .zip(n.reached_end)
        .map(|(events, end)| SimulationRun {
            markers: if end {
                vec![(events.len(), Marker::End)]
            } else {
                Vec::new()
            },
            steps: events.len(),
            events,
            outcome: sim::RunOutcome::Stopped,
            seed: 0,
            final_vars: VarSnapshot::default(),
        })
        .collect();
    (runs, n.dropped_lines)
}

fn cmd_stats(a: &StatsArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let (runs, elapsed) = if let Some(model) = &a.model {
        let vm = load_vm(model, cfg, true)?;
        let seed = a.seed.or(cfg.seed).unwrap_or(0);
        let max_steps = a
            .max_steps
            .or(cfg.max_steps)
            .unwrap_or(sim::DEFAULT_MAX_STEPS);
        let start = Instant::now();
        let runs = generate_traces(&vm, a.n.unwrap_or(0), seed, max_steps);
        (runs, start.elapsed())
    } else {
        let path = a.runs.as_ref().expect("clap requires --model or --runs");
        let start = Instant::now();
        let (runs, dropped) = recorded_runs(&read(path)?);
        if dropped > 0 {
            writeln!(io.stderr, "ignored {dropped} non-trace lines")?;
        }
        (runs, start.elapsed())
    };
    if let Some(out) = &a.out {
        write_atomic(out, runs_text(&runs).as_bytes())?;
    }
    let stats = sim::stats(&runs).with_runtime(elapsed);
    if a.json {
        writeln!(io.stdout, "{}", serde_json::to_string_pretty(&stats)?)?;
    } else {
        write!(io.stdout, "{}", stats.to_table())?;
    }
    Ok(None)
}

/// Parses classified runs: sample format, each line cut at its first END
/// and stripped of SINK markers.
pub fn parse_classified(text: &str) -> anyhow::Result<Vec<(Vec<String>, Classification)>> {
    let sample = LabeledSample::parse(text)?;
    let clean = |t: Vec<String>| -> Vec<String> {
        t.into_iter()
            .take_while(|e| e != "END")
            .filter(|e| e != "SINK")
            .collect()
    };
    let mut out = Vec::new();
    out.extend(
        sample
            .positives
            .into_iter()
            .map(|t| (clean(t), Classification::Positive)),
    );
    out.extend(
        sample
            .negatives
            .into_iter()
            .map(|t| (clean(t), Classification::Negative)),
    );
    Ok(out)
}

fn cmd_repair(a: &RepairArgs, cfg: &WorkbenchConfig, io: &mut Io) -> Outcome {
    let model = load_model(&a.model)?;
    let sample = LabeledSample::parse(&read(&a.sample)?)
        .with_context(|| format!("parsing {}", a.sample.display()))?;
    let classified = parse_classified(&read(&a.runs)?)?;
    let k = a.k.or(cfg.k).unwrap_or(DEFAULT_K);
    let r = repair::repair_loop(&model, &sample, &classified, k, a.diff_len)?;
    write_atomic(&a.out, r.model.to_dot().as_bytes())?;
    if let Some(p) = &a.sample_out {
        write_atomic(p, r.sample.to_text().as_bytes())?;
    }
    writeln!(
        io.stdout,
        "{} states, {} transitions; {} traces added, {} removed (length <= {})",
        r.model.state_count(),
        r.model.transition_count(),
        r.diff.added.len(),
        r.diff.removed.len(),
        a.diff_len
    )?;
    write!(io.stdout, "{}", r.diff.report())?;
    for (t, class) in &classified {
        let accepted = r.model.run(t).is_end();
        if accepted != (*class == Classification::Positive) {
            writeln!(
                io.stderr,
                "warning: `{}` not classified as requested",
                t.join(" ")
            )?;
        }
    }
    Ok(None)
}
