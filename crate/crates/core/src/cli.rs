//! Batch experiment driver.
//!
//! Single results go to stdout as JSON, series go to `--out` as CSV. Every CSV
//! starts with `#` comment lines: the full config as JSON, then a
//! `# generated_unix=` timestamp line. Data rows never carry timestamps, so
//! two runs with the same config produce identical rows.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aic::{
    census_csv, curve_csv, halting_census, kt_budget_curve, kt_search_budget, BudgetRule,
    KtCertificate, SearchLimits,
};
use crate::clock::{build_chain, hamiltonian, TridiagonalHamiltonian};
use crate::machine::{
    decode, encode, format_symbols, parse_machine, parse_symbols, run_with, MachineClass,
    MachineCode, Outcome, RunOptions, TuringMachine, DEFAULT_VISITED_CAP,
};
use crate::spectra::{gap_below_epsilon, gap_sweep, spectrum, sweep_csv, DEFAULT_TOL};

pub const THREADS_ENV: &str = "HSPECTRA_THREADS";

/// Exit code for usage and data errors.
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hspectra",
    version,
    about = "Halting, clock-chain spectra and time-bounded complexity experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a machine; exit 0 halted, 1 cycle certified, 2 budget exhausted.
    Run(RunArgs),
    /// Spectrum of a clock chain, or of the uniform chain with `--length`.
    Spectrum(SpectrumArgs),
    /// Gap over a truncation sweep, with a one-line verdict.
    GapSweep(SweepArgs),
    /// Is the ground gap below epsilon at some truncation within the budget?
    GapEpsilon(EpsilonArgs),
    /// Smallest code in a class that prints the target within the budget.
    Kt(KtArgs),
    /// Found code lengths over a list of budgets.
    KtCurve(CurveArgs),
    /// Outcome tally over every machine of a class.
    Census(CensusArgs),
    /// List codes of a class, or print the machine for one code.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct MachineSource {
    /// Machine in text format.
    #[arg(long, conflicts_with = "code")]
    pub machine: Option<PathBuf>,
    /// Gödel code, read with `--class`.
    #[arg(long, requires = "class")]
    pub code: Option<u128>,
    /// Class as `<states>,<symbols>`.
    #[arg(long, value_parser = parse_class)]
    pub class: Option<(u32, u32)>,
    /// Input as a string of digit symbols; empty means blank tape.
    #[arg(long, default_value = "")]
    pub input: String,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: MachineSource,
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    #[arg(long, default_value_t = DEFAULT_VISITED_CAP)]
    pub cap_visited: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: MachineSource,
    /// Truncation of the clock chain.
    #[arg(long, default_value_t = 1024)]
    pub budget: usize,
    /// Use the uniform chain of this length instead of a machine.
    #[arg(long)]
    pub length: Option<usize>,
    /// Reference site for the local density of states.
    #[arg(long, default_value_t = 0)]
    pub site: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: MachineSource,
    #[arg(long, value_delimiter = ',', required = true)]
    pub truncations: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EpsilonArgs {
    #[command(flatten)]
    pub source: MachineSource,
    #[arg(long)]
    pub epsilon: f64,
    /// Largest truncation to try.
    #[arg(long, default_value_t = 4096)]
    pub budget: usize,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct SearchArgs {
    /// Target output as digit symbols.
    #[arg(long)]
    pub target: String,
    #[arg(long, value_parser = parse_class)]
    pub class: (u32, u32),
    /// Largest number of machines to run.
    #[arg(long, default_value_t = 1 << 22)]
    pub limit: u128,
    #[arg(long, default_value_t = DEFAULT_VISITED_CAP)]
    pub cap_visited: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct KtArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    /// Explicit step budget; overrides `--c2`/`--c0`.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 256)]
    pub c2: u64,
    #[arg(long, default_value_t = 64)]
    pub c0: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub budgets: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CensusArgs {
    #[arg(long, value_parser = parse_class)]
    pub class: (u32, u32),
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 1 << 22)]
    pub limit: u128,
    #[arg(long, default_value_t = DEFAULT_VISITED_CAP)]
    pub cap_visited: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long, value_parser = parse_class)]
    pub class: (u32, u32),
    /// Print this machine in text format instead of listing codes.
    #[arg(long)]
    pub code: Option<u128>,
    #[arg(long, default_value_t = 0)]
    pub start: u128,
    #[arg(long, default_value_t = 16)]
    pub count: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_class(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected <states>,<symbols>, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

impl MachineSource {
    fn load(&self) -> Result<TuringMachine> {
        match (&self.machine, self.code, self.class) {
            (Some(path), None, _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_machine(&text).with_context(|| format!("{}", path.display()))
            }
            (None, Some(code), Some(class)) => Ok(decode(MachineCode(code), class)?),
            _ => bail!("give either --machine <file> or --code <int> --class <s>,<k>"),
        }
    }

    fn input(&self) -> Result<Vec<u8>> {
        parse_symbols(&self.input).context("--input")
    }
}

fn load_class((s, k): (u32, u32)) -> Result<MachineClass> {
    Ok(MachineClass::new(s, k)?)
}

/// Sizes the global rayon pool from `HSPECTRA_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring thread pool")?;
    Ok(())
}

/// Writes `# config` and `# generated_unix` comment lines, then `body`, via a
/// temp file in the target directory renamed into place.
pub fn write_csv(path: &Path, command: &str, config: &impl Serialize, body: &str) -> Result<()> {
    let echo = serde_json::json!({ "command": command, "config": config });
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    writeln!(tmp, "# config: {echo}")?;
    writeln!(tmp, "# generated_unix={stamp}")?;
    tmp.write_all(body.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Prints to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Spectrum(args) => cmd_spectrum(&args).map(|_| 0),
        Command::GapSweep(args) => cmd_gap_sweep(&args).map(|_| 0),
        Command::GapEpsilon(args) => cmd_gap_epsilon(&args).map(|_| 0),
        Command::Kt(args) => cmd_kt(&args).map(|_| 0),
        Command::KtCurve(args) => cmd_kt_curve(&args).map(|_| 0),
        Command::Census(args) => cmd_census(&args).map(|_| 0),
        Command::Enumerate(args) => cmd_enumerate(&args).map(|_| 0),
    }
}

#[derive(Serialize)]
struct RunReport {
    outcome: Outcome,
    steps: u64,
    output: Option<String>,
    cycle_detection_disabled: bool,
    code: Option<MachineCode>,
    class: (u32, u32),
    input: String,
    budget: u64,
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let machine = args.source.load()?;
    let input = args.source.input()?;
    let options = RunOptions {
        budget: args.budget,
        detect_cycles: true,
        visited_cap: args.cap_visited,
    };
    let record = run_with(&machine, &input, &options)?;
    print_json(&RunReport {
        outcome: record.outcome,
        steps: record.steps(),
        output: record.output.as_deref().map(format_symbols),
        cycle_detection_disabled: record.cycle_detection_disabled,
        code: encode(&machine).ok(),
        class: machine.class(),
        input: args.source.input.clone(),
        budget: args.budget,
    })?;
    Ok(match record.outcome {
        Outcome::Halted { .. } => 0,
        Outcome::CycleCertified(_) => 1,
        Outcome::BudgetExhausted { .. } => 2,
    })
}

#[derive(Serialize)]
struct SpectrumSummary {
    dimension: usize,
    ground_gap: Option<f64>,
    lowest: Option<f64>,
    highest: Option<f64>,
    halted: Option<bool>,
    site: usize,
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let (h, halted) = match args.length {
        Some(0) => bail!("--length must be at least 1"),
        Some(l) => (TridiagonalHamiltonian::uniform_chain(l), None),
        None => {
            let machine = args.source.load()?;
            let chain = build_chain(&machine, &args.source.input()?, args.budget)?;
            (hamiltonian(&chain), Some(chain.halted))
        }
    };
    let report = spectrum(&h, args.site, DEFAULT_TOL)?;
    if let Some(out) = &args.out {
        write_csv(out, "spectrum", args, &report.to_csv())?;
    }
    print_json(&SpectrumSummary {
        dimension: h.dimension(),
        ground_gap: report.ground_gap,
        lowest: report.eigenvalues.first().copied(),
        highest: report.eigenvalues.last().copied(),
        halted,
        site: args.site,
    })
}

fn cmd_gap_sweep(args: &SweepArgs) -> Result<()> {
    let machine = args.source.load()?;
    let classification = gap_sweep(&machine, &args.source.input()?, &args.truncations)?;
    if let Some(out) = &args.out {
        write_csv(out, "gap-sweep", args, &sweep_csv(&classification))?;
    }
    emit(&format!("{}\n", classification.verdict.summary()))
}

fn cmd_gap_epsilon(args: &EpsilonArgs) -> Result<()> {
    let machine = args.source.load()?;
    let decision = gap_below_epsilon(&machine, &args.source.input()?, args.epsilon, args.budget)?;
    print_json(&decision)
}

impl SearchArgs {
    fn prepare(&self) -> Result<(Vec<u8>, MachineClass, SearchLimits)> {
        let target = parse_symbols(&self.target).context("--target")?;
        let limits = SearchLimits {
            max_machines: self.limit,
            visited_cap: self.cap_visited,
        };
        Ok((target, load_class(self.class)?, limits))
    }
}

fn kt_row(cert: &KtCertificate) -> String {
    let found = cert.found;
    format!(
        "target,found,code_bits,halt_steps,budget,exhaustive_up_to,machines_searched,cap_reached\n\
         {},{},{},{},{},{},{},{}\n",
        format_symbols(&cert.target_echo),
        found.map(|f| f.code.to_string()).unwrap_or_default(),
        found
            .map(|f| f.code_bit_length.to_string())
            .unwrap_or_default(),
        found.map(|f| f.halt_steps.to_string()).unwrap_or_default(),
        cert.budget,
        cert.exhaustive_up_to,
        cert.machines_searched,
        cert.cap_reached,
    )
}

fn cmd_kt(args: &KtArgs) -> Result<()> {
    let (target, class, limits) = args.search.prepare()?;
    let budget = match args.budget {
        Some(b) => b,
        None => BudgetRule::new(args.c2, args.c0)?.steps(target.len())?,
    };
    let cert = kt_search_budget(&target, class, budget, &limits)?;
    if let Some(out) = &args.out {
        write_csv(out, "kt", args, &kt_row(&cert))?;
    }
    print_json(&cert)
}

fn cmd_kt_curve(args: &CurveArgs) -> Result<()> {
    let (target, class, limits) = args.search.prepare()?;
    let curve = kt_budget_curve(&target, class, &args.budgets, &limits)?;
    let csv = curve_csv(&curve);
    match &args.out {
        Some(out) => write_csv(out, "kt-curve", args, &csv),
        None => emit(&csv),
    }
}

fn cmd_census(args: &CensusArgs) -> Result<()> {
    let limits = SearchLimits {
        max_machines: args.limit,
        visited_cap: args.cap_visited,
    };
    let report = halting_census(load_class(args.class)?, args.budget, &limits)?;
    if let Some(out) = &args.out {
        write_csv(out, "census", args, &census_csv(&report))?;
    }
    print_json(&report)
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<()> {
    let class = load_class(args.class)?;
    if let Some(code) = args.code {
        return emit(&class.decode(MachineCode(code))?.to_string());
    }
    let total = class.cardinality()?;
    let end = args.start.saturating_add(args.count).min(total);
    let mut csv = String::from("rank,code,code_bits\n");
    for (i, (code, _)) in class.enumerate_range(args.start.min(end), end)?.enumerate() {
        csv.push_str(&format!(
            "{},{},{}\n",
            args.start + i as u128,
            code,
            code.bit_length()
        ));
    }
    match &args.out {
        Some(out) => write_csv(out, "enumerate", args, &csv),
        None => emit(&csv),
    }
}
