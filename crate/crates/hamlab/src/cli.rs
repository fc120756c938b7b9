//! Command-line front end: graph sampling, the rotation solver, threshold
//! sweeps, expansion certification, and the obstruction laboratory.
//!
//! Exit codes: 0 for success or a positive/inconclusive verdict, 1 for
//! runtime failures, 2 for usage errors, 3 for negative verdicts
//! (falsified expansion or a proven non-Hamiltonian graph).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::expansion::{
    check_expander_exact, check_expansion_triple, check_seeded_union, falsify_expander_randomized,
    BandParams, CheckVerdict, ExpansionReport, ExpansionSpec,
};
use crate::gen::{
    ceil_alpha_n, clique_blobs, sample_gnp, unbalanced_bipartite, RngStream,
};
use crate::graph::Graph;
use crate::harness::{
    expected_internally_isolated, log_line, run_trials, sweep_with_observer, wilson_interval,
    Rounds, SeedFamily, TrialConfig, TrialOutcome,
};
use crate::oracle::{hamilton_cycle_exact, OracleLimit};
use crate::posa::{solve, verify_hamilton_cycle, EngineCaps, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

macro_rules! usage {
    ($($t:tt)*) => { CliError::Usage(format!($($t)*)) };
}
macro_rules! runtime {
    ($($t:tt)*) => { CliError::Runtime(format!($($t)*)) };
}

// ==================== argument surface ====================

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("`{s}` is outside the probability range [0, 1]"));
    }
    Ok(v)
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v > 0.0 && v < 1.0) {
        return Err(format!("`{s}` must lie strictly between 0 and 1"));
    }
    Ok(v)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("`{s}` must be a positive number"));
    }
    Ok(v)
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(format!("`{s}` must be a non-negative number"));
    }
    Ok(v)
}

#[derive(Parser, Debug)]
#[command(
    name = "hamlab",
    version,
    about = "Hamiltonicity laboratory for dense seeds perturbed by sparse random edges",
    after_help = "Every subcommand accepts `--config FILE` (key = value lines, `#` comments) \
                  supplying defaults that explicit flags override. All randomness derives \
                  from `--seed`; identical invocations produce byte-identical outputs."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a binomial random graph and write it as an edge list
    Sample(SampleArgs),
    /// Decide Hamiltonicity of a graph with the rotation engine or the exact solver
    Solve(SolveArgs),
    /// Sweep the threshold coordinate and bisect the half-success crossing
    Sweep(SweepArgs),
    /// Check vertex-expansion properties, exactly or by randomized falsification
    Certify(CertifyArgs),
    /// Measure internally isolated large-side vertices against their expectation
    Obstruct(ObstructArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// Key = value file supplying defaults for this subcommand's flags
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Number of vertices
    #[arg(long, overrides_with = "n")]
    n: Option<usize>,
    /// Edge probability
    #[arg(long, value_parser = parse_probability, overrides_with = "p")]
    p: Option<f64>,
    /// Expected degree; the edge probability becomes lambda / n
    #[arg(long, value_parser = parse_nonnegative, conflicts_with = "p", overrides_with = "lambda")]
    lambda: Option<f64>,
    /// Master seed for the random stream
    #[arg(long, default_value_t = 0, overrides_with = "seed")]
    seed: u64,
    /// Output edge-list path
    #[arg(long, value_name = "FILE", overrides_with = "out")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Edge-list file to solve
    #[arg(long, value_name = "FILE", overrides_with = "graph")]
    graph: Option<PathBuf>,
    /// Sample a random graph on this many vertices instead of reading a file
    #[arg(long, conflicts_with = "graph", overrides_with = "n")]
    n: Option<usize>,
    /// Edge probability for the sampled graph
    #[arg(long, value_parser = parse_probability, conflicts_with = "graph", overrides_with = "p")]
    p: Option<f64>,
    /// Master seed for the sampled graph
    #[arg(long, default_value_t = 0, overrides_with = "seed")]
    seed: u64,
    /// Use the exact exponential-time solver (small graphs only)
    #[arg(long, overrides_with = "exact")]
    exact: bool,
    /// Rotation budget per search round (default scales with n)
    #[arg(long, value_name = "N", overrides_with = "round_cap")]
    round_cap: Option<u64>,
    /// Extra rotation budget for second-level closures (default scales with n)
    #[arg(long, value_name = "N", overrides_with = "level2_cap")]
    level2_cap: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, overrides_with = "n")]
    n: Option<usize>,
    /// Seed degree-floor fraction
    #[arg(long, value_parser = parse_unit_open, overrides_with = "alpha")]
    alpha: Option<f64>,
    /// Headroom parameter fixing the two-round split
    #[arg(long, value_parser = parse_positive, default_value_t = 0.25, overrides_with = "epsilon")]
    epsilon: f64,
    /// Comma-separated ascending threshold coordinates (p = c * ln(1/alpha) / n)
    #[arg(long, value_name = "C1,C2,...", overrides_with = "c_grid")]
    c_grid: Option<String>,
    /// Trials per grid point and per bisection probe
    #[arg(long, default_value_t = 100, overrides_with = "trials")]
    trials: u64,
    #[arg(long, default_value_t = 0, overrides_with = "seed")]
    seed: u64,
    /// Seed family under the perturbation
    #[arg(long, value_enum, default_value_t = FamilyArg::Bipartite, overrides_with = "family")]
    family: FamilyArg,
    /// Edge exposure schedule
    #[arg(long, value_enum, default_value_t = RoundsArg::TwoRound, overrides_with = "rounds")]
    rounds: RoundsArg,
    /// Worker threads (default: available parallelism)
    #[arg(long, overrides_with = "jobs")]
    jobs: Option<usize>,
    /// Output CSV path
    #[arg(long, value_name = "FILE", overrides_with = "out")]
    out: Option<PathBuf>,
    /// Also write the success curve as two-column TSV
    #[arg(long, value_name = "FILE", overrides_with = "plotdata")]
    plotdata: Option<PathBuf>,
    /// Also write one JSON line per trial
    #[arg(long, value_name = "FILE", overrides_with = "log")]
    log: Option<PathBuf>,
    /// Record wall-clock runtimes in the trial log (breaks byte-identical reruns)
    #[arg(long, overrides_with = "timings")]
    timings: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Bipartite,
    CliqueBlobs,
    Unseeded,
}

impl From<FamilyArg> for SeedFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bipartite => SeedFamily::Bipartite,
            FamilyArg::CliqueBlobs => SeedFamily::CliqueBlobs,
            FamilyArg::Unseeded => SeedFamily::Unseeded,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RoundsArg {
    OneShot,
    TwoRound,
}

impl From<RoundsArg> for Rounds {
    fn from(r: RoundsArg) -> Self {
        match r {
            RoundsArg::OneShot => Rounds::OneShot,
            RoundsArg::TwoRound => Rounds::TwoRound,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CertifyMode {
    /// Bounded-size sets must roughly double through their neighborhoods
    Expander,
    /// Banded expansion plus the disjoint-quarter edge property of a random layer
    Triple,
    /// Seed merged with one random round: connectivity plus two-expansion
    Union,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_enum, overrides_with = "mode")]
    mode: Option<CertifyMode>,
    /// Edge-list file to check (expander and triple modes)
    #[arg(long, value_name = "FILE", overrides_with = "graph")]
    graph: Option<PathBuf>,
    /// Sample the checked graph on this many vertices instead
    #[arg(long, conflicts_with = "graph", overrides_with = "n")]
    n: Option<usize>,
    /// Edge probability for the sampled graph or random layer
    #[arg(long, value_parser = parse_probability, conflicts_with = "graph", overrides_with = "p")]
    p: Option<f64>,
    #[arg(long, default_value_t = 0, overrides_with = "seed")]
    seed: u64,
    /// Largest set size to check (expander mode)
    #[arg(long, value_name = "K", overrides_with = "k")]
    k: Option<usize>,
    /// Required expansion factor (expander mode)
    #[arg(long, value_parser = parse_positive, default_value_t = 2.0, overrides_with = "factor")]
    factor: f64,
    /// Candidate-set budget for randomized checks, or the enumeration guard with --exact
    #[arg(long, default_value_t = 100_000, overrides_with = "budget")]
    budget: u64,
    /// Enumerate every set instead of randomized falsification (expander mode)
    #[arg(long, overrides_with = "exact")]
    exact: bool,
    /// Seed degree floor (triple and union modes; union defaults to ceil(alpha * n))
    #[arg(long, value_name = "D", overrides_with = "d")]
    d: Option<usize>,
    /// Expected degree of the random layer (triple mode band arithmetic)
    #[arg(long, value_parser = parse_positive, overrides_with = "lambda")]
    lambda: Option<f64>,
    /// Band scale constant (triple mode)
    #[arg(long, value_parser = parse_positive, default_value_t = 16.0, overrides_with = "k_factor")]
    k_factor: f64,
    /// Seed family to merge with the random layer (union mode)
    #[arg(long, value_enum, default_value_t = FamilyArg::CliqueBlobs, overrides_with = "family")]
    family: FamilyArg,
    /// Degree-floor fraction for the union-mode seed
    #[arg(long, value_parser = parse_unit_open, overrides_with = "alpha")]
    alpha: Option<f64>,
}

#[derive(Args, Debug)]
struct ObstructArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, overrides_with = "n")]
    n: Option<usize>,
    #[arg(long, value_parser = parse_unit_open, overrides_with = "alpha")]
    alpha: Option<f64>,
    /// Shortfall below the threshold: p = (1 - eta) * ln(1/alpha) / n
    #[arg(long, value_parser = parse_unit_open, overrides_with = "eta")]
    eta: Option<f64>,
    /// Threshold coordinate: p = c * ln(1/alpha) / n
    #[arg(long, value_parser = parse_nonnegative, conflicts_with = "eta", overrides_with = "c")]
    c: Option<f64>,
    /// Edge probability given directly
    #[arg(long, value_parser = parse_probability, conflicts_with_all = ["eta", "c"], overrides_with = "p")]
    p: Option<f64>,
    #[arg(long, default_value_t = 200, overrides_with = "trials")]
    trials: u64,
    #[arg(long, default_value_t = 0, overrides_with = "seed")]
    seed: u64,
    #[arg(long, overrides_with = "jobs")]
    jobs: Option<usize>,
}

// ==================== config file expansion ====================

/// Translate `key = value` lines into long flags. Boolean values become
/// bare flags (`true`) or nothing (`false`). The resulting tokens go in
/// front of the explicit flags, which therefore override them.
fn config_tokens(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage!("cannot read config file {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage!(
                "config line {}: expected `key = value`, got `{raw}`",
                idx + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(usage!("config line {}: empty key or value", idx + 1));
        }
        if key == "config" {
            return Err(usage!("config line {}: config files cannot nest", idx + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Splice config-file tokens in right after the subcommand, so explicit
/// flags (which come later) win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let config_path = args
        .iter()
        .position(|a| a == "--config")
        .and_then(|i| args.get(i + 1).cloned())
        .or_else(|| {
            args.iter()
                .find_map(|a| a.strip_prefix("--config=").map(str::to_string))
        });
    let Some(path) = config_path else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let tokens = config_tokens(Path::new(&path))?;
    let mut out = Vec::with_capacity(args.len() + tokens.len());
    out.extend(args[..2].iter().cloned());
    out.extend(tokens);
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

// ==================== edge-list files ====================

/// Format: optional `#` comment lines, then a line holding the vertex
/// count, then one `u v` pair per line.
fn read_edge_list(path: &Path) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| runtime!("cannot read graph file {}: {e}", path.display()))?;
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| runtime!("graph file {} is empty", path.display()))?
        .parse()
        .map_err(|_| runtime!("graph file {}: first line must be the vertex count", path.display()))?;
    let mut g = Graph::new(n).map_err(|e| runtime!("graph file {}: {e}", path.display()))?;
    for line in lines {
        let mut parts = line.split_whitespace();
        let (Some(us), Some(vs), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(runtime!("graph file {}: expected `u v`, got `{line}`", path.display()));
        };
        let u: usize = us
            .parse()
            .map_err(|_| runtime!("graph file {}: bad vertex `{us}`", path.display()))?;
        let v: usize = vs
            .parse()
            .map_err(|_| runtime!("graph file {}: bad vertex `{vs}`", path.display()))?;
        g.add_edge(u, v)
            .map_err(|e| runtime!("graph file {}: {e}", path.display()))?;
    }
    Ok(g)
}

fn edge_list_string(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", g.vertex_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| runtime!("cannot write {}: {e}", path.display()))
}

// ==================== shared helpers ====================

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage!("missing required flag --{flag}"))
}

fn default_jobs(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    })
}

fn load_or_sample(
    graph: Option<&PathBuf>,
    n: Option<usize>,
    p: Option<f64>,
    seed: u64,
) -> Result<Graph, CliError> {
    match (graph, n) {
        (Some(path), _) => read_edge_list(path),
        (None, Some(n)) => {
            let p = require(p, "p")?;
            sample_gnp(n, p, RngStream::new(seed, 0)).map_err(|e| runtime!("sampling failed: {e}"))
        }
        (None, None) => Err(usage!("provide either --graph FILE or --n with --p")),
    }
}

fn describe(report: &ExpansionReport) -> String {
    let mut out = format!(
        "verdict: {} (sets-checked: {})",
        verdict_name(report.verdict),
        report.sets_checked
    );
    if let Some(w) = &report.witness {
        let set: Vec<String> = w.set.iter().map(|v| v.to_string()).collect();
        let _ = write!(
            out,
            "\nwitness: {} (external: {}, required: {})",
            set.join(" "),
            w.external,
            w.required
        );
    }
    if let Some(note) = report.note {
        let _ = write!(out, "\nnote: {note}");
    }
    out
}

fn verdict_name(v: CheckVerdict) -> &'static str {
    match v {
        CheckVerdict::Certified => "certified",
        CheckVerdict::Falsified => "falsified",
        CheckVerdict::NotFalsified => "not-falsified",
    }
}

// ==================== subcommands ====================

fn cmd_sample(args: SampleArgs) -> Result<(String, i32), CliError> {
    let n = require(args.n, "n")?;
    let p = match (args.p, args.lambda) {
        (Some(p), None) => p,
        (None, Some(lambda)) => {
            let p = lambda / n as f64;
            if p > 1.0 {
                return Err(usage!("--lambda {lambda} exceeds n = {n}, probability above 1"));
            }
            p
        }
        (None, None) => return Err(usage!("provide --p or --lambda")),
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };
    let out_path = require(args.out, "out")?;
    let g = sample_gnp(n, p, RngStream::new(args.seed, 0))
        .map_err(|e| runtime!("sampling failed: {e}"))?;
    write_file(&out_path, &edge_list_string(&g))?;
    Ok((
        format!(
            "wrote {} ({} vertices, {} edges)",
            out_path.display(),
            g.vertex_count(),
            g.edge_count()
        ),
        EXIT_OK,
    ))
}

fn cmd_solve(args: SolveArgs) -> Result<(String, i32), CliError> {
    let g = load_or_sample(args.graph.as_ref(), args.n, args.p, args.seed)?;
    let n = g.vertex_count();
    if args.exact {
        let limits = OracleLimit::default();
        let cycle = hamilton_cycle_exact(&g, &limits)
            .map_err(|e| usage!("exact solver refused the input: {e}"))?;
        return Ok(match cycle {
            Some(cyc) => {
                assert!(verify_hamilton_cycle(&g, &cyc), "exact cycle failed verification");
                let joined: Vec<String> = cyc.iter().map(|v| v.to_string()).collect();
                (format!("HAMILTONIAN\n{}", joined.join(" ")), EXIT_OK)
            }
            None => ("NON-HAMILTONIAN".to_string(), EXIT_NEGATIVE),
        });
    }
    let mut caps = EngineCaps::for_size(n);
    if let Some(r) = args.round_cap {
        caps.round_rotations = r;
    }
    if let Some(l) = args.level2_cap {
        caps.level2_rotations = l;
    }
    let result = solve(&g, &caps);
    Ok(match result.verdict {
        Verdict::Found => {
            let cyc = result.cycle.expect("found verdicts carry a cycle");
            assert!(verify_hamilton_cycle(&g, &cyc), "engine cycle failed verification");
            let joined: Vec<String> = cyc.iter().map(|v| v.to_string()).collect();
            (format!("HAMILTONIAN\n{}", joined.join(" ")), EXIT_OK)
        }
        Verdict::Exhausted => ("EXHAUSTED".to_string(), EXIT_OK),
    })
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|_| usage!("--c-grid must be comma-separated numbers, got `{text}`"))?;
    if grid.is_empty() {
        return Err(usage!("--c-grid is empty"));
    }
    Ok(grid)
}

fn cmd_sweep(args: SweepArgs) -> Result<(String, i32), CliError> {
    let n = require(args.n, "n")?;
    let alpha = require(args.alpha, "alpha")?;
    let grid = parse_grid(&require(args.c_grid.clone(), "c-grid")?)?;
    let out_path = require(args.out, "out")?;
    let jobs = default_jobs(args.jobs);

    let base = TrialConfig::new(n, alpha, args.epsilon)
        .map_err(|e| usage!("invalid sweep parameters: {e}"))?
        .with_family(args.family.into())
        .with_rounds(args.rounds.into())
        .with_master_seed(args.seed)
        .with_runtime_recording(args.timings);

    let mut log_lines: Vec<(u64, String)> = Vec::new();
    let mut observer = |cfg: &TrialConfig, outcomes: &[TrialOutcome]| {
        if args.log.is_some() {
            for o in outcomes {
                let cfg_t = cfg.with_trial(o.trial_index);
                log_lines.push((o.trial_index, log_line(&cfg_t, o)));
            }
        }
    };
    let result = sweep_with_observer(&base, &grid, args.trials, jobs, &mut observer)
        .map_err(|e| runtime!("sweep failed: {e}"))?;

    write_file(&out_path, &result.to_csv())?;
    let mut summary = format!("wrote {}", out_path.display());
    if let Some(tsv) = &args.plotdata {
        write_file(tsv, &result.to_plotdata())?;
        let _ = write!(summary, "\nwrote {}", tsv.display());
    }
    if let Some(log_path) = &args.log {
        let mut body = String::new();
        for (_, line) in &log_lines {
            body.push_str(line);
            body.push('\n');
        }
        write_file(log_path, &body)?;
        let _ = write!(summary, "\nwrote {}", log_path.display());
    }
    let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
    let _ = write!(
        summary,
        "\nc_half={} p_half={} reference_p={}",
        fmt(result.c_half),
        fmt(result.p_half),
        result.reference_p
    );
    if let Some(d) = &result.diagnostic {
        let _ = write!(summary, "\ndiagnostic: {d}");
    }
    Ok((summary, EXIT_OK))
}

fn cmd_certify(args: CertifyArgs) -> Result<(String, i32), CliError> {
    let mode = require(args.mode, "mode")?;
    match mode {
        CertifyMode::Expander => {
            let g = load_or_sample(args.graph.as_ref(), args.n, args.p, args.seed)?;
            let k = require(args.k, "k")?;
            let spec = ExpansionSpec {
                k_bound: k,
                factor: args.factor,
                sample_budget: args.budget,
            };
            let report = if args.exact {
                check_expander_exact(&g, &spec)
                    .map_err(|e| usage!("exact expander check refused: {e}"))?
            } else {
                falsify_expander_randomized(&g, &spec, RngStream::new(args.seed, 1))
                    .map_err(|e| usage!("expander check refused: {e}"))?
            };
            let code = if report.verdict == CheckVerdict::Falsified {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            };
            Ok((describe(&report), code))
        }
        CertifyMode::Triple => {
            let g = load_or_sample(args.graph.as_ref(), args.n, args.p, args.seed)?;
            let d = require(args.d, "d")?;
            let lambda = require(args.lambda, "lambda")?;
            let params = BandParams::new(g.vertex_count(), d, lambda, args.k_factor)
                .map_err(|e| usage!("invalid band parameters: {e}"))?;
            let report = check_expansion_triple(&g, &params, RngStream::new(args.seed, 1), args.budget)
                .map_err(|e| usage!("triple check refused: {e}"))?;
            let mut out = String::new();
            let _ = writeln!(out, "low-band {}", describe(&report.low_band).replace('\n', "\nlow-band "));
            let _ = writeln!(out, "high-band {}", describe(&report.high_band).replace('\n', "\nhigh-band "));
            let _ = write!(
                out,
                "quarter-cut verdict: {} (pairs-checked: {})",
                verdict_name(report.quarter_cut.verdict),
                report.quarter_cut.pairs_checked
            );
            if let Some(w) = &report.quarter_cut.witness {
                let _ = write!(out, "\nquarter-cut witness sizes: {} and {}", w.a.len(), w.b.len());
            }
            let _ = write!(out, "\ndegree-over-log-n: {}", report.d_over_log_n);
            let code = if report.any_falsified() { EXIT_NEGATIVE } else { EXIT_OK };
            Ok((out, code))
        }
        CertifyMode::Union => {
            let n = require(args.n, "n")?;
            let alpha = require(args.alpha, "alpha")?;
            let p = require(args.p, "p")?;
            let seed_graph = match args.family {
                FamilyArg::Bipartite => unbalanced_bipartite(n, alpha)
                    .map_err(|e| usage!("seed construction failed: {e}"))?
                    .graph,
                FamilyArg::CliqueBlobs => clique_blobs(n, alpha)
                    .map_err(|e| usage!("seed construction failed: {e}"))?,
                FamilyArg::Unseeded => {
                    return Err(usage!("union mode needs a seed family with a degree floor"))
                }
            };
            let d = args.d.unwrap_or_else(|| ceil_alpha_n(n, alpha));
            let layer = sample_gnp(n, p, RngStream::new(args.seed, 0))
                .map_err(|e| runtime!("sampling failed: {e}"))?;
            let report = check_seeded_union(&seed_graph, &layer, d, RngStream::new(args.seed, 1), args.budget)
                .map_err(|e| usage!("union check refused: {e}"))?;
            let mut out = format!(
                "connected: {}\nseed-min-degree: {}\ncertified-up-to: {}\nquarter: {}",
                report.connected, report.seed_min_degree, report.certified_up_to, report.quarter
            );
            let _ = write!(out, "\nrandomized {}", describe(&report.randomized).replace('\n', "\nrandomized "));
            let _ = write!(out, "\nholds: {}", report.holds());
            let code = if report.holds() { EXIT_OK } else { EXIT_NEGATIVE };
            Ok((out, code))
        }
    }
}

fn cmd_obstruct(args: ObstructArgs) -> Result<(String, i32), CliError> {
    let n = require(args.n, "n")?;
    let alpha = require(args.alpha, "alpha")?;
    let base = TrialConfig::new(n, alpha, 0.25)
        .map_err(|e| usage!("invalid parameters: {e}"))?
        .with_master_seed(args.seed);
    let base = match (args.eta, args.c, args.p) {
        (Some(eta), None, None) => base
            .at_constant(1.0 - eta)
            .map_err(|e| usage!("invalid --eta: {e}"))?,
        (None, Some(c), None) => base.at_constant(c).map_err(|e| usage!("invalid --c: {e}"))?,
        (None, None, Some(p)) => base
            .with_edge_probability(p)
            .map_err(|e| usage!("invalid --p: {e}"))?,
        (None, None, None) => return Err(usage!("provide one of --eta, --c, or --p")),
        _ => unreachable!("clap conflicts"),
    };
    if args.trials == 0 {
        return Err(usage!("--trials must be at least 1"));
    }
    let jobs = default_jobs(args.jobs);
    let outcomes =
        run_trials(&base, 0, args.trials, jobs).map_err(|e| runtime!("trials failed: {e}"))?;

    let small = ceil_alpha_n(n, alpha);
    let mut out = String::from("trial\tisolated\tsmall_side\tcertified\n");
    let mut total = 0u64;
    let mut certified = 0u64;
    for o in &outcomes {
        let isolated = o.isolated_in_large_side.expect("bipartite trials count isolation");
        total += isolated;
        certified += u64::from(o.obstruction_certified);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            o.trial_index, isolated, small, o.obstruction_certified
        );
    }
    let mean = total as f64 / args.trials as f64;
    let expected = expected_internally_isolated(n, alpha, base.p);
    let rate = certified as f64 / args.trials as f64;
    let (lo, hi) = wilson_interval(certified, args.trials, 1.96)
        .map_err(|e| runtime!("interval failed: {e}"))?;
    let _ = write!(
        out,
        "# p={} mean_isolated={mean} expected_isolated={expected} certificate_rate={rate} rate_ci=[{lo},{hi}]",
        base.p
    );
    Ok((out, EXIT_OK))
}

// ==================== entry point ====================

/// Print to stdout, tolerating a reader that closed the pipe early
/// (`hamlab solve ... | head -1` must not crash). Returns the exit code
/// to use in place of `code`: unchanged on success or early close, a
/// runtime failure on any other write error.
fn emit(text: &str, code: i32) -> i32 {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Ok(()) => code,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => code,
        Err(e) => {
            eprintln!("error: cannot write to stdout: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Parse and dispatch; returns the process exit code. Output goes to
/// stdout, errors to stderr.
pub fn run(args: Vec<String>) -> i32 {
    let expanded = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Obstruct(a) => cmd_obstruct(a),
    };
    match outcome {
        Ok((text, code)) => emit(&text, code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
