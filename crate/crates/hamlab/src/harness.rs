//! Monte Carlo trial runner for perturbed-graph Hamiltonicity: single
//! trials with reproducible stream derivation, a non-Hamiltonicity
//! certificate for the bipartite seed family, threshold sweeps with
//! Wilson intervals and bisection, and a deterministic worker pool.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gen::{
    ceil_alpha_n, clique_blobs, gnp_edge_list, unbalanced_bipartite, GenError, RngStream,
};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::posa::{
    solve, sprinkle_from, verify_hamilton_cycle, verify_hamilton_cycle_with, EngineCaps,
    PosaError, Verdict,
};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("invalid trial configuration: {0}")]
    BadConfig(&'static str),
    #[error("seed graph minimum degree {found} is below the floor {required}")]
    SeedDegree { required: usize, found: usize },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] PosaError),
}

// ==================== trial configuration ====================

/// Dense seed placed under the random perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedFamily {
    /// Complete bipartite graph with small side `ceil(alpha * n)`; enables
    /// the isolated-vertex non-Hamiltonicity certificate.
    Bipartite,
    /// Disjoint cliques with degree floor `ceil(alpha * n)`.
    CliqueBlobs,
    /// No seed at all: the trial graph is the random part alone and the
    /// degree-floor check is disabled.
    Unseeded,
    /// Caller-provided seed graph; use [`run_trial_on_seed`].
    Custom,
}

/// How the random edge budget is exposed to the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounds {
    /// All random edges are drawn in one batch and streamed to the engine
    /// as a uniformly shuffled sprinkle sequence over the bare seed.
    OneShot,
    /// A first round is merged into the seed up front and the engine
    /// consumes only the second round as a sprinkle stream. The edge
    /// probability splits in the ratio `(1 + eps/2) : (eps/4)`, summing
    /// exactly to `p`.
    TwoRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub n: usize,
    /// Degree-floor fraction of the seed.
    pub alpha: f64,
    /// Headroom parameter; fixes the two-round split ratio.
    pub epsilon: f64,
    /// Total edge probability of the random perturbation.
    pub p: f64,
    pub seed_family: SeedFamily,
    pub rounds: Rounds,
    pub caps: EngineCaps,
    pub master_seed: u64,
    pub trial_index: u64,
    /// Record wall-clock runtime in the outcome. Off by default because
    /// timings break byte-identical reruns.
    pub record_runtime: bool,
}

impl TrialConfig {
    /// Defaults: two-round bipartite trial at the full edge budget
    /// `p = (1 + epsilon) * ln(1/alpha) / n`.
    pub fn new(n: usize, alpha: f64, epsilon: f64) -> Result<Self, HarnessError> {
        let cfg = TrialConfig {
            n,
            alpha,
            epsilon,
            p: 0.0,
            seed_family: SeedFamily::Bipartite,
            rounds: Rounds::TwoRound,
            caps: EngineCaps::for_size(n),
            master_seed: 0,
            trial_index: 0,
            record_runtime: false,
        };
        cfg.validate_parameters()?;
        let p = (1.0 + epsilon) * cfg.critical_degree() / n as f64;
        cfg.with_edge_probability(p)
    }

    /// `ln(1/alpha)`: the expected perturbation degree at the threshold.
    pub fn critical_degree(&self) -> f64 {
        (1.0 / self.alpha).ln()
    }

    /// The threshold-relative coordinate `c` with `p = c * ln(1/alpha) / n`.
    pub fn constant(&self) -> f64 {
        self.p * self.n as f64 / self.critical_degree()
    }

    pub fn with_edge_probability(mut self, p: f64) -> Result<Self, HarnessError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(HarnessError::BadConfig("edge probability outside [0, 1]"));
        }
        self.p = p;
        Ok(self)
    }

    /// Set `p = c * ln(1/alpha) / n`.
    pub fn at_constant(self, c: f64) -> Result<Self, HarnessError> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(HarnessError::BadConfig("threshold constant must be >= 0"));
        }
        let p = c * self.critical_degree() / self.n as f64;
        self.with_edge_probability(p)
    }

    pub fn with_family(mut self, family: SeedFamily) -> Self {
        self.seed_family = family;
        self
    }

    pub fn with_rounds(mut self, rounds: Rounds) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_caps(mut self, caps: EngineCaps) -> Self {
        self.caps = caps;
        self
    }

    pub fn with_master_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_trial(mut self, trial_index: u64) -> Self {
        self.trial_index = trial_index;
        self
    }

    pub fn with_runtime_recording(mut self, on: bool) -> Self {
        self.record_runtime = on;
        self
    }

    fn validate_parameters(&self) -> Result<(), HarnessError> {
        if self.n < 3 {
            return Err(HarnessError::BadConfig("need at least 3 vertices"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::BadConfig("alpha outside (0, 1)"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(HarnessError::BadConfig("epsilon must be positive"));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), HarnessError> {
        self.validate_parameters()?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(HarnessError::BadConfig("edge probability outside [0, 1]"));
        }
        Ok(())
    }

    /// Per-round probabilities `(p1, p2)` with `p1 + p2 = p`, split in the
    /// ratio `(1 + eps/2) : (eps/4)`.
    pub fn round_split(&self) -> (f64, f64) {
        let w1 = 1.0 + self.epsilon / 2.0;
        let w2 = self.epsilon / 4.0;
        let p1 = self.p * w1 / (w1 + w2);
        (p1, self.p - p1)
    }

    /// Stream id for purpose slot `k` of this trial. Each trial owns ids
    /// `8 * trial_index .. 8 * trial_index + 7`, so external tooling can
    /// resample any round of any trial without rerunning it.
    pub fn stream(&self, k: u64) -> RngStream {
        RngStream::new(self.master_seed, self.trial_index * 8 + k)
    }
}

/// Stream slot holding the single round of a one-shot trial or the first
/// round of a two-round trial.
pub const STREAM_ROUND_ONE: u64 = 1;
/// Stream slot holding the second, sprinkled round.
pub const STREAM_ROUND_TWO: u64 = 2;
/// Stream slot that shuffles the sprinkled edge order.
pub const STREAM_SHUFFLE: u64 = 3;

// ==================== trial outcome ====================

/// Who decided the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Rotation engine verdict (or its refusal on disconnected input).
    Engine,
    /// Exact exponential-time solver.
    Oracle,
    /// Structural non-Hamiltonicity certificate.
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub hamiltonian_found: bool,
    pub obstruction_certified: bool,
    /// For the bipartite family: number of large-side vertices with no
    /// random neighbor inside the large side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated_in_large_side: Option<u64>,
    /// Random edges revealed to the deciding instrument.
    pub edges_exposed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undecided_reason: Option<&'static str>,
    /// Witness cycle when one was found; always re-verified against an
    /// independently rebuilt union graph before being reported.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<usize>>,
}

impl TrialOutcome {
    /// Neither a cycle nor a certificate: one-sided instruments ran out.
    pub fn undecided(&self) -> bool {
        !self.hamiltonian_found && !self.obstruction_certified
    }
}

// ==================== trial execution ====================

fn build_seed(cfg: &TrialConfig) -> Result<Option<Graph>, HarnessError> {
    Ok(match cfg.seed_family {
        SeedFamily::Bipartite => Some(unbalanced_bipartite(cfg.n, cfg.alpha)?.graph),
        SeedFamily::CliqueBlobs => Some(clique_blobs(cfg.n, cfg.alpha)?),
        SeedFamily::Unseeded => None,
        SeedFamily::Custom => {
            return Err(HarnessError::BadConfig(
                "custom seed family requires run_trial_on_seed",
            ))
        }
    })
}

/// The random part of a trial as edge lists, in exactly the shape the
/// trial runner consumes: `stream_round` is what the engine sees edge by
/// edge (the single round in one-shot mode, the second round in two-round
/// mode), `merged_round` is merged into the engine base up front. Edge
/// lists keep the peak memory at two adjacency matrices (seed and base)
/// even for very large trials.
struct RandomRounds {
    stream_round: Vec<(usize, usize)>,
    merged_round: Option<Vec<(usize, usize)>>,
}

impl RandomRounds {
    fn sample(cfg: &TrialConfig) -> Result<RandomRounds, HarnessError> {
        Ok(match cfg.rounds {
            Rounds::OneShot => RandomRounds {
                stream_round: gnp_edge_list(cfg.n, cfg.p, cfg.stream(STREAM_ROUND_ONE))?,
                merged_round: None,
            },
            Rounds::TwoRound => {
                let (p1, p2) = cfg.round_split();
                RandomRounds {
                    stream_round: gnp_edge_list(cfg.n, p2, cfg.stream(STREAM_ROUND_TWO))?,
                    merged_round: Some(gnp_edge_list(cfg.n, p1, cfg.stream(STREAM_ROUND_ONE))?),
                }
            }
        })
    }

    /// Distinct random pairs across both rounds (the rounds are sampled
    /// independently, so they can overlap), normalized to `u < v`.
    fn distinct_pairs(&self) -> HashSet<(usize, usize)> {
        let mut set: HashSet<(usize, usize)> = self.stream_round.iter().copied().collect();
        if let Some(m) = &self.merged_round {
            set.extend(m.iter().copied());
        }
        set
    }
}

/// Deterministically rebuild the full union graph (seed plus every random
/// edge) a trial configuration denotes. Intended for cross-checks at
/// small and moderate sizes; it materializes one dense adjacency matrix.
pub fn trial_union_graph(cfg: &TrialConfig) -> Result<Graph, HarnessError> {
    cfg.validate()?;
    let seed = build_seed(cfg)?;
    trial_union_on_seed(cfg, seed.as_ref())
}

fn trial_union_on_seed(cfg: &TrialConfig, seed: Option<&Graph>) -> Result<Graph, HarnessError> {
    let rounds = RandomRounds::sample(cfg)?;
    let mut union = match seed {
        Some(s) => s.clone(),
        None => Graph::new(cfg.n)?,
    };
    for &(u, v) in &rounds.stream_round {
        union.add_edge(u, v)?;
    }
    if let Some(m) = &rounds.merged_round {
        for &(u, v) in m {
            union.add_edge(u, v)?;
        }
    }
    Ok(union)
}

/// Everything a trial needs before any adjacency matrix exists: the
/// sampled rounds, their distinct pair set, and a partially filled
/// outcome. `decided` marks trials the counting certificate settled
/// outright, for which no graph is ever built.
struct TrialSetup {
    rounds: RandomRounds,
    random_pairs: HashSet<(usize, usize)>,
    outcome: TrialOutcome,
    decided: bool,
}

/// Sample the rounds and evaluate the obstruction certificate (bipartite
/// family only) from edge lists alone.
fn prepare_trial(cfg: &TrialConfig) -> Result<TrialSetup, HarnessError> {
    let rounds = RandomRounds::sample(cfg)?;
    let random_pairs = rounds.distinct_pairs();
    let mut outcome = TrialOutcome {
        trial_index: cfg.trial_index,
        hamiltonian_found: false,
        obstruction_certified: false,
        isolated_in_large_side: None,
        edges_exposed: random_pairs.len() as u64,
        runtime_seconds: None,
        provenance: Provenance::Engine,
        undecided_reason: None,
        cycle: None,
    };
    let mut decided = false;

    if cfg.seed_family == SeedFamily::Bipartite {
        // Internal degree of each large-side vertex within the large
        // side, over the distinct random pairs; the complete bipartite
        // seed contributes nothing inside the large side.
        let small = ceil_alpha_n(cfg.n, cfg.alpha);
        let mut internal_degree = vec![0u32; cfg.n - small];
        for &(u, v) in &random_pairs {
            if u >= small && v >= small {
                internal_degree[u - small] += 1;
                internal_degree[v - small] += 1;
            }
        }
        let isolated = internal_degree.iter().filter(|&&d| d == 0).count() as u64;
        outcome.isolated_in_large_side = Some(isolated);
        let demand: u64 = internal_degree
            .iter()
            .map(|&d| 2u64.saturating_sub(u64::from(d)))
            .sum();
        if certify_non_hamiltonian_by_demand(small, demand) {
            outcome.obstruction_certified = true;
            outcome.provenance = Provenance::Certificate;
            decided = true;
        }
    }

    Ok(TrialSetup {
        rounds,
        random_pairs,
        outcome,
        decided,
    })
}

/// Run one trial: sample the random round(s), evaluate the obstruction
/// certificate first (bipartite family), and only when the certificate
/// stays silent build the seed graph and hand the base plus sprinkle
/// stream to the rotation engine. Pure function of the configuration;
/// reruns match exactly.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialOutcome, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let setup = prepare_trial(cfg)?;
    if setup.decided {
        let mut outcome = setup.outcome;
        if cfg.record_runtime {
            outcome.runtime_seconds = Some(started.elapsed().as_secs_f64());
        }
        return Ok(outcome);
    }
    let seed = build_seed(cfg)?;
    run_engine_trial(cfg, seed.as_ref(), setup, started)
}

/// Evaluate only the cheap structural side of a trial: sample the random
/// rounds and fire the counting certificate when it applies. Returns
/// `Some(outcome)` when the certificate decides the trial outright and
/// `None` when only the search engine could settle it. Never builds an
/// adjacency matrix, so it stays fast and small at sizes where a full
/// engine run would be expensive; useful for mapping the certificate side
/// of the transition on its own.
pub fn run_certificate_probe(cfg: &TrialConfig) -> Result<Option<TrialOutcome>, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let setup = prepare_trial(cfg)?;
    Ok(setup.decided.then(|| {
        let mut outcome = setup.outcome;
        if cfg.record_runtime {
            outcome.runtime_seconds = Some(started.elapsed().as_secs_f64());
        }
        outcome
    }))
}

/// [`run_trial`] with a caller-provided seed graph (`SeedFamily::Custom`),
/// or `None` for `SeedFamily::Unseeded`. Built-in families reject this
/// entry point to keep configuration and graph in agreement.
pub fn run_trial_on_seed(
    cfg: &TrialConfig,
    seed: Option<&Graph>,
) -> Result<TrialOutcome, HarnessError> {
    cfg.validate()?;
    match (cfg.seed_family, seed) {
        (SeedFamily::Custom, Some(g)) => {
            if g.vertex_count() != cfg.n {
                return Err(HarnessError::BadConfig("seed size differs from n"));
            }
            let required = ceil_alpha_n(cfg.n, cfg.alpha);
            let found = g.min_degree();
            if found < required {
                return Err(HarnessError::SeedDegree { required, found });
            }
            run_prepared_trial(cfg, Some(g))
        }
        (SeedFamily::Unseeded, None) => run_prepared_trial(cfg, None),
        (SeedFamily::Custom, None) => {
            Err(HarnessError::BadConfig("custom seed family needs a graph"))
        }
        _ => Err(HarnessError::BadConfig(
            "built-in seed families take no explicit graph; use run_trial",
        )),
    }
}

/// Decide-or-run step for callers that already hold the seed graph (or
/// run without one): certificate-decided trials return immediately,
/// everything else goes to the engine.
fn run_prepared_trial(
    cfg: &TrialConfig,
    seed: Option<&Graph>,
) -> Result<TrialOutcome, HarnessError> {
    let started = Instant::now();
    let setup = prepare_trial(cfg)?;
    if setup.decided {
        let mut outcome = setup.outcome;
        if cfg.record_runtime {
            outcome.runtime_seconds = Some(started.elapsed().as_secs_f64());
        }
        return Ok(outcome);
    }
    run_engine_trial(cfg, seed, setup, started)
}

fn run_engine_trial(
    cfg: &TrialConfig,
    seed: Option<&Graph>,
    setup: TrialSetup,
    started: Instant,
) -> Result<TrialOutcome, HarnessError> {
    let TrialSetup {
        rounds,
        random_pairs,
        mut outcome,
        ..
    } = setup;
    let total_random_edges = random_pairs.len() as u64;

    let Some(seed) = seed else {
        // No seed: nothing to sprinkle onto; solve the random graph as is.
        let mut union = Graph::new(cfg.n)?;
        for &(u, v) in &random_pairs {
            union.add_edge(u, v)?;
        }
        if !union.is_connected() {
            outcome.undecided_reason = Some("random graph is disconnected");
        } else {
            // The solver sees every random edge at once.
            let result = solve(&union, &cfg.caps);
            finish_engine_outcome(&mut outcome, result, total_random_edges, |cycle| {
                verify_hamilton_cycle(&union, cycle)
            });
        }
        if cfg.record_runtime {
            outcome.runtime_seconds = Some(started.elapsed().as_secs_f64());
        }
        return Ok(outcome);
    };

    // Engine base: seed plus the merged first round (two-round mode), or
    // the bare seed (one-shot mode). The remaining random edges arrive as
    // a uniformly shuffled sprinkle stream.
    let mut base = seed.clone();
    let mut merged_up_front = 0u64;
    if let Some(m) = &rounds.merged_round {
        for &(u, v) in m {
            base.add_edge(u, v)?;
        }
        merged_up_front = m.len() as u64;
    }
    let mut stream_edges = rounds.stream_round;
    stream_edges.shuffle(&mut cfg.stream(STREAM_SHUFFLE).rng());

    if !base.is_connected() {
        outcome.undecided_reason =
            Some("engine requires a connected base graph and the seed plus merged round is not");
        outcome.edges_exposed = merged_up_front;
    } else {
        // For the bipartite seed, thread every large-side vertex whose
        // whole base neighborhood is the small side between two distinct
        // small-side vertices before the search starts. Rotations never
        // drop interior path vertices, so the start path permanently
        // places exactly the vertices a rotation search cannot reach once
        // the small side's path slots fill with other vertices.
        let chain = if cfg.seed_family == SeedFamily::Bipartite {
            isolate_chain(&base, ceil_alpha_n(cfg.n, cfg.alpha))
        } else {
            None
        };
        let result = sprinkle_from(base, chain.as_deref(), stream_edges, &cfg.caps)?;
        // Verification never trusts the engine's bookkeeping: cycle edges
        // must come from the seed or the sampled random pairs.
        finish_engine_outcome(&mut outcome, result, merged_up_front, |cycle| {
            verify_hamilton_cycle_with(cfg.n, cycle, |u, v| {
                seed.has_edge(u, v) || random_pairs.contains(&(u.min(v), u.max(v)))
            })
        });
    }
    if cfg.record_runtime {
        outcome.runtime_seconds = Some(started.elapsed().as_secs_f64());
    }
    Ok(outcome)
}

fn finish_engine_outcome(
    outcome: &mut TrialOutcome,
    result: crate::posa::HamiltonResult,
    merged_up_front: u64,
    verify: impl FnOnce(&[usize]) -> bool,
) {
    outcome.edges_exposed = merged_up_front + result.edges_consumed as u64;
    match result.verdict {
        Verdict::Found => {
            let cycle = result.cycle.expect("found verdicts carry a cycle");
            assert!(
                verify(&cycle),
                "engine reported a cycle that fails re-verification"
            );
            outcome.hamiltonian_found = true;
            outcome.cycle = Some(cycle);
        }
        Verdict::Exhausted => {
            outcome.undecided_reason = Some("engine exhausted its rotation budget");
        }
    }
}

/// Alternating start path for the bipartite seed: every large-side vertex
/// with zero base neighbors inside the large side, threaded between
/// distinct small-side vertices as `a0 s1 a1 s2 ... sk ak`. Every edge on
/// the path comes from the complete bipartite seed. Returns `None` when
/// no vertex needs protecting or the small side cannot host the chain
/// (the counting certificate decides such trials long before this point).
fn isolate_chain(base: &Graph, small: usize) -> Option<Vec<usize>> {
    let n = base.vertex_count();
    if small == 0 || small >= n {
        return None;
    }
    let large = VertexSet::from_iter(n, small..n);
    let isolates: Vec<usize> = (small..n)
        .filter(|&v| {
            base.row(v)
                .iter()
                .zip(large.words())
                .all(|(&row, &mask)| row & mask == 0)
        })
        .collect();
    if isolates.is_empty() || isolates.len() >= small {
        return None;
    }
    let mut chain = Vec::with_capacity(2 * isolates.len() + 1);
    chain.push(0);
    for (i, &s) in isolates.iter().enumerate() {
        chain.push(s);
        chain.push(i + 1);
    }
    Some(chain)
}

// ==================== obstruction instruments ====================

/// Number of `set` vertices with no `g`-neighbor inside `set`.
pub fn count_internally_isolated(g: &Graph, set: &VertexSet) -> u64 {
    debug_assert!(
        g.vertex_count() == 0 || g.row(0).len() == set.words().len(),
        "set sized for a different graph"
    );
    set.iter()
        .filter(|&v| {
            g.row(v)
                .iter()
                .zip(set.words())
                .all(|(&row, &mask)| row & mask == 0)
        })
        .count() as u64
}

/// Expected number of internally isolated large-side vertices for the
/// bipartite seed with small side `ceil(alpha * n)` under an edge
/// probability `p`: with `b = n - ceil(alpha * n)`, this is
/// `b * (1 - p)^(b - 1)`.
pub fn expected_internally_isolated(n: usize, alpha: f64, p: f64) -> f64 {
    let b = n - ceil_alpha_n(n, alpha);
    if b == 0 {
        return 0.0;
    }
    b as f64 * (1.0 - p).powi(b as i32 - 1)
}

/// Counting certificate for the complete bipartite seed: every internally
/// isolated large-side vertex needs both of its cycle neighbors on the
/// small side, and the small side can host at most `|small|` of them.
/// Strictly more isolated vertices than small-side vertices is therefore
/// a proof of non-Hamiltonicity.
pub fn certify_non_hamiltonian(small_side: &VertexSet, isolated_count: u64) -> bool {
    isolated_count > small_side.len() as u64
}

/// Cycle-edge demand the vertices outside `hubs` place on `hubs`: a
/// Hamilton cycle gives every vertex two cycle edges, and a vertex with
/// `d` neighbors outside `hubs` can route at most `min(d, 2)` of them
/// away from `hubs`, so it forces at least `max(0, 2 - d)` onto `hubs`.
pub fn hub_slot_demand(g: &Graph, hubs: &VertexSet) -> u64 {
    let n = g.vertex_count();
    let mut outside = VertexSet::new(n);
    for v in 0..n {
        if !hubs.contains(v) {
            outside.insert(v);
        }
    }
    outside
        .iter()
        .map(|v| {
            let d: u32 = g
                .row(v)
                .iter()
                .zip(outside.words())
                .map(|(&row, &mask)| (row & mask).count_ones())
                .sum();
            2u64.saturating_sub(u64::from(d))
        })
        .sum()
}

/// Counting certificate generalizing [`certify_non_hamiltonian`]: in a
/// Hamilton cycle the `hub_count` hub vertices supply at most
/// `2 * hub_count` cycle-edge endpoints, so a [`hub_slot_demand`] strictly
/// above that supply proves non-Hamiltonicity. With demand restricted to
/// isolated vertices (two slots each) this reduces to the isolate count
/// comparison; counting single-neighbor vertices as well makes it fire on
/// strictly more graphs, at equal cost.
pub fn certify_non_hamiltonian_by_demand(hub_count: usize, demand: u64) -> bool {
    demand > 2 * hub_count as u64
}

// ==================== Wilson score interval ====================

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
pub fn wilson_interval(
    successes: u64,
    trials: u64,
    z: f64,
) -> Result<(f64, f64), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::BadConfig("Wilson interval needs trials >= 1"));
    }
    if successes > trials {
        return Err(HarnessError::BadConfig("successes exceed trials"));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(HarnessError::BadConfig("z must be positive"));
    }
    let nf = trials as f64;
    let phat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

// ==================== parallel trial runner ====================

/// Run `count` trials with indices `first_trial..first_trial + count` on a
/// pool of `jobs` workers. Outcomes are merged by trial index, so the
/// result is independent of scheduling; every worker derives its streams
/// from the trial index alone.
pub fn run_trials(
    base: &TrialConfig,
    first_trial: u64,
    count: u64,
    jobs: usize,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    run_trials_on_seed(base, None, first_trial, count, jobs)
}

/// [`run_trials`] with a caller-provided seed graph; see
/// [`run_trial_on_seed`].
pub fn run_trials_on_seed(
    base: &TrialConfig,
    seed: Option<&Graph>,
    first_trial: u64,
    count: u64,
    jobs: usize,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    base.validate()?;
    let jobs = jobs.max(1);
    // Build built-in seeds once and share them across workers.
    let shared_seed = match base.seed_family {
        SeedFamily::Custom | SeedFamily::Unseeded => None,
        _ => build_seed(base)?,
    };
    let seed_ref = match base.seed_family {
        SeedFamily::Custom => seed,
        SeedFamily::Unseeded => None,
        _ => shared_seed.as_ref(),
    };
    if base.seed_family == SeedFamily::Custom && seed_ref.is_none() {
        return Err(HarnessError::BadConfig("custom seed family needs a graph"));
    }

    let next = AtomicU64::new(0);
    let slots: Mutex<Vec<(u64, TrialOutcome)>> = Mutex::new(Vec::with_capacity(count as usize));
    let failure: Mutex<Option<HarnessError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(count.max(1) as usize) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count || failure.lock().unwrap().is_some() {
                    return;
                }
                let cfg = base.with_trial(first_trial + i);
                match run_prepared_trial(&cfg, seed_ref) {
                    Ok(outcome) => slots.lock().unwrap().push((i, outcome)),
                    Err(e) => {
                        let mut f = failure.lock().unwrap();
                        if f.is_none() {
                            *f = Some(e);
                        }
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut results = slots.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    Ok(results.into_iter().map(|(_, o)| o).collect())
}

// ==================== threshold sweep ====================

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Threshold-relative coordinate: `p = c * ln(1/alpha) / n`.
    pub c: f64,
    pub p: f64,
    pub trials: u64,
    pub ham_successes: u64,
    pub ham_freq: f64,
    pub ham_lo: f64,
    pub ham_hi: f64,
    pub obs_successes: u64,
    pub obs_freq: f64,
    pub obs_lo: f64,
    pub obs_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Bisected coordinate where the success frequency crosses one half.
    pub c_half: Option<f64>,
    /// The same crossing as an edge probability.
    pub p_half: Option<f64>,
    /// Reference probability `ln(1/alpha) / n`.
    pub reference_p: f64,
    /// Why the bisection did not run, when it did not.
    pub diagnostic: Option<String>,
    /// Indices `i` where the success frequency drops from point `i` to
    /// `i + 1` by more than the confidence intervals can explain.
    pub monotonicity_violations: Vec<usize>,
}

const WILSON_Z: f64 = 1.96;
/// Trials per sweep point never collide with another point's stream ids:
/// each point owns a block of 2^20 trial indices.
const SWEEP_POINT_STRIDE: u64 = 1 << 20;
/// Bisection probes get point ids above any plausible grid length.
const BISECTION_POINT_BASE: u64 = 4096;
const MAX_BISECTION_PROBES: usize = 12;
const BISECTION_RELATIVE_WIDTH: f64 = 0.02;

fn sweep_point(
    base: &TrialConfig,
    point_id: u64,
    c: f64,
    trials: u64,
    jobs: usize,
    observer: &mut dyn FnMut(&TrialConfig, &[TrialOutcome]),
) -> Result<SweepPoint, HarnessError> {
    let cfg = base.at_constant(c)?;
    let outcomes = run_trials_on_seed(&cfg, None, point_id * SWEEP_POINT_STRIDE, trials, jobs)?;
    observer(&cfg, &outcomes);
    let ham = outcomes.iter().filter(|o| o.hamiltonian_found).count() as u64;
    let obs = outcomes.iter().filter(|o| o.obstruction_certified).count() as u64;
    let (ham_lo, ham_hi) = wilson_interval(ham, trials, WILSON_Z)?;
    let (obs_lo, obs_hi) = wilson_interval(obs, trials, WILSON_Z)?;
    Ok(SweepPoint {
        c,
        p: cfg.p,
        trials,
        ham_successes: ham,
        ham_freq: ham as f64 / trials as f64,
        ham_lo,
        ham_hi,
        obs_successes: obs,
        obs_freq: obs as f64 / trials as f64,
        obs_lo,
        obs_hi,
    })
}

/// Sweep the threshold coordinate over `c_grid` (sorted ascending), then
/// bisect the half-success crossing to 2% relative width or 12 probes,
/// whichever comes first. Degenerate grids (no crossing) report a
/// diagnostic instead of a crossing point.
pub fn sweep(
    base: &TrialConfig,
    c_grid: &[f64],
    trials_per_point: u64,
    jobs: usize,
) -> Result<SweepResult, HarnessError> {
    sweep_with_observer(base, c_grid, trials_per_point, jobs, &mut |_, _| {})
}

/// Like [`sweep`], but calls `observer` once per evaluated point (grid
/// points first, then bisection probes) with the point's configuration
/// and its trial outcomes, so callers can log trials without re-running
/// them.
pub fn sweep_with_observer(
    base: &TrialConfig,
    c_grid: &[f64],
    trials_per_point: u64,
    jobs: usize,
    observer: &mut dyn FnMut(&TrialConfig, &[TrialOutcome]),
) -> Result<SweepResult, HarnessError> {
    base.validate()?;
    if c_grid.is_empty() {
        return Err(HarnessError::BadConfig("sweep grid is empty"));
    }
    if c_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::BadConfig(
            "sweep grid must be strictly ascending",
        ));
    }
    if trials_per_point == 0 {
        return Err(HarnessError::BadConfig("trials per point must be >= 1"));
    }
    if trials_per_point >= SWEEP_POINT_STRIDE {
        return Err(HarnessError::BadConfig(
            "trials per point exceed the stream block size",
        ));
    }
    if c_grid.len() as u64 >= BISECTION_POINT_BASE {
        return Err(HarnessError::BadConfig("sweep grid is too long"));
    }

    let mut points = Vec::with_capacity(c_grid.len());
    for (i, &c) in c_grid.iter().enumerate() {
        points.push(sweep_point(
            base,
            i as u64,
            c,
            trials_per_point,
            jobs,
            observer,
        )?);
    }

    let monotonicity_violations: Vec<usize> = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].ham_hi < w[0].ham_lo)
        .map(|(i, _)| i)
        .collect();

    // Bracket the crossing: the last grid point below one half and the
    // first one at or above it. Everything past the last-below point is
    // at or above one half by construction.
    let last_below = points.iter().rposition(|pt| pt.ham_freq < 0.5);
    let bracket = match last_below {
        None => Err("every grid point is at or above one half"),
        Some(i) if i + 1 == points.len() => {
            if points.iter().all(|pt| pt.ham_freq < 0.5) {
                Err("every grid point is below one half")
            } else {
                Err("no crossing: the last grid point is below one half")
            }
        }
        Some(i) => Ok((points[i].c, points[i + 1].c)),
    };

    let (c_half, p_half, diagnostic) = match bracket {
        Err(msg) => (None, None, Some(msg.to_string())),
        Ok((mut lo, mut hi)) => {
            for probe in 0..MAX_BISECTION_PROBES {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= BISECTION_RELATIVE_WIDTH * mid {
                    break;
                }
                let pt = sweep_point(
                    base,
                    BISECTION_POINT_BASE + probe as u64,
                    mid,
                    trials_per_point,
                    jobs,
                    observer,
                )?;
                if pt.ham_freq >= 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let c = 0.5 * (lo + hi);
            (
                Some(c),
                Some(c * base.critical_degree() / base.n as f64),
                None,
            )
        }
    };

    Ok(SweepResult {
        points,
        c_half,
        p_half,
        reference_p: base.critical_degree() / base.n as f64,
        diagnostic,
        monotonicity_violations,
    })
}

impl SweepResult {
    /// CSV with one row per grid point and a crossing-point footer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,p,trials,ham_freq,ham_lo,ham_hi,obs_freq,obs_lo,obs_hi\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                pt.c,
                pt.p,
                pt.trials,
                pt.ham_freq,
                pt.ham_lo,
                pt.ham_hi,
                pt.obs_freq,
                pt.obs_lo,
                pt.obs_hi
            ));
        }
        let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        out.push_str(&format!(
            "# p_half={} c_half={}\n",
            fmt(self.p_half),
            fmt(self.c_half)
        ));
        if let Some(d) = &self.diagnostic {
            out.push_str(&format!("# {d}\n"));
        }
        out
    }

    /// Two-column TSV of the success curve.
    pub fn to_plotdata(&self) -> String {
        let mut out = String::new();
        for pt in &self.points {
            out.push_str(&format!("{}\t{}\n", pt.c, pt.ham_freq));
        }
        out
    }
}

// ==================== trial log ====================

/// Library version string stamped into every log line.
pub const VERSION: &str = concat!("hamlab-", env!("CARGO_PKG_VERSION"));

/// Hex SHA-256 of the canonical JSON encoding of a configuration.
pub fn config_hash(cfg: &TrialConfig) -> String {
    let encoded = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(encoded.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Serialize)]
struct LogRecord<'a> {
    cfg_hash: &'a str,
    version: &'a str,
    #[serde(flatten)]
    outcome: &'a TrialOutcome,
}

/// One JSON-lines record: every outcome field plus the configuration hash
/// and version.
pub fn log_line(cfg: &TrialConfig, outcome: &TrialOutcome) -> String {
    let hash = config_hash(cfg);
    let record = LogRecord {
        cfg_hash: &hash,
        version: VERSION,
        outcome,
    };
    serde_json::to_string(&record).expect("outcome serializes")
}
