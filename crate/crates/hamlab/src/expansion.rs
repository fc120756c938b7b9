//! Vertex-expansion checking: exact certification by subset enumeration on
//! small graphs, randomized falsification at scale, banded expansion
//! properties of sparse random graphs, and the expander check for a
//! minimum-degree seed merged with one round of random edges.
//!
//! Randomized checks are one-sided: `Falsified` always carries a
//! re-verified witness, while `NotFalsified` only reports how many
//! candidate sets were tried.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gen::RngStream;
use crate::graph::{Graph, VertexSet};

#[derive(Debug, Error, PartialEq)]
pub enum ExpansionError {
    #[error("entropy argument {0} outside [0, 1]")]
    EntropyDomain(f64),
    #[error("invalid expansion spec: {0}")]
    BadSpec(&'static str),
    #[error("exact enumeration needs {needed} set checks, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("low band starts at {low_start}, beyond a quarter of the graph ({quarter})")]
    BandInfeasible { low_start: usize, quarter: usize },
    #[error("graphs have different vertex counts: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("seed minimum degree {found} is below the required {required}")]
    MinDegreeBelow { required: usize, found: usize },
}

/// Binary entropy in nats: -q ln q - (1-q) ln(1-q), zero at both ends.
pub fn binary_entropy(q: f64) -> Result<f64, ExpansionError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(ExpansionError::EntropyDomain(q));
    }
    let part = |x: f64| if x == 0.0 { 0.0 } else { -x * x.ln() };
    Ok(part(q) + part(1.0 - q))
}

// ==================== verdicts and witnesses ====================

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckVerdict {
    /// Every set in range was enumerated and none violates the bound.
    Certified,
    /// A violating witness was found and re-verified.
    Falsified,
    /// A randomized search found no violation; not a certificate.
    NotFalsified,
}

/// A set whose external neighborhood missed the required bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SetWitness {
    pub set: Vec<usize>,
    pub external: usize,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub verdict: CheckVerdict,
    pub sets_checked: u64,
    pub witness: Option<SetWitness>,
    pub note: Option<&'static str>,
}

impl ExpansionReport {
    fn not_falsified(sets_checked: u64, note: Option<&'static str>) -> Self {
        ExpansionReport {
            verdict: CheckVerdict::NotFalsified,
            sets_checked,
            witness: None,
            note,
        }
    }
}

/// What the external neighborhood of a candidate set must satisfy.
#[derive(Debug, Clone, Copy)]
enum Requirement {
    /// ext(X) >= factor * |X|.
    FactorAtLeast(f64),
    /// ext(X) > factor * |X|.
    FactorAbove(f64),
    /// ext(X) > n/2.
    MajorityAbove,
}

impl Requirement {
    fn violated(&self, external: usize, size: usize, n: usize) -> bool {
        match *self {
            Requirement::FactorAtLeast(f) => (external as f64) < f * size as f64,
            Requirement::FactorAbove(f) => (external as f64) <= f * size as f64,
            Requirement::MajorityAbove => 2 * external <= n,
        }
    }

    fn bound(&self, size: usize, n: usize) -> f64 {
        match *self {
            Requirement::FactorAtLeast(f) | Requirement::FactorAbove(f) => f * size as f64,
            Requirement::MajorityAbove => n as f64 / 2.0,
        }
    }
}

// ==================== exact checks ====================

/// Parameters for set-expansion checks: sets of size 1 through `k_bound`
/// must expand by `factor`; `sample_budget` caps how many sets are
/// measured (and guards exact enumeration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionSpec {
    pub k_bound: usize,
    pub factor: f64,
    pub sample_budget: u64,
}

impl ExpansionSpec {
    fn validate(&self, n: usize) -> Result<(), ExpansionError> {
        if self.k_bound == 0 || self.k_bound > n {
            return Err(ExpansionError::BadSpec("k_bound outside 1..=n"));
        }
        if !(self.factor > 0.0) || !self.factor.is_finite() {
            return Err(ExpansionError::BadSpec("factor must be positive"));
        }
        if self.sample_budget == 0 {
            return Err(ExpansionError::BadSpec("sample budget is zero"));
        }
        Ok(())
    }
}

fn binomial_saturating(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > u128::MAX / 2 {
            return u128::MAX;
        }
    }
    acc
}

/// Walk all k-subsets of 0..n in lexicographic order.
fn for_each_subset(
    n: usize,
    k: usize,
    f: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct Measurer<'a> {
    g: &'a Graph,
    set: VertexSet,
    ext: VertexSet,
}

impl<'a> Measurer<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.vertex_count();
        Measurer {
            g,
            set: VertexSet::new(n),
            ext: VertexSet::new(n),
        }
    }

    fn external_of_slice(&mut self, vs: &[usize]) -> usize {
        self.set.clear();
        for &v in vs {
            self.set.insert(v);
        }
        self.g.external_neighborhood_into(&self.set, &mut self.ext);
        self.ext.len()
    }

    fn external_of_set(&mut self, set: &VertexSet) -> usize {
        self.g.external_neighborhood_into(set, &mut self.ext);
        self.ext.len()
    }
}

/// Re-measure a claimed witness from scratch before handing it out.
fn verified_witness(
    g: &Graph,
    set: Vec<usize>,
    req: Requirement,
) -> SetWitness {
    let vs = VertexSet::from_iter(g.vertex_count(), set.iter().copied());
    let external = g.external_neighborhood(&vs).len();
    let size = set.len();
    assert!(
        req.violated(external, size, g.vertex_count()),
        "witness failed re-verification"
    );
    SetWitness {
        set,
        external,
        required: req.bound(size, g.vertex_count()),
    }
}

/// Enumerate every nonempty set of at most `k_bound` vertices and check
/// `ext(X) >= factor * |X|`. Errors if the enumeration would exceed the
/// budget. The witness, if any, is the first violation in size-then-lex
/// order.
pub fn check_expander_exact(
    g: &Graph,
    spec: &ExpansionSpec,
) -> Result<ExpansionReport, ExpansionError> {
    let n = g.vertex_count();
    spec.validate(n)?;
    let needed: u128 = (1..=spec.k_bound)
        .map(|s| binomial_saturating(n as u128, s as u128))
        .fold(0u128, |a, b| a.saturating_add(b));
    if needed > spec.sample_budget as u128 {
        return Err(ExpansionError::BudgetExceeded {
            needed,
            budget: spec.sample_budget,
        });
    }
    let mut m = Measurer::new(g);
    let mut checked = 0u64;
    let mut witness: Option<Vec<usize>> = None;
    for s in 1..=spec.k_bound {
        let found = for_each_subset(n, s, &mut |vs| {
            checked += 1;
            if Requirement::FactorAtLeast(spec.factor).violated(m.external_of_slice(vs), s, n) {
                witness = Some(vs.to_vec());
                true
            } else {
                false
            }
        });
        if found {
            break;
        }
    }
    Ok(match witness {
        Some(set) => ExpansionReport {
            verdict: CheckVerdict::Falsified,
            sets_checked: checked,
            witness: Some(verified_witness(g, set, Requirement::FactorAtLeast(spec.factor))),
            note: None,
        },
        None => ExpansionReport {
            verdict: CheckVerdict::Certified,
            sets_checked: checked,
            witness: None,
            note: None,
        },
    })
}

/// Largest k <= `max_k` such that every nonempty set of at most k
/// vertices satisfies ext(X) >= 2|X|; zero when a singleton already
/// fails. Exact, so the cumulative enumeration is budget-guarded.
pub fn exact_two_expansion_parameter(
    g: &Graph,
    max_k: usize,
    budget: u64,
) -> Result<usize, ExpansionError> {
    let n = g.vertex_count();
    if max_k == 0 || max_k > n {
        return Err(ExpansionError::BadSpec("max_k outside 1..=n"));
    }
    let needed: u128 = (1..=max_k)
        .map(|s| binomial_saturating(n as u128, s as u128))
        .fold(0u128, |a, b| a.saturating_add(b));
    if needed > budget as u128 {
        return Err(ExpansionError::BudgetExceeded { needed, budget });
    }
    let mut m = Measurer::new(g);
    for s in 1..=max_k {
        let violated = for_each_subset(n, s, &mut |vs| {
            Requirement::FactorAtLeast(2.0).violated(m.external_of_slice(vs), s, n)
        });
        if violated {
            return Ok(s - 1);
        }
    }
    Ok(max_k)
}

// ==================== randomized falsification ====================

/// Log-spaced sizes from `lo` to `hi`, always including both ends.
fn size_grid(lo: usize, hi: usize) -> Vec<usize> {
    debug_assert!(1 <= lo && lo <= hi);
    let mut out = vec![lo];
    let mut s = lo;
    while s < hi {
        s = (s.saturating_mul(2)).clamp(s + 1, hi);
        out.push(s);
    }
    out
}

/// Shared candidate machinery for the randomized falsifiers: a greedy
/// low-boundary grower, balls around low-degree seeds, and uniform
/// samples, all measured against one requirement.
struct Falsifier<'a> {
    g: &'a Graph,
    n: usize,
    deg: Vec<u32>,
    by_degree: Vec<usize>,
    m: Measurer<'a>,
    req: Requirement,
    lo: usize,
    hi: usize,
    checked: u64,
    budget: u64,
    witness: Option<Vec<usize>>,
}

impl<'a> Falsifier<'a> {
    fn new(g: &'a Graph, lo: usize, hi: usize, req: Requirement, budget: u64) -> Self {
        let n = g.vertex_count();
        let deg: Vec<u32> = (0..n).map(|v| g.degree(v) as u32).collect();
        let mut by_degree: Vec<usize> = (0..n).collect();
        by_degree.sort_by_key(|&v| (deg[v], v));
        Falsifier {
            g,
            n,
            deg,
            by_degree,
            m: Measurer::new(g),
            req,
            lo,
            hi,
            checked: 0,
            budget,
            witness: None,
        }
    }

    fn spent(&self) -> bool {
        self.witness.is_some() || self.checked >= self.budget
    }

    /// Measure one candidate; record it as the witness if it violates.
    fn consider(&mut self, set: &VertexSet) -> bool {
        let size = set.len();
        if size < self.lo || size > self.hi || self.spent() {
            return self.witness.is_some();
        }
        self.checked += 1;
        let ext = self.m.external_of_set(set);
        if self.req.violated(ext, size, self.n) {
            self.witness = Some(set.iter().collect());
            return true;
        }
        false
    }

    /// One greedy run up to `hi`: repeatedly add the vertex with the
    /// fewest edges leaving the current set (ties to the lowest index),
    /// measuring at every grid size. Gathers isolated vertices, pendant
    /// clusters, and other low-boundary structure.
    fn greedy(&mut self, grid: &[usize]) {
        let mut cnt_in = vec![0u32; self.n];
        let mut x = VertexSet::new(self.n);
        let mut next_grid = 0;
        let start = self.by_degree[0];
        let mut current = Some(start);
        for step in 1..=self.hi {
            let Some(v) = current else { break };
            x.insert(v);
            for w in self.g.neighbors(v) {
                cnt_in[w] += 1;
            }
            while next_grid < grid.len() && grid[next_grid] == step {
                if self.consider(&x) {
                    return;
                }
                next_grid += 1;
            }
            if self.spent() {
                return;
            }
            current = (0..self.n)
                .filter(|&u| !x.contains(u))
                .min_by_key(|&u| (self.deg[u] - cnt_in[u], u));
        }
    }

    /// Breadth-first ball around `seed`, measured at every grid size; a
    /// component that runs out below `hi` is measured as its own
    /// candidate (its boundary is empty).
    fn ball(&mut self, seed: usize, grid: &[usize]) {
        let mut x = VertexSet::new(self.n);
        let mut frontier = vec![seed];
        x.insert(seed);
        let mut size = 1;
        let mut next_grid = 0;
        loop {
            while next_grid < grid.len() && grid[next_grid] == size {
                if self.consider(&x) {
                    return;
                }
                next_grid += 1;
            }
            if self.spent() || size >= self.hi {
                return;
            }
            let mut next = Vec::new();
            'grow: for &v in &frontier {
                for w in self.g.neighbors(v) {
                    if !x.contains(w) {
                        x.insert(w);
                        next.push(w);
                        size += 1;
                        if size >= self.hi {
                            break 'grow;
                        }
                    }
                }
            }
            if next.is_empty() {
                // Component exhausted: a set with no boundary at all.
                self.consider(&x);
                return;
            }
            frontier = next;
        }
    }

    /// Uniformly random `s`-subsets.
    fn uniform(&mut self, s: usize, count: u64, idx: &mut [usize], rng: &mut ChaCha8Rng) {
        let mut x = VertexSet::new(self.n);
        let mut swaps = Vec::with_capacity(s);
        for _ in 0..count {
            if self.spent() {
                return;
            }
            x.clear();
            swaps.clear();
            for i in 0..s {
                let j = rng.random_range(i..self.n);
                idx.swap(i, j);
                swaps.push(j);
                x.insert(idx[i]);
            }
            for (i, &j) in swaps.iter().enumerate().rev() {
                idx.swap(i, j);
            }
            if self.consider(&x) {
                return;
            }
        }
    }

    fn run(mut self, rng: &mut ChaCha8Rng) -> ExpansionReport {
        let grid = size_grid(self.lo, self.hi);
        self.greedy(&grid);
        if self.witness.is_none() {
            let seeds: Vec<usize> = self.by_degree.iter().copied().take(8).collect();
            for seed in seeds {
                self.ball(seed, &grid);
                if self.spent() {
                    break;
                }
            }
        }
        if self.witness.is_none() && !self.spent() {
            for _ in 0..4 {
                let seed = rng.random_range(0..self.n);
                self.ball(seed, &grid);
                if self.spent() {
                    break;
                }
            }
        }
        if self.witness.is_none() && !self.spent() {
            let remaining = self.budget.saturating_sub(self.checked);
            let per_size = (remaining / grid.len() as u64).max(1);
            let mut idx: Vec<usize> = (0..self.n).collect();
            for &s in &grid {
                self.uniform(s, per_size, &mut idx, rng);
                if self.spent() {
                    break;
                }
            }
        }
        match self.witness {
            Some(mut set) => {
                set.sort_unstable();
                ExpansionReport {
                    verdict: CheckVerdict::Falsified,
                    sets_checked: self.checked,
                    witness: Some(verified_witness(self.g, set, self.req)),
                    note: None,
                }
            }
            None => ExpansionReport::not_falsified(self.checked, None),
        }
    }
}

/// Randomized search for a set of at most `k_bound` vertices violating
/// `ext(X) >= factor * |X|`: a greedy low-boundary grower, balls around
/// low-degree seeds, and uniform samples over a log-spaced size grid.
/// One-sided: `NotFalsified` is not a certificate.
pub fn falsify_expander_randomized(
    g: &Graph,
    spec: &ExpansionSpec,
    stream: RngStream,
) -> Result<ExpansionReport, ExpansionError> {
    spec.validate(g.vertex_count())?;
    let mut rng = stream.rng();
    Ok(Falsifier::new(
        g,
        1,
        spec.k_bound,
        Requirement::FactorAtLeast(spec.factor),
        spec.sample_budget,
    )
    .run(&mut rng))
}

// ==================== banded properties of sparse random graphs ====================

/// Size bands for the expansion properties of a sparse random graph with
/// expected degree `lambda` laid over a seed of minimum degree `d`. Sets
/// in the low band must expand by the factor `lambda / k_factor`; sets in
/// the high band (when it is nonempty) must see a majority of the graph;
/// the bands never extend past a quarter of the vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    n: usize,
    d: usize,
    lambda: f64,
    k_factor: f64,
}

impl BandParams {
    pub fn new(n: usize, d: usize, lambda: f64, k_factor: f64) -> Result<Self, ExpansionError> {
        if n < 8 {
            return Err(ExpansionError::BadSpec("need at least 8 vertices"));
        }
        if d == 0 || d > n {
            return Err(ExpansionError::BadSpec("seed degree outside 1..=n"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ExpansionError::BadSpec("lambda must be positive"));
        }
        if !(k_factor > 0.0) || !k_factor.is_finite() {
            return Err(ExpansionError::BadSpec("k_factor must be positive"));
        }
        let p = BandParams {
            n,
            d,
            lambda,
            k_factor,
        };
        let (lo, hi) = p.low_band_unchecked();
        if lo > hi {
            return Err(ExpansionError::BandInfeasible {
                low_start: lo,
                quarter: p.quarter(),
            });
        }
        Ok(p)
    }

    pub fn quarter(&self) -> usize {
        self.n / 4
    }

    /// Required expansion factor for low-band sets.
    pub fn expansion_factor(&self) -> f64 {
        self.lambda / self.k_factor
    }

    fn mid(&self) -> usize {
        (self.k_factor * self.n as f64 / (2.0 * self.lambda)).floor() as usize
    }

    fn low_band_unchecked(&self) -> (usize, usize) {
        let lo = (self.k_factor * self.d as f64 / self.lambda).ceil().max(1.0) as usize;
        (lo, self.mid().min(self.quarter()))
    }

    /// Inclusive size range for the factor-expansion property.
    pub fn low_band(&self) -> (usize, usize) {
        self.low_band_unchecked()
    }

    /// Inclusive size range for the majority-neighborhood property;
    /// `None` when the low band already reaches the quarter mark.
    pub fn high_band(&self) -> Option<(usize, usize)> {
        let q = self.quarter();
        let mid = self.mid();
        (mid < q).then_some((mid + 1, q))
    }

    /// Degree requirement relative to graph size, recorded for context
    /// (no threshold is enforced).
    pub fn d_over_log_n(&self) -> f64 {
        self.d as f64 / (self.n as f64).ln()
    }
}

/// A disjoint pair of large sets with no edge between them.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWitness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutReport {
    pub verdict: CheckVerdict,
    pub pairs_checked: u64,
    pub witness: Option<PairWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleReport {
    pub low_band: ExpansionReport,
    pub high_band: ExpansionReport,
    pub quarter_cut: CutReport,
    pub d_over_log_n: f64,
}

impl TripleReport {
    pub fn any_falsified(&self) -> bool {
        self.low_band.verdict == CheckVerdict::Falsified
            || self.high_band.verdict == CheckVerdict::Falsified
            || self.quarter_cut.verdict == CheckVerdict::Falsified
    }
}

/// First `want` vertices in component-contiguous order: breadth-first
/// traversals seeded in the given order, each component emitted whole.
/// A set that is cut off from the rest of the graph comes out as a
/// prefix of this order.
fn component_order(g: &Graph, seeds: &[usize], want: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut visited = VertexSet::new(n);
    let mut order = Vec::with_capacity(want);
    for &seed in seeds {
        if order.len() >= want {
            break;
        }
        if visited.contains(seed) {
            continue;
        }
        visited.insert(seed);
        order.push(seed);
        let mut cursor = order.len() - 1;
        while cursor < order.len() {
            let v = order[cursor];
            cursor += 1;
            for w in g.neighbors(v) {
                if !visited.contains(w) {
                    visited.insert(w);
                    order.push(w);
                }
            }
        }
    }
    order.truncate(want);
    order
}

fn sets_joined(g: &Graph, a: &VertexSet, b: &VertexSet) -> bool {
    a.iter().any(|v| {
        g.row(v)
            .iter()
            .zip(b.words())
            .any(|(&r, &o)| r & o != 0)
    })
}

/// Check the three expansion properties of a random edge layer: low-band
/// sets expand by `lambda / k_factor` (strictly), high-band sets see more
/// than half the graph (strictly), and any two disjoint quarter-size sets
/// are joined by an edge. Randomized and one-sided, with an adversarial
/// lowest-degree pair thrown in for the cut property.
pub fn check_expansion_triple(
    g: &Graph,
    params: &BandParams,
    stream: RngStream,
    budget: u64,
) -> Result<TripleReport, ExpansionError> {
    if g.vertex_count() != params.n {
        return Err(ExpansionError::SizeMismatch(g.vertex_count(), params.n));
    }
    if budget == 0 {
        return Err(ExpansionError::BadSpec("sample budget is zero"));
    }
    let mut rng = stream.rng();
    let n = params.n;
    let q = params.quarter();

    let (lo, hi) = params.low_band();
    let low_band = Falsifier::new(
        g,
        lo,
        hi,
        Requirement::FactorAbove(params.expansion_factor()),
        budget,
    )
    .run(&mut rng);

    let high_band = match params.high_band() {
        Some((lo2, hi2)) => {
            Falsifier::new(g, lo2, hi2, Requirement::MajorityAbove, budget).run(&mut rng)
        }
        None => ExpansionReport::not_falsified(0, Some("band is empty at these parameters")),
    };

    // Quarter cut: two deterministic adversarial pairs (lowest-degree
    // halves, and component-guided halves that expose a disconnected
    // quarter exactly), then random disjoint pairs.
    let mut pairs_checked = 0u64;
    let mut witness = None;
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (g.degree(v), v));
    let adv_a = VertexSet::from_iter(n, by_degree[..q].iter().copied());
    let adv_b = VertexSet::from_iter(n, by_degree[q..2 * q].iter().copied());
    pairs_checked += 1;
    if !sets_joined(g, &adv_a, &adv_b) {
        witness = Some(PairWitness {
            a: adv_a.iter().collect(),
            b: adv_b.iter().collect(),
        });
    }
    if witness.is_none() {
        let order = component_order(g, &by_degree, 2 * q);
        let ca = VertexSet::from_iter(n, order[..q].iter().copied());
        let cb = VertexSet::from_iter(n, order[q..2 * q].iter().copied());
        pairs_checked += 1;
        if !sets_joined(g, &ca, &cb) {
            witness = Some(PairWitness {
                a: ca.iter().collect(),
                b: cb.iter().collect(),
            });
        }
    }
    if witness.is_none() {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut swaps = Vec::with_capacity(2 * q);
        for _ in 0..32 {
            swaps.clear();
            for i in 0..2 * q {
                let j = rng.random_range(i..n);
                idx.swap(i, j);
                swaps.push(j);
            }
            let a = VertexSet::from_iter(n, idx[..q].iter().copied());
            let b = VertexSet::from_iter(n, idx[q..2 * q].iter().copied());
            for (i, &j) in swaps.iter().enumerate().rev() {
                idx.swap(i, j);
            }
            pairs_checked += 1;
            if !sets_joined(g, &a, &b) {
                witness = Some(PairWitness {
                    a: a.iter().collect(),
                    b: b.iter().collect(),
                });
                break;
            }
        }
    }
    let quarter_cut = CutReport {
        verdict: if witness.is_some() {
            CheckVerdict::Falsified
        } else {
            CheckVerdict::NotFalsified
        },
        pairs_checked,
        witness,
    };

    Ok(TripleReport {
        low_band,
        high_band,
        quarter_cut,
        d_over_log_n: params.d_over_log_n(),
    })
}

// ==================== seeded union check ====================

/// Expander check for a minimum-degree seed merged with one round of
/// random edges.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionReport {
    pub connected: bool,
    /// Sets of at most this size are certified analytically: each vertex
    /// keeps at least d - |X| + 1 seed neighbors outside X, which is at
    /// least 2|X| whenever 3|X| <= d + 1.
    pub certified_up_to: usize,
    /// Randomized two-expansion falsifier for sizes above the analytic
    /// bound, up to a quarter of the graph.
    pub randomized: ExpansionReport,
    pub quarter: usize,
    pub seed_min_degree: usize,
}

impl UnionReport {
    /// Connected and no violation found (one-sided).
    pub fn holds(&self) -> bool {
        self.connected && self.randomized.verdict != CheckVerdict::Falsified
    }
}

/// Check that seed ∪ random edges is a connected two-expander up to a
/// quarter of the vertices: exact connectivity, an analytic branch for
/// small sets from the seed's minimum degree `d`, and a randomized
/// falsifier for everything larger.
pub fn check_seeded_union(
    seed: &Graph,
    random_part: &Graph,
    d: usize,
    stream: RngStream,
    budget: u64,
) -> Result<UnionReport, ExpansionError> {
    let n = seed.vertex_count();
    if random_part.vertex_count() != n {
        return Err(ExpansionError::SizeMismatch(n, random_part.vertex_count()));
    }
    if budget == 0 {
        return Err(ExpansionError::BadSpec("sample budget is zero"));
    }
    let min_deg = seed.min_degree();
    if min_deg < d {
        return Err(ExpansionError::MinDegreeBelow {
            required: d,
            found: min_deg,
        });
    }
    let union = seed.union(random_part).expect("equal sizes");
    let connected = union.is_connected();
    let certified_up_to = ((d + 1) / 3).min(n / 4);
    let quarter = n / 4;
    let randomized = if certified_up_to >= quarter {
        ExpansionReport::not_falsified(0, Some("analytic bound covers the whole range"))
    } else {
        let mut rng = stream.rng();
        Falsifier::new(
            &union,
            certified_up_to + 1,
            quarter,
            Requirement::FactorAtLeast(2.0),
            budget,
        )
        .run(&mut rng)
    };
    Ok(UnionReport {
        connected,
        certified_up_to,
        randomized,
        quarter,
        seed_min_degree: min_deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{clique_blobs, sample_gnp, unbalanced_bipartite, RngStream};

    fn path_graph(n: usize) -> Graph {
        let mut g = Graph::new(n).unwrap();
        for v in 1..n {
            g.add_edge(v - 1, v).unwrap();
        }
        g
    }

    fn cycle_graph(n: usize) -> Graph {
        let mut g = path_graph(n);
        g.add_edge(n - 1, 0).unwrap();
        g
    }

    fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n).unwrap();
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    /// Copy of `g` with every edge incident to `s` removed.
    fn strip(g: &Graph, s: &VertexSet) -> Graph {
        let mut out = Graph::new(g.vertex_count()).unwrap();
        for (u, v) in g.edges() {
            if !s.contains(u) && !s.contains(v) {
                out.add_edge(u, v).unwrap();
            }
        }
        out
    }

    // ---- entropy ----

    #[test]
    fn entropy_matches_reference_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
        assert!((binary_entropy(0.25).unwrap() - 0.5623351446188083).abs() < 1e-14);
        assert!((16.0 * binary_entropy(0.25).unwrap() - 8.997362313900933).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_symmetric_and_rejects_bad_input() {
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let a = binary_entropy(q).unwrap();
            let b = binary_entropy(1.0 - q).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    // ---- exact checks ----

    #[test]
    fn exact_check_on_worked_examples() {
        let spec1 = ExpansionSpec {
            k_bound: 1,
            factor: 2.0,
            sample_budget: 1_000,
        };
        let r = check_expander_exact(&cycle_graph(5), &spec1).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Certified);
        assert_eq!(r.sets_checked, 5);

        let r = check_expander_exact(&path_graph(5), &spec1).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Falsified);
        let w = r.witness.unwrap();
        assert_eq!(w.set, vec![0]);
        assert_eq!(w.external, 1);
        assert_eq!(w.required, 2.0);

        let spec2 = ExpansionSpec {
            k_bound: 2,
            factor: 2.0,
            sample_budget: 1_000,
        };
        let r = check_expander_exact(&complete(9), &spec2).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Certified);
        assert_eq!(r.sets_checked, 9 + 36);
    }

    #[test]
    fn exact_check_guards_its_budget() {
        let spec = ExpansionSpec {
            k_bound: 10,
            factor: 2.0,
            sample_budget: 100,
        };
        assert!(matches!(
            check_expander_exact(&complete(30), &spec).unwrap_err(),
            ExpansionError::BudgetExceeded { .. }
        ));
    }

    #[test]
    fn two_expansion_parameter_on_worked_examples() {
        let budget = 1 << 20;
        assert_eq!(exact_two_expansion_parameter(&path_graph(5), 4, budget).unwrap(), 0);
        assert_eq!(exact_two_expansion_parameter(&cycle_graph(5), 4, budget).unwrap(), 1);
        assert_eq!(exact_two_expansion_parameter(&complete(9), 4, budget).unwrap(), 3);
        assert_eq!(exact_two_expansion_parameter(&complete(9), 2, budget).unwrap(), 2);
        // Two against four, complete bipartite: singletons double, two
        // large-side vertices only reach the small side.
        let mut g = Graph::new(6).unwrap();
        for a in 0..2 {
            for b in 2..6 {
                g.add_edge(a, b).unwrap();
            }
        }
        assert_eq!(exact_two_expansion_parameter(&g, 4, budget).unwrap(), 1);
    }

    // ---- randomized falsification ----

    #[test]
    fn falsifier_catches_a_long_path_endpoint() {
        let g = path_graph(1000);
        let spec = ExpansionSpec {
            k_bound: 250,
            factor: 2.0,
            sample_budget: 5_000,
        };
        let r = falsify_expander_randomized(&g, &spec, RngStream::new(11, 0)).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Falsified);
        let w = r.witness.unwrap();
        assert!((w.external as f64) < 2.0 * w.set.len() as f64);
    }

    #[test]
    fn falsifier_leaves_complete_graphs_alone() {
        let g = complete(300);
        let spec = ExpansionSpec {
            k_bound: 75,
            factor: 2.0,
            sample_budget: 2_000,
        };
        let r = falsify_expander_randomized(&g, &spec, RngStream::new(12, 0)).unwrap();
        assert_eq!(r.verdict, CheckVerdict::NotFalsified);
        assert!(r.sets_checked > 0);
    }

    #[test]
    fn falsifier_finds_a_stripped_component() {
        // Isolate vertices 100..140 inside a sparse random graph: the
        // component-exhausted ball and the greedy isolated-vertex pool
        // both expose them.
        let base = sample_gnp(400, 0.02, RngStream::new(13, 0)).unwrap();
        let s = VertexSet::from_iter(400, 100..140);
        let g = strip(&base, &s);
        let spec = ExpansionSpec {
            k_bound: 100,
            factor: 2.0,
            sample_budget: 3_000,
        };
        let r = falsify_expander_randomized(&g, &spec, RngStream::new(13, 1)).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Falsified);
        assert_eq!(r.witness.unwrap().external, 0);
    }

    #[test]
    fn falsifier_finds_a_planted_low_boundary_path() {
        // Vertices 0..60 form a path attached to a dense graph by a
        // single edge: ext of the path prefix stays tiny.
        let mut g = sample_gnp(300, 0.1, RngStream::new(14, 0)).unwrap();
        let mut h = Graph::new(300).unwrap();
        for (u, v) in g.edges() {
            if u >= 60 && v >= 60 {
                h.add_edge(u, v).unwrap();
            }
        }
        for v in 1..60 {
            h.add_edge(v - 1, v).unwrap();
        }
        h.add_edge(59, 60).unwrap();
        g = h;
        let spec = ExpansionSpec {
            k_bound: 75,
            factor: 2.0,
            sample_budget: 3_000,
        };
        let r = falsify_expander_randomized(&g, &spec, RngStream::new(14, 1)).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Falsified);
        let w = r.witness.unwrap();
        assert!(w.set.iter().all(|&v| v < 61));
    }

    #[test]
    fn falsifier_is_deterministic() {
        let g = sample_gnp(200, 0.05, RngStream::new(15, 0)).unwrap();
        let spec = ExpansionSpec {
            k_bound: 50,
            factor: 2.0,
            sample_budget: 1_000,
        };
        let a = falsify_expander_randomized(&g, &spec, RngStream::new(15, 1)).unwrap();
        let b = falsify_expander_randomized(&g, &spec, RngStream::new(15, 1)).unwrap();
        assert_eq!(a, b);
    }

    // ---- banded properties ----

    #[test]
    fn band_arithmetic_matches_hand_computation() {
        // n=400, d=8, lambda=40, K=16: low band [ceil(3.2)=4, min(80,100)],
        // high band (80, 100], factor 2.5.
        let p = BandParams::new(400, 8, 40.0, 16.0).unwrap();
        assert_eq!(p.low_band(), (4, 80));
        assert_eq!(p.high_band(), Some((81, 100)));
        assert!((p.expansion_factor() - 2.5).abs() < 1e-12);
        assert_eq!(p.quarter(), 100);
    }

    #[test]
    fn band_clamps_at_a_quarter_and_rejects_infeasible_starts() {
        // Sparse regime: mid = K n/(2 lambda) far beyond n/4, so the low
        // band is clamped and the high band disappears.
        let p = BandParams::new(20_000, 400, 4.89, 16.0).unwrap();
        let (lo, hi) = p.low_band();
        assert_eq!(lo, (16.0 * 400.0 / 4.89 / 1.0_f64).ceil() as usize);
        assert_eq!(hi, 5_000);
        assert_eq!(p.high_band(), None);
        // Low start beyond the quarter mark is unusable.
        let err = BandParams::new(100, 90, 4.0, 16.0).unwrap_err();
        assert!(matches!(err, ExpansionError::BandInfeasible { .. }));
    }

    #[test]
    fn triple_check_passes_on_a_dense_random_layer() {
        let params = BandParams::new(400, 8, 40.0, 16.0).unwrap();
        let g = sample_gnp(400, 0.1, RngStream::new(16, 0)).unwrap();
        let r = check_expansion_triple(&g, &params, RngStream::new(16, 1), 600).unwrap();
        assert_eq!(r.low_band.verdict, CheckVerdict::NotFalsified);
        assert_eq!(r.high_band.verdict, CheckVerdict::NotFalsified);
        assert_eq!(r.quarter_cut.verdict, CheckVerdict::NotFalsified);
        assert!(!r.any_falsified());
        assert!((r.d_over_log_n - 8.0 / 400.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn triple_check_catches_planted_violations() {
        let params = BandParams::new(400, 8, 40.0, 16.0).unwrap();
        let base = sample_gnp(400, 0.1, RngStream::new(17, 0)).unwrap();

        // Low band: isolate 40 vertices (inside [4, 80]).
        let s = VertexSet::from_iter(400, 0..40);
        let g = strip(&base, &s);
        let r = check_expansion_triple(&g, &params, RngStream::new(17, 1), 600).unwrap();
        assert_eq!(r.low_band.verdict, CheckVerdict::Falsified);

        // High band: isolate 90 vertices (inside (80, 100]).
        let s = VertexSet::from_iter(400, 0..90);
        let g = strip(&base, &s);
        let r = check_expansion_triple(&g, &params, RngStream::new(17, 2), 600).unwrap();
        assert_eq!(r.high_band.verdict, CheckVerdict::Falsified);

        // Quarter cut: cut all edges between 0..100 and the rest but keep
        // the inside of the quarter intact.
        let mut g = Graph::new(400).unwrap();
        for (u, v) in base.edges() {
            if (u < 100) == (v < 100) {
                g.add_edge(u, v).unwrap();
            }
        }
        let r = check_expansion_triple(&g, &params, RngStream::new(17, 3), 600).unwrap();
        assert_eq!(r.quarter_cut.verdict, CheckVerdict::Falsified);
        let w = r.quarter_cut.witness.unwrap();
        assert!(w.a.iter().all(|&v| v < 100));
        assert!(w.b.iter().all(|&v| v >= 100));
    }

    #[test]
    fn triple_check_falsifies_the_edgeless_graph() {
        let params = BandParams::new(400, 8, 40.0, 16.0).unwrap();
        let g = Graph::new(400).unwrap();
        let r = check_expansion_triple(&g, &params, RngStream::new(18, 0), 600).unwrap();
        assert_eq!(r.low_band.verdict, CheckVerdict::Falsified);
        assert_eq!(r.quarter_cut.verdict, CheckVerdict::Falsified);
    }

    // ---- seeded union ----

    #[test]
    fn union_check_certifies_blob_seed_with_random_layer() {
        // 44 cliques of at least 14 on 624 vertices (degree floor 13),
        // random layer dense enough to join them.
        let seed = clique_blobs(624, 0.02).unwrap();
        let d = 13;
        let r1 = sample_gnp(624, 12.0 / 624.0, RngStream::new(19, 0)).unwrap();
        let report = check_seeded_union(&seed, &r1, d, RngStream::new(19, 1), 2_000).unwrap();
        assert!(report.connected);
        assert_eq!(report.certified_up_to, 4);
        assert_eq!(report.randomized.verdict, CheckVerdict::NotFalsified);
        assert!(report.holds());
    }

    #[test]
    fn union_check_falsifies_bipartite_seed_with_no_random_layer() {
        let seed = unbalanced_bipartite(20, 0.2).unwrap();
        let empty = Graph::new(20).unwrap();
        let report = check_seeded_union(&seed.graph, &empty, 4, RngStream::new(20, 0), 500).unwrap();
        assert!(report.connected);
        assert_eq!(report.certified_up_to, 1);
        assert_eq!(report.randomized.verdict, CheckVerdict::Falsified);
        assert!(!report.holds());
        // Direct measurement of the expected witness shape: any three
        // large-side vertices see only the four-vertex small side.
        let w = report.randomized.witness.unwrap();
        assert!(w.set.len() >= 3);
        assert!((w.external as f64) < 2.0 * w.set.len() as f64);
        let direct = VertexSet::from_iter(20, seed.large_side.iter().take(3));
        assert_eq!(seed.graph.external_neighborhood(&direct).len(), 4);
    }

    #[test]
    fn union_check_validates_inputs() {
        let seed = unbalanced_bipartite(20, 0.2).unwrap();
        let empty = Graph::new(20).unwrap();
        assert!(matches!(
            check_seeded_union(&seed.graph, &Graph::new(10).unwrap(), 4, RngStream::new(0, 0), 10)
                .unwrap_err(),
            ExpansionError::SizeMismatch(..)
        ));
        assert!(matches!(
            check_seeded_union(&seed.graph, &empty, 10, RngStream::new(0, 0), 10).unwrap_err(),
            ExpansionError::MinDegreeBelow {
                required: 10,
                found: 4
            }
        ));
    }

    #[test]
    fn union_check_reports_disconnected_unions() {
        let seed = clique_blobs(100, 0.1).unwrap();
        let empty = Graph::new(100).unwrap();
        let report = check_seeded_union(&seed, &empty, 10, RngStream::new(21, 0), 500).unwrap();
        assert!(!report.connected);
        assert!(!report.holds());
    }

    // ---- grid ----

    #[test]
    fn size_grid_includes_both_ends() {
        assert_eq!(size_grid(1, 1), vec![1]);
        assert_eq!(size_grid(1, 10), vec![1, 2, 4, 8, 10]);
        assert_eq!(size_grid(5, 40), vec![5, 10, 20, 40]);
        assert_eq!(size_grid(7, 8), vec![7, 8]);
    }
}
