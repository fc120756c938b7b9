//! Seeded random generation: named reproducible streams, sparse binomial
//! random graphs, uniform edge sequences without replacement, dense seed
//! families, and perturbation plans that split an edge budget into rounds.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexSet};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("edge probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("requested {m} edges but only {max} vertex pairs exist")]
    TooManyEdges { m: u64, max: u64 },
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("alpha {0} must lie strictly between 0 and 1")]
    AlphaOutOfRange(f64),
    #[error("epsilon {0} must be positive")]
    EpsilonNotPositive(f64),
    #[error("dense side would span {a} of {n} vertices; need both sides nonempty")]
    DegenerateSplit { a: usize, n: usize },
    #[error("degree floor {d} needs blobs on {s} vertices but only {n} exist")]
    BlobTooLarge { d: usize, s: usize, n: usize },
    #[error("two-round split needs edge probability at least {required:e}, got {p:e}")]
    TwoRoundInfeasible { p: f64, required: f64 },
}

// ==================== named random streams ====================

/// A named randomness source: a master seed plus a stream id.
///
/// The generator is ChaCha8 keyed by four successive SplitMix64 outputs
/// seeded from `master_seed` (little-endian into the 32-byte key), with
/// `stream_id` mapped to the cipher's stream counter. Draws from a stream
/// depend only on the `(master_seed, stream_id)` pair, never on what other
/// streams did or in which order they ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

// ==================== pair indexing ====================

/// Number of unordered vertex pairs on `n` vertices.
pub fn pair_count(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    n as u64 * (n as u64 - 1) / 2
}

/// The `k`-th pair `(u, v)`, `u < v`, in lexicographic order.
fn pair_from_index(n: usize, k: u64) -> (usize, usize) {
    debug_assert!(k < pair_count(n));
    let nn = n as u64;
    // Pairs whose first coordinate is below u.
    let cum = |u: u64| u * (2 * nn - u - 1) / 2;
    let (mut lo, mut hi) = (0u64, nn - 1);
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if cum(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = lo;
    let v = u + 1 + (k - cum(u));
    (u as usize, v as usize)
}

// ==================== binomial random graphs ====================

/// Binomial random graph: every vertex pair appears independently with
/// probability `p`. Runs in time proportional to the number of edges drawn,
/// by jumping geometrically through the lexicographic pair indices. The
/// same stream always yields the same graph.
pub fn sample_gnp(n: usize, p: f64, stream: RngStream) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::ProbabilityOutOfRange(p));
    }
    let mut g = Graph::new(n).map_err(|_| GenError::EmptyGraph)?;
    if p == 1.0 {
        for v in 0..n {
            g.add_row_range(v, 0, n);
        }
        g.refresh_edge_count();
        return Ok(g);
    }
    gnp_walk(n, p, stream, |a, b| {
        g.add_edge(a, b).expect("pair indices are in range");
    })?;
    Ok(g)
}

/// The edge set a [`sample_gnp`] call would draw, as a pair list in
/// lexicographic order, without allocating adjacency rows. Both functions
/// walk the identical jump sequence from the stream, so the list and the
/// graph are always interchangeable descriptions of the same draw. Pairs
/// are distinct and normalized to `u < v`.
pub fn gnp_edge_list(
    n: usize,
    p: f64,
    stream: RngStream,
) -> Result<Vec<(usize, usize)>, GenError> {
    if n == 0 {
        return Err(GenError::EmptyGraph);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::ProbabilityOutOfRange(p));
    }
    let mut out = Vec::new();
    if p == 1.0 {
        out.reserve(pair_count(n) as usize);
        for u in 0..n {
            for v in u + 1..n {
                out.push((u, v));
            }
        }
        return Ok(out);
    }
    gnp_walk(n, p, stream, |a, b| out.push((a, b)))?;
    Ok(out)
}

/// Shared jump walk behind [`sample_gnp`] and [`gnp_edge_list`]: visits
/// the drawn pairs in increasing lexicographic index order, consuming the
/// stream identically regardless of the visitor.
fn gnp_walk(
    n: usize,
    p: f64,
    stream: RngStream,
    mut visit: impl FnMut(usize, usize),
) -> Result<(), GenError> {
    debug_assert!((0.0..1.0).contains(&p) || p == 0.0);
    let total = pair_count(n);
    if p == 0.0 || total == 0 {
        return Ok(());
    }
    let mut rng = stream.rng();
    let ln_q = (1.0 - p).ln();
    let mut k = 0u64;
    while k < total {
        let u: f64 = rng.random();
        // Geometric jump: how many consecutive pairs stay absent.
        let skip = ((1.0 - u).ln() / ln_q).floor();
        if skip >= (total - k) as f64 {
            break;
        }
        k += skip as u64;
        let (a, b) = pair_from_index(n, k);
        visit(a, b);
        k += 1;
    }
    Ok(())
}

// ==================== uniform edge sequences ====================

/// A uniformly random ordered sequence of `m` distinct vertex pairs, drawn
/// without replacement from all pairs on `n` vertices. Sparse Fisher-Yates
/// over the pair indices: cost is proportional to `m`, not to the pair
/// count. Prefix-stable: the first `k` pairs of a draw agree with the
/// length-`k` draw from the same stream.
pub fn uniform_edge_stream(
    n: usize,
    m: u64,
    stream: RngStream,
) -> Result<Vec<(usize, usize)>, GenError> {
    let total = pair_count(n);
    if m > total {
        return Err(GenError::TooManyEdges { m, max: total });
    }
    let mut rng = stream.rng();
    let mut moved: HashMap<u64, u64> = HashMap::new();
    let mut out = Vec::with_capacity(m as usize);
    for i in 0..m {
        let j = rng.random_range(i..total);
        let pick = moved.get(&j).copied().unwrap_or(j);
        let displaced = moved.get(&i).copied().unwrap_or(i);
        moved.insert(j, displaced);
        out.push(pair_from_index(n, pick));
    }
    Ok(out)
}

// ==================== dense seed families ====================

/// `ceil(alpha * n)` with a rounding guard: products that land within
/// `1e-9` of an integer count as that integer, so binary float noise like
/// `0.3 * 10 = 3.0000000000000004` does not inflate the ceiling.
pub fn ceil_alpha_n(n: usize, alpha: f64) -> usize {
    let r = alpha * n as f64;
    let k = r.round();
    if (r - k).abs() < 1e-9 {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Complete bipartite seed with one deliberately small side.
#[derive(Debug, Clone)]
pub struct BipartiteSeed {
    pub graph: Graph,
    /// The dense side `A = {0, .., a-1}` with `a = ceil(alpha * n)`.
    pub small_side: VertexSet,
    /// The complement `B = {a, .., n-1}`.
    pub large_side: VertexSet,
}

/// Complete bipartite graph whose small side has `ceil(alpha * n)` vertices.
/// Minimum degree is `min(|A|, |B|)`, yet any cycle must alternate sides,
/// so the seed is as far from spanning-cycle territory as the degree floor
/// allows whenever `|A| < |B|`.
pub fn unbalanced_bipartite(n: usize, alpha: f64) -> Result<BipartiteSeed, GenError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GenError::AlphaOutOfRange(alpha));
    }
    if n == 0 {
        return Err(GenError::EmptyGraph);
    }
    let a = ceil_alpha_n(n, alpha);
    if a == 0 || a >= n {
        return Err(GenError::DegenerateSplit { a, n });
    }
    let mut g = Graph::new(n).expect("n > 0");
    for u in 0..a {
        g.add_row_range(u, a, n);
    }
    for v in a..n {
        g.add_row_range(v, 0, a);
    }
    g.refresh_edge_count();
    Ok(BipartiteSeed {
        graph: g,
        small_side: VertexSet::from_iter(n, 0..a),
        large_side: VertexSet::from_iter(n, a..n),
    })
}

/// Disjoint cliques, each on at least `d + 1` vertices where
/// `d = ceil(alpha * n)`, with the remainder folded into the last blob.
/// Minimum degree is `d` while the graph stays maximally disconnected.
pub fn clique_blobs(n: usize, alpha: f64) -> Result<Graph, GenError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GenError::AlphaOutOfRange(alpha));
    }
    if n == 0 {
        return Err(GenError::EmptyGraph);
    }
    let d = ceil_alpha_n(n, alpha);
    let s = d + 1;
    let q = n / s;
    if q == 0 {
        return Err(GenError::BlobTooLarge { d, s, n });
    }
    let mut g = Graph::new(n).expect("n > 0");
    for b in 0..q {
        let lo = b * s;
        let hi = if b + 1 == q { n } else { lo + s };
        for v in lo..hi {
            g.add_row_range(v, lo, hi);
        }
    }
    g.refresh_edge_count();
    Ok(g)
}

// ==================== perturbation plans ====================

/// Edge budget for perturbing a dense seed with degree floor `alpha * n`.
///
/// `critical_degree` is `ln(1 / alpha)`: random perturbations with expected
/// degree above it make the union Hamiltonian with high probability, below
/// it they can fail. The two-round schedule reserves
/// `(1 + epsilon/2) * critical_degree` for building an expander and
/// `epsilon * critical_degree / 4` for closing the cycle; the rounds sum to
/// `(1 + 3 epsilon/4) * critical_degree`, strictly inside the overall
/// `(1 + epsilon)` budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationPlan {
    pub n: usize,
    pub alpha: f64,
    pub epsilon: f64,
    /// `ln(1 / alpha)`, the threshold expected degree of the perturbation.
    pub critical_degree: f64,
    /// Dense-seed degree floor `ceil(alpha * n)`.
    pub d: usize,
    /// First-round expected degree `(1 + epsilon/2) * critical_degree`.
    pub lambda1: f64,
    /// Second-round expected degree `epsilon * critical_degree / 4`.
    pub lambda2: f64,
    /// One-shot edge probability; defaults to
    /// `(1 + epsilon) * critical_degree / n`.
    pub p: f64,
}

impl PerturbationPlan {
    /// Replace the one-shot edge probability, keeping the round budgets.
    pub fn with_edge_probability(mut self, p: f64) -> Result<Self, GenError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GenError::ProbabilityOutOfRange(p));
        }
        self.p = p;
        Ok(self)
    }

    /// Per-round edge probabilities `(lambda1 / n, lambda2 / n)`, or an
    /// error when their sum exceeds the one-shot probability `p` (then the
    /// two-round schedule would use more randomness than the budget grants).
    pub fn two_round_probabilities(&self) -> Result<(f64, f64), GenError> {
        let p1 = self.lambda1 / self.n as f64;
        let p2 = self.lambda2 / self.n as f64;
        if p1 + p2 > self.p + 1e-15 {
            return Err(GenError::TwoRoundInfeasible {
                p: self.p,
                required: p1 + p2,
            });
        }
        Ok((p1, p2))
    }
}

/// Build a perturbation plan for `n` vertices, degree-floor fraction
/// `alpha`, and headroom `epsilon`.
pub fn make_plan(n: usize, alpha: f64, epsilon: f64) -> Result<PerturbationPlan, GenError> {
    if n == 0 {
        return Err(GenError::EmptyGraph);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GenError::AlphaOutOfRange(alpha));
    }
    if !(epsilon > 0.0) {
        return Err(GenError::EpsilonNotPositive(epsilon));
    }
    let critical_degree = (1.0 / alpha).ln();
    let lambda1 = (1.0 + epsilon / 2.0) * critical_degree;
    let lambda2 = epsilon * critical_degree / 4.0;
    let p = (1.0 + epsilon) * critical_degree / n as f64;
    if p > 1.0 {
        return Err(GenError::ProbabilityOutOfRange(p));
    }
    Ok(PerturbationPlan {
        n,
        alpha,
        epsilon,
        critical_degree,
        d: ceil_alpha_n(n, alpha),
        lambda1,
        lambda2,
        p,
    })
}
