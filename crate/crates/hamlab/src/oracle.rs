//! Exact Hamiltonicity and longest-path answers for small graphs.
//!
//! Two independent methods are kept side by side on purpose: a subset
//! dynamic program over (covered set, endpoint) states, and a pruned
//! permutation search. The rest of the crate treats the DP as ground truth;
//! the permutation search exists to cross-check the DP and is capped at a
//! smaller size. A Hamilton cycle needs at least 3 vertices throughout.

use crate::graph::Graph;
use thiserror::Error;

/// Size and memory caps for the exact routines.
#[derive(Debug, Clone)]
pub struct OracleLimit {
    /// Largest n the subset DP accepts.
    pub max_n_dp: usize,
    /// Largest n the permutation search accepts.
    pub max_n_bruteforce: usize,
    /// Refuse DP instances whose nominal state table (2^n * n bytes) exceeds this.
    pub memory_budget_bytes: u64,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit {
            max_n_dp: 20,
            max_n_bruteforce: 9,
            memory_budget_bytes: 4 << 30,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph on {n} vertices exceeds exact-solver cap {max}")]
    TooLarge { n: usize, max: usize },
    #[error("state table would need {required} bytes, budget is {budget}")]
    MemoryBudget { required: u64, budget: u64 },
}

fn check_dp(n: usize, limits: &OracleLimit) -> Result<(), OracleError> {
    if n > limits.max_n_dp {
        return Err(OracleError::TooLarge {
            n,
            max: limits.max_n_dp,
        });
    }
    let required = (1u64 << n) * n as u64;
    if required > limits.memory_budget_bytes {
        return Err(OracleError::MemoryBudget {
            required,
            budget: limits.memory_budget_bytes,
        });
    }
    Ok(())
}

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    let n = g.vertex_count();
    debug_assert!(n <= 32);
    (0..n)
        .map(|v| {
            let mut m = 0u32;
            for w in g.neighbors(v) {
                m |= 1 << w;
            }
            m
        })
        .collect()
}

/// Endpoint sets of paths anchored at `start`: `dp[mask]` holds a bit for
/// every `e` such that some path covers exactly `mask` and runs `start..e`.
fn anchored_endpoints(adj: &[u32], start: usize) -> Vec<u32> {
    let n = adj.len();
    let mut dp = vec![0u32; 1 << n];
    dp[1 << start] = 1 << start;
    for mask in 0..(1u32 << n) {
        let ends = dp[mask as usize];
        if ends == 0 || mask >> start & 1 == 0 {
            continue;
        }
        let mut e_bits = ends;
        while e_bits != 0 {
            let e = e_bits.trailing_zeros() as usize;
            e_bits &= e_bits - 1;
            let mut cand = adj[e] & !mask;
            while cand != 0 {
                let w = cand.trailing_zeros();
                cand &= cand - 1;
                dp[(mask | (1 << w)) as usize] |= 1 << w;
            }
        }
    }
    dp
}

/// Endpoint sets of paths with a free starting point.
fn free_endpoints(adj: &[u32]) -> Vec<u32> {
    let n = adj.len();
    let mut dp = vec![0u32; 1 << n];
    for v in 0..n {
        dp[1 << v] = 1 << v;
    }
    for mask in 0..(1u32 << n) {
        let ends = dp[mask as usize];
        if ends == 0 {
            continue;
        }
        let mut e_bits = ends;
        while e_bits != 0 {
            let e = e_bits.trailing_zeros() as usize;
            e_bits &= e_bits - 1;
            let mut cand = adj[e] & !mask;
            while cand != 0 {
                let w = cand.trailing_zeros();
                cand &= cand - 1;
                dp[(mask | (1 << w)) as usize] |= 1 << w;
            }
        }
    }
    dp
}

/// Exact Hamiltonicity by subset DP anchored at vertex 0.
pub fn hamiltonian_exact(g: &Graph, limits: &OracleLimit) -> Result<bool, OracleError> {
    let n = g.vertex_count();
    check_dp(n, limits)?;
    if n < 3 {
        return Ok(false);
    }
    let adj = adjacency_masks(g);
    let dp = anchored_endpoints(&adj, 0);
    let full = ((1u64 << n) - 1) as u32;
    Ok(dp[full as usize] & adj[0] != 0)
}

/// A concrete Hamilton cycle if one exists, as the vertex sequence starting
/// at 0. Deterministic: backtracking always picks the lowest vertex.
pub fn hamilton_cycle_exact(
    g: &Graph,
    limits: &OracleLimit,
) -> Result<Option<Vec<usize>>, OracleError> {
    let n = g.vertex_count();
    check_dp(n, limits)?;
    if n < 3 {
        return Ok(None);
    }
    let adj = adjacency_masks(g);
    let dp = anchored_endpoints(&adj, 0);
    let full = ((1u64 << n) - 1) as u32;
    let closing = dp[full as usize] & adj[0];
    if closing == 0 {
        return Ok(None);
    }
    let mut rev = Vec::with_capacity(n);
    let mut e = closing.trailing_zeros() as usize;
    let mut mask = full;
    loop {
        rev.push(e);
        if mask == 1 << 0 {
            break;
        }
        let prev_mask = mask & !(1u32 << e);
        let preds = dp[prev_mask as usize] & adj[e];
        debug_assert!(preds != 0);
        e = preds.trailing_zeros() as usize;
        mask = prev_mask;
    }
    rev.reverse();
    debug_assert_eq!(rev[0], 0);
    Ok(Some(rev))
}

/// Exact longest path length, counted in edges.
pub fn longest_path_exact(g: &Graph, limits: &OracleLimit) -> Result<usize, OracleError> {
    let n = g.vertex_count();
    check_dp(n, limits)?;
    let adj = adjacency_masks(g);
    let dp = free_endpoints(&adj);
    let mut best = 0usize;
    for (mask, &ends) in dp.iter().enumerate() {
        if ends != 0 {
            best = best.max((mask as u32).count_ones() as usize - 1);
        }
    }
    Ok(best)
}

/// A concrete longest path as a vertex sequence. Deterministic: the
/// lexicographically first (cover set, endpoint) optimum is reconstructed
/// with lowest-vertex backtracking.
pub fn longest_path_witness(g: &Graph, limits: &OracleLimit) -> Result<Vec<usize>, OracleError> {
    let n = g.vertex_count();
    check_dp(n, limits)?;
    let adj = adjacency_masks(g);
    let dp = free_endpoints(&adj);
    let mut best_size = 1u32;
    let mut best: (u32, usize) = (1, 0);
    for (mask, &ends) in dp.iter().enumerate() {
        if ends != 0 {
            let size = (mask as u32).count_ones();
            if size > best_size {
                best_size = size;
                best = (mask as u32, ends.trailing_zeros() as usize);
            }
        }
    }
    let (mut mask, mut e) = best;
    let mut rev = Vec::with_capacity(best_size as usize);
    loop {
        rev.push(e);
        let prev_mask = mask & !(1u32 << e);
        if prev_mask == 0 {
            break;
        }
        let preds = dp[prev_mask as usize] & adj[e];
        debug_assert!(preds != 0);
        e = preds.trailing_zeros() as usize;
        mask = prev_mask;
    }
    rev.reverse();
    Ok(rev)
}

/// Exact Hamiltonicity by pruned permutation search, independent of the DP.
pub fn hamiltonian_bruteforce(g: &Graph, limits: &OracleLimit) -> Result<bool, OracleError> {
    let n = g.vertex_count();
    if n > limits.max_n_bruteforce {
        return Err(OracleError::TooLarge {
            n,
            max: limits.max_n_bruteforce,
        });
    }
    if n < 3 {
        return Ok(false);
    }
    let adj = adjacency_masks(g);
    let full = ((1u64 << n) - 1) as u32;
    fn dfs(adj: &[u32], full: u32, mask: u32, at: usize, depth: usize, n: usize) -> bool {
        if depth == n {
            return adj[at] & 1 != 0;
        }
        let mut cand = adj[at] & !mask;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if dfs(adj, full, mask | (1 << w), w, depth + 1, n) {
                return true;
            }
        }
        let _ = full;
        false
    }
    Ok(dfs(&adj, full, 1, 0, 1, n))
}

// ==================== exhaustive booster census ====================

/// Result of enumerating every non-edge and asking whether adding it either
/// makes the graph Hamiltonian or strictly lengthens the longest path.
#[derive(Debug, Clone)]
pub struct BoosterCensus {
    /// Longest path of the unmodified graph, in edges.
    pub longest_path_edges: usize,
    /// All qualifying non-edges, each as `(u, v)` with `u < v`, sorted.
    pub boosters: Vec<(usize, usize)>,
}

/// Exhaustively classify every non-edge of `g`.
///
/// A single free-endpoint DP plus per-vertex subset maxima answer all
/// non-edges at once: a new edge `{u, v}` lengthens the longest path exactly
/// when two vertex-disjoint paths ending at `u` and at `v` together cover at
/// least `longest + 2` vertices, and it creates a Hamilton cycle exactly when
/// the graph has a Hamilton path from `u` to `v` (or was Hamiltonian already).
pub fn booster_census(g: &Graph, limits: &OracleLimit) -> Result<BoosterCensus, OracleError> {
    let n = g.vertex_count();
    check_dp(n, limits)?;
    let adj = adjacency_masks(g);
    let size = 1usize << n;
    let full = (size - 1) as u32;

    let dp = free_endpoints(&adj);
    let mut longest = 0usize;
    for (mask, &ends) in dp.iter().enumerate() {
        if ends != 0 {
            longest = longest.max((mask as u32).count_ones() as usize - 1);
        }
    }

    // best[v][mask]: most vertices of any path inside `mask` ending at v.
    let mut best = vec![0u8; n * size];
    for (mask, &ends) in dp.iter().enumerate() {
        if ends == 0 {
            continue;
        }
        let sz = (mask as u32).count_ones() as u8;
        let mut e_bits = ends;
        while e_bits != 0 {
            let e = e_bits.trailing_zeros() as usize;
            e_bits &= e_bits - 1;
            let slot = &mut best[e * size + mask];
            if *slot < sz {
                *slot = sz;
            }
        }
    }
    for v in 0..n {
        let row = &mut best[v * size..(v + 1) * size];
        for b in 0..n {
            let bit = 1usize << b;
            for mask in 0..size {
                if mask & bit != 0 {
                    let lo = row[mask ^ bit];
                    if row[mask] < lo {
                        row[mask] = lo;
                    }
                }
            }
        }
    }

    // ham_to[u]: endpoints of Hamilton paths starting at u.
    let mut ham_to = vec![0u32; n];
    if n >= 3 {
        for (u, slot) in ham_to.iter_mut().enumerate() {
            *slot = anchored_endpoints(&adj, u)[full as usize];
        }
    }
    let already_ham = n >= 3 && ham_to[0] & adj[0] != 0;

    let need = (longest + 2) as u16;
    let mut boosters = Vec::new();
    for (u, v) in g.non_edges() {
        let ham_through = already_ham || ham_to[u] >> v & 1 == 1;
        let mut lengthens = false;
        if !ham_through {
            let row_u = &best[u * size..(u + 1) * size];
            let row_v = &best[v * size..(v + 1) * size];
            for mask in 0..size {
                let a = row_u[mask];
                if a == 0 {
                    continue;
                }
                let b = row_v[(full as usize) ^ mask];
                if b != 0 && a as u16 + b as u16 >= need {
                    lengthens = true;
                    break;
                }
            }
        }
        if ham_through || lengthens {
            boosters.push((u, v));
        }
    }
    Ok(BoosterCensus {
        longest_path_edges: longest,
        boosters,
    })
}

// ==================== tests ====================
