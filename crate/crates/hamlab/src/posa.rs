//! Rotation-extension machinery: single rotations, endpoint closures keyed
//! by the free endpoint, a booster finder built from double closures, a
//! heuristic long-path grower, a static Hamilton-cycle solver, and the
//! sprinkling loop that feeds streamed random edges into the search.
//!
//! The solver is one-sided: a `Found` verdict always carries a checkable
//! cycle, while `Exhausted` only means the budgeted search gave up.

use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexSet};
use crate::oracle::{self, OracleError, OracleLimit};

#[derive(Debug, Error, PartialEq)]
pub enum PosaError {
    #[error("vertex sequence is not a path: {0}")]
    NotAPath(&'static str),
    #[error("pivot index {index} out of range for a path of {len} vertices")]
    PivotOutOfRange { index: usize, len: usize },
    #[error("pivot at the path predecessor of the endpoint is a no-op")]
    PivotIsPredecessor,
    #[error("pivot pair ({0}, {1}) is not an edge")]
    MissingPivotEdge(usize, usize),
    #[error("vertex {0} is not an endpoint of the path")]
    NotAnEndpoint(usize),
    #[error("graph is already Hamiltonian")]
    AlreadyHamiltonian,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("pair ({0}, {1}) is not a non-edge")]
    NotANonEdge(usize, usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

// ==================== paths ====================

/// A simple path with O(1) vertex-position lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathState {
    order: Vec<usize>,
    pos: Vec<usize>,
    on_path: VertexSet,
}

impl PathState {
    /// Validate `order` as a path of `g`: nonempty, all vertices distinct
    /// and in range, consecutive vertices adjacent.
    pub fn new(g: &Graph, order: Vec<usize>) -> Result<Self, PosaError> {
        if order.is_empty() {
            return Err(PosaError::NotAPath("empty sequence"));
        }
        let n = g.vertex_count();
        let mut pos = vec![usize::MAX; n];
        let mut on_path = VertexSet::new(n);
        for (i, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(PosaError::NotAPath("vertex out of range"));
            }
            if pos[v] != usize::MAX {
                return Err(PosaError::NotAPath("repeated vertex"));
            }
            pos[v] = i;
            on_path.insert(v);
            if i > 0 && !g.has_edge(order[i - 1], v) {
                return Err(PosaError::NotAPath("consecutive vertices not adjacent"));
            }
        }
        Ok(PathState { order, pos, on_path })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn head(&self) -> usize {
        self.order[0]
    }

    pub fn tail(&self) -> usize {
        *self.order.last().expect("path is nonempty")
    }

    pub fn len_vertices(&self) -> usize {
        self.order.len()
    }

    pub fn len_edges(&self) -> usize {
        self.order.len() - 1
    }

    pub fn contains(&self, v: usize) -> bool {
        self.pos.get(v).is_some_and(|&p| p != usize::MAX)
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        match self.pos.get(v) {
            Some(&p) if p != usize::MAX => Some(p),
            _ => None,
        }
    }

    /// The set of path vertices.
    pub fn vertex_set(&self) -> &VertexSet {
        &self.on_path
    }

    fn push_tail(&mut self, v: usize) {
        debug_assert!(!self.contains(v));
        self.pos[v] = self.order.len();
        self.order.push(v);
        self.on_path.insert(v);
    }

    fn reverse(&mut self) {
        self.order.reverse();
        for (i, &v) in self.order.iter().enumerate() {
            self.pos[v] = i;
        }
    }

    /// Swap in a new order over the same vertex set, possibly with one
    /// extra vertex.
    fn replace_order(&mut self, new_order: Vec<usize>) {
        for &v in &self.order {
            self.pos[v] = usize::MAX;
        }
        self.on_path.clear();
        self.order = new_order;
        for (i, &v) in self.order.iter().enumerate() {
            self.pos[v] = i;
            self.on_path.insert(v);
        }
    }
}

// ==================== single rotations ====================

/// Apply one rotation. Given a path and the index of an interior pivot
/// vertex adjacent to the free endpoint, the suffix after the pivot is
/// reversed: the first vertex stays pinned and the vertex that followed
/// the pivot becomes the new free endpoint.
pub fn rotate(g: &Graph, path: &[usize], pivot_index: usize) -> Result<Vec<usize>, PosaError> {
    let st = PathState::new(g, path.to_vec())?;
    let l = st.len_edges();
    if pivot_index + 1 > l {
        return Err(PosaError::PivotOutOfRange {
            index: pivot_index,
            len: path.len(),
        });
    }
    if pivot_index + 1 == l {
        return Err(PosaError::PivotIsPredecessor);
    }
    let last = st.tail();
    let pivot = path[pivot_index];
    if !g.has_edge(last, pivot) {
        return Err(PosaError::MissingPivotEdge(last, pivot));
    }
    let mut out = path.to_vec();
    out[pivot_index + 1..].reverse();
    Ok(out)
}

// ==================== endpoint closures ====================

const NO_NODE: u32 = u32::MAX;

#[derive(Debug)]
struct Node {
    endpoint: u32,
    parent: u32,
    /// Suffix reversal that produced this node from its parent: positions
    /// `cut+1 ..= l` of the parent path are reversed.
    cut: u32,
}

/// Rotation budget for one search round. Each applied rotation (a newly
/// discovered endpoint) costs one unit.
struct Budget {
    rotations_left: u64,
}

impl Budget {
    fn rotations(limit: u64) -> Self {
        Budget {
            rotations_left: limit,
        }
    }

    fn unlimited() -> Self {
        Budget {
            rotations_left: u64::MAX,
        }
    }

    fn dry(&self) -> bool {
        self.rotations_left == 0
    }

    fn spend(&mut self) {
        self.rotations_left = self.rotations_left.saturating_sub(1);
    }
}

/// Endpoints reachable from a base path by rotation sequences that keep
/// `base[0]` pinned, discovered breadth-first and keyed by the endpoint
/// vertex alone. Nodes store only the suffix reversal that produced them,
/// so witness paths are replayed on demand instead of stored.
#[derive(Debug)]
pub struct EndpointClosure {
    pinned: usize,
    base: Vec<usize>,
    base_pos: Vec<u32>,
    nodes: Vec<Node>,
    node_of: Vec<u32>,
    reachable: VertexSet,
    next_unexpanded: usize,
    probed: usize,
    chain_buf: Vec<u32>,
}

impl EndpointClosure {
    fn start(g: &Graph, base: Vec<usize>) -> Self {
        let n = g.vertex_count();
        debug_assert!(!base.is_empty());
        let mut base_pos = vec![NO_NODE; n];
        for (i, &v) in base.iter().enumerate() {
            base_pos[v] = i as u32;
        }
        let root = *base.last().expect("nonempty path");
        let mut node_of = vec![NO_NODE; n];
        node_of[root] = 0;
        let mut reachable = VertexSet::new(n);
        reachable.insert(root);
        EndpointClosure {
            pinned: base[0],
            base,
            base_pos,
            nodes: vec![Node {
                endpoint: root as u32,
                parent: NO_NODE,
                cut: NO_NODE,
            }],
            node_of,
            reachable,
            next_unexpanded: 0,
            probed: 0,
            chain_buf: Vec::new(),
        }
    }

    /// The pinned endpoint.
    pub fn pinned(&self) -> usize {
        self.pinned
    }

    /// All endpoints obtainable by rotations, including the base path's own
    /// free endpoint (the empty sequence).
    pub fn reachable(&self) -> &VertexSet {
        &self.reachable
    }

    /// Replay the rotation sequence for `endpoint` and return its path,
    /// which starts at the pinned vertex. `None` if not reachable.
    pub fn witness_path(&self, endpoint: usize) -> Option<Vec<usize>> {
        match self.node_of.get(endpoint) {
            Some(&idx) if idx != NO_NODE => Some(self.path_of(idx)),
            _ => None,
        }
    }

    fn node_index(&self, endpoint: usize) -> Option<u32> {
        match self.node_of.get(endpoint) {
            Some(&idx) if idx != NO_NODE => Some(idx),
            _ => None,
        }
    }

    fn endpoint_of(&self, node: u32) -> usize {
        self.nodes[node as usize].endpoint as usize
    }

    /// Suffix reversals from the root down to `node`, in application order.
    fn chain_of(&self, node: usize, buf: &mut Vec<u32>) {
        buf.clear();
        let mut idx = node;
        while idx != 0 {
            let n = &self.nodes[idx];
            buf.push(n.cut);
            idx = n.parent as usize;
        }
        buf.reverse();
    }

    #[inline]
    fn flip(cut: u32, x: u32, l: u32) -> u32 {
        if x > cut {
            cut + 1 + l - x
        } else {
            x
        }
    }

    /// Position of `v` in the path of the node whose chain is `chain`.
    #[inline]
    fn position_in(&self, chain: &[u32], v: usize) -> Option<u32> {
        let mut x = self.base_pos[v];
        if x == NO_NODE {
            return None;
        }
        let l = (self.base.len() - 1) as u32;
        for &cut in chain {
            x = Self::flip(cut, x, l);
        }
        Some(x)
    }

    /// Vertex at position `x` in the path of the node whose chain is
    /// `chain` (the reversals are involutions, applied backwards).
    #[inline]
    fn vertex_at(&self, chain: &[u32], mut x: u32) -> usize {
        let l = (self.base.len() - 1) as u32;
        for &cut in chain.iter().rev() {
            x = Self::flip(cut, x, l);
        }
        self.base[x as usize]
    }

    /// Materialize the path of a node by replaying its reversals.
    fn path_of(&self, node: u32) -> Vec<usize> {
        let mut chain = Vec::new();
        self.chain_of(node as usize, &mut chain);
        let mut order = self.base.clone();
        for &cut in &chain {
            order[cut as usize + 1..].reverse();
        }
        order
    }

    /// Scan the endpoint of `idx` for pivots and enqueue new endpoints.
    fn expand(&mut self, g: &Graph, idx: usize, budget: &mut Budget) {
        let l = self.base.len() - 1;
        if l < 2 {
            return;
        }
        let w = self.nodes[idx].endpoint as usize;
        let mut chain = std::mem::take(&mut self.chain_buf);
        self.chain_of(idx, &mut chain);
        for y in g.neighbors(w) {
            let Some(j) = self.position_in(&chain, y) else {
                continue;
            };
            // Pivots at the endpoint's own predecessor are no-ops.
            if j as usize + 1 >= l {
                continue;
            }
            let child = self.vertex_at(&chain, j + 1);
            if self.node_of[child] == NO_NODE {
                if budget.dry() {
                    break;
                }
                budget.spend();
                self.node_of[child] = self.nodes.len() as u32;
                self.nodes.push(Node {
                    endpoint: child as u32,
                    parent: idx as u32,
                    cut: j,
                });
                self.reachable.insert(child);
            }
        }
        self.chain_buf = chain;
    }

    /// Probe unprobed endpoints and expand queued ones until the queue or
    /// the budget empties. Returns the first node whose endpoint the probe
    /// accepts.
    fn run(
        &mut self,
        g: &Graph,
        budget: &mut Budget,
        probe: &mut dyn FnMut(usize) -> bool,
    ) -> Option<u32> {
        loop {
            while self.probed < self.nodes.len() {
                let idx = self.probed as u32;
                let ep = self.endpoint_of(idx);
                self.probed += 1;
                if probe(ep) {
                    return Some(idx);
                }
            }
            if self.next_unexpanded >= self.nodes.len() || budget.dry() {
                return None;
            }
            let idx = self.next_unexpanded;
            self.next_unexpanded += 1;
            self.expand(g, idx, budget);
        }
    }

    /// Re-scan the nodes of `u` and `v` after the edge (u, v) was added,
    /// then resume the breadth-first run. Returns a probe hit and whether
    /// the edge touched this closure at all.
    fn inject_edge(
        &mut self,
        g: &Graph,
        u: usize,
        v: usize,
        budget: &mut Budget,
        probe: &mut dyn FnMut(usize) -> bool,
    ) -> (Option<u32>, bool) {
        let mut touched = false;
        for z in [u, v] {
            if let Some(idx) = self.node_index(z) {
                touched = true;
                if probe(z) {
                    return (Some(idx), true);
                }
                if (idx as usize) < self.next_unexpanded {
                    self.expand(g, idx as usize, budget);
                }
            }
        }
        if touched {
            (self.run(g, budget, probe), true)
        } else {
            (None, false)
        }
    }
}

/// Breadth-first closure of rotation endpoints for `path`, pinning `fixed`
/// (which must be one of the two path endpoints). The search is keyed by
/// the endpoint vertex: each endpoint is expanded once, with the first
/// witness path that discovered it.
pub fn endpoint_closure(
    g: &Graph,
    path: &[usize],
    fixed: usize,
) -> Result<EndpointClosure, PosaError> {
    let st = PathState::new(g, path.to_vec())?;
    let base = if fixed == st.head() {
        path.to_vec()
    } else if fixed == st.tail() {
        let mut b = path.to_vec();
        b.reverse();
        b
    } else {
        return Err(PosaError::NotAnEndpoint(fixed));
    };
    let mut cl = EndpointClosure::start(g, base);
    cl.run(g, &mut Budget::unlimited(), &mut |_| false);
    Ok(cl)
}

// ==================== engine ====================

/// Work limits for the rotation search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct EngineCaps {
    /// Rotations allowed per search round (one round runs the closures
    /// from both path ends); also the per-edge cap while sprinkling.
    pub round_rotations: u64,
    /// Extra rotations allowed per stuck state for second-level closures,
    /// which restart the search from every reachable endpoint.
    pub level2_rotations: u64,
}

impl EngineCaps {
    /// Defaults scaled to the vertex count: 4n rotations per round plus
    /// 8n for second-level search, with small constants so tiny graphs
    /// always get complete sweeps.
    pub fn for_size(n: usize) -> Self {
        EngineCaps {
            round_rotations: 4 * n as u64 + 64,
            level2_rotations: 8 * n as u64 + 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Found,
    Exhausted,
}

/// Outcome of a solve or sprinkle run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonResult {
    pub verdict: Verdict,
    /// Hamilton cycle as a vertex sequence (closing edge implicit).
    pub cycle: Option<Vec<usize>>,
    /// Stream edges exposed before the verdict.
    pub edges_consumed: usize,
    /// Stream edges whose exposure unlocked progress.
    pub boosters_hit: usize,
    /// Longest-path edge counts: the initial value and one entry per
    /// progress event. Non-decreasing by construction.
    pub path_trace: Vec<usize>,
}

struct Search {
    path: PathState,
    off_deg: Vec<u32>,
    attach_low: Option<usize>,
    attach_valid: bool,
    trace: Vec<usize>,
}

enum RoundOutcome {
    Ham(Vec<usize>),
    Progressed,
    Stuck(Frozen),
}

enum FixOutcome {
    Ham(Vec<usize>),
    Stuck(Frozen),
}

struct Frozen {
    tail: EndpointClosure,
    head: EndpointClosure,
    level2_left: u64,
}

impl Search {
    /// Greedy depth-first walk from vertex 0, always picking the lowest
    /// unvisited neighbor.
    fn init(g: &Graph) -> Search {
        let n = g.vertex_count();
        let mut order = vec![0];
        let mut on = VertexSet::new(n);
        on.insert(0);
        loop {
            let tail = *order.last().expect("nonempty");
            let next = g
                .row(tail)
                .iter()
                .zip(on.words())
                .enumerate()
                .find_map(|(i, (&r, &o))| {
                    let w = r & !o;
                    (w != 0).then(|| i * 64 + w.trailing_zeros() as usize)
                });
            match next {
                Some(v) => {
                    order.push(v);
                    on.insert(v);
                }
                None => break,
            }
        }
        let path = PathState::new(g, order).expect("walk is a path");
        let mut st = Search {
            path,
            off_deg: vec![0; n],
            attach_low: None,
            attach_valid: false,
            trace: Vec::new(),
        };
        st.recompute_off_deg(g);
        st.trace.push(st.path.len_edges());
        st
    }

    fn from_path(g: &Graph, path: PathState) -> Search {
        let n = g.vertex_count();
        let mut st = Search {
            path,
            off_deg: vec![0; n],
            attach_low: None,
            attach_valid: false,
            trace: Vec::new(),
        };
        st.recompute_off_deg(g);
        st.trace.push(st.path.len_edges());
        st
    }

    fn recompute_off_deg(&mut self, g: &Graph) {
        let on = self.path.vertex_set().words().to_vec();
        for v in 0..g.vertex_count() {
            self.off_deg[v] = g
                .row(v)
                .iter()
                .zip(&on)
                .map(|(&r, &o)| (r & !o).count_ones())
                .sum();
        }
    }

    fn first_off_neighbor(&self, g: &Graph, v: usize) -> Option<usize> {
        let on = self.path.vertex_set().words();
        g.row(v)
            .iter()
            .zip(on)
            .enumerate()
            .find_map(|(i, (&r, &o))| {
                let w = r & !o;
                (w != 0).then(|| i * 64 + w.trailing_zeros() as usize)
            })
    }

    /// Vertex joins the path: its neighbors each lose one off-path
    /// neighbor.
    fn note_joined(&mut self, g: &Graph, v: usize) {
        for z in g.neighbors(v) {
            debug_assert!(self.off_deg[z] > 0);
            self.off_deg[z] -= 1;
        }
        self.attach_valid = false;
    }

    /// Lowest off-path vertex with a neighbor on the path.
    fn attach_vertex(&mut self, g: &Graph) -> Option<usize> {
        if !self.attach_valid {
            let on = self.path.vertex_set().words();
            self.attach_low = (0..g.vertex_count()).find(|&v| {
                !self.path.contains(v)
                    && g.row(v).iter().zip(on).any(|(&r, &o)| r & o != 0)
            });
            self.attach_valid = true;
        }
        self.attach_low
    }

    /// New edge was added to the graph; keep the incremental bookkeeping
    /// exact.
    fn note_edge_added(&mut self, u: usize, v: usize) {
        let u_on = self.path.contains(u);
        let v_on = self.path.contains(v);
        if !u_on {
            self.off_deg[v] += 1;
        }
        if !v_on {
            self.off_deg[u] += 1;
        }
        if self.attach_valid {
            let candidate = match (u_on, v_on) {
                (true, false) => Some(v),
                (false, true) => Some(u),
                _ => None,
            };
            if let Some(c) = candidate {
                if self.attach_low.is_none_or(|a| c < a) {
                    self.attach_low = Some(c);
                }
            }
        }
    }

    /// Extend greedily at both ends until neither end has an off-path
    /// neighbor. Returns whether the path grew.
    fn greedy_extend(&mut self, g: &Graph) -> bool {
        let mut grew = false;
        for _ in 0..2 {
            while let Some(v) = self.first_off_neighbor(g, self.path.tail()) {
                self.path.push_tail(v);
                self.note_joined(g, v);
                grew = true;
            }
            self.path.reverse();
        }
        if grew {
            self.trace.push(self.path.len_edges());
        }
        grew
    }

    /// Spanning path whose ends are adjacent closes a Hamilton cycle.
    fn close_spanning(&self, g: &Graph) -> Option<Vec<usize>> {
        let n = g.vertex_count();
        if n >= 3
            && self.path.len_vertices() == n
            && g.has_edge(self.path.tail(), self.path.head())
        {
            Some(self.path.order().to_vec())
        } else {
            None
        }
    }

    /// Act on a probe hit: close the Hamilton cycle, extend through an
    /// off-path neighbor, or convert a short cycle into a longer path.
    fn apply_hit(&mut self, g: &Graph, closure: &EndpointClosure, node: u32) -> RoundOutcome {
        let n = g.vertex_count();
        let endpoint = closure.endpoint_of(node);
        let spanning = self.path.len_vertices() == n;
        if spanning && n >= 3 && g.has_edge(endpoint, closure.pinned()) {
            return RoundOutcome::Ham(closure.path_of(node));
        }
        if self.off_deg[endpoint] > 0 {
            let order = closure.path_of(node);
            self.path.replace_order(order);
            let attach = self
                .first_off_neighbor(g, endpoint)
                .expect("endpoint has an off-path neighbor");
            self.path.push_tail(attach);
            self.note_joined(g, attach);
            self.trace.push(self.path.len_edges());
            return RoundOutcome::Progressed;
        }
        // Cycle through all path vertices, shorter than spanning: open it
        // at the lowest attachment and extend. The probe only reports this
        // case when an attachment exists.
        debug_assert!(g.has_edge(endpoint, closure.pinned()));
        let order = closure.path_of(node);
        let u = self.attach_vertex(g).expect("attachment exists");
        let w = g
            .row(u)
            .iter()
            .zip(self.path.vertex_set().words())
            .enumerate()
            .find_map(|(i, (&r, &o))| {
                let x = r & o;
                (x != 0).then(|| i * 64 + x.trailing_zeros() as usize)
            })
            .expect("attachment has a path neighbor");
        let i = order.iter().position(|&x| x == w).expect("w is on the cycle");
        let mut new_order = Vec::with_capacity(order.len() + 1);
        new_order.push(u);
        new_order.extend_from_slice(&order[i..]);
        new_order.extend_from_slice(&order[..i]);
        self.path.replace_order(new_order);
        self.note_joined(g, u);
        self.trace.push(self.path.len_edges());
        RoundOutcome::Progressed
    }

    /// One full rotation round: closures from both path ends, then
    /// second-level closures from every reachable endpoint, stopping at
    /// the first progress.
    fn rotations_round(&mut self, g: &Graph, caps: &EngineCaps) -> RoundOutcome {
        let n = g.vertex_count();
        let spanning = self.path.len_vertices() == n;
        let attach_exists = self.attach_vertex(g).is_some();
        let mut budget = Budget::rotations(caps.round_rotations);

        let mut tail_cl = EndpointClosure::start(g, self.path.order().to_vec());
        let hit = {
            let off = &self.off_deg;
            let pinned = tail_cl.pinned();
            let mut probe = |ep: usize| {
                off[ep] > 0 || ((spanning || attach_exists) && g.has_edge(ep, pinned))
            };
            tail_cl.run(g, &mut budget, &mut probe)
        };
        if let Some(node) = hit {
            return self.apply_hit(g, &tail_cl, node);
        }

        let mut reversed = self.path.order().to_vec();
        reversed.reverse();
        let mut head_cl = EndpointClosure::start(g, reversed);
        let hit = {
            let off = &self.off_deg;
            let pinned = head_cl.pinned();
            let mut probe = |ep: usize| {
                off[ep] > 0 || ((spanning || attach_exists) && g.has_edge(ep, pinned))
            };
            head_cl.run(g, &mut budget, &mut probe)
        };
        if let Some(node) = hit {
            return self.apply_hit(g, &head_cl, node);
        }

        let mut level2 = Budget::rotations(caps.level2_rotations);
        if let Some((cl, node)) = self.level2_sweep(g, &tail_cl, spanning, attach_exists, &mut level2)
        {
            return self.apply_hit(g, &cl, node);
        }
        RoundOutcome::Stuck(Frozen {
            tail: tail_cl,
            head: head_cl,
            level2_left: level2.rotations_left,
        })
    }

    /// Second-level search: for each endpoint reachable from the tail
    /// side, replay its path, pin it, and run the closure from the other
    /// end.
    fn level2_sweep(
        &mut self,
        g: &Graph,
        tail_cl: &EndpointClosure,
        spanning: bool,
        attach_exists: bool,
        budget: &mut Budget,
    ) -> Option<(EndpointClosure, u32)> {
        let current_tail = self.path.tail();
        let xs: Vec<usize> = tail_cl
            .reachable()
            .iter()
            .filter(|&x| x != current_tail)
            .collect();
        for x in xs {
            if budget.dry() {
                break;
            }
            let node = tail_cl.node_index(x).expect("reachable endpoint");
            let mut base = tail_cl.path_of(node);
            base.reverse();
            let mut cl = EndpointClosure::start(g, base);
            let hit = {
                let off = &self.off_deg;
                let mut probe = |ep: usize| {
                    off[ep] > 0 || ((spanning || attach_exists) && g.has_edge(ep, x))
                };
                cl.run(g, budget, &mut probe)
            };
            if let Some(node) = hit {
                return Some((cl, node));
            }
        }
        None
    }

    /// Grow until no greedy step or rotation round makes progress.
    fn fixpoint(&mut self, g: &Graph, caps: &EngineCaps) -> FixOutcome {
        loop {
            self.greedy_extend(g);
            if let Some(cycle) = self.close_spanning(g) {
                return FixOutcome::Ham(cycle);
            }
            match self.rotations_round(g, caps) {
                RoundOutcome::Ham(cycle) => return FixOutcome::Ham(cycle),
                RoundOutcome::Progressed => continue,
                RoundOutcome::Stuck(frozen) => return FixOutcome::Stuck(frozen),
            }
        }
    }
}

/// Static search for a Hamilton cycle: greedy growth plus rotation rounds
/// until a cycle closes or the search sticks. `Exhausted` is not a proof
/// of non-Hamiltonicity.
pub fn solve(g: &Graph, caps: &EngineCaps) -> HamiltonResult {
    let mut st = Search::init(g);
    match st.fixpoint(g, caps) {
        FixOutcome::Ham(cycle) => {
            debug_assert!(verify_hamilton_cycle(g, &cycle));
            HamiltonResult {
                verdict: Verdict::Found,
                cycle: Some(cycle),
                edges_consumed: 0,
                boosters_hit: 0,
                path_trace: st.trace,
            }
        }
        FixOutcome::Stuck(_) => HamiltonResult {
            verdict: Verdict::Exhausted,
            cycle: None,
            edges_consumed: 0,
            boosters_hit: 0,
            path_trace: st.trace,
        },
    }
}

/// Grow a maximal path: not extendable at either end even after exploring
/// both endpoint closures. Heuristic: the result can be shorter than a
/// true longest path. Passing `start` resumes from an existing path and
/// never returns anything shorter.
pub fn grow_longest_path(
    g: &Graph,
    start: Option<&[usize]>,
    caps: &EngineCaps,
) -> Result<PathState, PosaError> {
    let mut st = match start {
        Some(order) => Search::from_path(g, PathState::new(g, order.to_vec())?),
        None => Search::init(g),
    };
    let _ = st.fixpoint(g, caps);
    Ok(st.path)
}

/// Feed `stream` edges one at a time into the graph, attempting rotation
/// and extension after each exposure, until a Hamilton cycle closes or
/// the stream runs out. Between progress events, closures stay frozen and
/// new edges extend them incrementally, which reaches the same endpoint
/// set as a rebuild; after every progress event they are rebuilt from
/// scratch.
pub fn sprinkle<I>(g: Graph, stream: I, caps: &EngineCaps) -> Result<HamiltonResult, PosaError>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    sprinkle_from(g, None, stream, caps)
}

/// [`sprinkle`] resumed from a caller-provided path. The path must be
/// valid in `g` before any stream edge arrives. Rotations never remove a
/// path's interior vertices, so a start path keeps hard-to-place vertices
/// threaded between their neighbors while the search works on the rest.
pub fn sprinkle_from<I>(
    mut g: Graph,
    start: Option<&[usize]>,
    stream: I,
    caps: &EngineCaps,
) -> Result<HamiltonResult, PosaError>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    if !g.is_connected() {
        return Err(PosaError::Disconnected);
    }
    let n = g.vertex_count();
    let mut st = match start {
        Some(order) => Search::from_path(&g, PathState::new(&g, order.to_vec())?),
        None => Search::init(&g),
    };
    let mut consumed = 0;
    let mut boosters = 0;

    let mut frozen = match st.fixpoint(&g, caps) {
        FixOutcome::Ham(cycle) => {
            debug_assert!(verify_hamilton_cycle(&g, &cycle));
            return Ok(HamiltonResult {
                verdict: Verdict::Found,
                cycle: Some(cycle),
                edges_consumed: 0,
                boosters_hit: 0,
                path_trace: st.trace,
            });
        }
        FixOutcome::Stuck(frozen) => frozen,
    };

    for (u, v) in stream {
        consumed += 1;
        if !g.add_edge(u, v)? {
            continue;
        }
        st.note_edge_added(u, v);

        let spanning = st.path.len_vertices() == n;
        let attach_exists = st.attach_vertex(&g).is_some();
        let mut budget = Budget::rotations(caps.round_rotations);

        let mut hit: Option<(&EndpointClosure, u32)> = None;
        let mut touched = false;
        {
            let off = &st.off_deg;
            let pinned = frozen.tail.pinned();
            let mut probe = |ep: usize| {
                off[ep] > 0 || ((spanning || attach_exists) && g.has_edge(ep, pinned))
            };
            let (h, t) = frozen.tail.inject_edge(&g, u, v, &mut budget, &mut probe);
            touched |= t;
            if let Some(node) = h {
                hit = Some((&frozen.tail, node));
            }
        }
        if hit.is_none() {
            let off = &st.off_deg;
            let pinned = frozen.head.pinned();
            let mut probe = |ep: usize| {
                off[ep] > 0 || ((spanning || attach_exists) && g.has_edge(ep, pinned))
            };
            let (h, t) = frozen.head.inject_edge(&g, u, v, &mut budget, &mut probe);
            touched |= t;
            if let Some(node) = h {
                hit = Some((&frozen.head, node));
            }
        }

        let mut progressed = match hit {
            Some((cl, node)) => match st.apply_hit(&g, cl, node) {
                RoundOutcome::Ham(cycle) => {
                    debug_assert!(verify_hamilton_cycle(&g, &cycle));
                    return Ok(HamiltonResult {
                        verdict: Verdict::Found,
                        cycle: Some(cycle),
                        edges_consumed: consumed,
                        boosters_hit: boosters + 1,
                        path_trace: st.trace,
                    });
                }
                RoundOutcome::Progressed => true,
                RoundOutcome::Stuck(_) => unreachable!("apply_hit never sticks"),
            },
            None => false,
        };

        // A touched closure that grew without progress re-arms the
        // second-level search, drawing down this stuck state's pool.
        if !progressed && touched && frozen.level2_left > 0 {
            let mut level2 = Budget::rotations(frozen.level2_left);
            let l2hit = st.level2_sweep(&g, &frozen.tail, spanning, attach_exists, &mut level2);
            frozen.level2_left = level2.rotations_left;
            if let Some((cl, node)) = l2hit {
                match st.apply_hit(&g, &cl, node) {
                    RoundOutcome::Ham(cycle) => {
                        debug_assert!(verify_hamilton_cycle(&g, &cycle));
                        return Ok(HamiltonResult {
                            verdict: Verdict::Found,
                            cycle: Some(cycle),
                            edges_consumed: consumed,
                            boosters_hit: boosters + 1,
                            path_trace: st.trace,
                        });
                    }
                    RoundOutcome::Progressed => progressed = true,
                    RoundOutcome::Stuck(_) => unreachable!("apply_hit never sticks"),
                }
            }
        }

        if progressed {
            boosters += 1;
            match st.fixpoint(&g, caps) {
                FixOutcome::Ham(cycle) => {
                    debug_assert!(verify_hamilton_cycle(&g, &cycle));
                    return Ok(HamiltonResult {
                        verdict: Verdict::Found,
                        cycle: Some(cycle),
                        edges_consumed: consumed,
                        boosters_hit: boosters,
                        path_trace: st.trace,
                    });
                }
                FixOutcome::Stuck(f) => frozen = f,
            }
        }
    }

    // Final sweep with fresh budgets: sleeping edges cannot unlock the
    // frozen first-level search, but a fresh second-level pass can still
    // profit from them.
    match st.fixpoint(&g, caps) {
        FixOutcome::Ham(cycle) => {
            debug_assert!(verify_hamilton_cycle(&g, &cycle));
            Ok(HamiltonResult {
                verdict: Verdict::Found,
                cycle: Some(cycle),
                edges_consumed: consumed,
                boosters_hit: boosters,
                path_trace: st.trace,
            })
        }
        FixOutcome::Stuck(_) => Ok(HamiltonResult {
            verdict: Verdict::Exhausted,
            cycle: None,
            edges_consumed: consumed,
            boosters_hit: boosters,
            path_trace: st.trace,
        }),
    }
}

// ==================== certificates and checks ====================

/// True iff `cycle` visits every vertex exactly once and consecutive
/// vertices (cyclically) are adjacent. Graphs on fewer than three
/// vertices have no Hamilton cycle.
pub fn verify_hamilton_cycle(g: &Graph, cycle: &[usize]) -> bool {
    verify_hamilton_cycle_with(g.vertex_count(), cycle, |u, v| g.has_edge(u, v))
}

/// [`verify_hamilton_cycle`] against an arbitrary edge predicate, for
/// callers that keep the graph as something other than adjacency rows
/// (edge sets, unions of layers) and want the same structural check.
pub fn verify_hamilton_cycle_with(
    n: usize,
    cycle: &[usize],
    mut has_edge: impl FnMut(usize, usize) -> bool,
) -> bool {
    if n < 3 || cycle.len() != n {
        return false;
    }
    let mut seen = VertexSet::new(n);
    for &v in cycle {
        if v >= n || seen.contains(v) {
            return false;
        }
        seen.insert(v);
    }
    cycle.windows(2).all(|w| has_edge(w[0], w[1])) && has_edge(cycle[n - 1], cycle[0])
}

/// Closure size against its boundary for a longest path: the rotation
/// closure of any path satisfies `|N(R) \ R| <= 2|R| - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PosaBoundReport {
    pub closure_size: usize,
    pub boundary_size: usize,
}

impl PosaBoundReport {
    pub fn satisfied(&self) -> bool {
        self.boundary_size <= 2 * self.closure_size - 1
    }
}

/// Compute the endpoint closure of an exact longest path and measure its
/// external neighborhood. Requires a connected non-Hamiltonian graph
/// small enough for the exact oracle.
pub fn posa_bound_check(g: &Graph, limit: &OracleLimit) -> Result<PosaBoundReport, PosaError> {
    if !g.is_connected() {
        return Err(PosaError::Disconnected);
    }
    if oracle::hamiltonian_exact(g, limit)? {
        return Err(PosaError::AlreadyHamiltonian);
    }
    let base = oracle::longest_path_witness(g, limit)?;
    let cl = endpoint_closure(g, &base, base[0])?;
    let boundary = g.external_neighborhood(cl.reachable());
    Ok(PosaBoundReport {
        closure_size: cl.reachable().len(),
        boundary_size: boundary.len(),
    })
}

/// Ground-truth booster test: adding the non-edge either makes the graph
/// Hamiltonian or strictly lengthens a longest path. Exact, so the graph
/// must fit the oracle.
pub fn is_booster(
    g: &Graph,
    u: usize,
    v: usize,
    limit: &OracleLimit,
) -> Result<bool, PosaError> {
    if u == v || u >= g.vertex_count() || v >= g.vertex_count() || g.has_edge(u, v) {
        return Err(PosaError::NotANonEdge(u, v));
    }
    let before = oracle::longest_path_exact(g, limit)?;
    let mut h = g.clone();
    h.add_edge(u, v)?;
    if oracle::hamiltonian_exact(&h, limit)? {
        return Ok(true);
    }
    Ok(oracle::longest_path_exact(&h, limit)? > before)
}

/// What adding a discovered pair does to the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoosterKind {
    ClosesHamiltonCycle,
    ExtendsLongestPath,
}

/// Non-edges discovered by the double-closure scheme, all carrying the
/// same effect tag because every witness path spans the same vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoosterSet {
    pub pairs: Vec<(usize, usize)>,
    pub kind: BoosterKind,
    pub base_path_edges: usize,
}

/// Double-closure booster discovery on a connected non-Hamiltonian graph:
/// take an exact longest path, close over rotations pinning its first
/// vertex, then for each reachable endpoint close over rotations pinning
/// that endpoint. Every non-adjacent endpoint pair found this way joins
/// two ends of a common path, so adding it closes a cycle through the
/// whole path: a Hamilton cycle if the path spans, otherwise (by
/// connectivity) a strictly longer path.
pub fn find_boosters(g: &Graph, limit: &OracleLimit) -> Result<BoosterSet, PosaError> {
    if !g.is_connected() {
        return Err(PosaError::Disconnected);
    }
    if oracle::hamiltonian_exact(g, limit)? {
        return Err(PosaError::AlreadyHamiltonian);
    }
    let base = oracle::longest_path_witness(g, limit)?;
    let spanning = base.len() == g.vertex_count();
    let first = endpoint_closure(g, &base, base[0])?;
    let mut pairs = std::collections::BTreeSet::new();
    for x in first.reachable().iter() {
        let mut px = first
            .witness_path(x)
            .expect("reachable endpoint has a witness");
        px.reverse();
        let second = endpoint_closure(g, &px, x)?;
        for y in second.reachable().iter() {
            debug_assert_ne!(x, y);
            if !g.has_edge(x, y) {
                pairs.insert((x.min(y), x.max(y)));
            }
        }
    }
    Ok(BoosterSet {
        pairs: pairs.into_iter().collect(),
        kind: if spanning {
            BoosterKind::ClosesHamiltonCycle
        } else {
            BoosterKind::ExtendsLongestPath
        },
        base_path_edges: base.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{sample_gnp, uniform_edge_stream, RngStream};
    use std::collections::{HashSet, VecDeque};

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

    fn petersen() -> Graph {
        let mut g = Graph::new(10).unwrap();
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5).unwrap();
            g.add_edge(i, i + 5).unwrap();
            g.add_edge(i + 5, (i + 2) % 5 + 5).unwrap();
        }
        g
    }

    fn caps_for(g: &Graph) -> EngineCaps {
        EngineCaps::for_size(g.vertex_count())
    }

    /// All endpoints reachable by exhaustive search over rotation
    /// sequences, deduplicating full path states.
    fn brute_force_closure(g: &Graph, base: &[usize]) -> HashSet<usize> {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
        let mut endpoints = HashSet::new();
        seen.insert(base.to_vec());
        endpoints.insert(*base.last().unwrap());
        queue.push_back(base.to_vec());
        while let Some(p) = queue.pop_front() {
            let l = p.len() - 1;
            if l < 2 {
                continue;
            }
            let last = p[l];
            for i in 0..=l.saturating_sub(2) {
                if g.has_edge(last, p[i]) {
                    let mut q = p.clone();
                    q[i + 1..].reverse();
                    if seen.insert(q.clone()) {
                        endpoints.insert(*q.last().unwrap());
                        queue.push_back(q);
                    }
                }
            }
        }
        endpoints
    }

    fn random_connected_non_hamiltonian(
        n: usize,
        p: f64,
        seed: u64,
        want: usize,
    ) -> Vec<Graph> {
        let limit = OracleLimit::default();
        let mut out = Vec::new();
        let mut id = 0;
        while out.len() < want {
            let g = sample_gnp(n, p, RngStream::new(seed, id)).unwrap();
            id += 1;
            if g.is_connected() && !oracle::hamiltonian_exact(&g, &limit).unwrap() {
                out.push(g);
            }
            assert!(id < 50_000, "generator starved");
        }
        out
    }

    // ---- rotate ----

    #[test]
    fn rotate_matches_worked_example() {
        let mut g = path_graph(4);
        g.add_edge(1, 3).unwrap();
        let out = rotate(&g, &[0, 1, 2, 3], 1).unwrap();
        assert_eq!(out, vec![0, 1, 3, 2]);
    }

    #[test]
    fn rotate_twice_restores_the_original_path() {
        let mut g = path_graph(4);
        g.add_edge(1, 3).unwrap();
        let once = rotate(&g, &[0, 1, 2, 3], 1).unwrap();
        let twice = rotate(&g, &once, 1).unwrap();
        assert_eq!(twice, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rotate_rejects_bad_pivots() {
        let g = path_graph(4);
        assert_eq!(
            rotate(&g, &[0, 1, 2, 3], 2).unwrap_err(),
            PosaError::PivotIsPredecessor
        );
        assert_eq!(
            rotate(&g, &[0, 1, 2, 3], 0).unwrap_err(),
            PosaError::MissingPivotEdge(3, 0)
        );
        assert!(matches!(
            rotate(&g, &[0, 1, 2, 3], 3).unwrap_err(),
            PosaError::PivotOutOfRange { .. }
        ));
        assert!(matches!(
            rotate(&g, &[0, 2, 1, 3], 0).unwrap_err(),
            PosaError::NotAPath(_)
        ));
    }

    // ---- closures ----

    #[test]
    fn closure_on_chordless_path_is_trivial() {
        let g = path_graph(5);
        let cl = endpoint_closure(&g, &[0, 1, 2, 3, 4], 0).unwrap();
        assert_eq!(cl.reachable().iter().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn closure_on_complete_graph_reaches_all_interior() {
        let g = complete(4);
        let cl = endpoint_closure(&g, &[0, 1, 2, 3], 0).unwrap();
        assert_eq!(cl.reachable().iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn closure_accepts_either_endpoint_and_rejects_others() {
        let g = path_graph(4);
        let cl = endpoint_closure(&g, &[0, 1, 2, 3], 3).unwrap();
        assert_eq!(cl.pinned(), 3);
        assert_eq!(cl.reachable().iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(
            endpoint_closure(&g, &[0, 1, 2, 3], 2).unwrap_err(),
            PosaError::NotAnEndpoint(2)
        );
    }

    #[test]
    fn closure_is_sound_against_brute_force_on_small_graphs() {
        // Keying the search by endpoint expands each endpoint with its
        // first witness only, so the result can undershoot the full
        // rotation closure; it must never overshoot it.
        let limit = OracleLimit::default();
        let mut checked = 0;
        let mut equal = 0;
        for i in 0..400 {
            let g = sample_gnp(7, 0.45, RngStream::new(2024, i)).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let base = oracle::longest_path_witness(&g, &limit).unwrap();
            if base.len() < 3 {
                continue;
            }
            let cl = endpoint_closure(&g, &base, base[0]).unwrap();
            let engine: HashSet<usize> = cl.reachable().iter().collect();
            let brute = brute_force_closure(&g, &base);
            assert!(
                engine.is_subset(&brute),
                "graph #{i}, base {base:?}: {engine:?} vs {brute:?}"
            );
            equal += (engine == brute) as usize;
            checked += 1;
        }
        assert!(checked > 200);
        assert!(equal * 10 >= checked * 9, "undershoot is common: {equal}/{checked}");
        // Spanning path of a plain cycle: rotation through the closing
        // chord only.
        let c5 = cycle_graph(5);
        let cl = endpoint_closure(&c5, &[0, 1, 2, 3, 4], 0).unwrap();
        let brute = brute_force_closure(&c5, &[0, 1, 2, 3, 4]);
        assert_eq!(cl.reachable().iter().collect::<HashSet<_>>(), brute);
        assert_eq!(brute, HashSet::from([4, 1]));
    }

    #[test]
    fn closure_witnesses_are_replayable_paths() {
        let limit = OracleLimit::default();
        for i in 0..120 {
            let g = sample_gnp(9, 0.4, RngStream::new(77, i)).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let base = oracle::longest_path_witness(&g, &limit).unwrap();
            let cl = endpoint_closure(&g, &base, base[0]).unwrap();
            for ep in cl.reachable().iter() {
                let w = cl.witness_path(ep).unwrap();
                let st = PathState::new(&g, w.clone()).expect("witness is a path");
                assert_eq!(st.head(), base[0]);
                assert_eq!(st.tail(), ep);
                assert_eq!(w.len(), base.len());
                let a: HashSet<_> = w.iter().collect();
                let b: HashSet<_> = base.iter().collect();
                assert_eq!(a, b);
            }
            assert!(cl.witness_path(base[0]).is_none() || base.len() == 1);
        }
    }

    // ---- bound check ----

    #[test]
    fn bound_check_on_worked_path_example() {
        let g = path_graph(4);
        let report = posa_bound_check(&g, &OracleLimit::default()).unwrap();
        assert_eq!(report.closure_size, 1);
        assert_eq!(report.boundary_size, 1);
        assert!(report.satisfied());
    }

    #[test]
    fn bound_check_rejects_wrong_inputs() {
        assert_eq!(
            posa_bound_check(&cycle_graph(5), &OracleLimit::default()).unwrap_err(),
            PosaError::AlreadyHamiltonian
        );
        let mut two = Graph::new(4).unwrap();
        two.add_edge(0, 1).unwrap();
        two.add_edge(2, 3).unwrap();
        assert_eq!(
            posa_bound_check(&two, &OracleLimit::default()).unwrap_err(),
            PosaError::Disconnected
        );
    }

    #[test]
    fn bound_holds_on_200_random_connected_non_hamiltonian_graphs() {
        let mut total = 0;
        for (n, p, seed) in [(7, 0.3, 500u64), (8, 0.28, 501), (10, 0.22, 502)] {
            for g in random_connected_non_hamiltonian(n, p, seed, 67) {
                let report = posa_bound_check(&g, &OracleLimit::default()).unwrap();
                assert!(
                    report.satisfied(),
                    "violation at n={n}: {report:?}"
                );
                total += 1;
            }
        }
        assert!(total >= 200);
    }

    // ---- boosters ----

    #[test]
    fn booster_test_on_worked_examples() {
        let limit = OracleLimit::default();
        let p4 = path_graph(4);
        assert!(is_booster(&p4, 0, 3, &limit).unwrap());
        assert!(!is_booster(&p4, 0, 2, &limit).unwrap());
        let mut star = Graph::new(4).unwrap();
        for leaf in 1..4 {
            star.add_edge(0, leaf).unwrap();
        }
        assert!(is_booster(&star, 1, 2, &limit).unwrap());
        assert_eq!(
            is_booster(&p4, 0, 1, &limit).unwrap_err(),
            PosaError::NotANonEdge(0, 1)
        );
        assert_eq!(
            is_booster(&p4, 2, 2, &limit).unwrap_err(),
            PosaError::NotANonEdge(2, 2)
        );
    }

    #[test]
    fn find_boosters_on_worked_examples() {
        let limit = OracleLimit::default();
        let set = find_boosters(&path_graph(4), &limit).unwrap();
        assert_eq!(set.pairs, vec![(0, 3)]);
        assert_eq!(set.kind, BoosterKind::ClosesHamiltonCycle);
        assert_eq!(set.base_path_edges, 3);
        assert_eq!(
            find_boosters(&cycle_graph(4), &limit).unwrap_err(),
            PosaError::AlreadyHamiltonian
        );
        let mut two = Graph::new(4).unwrap();
        two.add_edge(0, 1).unwrap();
        two.add_edge(2, 3).unwrap();
        assert_eq!(
            find_boosters(&two, &limit).unwrap_err(),
            PosaError::Disconnected
        );
    }

    #[test]
    fn found_boosters_are_genuine() {
        let limit = OracleLimit::default();
        let mut instances = 0;
        let mut pairs_checked = 0;
        for g in random_connected_non_hamiltonian(9, 0.26, 900, 120) {
            let set = find_boosters(&g, &limit).unwrap();
            for &(x, y) in &set.pairs {
                assert!(
                    is_booster(&g, x, y, &limit).unwrap(),
                    "false positive ({x}, {y})"
                );
                pairs_checked += 1;
            }
            instances += 1;
        }
        assert_eq!(instances, 120);
        assert!(pairs_checked > 100);
    }

    #[test]
    fn booster_floor_on_a_small_expander() {
        // Complete bipartite 2 + 4: every set of up to one vertex doubles,
        // pairs of large-side vertices do not, so the exact expansion
        // parameter is 1 and the floor is (1+1)^2/2 = 2.
        let limit = OracleLimit::default();
        let mut g = Graph::new(6).unwrap();
        for a in 0..2 {
            for b in 2..6 {
                g.add_edge(a, b).unwrap();
            }
        }
        let census = oracle::booster_census(&g, &limit).unwrap();
        assert!(census.boosters.len() >= 2);
        let engine = find_boosters(&g, &limit).unwrap();
        assert!(engine.pairs.len() >= 2);
        let census_set: HashSet<_> = census.boosters.iter().copied().collect();
        for &(x, y) in &engine.pairs {
            assert!(census_set.contains(&(x, y)));
        }
    }

    // ---- growth ----

    #[test]
    fn grow_spans_a_plain_cycle() {
        let g = cycle_graph(6);
        let p = grow_longest_path(&g, None, &caps_for(&g)).unwrap();
        assert_eq!(p.len_vertices(), 6);
    }

    #[test]
    fn grow_stays_inside_the_start_component() {
        let mut g = Graph::new(6).unwrap();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)] {
            g.add_edge(u, v).unwrap();
        }
        let p = grow_longest_path(&g, None, &caps_for(&g)).unwrap();
        assert_eq!(p.len_vertices(), 3);
    }

    #[test]
    fn grow_never_beats_the_oracle_and_is_maximal() {
        let limit = OracleLimit::default();
        for i in 0..500 {
            let g = sample_gnp(9, 0.3, RngStream::new(31, i)).unwrap();
            let caps = caps_for(&g);
            let p = grow_longest_path(&g, None, &caps).unwrap();
            let exact = oracle::longest_path_exact(&g, &limit).unwrap();
            assert!(p.len_edges() <= exact);
            // Maximality certificate: neither end extends.
            for &end in &[p.head(), p.tail()] {
                for y in g.neighbors(end) {
                    assert!(p.contains(y));
                }
            }
        }
    }

    #[test]
    fn grow_resumes_and_never_shrinks() {
        let g = cycle_graph(8);
        let caps = caps_for(&g);
        let start = [2, 3, 4];
        let p = grow_longest_path(&g, Some(&start), &caps).unwrap();
        assert!(p.len_vertices() >= 3);
        assert_eq!(p.len_vertices(), 8);
        assert!(matches!(
            grow_longest_path(&g, Some(&[0, 2]), &caps).unwrap_err(),
            PosaError::NotAPath(_)
        ));
    }

    // ---- cycle verification ----

    #[test]
    fn verify_cycle_examples() {
        let c5 = cycle_graph(5);
        assert!(verify_hamilton_cycle(&c5, &[0, 1, 2, 3, 4]));
        assert!(!verify_hamilton_cycle(&c5, &[0, 1, 2, 4, 3]));
        assert!(!verify_hamilton_cycle(&c5, &[0, 1, 2, 3]));
        assert!(!verify_hamilton_cycle(&c5, &[0, 1, 2, 3, 3]));
        let k4 = complete(4);
        assert!(verify_hamilton_cycle(&k4, &[2, 0, 3, 1]));
        let mut p2 = Graph::new(2).unwrap();
        p2.add_edge(0, 1).unwrap();
        assert!(!verify_hamilton_cycle(&p2, &[0, 1]));
    }

    // ---- solve ----

    #[test]
    fn solve_closes_easy_cycles() {
        for g in [cycle_graph(5), complete(4), complete(7)] {
            let r = solve(&g, &caps_for(&g));
            assert_eq!(r.verdict, Verdict::Found);
            assert!(verify_hamilton_cycle(&g, r.cycle.as_ref().unwrap()));
        }
    }

    #[test]
    fn solve_gives_up_on_petersen_without_false_claims() {
        let g = petersen();
        let r = solve(&g, &caps_for(&g));
        assert_eq!(r.verdict, Verdict::Exhausted);
        assert!(r.cycle.is_none());
    }

    #[test]
    fn solve_agrees_with_oracle_on_dense_small_graphs() {
        let limit = OracleLimit::default();
        let mut found = 0;
        let mut ham = 0;
        for i in 0..60 {
            let g = sample_gnp(18, 0.4, RngStream::new(4000, i)).unwrap();
            let exact = oracle::hamiltonian_exact(&g, &limit).unwrap();
            let r = solve(&g, &caps_for(&g));
            if let Some(c) = &r.cycle {
                assert!(verify_hamilton_cycle(&g, c));
                assert!(exact);
            }
            found += (r.verdict == Verdict::Found) as usize;
            ham += exact as usize;
        }
        assert!(ham > 0);
        // The rotation search should nail dense instances.
        assert_eq!(found, ham, "engine misses on dense graphs");
    }

    #[test]
    fn solve_trace_is_non_decreasing_and_deterministic() {
        let g = sample_gnp(40, 0.2, RngStream::new(5, 0)).unwrap();
        let caps = caps_for(&g);
        let a = solve(&g, &caps);
        let b = solve(&g, &caps);
        assert_eq!(a, b);
        assert!(a.path_trace.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn solve_survives_starved_budgets() {
        let g = complete(10);
        let caps = EngineCaps {
            round_rotations: 1,
            level2_rotations: 0,
        };
        let r = solve(&g, &caps);
        if let Some(c) = &r.cycle {
            assert!(verify_hamilton_cycle(&g, c));
        }
    }

    // ---- sprinkle ----

    #[test]
    fn sprinkle_single_booster_closes_the_cycle() {
        let g = path_graph(4);
        let r = sprinkle(g.clone(), vec![(0, 3)], &caps_for(&g)).unwrap();
        assert_eq!(r.verdict, Verdict::Found);
        assert_eq!(r.edges_consumed, 1);
        assert_eq!(r.boosters_hit, 1);
        let mut union = g;
        union.add_edge(0, 3).unwrap();
        assert!(verify_hamilton_cycle(&union, r.cycle.as_ref().unwrap()));
    }

    #[test]
    fn sprinkle_non_booster_exhausts() {
        let g = path_graph(4);
        let r = sprinkle(g, vec![(0, 2)], &EngineCaps::for_size(4)).unwrap();
        assert_eq!(r.verdict, Verdict::Exhausted);
        assert_eq!(r.edges_consumed, 1);
        assert_eq!(r.boosters_hit, 0);
        assert_eq!(r.path_trace.last(), Some(&3));
    }

    #[test]
    fn sprinkle_hamiltonian_input_consumes_nothing() {
        let g = cycle_graph(6);
        let r = sprinkle(g, vec![(0, 2), (1, 4)], &EngineCaps::for_size(6)).unwrap();
        assert_eq!(r.verdict, Verdict::Found);
        assert_eq!(r.edges_consumed, 0);
    }

    #[test]
    fn sprinkle_rejects_disconnected_input() {
        let mut g = Graph::new(4).unwrap();
        g.add_edge(0, 1).unwrap();
        g.add_edge(2, 3).unwrap();
        assert_eq!(
            sprinkle(g, vec![(0, 2)], &EngineCaps::for_size(4)).unwrap_err(),
            PosaError::Disconnected
        );
    }

    #[test]
    fn sprinkle_traces_stay_monotone_and_cycles_verify() {
        let mut found = 0;
        for i in 0..50 {
            let g = {
                // Connected sparse base: a spanning path plus noise.
                let mut g = path_graph(12);
                let noise = sample_gnp(12, 0.1, RngStream::new(600, i)).unwrap();
                g.union_in_place(&noise).unwrap();
                g
            };
            let stream = uniform_edge_stream(12, 20, RngStream::new(601, i)).unwrap();
            let r = sprinkle(g.clone(), stream.clone(), &EngineCaps::for_size(12)).unwrap();
            assert!(r.path_trace.windows(2).all(|w| w[0] <= w[1]));
            if let Some(c) = &r.cycle {
                let mut union = g;
                for &(u, v) in &stream[..r.edges_consumed] {
                    let _ = union.add_edge(u, v).unwrap();
                }
                assert!(verify_hamilton_cycle(&union, c));
                found += 1;
            }
        }
        assert!(found >= 45, "engine found only {found}/50");
    }

    #[test]
    fn sprinkle_is_deterministic() {
        let g = path_graph(15);
        let stream = uniform_edge_stream(15, 25, RngStream::new(8, 3)).unwrap();
        let caps = EngineCaps::for_size(15);
        let a = sprinkle(g.clone(), stream.clone(), &caps).unwrap();
        let b = sprinkle(g, stream, &caps).unwrap();
        assert_eq!(a, b);
    }
}
