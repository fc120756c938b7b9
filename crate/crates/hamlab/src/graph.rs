//! Dense bit-matrix graphs and vertex sets.
//!
//! Vertices are `0..n`. The adjacency matrix is stored as `n` rows of
//! `ceil(n/64)` words, so neighborhood unions, set differences and frontier
//! expansions are word-parallel. Graphs are built mutably (`add_edge`) and
//! treated as frozen afterwards; nothing ever removes an edge.

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

const WORD_BITS: usize = 64;

#[inline(always)]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// Set bits `[lo, hi)` in a word slice, whole words at a time.
fn set_bit_range(words: &mut [u64], lo: usize, hi: usize) {
    if lo >= hi {
        return;
    }
    let (first, last) = (lo / WORD_BITS, (hi - 1) / WORD_BITS);
    let head = !0u64 << (lo % WORD_BITS);
    let tail = !0u64 >> (WORD_BITS - 1 - (hi - 1) % WORD_BITS);
    if first == last {
        words[first] |= head & tail;
    } else {
        words[first] |= head;
        for w in &mut words[first + 1..last] {
            *w = !0;
        }
        words[last] |= tail;
    }
}

// ==================== VertexSet ====================

/// A subset of the vertices `0..n`, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    /// Empty subset of a universe of `n` vertices.
    pub fn new(n: usize) -> Self {
        VertexSet {
            n,
            bits: vec![0; words_for(n)],
        }
    }

    /// The full universe `0..n`.
    pub fn full(n: usize) -> Self {
        let mut s = VertexSet::new(n);
        for w in 0..s.bits.len() {
            s.bits[w] = !0;
        }
        s.trim_tail();
        s
    }

    /// Build from an iterator of vertex indices. Panics on out-of-range.
    pub fn from_iter<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = VertexSet::new(n);
        for v in it {
            s.insert(v);
        }
        s
    }

    fn trim_tail(&mut self) {
        let spare = self.bits.len() * WORD_BITS - self.n;
        if spare > 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= !0 >> spare;
            }
        }
    }

    /// Universe size (not the cardinality).
    #[inline(always)]
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline(always)]
    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.bits[v / WORD_BITS] |= 1u64 << (v % WORD_BITS);
    }

    #[inline(always)]
    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.bits[v / WORD_BITS] &= !(1u64 << (v % WORD_BITS));
    }

    #[inline(always)]
    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.n);
        self.bits[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    /// Cardinality, recomputed by popcount.
    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.bits.fill(0);
    }

    /// Lowest vertex in the set, if any.
    pub fn first(&self) -> Option<usize> {
        for (i, &w) in self.bits.iter().enumerate() {
            if w != 0 {
                return Some(i * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// In-place union.
    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// In-place intersection.
    pub fn intersect_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    /// In-place set difference `self \ other`.
    pub fn subtract(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// True if the intersection with `other` is nonempty.
    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    /// Iterate members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter {
            words: &self.bits,
            word_idx: 0,
            current: self.bits.first().copied().unwrap_or(0),
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.bits
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

struct BitIter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD_BITS + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

// ==================== Graph ====================

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("vertex {0} out of range for graph on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("self-loop at vertex {0} rejected")]
    SelfLoop(usize),
    #[error("vertex count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
}

/// Simple undirected graph on `0..n` with dense bit-row adjacency.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    m: usize,
}

impl Graph {
    /// Edgeless graph on `n >= 1` vertices.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let words = words_for(n);
        Ok(Graph {
            n,
            words,
            adj: vec![0; n * words],
            m: 0,
        })
    }

    #[inline(always)]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline(always)]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    /// Adjacency row of `v` as raw words.
    #[inline(always)]
    pub fn row(&self, v: usize) -> &[u64] {
        debug_assert!(v < self.n);
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    #[inline(always)]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.n && v < self.n);
        self.adj[u * self.words + v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange(u, self.n));
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange(v, self.n));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    /// Insert edge `{u, v}`. Returns `true` if the edge is new, `false` if it
    /// was already present (the graph is unchanged in that case).
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        self.check_pair(u, v)?;
        if self.has_edge(u, v) {
            return Ok(false);
        }
        self.adj[u * self.words + v / WORD_BITS] |= 1u64 << (v % WORD_BITS);
        self.adj[v * self.words + u / WORD_BITS] |= 1u64 << (u % WORD_BITS);
        self.m += 1;
        Ok(true)
    }

    /// Set row `v`'s bits for `[lo, hi)` except `v` itself, via whole-word
    /// fills. One-directional: the caller must fill rows so that the matrix
    /// ends up symmetric, then call `refresh_edge_count`.
    pub(crate) fn add_row_range(&mut self, v: usize, lo: usize, hi: usize) {
        debug_assert!(v < self.n && lo <= hi && hi <= self.n);
        let row = &mut self.adj[v * self.words..(v + 1) * self.words];
        set_bit_range(row, lo, hi);
        if lo <= v && v < hi {
            row[v / WORD_BITS] &= !(1u64 << (v % WORD_BITS));
        }
    }

    /// Recompute `m` from the adjacency words after bulk row edits.
    pub(crate) fn refresh_edge_count(&mut self) {
        self.m = self.recount_edges();
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Neighbors of `v` in increasing order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.row(v);
        BitIter {
            words: row,
            word_idx: 0,
            current: row.first().copied().unwrap_or(0),
        }
    }

    /// Union of two graphs on the same vertex set.
    pub fn union(&self, other: &Graph) -> Result<Graph, GraphError> {
        if self.n != other.n {
            return Err(GraphError::SizeMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        out.union_in_place(other)?;
        Ok(out)
    }

    /// OR the edges of `other` into `self`.
    pub fn union_in_place(&mut self, other: &Graph) -> Result<(), GraphError> {
        if self.n != other.n {
            return Err(GraphError::SizeMismatch(self.n, other.n));
        }
        for (a, b) in self.adj.iter_mut().zip(&other.adj) {
            *a |= b;
        }
        self.m = self.recount_edges();
        Ok(())
    }

    fn recount_edges(&self) -> usize {
        let twice: usize = self.adj.iter().map(|w| w.count_ones() as usize).sum();
        debug_assert!(twice % 2 == 0);
        twice / 2
    }

    /// `N(X) \ X`: vertices outside `X` with at least one neighbor in `X`.
    pub fn external_neighborhood(&self, x: &VertexSet) -> VertexSet {
        debug_assert_eq!(x.universe(), self.n);
        let mut out = VertexSet::new(self.n);
        self.external_neighborhood_into(x, &mut out);
        out
    }

    /// As `external_neighborhood`, reusing `out` as the result buffer.
    pub(crate) fn external_neighborhood_into(&self, x: &VertexSet, out: &mut VertexSet) {
        out.clear();
        let ow = out.words_mut();
        for v in x.iter() {
            let row = self.row(v);
            for (o, r) in ow.iter_mut().zip(row) {
                *o |= r;
            }
        }
        out.subtract(x);
    }

    /// Breadth-first reachable set from `start`.
    pub fn reachable_from(&self, start: usize) -> VertexSet {
        debug_assert!(start < self.n);
        let mut visited = VertexSet::new(self.n);
        visited.insert(start);
        let mut frontier = visited.clone();
        let mut next = VertexSet::new(self.n);
        loop {
            next.clear();
            let nw = next.words_mut();
            for v in frontier.iter() {
                for (o, r) in nw.iter_mut().zip(self.row(v)) {
                    *o |= r;
                }
            }
            next.subtract(&visited);
            if next.is_empty() {
                return visited;
            }
            visited.union_with(&next);
            std::mem::swap(&mut frontier, &mut next);
        }
    }

    /// True when every vertex is reachable from vertex 0. A single vertex is
    /// connected.
    pub fn is_connected(&self) -> bool {
        self.reachable_from(0).len() == self.n
    }

    /// Connected components, each as a vertex set, ordered by lowest member.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = VertexSet::new(self.n);
        let mut out = Vec::new();
        for v in 0..self.n {
            if !seen.contains(v) {
                let comp = self.reachable_from(v);
                seen.union_with(&comp);
                out.push(comp);
            }
        }
        out
    }

    /// Non-adjacent pairs `(u, v)` with `u < v`, in lexicographic order.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u + 1..self.n).filter_map(move |v| (!self.has_edge(u, v)).then_some((u, v)))
        })
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m)
    }
}

// ==================== edge-list text format ====================

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EdgeListError {
    #[error("line {line}: expected header \"n m\"")]
    BadHeader { line: usize },
    #[error("line {line}: cannot parse edge \"{text}\"")]
    BadEdge { line: usize, text: String },
    #[error("line {line}: edge must satisfy u < v (got {u} {v})")]
    NotCanonical { line: usize, u: usize, v: usize },
    #[error("line {line}: self-loop {u} {u}")]
    SelfLoop { line: usize, u: usize },
    #[error("line {line}: vertex {v} out of range (n = {n})")]
    OutOfRange { line: usize, v: usize, n: usize },
    #[error("line {line}: duplicate edge {u} {v}")]
    Duplicate { line: usize, u: usize, v: usize },
    #[error("expected {expected} edge lines, found {found}")]
    WrongEdgeCount { expected: usize, found: usize },
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for EdgeListError {
    fn from(e: std::io::Error) -> Self {
        EdgeListError::Io(e.to_string())
    }
}

/// Read the plain text edge-list format: a header line `n m`, then `m` lines
/// `u v` with `0 <= u < v < n`. Rejects self-loops, duplicates and
/// out-of-range endpoints with the offending line number.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph, EdgeListError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(EdgeListError::BadHeader { line: 1 })??;
    let mut it = header.split_whitespace();
    let (n, m) = match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => {
            let n = a.parse::<usize>().map_err(|_| EdgeListError::BadHeader { line: 1 })?;
            let m = b.parse::<usize>().map_err(|_| EdgeListError::BadHeader { line: 1 })?;
            (n, m)
        }
        _ => return Err(EdgeListError::BadHeader { line: 1 }),
    };
    if n == 0 {
        return Err(EdgeListError::EmptyGraph);
    }
    let mut g = Graph::new(n).expect("n >= 1");
    let mut found = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => {
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| EdgeListError::BadEdge {
                        line: lineno,
                        text: line.clone(),
                    })
                };
                (parse(a)?, parse(b)?)
            }
            _ => {
                return Err(EdgeListError::BadEdge {
                    line: lineno,
                    text: line.clone(),
                })
            }
        };
        if u == v {
            return Err(EdgeListError::SelfLoop { line: lineno, u });
        }
        if u > v {
            return Err(EdgeListError::NotCanonical { line: lineno, u, v });
        }
        if v >= n {
            return Err(EdgeListError::OutOfRange { line: lineno, v, n });
        }
        if g.has_edge(u, v) {
            return Err(EdgeListError::Duplicate { line: lineno, u, v });
        }
        g.add_edge(u, v).expect("validated");
        found += 1;
    }
    if found != m {
        return Err(EdgeListError::WrongEdgeCount { expected: m, found });
    }
    Ok(g)
}

/// Write the edge-list text format; edges come out sorted, LF line endings.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.vertex_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

// ==================== tests ====================
