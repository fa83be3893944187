//! Small simple graphs (order at most 8), canonical labeling, enumeration of
//! isomorphism classes, and the `{i, j}` edge-list text format.
//!
//! Adjacency is a bit mask over vertex pairs in colex order
//! `(0,1), (0,2), (1,2), (0,3), ...`. The canonical key is the
//! lexicographically smallest such bit string over all vertex permutations,
//! read with the first pair as the most significant bit.

use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

pub const MAX_ORDER: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph order {0} outside 1..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("vertex {vertex} outside 1..={order}")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("self-loop on vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("malformed edge list at byte {position}: {message}")]
    Malformed { position: usize, message: String },
    #[error("empty vertex set")]
    EmptyVertexSet,
    #[error("repeated vertex {0} in vertex set")]
    RepeatedVertex(usize),
    #[error("clique order {t} outside 1..={order}")]
    CliqueOrderOutOfRange { t: usize, order: usize },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<GraphError>,
    },
}

#[inline]
pub(crate) fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    b * (b - 1) / 2 + a
}

#[inline]
pub(crate) fn pair_count(order: usize) -> usize {
    order * order.saturating_sub(1) / 2
}

/// Unlabeled-by-convention simple graph on vertices `0..order`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    order: u8,
    bits: u32,
}

/// Canonical form of a graph: equal keys iff isomorphic graphs of equal order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CanonicalKey {
    pub order: u8,
    pub key: u32,
}

impl Graph {
    /// Edgeless graph. Order 0 is allowed only as the skeleton of the empty type.
    pub fn empty(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "order {order} exceeds {MAX_ORDER}");
        Self {
            order: order as u8,
            bits: 0,
        }
    }

    pub fn complete(order: usize) -> Self {
        let mut g = Self::empty(order);
        g.bits = full_mask(order);
        g
    }

    pub fn try_new(order: usize) -> Result<Self, GraphError> {
        if order == 0 || order > MAX_ORDER {
            return Err(GraphError::OrderOutOfRange(order));
        }
        Ok(Self::empty(order))
    }

    /// Builds a graph from 0-based edges.
    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if order > MAX_ORDER {
            return Err(GraphError::OrderOutOfRange(order));
        }
        let mut g = Self::empty(order);
        for &(i, j) in edges {
            g.insert_edge(i, j)?;
        }
        Ok(g)
    }

    fn insert_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        let order = self.order();
        for v in [i, j] {
            if v >= order {
                return Err(GraphError::VertexOutOfRange {
                    vertex: v + 1,
                    order,
                });
            }
        }
        if i == j {
            return Err(GraphError::Loop(i + 1));
        }
        if self.has_edge(i, j) {
            return Err(GraphError::DuplicateEdge(i.min(j) + 1, i.max(j) + 1));
        }
        self.set_edge(i, j, true);
        Ok(())
    }

    pub(crate) fn from_bits(order: usize, bits: u32) -> Self {
        debug_assert!(bits & !full_mask(order) == 0);
        Self {
            order: order as u8,
            bits,
        }
    }

    /// The canonical representative whose adjacency string equals `key`.
    pub fn from_key(key: CanonicalKey) -> Self {
        let n = key.order as usize;
        let total = pair_count(n);
        let mut bits = 0u32;
        for p in 0..total {
            if key.key >> (total - 1 - p) & 1 == 1 {
                bits |= 1 << p;
            }
        }
        Self::from_bits(n, bits)
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub(crate) fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.bits >> pair_index(i, j) & 1 == 1
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j && i < self.order() && j < self.order());
        let bit = 1u32 << pair_index(i, j);
        if present {
            self.bits |= bit;
        } else {
            self.bits &= !bit;
        }
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Edges as 0-based pairs `(i, j)`, `i < j`, in colex order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order();
        (1..n)
            .flat_map(move |j| (0..j).map(move |i| (i, j)))
            .filter(move |&(i, j)| self.has_edge(i, j))
    }

    /// Neighbourhood of `v` as a vertex bit mask.
    pub fn neighbours(&self, v: usize) -> u32 {
        (0..self.order())
            .filter(|&u| self.has_edge(u, v))
            .fold(0, |m, u| m | 1 << u)
    }

    pub fn complement(&self) -> Self {
        Self {
            order: self.order,
            bits: !self.bits & full_mask(self.order()),
        }
    }

    /// Graph whose vertex `p` is vertex `perm[p]` of `self`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.order());
        let mut bits = 0u32;
        for q in 1..perm.len() {
            for p in 0..q {
                if self.has_edge(perm[p], perm[q]) {
                    bits |= 1 << pair_index(p, q);
                }
            }
        }
        Self::from_bits(perm.len(), bits)
    }

    /// Restriction to 0-based `vertices`, relabelled `0..len` in the given order.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut seen = 0u32;
        for &v in vertices {
            if v >= self.order() {
                return Err(GraphError::VertexOutOfRange {
                    vertex: v + 1,
                    order: self.order(),
                });
            }
            if seen >> v & 1 == 1 {
                return Err(GraphError::RepeatedVertex(v + 1));
            }
            seen |= 1 << v;
        }
        Ok(self.relabel_partial(vertices))
    }

    pub(crate) fn relabel_partial(&self, vertices: &[usize]) -> Self {
        let mut bits = 0u32;
        for q in 1..vertices.len() {
            for p in 0..q {
                if self.has_edge(vertices[p], vertices[q]) {
                    bits |= 1 << pair_index(p, q);
                }
            }
        }
        Self::from_bits(vertices.len(), bits)
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey {
            order: self.order,
            key: canonical_search(self, 0).0,
        }
    }

    /// Canonical key together with a permutation realising it
    /// (`relabel(perm)` has adjacency string equal to the key).
    pub fn canonical_form(&self) -> (CanonicalKey, Vec<usize>) {
        let (key, perm) = canonical_search(self, 0);
        (
            CanonicalKey {
                order: self.order,
                key,
            },
            perm,
        )
    }

    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        self.order == other.order
            && self.edge_count() == other.edge_count()
            && self.canonical_key() == other.canonical_key()
    }

    /// Number of `t`-subsets inducing a complete graph.
    pub fn count_cliques(&self, t: usize) -> Result<u64, GraphError> {
        let n = self.order();
        if t == 0 || t > n {
            return Err(GraphError::CliqueOrderOutOfRange { t, order: n });
        }
        let nbrs: Vec<u32> = (0..n).map(|v| self.neighbours(v)).collect();
        let count = subsets_of_size(n, t)
            .filter(|&set| {
                let mut rest = set;
                while rest != 0 {
                    let v = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    if (set & !(1 << v)) & !nbrs[v] != 0 {
                        return false;
                    }
                }
                true
            })
            .count();
        Ok(count as u64)
    }

    /// Largest clique size (0 for the order-0 graph).
    pub fn clique_number(&self) -> usize {
        (1..=self.order())
            .rev()
            .find(|&t| self.count_cliques(t).map(|c| c > 0).unwrap_or(false))
            .unwrap_or(0)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({}: {})", self.order, format_edge_list(self))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_edge_list(self))
    }
}

fn full_mask(order: usize) -> u32 {
    let total = pair_count(order);
    if total >= 32 {
        u32::MAX
    } else {
        (1u32 << total) - 1
    }
}

/// All bit masks over `0..n` with exactly `k` bits set, in increasing order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(move |m| m.count_ones() as usize == k)
}

/// Branch-and-bound search for the lexicographically smallest adjacency
/// string over permutations that fix vertices `0..fixed` pointwise.
/// Returns the key and a permutation `perm` with `relabel(perm)` canonical.
pub(crate) fn canonical_search(g: &Graph, fixed: usize) -> (u32, Vec<usize>) {
    let n = g.order();
    let total = pair_count(n);
    let mut state = Search {
        n,
        total,
        perm: (0..n).collect(),
        used: (1u32 << fixed) - 1,
        best: u32::MAX,
        best_perm: (0..n).collect(),
        nbrs: (0..n).map(|v| g.neighbours(v)).collect(),
    };
    if n == 0 {
        return (0, Vec::new());
    }
    // Fixed prefix contributes the same bits for every permutation.
    let mut prefix = 0u32;
    for q in 1..fixed {
        for p in 0..q {
            prefix = prefix << 1 | g.has_edge(p, q) as u32;
        }
    }
    state.descend(fixed, prefix);
    (state.best, state.best_perm)
}

struct Search {
    n: usize,
    total: usize,
    perm: Vec<usize>,
    used: u32,
    best: u32,
    best_perm: Vec<usize>,
    nbrs: Vec<u32>,
}

impl Search {
    fn descend(&mut self, pos: usize, prefix: u32) {
        if pos == self.n {
            if prefix < self.best {
                self.best = prefix;
                self.best_perm.copy_from_slice(&self.perm);
            }
            return;
        }
        let len_after = pos * (pos + 1) / 2;
        // `best` starts as all ones, which bounds every prefix.
        let bound = self.best >> (self.total - len_after);
        for v in 0..self.n {
            if self.used >> v & 1 == 1 {
                continue;
            }
            let mut ext = prefix;
            let nb = self.nbrs[v];
            for p in 0..pos {
                ext = ext << 1 | (nb >> self.perm[p] & 1);
            }
            if ext > bound {
                continue;
            }
            self.perm[pos] = v;
            self.used |= 1 << v;
            self.descend(pos + 1, ext);
            self.used &= !(1 << v);
        }
    }
}

/// One representative per isomorphism class of graphs of order `n`,
/// sorted by ascending canonical key. Representatives are in canonical form.
pub fn enumerate_graphs(n: usize) -> Result<&'static [Graph], GraphError> {
    static CACHE: [OnceLock<Vec<Graph>>; MAX_ORDER + 1] =
        [const { OnceLock::new() }; MAX_ORDER + 1];
    if n == 0 || n > MAX_ORDER {
        return Err(GraphError::OrderOutOfRange(n));
    }
    Ok(CACHE[n].get_or_init(|| build_graphs(n)).as_slice())
}

fn build_graphs(n: usize) -> Vec<Graph> {
    if n == 1 {
        return vec![Graph::empty(1)];
    }
    let parents = enumerate_graphs(n - 1).expect("order in range");
    let keys: BTreeSet<u32> = parents
        .par_iter()
        .flat_map_iter(|parent| {
            (0u32..1 << (n - 1)).map(move |nbhd| {
                let mut bits = parent.bits;
                for u in 0..n - 1 {
                    if nbhd >> u & 1 == 1 {
                        bits |= 1 << pair_index(u, n - 1);
                    }
                }
                canonical_search(&Graph::from_bits(n, bits), 0).0
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    keys.into_iter()
        .map(|key| {
            Graph::from_key(CanonicalKey {
                order: n as u8,
                key,
            })
        })
        .collect()
}

/// Position of the class of `g` in `enumerate_graphs(g.order())`.
pub fn graph_index(g: &Graph) -> Option<usize> {
    let list = enumerate_graphs(g.order()).ok()?;
    let key = g.canonical_key();
    list.binary_search_by(|h| {
        CanonicalKey {
            order: h.order,
            key: h.bits_as_key(),
        }
        .cmp(&key)
    })
    .ok()
}

impl Graph {
    /// Adjacency string of this labelling, in key bit order.
    fn bits_as_key(&self) -> u32 {
        let total = pair_count(self.order());
        (0..total).fold(0u32, |acc, p| acc << 1 | (self.bits >> p & 1))
    }
}

/// Renders edges as `{i, j}` tokens, 1-based, in colex order.
pub fn format_edge_list(g: &Graph) -> String {
    g.edges()
        .map(|(i, j)| format!("{{{}, {}}}", i + 1, j + 1))
        .collect()
}

/// Parses concatenated `{i, j}` tokens (1-based) into a graph of `order` vertices.
pub fn parse_edge_list(text: &str, order: usize) -> Result<Graph, GraphError> {
    if order == 0 || order > MAX_ORDER {
        return Err(GraphError::OrderOutOfRange(order));
    }
    let mut g = Graph::empty(order);
    let bytes = text.as_bytes();
    let mut pos = 0;
    let malformed = |position: usize, message: &str| GraphError::Malformed {
        position,
        message: message.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize| -> Result<usize, GraphError> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        text[start..*pos]
            .parse()
            .map_err(|_| malformed(start, "expected vertex number"))
    };
    loop {
        skip_ws(&mut pos);
        if pos == bytes.len() {
            break;
        }
        if bytes[pos] != b'{' {
            return Err(malformed(pos, "expected `{`"));
        }
        pos += 1;
        skip_ws(&mut pos);
        let i = number(&mut pos)?;
        skip_ws(&mut pos);
        if pos >= bytes.len() || bytes[pos] != b',' {
            return Err(malformed(pos, "expected `,`"));
        }
        pos += 1;
        skip_ws(&mut pos);
        let j = number(&mut pos)?;
        skip_ws(&mut pos);
        if pos >= bytes.len() || bytes[pos] != b'}' {
            return Err(malformed(pos, "expected `}`"));
        }
        pos += 1;
        for v in [i, j] {
            if v == 0 || v > order {
                return Err(GraphError::VertexOutOfRange { vertex: v, order });
            }
        }
        g.insert_edge(i - 1, j - 1)?;
    }
    Ok(g)
}

/// Parses one `"<order>: <edge list>"` line.
pub fn parse_graph_line(line: &str) -> Result<Graph, GraphError> {
    let (order, edges) = line.split_once(':').ok_or_else(|| GraphError::Malformed {
        position: 0,
        message: "expected `<order>: <edge list>`".into(),
    })?;
    let order: usize = order.trim().parse().map_err(|_| GraphError::Malformed {
        position: 0,
        message: format!("invalid order `{}`", order.trim()),
    })?;
    parse_edge_list(edges, order)
}

pub fn format_graph_line(g: &Graph) -> String {
    let edges = format_edge_list(g);
    if edges.is_empty() {
        format!("{}:", g.order())
    } else {
        format!("{}: {}", g.order(), edges)
    }
}

/// Reads a one-graph-per-line file; `#` starts a comment, blank lines are skipped.
pub fn parse_graph_file(text: &str) -> Result<Vec<Graph>, GraphError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(n, l)| {
            parse_graph_line(l).map_err(|e| GraphError::Line {
                line: n + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// The shipped table of the 156 graphs on six vertices, in its published order.
pub fn published_graphs() -> Vec<Graph> {
    parse_graph_file(PUBLISHED_GRAPHS).expect("shipped table parses")
}

pub(crate) const PUBLISHED_GRAPHS: &str = include_str!("../data/graphs6.txt");

/// Raw lines of the shipped table (edge-list part only), in published order.
pub fn published_graph_rows() -> Vec<&'static str> {
    PUBLISHED_GRAPHS
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_once(':').map(|(_, e)| e.trim()).unwrap_or(""))
        .collect()
}
