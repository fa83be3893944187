//! Types (labelled graphs), σ-flags, flag isomorphism and the one-vertex
//! extensions `F_V^σ`.
//!
//! A flag is stored normalised: the labelled vertices occupy positions
//! `0..k` in label order, so `θ` is the identity. Arbitrary embeddings are
//! accepted by [`Flag::from_embedding`] and relabelled on the way in.

use crate::graphs::{self, canonical_search, enumerate_graphs, pair_count, Graph, GraphError};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Largest type order handled by [`enumerate_types`].
pub const MAX_TYPE_ORDER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlagError {
    #[error("type order {0} outside 0..={MAX_TYPE_ORDER}")]
    TypeOrderOutOfRange(usize),
    #[error("flag order {order} is below the type order {k}")]
    OrderBelowType { order: usize, k: usize },
    #[error("flag order {0} exceeds {max}", max = graphs::MAX_ORDER)]
    OrderTooLarge(usize),
    #[error("labelled vertices do not induce the type")]
    NotAnEmbedding,
    #[error("labelling is not injective or out of range")]
    BadLabelling,
    #[error("label subset {0:#b} is not contained in the type's labels")]
    SubsetOutOfRange(u32),
    #[error("flags have different types")]
    TypeMismatch,
    #[error("malformed flag text: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A type of order `k`: a graph on labels `1..=k` (vertices `0..k`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSigma {
    graph: Graph,
}

impl TypeSigma {
    pub fn new(graph: Graph) -> Self {
        Self { graph }
    }

    /// The unique type of order 0.
    pub fn empty_type() -> Self {
        Self::new(Graph::empty(0))
    }

    /// The unique type of order 1.
    pub fn unit_type() -> Self {
        Self::new(Graph::empty(1))
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// The trivial flag `(σ, id)`.
    pub fn unit_flag(&self) -> Flag {
        Flag {
            sigma: *self,
            graph: self.graph,
        }
    }

    /// True when the two types are equal up to relabelling.
    pub fn is_isomorphic(&self, other: &TypeSigma) -> bool {
        self.graph.is_isomorphic(&other.graph)
    }
}

impl fmt::Debug for TypeSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type({}: {})", self.order(), self.graph)
    }
}

/// A σ-flag `(G, θ)` with `θ` the identity on `0..k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Flag {
    sigma: TypeSigma,
    graph: Graph,
}

/// Flag isomorphism class: equal keys iff flag-isomorphic (same type, same order).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FlagKey {
    pub k: u8,
    pub order: u8,
    pub key: u32,
}

impl Flag {
    /// Builds a flag from a graph whose vertices `0..k` carry labels `1..=k`.
    pub fn new(sigma: TypeSigma, graph: Graph) -> Result<Self, FlagError> {
        let k = sigma.order();
        if graph.order() < k {
            return Err(FlagError::OrderBelowType {
                order: graph.order(),
                k,
            });
        }
        let prefix = (1u32 << pair_count(k)) - 1;
        if graph.bits() & prefix != sigma.graph.bits() {
            return Err(FlagError::NotAnEmbedding);
        }
        Ok(Self { sigma, graph })
    }

    /// A graph viewed as a flag over the empty type.
    pub fn unlabelled(graph: Graph) -> Self {
        Self {
            sigma: TypeSigma::empty_type(),
            graph,
        }
    }

    /// Builds the flag `(graph, θ)` for a 0-based injection `theta: [k] → V(graph)`.
    pub fn from_embedding(
        sigma: TypeSigma,
        graph: &Graph,
        theta: &[usize],
    ) -> Result<Self, FlagError> {
        let n = graph.order();
        if theta.len() != sigma.order() {
            return Err(FlagError::BadLabelling);
        }
        let mut used = 0u32;
        for &v in theta {
            if v >= n || used >> v & 1 == 1 {
                return Err(FlagError::BadLabelling);
            }
            used |= 1 << v;
        }
        let mut order: Vec<usize> = theta.to_vec();
        order.extend((0..n).filter(|v| used >> v & 1 == 0));
        Self::new(sigma, graph.relabel(&order))
    }

    pub fn sigma(&self) -> &TypeSigma {
        &self.sigma
    }

    /// Underlying graph, labelled vertices first.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    pub fn type_order(&self) -> usize {
        self.sigma.order()
    }

    /// `θ` as 0-based vertex indices (always the identity prefix).
    pub fn theta(&self) -> Vec<usize> {
        (0..self.type_order()).collect()
    }

    pub fn key(&self) -> FlagKey {
        FlagKey {
            k: self.type_order() as u8,
            order: self.order() as u8,
            key: canonical_search(&self.graph, self.type_order()).0,
        }
    }

    pub fn is_isomorphic(&self, other: &Flag) -> bool {
        self.sigma == other.sigma && self.order() == other.order() && self.key() == other.key()
    }

    /// Canonical representative of this flag's isomorphism class.
    pub fn canonical(&self) -> Flag {
        let (_, perm) = canonical_search(&self.graph, self.type_order());
        Flag {
            sigma: self.sigma,
            graph: self.graph.relabel(&perm),
        }
    }

    /// Sub-flag induced by the labelled vertices plus the unlabelled vertices
    /// in `extra` (0-based, each ≥ k), kept in the given order.
    pub fn restrict(&self, extra: &[usize]) -> Flag {
        let mut vertices = self.theta();
        vertices.extend_from_slice(extra);
        Flag {
            sigma: self.sigma,
            graph: self.graph.relabel_partial(&vertices),
        }
    }

    /// For an order-(k+1) flag, the label set adjacent to the extra vertex.
    pub fn extension_set(&self) -> Option<u32> {
        let k = self.type_order();
        (self.order() == k + 1).then(|| self.graph.neighbours(k))
    }
}

impl fmt::Debug for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_flag(self))
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_flag(self))
    }
}

/// One type per isomorphism class of graphs of order `k`, identity labelling.
pub fn enumerate_types(k: usize) -> Result<Vec<TypeSigma>, FlagError> {
    if k > MAX_TYPE_ORDER {
        return Err(FlagError::TypeOrderOutOfRange(k));
    }
    if k == 0 {
        return Ok(vec![TypeSigma::empty_type()]);
    }
    Ok(enumerate_graphs(k)?
        .iter()
        .map(|g| TypeSigma::new(*g))
        .collect())
}

/// One flag per isomorphism class of σ-flags of order `order`.
///
/// Sorted by ascending [`FlagKey`]; for `order = k + 1` the flags are instead
/// `F_V` ordered by the label set `V` read as a binary number.
pub fn enumerate_flags(sigma: &TypeSigma, order: usize) -> Result<Vec<Flag>, FlagError> {
    let k = sigma.order();
    if order < k {
        return Err(FlagError::OrderBelowType { order, k });
    }
    if order > graphs::MAX_ORDER {
        return Err(FlagError::OrderTooLarge(order));
    }
    if order == k + 1 {
        return (0..1u32 << k)
            .map(|v| one_vertex_extension(sigma, v))
            .collect();
    }
    let base = pair_count(k);
    let free = pair_count(order) - base;
    let mut classes: Vec<(u32, Flag)> = (0u32..1 << free)
        .map(|mask| {
            let g = Graph::from_bits(order, sigma.graph.bits() | mask << base);
            let flag = Flag {
                sigma: *sigma,
                graph: g,
            };
            let (key, perm) = canonical_search(&g, k);
            (
                key,
                Flag {
                    graph: g.relabel(&perm),
                    ..flag
                },
            )
        })
        .collect();
    classes.sort_by_key(|(key, _)| *key);
    classes.dedup_by_key(|(key, _)| *key);
    Ok(classes.into_iter().map(|(_, f)| f).collect())
}

/// The flag `F_V^σ`: one unlabelled vertex adjacent exactly to the labels in `v`
/// (bit `i` of `v` is label `i + 1`).
pub fn one_vertex_extension(sigma: &TypeSigma, v: u32) -> Result<Flag, FlagError> {
    let k = sigma.order();
    if k >= graphs::MAX_ORDER {
        return Err(FlagError::OrderTooLarge(k + 1));
    }
    if v >> k != 0 {
        return Err(FlagError::SubsetOutOfRange(v));
    }
    let mut g = Graph::from_bits(k + 1, sigma.graph.bits());
    for i in 0..k {
        if v >> i & 1 == 1 {
            g.set_edge(i, k, true);
        }
    }
    Ok(Flag {
        sigma: *sigma,
        graph: g,
    })
}

/// Label permutations preserving adjacency; `perm[i]` is the image of label `i`.
/// Sorted lexicographically, so the identity comes first.
pub fn aut_group(sigma: &TypeSigma) -> Vec<Vec<usize>> {
    let k = sigma.order();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permutations(&mut perm, 0, &mut |p| {
        let ok = (0..k).all(|i| {
            (0..i).all(|j| sigma.graph.has_edge(i, j) == sigma.graph.has_edge(p[i], p[j]))
        });
        if ok {
            out.push(p.to_vec());
        }
    });
    out.sort();
    out
}

fn permutations(p: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// Image of a label set under a label permutation.
pub fn permute_label_set(perm: &[usize], v: u32) -> u32 {
    perm.iter()
        .enumerate()
        .filter(|(i, _)| v >> i & 1 == 1)
        .fold(0, |acc, (_, &j)| acc | 1 << j)
}

/// Complemented type, labels preserved.
pub fn complement_type(sigma: &TypeSigma) -> TypeSigma {
    TypeSigma::new(sigma.graph.complement())
}

/// Complemented flag over the complemented type, `θ` preserved.
pub fn complement_flag(flag: &Flag) -> Flag {
    Flag {
        sigma: complement_type(&flag.sigma),
        graph: flag.graph.complement(),
    }
}

/// All flags of one `(σ, order)` with an index lookup by isomorphism class.
#[derive(Clone, Debug)]
pub struct FlagSpace {
    sigma: TypeSigma,
    order: usize,
    flags: Vec<Flag>,
    index: HashMap<FlagKey, usize>,
}

impl FlagSpace {
    pub fn new(sigma: &TypeSigma, order: usize) -> Result<Self, FlagError> {
        let flags = enumerate_flags(sigma, order)?;
        let index = flags
            .iter()
            .enumerate()
            .map(|(i, f)| (f.key(), i))
            .collect();
        Ok(Self {
            sigma: *sigma,
            order,
            flags,
            index,
        })
    }

    pub fn sigma(&self) -> &TypeSigma {
        &self.sigma
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn position(&self, flag: &Flag) -> Option<usize> {
        if flag.sigma != self.sigma || flag.order() != self.order {
            return None;
        }
        self.index.get(&flag.key()).copied()
    }

    pub fn position_by_key(&self, key: &FlagKey) -> Option<usize> {
        self.index.get(key).copied()
    }
}

/// `"k: <edge list>"`, as for graphs but allowing `k = 0`.
pub fn format_type(sigma: &TypeSigma) -> String {
    let edges = sigma.graph.to_string();
    if edges.is_empty() {
        format!("{}:", sigma.order())
    } else {
        format!("{}: {}", sigma.order(), edges)
    }
}

pub fn parse_type(text: &str) -> Result<TypeSigma, FlagError> {
    let (order, edges) = text
        .split_once(':')
        .ok_or_else(|| FlagError::Malformed(format!("expected `k: <edges>` in `{text}`")))?;
    let k: usize = order
        .trim()
        .parse()
        .map_err(|_| FlagError::Malformed(format!("bad type order `{}`", order.trim())))?;
    if k == 0 {
        if !edges.trim().is_empty() {
            return Err(FlagError::Malformed("order-0 type with edges".into()));
        }
        return Ok(TypeSigma::empty_type());
    }
    Ok(TypeSigma::new(graphs::parse_edge_list(edges, k)?))
}

/// `"<type edge list> | θ=(v1,…,vk) | <flag edge list>"`, 1-based.
pub fn format_flag(flag: &Flag) -> String {
    let theta: Vec<String> = (1..=flag.type_order()).map(|i| i.to_string()).collect();
    format!(
        "{} | θ=({}) | {}",
        flag.sigma.graph,
        theta.join(","),
        flag.graph
    )
}

/// Parses [`format_flag`] output. `order` is the flag's vertex count; the
/// type order is the length of `θ`. Any injective `θ` is accepted.
pub fn parse_flag(text: &str, order: usize) -> Result<Flag, FlagError> {
    let parts: Vec<&str> = text.split('|').map(str::trim).collect();
    let [sigma_text, theta_text, graph_text] = parts.as_slice() else {
        return Err(FlagError::Malformed(format!(
            "expected three `|`-separated fields in `{text}`"
        )));
    };
    let inner = theta_text
        .strip_prefix("θ=")
        .or_else(|| theta_text.strip_prefix("theta="))
        .and_then(|s| s.trim().strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| FlagError::Malformed(format!("bad labelling `{theta_text}`")))?;
    let theta: Vec<usize> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(FlagError::Malformed(format!("bad label `{t}`"))),
            })
            .collect::<Result<_, _>>()?
    };
    let k = theta.len();
    if k > order {
        return Err(FlagError::OrderBelowType { order, k });
    }
    let sigma = if k == 0 {
        TypeSigma::empty_type()
    } else {
        TypeSigma::new(graphs::parse_edge_list(sigma_text, k)?)
    };
    let graph = if order == 0 {
        Graph::empty(0)
    } else {
        graphs::parse_edge_list(graph_text, order)?
    };
    Flag::from_embedding(sigma, &graph, &theta)
}
