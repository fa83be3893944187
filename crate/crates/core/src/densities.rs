//! Exact flag densities: `p(F₁; F)`, sunflower pair densities `p(F₁, F₂; F)`,
//! averaging coefficients `q_σ(F)` and the clique objective column.
//!
//! Everything is computed by exhaustive enumeration with exact rationals.
//! [`DensityTable`] batches pair densities for a whole target family and can
//! be persisted through [`DensityCache`].

use crate::flags::{enumerate_flags, format_flag, Flag, FlagError, FlagSpace, TypeSigma};
use crate::graphs::{enumerate_graphs, format_graph_line, subsets_of_size, Graph, GraphError};
use crate::rational::{binomial, falling_factorial, format_rational, parse_rational, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("flags have different types")]
    TypeMismatch,
    #[error("flag of order {small} does not fit in a flag of order {large}")]
    OrderTooLarge { small: usize, large: usize },
    #[error("orders {l1} + {l2} - {k} exceed the host order {l}")]
    PairOrder {
        l1: usize,
        l2: usize,
        k: usize,
        l: usize,
    },
    #[error("clique order {t} must lie in 1..={l}")]
    CliqueOrder { t: usize, l: usize },
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("density cache: {0}")]
    Cache(String),
    #[error("density cache I/O: {0}")]
    Io(#[from] std::io::Error),
}

fn counts_to_rational(count: u64, total: u64) -> Rational {
    Rational::new(BigInt::from(count), BigInt::from(total))
}

/// Unlabelled vertex subsets of `flag` of the given size, as vertex lists.
fn unlabelled_subsets(flag: &Flag, size: usize) -> impl Iterator<Item = Vec<usize>> {
    let k = flag.type_order();
    let m = flag.order() - k;
    subsets_of_size(m, size).map(move |mask| mask_vertices(mask, k))
}

fn mask_vertices(mask: u32, offset: usize) -> Vec<usize> {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + offset)
        .collect()
}

/// `p(F₁; F)`: probability that a random `(ℓ₁ − k)`-set of unlabelled vertices
/// of `F`, together with the labels, induces a flag isomorphic to `F₁`.
pub fn density(f1: &Flag, f: &Flag) -> Result<Rational, DensityError> {
    if f1.sigma() != f.sigma() {
        return Err(DensityError::TypeMismatch);
    }
    if f1.order() > f.order() {
        return Err(DensityError::OrderTooLarge {
            small: f1.order(),
            large: f.order(),
        });
    }
    let k = f.type_order();
    let target = f1.key();
    let size = f1.order() - k;
    let hits = unlabelled_subsets(f, size)
        .filter(|vs| f.restrict(vs).key() == target)
        .count() as u64;
    Ok(counts_to_rational(hits, binomial(f.order() - k, size)))
}

/// `p(F₁, F₂; F)`: probability that a random sunflower `(V₁, V₂)` with centre
/// the labelled vertices induces `F₁` on `V₁` and `F₂` on `V₂`.
pub fn pair_density(f1: &Flag, f2: &Flag, f: &Flag) -> Result<Rational, DensityError> {
    if f1.sigma() != f.sigma() || f2.sigma() != f.sigma() {
        return Err(DensityError::TypeMismatch);
    }
    let k = f.type_order();
    let (l1, l2, l) = (f1.order(), f2.order(), f.order());
    if l1 + l2 - k > l {
        return Err(DensityError::PairOrder { l1, l2, k, l });
    }
    let (a, b, m) = (l1 - k, l2 - k, l - k);
    let (key1, key2) = (f1.key(), f2.key());
    let mut hits = 0u64;
    if a == b {
        // Unordered pairs {S, T}; each contributes both orientations.
        let sets: Vec<u32> = subsets_of_size(m, a).collect();
        let keys: Vec<_> = sets
            .iter()
            .map(|&s| f.restrict(&mask_vertices(s, k)).key())
            .collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i] & sets[j] != 0 {
                    continue;
                }
                hits += (keys[i] == key1 && keys[j] == key2) as u64;
                hits += (keys[j] == key1 && keys[i] == key2) as u64;
            }
        }
        // a = b = 0: the single sunflower is (centre, centre).
        if a == 0 {
            hits = (keys[0] == key1 && keys[0] == key2) as u64;
        }
    } else {
        for s in subsets_of_size(m, a) {
            if f.restrict(&mask_vertices(s, k)).key() != key1 {
                continue;
            }
            let rest = !s & ((1u32 << m) - 1);
            hits += subsets_of_size(m, b)
                .filter(|&t| t & !rest == 0)
                .filter(|&t| f.restrict(&mask_vertices(t, k)).key() == key2)
                .count() as u64;
        }
    }
    let total = binomial(m, a) * binomial(m - a, b);
    Ok(counts_to_rational(hits, total))
}

/// Visits every injection `[k] → [n]` in lexicographic order.
pub(crate) fn for_each_injection(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(n: usize, k: usize, used: u32, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for v in 0..n {
            if used >> v & 1 == 0 {
                cur.push(v);
                go(n, k, used | 1 << v, cur, visit);
                cur.pop();
            }
        }
    }
    go(n, k, 0, &mut Vec::with_capacity(k), visit);
}

/// True when `theta` induces `sigma` in `g` with labels respected.
pub(crate) fn induces_type(g: &Graph, sigma: &TypeSigma, theta: &[usize]) -> bool {
    (0..theta.len())
        .all(|j| (0..j).all(|i| g.has_edge(theta[i], theta[j]) == sigma.graph().has_edge(i, j)))
}

/// `q_σ(F)`: fraction of injections `[k] → V(G)` that induce `σ` and give a
/// flag isomorphic to `F`.
pub fn averaging_coeff(f: &Flag) -> Rational {
    let (n, k) = (f.order(), f.type_order());
    let sigma = *f.sigma();
    let target = f.key();
    let g = *f.graph();
    let mut hits = 0u64;
    for_each_injection(n, k, &mut |theta| {
        if induces_type(&g, &sigma, theta)
            && Flag::from_embedding(sigma, &g, theta)
                .map(|x| x.key() == target)
                .unwrap_or(false)
        {
            hits += 1;
        }
    });
    counts_to_rational(hits, falling_factorial(n, k))
}

/// `p(K_t; G) + p(K_t; Ḡ)` for every `G` in `enumerate_graphs(ℓ)`, same order.
pub fn objective_column(t: usize, l: usize) -> Result<Vec<Rational>, DensityError> {
    if t == 0 || t > l {
        return Err(DensityError::CliqueOrder { t, l });
    }
    let total = binomial(l, t);
    enumerate_graphs(l)?
        .iter()
        .map(|g| {
            let mono = g.count_cliques(t)? + g.complement().count_cliques(t)?;
            Ok(counts_to_rational(mono, total))
        })
        .collect()
}

/// What the third index of a [`DensityTable`] ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableTarget {
    /// σ-flags of order ℓ; entries are `p(F_a, F_b; F)`.
    Flags,
    /// Graphs of order ℓ; entries are the coefficient of `G` in `⟦F_a · F_b⟧_σ`.
    Graphs,
}

impl TableTarget {
    fn name(self) -> &'static str {
        match self {
            TableTarget::Flags => "flags",
            TableTarget::Graphs => "graphs",
        }
    }
}

/// Dense table of pair densities over `ℱ_{ℓ₁}^σ × ℱ_{ℓ₂}^σ × targets`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    sigma: TypeSigma,
    l1: usize,
    l2: usize,
    l: usize,
    target: TableTarget,
    flags1: Vec<Flag>,
    flags2: Vec<Flag>,
    targets: Vec<String>,
    entries: Vec<Rational>,
}

struct Classifier {
    k: usize,
    fast: bool,
    space: FlagSpace,
}

impl Classifier {
    fn new(sigma: &TypeSigma, order: usize) -> Result<Self, FlagError> {
        Ok(Self {
            k: sigma.order(),
            fast: order == sigma.order() + 1,
            space: FlagSpace::new(sigma, order)?,
        })
    }

    fn classify(&self, host: &Flag, vertices: &[usize]) -> usize {
        if self.fast {
            // F_V is stored at index V.
            (host.graph().neighbours(vertices[0]) & ((1u32 << self.k) - 1)) as usize
        } else {
            self.space
                .position_by_key(&host.restrict(vertices).key())
                .expect("restriction of a σ-flag is a σ-flag")
        }
    }
}

impl DensityTable {
    pub fn compute(
        sigma: &TypeSigma,
        l1: usize,
        l2: usize,
        l: usize,
        target: TableTarget,
    ) -> Result<Self, DensityError> {
        let k = sigma.order();
        if l1 < k || l2 < k || l1 + l2 - k > l {
            return Err(DensityError::PairOrder { l1, l2, k, l });
        }
        let c1 = Classifier::new(sigma, l1)?;
        let c2 = Classifier::new(sigma, l2)?;
        let (n1, n2) = (c1.space.len(), c2.space.len());
        let hosts: Vec<HostSet> = match target {
            TableTarget::Flags => enumerate_flags(sigma, l)?
                .into_iter()
                .map(|f| HostSet {
                    label: format_flag(&f),
                    flags: vec![f],
                    injections: 1,
                })
                .collect(),
            TableTarget::Graphs => enumerate_graphs(l)?
                .iter()
                .map(|g| HostSet::from_graph(sigma, g))
                .collect(),
        };
        let (a, b, m) = (l1 - k, l2 - k, l - k);
        let sunflowers = binomial(m, a) * binomial(m - a, b);
        let entries: Vec<Rational> = hosts
            .par_iter()
            .flat_map_iter(|host| {
                let mut counts = vec![0u64; n1 * n2];
                for f in &host.flags {
                    count_sunflowers(f, &c1, &c2, a, b, &mut counts);
                }
                let total = sunflowers * host.injections;
                counts.into_iter().map(move |c| {
                    if c == 0 {
                        Rational::zero()
                    } else {
                        counts_to_rational(c, total)
                    }
                })
            })
            .collect();
        Ok(Self {
            sigma: *sigma,
            l1,
            l2,
            l,
            target,
            flags1: c1.space.flags().to_vec(),
            flags2: c2.space.flags().to_vec(),
            targets: hosts.into_iter().map(|h| h.label).collect(),
            entries,
        })
    }

    pub fn sigma(&self) -> &TypeSigma {
        &self.sigma
    }

    pub fn orders(&self) -> (usize, usize, usize) {
        (self.l1, self.l2, self.l)
    }

    pub fn target(&self) -> TableTarget {
        self.target
    }

    pub fn flags1(&self) -> &[Flag] {
        &self.flags1
    }

    pub fn flags2(&self) -> &[Flag] {
        &self.flags2
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn get(&self, a: usize, b: usize, target: usize) -> &Rational {
        let (n1, n2) = (self.flags1.len(), self.flags2.len());
        &self.entries[(target * n1 + a) * n2 + b]
    }

    /// The `ℱ_{ℓ₁} × ℱ_{ℓ₂}` slice for one target, row-major.
    pub fn slice(&self, target: usize) -> &[Rational] {
        let n = self.flags1.len() * self.flags2.len();
        &self.entries[target * n..(target + 1) * n]
    }

    /// Descriptor block identifying the enumeration ordering.
    fn descriptor(&self) -> String {
        descriptor_text(
            &self.sigma,
            (self.l1, self.l2, self.l),
            self.target,
            &self.flags1,
            &self.flags2,
            &self.targets,
        )
    }

    /// Hex SHA-256 of the descriptor block.
    pub fn content_hash(&self) -> String {
        hex_digest(&self.descriptor())
    }

    pub fn to_text(&self) -> String {
        let descriptor = self.descriptor();
        let mut out = format!(
            "{CACHE_MAGIC}\nhash {}\n{descriptor}",
            hex_digest(&descriptor)
        );
        let nonzero = self.entries.iter().filter(|e| !e.is_zero()).count();
        let _ = writeln!(out, "entries {nonzero}");
        let (n1, n2) = (self.flags1.len(), self.flags2.len());
        for (i, e) in self.entries.iter().enumerate() {
            if !e.is_zero() {
                let (t, a, b) = (i / (n1 * n2), i / n2 % n1, i % n2);
                let _ = writeln!(out, "{a} {b} {t} {}", format_rational(e));
            }
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output, requiring its descriptor to
    /// equal `expected`'s (so stale or foreign files are rejected).
    fn from_text_matching(text: &str, expected: &DensityTable) -> Result<Self, DensityError> {
        let descriptor = expected.descriptor();
        let header = format!(
            "{CACHE_MAGIC}\nhash {}\n{descriptor}",
            hex_digest(&descriptor)
        );
        let body = text
            .strip_prefix(&header)
            .ok_or_else(|| DensityError::Cache("descriptor mismatch".into()))?;
        let mut lines = body.lines();
        let count: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("entries "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| DensityError::Cache("missing entry count".into()))?;
        let (n1, n2, nt) = (
            expected.flags1.len(),
            expected.flags2.len(),
            expected.targets.len(),
        );
        let mut entries = vec![Rational::zero(); n1 * n2 * nt];
        let mut seen = 0;
        for line in lines {
            let bad = || DensityError::Cache(format!("bad entry `{line}`"));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b, t, v] = fields.as_slice() else {
                return Err(bad());
            };
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.parse().map_err(|_| bad())?;
            let t: usize = t.parse().map_err(|_| bad())?;
            if a >= n1 || b >= n2 || t >= nt {
                return Err(bad());
            }
            entries[(t * n1 + a) * n2 + b] = parse_rational(v).map_err(|_| bad())?;
            seen += 1;
        }
        if seen != count {
            return Err(DensityError::Cache(format!(
                "expected {count} entries, found {seen}"
            )));
        }
        Ok(Self {
            entries,
            ..expected.clone()
        })
    }

    /// Shell with descriptors but no entries, used to key cache lookups.
    fn skeleton(
        sigma: &TypeSigma,
        l1: usize,
        l2: usize,
        l: usize,
        target: TableTarget,
    ) -> Result<Self, DensityError> {
        let k = sigma.order();
        if l1 < k || l2 < k || l1 + l2 - k > l {
            return Err(DensityError::PairOrder { l1, l2, k, l });
        }
        let targets = match target {
            TableTarget::Flags => enumerate_flags(sigma, l)?.iter().map(format_flag).collect(),
            TableTarget::Graphs => enumerate_graphs(l)?.iter().map(format_graph_line).collect(),
        };
        Ok(Self {
            sigma: *sigma,
            l1,
            l2,
            l,
            target,
            flags1: enumerate_flags(sigma, l1)?,
            flags2: enumerate_flags(sigma, l2)?,
            targets,
            entries: Vec::new(),
        })
    }
}

const CACHE_MAGIC: &str = "flagcert-density-table v1";

fn descriptor_text(
    sigma: &TypeSigma,
    (l1, l2, l): (usize, usize, usize),
    target: TableTarget,
    flags1: &[Flag],
    flags2: &[Flag],
    targets: &[String],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "type {}: {}", sigma.order(), sigma.graph());
    let _ = writeln!(out, "orders {l1} {l2} {l}");
    let _ = writeln!(out, "target {}", target.name());
    for (name, flags) in [("flags1", flags1), ("flags2", flags2)] {
        let _ = writeln!(out, "{name} {}", flags.len());
        for (i, f) in flags.iter().enumerate() {
            let _ = writeln!(out, "{i} {}", format_flag(f));
        }
    }
    let _ = writeln!(out, "targets {}", targets.len());
    for (i, t) in targets.iter().enumerate() {
        let _ = writeln!(out, "{i} {t}");
    }
    out
}

fn hex_digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The σ-flags `(G, θ)` over all σ-inducing injections `θ`, one entry each.
struct HostSet {
    label: String,
    flags: Vec<Flag>,
    injections: u64,
}

impl HostSet {
    fn from_graph(sigma: &TypeSigma, g: &Graph) -> Self {
        let k = sigma.order();
        let mut flags = Vec::new();
        for_each_injection(g.order(), k, &mut |theta| {
            if induces_type(g, sigma, theta) {
                flags.push(Flag::from_embedding(*sigma, g, theta).expect("θ induces σ"));
            }
        });
        Self {
            label: format_graph_line(g),
            flags,
            injections: falling_factorial(g.order(), k),
        }
    }
}

/// Adds, for each ordered sunflower `(V₁, V₂)` of `host`, one count to the
/// cell of the induced flag classes.
fn count_sunflowers(
    host: &Flag,
    c1: &Classifier,
    c2: &Classifier,
    a: usize,
    b: usize,
    counts: &mut [u64],
) {
    let k = host.type_order();
    let m = host.order() - k;
    let n2 = c2.space.len();
    let full = (1u32 << m) - 1;
    let second: Vec<(u32, usize)> = subsets_of_size(m, b)
        .map(|t| (t, c2.classify(host, &mask_vertices(t, k))))
        .collect();
    for s in subsets_of_size(m, a) {
        let i = c1.classify(host, &mask_vertices(s, k));
        for &(t, j) in &second {
            if t & !(full & !s) == 0 {
                counts[i * n2 + j] += 1;
            }
        }
    }
}

/// On-disk memo of [`DensityTable`]s keyed by their descriptor hash.
#[derive(Clone, Debug)]
pub struct DensityCache {
    dir: Option<PathBuf>,
}

impl DensityCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
        }
    }

    /// A cache that always recomputes and never writes.
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, table_hash: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("density-{}.txt", &table_hash[..16])))
    }

    /// Loads a matching table from disk or computes and stores it.
    pub fn load_or_compute(
        &self,
        sigma: &TypeSigma,
        l1: usize,
        l2: usize,
        l: usize,
        target: TableTarget,
    ) -> Result<DensityTable, DensityError> {
        let Some(dir) = &self.dir else {
            return DensityTable::compute(sigma, l1, l2, l, target);
        };
        let skeleton = DensityTable::skeleton(sigma, l1, l2, l, target)?;
        let path = self
            .path_for(&skeleton.content_hash())
            .expect("cache enabled");
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(table) = DensityTable::from_text_matching(&text, &skeleton) {
                return Ok(table);
            }
        }
        let table = DensityTable::compute(sigma, l1, l2, l, target)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, table.to_text())?;
        std::fs::rename(&tmp, &path)?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{enumerate_types, one_vertex_extension};
    use crate::graphs::{parse_edge_list, published_graphs};
    use crate::rational::{int, ratio};

    fn g(edges: &str, n: usize) -> Graph {
        parse_edge_list(edges, n).unwrap()
    }

    fn u(edges: &str, n: usize) -> Flag {
        Flag::unlabelled(g(edges, n))
    }

    #[test]
    fn self_density_is_one() {
        let sigma = enumerate_types(2).unwrap()[1];
        for f in enumerate_flags(&sigma, 4).unwrap() {
            assert_eq!(density(&f, &f).unwrap(), int(1));
        }
    }

    #[test]
    fn simple_densities() {
        assert_eq!(
            density(&u("{1, 2}", 2), &u("{1, 2}{1, 3}{2, 3}", 3)).unwrap(),
            int(1)
        );
        let g41 = Flag::unlabelled(published_graphs()[41]);
        assert_eq!(
            density(&Flag::unlabelled(Graph::complete(4)), &g41).unwrap(),
            ratio(1, 15)
        );
        assert!(matches!(
            density(&u("{1, 2}{1, 3}{2, 3}", 3), &u("{1, 2}", 2)),
            Err(DensityError::OrderTooLarge { .. })
        ));
        let unit = TypeSigma::unit_type().unit_flag();
        assert!(matches!(
            density(&unit, &u("{1, 2}", 2)),
            Err(DensityError::TypeMismatch)
        ));
    }

    #[test]
    fn pair_density_examples() {
        let edge = u("{1, 2}", 2);
        let c4 = u("{1, 2}{2, 3}{3, 4}{1, 4}", 4);
        assert_eq!(pair_density(&edge, &edge, &c4).unwrap(), ratio(2, 3));
        let sigma = TypeSigma::unit_type();
        let unit = sigma.unit_flag();
        for f in enumerate_flags(&sigma, 4).unwrap() {
            for f2 in enumerate_flags(&sigma, 3).unwrap() {
                assert_eq!(
                    pair_density(&unit, &f2, &f).unwrap(),
                    density(&f2, &f).unwrap()
                );
            }
        }
        assert!(matches!(
            pair_density(&c4, &edge, &c4),
            Err(DensityError::PairOrder { .. })
        ));
    }

    #[test]
    fn averaging_examples() {
        let sigma = TypeSigma::unit_type();
        let edge = Flag::from_embedding(sigma, &g("{1, 2}", 2), &[0]).unwrap();
        assert_eq!(averaging_coeff(&edge), int(1));
        let path = g("{1, 2}{2, 3}", 3);
        let centre = Flag::from_embedding(sigma, &path, &[1]).unwrap();
        assert_eq!(averaging_coeff(&centre), ratio(1, 3));
        let end = Flag::from_embedding(sigma, &path, &[0]).unwrap();
        assert_eq!(averaging_coeff(&end), ratio(2, 3));
        let empty = Flag::unlabelled(Graph::empty(3));
        assert_eq!(averaging_coeff(&empty), int(1));
    }

    #[test]
    fn objective_examples() {
        let col = objective_column(4, 6).unwrap();
        let graphs = enumerate_graphs(6).unwrap();
        let empty = graphs.iter().position(|h| h.edge_count() == 0).unwrap();
        assert_eq!(col[empty], int(1));
        let g41 = crate::graphs::graph_index(&published_graphs()[41]).unwrap();
        assert_eq!(col[g41], ratio(1, 15));
        assert!(col.iter().any(Zero::is_zero));
        assert!(matches!(
            objective_column(7, 6),
            Err(DensityError::CliqueOrder { .. })
        ));
    }

    #[test]
    fn graph_table_matches_injection_formula() {
        let sigma = TypeSigma::unit_type();
        let table = DensityTable::compute(&sigma, 2, 2, 3, TableTarget::Graphs).unwrap();
        let f: Vec<Flag> = (0..2)
            .map(|v| one_vertex_extension(&sigma, v).unwrap())
            .collect();
        for (gi, host) in enumerate_graphs(3).unwrap().iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let mut sum = Rational::zero();
                    for_each_injection(3, 1, &mut |theta| {
                        let flag = Flag::from_embedding(sigma, host, theta).unwrap();
                        sum += pair_density(&f[a], &f[b], &flag).unwrap();
                    });
                    assert_eq!(table.get(a, b, gi), &(sum / int(3)));
                }
            }
        }
    }

    #[test]
    fn flag_table_matches_pair_density() {
        let sigma = enumerate_types(2).unwrap()[0];
        let table = DensityTable::compute(&sigma, 3, 3, 4, TableTarget::Flags).unwrap();
        let hosts = enumerate_flags(&sigma, 4).unwrap();
        for (t, host) in hosts.iter().enumerate() {
            for (a, f1) in table.flags1().iter().enumerate() {
                for (b, f2) in table.flags2().iter().enumerate() {
                    assert_eq!(table.get(a, b, t), &pair_density(f1, f2, host).unwrap());
                }
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DensityCache::new(dir.path());
        let sigma = enumerate_types(2).unwrap()[1];
        let first = cache
            .load_or_compute(&sigma, 3, 3, 4, TableTarget::Graphs)
            .unwrap();
        let path = cache.path_for(&first.content_hash()).unwrap();
        assert!(path.exists());
        let second = cache
            .load_or_compute(&sigma, 3, 3, 4, TableTarget::Graphs)
            .unwrap();
        assert_eq!(first, second);
        let fresh = DensityCache::disabled()
            .load_or_compute(&sigma, 3, 3, 4, TableTarget::Graphs)
            .unwrap();
        assert_eq!(first, fresh);
        // A corrupted file is ignored and rewritten.
        std::fs::write(&path, "garbage").unwrap();
        let third = cache
            .load_or_compute(&sigma, 3, 3, 4, TableTarget::Graphs)
            .unwrap();
        assert_eq!(first, third);
    }
}
