//! Linear combinations of flags, products, the averaging operator and the
//! per-graph quadratic-form coefficients consumed by the SDP.

use crate::densities::{
    averaging_coeff, pair_density, DensityCache, DensityError, DensityTable, TableTarget,
};
use crate::flags::{
    aut_group, complement_flag, complement_type, enumerate_flags, permute_label_set, Flag,
    FlagError, FlagSpace, TypeSigma,
};
use crate::graphs::graph_index;
use crate::rational::{int, Rational, RationalMatrix};
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest host order for products and quadratic forms.
pub const MAX_ALGEBRA_ORDER: usize = 6;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("product of order-{l1} and order-{l2} flags over a type of order {k} needs order {need} > {l}")]
    OrderOverflow {
        l1: usize,
        l2: usize,
        k: usize,
        need: usize,
        l: usize,
    },
    #[error("vectors live over different types or orders")]
    Mismatch,
    #[error("the symmetry split needs flags of order k + 1 = {expected}, got {got}")]
    SplitOrder { expected: usize, got: usize },
    #[error("flag index {0} out of range")]
    IndexOutOfRange(usize),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Flag(#[from] FlagError),
}

/// A finite rational combination of the flags `enumerate_flags(σ, order)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagVector {
    pub sigma: TypeSigma,
    pub order: usize,
    pub coeffs: BTreeMap<usize, Rational>,
}

impl FlagVector {
    pub fn zero(sigma: TypeSigma, order: usize) -> Self {
        Self {
            sigma,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    /// The basis vector of flag `index`.
    pub fn unit(sigma: TypeSigma, order: usize, index: usize) -> Self {
        let mut v = Self::zero(sigma, order);
        v.coeffs.insert(index, Rational::one());
        v
    }

    /// The vector of a single flag, located in the enumeration.
    pub fn from_flag(flag: &Flag) -> Result<Self, AlgebraError> {
        let flags = enumerate_flags(flag.sigma(), flag.order())?;
        let key = flag.key();
        let index = flags
            .iter()
            .position(|f| f.key() == key)
            .expect("every flag occurs in its enumeration");
        Ok(Self::unit(*flag.sigma(), flag.order(), index))
    }

    pub fn add_term(&mut self, index: usize, c: &Rational) {
        let entry = self.coeffs.entry(index).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&index);
        }
    }

    pub fn flags(&self) -> Result<Vec<Flag>, AlgebraError> {
        Ok(enumerate_flags(&self.sigma, self.order)?)
    }

    /// Terms as `(coefficient, flag)` pairs in index order.
    pub fn terms(&self) -> Result<Vec<(Rational, Flag)>, AlgebraError> {
        let flags = self.flags()?;
        self.coeffs
            .iter()
            .map(|(&i, c)| {
                flags
                    .get(i)
                    .map(|f| (c.clone(), *f))
                    .ok_or(AlgebraError::IndexOutOfRange(i))
            })
            .collect()
    }

    /// `self · other` expanded over flags of order `l`.
    pub fn product(&self, other: &FlagVector, l: usize) -> Result<FlagVector, AlgebraError> {
        if self.sigma != other.sigma {
            return Err(AlgebraError::Mismatch);
        }
        check_orders(&self.sigma, self.order, other.order, l)?;
        let hosts = enumerate_flags(&self.sigma, l)?;
        let lhs = self.terms()?;
        let rhs = other.terms()?;
        let mut out = FlagVector::zero(self.sigma, l);
        for (h, host) in hosts.iter().enumerate() {
            let mut acc = Rational::zero();
            for (a, fa) in &lhs {
                for (b, fb) in &rhs {
                    let p = pair_density(fa, fb, host)?;
                    if !p.is_zero() {
                        acc += a * b * p;
                    }
                }
            }
            out.add_term(h, &acc);
        }
        Ok(out)
    }
}

fn check_orders(sigma: &TypeSigma, l1: usize, l2: usize, l: usize) -> Result<(), AlgebraError> {
    let k = sigma.order();
    let need = l1 + l2 - k;
    if need > l || l > MAX_ALGEBRA_ORDER {
        return Err(AlgebraError::OrderOverflow { l1, l2, k, need, l });
    }
    Ok(())
}

/// `F₁ · F₂ = Σ_F p(F₁, F₂; F) F` over σ-flags of order `l`.
pub fn product_expand(f1: &Flag, f2: &Flag, l: usize) -> Result<FlagVector, AlgebraError> {
    FlagVector::from_flag(f1)?.product(&FlagVector::from_flag(f2)?, l)
}

/// `⟦v⟧_σ` as a map from graph index (in `enumerate_graphs(order)`) to coefficient.
pub fn average(v: &FlagVector) -> Result<BTreeMap<usize, Rational>, AlgebraError> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (c, f) in v.terms()? {
        let q = averaging_coeff(&f);
        if q.is_zero() {
            continue;
        }
        let g = graph_index(f.graph()).expect("flag graphs are enumerated");
        let entry = out.entry(g).or_insert_with(Rational::zero);
        *entry += c * q;
        if entry.is_zero() {
            out.remove(&g);
        }
    }
    Ok(out)
}

/// The same combination over complemented flags (over the complemented type).
pub fn complement_vector(v: &FlagVector) -> Result<FlagVector, AlgebraError> {
    let flags = v.flags()?;
    let sigma = complement_type(&v.sigma);
    let space = FlagSpace::new(&sigma, v.order)?;
    let mut out = FlagVector::zero(sigma, v.order);
    for (&i, c) in &v.coeffs {
        let f = flags.get(i).ok_or(AlgebraError::IndexOutOfRange(i))?;
        let j = space
            .position(&complement_flag(f))
            .expect("complemented flags are enumerated");
        out.add_term(j, c);
    }
    Ok(out)
}

/// Orbits of label subsets `V ⊆ [k]` under `Aut(σ)`, each sorted, ordered by
/// their smallest member.
pub fn subset_orbits(sigma: &TypeSigma) -> Vec<Vec<u32>> {
    let k = sigma.order();
    let group = aut_group(sigma);
    let mut seen = vec![false; 1 << k];
    let mut orbits = Vec::new();
    for v in 0..1u32 << k {
        if seen[v as usize] {
            continue;
        }
        let mut orbit: Vec<u32> = group.iter().map(|p| permute_label_set(p, v)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &w in &orbit {
            seen[w as usize] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

/// Generating systems of the `Aut(σ)`-invariant part (orbit sums of the
/// `F_V`) and the antiinvariant part (differences `F_{W₀} − F_{Wⱼ}` within
/// each orbit) of the order-(k+1) flag space.
pub fn invariant_split(
    sigma: &TypeSigma,
    l: usize,
) -> Result<(Vec<FlagVector>, Vec<FlagVector>), AlgebraError> {
    let k = sigma.order();
    if l != k + 1 {
        return Err(AlgebraError::SplitOrder {
            expected: k + 1,
            got: l,
        });
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for orbit in subset_orbits(sigma) {
        let mut sum = FlagVector::zero(*sigma, l);
        for &v in &orbit {
            sum.add_term(v as usize, &Rational::one());
        }
        plus.push(sum);
        for &w in &orbit[1..] {
            let mut diff = FlagVector::unit(*sigma, l, orbit[0] as usize);
            diff.add_term(w as usize, &int(-1));
            minus.push(diff);
        }
    }
    Ok((plus, minus))
}

/// Entry `(a, b)` is the coefficient of graph `graph` in `⟦basis_a · basis_b⟧_σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    pub sigma: TypeSigma,
    pub graph: usize,
    pub entries: RationalMatrix,
}

/// Coefficient matrices for every graph in `enumerate_graphs(l)`, same order,
/// computed directly over σ-inducing injections.
pub fn quadratic_coeff_matrices(
    sigma: &TypeSigma,
    basis: &[FlagVector],
    l: usize,
) -> Result<Vec<CoefficientMatrix>, AlgebraError> {
    quadratic_coeff_matrices_cached(sigma, basis, l, &DensityCache::disabled())
}

/// As [`quadratic_coeff_matrices`], reading the pair-density table through `cache`.
pub fn quadratic_coeff_matrices_cached(
    sigma: &TypeSigma,
    basis: &[FlagVector],
    l: usize,
    cache: &DensityCache,
) -> Result<Vec<CoefficientMatrix>, AlgebraError> {
    let order = basis.first().map_or(sigma.order() + 1, |v| v.order);
    if basis.iter().any(|v| v.sigma != *sigma || v.order != order) {
        return Err(AlgebraError::Mismatch);
    }
    check_orders(sigma, order, order, l)?;
    let table = cache.load_or_compute(sigma, order, order, l, TableTarget::Graphs)?;
    Ok(coefficient_matrices_from_table(&table, basis))
}

/// `Bᵀ R_G B` for every target `G` of a graph-target table.
pub fn coefficient_matrices_from_table(
    table: &DensityTable,
    basis: &[FlagVector],
) -> Vec<CoefficientMatrix> {
    let n = table.flags1().len();
    let dim = basis.len();
    let sigma = *table.sigma();
    let terms: Vec<Vec<(usize, &Rational)>> = basis
        .iter()
        .map(|v| v.coeffs.iter().map(|(&i, c)| (i, c)).collect())
        .collect();
    (0..table.target_count())
        .into_par_iter()
        .map(|g| {
            let r = table.slice(g);
            let mut m = RationalMatrix::zeros(dim);
            if r.iter().all(Zero::is_zero) {
                return CoefficientMatrix {
                    sigma,
                    graph: g,
                    entries: m,
                };
            }
            for i in 0..dim {
                for j in i..dim {
                    let mut acc = Rational::zero();
                    for &(p, cp) in &terms[i] {
                        for &(q, cq) in &terms[j] {
                            let x = &r[p * n + q];
                            if !x.is_zero() {
                                acc += cp * cq * x;
                            }
                        }
                    }
                    if i != j {
                        m.set(j, i, acc.clone());
                    }
                    m.set(i, j, acc);
                }
            }
            CoefficientMatrix {
                sigma,
                graph: g,
                entries: m,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{enumerate_types, one_vertex_extension};
    use crate::graphs::{enumerate_graphs, parse_edge_list, Graph};
    use crate::rational::ratio;

    #[test]
    fn unit_squared_is_unit() {
        let sigma = enumerate_types(2).unwrap()[1];
        let one = sigma.unit_flag();
        let sq = product_expand(&one, &one, 2).unwrap();
        assert_eq!(sq, FlagVector::unit(sigma, 2, 0));
    }

    #[test]
    fn edge_times_edge_on_four_vertices() {
        let edge = Flag::unlabelled(Graph::complete(2));
        let prod = product_expand(&edge, &edge, 4).unwrap();
        let flags = prod.flags().unwrap();
        let c4 = parse_edge_list("{1, 2}{2, 3}{3, 4}{1, 4}", 4).unwrap();
        let (i, _) = flags
            .iter()
            .enumerate()
            .find(|(_, f)| f.graph().is_isomorphic(&c4))
            .unwrap();
        assert_eq!(prod.coeffs[&i], ratio(2, 3));
        // Summed over every pair of order-2 graphs the products cover each host once.
        let twos = enumerate_flags(&TypeSigma::empty_type(), 2).unwrap();
        let mut total = FlagVector::zero(TypeSigma::empty_type(), 4);
        for a in &twos {
            for b in &twos {
                for (h, c) in product_expand(a, b, 4).unwrap().coeffs {
                    total.add_term(h, &c);
                }
            }
        }
        assert_eq!(total.coeffs.len(), 11);
        assert!(total.coeffs.values().all(|c| c.is_one()));
    }

    #[test]
    fn neighbour_pairs_equal_squared_degree() {
        // Over the unit type, the square of "labelled vertex adjacent to the
        // free vertex" is the sum of the two order-3 flags where the labelled
        // vertex sees both free vertices.
        let sigma = TypeSigma::unit_type();
        let adj = one_vertex_extension(&sigma, 1).unwrap();
        let sq = product_expand(&adj, &adj, 3).unwrap();
        let flags = sq.flags().unwrap();
        let mut expected = FlagVector::zero(sigma, 3);
        for (i, f) in flags.iter().enumerate() {
            if f.graph().neighbours(0) == 0b110 {
                expected.add_term(i, &Rational::one());
            }
        }
        assert_eq!(expected.coeffs.len(), 2);
        assert_eq!(sq, expected);
    }

    #[test]
    fn averaging_single_flags() {
        let sigma = TypeSigma::unit_type();
        let edge = Flag::from_embedding(sigma, &Graph::complete(2), &[0]).unwrap();
        let avg = average(&FlagVector::from_flag(&edge).unwrap()).unwrap();
        let k2 = graph_index(&Graph::complete(2)).unwrap();
        assert_eq!(avg, BTreeMap::from([(k2, Rational::one())]));
        let path = parse_edge_list("{1, 2}{2, 3}", 3).unwrap();
        let centre = Flag::from_embedding(sigma, &path, &[1]).unwrap();
        let avg = average(&FlagVector::from_flag(&centre).unwrap()).unwrap();
        assert_eq!(
            avg,
            BTreeMap::from([(graph_index(&path).unwrap(), ratio(1, 3))])
        );
    }

    #[test]
    fn split_dimensions() {
        let types = enumerate_types(4).unwrap();
        let k4 = types.iter().find(|t| t.graph().edge_count() == 6).unwrap();
        let (plus, minus) = invariant_split(k4, 5).unwrap();
        assert_eq!(plus.len(), 5);
        assert_eq!(minus.len(), 11);
        for t in &types {
            let (plus, minus) = invariant_split(t, 5).unwrap();
            assert_eq!(plus.len() + minus.len(), 16);
            if aut_group(t).len() == 1 {
                assert!(minus.is_empty());
            }
        }
        let path = TypeSigma::new(parse_edge_list("{1, 2}{2, 3}{3, 4}", 4).unwrap());
        let (plus, minus) = invariant_split(&path, 5).unwrap();
        let pairs = subset_orbits(&path).iter().filter(|o| o.len() == 2).count();
        assert_eq!(minus.len(), pairs);
        assert_eq!(plus.len(), 16 - pairs);
        assert!(matches!(
            invariant_split(&path, 6),
            Err(AlgebraError::SplitOrder { .. })
        ));
    }

    #[test]
    fn direct_matrices_match_two_step_oracle() {
        let sigma = TypeSigma::unit_type();
        let basis: Vec<FlagVector> = (0..2).map(|i| FlagVector::unit(sigma, 2, i)).collect();
        let mats = quadratic_coeff_matrices(&sigma, &basis, 3).unwrap();
        assert_eq!(mats.len(), enumerate_graphs(3).unwrap().len());
        for a in 0..2 {
            for b in 0..2 {
                let avg = average(&basis[a].product(&basis[b], 3).unwrap()).unwrap();
                for m in &mats {
                    let want = avg.get(&m.graph).cloned().unwrap_or_else(Rational::zero);
                    assert_eq!(m.entries.get(a, b), &want);
                }
            }
        }
    }

    #[test]
    fn complement_vector_reindexes_extensions() {
        let sigma = TypeSigma::new(parse_edge_list("{1, 2}{2, 3}", 3).unwrap());
        let mut v = FlagVector::unit(sigma, 4, 0b011);
        v.add_term(0b100, &int(-2));
        let c = complement_vector(&v).unwrap();
        assert_eq!(c.sigma, complement_type(&sigma));
        assert_eq!(c.coeffs[&0b100], Rational::one());
        assert_eq!(c.coeffs[&0b011], int(-2));
        assert_eq!(complement_vector(&c).unwrap(), v);
    }

    #[test]
    fn order_overflow_is_reported() {
        let sigma = enumerate_types(4).unwrap()[0];
        let basis = vec![FlagVector::unit(sigma, 5, 0)];
        assert!(matches!(
            quadratic_coeff_matrices(&sigma, &basis, 5),
            Err(AlgebraError::OrderOverflow { .. })
        ));
    }
}
