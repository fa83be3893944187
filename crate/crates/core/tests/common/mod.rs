//! Checks shared by the property suite and the acceptance target.

#![allow(dead_code)]

use flagcert::algebra::{
    average, complement_vector, invariant_split, quadratic_coeff_matrices, FlagVector,
};
use flagcert::certify::{check_psd_rational, verify_certificate, Certificate, CertificateBlock};
use flagcert::densities::{density, pair_density};
use flagcert::flags::{enumerate_flags, enumerate_types};
use flagcert::graphs::enumerate_graphs;
use flagcert::rational::{to_f64, Rational, RationalMatrix};
use flagcert::sdp::SdpProblem;
use flagcert::TypeSigma;
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

/// `p(F₁; F)` for every flag of order `small` against every flag of order `large`.
fn density_matrix(sigma: &TypeSigma, small: usize, large: usize) -> Vec<Vec<Rational>> {
    let lo = enumerate_flags(sigma, small).unwrap();
    let hi = enumerate_flags(sigma, large).unwrap();
    lo.iter()
        .map(|a| hi.iter().map(|f| density(a, f).unwrap()).collect())
        .collect()
}

/// Columns of every density matrix sum to one and `D(a→c) = D(a→b)·D(b→c)`
/// for all `k ≤ a ≤ b ≤ c ≤ max_l`. Returns the number of identities checked.
pub fn partition_and_chain(sigma: &TypeSigma, max_l: usize) -> Result<usize, String> {
    let k = sigma.order().max(1);
    let mut checked = 0;
    let mut mats = std::collections::BTreeMap::new();
    for a in k..=max_l {
        for c in a..=max_l {
            mats.insert((a, c), density_matrix(sigma, a, c));
        }
    }
    for ((a, c), d) in &mats {
        let hosts = d.first().map_or(0, Vec::len);
        for f in 0..hosts {
            let total: Rational = d.iter().map(|row| row[f].clone()).sum();
            if !total.is_one() {
                return Err(format!("order {a} in {c}: column {f} sums to {total}"));
            }
            checked += 1;
        }
        for b in *a..=*c {
            let left = &mats[&(*a, b)];
            let right = &mats[&(b, *c)];
            for (i, row) in d.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    let got: Rational = (0..right.len()).map(|m| &left[i][m] * &right[m][j]).sum();
                    if &got != want {
                        return Err(format!("chain {a}→{b}→{c} fails at ({i}, {j})"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// For sampled host flags of order 6 over order-4 types: single densities
/// and pair densities of order-5 flags each sum to one, and summing the
/// pair density over the second flag gives the single density.
pub fn order4_sampled<R: Rng>(rng: &mut R, samples: usize) -> Result<usize, String> {
    let types = enumerate_types(4).unwrap();
    let mut checked = 0;
    for _ in 0..samples {
        let sigma = types[rng.gen_range(0..types.len())];
        let hosts = enumerate_flags(&sigma, 6).unwrap();
        let f = hosts[rng.gen_range(0..hosts.len())];
        let small = enumerate_flags(&sigma, 5).unwrap();
        let singles: Vec<Rational> = small.iter().map(|a| density(a, &f).unwrap()).collect();
        if !singles.iter().cloned().sum::<Rational>().is_one() {
            return Err(format!("single densities in {f:?} do not sum to one"));
        }
        let mut total = Rational::zero();
        for (a, fa) in small.iter().enumerate() {
            let marginal: Rational = small
                .iter()
                .map(|fb| pair_density(fa, fb, &f).unwrap())
                .sum();
            if marginal != singles[a] {
                return Err(format!("marginal of flag {a} differs in {f:?}"));
            }
            total += marginal;
            checked += 1;
        }
        if !total.is_one() {
            return Err(format!("pair densities in {f:?} sum to {total}"));
        }
        checked += 2;
    }
    Ok(checked)
}

/// `⟦f·g⟧_σ = 0` for every invariant `f` and antiinvariant `g`, every
/// order-4 type, every graph on six vertices.
pub fn orthogonality_order4() -> Result<usize, String> {
    let types = enumerate_types(4).unwrap();
    let results: Vec<Result<usize, String>> = types
        .par_iter()
        .map(|sigma| {
            let (plus, minus) = invariant_split(sigma, 5).unwrap();
            let p = plus.len();
            let basis: Vec<FlagVector> = plus.into_iter().chain(minus).collect();
            let mats = quadratic_coeff_matrices(sigma, &basis, 6).unwrap();
            let mut checked = 0;
            for m in &mats {
                for i in 0..p {
                    for j in p..basis.len() {
                        if !m.entries.get(i, j).is_zero() {
                            return Err(format!(
                                "type {sigma:?}: cross term ({i}, {j}) on graph {}",
                                m.graph
                            ));
                        }
                        checked += 1;
                    }
                }
            }
            Ok(checked)
        })
        .collect();
    results.into_iter().sum()
}

/// `M_G` for every block of `p`, rebuilt from flag products and the
/// averaging operator instead of density tables.
pub fn product_oracle(p: &SdpProblem) -> Vec<Vec<RationalMatrix>> {
    let n = enumerate_graphs(p.spec.ell).unwrap().len();
    p.blocks
        .par_iter()
        .map(|b| {
            let mut out = vec![RationalMatrix::zeros(b.dim()); n];
            let mut bases = vec![b.basis.clone()];
            if b.shared {
                bases.push(
                    b.basis
                        .iter()
                        .map(|v| complement_vector(v).unwrap())
                        .collect(),
                );
            }
            for basis in &bases {
                for i in 0..basis.len() {
                    for j in i..basis.len() {
                        let prod = basis[i].product(&basis[j], p.spec.ell).unwrap();
                        for (g, c) in average(&prod).unwrap() {
                            out[g].add_at(i, j, &c);
                            if i != j {
                                out[g].add_at(j, i, &c);
                            }
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Sets the bound to `min_G (obj_G − Σ A_b • M_G^b)` with `M` from the
/// oracle, then checks that verification agrees row by row, passes at that
/// bound, fails just above it on exactly the minimising graphs, and that the
/// floating-point evaluation matches.
pub fn slack_validity(
    p: &SdpProblem,
    oracle: &[Vec<RationalMatrix>],
    mats: &[RationalMatrix],
) -> Result<(), String> {
    let n = p.graphs.len();
    let r: Vec<Rational> = (0..n)
        .map(|g| mats.iter().zip(oracle).map(|(a, m)| a.dot(&m[g])).sum())
        .collect();
    let slack: Vec<Rational> = (0..n).map(|g| &p.objective[g] - &r[g]).collect();
    let bound = slack.iter().min().unwrap().clone();
    let blocks: Vec<CertificateBlock> = p
        .blocks
        .iter()
        .zip(mats)
        .map(|(b, a)| CertificateBlock {
            sigma: b.sigma,
            parity: b.parity,
            shared: b.shared,
            basis: b.basis.clone(),
            matrix: a.clone(),
        })
        .collect();
    let mut cert = Certificate {
        spec: p.spec.clone(),
        bound: bound.clone(),
        blocks,
    };
    let report = verify_certificate(&cert).map_err(|e| e.to_string())?;
    if !report.passes() {
        return Err(format!("fails at its own minimum slack {bound}"));
    }
    for row in &report.rows {
        let g = p.graphs.iter().position(|h| *h == row.graph).unwrap();
        if row.r != r[g] {
            return Err(format!(
                "row {}: R = {} but oracle gives {}",
                row.index, row.r, r[g]
            ));
        }
    }
    let minimisers: Vec<usize> = (0..n).filter(|&g| slack[g] == bound).collect();
    cert.bound = &bound + Rational::new(BigInt::one(), BigInt::from(1_000_000_000u64));
    let above = verify_certificate(&cert).map_err(|e| e.to_string())?;
    let mut failing: Vec<usize> = above
        .rows
        .iter()
        .filter(|row| row.diff() < Rational::zero())
        .map(|row| p.graphs.iter().position(|h| *h == row.graph).unwrap())
        .collect();
    failing.sort_unstable();
    if failing != minimisers {
        return Err(format!(
            "just above the bound {failing:?} fail, expected {minimisers:?}"
        ));
    }
    let numeric = p.numeric();
    let dense: Vec<DMatrix<f64>> = mats.iter().map(to_dense).collect();
    for (g, v) in numeric.apply(&dense).iter().enumerate() {
        if (v - to_f64(&r[g])).abs() > 1e-9 {
            return Err(format!("graph {g}: float {v} vs exact {}", to_f64(&r[g])));
        }
    }
    Ok(())
}

pub fn to_dense(m: &RationalMatrix) -> DMatrix<f64> {
    let rows = m.to_f64_rows();
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| rows[i][j])
}

/// `B Bᵀ / scale` with `B` having small integer entries.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize, rank: usize, scale: i64) -> RationalMatrix {
    let b: Vec<Vec<i64>> = (0..dim)
        .map(|_| (0..rank).map(|_| rng.gen_range(-4..=4)).collect())
        .collect();
    let mut m = RationalMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v: i64 = (0..rank).map(|r| b[i][r] * b[j][r]).sum();
            m.set(i, j, Rational::new(BigInt::from(v), BigInt::from(scale)));
        }
    }
    m
}

/// Symmetric matrix with entries `n/d`, `|n| ≤ 9`, `d ∈ 1..=4`, shifted by
/// `shift` on the diagonal.
pub fn random_symmetric<R: Rng>(rng: &mut R, dim: usize, shift: i64) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let v = Rational::new(
                BigInt::from(rng.gen_range(-9..=9)),
                BigInt::from(rng.gen_range(1..=4)),
            );
            let v = if i == j {
                v + Rational::from_integer(BigInt::from(shift))
            } else {
                v
            };
            m.set(i, j, v.clone());
            m.set(j, i, v);
        }
    }
    m
}

/// Whether the rational verdict matches the sign of the smallest eigenvalue;
/// `None` when that eigenvalue is within `1e-6` of zero.
pub fn ldlt_agrees_with_eigen(m: &RationalMatrix) -> Option<bool> {
    let eig = SymmetricEigen::new(to_dense(m));
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min.abs() <= 1e-6 {
        return None;
    }
    Some(check_psd_rational(m).is_psd == (min > 0.0))
}
