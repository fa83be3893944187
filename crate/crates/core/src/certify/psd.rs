//! Exact positive-semidefiniteness test by rational `LDLᵀ` with symmetric pivoting.

use crate::rational::{Rational, RationalMatrix};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum PsdWitness {
    /// `PMPᵀ = LDLᵀ` with `P` from `order`; `pivots` is the diagonal of `D`
    /// (all ≥ 0), one per eliminated index, followed by zeros for the rest.
    Factorization {
        order: Vec<usize>,
        pivots: Vec<Rational>,
    },
    /// A vector with `vᵀ M v = value < 0`.
    NegativeDirection {
        vector: Vec<Rational>,
        value: Rational,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub witness: PsdWitness,
}

impl PsdVerdict {
    /// Smallest pivot for a PSD verdict (`None` otherwise or when empty).
    pub fn min_pivot(&self) -> Option<&Rational> {
        match &self.witness {
            PsdWitness::Factorization { pivots, .. } => pivots.iter().min(),
            PsdWitness::NegativeDirection { .. } => None,
        }
    }
}

/// `vᵀ M v`.
pub fn quadratic_form(m: &RationalMatrix, v: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..m.dim() {
        if v[i].is_zero() {
            continue;
        }
        for j in 0..m.dim() {
            if !v[j].is_zero() && !m.get(i, j).is_zero() {
                acc += &v[i] * m.get(i, j) * &v[j];
            }
        }
    }
    acc
}

/// Decides `M ⪰ 0` exactly. The input must be symmetric.
///
/// Keeps `W = E M Eᵀ` with `E` built from row operations, so every remaining
/// diagonal `W_ii` equals `eᵢᵀ E M Eᵀ eᵢ` and a negative one exposes the
/// direction `Eᵀ eᵢ`.
pub fn check_psd_rational(m: &RationalMatrix) -> PsdVerdict {
    assert!(
        m.is_symmetric(),
        "check_psd_rational needs a symmetric matrix"
    );
    let n = m.dim();
    let mut w: Vec<Vec<Rational>> = m.rows().map(<[Rational]>::to_vec).collect();
    let mut e: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);

    loop {
        if let Some(&i) = remaining.iter().find(|&&i| w[i][i].is_negative()) {
            return negative(e[i].clone(), w[i][i].clone());
        }
        let pivot = remaining
            .iter()
            .copied()
            .filter(|&i| w[i][i].is_positive())
            .max_by(|&a, &b| w[a][a].cmp(&w[b][b]));
        let Some(p) = pivot else {
            // Zero diagonal: any nonzero off-diagonal gives a negative direction.
            for (a, &i) in remaining.iter().enumerate() {
                for &j in &remaining[a + 1..] {
                    if !w[i][j].is_zero() {
                        let sign = if w[i][j].is_positive() { -1 } else { 1 };
                        let v: Vec<Rational> = (0..n)
                            .map(|c| &e[i][c] + Rational::from_integer(sign.into()) * &e[j][c])
                            .collect();
                        let value = -Rational::from_integer(2.into()) * w[i][j].abs();
                        return negative(v, value);
                    }
                }
            }
            order.extend(remaining.iter().copied());
            pivots.extend(remaining.iter().map(|_| Rational::zero()));
            return PsdVerdict {
                is_psd: true,
                witness: PsdWitness::Factorization { order, pivots },
            };
        };
        remaining.retain(|&i| i != p);
        let d = w[p][p].clone();
        let ep = e[p].clone();
        for &i in &remaining {
            if w[i][p].is_zero() {
                continue;
            }
            let f = &w[i][p] / &d;
            for &j in &remaining {
                if !w[p][j].is_zero() {
                    let delta = &f * &w[p][j];
                    w[i][j] -= delta;
                }
            }
            for (x, y) in e[i].iter_mut().zip(&ep) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        for &i in &remaining {
            w[i][p] = Rational::zero();
            w[p][i] = Rational::zero();
        }
        order.push(p);
        pivots.push(d);
        if remaining.is_empty() {
            return PsdVerdict {
                is_psd: true,
                witness: PsdWitness::Factorization { order, pivots },
            };
        }
    }
}

fn negative(vector: Vec<Rational>, value: Rational) -> PsdVerdict {
    PsdVerdict {
        is_psd: false,
        witness: PsdWitness::NegativeDirection { vector, value },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use num_bigint::BigInt;

    fn mat(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn assert_witness(m: &RationalMatrix, v: &PsdVerdict) {
        if let PsdWitness::NegativeDirection { vector, value } = &v.witness {
            assert!(value.is_negative());
            assert_eq!(&quadratic_form(m, vector), value);
        }
    }

    #[test]
    fn identity_is_psd() {
        let v = check_psd_rational(&RationalMatrix::identity(4));
        assert!(v.is_psd);
        assert_eq!(v.min_pivot(), Some(&int(1)));
    }

    #[test]
    fn tiny_negative_diagonal() {
        let mut m = RationalMatrix::identity(2);
        let eps = Rational::new(BigInt::from(-1), num_traits::pow(BigInt::from(10), 30));
        m.set(1, 1, eps.clone());
        let v = check_psd_rational(&m);
        assert!(!v.is_psd);
        assert_eq!(
            v.witness,
            PsdWitness::NegativeDirection {
                vector: vec![int(0), int(1)],
                value: eps
            }
        );
    }

    #[test]
    fn semidefinite_with_zero_rows() {
        let m = mat(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 0]]);
        let v = check_psd_rational(&m);
        assert!(v.is_psd);
        let m = mat(&[&[0, 1], &[1, 0]]);
        let v = check_psd_rational(&m);
        assert!(!v.is_psd);
        assert_witness(&m, &v);
    }

    #[test]
    fn indefinite_after_elimination() {
        // Leading minors 1 and 1 - 4 < 0.
        let m = mat(&[&[1, 2, 0], &[2, 1, 0], &[0, 0, 3]]);
        let v = check_psd_rational(&m);
        assert!(!v.is_psd);
        assert_witness(&m, &v);
        let m = RationalMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 3), ratio(2, 9)],
        ])
        .unwrap();
        assert!(check_psd_rational(&m).is_psd);
    }
}
