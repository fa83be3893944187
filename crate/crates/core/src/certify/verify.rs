//! End-to-end certificate verification with exact arithmetic.

use super::psd::{check_psd_rational, PsdVerdict};
use super::{Certificate, CertifyError};
use crate::densities::{objective_column, DensityCache};
use crate::graphs::{enumerate_graphs, graph_index, published_graphs, Graph};
use crate::rational::{factorial, format_decimal, Rational, RationalMatrix};
use crate::sdp::block_coefficients;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::io::{self, Write};

/// One host graph: `l = obj_G − bound`, `r = Σ_b A_b • M_G^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackRow {
    /// Row number in the report (published numbering for ℓ = 6).
    pub index: usize,
    pub graph: Graph,
    pub l: Rational,
    pub r: Rational,
}

impl SlackRow {
    pub fn diff(&self) -> Rational {
        &self.l - &self.r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockCheck {
    pub label: String,
    pub verdict: PsdVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlackReport {
    pub ell: usize,
    pub bound: Rational,
    pub rows: Vec<SlackRow>,
    pub blocks: Vec<BlockCheck>,
}

impl SlackReport {
    /// Every block PSD and every slack nonnegative.
    pub fn passes(&self) -> bool {
        self.blocks.iter().all(|b| b.verdict.is_psd)
            && self.rows.iter().all(|r| !r.diff().is_negative())
    }

    /// Report indices of the rows with negative slack.
    pub fn failing_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.diff().is_negative())
            .map(|r| r.index)
            .collect()
    }

    /// The row with the smallest slack.
    pub fn min_slack(&self) -> Option<&SlackRow> {
        self.rows.iter().min_by(|a, b| a.diff().cmp(&b.diff()))
    }

    /// Streams the table: `i`, `ℓ!·L`, `ℓ!·R`, `(ℓ!·L − ℓ!·R)·10³`, four decimals each.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.ell;
        writeln!(w, "i\t{n}!L\t{n}!R\t({n}!L-{n}!R)10^3")?;
        let scale = Rational::from_integer(factorial(n));
        let thousand = Rational::from_integer(1000.into());
        for row in &self.rows {
            let l = &row.l * &scale;
            let r = &row.r * &scale;
            let d = (&l - &r) * &thousand;
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                row.index,
                format_decimal(&l, 4),
                format_decimal(&r, 4),
                format_decimal(&d, 4)
            )?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = Vec::new();
        self.write_tsv(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("report is UTF-8")
    }
}

/// Row order for reports: published numbering on six vertices, enumeration order otherwise.
/// Each entry is `(report index, enumeration index)`.
fn report_order(ell: usize) -> Result<Vec<(usize, usize)>, CertifyError> {
    let count = enumerate_graphs(ell)?.len();
    if ell == 6 {
        let published = published_graphs();
        let mut order = Vec::with_capacity(published.len());
        for (i, g) in published.iter().enumerate() {
            let e = graph_index(g)
                .ok_or_else(|| CertifyError::FixtureMissing(format!("graph table row {i}")))?;
            order.push((i, e));
        }
        if order.len() == count {
            return Ok(order);
        }
    }
    Ok((0..count).map(|i| (i, i)).collect())
}

/// Rebuilds every coefficient matrix from scratch (no cache), checks each
/// block for PSD-ness and every host graph for nonnegative slack.
pub fn verify_certificate(c: &Certificate) -> Result<SlackReport, CertifyError> {
    c.spec.validate()?;
    let ell = c.spec.ell;
    let graphs = enumerate_graphs(ell)?;
    let objective = objective_column(c.spec.t, ell)?;
    let cache = DensityCache::disabled();

    let mut checks = Vec::with_capacity(c.blocks.len());
    let mut coeffs: Vec<Vec<RationalMatrix>> = Vec::with_capacity(c.blocks.len());
    for (b, block) in c.blocks.iter().enumerate() {
        if block.matrix.dim() != block.basis.len() {
            return Err(CertifyError::Descriptor(format!(
                "block {b}: matrix of size {} for a basis of {} vectors",
                block.matrix.dim(),
                block.basis.len()
            )));
        }
        if !block.matrix.is_symmetric() {
            return Err(CertifyError::Format(format!(
                "block {b}: matrix is not symmetric"
            )));
        }
        if block.basis.iter().any(|v| v.sigma != block.sigma) {
            return Err(CertifyError::Descriptor(format!(
                "block {b}: basis over a different type"
            )));
        }
        checks.push(BlockCheck {
            label: format!(
                "[{}]{}{}",
                crate::flags::format_type(&block.sigma),
                block.parity,
                if block.shared { " shared" } else { "" }
            ),
            verdict: check_psd_rational(&block.matrix),
        });
        coeffs.push(if block.basis.is_empty() {
            vec![RationalMatrix::zeros(0); graphs.len()]
        } else {
            block_coefficients(&block.sigma, &block.basis, block.shared, ell, &cache)?
        });
    }

    let order = report_order(ell)?;
    let rows = order
        .par_iter()
        .map(|&(index, g)| {
            let mut r = Rational::zero();
            for (block, m) in c.blocks.iter().zip(&coeffs) {
                if !m[g].is_zero() {
                    r += block.matrix.dot(&m[g]);
                }
            }
            SlackRow {
                index,
                graph: graphs[g],
                l: &objective[g] - &c.bound,
                r,
            }
        })
        .collect();
    Ok(SlackReport {
        ell,
        bound: c.bound.clone(),
        rows,
        blocks: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::CertificateBlock;
    use crate::densities::DensityCache;
    use crate::rational::{int, ratio};
    use crate::sdp::{build_problem, ObjectiveSpec};

    fn zero_certificate(spec: ObjectiveSpec, bound: Rational) -> Certificate {
        let p = build_problem(&spec, &DensityCache::disabled()).unwrap();
        Certificate {
            spec,
            bound,
            blocks: p
                .blocks
                .iter()
                .map(|b| CertificateBlock {
                    sigma: b.sigma,
                    parity: b.parity,
                    shared: b.shared,
                    basis: b.basis.clone(),
                    matrix: RationalMatrix::zeros(b.dim()),
                })
                .collect(),
        }
    }

    #[test]
    fn goodman_certificate_verifies() {
        let mut c = zero_certificate(ObjectiveSpec::goodman(), ratio(1, 4));
        let m = RationalMatrix::from_rows(vec![
            vec![ratio(3, 4), ratio(-3, 4)],
            vec![ratio(-3, 4), ratio(3, 4)],
        ])
        .unwrap();
        c.blocks[0].matrix = m;
        let report = verify_certificate(&c).unwrap();
        assert!(report.passes(), "{}", report.to_tsv());
        c.bound = ratio(1, 4) + ratio(1, 1_000_000);
        assert!(!verify_certificate(&c).unwrap().passes());
    }

    #[test]
    fn trivial_m4_certificates() {
        let c = zero_certificate(ObjectiveSpec::m4(), int(0));
        let report = verify_certificate(&c).unwrap();
        assert!(report.passes());
        assert_eq!(report.rows.len(), 156);
        assert_eq!(report.min_slack().unwrap().diff(), int(0));

        let c = zero_certificate(ObjectiveSpec::m4(), ratio(1, 1000));
        let report = verify_certificate(&c).unwrap();
        assert!(!report.passes());
        let failing: Vec<usize> = report
            .rows
            .iter()
            .filter(|r| {
                r.graph.count_cliques(4).unwrap() + r.graph.complement().count_cliques(4).unwrap()
                    == 0
            })
            .map(|r| r.index)
            .collect();
        assert!(!failing.is_empty());
        assert_eq!(report.failing_rows(), failing);
    }

    #[test]
    fn tsv_layout() {
        let c = zero_certificate(ObjectiveSpec::goodman(), ratio(1, 4));
        let tsv = verify_certificate(&c).unwrap().to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "i\t3!L\t3!R\t(3!L-3!R)10^3");
        // Empty graph on three vertices: 6·(1 − 1/4).
        assert_eq!(lines[1], "0\t4.5000\t0.0000\t4500.0000");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let mut c = zero_certificate(ObjectiveSpec::goodman(), ratio(1, 4));
        c.blocks[0].matrix.set(0, 1, int(1));
        assert!(matches!(
            verify_certificate(&c),
            Err(CertifyError::Format(_))
        ));
    }
}
