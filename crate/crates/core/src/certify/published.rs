//! Checks against the shipped published tables: the `6!L` column of the
//! per-graph verification table and the order-4 invariant block matrix.

use super::CertifyError;
use crate::densities::objective_column;
use crate::graphs::{graph_index, published_graphs};
use crate::rational::{
    factorial, format_decimal, parse_rational, to_f64, Rational, RationalMatrix,
};
use num_bigint::BigInt;
use std::io::{self, Write};

const L_COLUMN: &str = include_str!("../../data/l_column.tsv");
const A0_PLUS: &str = include_str!("../../data/a0plus.txt");

/// Agreement tolerance for the four-decimal `6!L` column.
pub const L_COLUMN_TOLERANCE: f64 = 5e-5;

/// The published bound `1/34.7858` as an exact rational.
pub fn published_bound() -> Rational {
    Rational::new(BigInt::from(10_000), BigInt::from(347_858))
}

/// One shipped row, exactly as printed.
#[derive(Clone, Debug, PartialEq)]
pub struct PublishedRow {
    pub index: usize,
    pub l: Rational,
    pub r: Rational,
    pub diff: Rational,
}

pub fn published_rows() -> Result<Vec<PublishedRow>, CertifyError> {
    let missing = |what: String| CertifyError::FixtureMissing(format!("l_column.tsv: {what}"));
    let mut rows = Vec::new();
    for (n, line) in L_COLUMN.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(missing(format!(
                "line {} has {} fields",
                n + 1,
                fields.len()
            )));
        }
        let index = fields[0]
            .trim()
            .parse()
            .map_err(|_| missing(format!("line {}: bad index", n + 1)))?;
        let num = |s: &str| parse_rational(s).map_err(|e| missing(format!("line {}: {e}", n + 1)));
        rows.push(PublishedRow {
            index,
            l: num(fields[1])?,
            r: num(fields[2])?,
            diff: num(fields[3])?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct LColumnRow {
    pub index: usize,
    pub computed: Rational,
    pub shipped: Rational,
}

impl LColumnRow {
    pub fn deviation(&self) -> f64 {
        to_f64(&(&self.computed - &self.shipped)).abs()
    }
}

#[derive(Clone, Debug)]
pub struct LColumnCheck {
    pub rows: Vec<LColumnRow>,
    pub max_deviation: f64,
}

impl LColumnCheck {
    pub fn passes(&self) -> bool {
        self.rows.len() == 156 && self.max_deviation < L_COLUMN_TOLERANCE
    }

    /// `i`, computed `6!L`, shipped `6!L`, absolute deviation.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i\t6!L computed\t6!L shipped\tdeviation")?;
        for row in &self.rows {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.2e}",
                row.index,
                format_decimal(&row.computed, 6),
                format_decimal(&row.shipped, 4),
                row.deviation()
            )?;
        }
        Ok(())
    }
}

/// Recomputes `6!·(obj_G − 1/34.7858)` for every graph of the published
/// list (monochromatic `K4` densities) and compares with the shipped column.
pub fn l_column_check() -> Result<LColumnCheck, CertifyError> {
    let shipped = published_rows()?;
    let graphs = published_graphs();
    if shipped.len() != graphs.len() {
        return Err(CertifyError::FixtureMissing(format!(
            "{} table rows for {} graphs",
            shipped.len(),
            graphs.len()
        )));
    }
    let objective = objective_column(4, 6)?;
    let scale = Rational::from_integer(factorial(6));
    let bound = published_bound();
    let mut rows = Vec::with_capacity(shipped.len());
    let mut max_deviation: f64 = 0.0;
    for row in shipped {
        let g = graphs
            .get(row.index)
            .ok_or_else(|| CertifyError::FixtureMissing(format!("graph {}", row.index)))?;
        let e = graph_index(g).ok_or_else(|| {
            CertifyError::FixtureMissing(format!("graph {} not enumerated", row.index))
        })?;
        let out = LColumnRow {
            index: row.index,
            computed: (&objective[e] - &bound) * &scale,
            shipped: row.l,
        };
        max_deviation = max_deviation.max(out.deviation());
        rows.push(out);
    }
    Ok(LColumnCheck {
        rows,
        max_deviation,
    })
}

/// The shipped invariant block for the order-4 type, as exact rationals.
pub fn a0plus_matrix() -> Result<RationalMatrix, CertifyError> {
    let missing = |what: &str| CertifyError::FixtureMissing(format!("a0plus.txt: {what}"));
    let mut scale: Option<BigInt> = None;
    let mut rows = Vec::new();
    for line in A0_PLUS.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(s) = line.strip_prefix("scale") {
            scale = Some(s.trim().parse().map_err(|_| missing("bad scale"))?);
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<BigInt>().map_err(|_| missing("bad entry")))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let scale = scale.ok_or_else(|| missing("no scale line"))?;
    let rows = rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|v| Rational::new(v, scale.clone()))
                .collect()
        })
        .collect();
    RationalMatrix::from_rows(rows).ok_or_else(|| missing("matrix is not square"))
}
