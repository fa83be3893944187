//! SDPA sparse (`.dat-s`) export, a reader for the same format, and import
//! of numerical solutions.
//!
//! The export is the SDPA dual form `max F₀•Y s.t. F_G•Y = obj_G, Y ⪰ 0` with
//! `Y = diag(A_1, …, A_B, s_1, …, s_m, λ⁺, λ⁻)`: `F_G` carries `M_G^b` in the
//! PSD blocks and `+1` at `s_G`, `λ⁺` and `−1` at `λ⁻`; `F₀` is `+1` at `λ⁺`
//! and `−1` at `λ⁻`, so `F₀•Y = λ`. Values are written as exact decimals when
//! the rational terminates within 30 places, otherwise as the shortest
//! round-trip `f64`.

use super::{SdpError, SdpProblem, Solution};
use crate::rational::{format_decimal, to_f64, Rational};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::io::Write;
use std::path::Path;

fn format_value(r: &Rational) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut places = 0usize;
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        places = twos.max(fives);
    }
    if d.is_one() && places <= 30 {
        format_decimal(r, places)
    } else {
        format!("{}", to_f64(r))
    }
}

pub fn export_sdpa(p: &SdpProblem, out: &mut impl Write) -> Result<(), SdpError> {
    let m = p.constraint_count();
    let nb = p.blocks.len() + 1;
    writeln!(
        out,
        "\"flagcert: maximise lambda, t={} ell={} ({} PSD blocks + diagonal block)",
        p.spec.t,
        p.spec.ell,
        p.blocks.len()
    )?;
    writeln!(out, "{m}")?;
    writeln!(out, "{nb}")?;
    let mut dims: Vec<String> = p.blocks.iter().map(|b| b.dim().to_string()).collect();
    dims.push(format!("-{}", m + 2));
    writeln!(out, "{}", dims.join(" "))?;
    let c: Vec<String> = p.objective.iter().map(format_value).collect();
    writeln!(out, "{}", c.join(" "))?;
    let lp = nb;
    writeln!(out, "0 {lp} {} {} 1", m + 1, m + 1)?;
    writeln!(out, "0 {lp} {} {} -1", m + 2, m + 2)?;
    for g in 0..m {
        let matno = g + 1;
        for (bi, block) in p.blocks.iter().enumerate() {
            let mat = &block.coeffs[g];
            for i in 0..mat.dim() {
                for j in i..mat.dim() {
                    let v = mat.get(i, j);
                    if !v.is_zero() {
                        writeln!(
                            out,
                            "{matno} {} {} {} {}",
                            bi + 1,
                            i + 1,
                            j + 1,
                            format_value(v)
                        )?;
                    }
                }
            }
        }
        writeln!(out, "{matno} {lp} {} {} 1", g + 1, g + 1)?;
        writeln!(out, "{matno} {lp} {} {} 1", m + 1, m + 1)?;
        writeln!(out, "{matno} {lp} {} {} -1", m + 2, m + 2)?;
    }
    Ok(())
}

pub fn export_sdpa_file(p: &SdpProblem, path: &Path) -> Result<(), SdpError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    export_sdpa(p, &mut w)?;
    w.flush()?;
    Ok(())
}

/// One nonzero of a sparse SDPA file (1-based indices as in the file).
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaEntry {
    pub matno: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaData {
    pub m: usize,
    /// Positive for symmetric blocks, negative for diagonal blocks.
    pub block_struct: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

impl SdpaData {
    /// Dense symmetric matrix `F_matno` restricted to block `block` (1-based).
    pub fn matrix(&self, matno: usize, block: usize) -> DMatrix<f64> {
        let d = self.block_struct[block - 1].unsigned_abs() as usize;
        let mut out = DMatrix::zeros(d, d);
        for e in self
            .entries
            .iter()
            .filter(|e| e.matno == matno && e.block == block)
        {
            out[(e.i - 1, e.j - 1)] = e.value;
            out[(e.j - 1, e.i - 1)] = e.value;
        }
        out
    }
}

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || ",{}()".contains(c))
        .filter(|t| !t.is_empty())
        .collect()
}

fn parse_err(line: usize, message: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_sdpa(text: &str) -> Result<SdpaData, SdpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip_while(|(_, l)| l.starts_with('"') || l.starts_with('*'))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), format!("missing {what}")))
    };
    let (ln, line) = next("constraint count")?;
    let m: usize = tokens(line)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "bad constraint count"))?;
    let (ln, line) = next("block count")?;
    let nb: usize = tokens(line)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "bad block count"))?;
    let (ln, line) = next("block structure")?;
    let block_struct: Vec<i64> = tokens(line)
        .iter()
        .take(nb)
        .map(|t| t.parse::<i64>().ok().filter(|v| *v != 0))
        .collect::<Option<_>>()
        .filter(|v: &Vec<i64>| v.len() == nb)
        .ok_or_else(|| parse_err(ln, format!("expected {nb} nonzero block sizes")))?;
    let mut c = Vec::with_capacity(m);
    while c.len() < m {
        let (ln, line) = next("objective vector")?;
        for t in tokens(line) {
            c.push(
                t.parse::<f64>()
                    .map_err(|_| parse_err(ln, format!("bad objective value `{t}`")))?,
            );
        }
    }
    if c.len() != m {
        return Err(parse_err(
            0,
            format!("objective has {} entries, expected {m}", c.len()),
        ));
    }
    let mut entries = Vec::new();
    for (ln, line) in lines {
        let t = tokens(line);
        if t.len() != 5 {
            return Err(parse_err(
                ln,
                format!("expected 5 fields, found {}", t.len()),
            ));
        }
        let idx = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(ln, format!("bad {what} `{s}`")))
        };
        let matno = idx(t[0], "matrix number")?;
        let block = idx(t[1], "block number")?;
        let (mut i, mut j) = (idx(t[2], "row")?, idx(t[3], "column")?);
        let value: f64 = t[4]
            .parse()
            .map_err(|_| parse_err(ln, format!("bad value `{}`", t[4])))?;
        if matno > m {
            return Err(parse_err(ln, format!("matrix number {matno} exceeds {m}")));
        }
        if block == 0 || block > nb {
            return Err(parse_err(ln, format!("block {block} outside 1..={nb}")));
        }
        let d = block_struct[block - 1];
        let dim = d.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(parse_err(
                ln,
                format!("index ({i}, {j}) outside block of size {dim}"),
            ));
        }
        if d < 0 && i != j {
            return Err(parse_err(ln, "off-diagonal entry in a diagonal block"));
        }
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        entries.push(SdpaEntry {
            matno,
            block,
            i,
            j,
            value,
        });
    }
    Ok(SdpaData {
        m,
        block_struct,
        c,
        entries,
    })
}

/// `λ`, then each block's rows (space separated), blocks separated by a blank line.
pub fn write_solution(s: &Solution, out: &mut impl Write) -> Result<(), SdpError> {
    writeln!(out, "{}", s.lambda)?;
    for b in &s.blocks {
        writeln!(out)?;
        for i in 0..b.nrows() {
            let row: Vec<String> = (0..b.ncols()).map(|j| format!("{}", b[(i, j)])).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

pub fn write_solution_file(s: &Solution, path: &Path) -> Result<(), SdpError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_solution(s, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a solution in the native text format or in the CSDP output format
/// (first line `y`, then `matno block i j value` with `matno = 2` for `Y`).
pub fn import_solution(p: &SdpProblem, path: &Path) -> Result<Solution, SdpError> {
    parse_solution(p, &std::fs::read_to_string(path)?)
}

pub fn parse_solution(p: &SdpProblem, text: &str) -> Result<Solution, SdpError> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| SdpError::Dimension("empty solution".into()))?;
    let m = p.constraint_count();
    if m > 1 && tokens(first).len() == m {
        parse_csdp(p, text)
    } else {
        parse_native(p, text)
    }
}

fn unknown_metadata(lambda: f64, blocks: Vec<DMatrix<f64>>, dual: Vec<f64>) -> Solution {
    Solution {
        lambda,
        blocks,
        dual,
        iterations: 0,
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        gap: f64::NAN,
    }
}

fn parse_native(p: &SdpProblem, text: &str) -> Result<Solution, SdpError> {
    let dims = p.block_dims();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (ln, first) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| SdpError::Dimension("missing λ".into()))?;
    let lambda: f64 = first
        .parse()
        .map_err(|_| parse_err(ln, format!("bad λ `{first}`")))?;
    let rows: Vec<(usize, Vec<f64>)> = lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(ln, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| parse_err(ln, format!("bad value `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|r| (ln, r))
        })
        .collect::<Result<_, _>>()?;
    let expected: usize = dims.iter().sum();
    if rows.len() != expected {
        return Err(SdpError::Dimension(format!(
            "expected {expected} matrix rows for blocks {dims:?}, found {}",
            rows.len()
        )));
    }
    let mut blocks = Vec::new();
    let mut offset = 0;
    for &d in &dims {
        let mut mat = DMatrix::zeros(d, d);
        for i in 0..d {
            let (ln, row) = &rows[offset + i];
            if row.len() != d {
                return Err(SdpError::Dimension(format!(
                    "line {ln}: expected {d} entries, found {}",
                    row.len()
                )));
            }
            for j in 0..d {
                mat[(i, j)] = row[j];
            }
        }
        offset += d;
        blocks.push(mat);
    }
    Ok(unknown_metadata(lambda, blocks, Vec::new()))
}

fn parse_csdp(p: &SdpProblem, text: &str) -> Result<Solution, SdpError> {
    let m = p.constraint_count();
    let dims = p.block_dims();
    let lp = dims.len() + 1;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (ln, first) = lines.next().expect("checked non-empty");
    let dual: Vec<f64> = tokens(first)
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(ln, format!("bad dual value `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    let mut blocks: Vec<DMatrix<f64>> = dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
    let mut lambda = 0.0;
    for (ln, line) in lines {
        let t = tokens(line);
        if t.len() != 5 {
            return Err(parse_err(
                ln,
                format!("expected 5 fields, found {}", t.len()),
            ));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(ln, format!("bad index `{s}`")))
        };
        let (matno, block, i, j) = (num(t[0])?, num(t[1])?, num(t[2])?, num(t[3])?);
        let v: f64 = t[4]
            .parse()
            .map_err(|_| parse_err(ln, format!("bad value `{}`", t[4])))?;
        if matno != 2 {
            continue;
        }
        if block == lp {
            if i > m + 2 || j > m + 2 || i == 0 {
                return Err(parse_err(ln, "index outside the diagonal block"));
            }
            if i == m + 1 && j == m + 1 {
                lambda += v;
            } else if i == m + 2 && j == m + 2 {
                lambda -= v;
            }
            continue;
        }
        let d = *dims
            .get(block.wrapping_sub(1))
            .ok_or_else(|| parse_err(ln, format!("block {block} does not exist")))?;
        if i == 0 || j == 0 || i > d || j > d {
            return Err(parse_err(
                ln,
                format!("index ({i}, {j}) outside block of size {d}"),
            ));
        }
        blocks[block - 1][(i - 1, j - 1)] = v;
        blocks[block - 1][(j - 1, i - 1)] = v;
    }
    Ok(unknown_metadata(lambda, blocks, dual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::DensityCache;
    use crate::rational::{int, ratio};
    use crate::sdp::{build_problem, ObjectiveSpec};

    fn goodman() -> SdpProblem {
        build_problem(&ObjectiveSpec::goodman(), &DensityCache::disabled()).unwrap()
    }

    #[test]
    fn values_are_exact_when_possible() {
        assert_eq!(format_value(&ratio(1, 4)), "0.25");
        assert_eq!(format_value(&int(-3)), "-3");
        assert_eq!(format_value(&ratio(1, 3)), format!("{}", 1.0f64 / 3.0));
    }

    #[test]
    fn export_reads_back() {
        let p = goodman();
        let mut buf = Vec::new();
        export_sdpa(&p, &mut buf).unwrap();
        let data = read_sdpa(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(data.m, 4);
        assert_eq!(data.block_struct, vec![2, -6]);
        let num = p.numeric();
        for g in 0..4 {
            assert_eq!(data.c[g], num.objective[g]);
            let want = num.coeffs[0][g]
                .clone()
                .unwrap_or_else(|| DMatrix::zeros(2, 2));
            assert_eq!(data.matrix(g + 1, 1), want);
            let lp = data.matrix(g + 1, 2);
            assert_eq!(lp[(g, g)], 1.0);
            assert_eq!(lp[(4, 4)], 1.0);
            assert_eq!(lp[(5, 5)], -1.0);
        }
        assert_eq!(data.matrix(0, 2)[(4, 4)], 1.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "\"c\n2\n1\n2\n1 2\n1 1 1 1 0.5\n1 3 1 1 2\n";
        match read_sdpa(text) {
            Err(SdpError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        match read_sdpa("2\n1\nx\n") {
            Err(SdpError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_sdpa("2\n1\n-2\n1 2\n1 1 1 2 0.5\n").is_err());
    }

    #[test]
    fn native_solution_round_trip() {
        let p = goodman();
        let s = unknown_metadata(
            0.25,
            vec![DMatrix::from_row_slice(2, 2, &[0.75, -0.75, -0.75, 0.75])],
            vec![],
        );
        let mut buf = Vec::new();
        write_solution(&s, &mut buf).unwrap();
        let back = parse_solution(&p, std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.lambda, 0.25);
        assert_eq!(back.blocks, s.blocks);
        assert!(matches!(
            parse_solution(&p, "0.25\n\n1 2\n3 4\n5 6\n"),
            Err(SdpError::Dimension(_))
        ));
        assert!(parse_solution(&p, "0.25\n\n1 2 3\n4 5 6\n").is_err());
    }

    #[test]
    fn csdp_solution_import() {
        let p = goodman();
        let text = "0.25 0.25 0.25 0.25\n\
                    1 1 1 1 0.1\n\
                    2 1 1 1 0.75\n2 1 1 2 -0.75\n2 1 2 2 0.75\n\
                    2 2 1 1 0.75\n2 2 5 5 0.3\n2 2 6 6 0.05\n";
        let s = parse_solution(&p, text).unwrap();
        assert!((s.lambda - 0.25).abs() < 1e-15);
        assert_eq!(s.blocks[0][(1, 0)], -0.75);
        assert_eq!(s.dual, vec![0.25; 4]);
    }
}
