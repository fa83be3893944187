//! Rational certificates: construction by rounding a numerical solution and
//! the JSON interchange format.

use super::psd::check_psd_rational;
use super::CertifyError;
use crate::algebra::FlagVector;
use crate::flags::{enumerate_flags, format_flag, format_type, parse_flag, parse_type, TypeSigma};
use crate::rational::{
    format_rational, parse_rational, round_to_denominator, to_f64, Rational, RationalMatrix,
};
use crate::sdp::{ObjectiveSpec, Parity, SdpProblem, Solution};
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateBlock {
    pub sigma: TypeSigma,
    pub parity: Parity,
    pub shared: bool,
    pub basis: Vec<FlagVector>,
    pub matrix: RationalMatrix,
}

/// A bound with PSD matrices claimed to witness
/// `obj_G − bound − Σ_b A_b • M_G^b ≥ 0` for every graph `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub spec: ObjectiveSpec,
    pub bound: Rational,
    pub blocks: Vec<CertificateBlock>,
}

#[derive(Serialize, Deserialize)]
struct CertificateRecord {
    format: String,
    spec: ObjectiveSpec,
    bound: String,
    blocks: Vec<BlockRecord>,
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    #[serde(rename = "type")]
    sigma: String,
    parity: Parity,
    shared: bool,
    basis_order: usize,
    /// Each basis vector as `[coefficient, flag]` pairs.
    basis: Vec<Vec<(String, String)>>,
    matrix: Vec<Vec<String>>,
}

const FORMAT: &str = "flagcert-certificate v1";

impl Certificate {
    pub fn to_json(&self) -> String {
        let record = CertificateRecord {
            format: FORMAT.into(),
            spec: self.spec.clone(),
            bound: format_rational(&self.bound),
            blocks: self.blocks.iter().map(block_record).collect(),
        };
        serde_json::to_string_pretty(&record).expect("certificate serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        let record: CertificateRecord =
            serde_json::from_str(text).map_err(|e| CertifyError::Format(e.to_string()))?;
        if record.format != FORMAT {
            return Err(CertifyError::Format(format!(
                "unsupported certificate format `{}`",
                record.format
            )));
        }
        let bound = parse_rational(&record.bound)
            .map_err(|e| CertifyError::Format(format!("bound: {e}")))?;
        let blocks = record
            .blocks
            .iter()
            .map(resolve_block)
            .collect::<Result<_, _>>()?;
        Ok(Self {
            spec: record.spec,
            bound,
            blocks,
        })
    }
}

fn block_record(b: &CertificateBlock) -> BlockRecord {
    let order = b.basis.first().map_or(b.sigma.order() + 1, |v| v.order);
    let flags = enumerate_flags(&b.sigma, order).expect("certificate flags enumerate");
    BlockRecord {
        sigma: format_type(&b.sigma),
        parity: b.parity,
        shared: b.shared,
        basis_order: order,
        basis: b
            .basis
            .iter()
            .map(|v| {
                v.coeffs
                    .iter()
                    .map(|(&i, c)| (format_rational(c), format_flag(&flags[i])))
                    .collect()
            })
            .collect(),
        matrix: b
            .matrix
            .rows()
            .map(|r| r.iter().map(format_rational).collect())
            .collect(),
    }
}

fn resolve_block(r: &BlockRecord) -> Result<CertificateBlock, CertifyError> {
    let sigma = parse_type(&r.sigma)?;
    let flags = enumerate_flags(&sigma, r.basis_order)?;
    let mut basis = Vec::with_capacity(r.basis.len());
    for terms in &r.basis {
        let mut v = FlagVector::zero(sigma, r.basis_order);
        for (coeff, text) in terms {
            let c = parse_rational(coeff)
                .map_err(|e| CertifyError::Format(format!("basis coefficient: {e}")))?;
            let flag = parse_flag(text, r.basis_order)?;
            if flag.sigma() != &sigma {
                return Err(CertifyError::Descriptor(format!(
                    "flag `{text}` is not over type `{}`",
                    r.sigma
                )));
            }
            let key = flag.key();
            let index = flags
                .iter()
                .position(|f| f.key() == key)
                .ok_or_else(|| CertifyError::Descriptor(format!("unknown flag `{text}`")))?;
            v.add_term(index, &c);
        }
        basis.push(v);
    }
    let rows = r
        .matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    parse_rational(s).map_err(|e| CertifyError::Format(format!("matrix: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = RationalMatrix::from_rows(rows)
        .ok_or_else(|| CertifyError::Format("matrix is not square".into()))?;
    if matrix.dim() != basis.len() {
        return Err(CertifyError::Descriptor(format!(
            "matrix of size {} for a basis of {} vectors",
            matrix.dim(),
            basis.len()
        )));
    }
    Ok(CertificateBlock {
        sigma,
        parity: r.parity,
        shared: r.shared,
        basis,
        matrix,
    })
}

#[derive(Clone, Debug)]
pub struct RoundingOptions {
    pub denominator: BigInt,
    /// Subtracted from the numerical `λ` before picking a candidate; may be
    /// negative to snap onto a candidate just above `λ`.
    pub shrink: Rational,
    /// Candidate bounds; the largest one `≤ λ − shrink` is used. When none
    /// qualifies, `λ − max(shrink, 0)` rounded down to the denominator is used.
    pub candidates: Vec<Rational>,
}

/// What rounding cost, in floating point.
#[derive(Clone, Debug)]
pub struct RoundingReport {
    /// `min_G (obj_G − Σ A_b • M_G^b) − bound` for the unrounded matrices.
    pub numerical_slack: f64,
    /// Upper bound on `|Σ (Ã_b − A_b) • M_G^b|` over all graphs.
    pub perturbation: f64,
    /// Blocks that needed eigenvalue clipping and a diagonal margin.
    pub repaired_blocks: Vec<usize>,
}

/// Rounds every matrix entry to a multiple of `1/denominator`, symmetrised.
/// A block whose rounding is not PSD is replaced by its eigenvalue-clipped
/// projection plus a small multiple of the identity, then rounded again.
pub fn round_solution(
    problem: &SdpProblem,
    solution: &Solution,
    opts: &RoundingOptions,
) -> Result<(Certificate, RoundingReport), CertifyError> {
    if solution.blocks.len() != problem.blocks.len() {
        return Err(CertifyError::Format(format!(
            "solution has {} blocks, problem has {}",
            solution.blocks.len(),
            problem.blocks.len()
        )));
    }
    if !opts.denominator.is_positive() {
        return Err(CertifyError::Format("denominator must be positive".into()));
    }
    let numeric = problem.numeric();
    let target = Rational::from_float(solution.lambda)
        .ok_or_else(|| CertifyError::Format("λ is not finite".into()))?
        - &opts.shrink;
    let bound = opts
        .candidates
        .iter()
        .filter(|c| **c <= target)
        .max()
        .cloned()
        .unwrap_or_else(|| {
            // Snapping up only applies to candidates.
            let target = if opts.shrink.is_negative() {
                &target + &opts.shrink
            } else {
                target.clone()
            };
            let scaled = &target * Rational::from_integer(opts.denominator.clone());
            Rational::new(scaled.floor().to_integer(), opts.denominator.clone())
        });

    let mut blocks = Vec::with_capacity(problem.blocks.len());
    let mut repaired = Vec::new();
    let mut perturbation = 0.0;
    let mut rounded_f64 = Vec::with_capacity(problem.blocks.len());
    for (b, (pb, x)) in problem.blocks.iter().zip(&solution.blocks).enumerate() {
        if x.nrows() != pb.dim() || x.ncols() != pb.dim() {
            return Err(CertifyError::Format(format!(
                "block {b} has size {}×{}, expected {}",
                x.nrows(),
                x.ncols(),
                pb.dim()
            )));
        }
        let mut matrix = round_symmetric(x, &opts.denominator);
        if !check_psd_rational(&matrix).is_psd {
            matrix = repair(x, &opts.denominator);
            repaired.push(b);
        }
        let rows = matrix.to_f64_rows();
        let r = DMatrix::from_fn(pb.dim(), pb.dim(), |i, j| rows[i][j]);
        let diff = (&r - x).norm();
        let worst = numeric.coeffs[b]
            .iter()
            .map(|m| m.as_ref().map_or(0.0, |m| m.norm()))
            .fold(0.0, f64::max);
        perturbation += diff * worst;
        rounded_f64.push(r);
        blocks.push(CertificateBlock {
            sigma: pb.sigma,
            parity: pb.parity,
            shared: pb.shared,
            basis: pb.basis.clone(),
            matrix,
        });
    }
    let report = RoundingReport {
        numerical_slack: numeric.supported_lambda(&solution.blocks) - to_f64(&bound),
        perturbation,
        repaired_blocks: repaired,
    };
    Ok((
        Certificate {
            spec: problem.spec.clone(),
            bound,
            blocks,
        },
        report,
    ))
}

fn round_symmetric(x: &DMatrix<f64>, denominator: &BigInt) -> RationalMatrix {
    let n = x.nrows();
    let mut m = RationalMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = round_to_denominator(0.5 * (x[(i, j)] + x[(j, i)]), denominator);
            m.set(j, i, v.clone());
            m.set(i, j, v);
        }
    }
    m
}

fn repair(x: &DMatrix<f64>, denominator: &BigInt) -> RationalMatrix {
    let n = x.nrows();
    let sym = (x + x.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let projected =
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let unit = 1.0 / to_f64(&Rational::from_integer(denominator.clone()));
    let mut margin = n as f64 * unit;
    let mut m = round_symmetric(&projected, denominator);
    for _ in 0..64 {
        m = round_symmetric(
            &(&projected + DMatrix::identity(n, n) * margin),
            denominator,
        );
        if check_psd_rational(&m).is_psd {
            break;
        }
        margin *= 4.0;
    }
    m
}
