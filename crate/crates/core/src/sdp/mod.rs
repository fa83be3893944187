//! The bound-maximisation SDP.
//!
//! For every graph `G` of order `ℓ` the constraint reads
//!
//! ```text
//! obj_G − λ − Σ_b A_b • M_G^b ≥ 0,     A_b ⪰ 0,
//! ```
//!
//! and `λ` is maximised. `M_G^b` is the coefficient matrix of `G` in the
//! averaged quadratic form of block `b`. Certificates use the same sign
//! convention.

pub mod sdpa;
mod solver;

pub use solver::{solve, solve_numeric, NumericSdp, SolverOptions};

use crate::algebra::{
    complement_vector, invariant_split, quadratic_coeff_matrices_cached, AlgebraError, FlagVector,
};
use crate::densities::{objective_column, DensityCache, DensityError};
use crate::flags::{
    complement_type, enumerate_types, format_type, parse_type, FlagError, TypeSigma,
};
use crate::graphs::{enumerate_graphs, Graph};
use crate::rational::{Rational, RationalMatrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid objective spec: {0}")]
    Spec(String),
    #[error(
        "solver did not converge after {iterations} iterations \
         (gap {gap:.3e}, primal {primal:.3e}, dual {dual:.3e})"
    )]
    NotConverged {
        iterations: usize,
        gap: f64,
        primal: f64,
        dual: f64,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("SDPA line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("solution does not match the problem: {0}")]
    Dimension(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Flag(#[from] FlagError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        })
    }
}

/// Which parity blocks of one type are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParitySelection {
    pub plus: bool,
    pub minus: bool,
}

impl ParitySelection {
    pub const BOTH: Self = Self {
        plus: true,
        minus: true,
    };
    pub const PLUS: Self = Self {
        plus: true,
        minus: false,
    };

    pub fn includes(&self, parity: Parity) -> bool {
        match parity {
            Parity::Plus => self.plus,
            Parity::Minus => self.minus,
        }
    }

    pub fn code(&self) -> String {
        let mut s = String::new();
        if self.plus {
            s.push('+');
        }
        if self.minus {
            s.push('-');
        }
        s
    }

    pub fn from_code(code: &str) -> Result<Self, SdpError> {
        if !code.chars().all(|c| c == '+' || c == '-') {
            return Err(SdpError::Spec(format!("bad parity selector `{code}`")));
        }
        Ok(Self {
            plus: code.contains('+'),
            minus: code.contains('-'),
        })
    }
}

/// Parameters of one SDP: clique order `t`, host order `ℓ`, the types and
/// their active parities, and whether complementary types share a matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SpecRecord", try_from = "SpecRecord")]
pub struct ObjectiveSpec {
    pub t: usize,
    pub ell: usize,
    pub types: Vec<TypeSigma>,
    pub parity: Vec<ParitySelection>,
    pub complement_sharing: bool,
}

#[derive(Serialize, Deserialize)]
struct SpecRecord {
    t: usize,
    ell: usize,
    types: Vec<String>,
    parity: Vec<String>,
    complement_sharing: bool,
}

impl From<ObjectiveSpec> for SpecRecord {
    fn from(s: ObjectiveSpec) -> Self {
        Self {
            t: s.t,
            ell: s.ell,
            types: s.types.iter().map(format_type).collect(),
            parity: s.parity.iter().map(ParitySelection::code).collect(),
            complement_sharing: s.complement_sharing,
        }
    }
}

impl TryFrom<SpecRecord> for ObjectiveSpec {
    type Error = SdpError;

    fn try_from(r: SpecRecord) -> Result<Self, SdpError> {
        let spec = ObjectiveSpec {
            t: r.t,
            ell: r.ell,
            types: r
                .types
                .iter()
                .map(|t| parse_type(t))
                .collect::<Result<_, _>>()?,
            parity: r
                .parity
                .iter()
                .map(|p| ParitySelection::from_code(p))
                .collect::<Result<_, _>>()?,
            complement_sharing: r.complement_sharing,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ObjectiveSpec {
    /// Triangles with the single order-1 type at `ℓ = 3`.
    pub fn goodman() -> Self {
        Self {
            t: 3,
            ell: 3,
            types: vec![TypeSigma::unit_type()],
            parity: vec![ParitySelection::PLUS],
            complement_sharing: false,
        }
    }

    /// `K₄` at `ℓ = 6` over all order-4 types, both parities, complement sharing on.
    pub fn m4() -> Self {
        let types = enumerate_types(4).expect("order 4 is supported");
        Self {
            t: 4,
            ell: 6,
            parity: vec![ParitySelection::BOTH; types.len()],
            types,
            complement_sharing: true,
        }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.t == 0 || self.t > self.ell {
            return Err(SdpError::Spec(format!(
                "clique order {} outside 1..={}",
                self.t, self.ell
            )));
        }
        if self.ell > crate::algebra::MAX_ALGEBRA_ORDER {
            return Err(SdpError::Spec(format!(
                "host order {} is too large",
                self.ell
            )));
        }
        if self.parity.len() != self.types.len() {
            return Err(SdpError::Spec(format!(
                "{} parity selectors for {} types",
                self.parity.len(),
                self.types.len()
            )));
        }
        for sigma in &self.types {
            if sigma.order() + 2 > self.ell {
                return Err(SdpError::Spec(format!(
                    "type of order {} needs ℓ ≥ {}",
                    sigma.order(),
                    sigma.order() + 2
                )));
            }
        }
        Ok(())
    }
}

/// One PSD block: a type, a parity, its basis and per-graph coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemBlock {
    pub sigma: TypeSigma,
    pub parity: Parity,
    /// The complementary type's quadratic form is folded into this block.
    pub shared: bool,
    pub basis: Vec<FlagVector>,
    /// `M_G` for every graph in `enumerate_graphs(ℓ)`, same order.
    pub coeffs: Vec<RationalMatrix>,
}

impl ProblemBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn label(&self) -> String {
        format!(
            "[{}]{}{}",
            format_type(&self.sigma),
            self.parity,
            if self.shared { " shared" } else { "" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub spec: ObjectiveSpec,
    pub graphs: Vec<Graph>,
    pub objective: Vec<Rational>,
    pub blocks: Vec<ProblemBlock>,
}

impl SdpProblem {
    pub fn constraint_count(&self) -> usize {
        self.graphs.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(ProblemBlock::dim).collect()
    }

    /// Floating-point copy for the solver.
    pub fn numeric(&self) -> NumericSdp {
        let to_dense = |m: &RationalMatrix| {
            if m.is_zero() {
                None
            } else {
                let rows = m.to_f64_rows();
                Some(DMatrix::from_fn(m.dim(), m.dim(), |i, j| rows[i][j]))
            }
        };
        NumericSdp {
            objective: self.objective.iter().map(crate::rational::to_f64).collect(),
            block_dims: self.block_dims(),
            coeffs: self
                .blocks
                .iter()
                .map(|b| b.coeffs.iter().map(to_dense).collect())
                .collect(),
        }
    }
}

/// A type together with the partner whose form is folded into its blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockType {
    pub sigma: TypeSigma,
    pub parity: ParitySelection,
    pub shared: bool,
}

/// Resolves complement sharing: each type whose complement class also appears
/// later in the list absorbs it. Self-complementary types stay unshared.
pub fn block_types(spec: &ObjectiveSpec) -> Vec<BlockType> {
    let n = spec.types.len();
    let mut consumed = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if consumed[i] {
            continue;
        }
        consumed[i] = true;
        let sigma = spec.types[i];
        let comp = complement_type(&sigma);
        let mut shared = false;
        if spec.complement_sharing && !comp.is_isomorphic(&sigma) {
            if let Some(j) =
                (i + 1..n).find(|&j| !consumed[j] && spec.types[j].is_isomorphic(&comp))
            {
                consumed[j] = true;
                shared = true;
            }
        }
        out.push(BlockType {
            sigma,
            parity: spec.parity[i],
            shared,
        });
    }
    out
}

/// `M_G` for a basis over `sigma`, plus the complemented form when `shared`.
pub fn block_coefficients(
    sigma: &TypeSigma,
    basis: &[FlagVector],
    shared: bool,
    ell: usize,
    cache: &DensityCache,
) -> Result<Vec<RationalMatrix>, SdpError> {
    let mut mats: Vec<RationalMatrix> = quadratic_coeff_matrices_cached(sigma, basis, ell, cache)?
        .into_iter()
        .map(|m| m.entries)
        .collect();
    if shared {
        let comp_basis: Vec<FlagVector> = basis
            .iter()
            .map(complement_vector)
            .collect::<Result<_, _>>()?;
        let comp =
            quadratic_coeff_matrices_cached(&complement_type(sigma), &comp_basis, ell, cache)?;
        for (m, c) in mats.iter_mut().zip(comp) {
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    m.add_at(i, j, c.entries.get(i, j));
                }
            }
        }
    }
    Ok(mats)
}

pub fn build_problem(spec: &ObjectiveSpec, cache: &DensityCache) -> Result<SdpProblem, SdpError> {
    spec.validate()?;
    let graphs = enumerate_graphs(spec.ell)
        .map_err(DensityError::from)?
        .to_vec();
    let objective = objective_column(spec.t, spec.ell)?;
    let mut blocks = Vec::new();
    for bt in block_types(spec) {
        let (plus, minus) = invariant_split(&bt.sigma, bt.sigma.order() + 1)?;
        for (parity, basis) in [(Parity::Plus, plus), (Parity::Minus, minus)] {
            if !bt.parity.includes(parity) || basis.is_empty() {
                continue;
            }
            let coeffs = block_coefficients(&bt.sigma, &basis, bt.shared, spec.ell, cache)?;
            blocks.push(ProblemBlock {
                sigma: bt.sigma,
                parity,
                shared: bt.shared,
                basis,
                coeffs,
            });
        }
    }
    Ok(SdpProblem {
        spec: spec.clone(),
        graphs,
        objective,
        blocks,
    })
}

/// Numerical solver output; `blocks[b]` is the matrix variable of block `b`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub lambda: f64,
    pub blocks: Vec<DMatrix<f64>>,
    /// Dual weights on the graphs (a distribution at optimality).
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub gap: f64,
}

impl Solution {
    /// `min_G (obj_G − Σ_b A_b • M_G^b)` in floating point: the largest `λ`
    /// these matrices support.
    pub fn supported_lambda(&self, problem: &NumericSdp) -> f64 {
        problem.supported_lambda(&self.blocks)
    }
}
