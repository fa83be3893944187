//! Exact certificates: rounding numerical solutions, rational PSD checks,
//! end-to-end verification and the scaled per-graph report.

pub mod certificate;
pub mod pipeline;
pub mod psd;
pub mod published;
pub mod verify;

pub use certificate::{
    round_solution, Certificate, CertificateBlock, RoundingOptions, RoundingReport,
};
pub use pipeline::{certify_solution, default_denominators, CertifyOutcome};
pub use psd::{check_psd_rational, quadratic_form, PsdVerdict, PsdWitness};
pub use published::{
    a0plus_matrix, l_column_check, published_bound, published_rows, LColumnCheck, LColumnRow,
    PublishedRow,
};
pub use verify::{verify_certificate, BlockCheck, SlackReport, SlackRow};

use crate::algebra::AlgebraError;
use crate::densities::DensityError;
use crate::flags::FlagError;
use crate::graphs::GraphError;
use crate::sdp::SdpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("malformed certificate: {0}")]
    Format(String),
    #[error("basis descriptor does not resolve: {0}")]
    Descriptor(String),
    #[error("fixture `{0}` is missing or malformed")]
    FixtureMissing(String),
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
