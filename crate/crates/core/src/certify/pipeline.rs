//! Rounding followed by exact verification, over a ladder of denominators.

use super::certificate::{round_solution, Certificate, RoundingOptions, RoundingReport};
use super::verify::{verify_certificate, SlackReport};
use super::CertifyError;
use crate::rational::Rational;
use crate::sdp::{SdpProblem, Solution};
use num_bigint::BigInt;

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub denominator: BigInt,
    pub certificate: Certificate,
    pub rounding: RoundingReport,
    pub report: SlackReport,
}

impl CertifyOutcome {
    pub fn verified(&self) -> bool {
        self.report.passes()
    }
}

/// Default denominators tried in turn: `10^6, 10^8, 10^10, 10^12`.
pub fn default_denominators() -> Vec<BigInt> {
    [6usize, 8, 10, 12]
        .iter()
        .map(|&e| num_traits::pow(BigInt::from(10), e))
        .collect()
}

/// Rounds `solution` for each denominator until the certificate verifies at
/// `target`. `snap` lets a numerical `λ` that falls short of `target` by at
/// most that much still aim for it. Returns the last attempt when none passes.
pub fn certify_solution(
    problem: &SdpProblem,
    solution: &Solution,
    target: &Rational,
    snap: &Rational,
    denominators: &[BigInt],
) -> Result<CertifyOutcome, CertifyError> {
    let mut last = None;
    for d in denominators {
        let opts = RoundingOptions {
            denominator: d.clone(),
            shrink: -snap.clone(),
            candidates: vec![target.clone()],
        };
        let (certificate, rounding) = round_solution(problem, solution, &opts)?;
        let report = verify_certificate(&certificate)?;
        let outcome = CertifyOutcome {
            denominator: d.clone(),
            certificate,
            rounding,
            report,
        };
        if outcome.verified() && &outcome.certificate.bound >= target {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    last.ok_or_else(|| CertifyError::Format("no denominators to try".into()))
}
