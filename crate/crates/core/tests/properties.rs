mod common;

use common::*;
use flagcert::certify::check_psd_rational;
use flagcert::densities::DensityCache;
use flagcert::flags::enumerate_types;
use flagcert::rational::{ratio, to_f64, Rational, RationalMatrix};
use flagcert::sdp::{build_problem, solve, ObjectiveSpec, ParitySelection, SdpProblem};
use flagcert::{Graph, TypeSigma};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

#[test]
fn partition_and_chain_empty_type() {
    let n = partition_and_chain(&TypeSigma::empty_type(), 5).unwrap();
    assert!(n > 0);
}

#[test]
fn partition_and_chain_unit_type() {
    let n = partition_and_chain(&TypeSigma::unit_type(), 5).unwrap();
    assert!(n > 0);
}

#[test]
fn invariant_antiinvariant_orthogonality() {
    assert!(orthogonality_order4().unwrap() > 0);
}

fn m4_with_oracle() -> &'static (SdpProblem, Vec<Vec<RationalMatrix>>) {
    static CELL: OnceLock<(SdpProblem, Vec<Vec<RationalMatrix>>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = build_problem(&ObjectiveSpec::m4(), &DensityCache::disabled()).unwrap();
        let oracle = product_oracle(&p);
        (p, oracle)
    })
}

#[test]
fn oracle_matches_assembled_coefficients() {
    let (p, oracle) = m4_with_oracle();
    for (b, block) in p.blocks.iter().enumerate() {
        assert_eq!(block.coeffs, oracle[b], "block {}", block.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampled_order4_identities(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(order4_sampled(&mut rng, 3).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn slack_matches_oracle_for_random_psd(seed in any::<u64>(), rank in 1usize..4) {
        let (p, oracle) = m4_with_oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<RationalMatrix> =
            p.blocks.iter().map(|b| random_psd(&mut rng, b.dim(), rank, 1000)).collect();
        prop_assert_eq!(slack_validity(p, oracle, &mats), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ldlt_matches_eigenvalues(seed in any::<u64>(), dim in 1usize..9, shift in -3i64..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_symmetric(&mut rng, dim, shift);
        if let Some(agrees) = ldlt_agrees_with_eigen(&m) {
            prop_assert!(agrees);
        }
    }

    #[test]
    fn gram_matrices_are_psd(seed in any::<u64>(), dim in 1usize..9, rank in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(check_psd_rational(&random_psd(&mut rng, dim, rank, 7)).is_psd);
    }
}

#[test]
fn psd_forms_can_be_negative_on_a_single_host() {
    // The exact triangle certificate: the one-edge graph has objective 0, so its
    // quadratic-form term must be at most -1/4.
    let p = build_problem(&ObjectiveSpec::goodman(), &DensityCache::disabled()).unwrap();
    let a = RationalMatrix::from_rows(vec![
        vec![ratio(3, 4), ratio(-3, 4)],
        vec![ratio(-3, 4), ratio(3, 4)],
    ])
    .unwrap();
    let one_edge = Graph::from_edges(3, &[(0, 1)]).unwrap();
    let g = p
        .graphs
        .iter()
        .position(|h| h.is_isomorphic(&one_edge))
        .unwrap();
    assert_eq!(p.objective[g], ratio(0, 1));
    assert_eq!(a.dot(&p.blocks[0].coeffs[g]), ratio(-1, 4));
}

#[test]
fn random_psd_bounds_never_beat_the_optimum() {
    let (p, oracle) = m4_with_oracle();
    let lambda = solve(p, 1e-9).unwrap().lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mats: Vec<RationalMatrix> = p
            .blocks
            .iter()
            .map(|b| random_psd(&mut rng, b.dim(), 2, 5000))
            .collect();
        let feasible = (0..p.graphs.len())
            .map(|g| {
                let r: Rational = mats.iter().zip(oracle).map(|(a, m)| a.dot(&m[g])).sum();
                &p.objective[g] - r
            })
            .min()
            .unwrap();
        assert!(lambda >= to_f64(&feasible) - 1e-9);
    }
}

#[test]
fn lambda_grows_with_the_type_set() {
    let all = enumerate_types(4).unwrap();
    let mut last = f64::NEG_INFINITY;
    for n in [0, 1, 4, 11] {
        let spec = ObjectiveSpec {
            t: 4,
            ell: 6,
            types: all[..n].to_vec(),
            parity: vec![ParitySelection::BOTH; n],
            complement_sharing: false,
        };
        let p = build_problem(&spec, &DensityCache::disabled()).unwrap();
        let lambda = solve(&p, 1e-9).unwrap().lambda;
        if n == 0 {
            assert!(lambda.abs() < 1e-8, "empty type set gives {lambda}");
        }
        assert!(lambda >= last - 1e-8, "{n} types: {lambda} < {last}");
        last = lambda;
    }
    assert!(last >= 0.0287);
}
