use bcfdim::pressure::moran_solve;
use bcfdim::spectrum::{find_gap_params, gap_demo, greedy_build_from, regularity_check};
use bcfdim::systems::{make_system, AlphabetSpec, Family};
use num_bigint::BigInt;
use num_rational::BigRational;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn greedy_realizes_a_target_below_one_half() {
    let sys = make_system(Family::Bcf).unwrap();
    let r = greedy_build_from(&sys, 3, 0.45, 8, 5e-3).unwrap();
    assert_eq!(r.target_t, 0.45);
    assert!(!r.chosen.is_empty());
    assert!(r.achieved.certified_above, "upper side not certified: {:?}", r.achieved.note);
    assert!(r.achieved.t_hi <= 0.455, "overshot the target: {}", r.achieved.t_hi);
    // every rejection must be justified by a failed level certificate
    for step in r.step_log.iter().filter(|s| !s.accepted) {
        assert!(step.lambda_hi_at_target >= 1.0, "unjustified rejection of {}", step.candidate);
    }
    // accepted set and log agree
    let accepted: Vec<u64> = r.step_log.iter().filter(|s| s.accepted).map(|s| s.candidate).collect();
    assert_eq!(accepted, r.chosen);
}

#[test]
fn greedy_target_zero_stops_at_one_letter() {
    let sys = make_system(Family::Bcf).unwrap();
    let r = greedy_build_from(&sys, 3, 0.0, 10, 1e-3).unwrap();
    assert_eq!(r.chosen, vec![3]);
    assert_eq!((r.achieved.t_lo, r.achieved.t_hi), (0.0, 0.0));
    assert!(r.achieved.certified);
}

#[test]
fn regularity_detects_the_exact_similarity_dimension() {
    // two maps of ratio 1/3: dimension log 2 / log 3
    let sys = make_system(Family::Similarity { ratios: vec![rat(1, 3), rat(1, 3)] }).unwrap();
    let a = AlphabetSpec::finite([1, 2]);
    assert!(regularity_check(&sys, &a, 0.6309297535714574, 6).unwrap());
    assert!(!regularity_check(&sys, &a, 0.7, 6).unwrap());
}

#[test]
fn gap_certificate_parameters_and_margins() {
    let cert = find_gap_params().unwrap();
    assert_eq!((cert.n1, cert.n2), (5, 48));
    assert_eq!(cert.gap, (0.95, 0.97));
    // the two-letter core exceeds the gap, every omission falls below it
    assert!(cert.dim_12_lo > 0.97, "core lower bound {}", cert.dim_12_lo);
    assert!(cert.dim_not1_hi < 0.95 && cert.dim_not2_hi < 0.95);
    assert!(cert.dim_12_bracket.certified_below);
    assert!(cert.not1_certificate.lambda_hi < 1.0);
    assert!(cert.not2_certificate.lambda_hi < 1.0);
    // Moran root of the affine pair: ratios 1/2 and (n2-2)/(2 n2)
    let oracle = moran_solve(&[rat(1, 2), rat(46, 96)], 1e-12).unwrap();
    assert!((cert.moran_root - oracle).abs() < 1e-9);
    assert!((cert.moran_root - 0.9705126436610587).abs() < 1e-9);
    assert!(cert.moran_root > cert.gap.1);

    let demo = gap_demo(&cert).unwrap();
    assert!(demo.monotone_sanity_lambda_lo > 1.0);
    assert!(demo.narrative.contains("0.95") && demo.narrative.contains("0.97"));
}
