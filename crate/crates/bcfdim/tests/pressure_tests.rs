use bcfdim::pressure::{
    dimension_bracket, dimension_bracket_opts, lambda_bracket, lambda_bracket_distortion,
    lambda_bracket_opts, lambda_lower_bound, moran_solve, partition_sum, tail_sum, Cutoffs,
    EngineOpts, Shift, TailKind, TailParams,
};
use bcfdim::systems::{make_system, parse_alphabet, AlphabetSpec, Family};
use bcfdim::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

const FREE_CUTOFFS: Cutoffs = Cutoffs { letter_cutoff: u64::MAX, star_n_cutoff: 0 };

// ---------------------------------------------------------------------------
// singleton systems have a closed-form growth rate
// ---------------------------------------------------------------------------

#[test]
fn singleton_growth_rate_matches_fixed_point_multiplier() {
    // For one letter b >= 3 the growth rate is |phi_b'(x_b)|^t at the fixed
    // point x_b, and 1/(b - x_b) = 2/(b + sqrt(b^2 - 4)), so
    // lambda = rho^(-2t) with rho = (b + sqrt(b^2 - 4))/2.
    let sys = make_system(Family::Bcf).unwrap();
    for b in 3u64..10 {
        let bf = b as f64;
        let rho = 0.5 * (bf + (bf * bf - 4.0).sqrt());
        for t in [0.1, 0.3, 0.5, 0.75, 1.0] {
            let oracle = rho.powf(-2.0 * t);
            let br = lambda_bracket(&sys, &AlphabetSpec::finite([b]), t, 8).unwrap();
            assert!(
                br.lambda_lo <= oracle + 1e-12 && oracle - 1e-12 <= br.lambda_hi,
                "b={b} t={t}: [{}, {}] misses {oracle}",
                br.lambda_lo,
                br.lambda_hi
            );
            assert!(br.lambda_hi - br.lambda_lo < 0.1);
        }
    }
}

#[test]
fn distortion_bracket_agrees_with_eval_bracket() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4,5").unwrap();
    let ev = lambda_bracket(&sys, &a, 0.5, 6).unwrap();
    let di = lambda_bracket_distortion(&sys, &a, 0.5, 6).unwrap();
    // both enclose the same growth rate
    assert!(di.lambda_lo <= ev.lambda_hi && ev.lambda_lo <= di.lambda_hi);
    assert_eq!(di.k_used, Some(9.0));
    // distortion needs a finite pool
    let err = lambda_bracket_distortion(&sys, &parse_alphabet("3..").unwrap(), 0.8, 2);
    assert!(matches!(err, Err(Error::Unsupported(_))));
}

// ---------------------------------------------------------------------------
// partition-sum multiplicativity (exact enumeration)
// ---------------------------------------------------------------------------

fn subsets_of_3_to_7() -> Vec<AlphabetSpec> {
    let letters = [3u64, 4, 5, 6, 7];
    let mut out = Vec::new();
    for mask in 1u32..32 {
        let set: Vec<u64> =
            letters.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &b)| b).collect();
        out.push(AlphabetSpec::finite(set));
    }
    out
}

#[test]
fn partition_sums_are_submultiplicative_and_nearly_super() {
    let sys = make_system(Family::Bcf).unwrap();
    let t = 0.75;
    let k2t = sys.distortion_k.powf(2.0 * t) * (1.0 + 1e-12);
    for a in subsets_of_3_to_7() {
        let sums: Vec<(f64, f64)> =
            (1u32..=8).map(|n| partition_sum(&sys, &a, n, t, &FREE_CUTOFFS).unwrap()).collect();
        for m in 1usize..8 {
            for n in 1..=8 - m {
                let (whole_lo, whole_hi) = sums[m + n - 1];
                let (m_lo, m_hi) = sums[m - 1];
                let (n_lo, n_hi) = sums[n - 1];
                // Phi_{m+n} <= Phi_m Phi_n
                assert!(
                    whole_lo <= m_hi * n_hi * (1.0 + 1e-12),
                    "submultiplicativity fails for {a} at m={m} n={n}"
                );
                // Phi_m Phi_n <= K^{2t} Phi_{m+n}
                assert!(
                    m_lo * n_lo <= k2t * whole_hi,
                    "distortion supermultiplicativity fails for {a} at m={m} n={n}"
                );
            }
        }
    }
}

#[test]
fn partition_sum_rejects_bad_arguments() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4").unwrap();
    assert!(matches!(partition_sum(&sys, &a, 0, 0.5, &FREE_CUTOFFS), Err(Error::InvalidInput(_))));
    assert!(matches!(partition_sum(&sys, &a, 2, 1.5, &FREE_CUTOFFS), Err(Error::InvalidInput(_))));
    let inf = parse_alphabet("3..").unwrap();
    let cut = Cutoffs { letter_cutoff: 50, star_n_cutoff: 0 };
    assert!(matches!(partition_sum(&sys, &inf, 1, 0.5, &cut), Err(Error::Divergent(_))));
    let (lo, hi) = partition_sum(&sys, &inf, 1, 0.8, &cut).unwrap();
    assert!(0.0 < lo && lo < hi);
}

// ---------------------------------------------------------------------------
// monotonicity of the certified bounds
// ---------------------------------------------------------------------------

#[test]
fn lambda_bounds_monotone_in_t_and_alphabet() {
    let sys = make_system(Family::Bcf).unwrap();
    let opts = EngineOpts::default();
    let zero = BigRational::zero();

    // nonincreasing in t (norms are <= 1)
    let a = parse_alphabet("3,4,5").unwrap();
    let mut prev = f64::INFINITY;
    for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let hi = lambda_bracket(&sys, &a, t, 6).unwrap().lambda_hi;
        assert!(hi <= prev + 1e-12, "lambda_hi increased from {prev} at t={t}");
        prev = hi;
    }

    // nondecreasing under alphabet inclusion at the shared point x = 0
    let chain = ["4,5", "3,4,5", "3,4,5,6", "3,4,5,6,7"];
    let mut prev = 0.0;
    for text in chain {
        let a = parse_alphabet(text).unwrap();
        let lo = lambda_lower_bound(&sys, &a, 0.6, 5, None, &opts, Some(&zero)).unwrap();
        assert!(lo >= prev - 1e-15, "lambda_lo dropped at {text}");
        prev = lo;
    }
}

#[test]
fn brackets_refine_monotonically_with_depth() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4,5").unwrap();
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    for depth in [2u32, 4, 8] {
        let br = lambda_bracket(&sys, &a, 0.45, depth).unwrap();
        assert!(br.lambda_lo >= lo - 1e-12 && br.lambda_hi <= hi + 1e-12, "widened at depth {depth}");
        assert!(br.lambda_lo <= br.lambda_hi);
        lo = br.lambda_lo;
        hi = br.lambda_hi;
    }
}

// ---------------------------------------------------------------------------
// Moran equation
// ---------------------------------------------------------------------------

#[test]
fn moran_exact_and_known_roots() {
    // exact rational unit sum must return exactly 1.0
    assert_eq!(moran_solve(&[rat(1, 2), rat(1, 3), rat(1, 6)], 1e-12).unwrap(), 1.0);
    assert_eq!(moran_solve(&[rat(1, 2), rat(1, 2)], 1e-12).unwrap(), 1.0);
    // a single ratio always gives a one-point set
    assert_eq!(moran_solve(&[rat(1, 7)], 1e-12).unwrap(), 0.0);
    // middle-thirds Cantor set
    let cantor = moran_solve(&[rat(1, 3), rat(1, 3)], 1e-11).unwrap();
    assert!((cantor - 0.6309297535714574).abs() < 1e-9);
    // two maps of ratio 1/4 give log 2 / log 4 = 1/2
    let half = moran_solve(&[rat(1, 4), rat(1, 4)], 1e-11).unwrap();
    assert!((half - 0.5).abs() < 1e-9);
    assert!(moran_solve(&[], 1e-9).is_err());
    assert!(moran_solve(&[rat(3, 2)], 1e-9).is_err());
}

#[test]
fn similarity_dimension_bracket_matches_moran() {
    let ratios = vec![rat(1, 4), rat(1, 4), rat(1, 4)];
    let sys = make_system(Family::Similarity { ratios: ratios.clone() }).unwrap();
    let a = AlphabetSpec::finite([1, 2, 3]);
    let br = dimension_bracket(&sys, &a, 1e-3, 8).unwrap();
    let oracle = 3f64.ln() / 4f64.ln(); // 0.7924812503605781
    assert!(br.certified, "similarity bracket not certified: {:?}", br.note);
    assert!(br.t_lo <= oracle && oracle <= br.t_hi);
    assert!(br.width() <= 1e-3);
    let root = moran_solve(&ratios, 1e-11).unwrap();
    assert!((root - oracle).abs() < 1e-9);
}

// ---------------------------------------------------------------------------
// analytic tails
// ---------------------------------------------------------------------------

#[test]
fn power_tail_dominates_harmonic_comparison() {
    // sum over j > 7 of (2j)^{-2} >= 1/(4 * 8): the left side is a quarter of
    // the zeta tail from 8, the right side the integral comparison
    let bound = tail_sum(&TailParams::Power { cutoff: 7, shift: Shift::Zero }, 1.0).unwrap();
    assert_eq!(bound.kind, TailKind::PowerTail);
    assert_eq!((bound.cutoff, bound.t), (7, 1.0));
    assert!(bound.mass_lo / 4.0 >= 1.0 / 32.0);
    assert!(bound.mass_lo <= bound.mass_hi);
    // sanity: the tail from 8 of j^{-2} is between 1/8 and 1/7
    assert!(bound.mass_lo > 0.125 && bound.mass_hi < 1.0 / 7.0);
}

#[test]
fn power_tail_below_one_third_at_the_gap_parameter() {
    // sum over j >= 5 of j^{-1.9} < 1/3, while the sum from 4 is not
    let from5 = tail_sum(&TailParams::Power { cutoff: 4, shift: Shift::Zero }, 0.95).unwrap();
    assert!(from5.mass_hi < 1.0 / 3.0);
    let from4 = tail_sum(&TailParams::Power { cutoff: 3, shift: Shift::Zero }, 0.95).unwrap();
    assert!(from4.mass_lo > 1.0 / 3.0);
}

#[test]
fn star_tail_vanishes_when_everything_is_tracked() {
    let a = parse_alphabet("2,3").unwrap();
    let big = tail_sum(&TailParams::Star { alphabet: a.clone(), n_cutoff: 200_000, j_cutoff: 3 }, 1.0).unwrap();
    assert_eq!(big.kind, TailKind::StarTail);
    assert!(big.mass_hi < 1e-4, "untracked star mass {} not negligible", big.mass_hi);
    assert!(big.mass_lo >= 0.0);

    // shrinking the tracked rectangle grows the tail mass
    let small = tail_sum(&TailParams::Star { alphabet: a, n_cutoff: 10, j_cutoff: 3 }, 1.0).unwrap();
    assert!(small.mass_hi > big.mass_hi);
}

#[test]
fn tails_diverge_at_and_below_one_half() {
    let power = tail_sum(&TailParams::Power { cutoff: 9, shift: Shift::One }, 0.5);
    assert!(matches!(power, Err(Error::Divergent(_))));
    let a = parse_alphabet("2,3").unwrap();
    let star = tail_sum(&TailParams::Star { alphabet: a, n_cutoff: 50, j_cutoff: 3 }, 0.5);
    assert!(matches!(star, Err(Error::Divergent(_))));
}

// ---------------------------------------------------------------------------
// dimension brackets for the concrete families
// ---------------------------------------------------------------------------

#[test]
fn bcf_456_bracket_is_certified_below_one_half() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("4,5,6").unwrap();
    let br = dimension_bracket(&sys, &a, 1e-2, 12).unwrap();
    assert!(br.certified && br.certified_above && br.certified_below);
    assert!(br.width() <= 1e-2);
    assert!(0.33 < br.t_lo && br.t_hi < 0.38, "bracket [{}, {}]", br.t_lo, br.t_hi);
    assert!(!br.evidence.is_empty());
}

#[test]
fn gauss_12_bracket_contains_the_known_value() {
    // dim of the {1,2} Gauss system, known to high precision
    let known = 0.5312805062772051;
    let sys = make_system(Family::Gauss).unwrap();
    let a = AlphabetSpec::finite([1, 2]);
    let br = dimension_bracket(&sys, &a, 2.5e-2, 12).unwrap();
    assert!(br.certified, "width {} note {:?}", br.width(), br.note);
    assert!(br.t_lo <= known && known <= br.t_hi);
}

#[test]
fn singleton_dimension_is_exactly_zero() {
    let sys = make_system(Family::Bcf).unwrap();
    let br = dimension_bracket(&sys, &AlphabetSpec::finite([5]), 1e-3, 4).unwrap();
    assert_eq!((br.t_lo, br.t_hi), (0.0, 0.0));
    assert!(br.certified);
}

#[test]
fn uncertified_results_are_flagged_not_faked() {
    // an unreachable width target must come back certified = false with a note
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4").unwrap();
    let opts = EngineOpts { target_width: 1e-9, max_depth: 3, ..EngineOpts::default() };
    let br = dimension_bracket_opts(&sys, &a, &opts).unwrap();
    assert!(!br.certified);
    assert!(br.note.is_some());
    assert!(br.t_lo < br.t_hi);
}

#[test]
fn budget_guard_trips_before_enumerating() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4,5,6,7").unwrap();
    let opts = EngineOpts { budget: 100, ..EngineOpts::default() };
    let err = lambda_bracket_opts(&sys, &a, 0.5, 8, None, &opts);
    assert!(matches!(err, Err(Error::BudgetExceeded { budget: 100, .. })));
}

#[test]
fn reports_are_independent_of_thread_count() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("3,4,5,6").unwrap();
    let mk = |threads: usize| {
        let opts = EngineOpts { target_width: 1e-2, threads, ..EngineOpts::default() };
        dimension_bracket_opts(&sys, &a, &opts).unwrap()
    };
    let one = mk(1);
    let eight = mk(8);
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&eight).unwrap());
    assert_eq!(one.t_lo.to_bits(), eight.t_lo.to_bits());
    assert_eq!(one.t_hi.to_bits(), eight.t_hi.to_bits());
}
