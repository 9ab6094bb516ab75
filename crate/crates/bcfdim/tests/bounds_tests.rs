use bcfdim::bounds::{
    augment_constants, augment_lower, augment_upper, check_sandwich, star_tail_constant,
    thm46_inequality, Thm46Reading,
};
use bcfdim::pressure::lambda_bracket;
use bcfdim::systems::{make_system, parse_alphabet, AlphabetSpec, Family};
use bcfdim::Error;

// ---------------------------------------------------------------------------
// independent oracle: fold raw 2x2 integer matrices for phi_b(x) = 1/(b - x)
// ---------------------------------------------------------------------------

fn fold(word: &[u64]) -> (i128, i128) {
    // returns (c, d) of the composed map (a x + b)/(c x + d)
    let (mut a, mut b, mut c, mut d) = (1i128, 0i128, 0i128, 1i128);
    for &k in word {
        // right-multiply by the matrix of phi_k: (0, 1, -1, k)
        let (na, nb) = (-b, a + b * k as i128);
        let (nc, nd) = (-d, c + d * k as i128);
        (a, b, c, d) = (na, nb, nc, nd);
    }
    (c, d)
}

fn sup_oracle_denom(word: &[u64]) -> i128 {
    let (c, d) = fold(word);
    // |phi'(x)| = 1/(c x + d)^2; extremes at the endpoints
    d.abs().min((c + d).abs())
}

#[test]
fn sandwich_ratio_matches_independent_fold() {
    for (omega, omega_tilde, n, b) in [
        (vec![], vec![], 0u32, 5u64),
        (vec![3], vec![4], 2, 6),
        (vec![5, 3], vec![2, 7], 1, 9),
        (vec![4, 2], vec![], 3, 7),
    ] {
        let report = check_sandwich(&omega, &omega_tilde, n, b).unwrap();
        let mut spliced = omega.clone();
        spliced.extend(std::iter::repeat(2).take(n as usize));
        spliced.push(b);
        spliced.extend_from_slice(&omega_tilde);
        let mut base = omega.clone();
        base.extend_from_slice(&omega_tilde);
        let q_spliced = sup_oracle_denom(&spliced) as f64;
        let q_base = sup_oracle_denom(&base) as f64;
        let oracle = (q_base / q_spliced).powi(2);
        assert!(
            (report.ratio - oracle).abs() <= 1e-12 * oracle,
            "ratio {} vs oracle {oracle}",
            report.ratio
        );
    }
}

#[test]
fn sandwich_sweep_small_scope() {
    // all prefix/suffix words of length <= 2 over {2..5}, n <= 3, b in {5..8}
    let mut words: Vec<Vec<u64>> = vec![vec![]];
    for a in 2u64..=5 {
        words.push(vec![a]);
        for b in 2u64..=5 {
            words.push(vec![a, b]);
        }
    }
    let mut in_scope = 0u32;
    let mut lower_breaks = 0u32;
    let mut upper_breaks = 0u32;
    for omega in &words {
        for omega_tilde in &words {
            for n in 0..=3 {
                for b in 5..=8 {
                    let r = check_sandwich(omega, omega_tilde, n, b).unwrap();
                    if r.hypothesis_ok {
                        in_scope += 1;
                        assert!(r.lower_ok, "lower bound fails in scope at {omega:?} {omega_tilde:?} n={n} b={b}");
                        assert!(r.upper_ok, "upper bound fails in scope at {omega:?} {omega_tilde:?} n={n} b={b}");
                    } else {
                        lower_breaks += u32::from(!r.lower_ok);
                        upper_breaks += u32::from(!r.upper_ok);
                    }
                }
            }
        }
    }
    assert!(in_scope > 3000);
    // parabolic-ending prefixes genuinely break both bounds
    assert!(lower_breaks > 0 && upper_breaks > 0);
    let low_witness = check_sandwich(&[2, 2], &[], 0, 5).unwrap();
    assert!(!low_witness.hypothesis_ok && !low_witness.lower_ok && low_witness.upper_ok);
    // ratio 49/4761 against the upper bound 1/100
    let up_witness = check_sandwich(&[2, 2], &[4], 3, 5).unwrap();
    assert!(!up_witness.hypothesis_ok && !up_witness.upper_ok && up_witness.lower_ok);
    assert_eq!(up_witness.ratio_exact, "49/4761");
    assert!(matches!(check_sandwich(&[], &[], 0, 4), Err(Error::InvalidInput(_))));
}

// ---------------------------------------------------------------------------
// augmentation constants
// ---------------------------------------------------------------------------

#[test]
fn augment_constant_ratio_is_k_fourth() {
    let sys = make_system(Family::Bcf).unwrap();
    for b in [3u64, 5, 9] {
        for k in [1.0f64, 4.0, 9.0] {
            let c = augment_constants(&sys, b, k).unwrap();
            let ratio = c.p_b / c.r_b;
            assert!((ratio / k.powi(4) - 1.0).abs() < 1e-9, "p/r != K^4 at b={b} K={k}");
            assert!(c.r_b <= c.p_b);
        }
    }
}

#[test]
fn augment_at_t_zero_increments_by_exactly_one() {
    let sys = make_system(Family::Bcf).unwrap();
    assert_eq!(augment_upper(0.25, 6, 0.0, 9.0, &sys).unwrap(), 1.25);
    assert_eq!(augment_lower(0.25, 6, 0.0, 9.0, &sys).unwrap(), 1.25);
}

#[test]
fn augmented_bracket_sits_inside_augment_bounds() {
    let sys = make_system(Family::Bcf).unwrap();
    let a = parse_alphabet("4,6").unwrap();
    let with_b = parse_alphabet("4,5,6").unwrap();
    for t in [0.4, 0.7, 1.0] {
        let base = lambda_bracket(&sys, &a, t, 7).unwrap();
        let joint = lambda_bracket(&sys, &with_b, t, 7).unwrap();
        let hi = augment_upper(base.lambda_hi, 5, t, sys.distortion_k, &sys).unwrap();
        let lo = augment_lower(base.lambda_lo, 5, t, sys.distortion_k, &sys).unwrap();
        assert!(joint.lambda_hi <= hi + 1e-12, "t={t}: {} > {hi}", joint.lambda_hi);
        assert!(joint.lambda_lo >= lo - 1e-12, "t={t}: {} < {lo}", joint.lambda_lo);
    }
}

// ---------------------------------------------------------------------------
// comparison inequality
// ---------------------------------------------------------------------------

#[test]
fn comparison_holds_under_the_shifted_reading() {
    for b in [6u64, 10, 20] {
        let r = thm46_inequality(b, 1.0, Thm46Reading::ShiftedJ).unwrap();
        assert!(r.holds && !r.divergent_rhs, "b={b}: lhs {} rhs {}", r.lhs_hi, r.rhs_lo);
        assert!(r.lhs_hi > 0.0 && r.rhs_lo > r.lhs_hi);
    }
    // frozen spot value: b = 6, t = 1 has lhs = (zeta(2) - 1)/100
    let r6 = thm46_inequality(6, 1.0, Thm46Reading::ShiftedJ).unwrap();
    let lhs_oracle = (std::f64::consts::PI.powi(2) / 6.0 - 1.0) / 100.0;
    assert!((r6.lhs_hi - lhs_oracle).abs() < 1e-6);
}

// the literal reading's right side repeats one positive term infinitely often
#[test]
fn comparison_literal_reading_diverges() {
    let r = thm46_inequality(7, 0.9, Thm46Reading::Literal).unwrap();
    assert!(r.divergent_rhs && r.holds);
    assert_eq!(r.rhs_lo, f64::INFINITY);
    assert!(matches!(thm46_inequality(7, 0.5, Thm46Reading::ShiftedJ), Err(Error::Divergent(_))));
    assert!(matches!(thm46_inequality(1, 0.9, Thm46Reading::ShiftedJ), Err(Error::InvalidInput(_))));
}

// ---------------------------------------------------------------------------
// parabolic tail constant
// ---------------------------------------------------------------------------

#[test]
fn parabolic_tail_constant_known_values() {
    // smallest hyperbolic letter 4: B = 9 sum (2n+3)^{-2} = 9 (pi^2/8 - 1)
    let a = parse_alphabet("2,4").unwrap();
    let b4 = star_tail_constant(&a, 1.0).unwrap();
    let oracle4 = 9.0 * (std::f64::consts::PI.powi(2) / 8.0 - 1.0);
    assert!(b4 >= oracle4 - 1e-12 && b4 <= oracle4 + 2e-3, "{b4} vs {oracle4}");

    // cofinite alphabet: smallest hyperbolic letter 3, B = 4 (zeta(2) - 1)
    let full = parse_alphabet("2..").unwrap();
    let b3 = star_tail_constant(&full, 1.0).unwrap();
    let oracle3 = 4.0 * (std::f64::consts::PI.powi(2) / 6.0 - 1.0);
    assert!(b3 >= oracle3 - 1e-12 && b3 <= oracle3 + 2e-3, "{b3} vs {oracle3}");

    assert!(matches!(star_tail_constant(&parse_alphabet("3,4").unwrap(), 1.0), Err(Error::InvalidInput(_))));
    assert!(matches!(star_tail_constant(&AlphabetSpec::finite([2]), 1.0), Err(Error::Degenerate(_))));
    assert!(matches!(star_tail_constant(&a, 0.5), Err(Error::Divergent(_))));
}
