//! Backward continued fraction expansions and the associated interval map.
//!
//! A point x in (0, 1] has a backward expansion x = 1/(b1 - 1/(b2 - ...))
//! with all digits b >= 2. Digits here follow the ceiling rule b = ceil(1/x),
//! which is the unique choice making truncations round-trip: x always lies in
//! the closed interval spanned by its digit prefix (see [`bcf_eval`]).
//!
//! The interval map [`renyi_step`] is kept in its classical literal form
//! T(x) = 1/(1-x) - floor(1/(1-x)). T is conjugate to the digit shift
//! [`bcf_shift`] via h(x) = 1 - x: away from the countable boundary set
//! {1/k}, S(x) = 1 - T(1 - x). On boundary points the two conventions
//! disagree (the ceiling rule terminates there), so shift-invariance tests
//! must use [`bcf_shift`] directly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::moebius::MoebiusWord;
use crate::{Error, Result};

/// One step of the interval map T(x) = 1/(1-x) - floor(1/(1-x)) on [0, 1).
pub fn renyi_step(x: &BigRational) -> Result<BigRational> {
    if x.is_negative() || *x >= BigRational::one() {
        return Err(Error::InvalidInput(format!("{x} outside [0, 1)")));
    }
    let y = (BigRational::one() - x).recip();
    Ok(&y - y.floor())
}

/// The digit shift S(x) = b(x) - 1/x where b(x) is the backward digit of x.
///
/// Maps (0, 1] to [0, 1]; S(x) = 0 exactly when the expansion of x
/// terminates after one digit.
pub fn bcf_shift(x: &BigRational) -> Result<BigRational> {
    let b = bcf_digit(x)?;
    Ok(BigRational::from(BigInt::from(b)) - x.recip())
}

fn bcf_digit(x: &BigRational) -> Result<u64> {
    if !x.is_positive() || *x > BigRational::one() {
        return Err(Error::InvalidInput(format!("{x} outside (0, 1]")));
    }
    // ceil(1/x) = ceil(denom/numer); x = 1 is the fixed point of digit 2
    let (q, r) = x.denom().div_rem(x.numer());
    let c = if r.is_zero() { q } else { q + 1 };
    let b: u64 = c
        .try_into()
        .map_err(|_| Error::InvalidInput("digit exceeds u64".into()))?;
    Ok(b.max(2))
}

/// Digit string of a backward or standard continued fraction expansion.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BcfDigits {
    pub digits: Vec<u64>,
    /// The value the digits were computed from.
    pub origin: String,
    /// True when the expansion ended exactly; absent digits are not padded.
    pub terminated: bool,
}

/// First `count` backward digits of x in (0, 1].
///
/// Rational inputs terminate; `terminated` records whether the expansion
/// ended before `count` digits were produced.
pub fn bcf_digits(x: &BigRational, count: usize) -> Result<BcfDigits> {
    let origin = x.to_string();
    let mut digits = Vec::new();
    let mut y = x.clone();
    let mut terminated = false;
    while digits.len() < count {
        let b = bcf_digit(&y)?;
        digits.push(b);
        // remainder b - 1/y lies in [0, 1]; zero means the expansion ended
        y = BigRational::from(BigInt::from(b)) - y.recip();
        if y.is_zero() {
            terminated = true;
            break;
        }
    }
    Ok(BcfDigits { digits, origin, terminated })
}

/// First `count` standard continued fraction digits of x in (0, 1],
/// x = 1/(a1 + 1/(a2 + ...)) with digits a >= 1.
pub fn cf_digits(x: &BigRational, count: usize) -> Result<BcfDigits> {
    if !x.is_positive() || *x > BigRational::one() {
        return Err(Error::InvalidInput(format!("{x} outside (0, 1]")));
    }
    let origin = x.to_string();
    let mut digits = Vec::new();
    let mut y = x.clone();
    let mut terminated = false;
    while digits.len() < count {
        let inv = y.recip();
        let fl = inv.floor();
        let a: u64 = fl
            .to_integer()
            .try_into()
            .map_err(|_| Error::InvalidInput("digit exceeds u64".into()))?;
        digits.push(a);
        y = inv - fl;
        if y.is_zero() {
            terminated = true;
            break;
        }
    }
    Ok(BcfDigits { digits, origin, terminated })
}

/// Exact interval spanned by a backward digit prefix: the image of [0, 1]
/// under the composition of the digit maps. Digits must all be >= 2.
///
/// `bcf_eval(&[2]) = [1/2, 1]`, `bcf_eval(&[3]) = [1/3, 1/2]`, and the
/// intervals nest as the prefix grows, shrinking onto the expanded point.
pub fn bcf_eval(digits: &[u64]) -> Result<(BigRational, BigRational)> {
    if let Some(&bad) = digits.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidInput(format!("backward digit {bad} below 2")));
    }
    let w = MoebiusWord::backward_word(digits)?;
    Ok(w.image())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn renyi_step_examples() {
        assert_eq!(renyi_step(&rat(0, 1)).unwrap(), rat(0, 1));
        assert_eq!(renyi_step(&rat(1, 2)).unwrap(), rat(0, 1));
        assert_eq!(renyi_step(&rat(1, 3)).unwrap(), rat(1, 2));
        assert!(renyi_step(&rat(1, 1)).is_err());
    }

    #[test]
    fn digit_examples() {
        let d = bcf_digits(&rat(1, 2), 10).unwrap();
        assert_eq!(d.digits, vec![2]);
        assert!(d.terminated);
        let d = bcf_digits(&rat(2, 5), 10).unwrap();
        assert_eq!(d.digits, vec![3, 2]);
        assert!(d.terminated);
        for k in 1..8i64 {
            let d = bcf_digits(&rat(k, k + 1), 20).unwrap();
            assert_eq!(d.digits, vec![2; k as usize]);
            assert!(d.terminated);
        }
        // x = 1 is the fixed point of the digit-2 map
        let d = bcf_digits(&rat(1, 1), 5).unwrap();
        assert_eq!(d.digits, vec![2; 5]);
        assert!(!d.terminated);
    }

    #[test]
    fn eval_intervals_and_roundtrip() {
        assert_eq!(bcf_eval(&[2]).unwrap(), (rat(1, 2), rat(1, 1)));
        assert_eq!(bcf_eval(&[3]).unwrap(), (rat(1, 3), rat(1, 2)));
        assert!(bcf_eval(&[1]).is_err());
        let x = rat(2, 7);
        let d = bcf_digits(&x, 10).unwrap();
        let mut prev = (rat(0, 1), rat(1, 1));
        for k in 1..=d.digits.len() {
            let iv = bcf_eval(&d.digits[..k]).unwrap();
            assert!(iv.0 >= prev.0 && iv.1 <= prev.1, "nesting failed at {k}");
            assert!(iv.0 <= x && x <= iv.1, "round trip failed at {k}");
            prev = iv;
        }
    }

    #[test]
    fn shift_drops_first_digit() {
        let x = rat(2, 5);
        let s = bcf_shift(&x).unwrap();
        assert_eq!(s, rat(1, 2));
        assert_eq!(bcf_digits(&s, 9).unwrap().digits, vec![2]);
        // conjugation with the literal map away from boundary points
        let y = rat(3, 7);
        let lhs = bcf_shift(&y).unwrap();
        let rhs = BigRational::one() - renyi_step(&(BigRational::one() - y)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn standard_digits() {
        let d = cf_digits(&rat(2, 7), 10).unwrap();
        // 2/7 = 1/(3 + 1/2)
        assert_eq!(d.digits, vec![3, 2]);
        assert!(d.terminated);
    }
}
