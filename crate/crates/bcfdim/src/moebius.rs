//! Exact continuant arithmetic for words of Moebius generators.
//!
//! A word `w = (b_1, ..., b_n)` denotes the composition
//! `phi_w = phi_{b_1} . phi_{b_2} . ... . phi_{b_n}` (leftmost letter applied
//! last). For the backward family `phi_b(x) = 1/(b - x)` the word acts as
//!
//! ```text
//! phi_w(x) = (p_n - x p_{n-1}) / (q_n - x q_{n-1})
//! ```
//!
//! with integer continuants obeying `q_n = b_n q_{n-1} - q_{n-2}` from
//! `q_0 = 1, q_{-1} = 0`; the Gauss family `phi_b(x) = 1/(b + x)` uses the
//! plus-sign recurrence and numerator `p_n + x p_{n-1}`. Continuants are kept
//! as exact big integers: they grow exponentially in the word length and
//! every derivative norm downstream is an exact rational function of them.
//!
//! The derivative of a word is `phi_w'(x) = det / D(x)^2` where
//! `D(x) = q_n -+ x q_{n-1}` is the denominator and `det` is `+1` for every
//! backward word and `(-1)^n` for Gauss words, so `|phi_w'| = 1/D^2` holds in
//! both conventions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::round::{self, Dir};
use crate::{Error, Result};

/// Recurrence convention of a word: backward (minus) or Gauss (plus).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Backward,
    Gauss,
}

impl Convention {
    /// Smallest admissible letter: 2 for backward words (1 would fix 1 and
    /// escape the interval), 1 for Gauss words.
    pub fn min_letter(self) -> u64 {
        match self {
            Convention::Backward => 2,
            Convention::Gauss => 1,
        }
    }
}

/// Natural log of a derivative norm together with its rounding direction.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LogNorm {
    pub value: f64,
    pub rounding: Dir,
}

/// A word of Moebius generators with its exact continuants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoebiusWord {
    convention: Convention,
    letters: Vec<u64>,
    p_prev: BigInt,
    p_cur: BigInt,
    q_prev: BigInt,
    q_cur: BigInt,
    det: i8,
}

impl MoebiusWord {
    /// The empty word (identity map).
    pub fn empty(convention: Convention) -> Self {
        let (p_prev, det) = match convention {
            Convention::Backward => (BigInt::from(-1), 1),
            Convention::Gauss => (BigInt::one(), 1),
        };
        MoebiusWord {
            convention,
            letters: Vec::new(),
            p_prev,
            p_cur: BigInt::zero(),
            q_prev: BigInt::zero(),
            q_cur: BigInt::one(),
            det,
        }
    }

    /// Single-letter word.
    pub fn letter(convention: Convention, b: u64) -> Result<Self> {
        Self::empty(convention).extend(b)
    }

    /// Builds a backward word from its letters.
    pub fn backward_word(letters: &[u64]) -> Result<Self> {
        let mut w = Self::empty(Convention::Backward);
        for &b in letters {
            w = w.extend(b)?;
        }
        Ok(w)
    }

    /// Builds a Gauss word from its letters.
    pub fn gauss_word(letters: &[u64]) -> Result<Self> {
        let mut w = Self::empty(Convention::Gauss);
        for &b in letters {
            w = w.extend(b)?;
        }
        Ok(w)
    }

    /// The word `w . b`, one recurrence step.
    pub fn extend(&self, b: u64) -> Result<Self> {
        if b < self.convention.min_letter() {
            return Err(Error::InvalidInput(format!(
                "letter {b} below the minimum {} for {:?} words",
                self.convention.min_letter(),
                self.convention
            )));
        }
        let bi = BigInt::from(b);
        let (p_new, q_new, det) = match self.convention {
            Convention::Backward => (
                &bi * &self.p_cur - &self.p_prev,
                &bi * &self.q_cur - &self.q_prev,
                self.det,
            ),
            Convention::Gauss => (
                &bi * &self.p_cur + &self.p_prev,
                &bi * &self.q_cur + &self.q_prev,
                -self.det,
            ),
        };
        let mut letters = self.letters.clone();
        letters.push(b);
        let w = MoebiusWord {
            convention: self.convention,
            letters,
            p_prev: self.p_cur.clone(),
            p_cur: p_new,
            q_prev: self.q_cur.clone(),
            q_cur: q_new,
            det,
        };
        // Backward continuants grow strictly: q_n > q_{n-1} >= 1 for n >= 1,
        // hence both endpoint denominators stay positive.
        debug_assert!(match w.convention {
            Convention::Backward => w.q_cur > w.q_prev && w.q_prev >= BigInt::zero(),
            Convention::Gauss => w.q_cur >= BigInt::one() && w.q_prev >= BigInt::zero(),
        });
        debug_assert!(w.denom_end1().is_positive());
        Ok(w)
    }

    /// Concatenation `self . tail` (same convention).
    pub fn concat(&self, tail: &Self) -> Result<Self> {
        if self.convention != tail.convention {
            return Err(Error::InvalidInput(
                "cannot concatenate words of different conventions".into(),
            ));
        }
        let mut w = self.clone();
        for &b in &tail.letters {
            w = w.extend(b)?;
        }
        Ok(w)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn letters(&self) -> &[u64] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `(p_{n-1}, p_n, q_{n-1}, q_n)`.
    pub fn continuants(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.p_prev, &self.p_cur, &self.q_prev, &self.q_cur)
    }

    /// Signed derivative numerator; `phi_w'(x) = det / D(x)^2`.
    pub fn det(&self) -> i8 {
        self.det
    }

    /// `|p_n q_{n-1} - p_{n-1} q_n| = 1` for every word of either convention.
    pub fn is_unimodular(&self) -> bool {
        (&self.p_cur * &self.q_prev - &self.p_prev * &self.q_cur).abs() == BigInt::one()
    }

    /// Denominator at the left endpoint: `D(0) = q_n`.
    pub fn denom_end0(&self) -> BigInt {
        self.q_cur.clone()
    }

    /// Denominator at the right endpoint: `D(1) = q_n -+ q_{n-1}`.
    pub fn denom_end1(&self) -> BigInt {
        match self.convention {
            Convention::Backward => &self.q_cur - &self.q_prev,
            Convention::Gauss => &self.q_cur + &self.q_prev,
        }
    }

    /// Exact denominator `D(x)`; positive for all `x` in `[0, 1]`.
    pub fn denom_at(&self, x: &BigRational) -> BigRational {
        let q = BigRational::from(self.q_cur.clone());
        let qp = BigRational::from(self.q_prev.clone());
        match self.convention {
            Convention::Backward => q - x * qp,
            Convention::Gauss => q + x * qp,
        }
    }

    /// Exact image of a point of `[0, 1]`.
    pub fn apply(&self, x: &BigRational) -> Result<BigRational> {
        if x < &BigRational::zero() || x > &BigRational::one() {
            return Err(Error::InvalidInput(format!("point {x} outside [0, 1]")));
        }
        let p = BigRational::from(self.p_cur.clone());
        let pp = BigRational::from(self.p_prev.clone());
        let num = match self.convention {
            Convention::Backward => p - x * pp,
            Convention::Gauss => p + x * pp,
        };
        let y = num / self.denom_at(x);
        debug_assert!(y >= BigRational::zero() && y <= BigRational::one());
        Ok(y)
    }

    /// Exact `|phi_w'(x)| = 1 / D(x)^2`.
    pub fn deriv_abs_at(&self, x: &BigRational) -> Result<BigRational> {
        if x < &BigRational::zero() || x > &BigRational::one() {
            return Err(Error::InvalidInput(format!("point {x} outside [0, 1]")));
        }
        let d = self.denom_at(x);
        Ok(BigRational::one() / (&d * &d))
    }

    /// Exact image interval `phi_w([0, 1])`, endpoints in ascending order.
    pub fn image(&self) -> (BigRational, BigRational) {
        let a = self.apply(&BigRational::zero()).expect("0 in range");
        let b = self.apply(&BigRational::one()).expect("1 in range");
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Exact `sup |phi_w'|` over `[0, 1]`: `1 / min(D(0), D(1))^2`.
    ///
    /// The denominator is linear in `x`, so the extrema sit at the endpoints.
    pub fn sup_norm_exact(&self) -> BigRational {
        let d = self.denom_end0().min(self.denom_end1());
        debug_assert!(d.is_positive());
        BigRational::new(BigInt::one(), &d * &d)
    }

    /// Exact `inf |phi_w'|` over `[0, 1]`: `1 / max(D(0), D(1))^2`.
    pub fn inf_norm_exact(&self) -> BigRational {
        let d = self.denom_end0().max(self.denom_end1());
        BigRational::new(BigInt::one(), &d * &d)
    }

    /// Directed `ln sup |phi_w'| = -2 ln min(D(0), D(1))`.
    pub fn sup_norm_log(&self, rounding: Dir) -> LogNorm {
        let d = self.denom_end0().min(self.denom_end1());
        log_inv_square(&d, rounding)
    }

    /// Directed `ln inf |phi_w'| = -2 ln max(D(0), D(1))`.
    pub fn inf_norm_log(&self, rounding: Dir) -> LogNorm {
        let d = self.denom_end0().max(self.denom_end1());
        log_inv_square(&d, rounding)
    }
}

fn log_inv_square(d: &BigInt, rounding: Dir) -> LogNorm {
    debug_assert!(d.is_positive());
    let value = match rounding {
        // ln(1/d^2) = -2 ln d; rounding down needs ln d rounded up.
        Dir::Down => round::mul_down(-2.0, round::ln_bigint_up(d)),
        Dir::Up => round::mul_up(-2.0, round::ln_bigint_down(d)),
    };
    let value = if d == &BigInt::one() { 0.0 } else { value };
    LogNorm { value, rounding }
}

/// Extends a word by one letter. Free-function form of [`MoebiusWord::extend`].
pub fn extend_word(w: &MoebiusWord, b: u64) -> Result<MoebiusWord> {
    w.extend(b)
}

/// Directed log of the sup-norm of the derivative of a nonempty word.
pub fn word_sup_norm(w: &MoebiusWord, rounding: Dir) -> LogNorm {
    w.sup_norm_log(rounding)
}

/// Directed log of the inf-norm of the derivative of a nonempty word.
pub fn word_inf_norm(w: &MoebiusWord, rounding: Dir) -> LogNorm {
    w.inf_norm_log(rounding)
}

/// Exact image of `x` under the word map. Free-function form of `apply`.
pub fn apply_word(w: &MoebiusWord, x: &BigRational) -> Result<BigRational> {
    w.apply(x)
}
