//! Concrete IFS families, alphabet specifications, and the hyperbolic system
//! derived from the parabolic backward family.
//!
//! The families are: the backward continued fraction system `phi_b(x) =
//! 1/(b - x)`, `b >= 2`, whose index 2 is parabolic; its induced hyperbolic
//! star system with generators `phi_{2^n j}`; the Gauss system `phi_b(x) =
//! 1/(b + x)`, `b >= 1`; a fixed mixed affine/Moebius family used to exhibit
//! a dimension gap; and finite similarity systems for ground truths with
//! known Moran dimensions.
//!
//! Every generator, whatever the family, is carried as an exact integer
//! matrix [`Mat2`] acting by `x -> (a x + b)/(c x + d)`, so that derivative
//! norms of compositions reduce to integer arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;

use crate::moebius::{Convention, MoebiusWord};
use crate::{Error, Result};

/// The built-in IFS families.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Backward continued fractions `x -> 1/(b - x)`, alphabet `{2, 3, ...}`.
    Bcf,
    /// The induced hyperbolic system with generators `phi_{2^n j}`.
    BcfStar,
    /// Gauss continued fractions `x -> 1/(b + x)`, alphabet `{1, 2, ...}`.
    Gauss,
    /// Two affine maps plus a shifted Gauss family; exhibits a spectrum gap.
    Counterexample { n2: u64 },
    /// Finitely many orientation-preserving similarities packed left to
    /// right on `[0, 1]`.
    Similarity { ratios: Vec<BigRational> },
}

impl Family {
    /// The family name as used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bcf => "bcf",
            Family::BcfStar => "bcf-star",
            Family::Gauss => "gauss",
            Family::Counterexample { .. } => "counterexample",
            Family::Similarity { .. } => "similarity",
        }
    }

    /// Smallest admissible letter of the full alphabet.
    pub fn min_index(&self) -> u64 {
        match self {
            Family::Bcf | Family::BcfStar => 2,
            Family::Gauss | Family::Counterexample { .. } | Family::Similarity { .. } => 1,
        }
    }

    /// Moebius recurrence convention, when the family is a single
    /// continued-fraction family.
    pub fn convention(&self) -> Option<Convention> {
        match self {
            Family::Bcf | Family::BcfStar => Some(Convention::Backward),
            Family::Gauss => Some(Convention::Gauss),
            _ => None,
        }
    }
}

impl serde::Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let extra = matches!(self, Family::Counterexample { .. } | Family::Similarity { .. });
        let mut st = s.serialize_struct("Family", if extra { 2 } else { 1 })?;
        st.serialize_field("name", self.name())?;
        match self {
            Family::Counterexample { n2 } => st.serialize_field("n2", n2)?,
            Family::Similarity { ratios } => {
                let text: Vec<String> = ratios.iter().map(|r| r.to_string()).collect();
                st.serialize_field("ratios", &text)?;
            }
            _ => {}
        }
        st.end()
    }
}

/// A fully populated system description.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SystemSpec {
    pub family: Family,
    /// Bounded-distortion constant; every sup/inf derivative-norm ratio over
    /// generator words of the system is at most `distortion_k^2`.
    pub distortion_k: f64,
    /// Indices whose generator has derivative norm 1 somewhere on `[0, 1]`.
    pub parabolic_indices: BTreeSet<u64>,
}

impl SystemSpec {
    pub fn min_index(&self) -> u64 {
        self.family.min_index()
    }

    pub fn is_parabolic(&self, b: u64) -> bool {
        self.parabolic_indices.contains(&b)
    }
}

/// Builds a system with the default distortion constant for the family.
pub fn make_system(family: Family) -> Result<SystemSpec> {
    make_system_with_k(family, None)
}

/// Builds a system, optionally overriding the distortion constant.
pub fn make_system_with_k(family: Family, distortion_k: Option<f64>) -> Result<SystemSpec> {
    match &family {
        Family::Counterexample { n2 } => {
            if *n2 < 3 {
                return Err(Error::InvalidInput(format!(
                    "counterexample parameter n2 must be at least 3, got {n2}"
                )));
            }
        }
        Family::Similarity { ratios } => {
            if ratios.is_empty() {
                return Err(Error::InvalidInput("similarity system needs at least one ratio".into()));
            }
            let mut sum = BigRational::zero();
            for r in ratios {
                if r <= &BigRational::zero() || r >= &BigRational::one() {
                    return Err(Error::InvalidInput(format!("similarity ratio {r} outside (0, 1)")));
                }
                sum += r;
            }
            if sum > BigRational::one() {
                return Err(Error::InvalidInput(format!(
                    "similarity ratios sum to {sum} > 1; maps cannot be packed disjointly in [0, 1]"
                )));
            }
        }
        _ => {}
    }
    let default_k = match &family {
        Family::Bcf => 9.0,
        Family::BcfStar | Family::Gauss | Family::Counterexample { .. } => 4.0,
        Family::Similarity { .. } => 1.0,
    };
    let k = distortion_k.unwrap_or(default_k);
    if !(k >= 1.0) {
        return Err(Error::InvalidInput(format!("distortion constant {k} must be >= 1")));
    }
    let parabolic_indices = match &family {
        Family::Bcf => BTreeSet::from([2]),
        _ => BTreeSet::new(),
    };
    Ok(SystemSpec { family, distortion_k: k, parabolic_indices })
}

/// A subset of the system alphabet: an explicit finite part plus an optional
/// cofinite range `{m, m+1, ...}`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AlphabetSpec {
    pub finite_part: BTreeSet<u64>,
    pub cofinite_from: Option<u64>,
}

impl AlphabetSpec {
    /// Normalizes: finite members inside the cofinite range are dropped, and
    /// finite members contiguous below it are absorbed into it.
    pub fn new(finite_part: BTreeSet<u64>, cofinite_from: Option<u64>) -> Self {
        let mut finite: BTreeSet<u64> = finite_part;
        let mut cof = cofinite_from;
        if let Some(m) = cof.as_mut() {
            finite.retain(|&b| b < *m);
            while *m > 1 && finite.contains(&(*m - 1)) {
                *m -= 1;
                finite.remove(m);
            }
        }
        AlphabetSpec { finite_part: finite, cofinite_from: cof }
    }

    pub fn finite(letters: impl IntoIterator<Item = u64>) -> Self {
        Self::new(letters.into_iter().collect(), None)
    }

    pub fn cofinite(from: u64) -> Self {
        Self::new(BTreeSet::new(), Some(from))
    }

    pub fn is_empty(&self) -> bool {
        self.finite_part.is_empty() && self.cofinite_from.is_none()
    }

    pub fn is_cofinite(&self) -> bool {
        self.cofinite_from.is_some()
    }

    pub fn contains(&self, b: u64) -> bool {
        self.finite_part.contains(&b) || self.cofinite_from.is_some_and(|m| b >= m)
    }

    pub fn min_letter(&self) -> Option<u64> {
        let fin = self.finite_part.iter().next().copied();
        match (fin, self.cofinite_from) {
            (Some(a), Some(m)) => Some(a.min(m)),
            (a, m) => a.or(m),
        }
    }

    /// All members up to `cutoff` in the cofinite range, plus the whole
    /// finite part. The analytic tail of any sum over this alphabet must
    /// cover exactly the cofinite letters above `cutoff`.
    pub fn tracked_letters(&self, cutoff: u64) -> Vec<u64> {
        let mut out: BTreeSet<u64> = self.finite_part.clone();
        if let Some(m) = self.cofinite_from {
            out.extend(m..=cutoff.max(m.saturating_sub(1)));
        }
        out.into_iter().collect()
    }

    /// The alphabet with one letter removed (used by omitted-letter
    /// subsystems). Removing an interior member of the cofinite range splits
    /// off the letters below it into the finite part.
    pub fn without(&self, b: u64) -> Self {
        let mut finite = self.finite_part.clone();
        finite.remove(&b);
        let cof = match self.cofinite_from {
            Some(m) if b == m => Some(m + 1),
            Some(m) if b > m => {
                finite.extend(m..b);
                Some(b + 1)
            }
            other => other,
        };
        AlphabetSpec::new(finite, cof)
    }

    /// Checks every member against the system's minimum index, and for
    /// similarity systems that letters index actual maps.
    pub fn validate_for(&self, system: &SystemSpec) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        let min = system.min_index();
        if let Some(a) = self.min_letter() {
            if a < min {
                return Err(Error::InvalidInput(format!(
                    "letter {a} below the minimum index {min} of the {} system",
                    system.family.name()
                )));
            }
        }
        if let Family::Similarity { ratios } = &system.family {
            if self.cofinite_from.is_some() {
                return Err(Error::InvalidInput(
                    "similarity systems are finite; cofinite alphabets are not meaningful".into(),
                ));
            }
            let n = ratios.len() as u64;
            if let Some(&max) = self.finite_part.iter().next_back() {
                if max > n {
                    return Err(Error::InvalidInput(format!(
                        "letter {max} exceeds the {n} maps of the similarity system"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for AlphabetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = Vec::new();
        let finite: Vec<u64> = self.finite_part.iter().copied().collect();
        let mut i = 0;
        while i < finite.len() {
            let mut j = i;
            while j + 1 < finite.len() && finite[j + 1] == finite[j] + 1 {
                j += 1;
            }
            match j - i {
                0 => items.push(format!("{}", finite[i])),
                1 => {
                    items.push(format!("{}", finite[i]));
                    items.push(format!("{}", finite[j]));
                }
                _ => items.push(format!("{}..{}", finite[i], finite[j])),
            }
            i = j + 1;
        }
        if let Some(m) = self.cofinite_from {
            items.push(format!("{m}.."));
        }
        write!(f, "{}", items.join(","))
    }
}

/// Parses the alphabet grammar: comma-separated items, each `k`, `a..b`
/// (inclusive), or `a..` (cofinite).
pub fn parse_alphabet(text: &str) -> Result<AlphabetSpec> {
    let fail = |reason: String| Error::ParseAlphabet { text: text.to_string(), reason };
    let parse_int = |item: &str| -> Result<u64> {
        item.trim()
            .parse::<u64>()
            .map_err(|_| fail(format!("expected a nonnegative integer, got {:?}", item.trim())))
    };
    let mut finite = BTreeSet::new();
    let mut cofinite: Option<u64> = None;
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(fail("empty item".into()));
        }
        match item.split_once("..") {
            None => {
                finite.insert(parse_int(item)?);
            }
            Some((a, "")) => {
                let a = parse_int(a)?;
                cofinite = Some(cofinite.map_or(a, |m: u64| m.min(a)));
            }
            Some((a, b)) => {
                let (a, b) = (parse_int(a)?, parse_int(b)?);
                if a > b {
                    return Err(fail(format!("descending range {a}..{b}")));
                }
                finite.extend(a..=b);
            }
        }
    }
    let spec = AlphabetSpec::new(finite, cofinite);
    if spec.is_empty() {
        return Err(fail("empty alphabet".into()));
    }
    Ok(spec)
}

/// A generator `phi_{2^n j}` of the induced hyperbolic system.
#[derive(Clone, Debug)]
pub struct StarGenerator {
    /// Number of leading parabolic letters.
    pub n: u32,
    /// Terminal hyperbolic letter, `j >= 3`.
    pub j: u64,
    /// The exact word `2^n j`.
    pub word: MoebiusWord,
}

impl serde::Serialize for StarGenerator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("StarGenerator", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("j", &self.j)?;
        st.serialize_field("letters", self.word.letters())?;
        st.end()
    }
}

/// Enumerates the star generators `phi_{2^n j}` with `n <= n_cutoff`,
/// `j in A \ {2}`, `j <= j_cutoff`, ordered by `j` then `n`.
///
/// When 2 is not in `A` there is nothing to induce and only the plain
/// (`n = 0`) generators are returned.
pub fn star_generators(a: &AlphabetSpec, n_cutoff: u32, j_cutoff: u64) -> Result<Vec<StarGenerator>> {
    if a.is_empty() {
        return Err(Error::InvalidInput("empty alphabet".into()));
    }
    if let Some(m) = a.min_letter() {
        if m < 2 {
            return Err(Error::InvalidInput(format!("letter {m} below the backward minimum 2")));
        }
    }
    let has_two = a.contains(2);
    let js: Vec<u64> = a.tracked_letters(j_cutoff).into_iter().filter(|&j| j != 2 && j <= j_cutoff).collect();
    if js.is_empty() {
        return Err(Error::Degenerate(
            "degenerate parabolic-only subsystem: the star alphabet is empty and the limit set is the single point 1".into(),
        ));
    }
    let n_max = if has_two { n_cutoff } else { 0 };
    let mut prefixes = Vec::with_capacity(n_max as usize + 1);
    let mut prefix = MoebiusWord::empty(Convention::Backward);
    prefixes.push(prefix.clone());
    for _ in 0..n_max {
        prefix = prefix.extend(2)?;
        prefixes.push(prefix.clone());
    }
    let mut out = Vec::with_capacity(js.len() * prefixes.len());
    for &j in &js {
        for (n, pre) in prefixes.iter().enumerate() {
            out.push(StarGenerator { n: n as u32, j, word: pre.extend(j)? });
        }
    }
    Ok(out)
}

/// An exact integer Moebius matrix `x -> (a x + b)/(c x + d)` mapping
/// `[0, 1]` into itself, with `|det| = |a d - b c|` tracked separately so
/// that `|phi'(x)| = det_abs / (c x + d)^2`.
///
/// The sign is normalized so that the denominator is positive on `[0, 1]`,
/// i.e. `d > 0` and `c + d > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mat2 {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
    pub det_abs: u128,
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2 { a: 1, b: 0, c: 0, d: 1, det_abs: 1 }
    }

    pub(crate) fn normalized(a: i128, b: i128, c: i128, d: i128, det_abs: u128) -> Result<Self> {
        let (a, b, c, d) = if d < 0 || (d == 0 && c < 0) { (-a, -b, -c, -d) } else { (a, b, c, d) };
        if d <= 0 || c.checked_add(d).is_none_or(|e| e <= 0) {
            return Err(Error::InvalidInput("Moebius matrix with a pole in [0, 1]".into()));
        }
        if det_abs == 0 {
            return Err(Error::InvalidInput("singular Moebius matrix".into()));
        }
        Ok(Mat2 { a, b, c, d, det_abs })
    }

    /// Exact matrix of a continued-fraction word.
    pub fn from_word(w: &MoebiusWord) -> Result<Self> {
        let (pp, p, qp, q) = w.continuants();
        let to = |v: &BigInt| v.to_i128().ok_or(Error::Overflow { depth: w.len() as u32 });
        let (pp, p, qp, q) = (to(pp)?, to(p)?, to(qp)?, to(q)?);
        match w.convention() {
            Convention::Backward => Self::normalized(-pp, p, -qp, q, 1),
            Convention::Gauss => Self::normalized(pp, p, qp, q, 1),
        }
    }

    /// Composition `self . rhs` as maps (matrix product).
    pub fn compose(&self, rhs: &Mat2) -> Result<Self> {
        let mul = |x: i128, y: i128| x.checked_mul(y).ok_or(Error::Overflow { depth: 0 });
        let add = |x: i128, y: i128| x.checked_add(y).ok_or(Error::Overflow { depth: 0 });
        let a = add(mul(self.a, rhs.a)?, mul(self.b, rhs.c)?)?;
        let b = add(mul(self.a, rhs.b)?, mul(self.b, rhs.d)?)?;
        let c = add(mul(self.c, rhs.a)?, mul(self.d, rhs.c)?)?;
        let d = add(mul(self.c, rhs.b)?, mul(self.d, rhs.d)?)?;
        let det_abs = self.det_abs.checked_mul(rhs.det_abs).ok_or(Error::Overflow { depth: 0 })?;
        Self::normalized(a, b, c, d, det_abs)
    }

    /// Denominator `c x + d` at the endpoints: `(D(0), D(1))`, both positive.
    pub fn denoms(&self) -> (u128, u128) {
        (self.d as u128, (self.c + self.d) as u128)
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        let [a, b, c, d] = [self.a, self.b, self.c, self.d].map(BigInt::from);
        (BigRational::from(a) * x + BigRational::from(b)) / (BigRational::from(c) * x + BigRational::from(d))
    }

    /// Image interval of `[0, 1]`, endpoints ascending.
    pub fn image(&self) -> (BigRational, BigRational) {
        let at0 = BigRational::new(BigInt::from(self.b), BigInt::from(self.d));
        let at1 = BigRational::new(BigInt::from(self.a + self.b), BigInt::from(self.c + self.d));
        if at0 <= at1 {
            (at0, at1)
        } else {
            (at1, at0)
        }
    }

    /// Exact `|phi'(x)| = det_abs / (c x + d)^2`.
    pub fn deriv_abs_at(&self, x: &BigRational) -> BigRational {
        let den = BigRational::from(BigInt::from(self.c)) * x + BigRational::from(BigInt::from(self.d));
        debug_assert!(den.is_positive());
        BigRational::from(BigInt::from(self.det_abs)) / (&den * &den)
    }

    /// Exact sup of `|phi'|` over `[0, 1]`.
    pub fn sup_norm_exact(&self) -> BigRational {
        let (d0, d1) = self.denoms();
        let m = BigInt::from(d0.min(d1));
        BigRational::new(BigInt::from(self.det_abs), &m * &m)
    }

    /// Exact inf of `|phi'|` over `[0, 1]`.
    pub fn inf_norm_exact(&self) -> BigRational {
        let (d0, d1) = self.denoms();
        let m = BigInt::from(d0.max(d1));
        BigRational::new(BigInt::from(self.det_abs), &m * &m)
    }

    /// Whether the map is affine (constant derivative).
    pub fn is_affine(&self) -> bool {
        self.c == 0
    }
}

/// The exact matrix of a single generator of the system.
pub fn letter_map(system: &SystemSpec, b: u64) -> Result<Mat2> {
    let min = system.min_index();
    if b < min {
        return Err(Error::InvalidInput(format!(
            "letter {b} below the minimum index {min} of the {} system",
            system.family.name()
        )));
    }
    let big = |v: u64| -> Result<i128> { i128::try_from(v).map_err(|_| Error::Overflow { depth: 1 }) };
    match &system.family {
        Family::Bcf | Family::BcfStar => Mat2::normalized(0, 1, -1, big(b)?, 1),
        Family::Gauss => Mat2::normalized(0, 1, 1, big(b)?, 1),
        Family::Counterexample { n2 } => {
            let n2 = *n2 as i128;
            match b {
                // phi_1(x) = 1/2 + x/2
                1 => Mat2::normalized(1, 1, 0, 2, 2),
                // phi_2(x) = (1/2 - 1/n2) x + 1/n2
                2 => Mat2::normalized(n2 - 2, 2, 0, 2 * n2, ((n2 - 2) * 2 * n2) as u128),
                // phi_b(x) = 1/(b + n2 - 3 + x)
                _ => Mat2::normalized(0, 1, 1, big(b)? + n2 - 3, 1),
            }
        }
        Family::Similarity { ratios } => {
            let idx = (b - 1) as usize;
            let Some(slope) = ratios.get(idx) else {
                return Err(Error::InvalidInput(format!(
                    "letter {b} exceeds the {} maps of the similarity system",
                    ratios.len()
                )));
            };
            let offset: BigRational = ratios[..idx].iter().sum();
            let l = slope.denom().lcm(offset.denom());
            let a = (slope * BigRational::from(l.clone())).to_integer();
            let bb = (&offset * BigRational::from(l.clone())).to_integer();
            let to = |v: BigInt| v.to_i128().ok_or(Error::Overflow { depth: 1 });
            let (a, bb, d) = (to(a)?, to(bb)?, to(l)?);
            let det = a.checked_mul(d).ok_or(Error::Overflow { depth: 1 })?;
            Mat2::normalized(a, bb, 0, d, det.unsigned_abs())
        }
    }
}

/// Parses `p/q`, a decimal like `0.97`, or a plain integer, exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let fail = |reason: &str| Error::InvalidInput(format!("cannot parse {s:?} as a rational: {reason}"));
    if s.is_empty() {
        return Err(fail("empty"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| fail("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| fail("bad denominator"))?;
        if d.is_zero() {
            return Err(fail("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, mag) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = mag.split_once('.').unwrap_or((mag, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(fail("no digits"));
    }
    let all_digits = |p: &str| p.bytes().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(fail("unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| fail("no digits"))?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}
