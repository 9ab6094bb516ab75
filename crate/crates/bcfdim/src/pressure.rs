//! Partition sums, certified pressure brackets, dimension bisection, the
//! Moran-equation solver, and analytic tails for infinite alphabets.
//!
//! The dimension of a limit set is characterized through the quantity
//! `lambda_A(t) = lim_n Phi_{A,n}(t)^(1/n)` where `Phi_{A,n}(t)` sums
//! `||phi_omega'||^t` over length-n words: the dimension is the infimum of
//! the `t` with `lambda_A(t) < 1`. Everything here produces one of two kinds
//! of certificates:
//!
//! - `lambda_hi(t) < 1`: `t` is an upper bound for the dimension;
//! - `lambda_lo(t) > 1`: `t` is a lower bound.
//!
//! Brackets come from evaluating derivative sums at well-chosen points. For
//! a family whose derivatives are monotone in `x`, the sums at a point `x`
//! with `phi(x) >= x` for every generator are supermultiplicative in the
//! depth, so any single depth yields a certified lower bound by Fekete's
//! lemma; at a point with `phi(x) <= x` they are submultiplicative and yield
//! upper bounds. Choosing the points at the edge of the union of generator
//! images makes both bounds sharp without any distortion-constant slack; the
//! classical `(K^{-t} Phi_n)^{1/n}` bracket is kept alongside as the
//! `Distortion` method.
//!
//! Infinite alphabets are truncated at explicit cutoffs and the discarded
//! mass is bounded analytically: a word containing an untracked letter has
//! `||phi_omega'||^t` at most the product of its letters' sup-norm weights,
//! so the untracked mass at depth `n` is at most `(P+Q)^n - P^n` with `P`
//! the tracked level-1 sup-norm sum and `Q` a zeta-style tail bound.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::round::{self, Dir};
use crate::systems::{letter_map, AlphabetSpec, Family, Mat2, SystemSpec};
use crate::{Error, Result};

/// How a pressure bracket was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketMethod {
    /// Directed partition sums at the edge points of the image union.
    EvalPoint,
    /// Sup-norm sums with the `K^{-t}` supermultiplicativity correction.
    Distortion,
}

/// A certified two-sided bound on `lambda_A(t)`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PressureBracket {
    pub t: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub depth_n: u32,
    pub tail_included: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_used: Option<f64>,
    pub method: BracketMethod,
}

/// A certified bracket for the Hausdorff dimension of a limit set.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DimensionBracket {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Both endpoints evidence-backed and the width target met.
    pub certified: bool,
    /// `lambda_lo(t_lo) > 1` holds in the evidence.
    pub certified_below: bool,
    /// `lambda_hi(t_hi) < 1` holds in the evidence.
    pub certified_above: bool,
    /// The upper endpoint is the a-priori cap `dim <= 1`, not evidence.
    pub trivial_upper: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub evidence: Vec<PressureBracket>,
}

impl DimensionBracket {
    pub fn width(&self) -> f64 {
        self.t_hi - self.t_lo
    }
}

/// Which analytic tail a [`TailBound`] certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    PowerTail,
    StarTail,
}

/// Shift `c` in the power-tail summand `(j - c)^{-2t}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    Zero,
    One,
    ThreeHalves,
}

impl Shift {
    pub fn value(self) -> f64 {
        match self {
            Shift::Zero => 0.0,
            Shift::One => 1.0,
            Shift::ThreeHalves => 1.5,
        }
    }
}

/// Parameters of [`tail_sum`].
#[derive(Clone, Debug)]
pub enum TailParams {
    /// `sum over j > cutoff of (j - shift)^{-2t}`.
    Power { cutoff: u64, shift: Shift },
    /// Sup-norm mass of the star generators outside the tracked rectangle
    /// `n <= n_cutoff, j <= j_cutoff` for the given backward alphabet.
    Star { alphabet: AlphabetSpec, n_cutoff: u32, j_cutoff: u64 },
}

/// A certified enclosure of an infinite tail sum.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TailBound {
    pub kind: TailKind,
    pub cutoff: u64,
    pub t: f64,
    pub mass_hi: f64,
    pub mass_lo: f64,
}

/// Truncation thresholds for infinite alphabets.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Cutoffs {
    /// Largest tracked letter of a cofinite range (the `j` cutoff in star
    /// mode). Finite letters are always tracked regardless.
    pub letter_cutoff: u64,
    /// Largest tracked run length of the parabolic letter in star mode.
    pub star_n_cutoff: u32,
}

impl Cutoffs {
    /// Thresholds sized so that a depth-`n` enumeration stays near
    /// `per_depth_budget` words.
    pub fn plan(a: &AlphabetSpec, star_mode: bool, depth: u32, per_depth_budget: u128) -> Cutoffs {
        let allowed = nth_root_floor(per_depth_budget, depth.max(1)).max(4);
        if star_mode {
            let finite_js = a.finite_part.iter().filter(|&&j| j != 2).count() as u64;
            if let Some(m) = a.cofinite_from {
                // split the letter budget between run lengths and j letters
                let j_span = (allowed as f64).sqrt().ceil() as u64 + 16;
                let j_cutoff = (m.max(3) + j_span).min(100_000);
                let js = finite_js + j_cutoff.saturating_sub(m.max(3)) + 1;
                let n_cutoff = (allowed / js.max(1)).clamp(7, 1 << 20) as u32;
                Cutoffs { letter_cutoff: j_cutoff, star_n_cutoff: n_cutoff }
            } else {
                let n_cutoff = (allowed / finite_js.max(1)).clamp(7, 1 << 20) as u32;
                Cutoffs { letter_cutoff: u64::MAX, star_n_cutoff: n_cutoff }
            }
        } else {
            let finite = a.finite_part.len() as u64;
            let letter_cutoff = match a.cofinite_from {
                Some(m) => (m + allowed.saturating_sub(finite).max(32)).min(100_000),
                None => u64::MAX,
            };
            Cutoffs { letter_cutoff, star_n_cutoff: 0 }
        }
    }
}

/// Engine knobs; the defaults match the documented contract.
#[derive(Clone, Copy, Debug)]
pub struct EngineOpts {
    /// Target width of the dimension bracket.
    pub target_width: f64,
    /// Largest enumeration depth attempted.
    pub max_depth: u32,
    /// Smallest meaningful gap between a lambda bound and 1.
    pub lambda_res: f64,
    pub threads: usize,
    /// Hard word-count guard for any single enumeration.
    pub budget: u128,
    /// Soft per-depth word target steering cofinite cutoffs.
    pub per_depth_budget: u128,
    /// Explicit truncation thresholds; when set they replace the per-depth
    /// plan and disable automatic widening.
    pub fixed_cutoffs: Option<Cutoffs>,
}

impl Default for EngineOpts {
    fn default() -> Self {
        EngineOpts {
            target_width: 1e-3,
            max_depth: 12,
            lambda_res: 1e-4,
            threads: 1,
            budget: 100_000_000,
            per_depth_budget: 4_000_000,
            fixed_cutoffs: None,
        }
    }
}

fn nth_root_floor(v: u128, n: u32) -> u64 {
    if n <= 1 {
        return v.min(u64::MAX as u128) as u64;
    }
    let mut r = (v as f64).powf(1.0 / n as f64) as u64;
    while r > 1 && (r as u128).checked_pow(n).is_none_or(|p| p > v) {
        r -= 1;
    }
    while ((r + 1) as u128).checked_pow(n).is_some_and(|p| p <= v) {
        r += 1;
    }
    r
}

// ---------------------------------------------------------------------------
// zeta-style analytic tails
// ---------------------------------------------------------------------------

const TAIL_PARTIAL_TERMS: u64 = 256;

/// Certified enclosure of `sum over k >= m of k^{-s}` for `s > 1`: a short
/// exact partial sum plus integral-test bounds on the remainder.
pub(crate) fn zeta_from(m: u64, s: f64) -> Result<(f64, f64)> {
    power_tail_from(m - 1, 0.0, s)
}

/// Certified enclosure of `sum over j > cutoff of (j - shift)^{-s}`.
pub(crate) fn power_tail_from(cutoff: u64, shift: f64, s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) {
        return Err(Error::Divergent(format!(
            "power tail beyond {cutoff} diverges at exponent {s} <= 1"
        )));
    }
    if (cutoff + 1) as f64 - shift < 1.0 {
        return Err(Error::InvalidInput(format!(
            "power tail needs cutoff + 1 - shift >= 1, got cutoff {cutoff}, shift {shift}"
        )));
    }
    let k_end = cutoff + TAIL_PARTIAL_TERMS;
    let mut lo = 0.0;
    let mut hi = 0.0;
    for j in cutoff + 1..=k_end {
        let base = j as f64 - shift;
        lo = round::add_down(lo, round::neg_pow_down(base, s));
        hi = round::add_up(hi, round::neg_pow_up(base, s));
    }
    // remainder over j > k_end: integral test around the first omitted term
    let base = (k_end + 1) as f64 - shift;
    let sm1_lo = round::sub_down(s, 1.0);
    let sm1_hi = round::sub_up(s, 1.0);
    let rem_lo = round::div_down(round::neg_pow_down(base, sm1_hi), sm1_hi);
    let rem_hi = round::add_up(
        round::neg_pow_up(base, s),
        round::div_up(round::neg_pow_up(base, sm1_lo), sm1_lo),
    );
    Ok((round::add_down(lo, rem_lo), round::add_up(hi, rem_hi)))
}

/// Certified tail bound per [`TailParams`]; exponent is `2t`.
pub fn tail_sum(params: &TailParams, t: f64) -> Result<TailBound> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, 1]")));
    }
    let s = 2.0 * t;
    match params {
        TailParams::Power { cutoff, shift } => {
            let (mass_lo, mass_hi) = power_tail_from(*cutoff, shift.value(), s)?;
            Ok(TailBound { kind: TailKind::PowerTail, cutoff: *cutoff, t, mass_hi, mass_lo })
        }
        TailParams::Star { alphabet, n_cutoff, j_cutoff } => {
            let (mass_lo, mass_hi) = star_tail_masses(alphabet, *n_cutoff, *j_cutoff, s)?;
            Ok(TailBound { kind: TailKind::StarTail, cutoff: u64::from(*n_cutoff), t, mass_hi, mass_lo })
        }
    }
}

/// Star-generator sup-norm mass outside the `n <= N, j <= J` rectangle.
///
/// Upper route: `((n+1)(j-2)+1)^{-s} <= (n+1)^{-s} (j-2)^{-s}`; lower route
/// uses `(j-1)` in place of `(j-2)`. Both factor into zeta tails.
fn star_tail_masses(a: &AlphabetSpec, n_cutoff: u32, j_cutoff: u64, s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) {
        return Err(Error::Divergent(format!("star tail diverges at exponent {s} <= 1")));
    }
    let js_fin: Vec<u64> = a.finite_part.iter().copied().filter(|&j| j != 2).collect();
    let js_cof = a.cofinite_from.map(|m| m.max(3));
    if let Some(&mx) = js_fin.last() {
        if mx > j_cutoff {
            return Err(Error::InvalidInput(format!(
                "finite letter {mx} above the j cutoff {j_cutoff}; raise the cutoff"
            )));
        }
    }
    // factor over all admissible j, upper with (j-2), lower with (j-1)
    let mut sj_hi = 0.0;
    let mut sj_lo = 0.0;
    for &j in &js_fin {
        sj_hi = round::add_up(sj_hi, round::neg_pow_up((j - 2) as f64, s));
        sj_lo = round::add_down(sj_lo, round::neg_pow_down((j - 1) as f64, s));
    }
    if let Some(m) = js_cof {
        sj_hi = round::add_up(sj_hi, zeta_from(m - 2, s)?.1);
        sj_lo = round::add_down(sj_lo, zeta_from(m - 1, s)?.0);
    }
    // band n > N, all j
    let (zn_lo, zn_hi) = zeta_from(u64::from(n_cutoff) + 2, s)?;
    let mut hi = round::mul_up(zn_hi, sj_hi);
    let mut lo = round::mul_down(zn_lo, sj_lo);
    // band n <= N, untracked cofinite j > J
    if let Some(m) = js_cof {
        if j_cutoff != u64::MAX {
            let from = j_cutoff.max(m);
            // sum over n <= N of (n+1)^{-s} is below the full zeta value
            let zeta_full_hi = zeta_from(1, s)?.1;
            hi = round::add_up(hi, round::mul_up(zeta_full_hi, zeta_from(from - 1, s)?.1));
            lo = round::add_down(lo, zeta_from(from, s)?.0); // n = 0 row alone
        }
    }
    Ok((lo.max(0.0), hi))
}

// ---------------------------------------------------------------------------
// word pools
// ---------------------------------------------------------------------------

/// Exact nonnegative fraction with small components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Rat {
    n: i128,
    d: i128,
}

impl Rat {
    fn new(n: i128, d: i128) -> Rat {
        debug_assert!(d > 0 && n >= 0);
        let g = n.gcd(&d);
        if g > 1 {
            Rat { n: n / g, d: d / g }
        } else {
            Rat { n, d }
        }
    }

    fn zero() -> Rat {
        Rat { n: 0, d: 1 }
    }

    fn one() -> Rat {
        Rat { n: 1, d: 1 }
    }

    fn lt(&self, other: &Rat) -> bool {
        // components stay far below the i128 overflow range by construction
        self.n.checked_mul(other.d).expect("fraction compare") < other.n.checked_mul(self.d).expect("fraction compare")
    }
}

#[derive(Clone, Copy, Debug)]
enum Orientation {
    /// `|phi'|` nondecreasing in `x` (backward family).
    Increasing,
    /// `|phi'|` nonincreasing in `x` (Gauss-type), or constant.
    NonIncreasing,
    Constant,
}

fn orientation(family: &Family) -> Orientation {
    match family {
        Family::Bcf | Family::BcfStar => Orientation::Increasing,
        Family::Gauss | Family::Counterexample { .. } => Orientation::NonIncreasing,
        Family::Similarity { .. } => Orientation::Constant,
    }
}

/// Analytic description of the sup-norm mass of untracked letters.
#[derive(Clone, Debug)]
enum PoolTail {
    /// `Q(t) = sum over k >= from of k^{-2t}`.
    Zeta { from: u64 },
    /// Star rectangle complement.
    Star { n_cutoff: u32, j_cutoff: u64, alphabet: AlphabetSpec },
}

impl PoolTail {
    fn q_up(&self, t: f64) -> Result<f64> {
        match self {
            PoolTail::Zeta { from } => Ok(zeta_from(*from, 2.0 * t)?.1),
            PoolTail::Star { n_cutoff, j_cutoff, alphabet } => {
                Ok(star_tail_masses(alphabet, *n_cutoff, *j_cutoff, 2.0 * t)?.1)
            }
        }
    }
}

/// A truncated letter pool with its eval points and tail description.
#[derive(Clone, Debug)]
struct Pool {
    mats: Vec<Mat2>,
    x_lo: Rat,
    x_hi: Rat,
    tail: Option<PoolTail>,
}

fn star_mat(n: u32, j: u64) -> Result<Mat2> {
    debug_assert!(j >= 3);
    let n = i128::from(n);
    let j = i128::from(j);
    Mat2::normalized(-n, n * (j - 1) + 1, -(n + 1), (n + 1) * j - n, 1)
}

fn build_pool(system: &SystemSpec, a: &AlphabetSpec, cutoffs: &Cutoffs, star_mode: bool) -> Result<Pool> {
    a.validate_for(system)?;
    let star_mode = star_mode && a.contains(2);
    let mut mats = Vec::new();
    let mut tail = None;
    if star_mode {
        if !matches!(system.family, Family::Bcf | Family::BcfStar) {
            return Err(Error::InvalidInput("star pools exist only for the backward family".into()));
        }
        let max_fin_j = a.finite_part.iter().copied().filter(|&j| j != 2).max().unwrap_or(0);
        let j_cutoff = cutoffs.letter_cutoff.max(max_fin_j);
        let js: Vec<u64> =
            a.tracked_letters(j_cutoff).into_iter().filter(|&j| j != 2 && j <= j_cutoff).collect();
        if js.is_empty() {
            return Err(Error::Degenerate(
                "degenerate parabolic-only subsystem: the star alphabet is empty".into(),
            ));
        }
        let n_cutoff = cutoffs.star_n_cutoff;
        mats.reserve(js.len() * (n_cutoff as usize + 1));
        for &j in &js {
            for n in 0..=n_cutoff {
                mats.push(star_mat(n, j)?);
            }
        }
        tail = Some(PoolTail::Star { n_cutoff, j_cutoff, alphabet: a.clone() });
    } else {
        let letters = a.tracked_letters(cutoffs.letter_cutoff);
        if letters.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        for &b in &letters {
            mats.push(letter_map(system, b)?);
        }
        if let Some(m) = a.cofinite_from {
            let cut = cutoffs.letter_cutoff.max(m);
            let from = match &system.family {
                // sup-norm of phi_b is (b-1)^{-2}: tail from k = cut
                Family::Bcf | Family::BcfStar => cut,
                // sup-norm b^{-2}
                Family::Gauss => cut + 1,
                // sup-norm (b + n2 - 3)^{-2}
                Family::Counterexample { n2 } => cut + 1 + n2 - 3,
                Family::Similarity { .. } => unreachable!("validated finite"),
            };
            tail = Some(PoolTail::Zeta { from });
        }
    }
    // eval points from the exact image endpoints of the tracked letters
    let mut min_inf = Rat::one();
    let mut max_sup = Rat::zero();
    for m in &mats {
        let e0 = Rat::new(m.b, m.d);
        let e1 = Rat::new(m.a + m.b, m.c + m.d);
        let (inf, sup) = if e0.lt(&e1) { (e0, e1) } else { (e1, e0) };
        if inf.lt(&min_inf) {
            min_inf = inf;
        }
        if max_sup.lt(&sup) {
            max_sup = sup;
        }
    }
    let (x_lo, x_hi) = match orientation(&system.family) {
        // Star pools have untracked letters with image sups arbitrarily
        // close to 1, so only x = 1 keeps the full sequence submultiplicative.
        Orientation::Increasing => (min_inf, if star_mode { Rat::one() } else { max_sup }),
        Orientation::NonIncreasing => (max_sup, if tail.is_some() { Rat::zero() } else { min_inf }),
        Orientation::Constant => (Rat::zero(), Rat::zero()),
    };
    Ok(Pool { mats, x_lo, x_hi, tail })
}

// ---------------------------------------------------------------------------
// directed word sums
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum Weight {
    /// `|phi_omega'(x)|^t` at the fixed point of the context.
    AtPoint,
    /// `sup |phi_omega'|^t` over `[0, 1]`.
    SupNorm,
}

#[derive(Clone, Copy)]
struct TermCtx {
    t: f64,
    dir: Dir,
    weight: Weight,
    xn: i128,
    xd: i128,
    /// `(down, up)` bounds of `ln xd`.
    ln_xd: (f64, f64),
}

impl TermCtx {
    fn new(t: f64, dir: Dir, weight: Weight, x: Rat) -> TermCtx {
        let ln_xd = (round::ln_u128_down(x.d as u128), round::ln_u128_up(x.d as u128));
        TermCtx { t, dir, weight, xn: x.n, xd: x.d, ln_xd }
    }
}

/// One word's contribution, directed per the context.
///
/// `|phi'(x)| = det / D(x)^2` and `D(x) xd = c xn + d xd`, so
/// `ln |phi'(x)| = ln det - 2 ln(c xn + d xd) + 2 ln xd`.
fn leaf_term(m: &Mat2, ctx: &TermCtx) -> Result<f64> {
    let (num, ln_xd) = match ctx.weight {
        Weight::AtPoint => {
            let num = m
                .c
                .checked_mul(ctx.xn)
                .and_then(|v| m.d.checked_mul(ctx.xd).and_then(|w| v.checked_add(w)))
                .ok_or(Error::Overflow { depth: 0 })?;
            debug_assert!(num > 0);
            (num as u128, ctx.ln_xd)
        }
        Weight::SupNorm => {
            let (d0, d1) = m.denoms();
            (d0.min(d1), (0.0, 0.0))
        }
    };
    let ln_det = if m.det_abs == 1 {
        (0.0, 0.0)
    } else {
        (round::ln_u128_down(m.det_abs), round::ln_u128_up(m.det_abs))
    };
    // doubling an f64 is exact, so 2*ln needs no extra rounding step
    Ok(match ctx.dir {
        Dir::Down => {
            let l = round::add_down(round::sub_down(ln_det.0, 2.0 * round::ln_u128_up(num)), 2.0 * ln_xd.0);
            round::exp_down(round::mul_down(ctx.t, l))
        }
        Dir::Up => {
            let l = round::add_up(round::sub_up(ln_det.1, 2.0 * round::ln_u128_down(num)), 2.0 * ln_xd.1);
            round::exp_up(round::mul_up(ctx.t, l))
        }
    })
}

fn dir_add(dir: Dir, a: f64, b: f64) -> f64 {
    match dir {
        Dir::Down => round::add_down(a, b),
        Dir::Up => round::add_up(a, b),
    }
}

/// Depth-first sum over all words extending `head` by `remaining` letters,
/// in ascending letter order.
fn subtree_sum(mats: &[Mat2], head: Mat2, remaining: u32, ctx: &TermCtx) -> Result<f64> {
    if remaining == 0 {
        return leaf_term(&head, ctx);
    }
    let mut acc = 0.0;
    for g in mats {
        let m = head.compose(g).map_err(|_| Error::Overflow { depth: remaining })?;
        acc = dir_add(ctx.dir, acc, subtree_sum(mats, m, remaining - 1, ctx)?);
    }
    Ok(acc)
}

/// Directed sum over all depth-`depth` words of the pool.
///
/// The sum is split into one partial per first letter; partials may be
/// computed by any number of workers but are reduced serially in letter
/// order, so the result is bitwise independent of the thread count.
fn pool_sum(mats: &[Mat2], depth: u32, ctx: &TermCtx, threads: usize, budget: u128) -> Result<f64> {
    debug_assert!(depth >= 1);
    let count = (mats.len() as u128).checked_pow(depth);
    match count {
        Some(c) if c <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded {
                words: count.unwrap_or(u128::MAX),
                budget,
            })
        }
    }
    let workers = threads.clamp(1, mats.len());
    let partials: Vec<Result<f64>> = if workers <= 1 {
        mats.iter().map(|m| subtree_sum(mats, *m, depth - 1, ctx)).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<f64>>>> =
            (0..mats.len()).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= mats.len() {
                        break;
                    }
                    let r = subtree_sum(mats, mats[i], depth - 1, ctx);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
        slots.into_iter().map(|s| s.into_inner().unwrap().expect("worker finished")).collect()
    };
    let mut acc = 0.0;
    for p in partials {
        acc = dir_add(ctx.dir, acc, p?);
    }
    Ok(acc)
}

/// Tracked level-1 sup-norm sums `(down, up)` used by the tail formula.
fn tracked_sup_p(pool: &Pool, t: f64) -> Result<(f64, f64)> {
    let ctx_lo = TermCtx::new(t, Dir::Down, Weight::SupNorm, Rat::zero());
    let ctx_hi = TermCtx::new(t, Dir::Up, Weight::SupNorm, Rat::zero());
    let mut lo = 0.0;
    let mut hi = 0.0;
    for m in &pool.mats {
        lo = round::add_down(lo, leaf_term(m, &ctx_lo)?);
        hi = round::add_up(hi, leaf_term(m, &ctx_hi)?);
    }
    Ok((lo, hi))
}

fn powi_dir(dir: Dir, x: f64, n: u32) -> f64 {
    let mut acc = x;
    for _ in 1..n {
        acc = match dir {
            Dir::Down => round::mul_down(acc, x),
            Dir::Up => round::mul_up(acc, x),
        };
    }
    acc
}

/// Upper bound on the depth-`n` mass of words containing an untracked
/// letter: `(P + Q)^n - P^n` in sup-norm weights.
fn untracked_mass_up(pool: &Pool, t: f64, depth: u32) -> Result<f64> {
    let Some(tail) = &pool.tail else { return Ok(0.0) };
    let q_up = tail.q_up(t)?;
    if depth == 1 {
        return Ok(q_up);
    }
    let (p_down, p_up) = tracked_sup_p(pool, t)?;
    let a_pow = powi_dir(Dir::Up, round::add_up(p_up, q_up), depth);
    let p_pow = powi_dir(Dir::Down, p_down, depth);
    Ok(round::sub_up(a_pow, p_pow).max(0.0))
}

/// Certified lower bound on `lambda` from the supermultiplicative point sum.
fn lambda_lo_eval(pool: &Pool, t: f64, depth: u32, opts: &EngineOpts) -> Result<f64> {
    let ctx = TermCtx::new(t, Dir::Down, Weight::AtPoint, pool.x_lo);
    let s = pool_sum(&pool.mats, depth, &ctx, opts.threads, opts.budget)?;
    Ok(round::root_down(s.max(f64::MIN_POSITIVE), depth))
}

/// Certified upper bound on `lambda` from the submultiplicative point sum
/// plus the untracked mass.
fn lambda_hi_eval(pool: &Pool, t: f64, depth: u32, opts: &EngineOpts) -> Result<f64> {
    let tail_mass = untracked_mass_up(pool, t, depth)?;
    let ctx = TermCtx::new(t, Dir::Up, Weight::AtPoint, pool.x_hi);
    let s = pool_sum(&pool.mats, depth, &ctx, opts.threads, opts.budget)?;
    Ok(round::root_up(round::add_up(s, tail_mass), depth))
}

fn eval_point_bracket(pool: &Pool, t: f64, depth: u32, opts: &EngineOpts) -> Result<PressureBracket> {
    let lambda_lo = lambda_lo_eval(pool, t, depth, opts)?;
    let lambda_hi = lambda_hi_eval(pool, t, depth, opts)?;
    Ok(PressureBracket {
        t,
        lambda_lo: lambda_lo.min(lambda_hi),
        lambda_hi,
        depth_n: depth,
        tail_included: pool.tail.is_some(),
        k_used: None,
        method: BracketMethod::EvalPoint,
    })
}

fn star_mode_for(system: &SystemSpec, a: &AlphabetSpec) -> bool {
    matches!(system.family, Family::BcfStar)
        || (matches!(system.family, Family::Bcf) && a.contains(2))
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// Directed bounds on the depth-`n` sup-norm partition sum
/// `Phi_{A,n}(t) = sum over omega in A^n of ||phi_omega'||^t`.
///
/// For infinite alphabets the upper bound adds the certified untracked mass;
/// the lower bound is the truncated sum alone. Star alphabets (family
/// `BcfStar`) sum over words of star generators instead.
pub fn partition_sum(
    system: &SystemSpec,
    a: &AlphabetSpec,
    n: u32,
    t: f64,
    cutoffs: &Cutoffs,
) -> Result<(f64, f64)> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let star = matches!(system.family, Family::BcfStar);
    let pool = build_pool(system, a, cutoffs, star)?;
    let infinite = pool.tail.is_some();
    if infinite && t <= 0.5 {
        return Err(Error::Divergent(format!(
            "level-1 sup-norm sum over an infinite alphabet diverges at t = {t} <= 1/2"
        )));
    }
    let opts = EngineOpts::default();
    let ctx_lo = TermCtx::new(t, Dir::Down, Weight::SupNorm, Rat::zero());
    let ctx_hi = TermCtx::new(t, Dir::Up, Weight::SupNorm, Rat::zero());
    let lo = pool_sum(&pool.mats, n, &ctx_lo, 1, opts.budget)?;
    let hi = pool_sum(&pool.mats, n, &ctx_hi, 1, opts.budget)?;
    let hi = round::add_up(hi, untracked_mass_up(&pool, t, n)?);
    Ok((lo, hi))
}

/// Certified eval-point bracket for `lambda_A(t)` at one depth.
pub fn lambda_bracket(system: &SystemSpec, a: &AlphabetSpec, t: f64, depth_n: u32) -> Result<PressureBracket> {
    lambda_bracket_opts(system, a, t, depth_n, None, &EngineOpts::default())
}

/// [`lambda_bracket`] with explicit cutoffs and engine options.
pub fn lambda_bracket_opts(
    system: &SystemSpec,
    a: &AlphabetSpec,
    t: f64,
    depth_n: u32,
    cutoffs: Option<&Cutoffs>,
    opts: &EngineOpts,
) -> Result<PressureBracket> {
    check_t(t)?;
    if depth_n == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let star = matches!(system.family, Family::BcfStar);
    let planned = Cutoffs::plan(a, star && a.contains(2), depth_n, opts.per_depth_budget);
    let chosen = cutoffs.copied().or(opts.fixed_cutoffs).unwrap_or(planned);
    let pool = build_pool(system, a, &chosen, star)?;
    if pool.tail.is_some() && t <= 0.5 {
        return Err(Error::Divergent(format!(
            "pressure sums over an infinite alphabet diverge at t = {t} <= 1/2"
        )));
    }
    eval_point_bracket(&pool, t, depth_n, opts)
}

/// Classical bounded-distortion bracket: `lambda_hi = Phi_n^{1/n}` and
/// `lambda_lo = (K^{-t} Phi_n)^{1/n}` over sup-norm sums, finite alphabets
/// only.
pub fn lambda_bracket_distortion(
    system: &SystemSpec,
    a: &AlphabetSpec,
    t: f64,
    depth_n: u32,
) -> Result<PressureBracket> {
    check_t(t)?;
    if depth_n == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if a.is_cofinite() || matches!(system.family, Family::BcfStar) {
        return Err(Error::Unsupported(
            "the distortion bracket needs a finite letter pool; use the eval-point bracket".into(),
        ));
    }
    let cutoffs = Cutoffs { letter_cutoff: u64::MAX, star_n_cutoff: 0 };
    let pool = build_pool(system, a, &cutoffs, false)?;
    let opts = EngineOpts::default();
    let ctx_lo = TermCtx::new(t, Dir::Down, Weight::SupNorm, Rat::zero());
    let ctx_hi = TermCtx::new(t, Dir::Up, Weight::SupNorm, Rat::zero());
    let s_lo = pool_sum(&pool.mats, depth_n, &ctx_lo, 1, opts.budget)?;
    let s_hi = pool_sum(&pool.mats, depth_n, &ctx_hi, 1, opts.budget)?;
    let k = system.distortion_k;
    let lambda_lo = round::root_down(round::mul_down(round::neg_pow_down(k, t), s_lo).max(f64::MIN_POSITIVE), depth_n);
    let lambda_hi = round::root_up(s_hi, depth_n);
    Ok(PressureBracket {
        t,
        lambda_lo,
        lambda_hi,
        depth_n,
        tail_included: false,
        k_used: Some(k),
        method: BracketMethod::Distortion,
    })
}

/// Certified lower bound on `lambda_A(t)` (truncated subsystem, no tail).
///
/// `at` optionally overrides the evaluation point; any point on the correct
/// side of every tracked letter image is admissible and the override is
/// validated exactly. A common override (such as 0 for backward pools)
/// makes bounds across nested alphabets comparable term by term.
pub fn lambda_lower_bound(
    system: &SystemSpec,
    a: &AlphabetSpec,
    t: f64,
    depth_n: u32,
    cutoffs: Option<&Cutoffs>,
    opts: &EngineOpts,
    at: Option<&BigRational>,
) -> Result<f64> {
    check_t(t)?;
    let star = star_mode_for(system, a);
    let planned = Cutoffs::plan(a, star, depth_n, opts.per_depth_budget);
    let chosen = cutoffs.copied().or(opts.fixed_cutoffs).unwrap_or(planned);
    let mut pool = build_pool(system, a, &chosen, star)?;
    if let Some(x) = at {
        pool.x_lo = validated_point(system, &pool, x, true)?;
    }
    lambda_lo_eval(&pool, t, depth_n, opts)
}

/// Certified upper bound on `lambda_A(t)` including the untracked mass.
pub fn lambda_upper_bound(
    system: &SystemSpec,
    a: &AlphabetSpec,
    t: f64,
    depth_n: u32,
    cutoffs: Option<&Cutoffs>,
    opts: &EngineOpts,
) -> Result<f64> {
    check_t(t)?;
    let star = star_mode_for(system, a);
    let planned = Cutoffs::plan(a, star, depth_n, opts.per_depth_budget);
    let chosen = cutoffs.copied().or(opts.fixed_cutoffs).unwrap_or(planned);
    let pool = build_pool(system, a, &chosen, star)?;
    lambda_hi_eval(&pool, t, depth_n, opts)
}

fn validated_point(system: &SystemSpec, pool: &Pool, x: &BigRational, lower_side: bool) -> Result<Rat> {
    let (Some(n), Some(d)) = (x.numer().to_i128(), x.denom().to_i128()) else {
        return Err(Error::InvalidInput("evaluation point too large".into()));
    };
    if n < 0 || n > d {
        return Err(Error::InvalidInput(format!("evaluation point {x} outside [0, 1]")));
    }
    let r = Rat::new(n, d);
    // the point must sit on the supermultiplicative (lower) or
    // submultiplicative (upper) side of every tracked image
    for m in &pool.mats {
        let e0 = Rat::new(m.b, m.d);
        let e1 = Rat::new(m.a + m.b, m.c + m.d);
        let (inf, sup) = if e0.lt(&e1) { (e0, e1) } else { (e1, e0) };
        let ok = match (orientation(&system.family), lower_side) {
            (Orientation::Constant, _) => true,
            (Orientation::Increasing, true) => !inf.lt(&r),
            (Orientation::Increasing, false) => !r.lt(&sup),
            (Orientation::NonIncreasing, true) => !r.lt(&sup),
            (Orientation::NonIncreasing, false) => !inf.lt(&r),
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "evaluation point {x} is on the wrong side of a tracked letter image"
            )));
        }
    }
    Ok(r)
}

/// The unique `s >= 0` with `sum r_i^s = 1`, to tolerance `tol`.
pub fn moran_solve(ratios: &[BigRational], tol: f64) -> Result<f64> {
    use num_traits::{One, Zero};
    if ratios.is_empty() {
        return Err(Error::InvalidInput("at least one ratio required".into()));
    }
    for r in ratios {
        if r <= &BigRational::zero() || r >= &BigRational::one() {
            return Err(Error::InvalidInput(format!("ratio {r} outside (0, 1)")));
        }
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    // exact hit at s = 1 (rational arithmetic)
    let sum: BigRational = ratios.iter().sum();
    if sum == BigRational::one() {
        return Ok(1.0);
    }
    let lns: Vec<(f64, f64)> = ratios
        .iter()
        .map(|r| {
            (
                round::sub_down(round::ln_bigint_down(r.numer()), round::ln_bigint_up(r.denom())),
                round::sub_up(round::ln_bigint_up(r.numer()), round::ln_bigint_down(r.denom())),
            )
        })
        .collect();
    let f = |s: f64| -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (ld, lu) in &lns {
            lo = round::add_down(lo, round::exp_down(round::mul_down(s, *ld)));
            hi = round::add_up(hi, round::exp_up(round::mul_up(s, *lu)));
        }
        (lo, hi)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi).0 > 1.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::InvalidInput("Moran root out of range".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (f_lo, f_hi) = f(mid);
        if f_hi < 1.0 {
            hi = mid;
        } else if f_lo > 1.0 {
            lo = mid;
        } else {
            // 1 is inside the rounding enclosure; mid is the root to
            // within the directed-rounding width
            return Ok(mid);
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// dimension bisection
// ---------------------------------------------------------------------------

/// Certified dimension bracket with the default engine options.
pub fn dimension_bracket(
    system: &SystemSpec,
    a: &AlphabetSpec,
    target_width: f64,
    max_depth: u32,
) -> Result<DimensionBracket> {
    let opts = EngineOpts { target_width, max_depth, ..EngineOpts::default() };
    dimension_bracket_opts(system, a, &opts)
}

/// Certified dimension bracket.
///
/// Parabolic backward alphabets (2 present) are routed through the induced
/// hyperbolic star system; the two limit sets differ by a countable set and
/// share their dimension. Bisection certifies `t` above the dimension when
/// `lambda_hi(t) < 1` and below when `lambda_lo(t) > 1`, escalating the
/// depth until the width target is met or `max_depth` is exhausted;
/// non-certified results are returned flagged, never silently.
pub fn dimension_bracket_opts(system: &SystemSpec, a: &AlphabetSpec, opts: &EngineOpts) -> Result<DimensionBracket> {
    a.validate_for(system)?;
    if a.cofinite_from.is_none() && a.finite_part.len() == 1 {
        // one-letter alphabet: the limit set is a single point
        return Ok(DimensionBracket {
            t_lo: 0.0,
            t_hi: 0.0,
            certified: true,
            certified_below: true,
            certified_above: true,
            trivial_upper: false,
            note: Some("singleton alphabet: one-point limit set has dimension 0".into()),
            evidence: Vec::new(),
        });
    }
    let star = star_mode_for(system, a);
    let mut t_lo_best = 0.0f64;
    let mut t_hi_best = 1.0f64;
    let mut certified_below = false;
    let mut certified_above = false;
    let mut evidence: Vec<PressureBracket> = Vec::new();
    let t_res = (opts.target_width / 4.0).max(1e-4);
    let mut depths: Vec<u32> = Vec::new();
    let mut d = 1;
    while d < opts.max_depth {
        depths.push(d);
        d *= 2;
    }
    depths.push(opts.max_depth);
    for &depth in &depths {
        let mut cutoffs = opts
            .fixed_cutoffs
            .unwrap_or_else(|| Cutoffs::plan(a, star, depth, opts.per_depth_budget));
        let mut pool = build_pool(system, a, &cutoffs, star)?;
        if (pool.mats.len() as u128).checked_pow(depth).is_none_or(|c| c > opts.budget) {
            continue;
        }
        if star && depth <= 2 && opts.fixed_cutoffs.is_none() {
            widen_star_cutoffs(system, a, &mut cutoffs, &mut pool, t_hi_best, depth, opts)?;
        }
        let progressed_hi = refine_upper(&pool, depth, opts, t_res, &mut t_lo_best, &mut t_hi_best, &mut certified_above, &mut evidence)?;
        let progressed_lo = refine_lower(&pool, depth, opts, t_res, &mut t_lo_best, &mut t_hi_best, &mut certified_below, &mut evidence)?;
        if certified_below && certified_above && t_hi_best - t_lo_best <= opts.target_width {
            break;
        }
        if !progressed_hi && !progressed_lo && depth > 1 {
            // deeper enumeration is not helping (tail-dominated); stop early
            break;
        }
    }
    let width_ok = t_hi_best - t_lo_best <= opts.target_width;
    let note = if certified_below && certified_above && width_ok {
        None
    } else {
        let mut parts: Vec<&str> = Vec::new();
        if !certified_below {
            parts.push("lower endpoint is the trivial floor t = 0");
        }
        if !certified_above {
            parts.push("upper endpoint is the trivial cap t = 1");
        }
        if !width_ok {
            parts.push("width target not met within the depth and budget limits");
        }
        Some(parts.join("; "))
    };
    Ok(DimensionBracket {
        t_lo: t_lo_best,
        t_hi: t_hi_best,
        certified: certified_below && certified_above && width_ok,
        certified_below,
        certified_above,
        trivial_upper: !certified_above,
        note,
        evidence,
    })
}

/// Tail-budget rule for star pools: double the tracked rectangle until the
/// tail's effect on `lambda_hi` is negligible next to the certification
/// margin, within the word budget.
fn widen_star_cutoffs(
    system: &SystemSpec,
    a: &AlphabetSpec,
    cutoffs: &mut Cutoffs,
    pool: &mut Pool,
    t_probe: f64,
    depth: u32,
    opts: &EngineOpts,
) -> Result<()> {
    let t = t_probe.clamp(0.6, 1.0);
    for _ in 0..8 {
        let ctx = TermCtx::new(t, Dir::Up, Weight::AtPoint, pool.x_hi);
        let s = pool_sum(&pool.mats, depth, &ctx, opts.threads, opts.budget)?;
        let trunc = round::root_up(s, depth);
        let with_tail = round::root_up(round::add_up(s, untracked_mass_up(pool, t, depth)?), depth);
        let effect = with_tail - trunc;
        if effect <= (0.1 * (1.0 - trunc).abs()).max(opts.lambda_res) {
            break;
        }
        let next_n = cutoffs.star_n_cutoff.saturating_mul(2).max(15);
        let next_j = if a.cofinite_from.is_some() && cutoffs.letter_cutoff != u64::MAX {
            (cutoffs.letter_cutoff.saturating_mul(2)).min(100_000)
        } else {
            cutoffs.letter_cutoff
        };
        let js = if a.cofinite_from.is_some() {
            a.tracked_letters(next_j).iter().filter(|&&j| j != 2 && j <= next_j).count() as u128
        } else {
            a.finite_part.iter().filter(|&&j| j != 2).count() as u128
        };
        let letters = js * (next_n as u128 + 1);
        if letters.checked_pow(depth).is_none_or(|c| c > opts.budget.min(40_000_000)) {
            break;
        }
        cutoffs.star_n_cutoff = next_n;
        cutoffs.letter_cutoff = next_j;
        *pool = build_pool(system, a, cutoffs, true)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn refine_upper(
    pool: &Pool,
    depth: u32,
    opts: &EngineOpts,
    t_res: f64,
    t_lo_best: &mut f64,
    t_hi_best: &mut f64,
    certified_above: &mut bool,
    evidence: &mut Vec<PressureBracket>,
) -> Result<bool> {
    // lambda_hi is decreasing in t, so the current upper endpoint is the
    // easiest point to certify; if it fails, this depth cannot improve.
    let Some(anchor) = try_hi(pool, *t_hi_best, depth, opts)? else { return Ok(false) };
    if anchor.lambda_hi >= 1.0 {
        return Ok(false);
    }
    let mut good = *t_hi_best;
    let mut best = anchor;
    let mut bad = *t_lo_best;
    while good - bad > t_res {
        let mid = 0.5 * (good + bad);
        match try_hi(pool, mid, depth, opts)? {
            Some(b) if b.lambda_hi < 1.0 => {
                good = mid;
                best = b;
            }
            _ => bad = mid,
        }
    }
    let progressed = good < *t_hi_best;
    *t_hi_best = good;
    *certified_above = true;
    evidence.push(best);
    Ok(progressed)
}

#[allow(clippy::too_many_arguments)]
fn refine_lower(
    pool: &Pool,
    depth: u32,
    opts: &EngineOpts,
    t_res: f64,
    t_lo_best: &mut f64,
    t_hi_best: &mut f64,
    certified_below: &mut bool,
    evidence: &mut Vec<PressureBracket>,
) -> Result<bool> {
    let anchor = try_lo(pool, *t_lo_best, depth, opts)?;
    if anchor.lambda_lo <= 1.0 {
        return Ok(false);
    }
    let mut good = *t_lo_best;
    let mut best = anchor;
    let mut bad = *t_hi_best;
    while bad - good > t_res {
        let mid = 0.5 * (good + bad);
        let b = try_lo(pool, mid, depth, opts)?;
        if b.lambda_lo > 1.0 {
            good = mid;
            best = b;
        } else {
            bad = mid;
        }
    }
    let progressed = good > *t_lo_best;
    *t_lo_best = good;
    *certified_below = true;
    evidence.push(best);
    Ok(progressed)
}

/// Lower-side-only bracket. The truncated point sum certifies a lower bound
/// at every `t`, including where the full upper sum diverges (t <= 1/2 over
/// infinite alphabets), so the upper slot is reported as infinite.
fn try_lo(pool: &Pool, t: f64, depth: u32, opts: &EngineOpts) -> Result<PressureBracket> {
    let lambda_lo = lambda_lo_eval(pool, t, depth, opts)?;
    Ok(PressureBracket {
        t,
        lambda_lo,
        lambda_hi: f64::INFINITY,
        depth_n: depth,
        tail_included: false,
        k_used: None,
        method: BracketMethod::EvalPoint,
    })
}

fn try_hi(pool: &Pool, t: f64, depth: u32, opts: &EngineOpts) -> Result<Option<PressureBracket>> {
    if pool.tail.is_some() && t <= 0.5 {
        return Ok(None);
    }
    match eval_point_bracket(pool, t, depth, opts) {
        Ok(b) => Ok(Some(b)),
        Err(Error::Divergent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
