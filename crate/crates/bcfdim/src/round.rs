//! Outward-rounded floating-point primitives.
//!
//! Every certified inequality downstream reduces to `f64` comparisons, so
//! each arithmetic step must err in a known direction. The IEEE basic
//! operations round to nearest, hence a single `next_down`/`next_up` step
//! after such an operation lands strictly on the safe side of the exact
//! value. Transcendentals from the platform libm are not correctly rounded;
//! their results get a wider fixed pad.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

/// Pad (in ulp steps) applied to libm transcendentals. Platform `ln`/`exp`
/// stay within 2 ulps of the exact value; four steps leave slack.
const TRANS_PAD: usize = 4;

/// Rounding direction tag carried by logarithmic norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dir {
    Down,
    Up,
}

#[inline]
fn down_n(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = x.next_down();
    }
    x
}

#[inline]
fn up_n(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = x.next_up();
    }
    x
}

/// Exact rounding error of `s = fl(a + b)` (Knuth two-sum); NaN only if an
/// intermediate overflowed, in which case the caller steps pessimistically.
#[inline]
fn add_err(a: f64, b: f64, s: f64) -> f64 {
    let a1 = s - b;
    let b1 = s - a1;
    (a - a1) + (b - b1)
}

/// Magnitudes below this may make the FMA error term inexact (subnormal
/// range); directed products and quotients then step unconditionally.
const TINY: f64 = 1e-290;

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s == f64::INFINITY {
        return f64::MAX;
    }
    if !s.is_finite() {
        return s;
    }
    let e = add_err(a, b, s);
    if e < 0.0 || e.is_nan() {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if !s.is_finite() {
        return s;
    }
    let e = add_err(a, b, s);
    if e > 0.0 || e.is_nan() {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p == f64::INFINITY {
        return f64::MAX;
    }
    if !p.is_finite() {
        return p;
    }
    if p != 0.0 && p.abs() < TINY {
        return p.next_down();
    }
    // e = a b - p exactly, by the FMA error-free transformation
    let e = a.mul_add(b, -p);
    if e < 0.0 || e.is_nan() {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if !p.is_finite() {
        return p;
    }
    if p != 0.0 && p.abs() < TINY {
        return p.next_up();
    }
    let e = a.mul_add(b, -p);
    if e > 0.0 || e.is_nan() {
        p.next_up()
    } else {
        p
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == f64::INFINITY {
        return f64::MAX;
    }
    if !q.is_finite() {
        return q;
    }
    if q != 0.0 && q.abs() < TINY {
        return q.next_down();
    }
    // r = a - q b exactly; the true quotient is q + r/b
    let r = (-q).mul_add(b, a);
    if r.is_nan() || (r != 0.0 && (r > 0.0) != (b > 0.0)) {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == f64::NEG_INFINITY {
        return f64::MIN;
    }
    if !q.is_finite() {
        return q;
    }
    if q != 0.0 && q.abs() < TINY {
        return q.next_up();
    }
    let r = (-q).mul_add(b, a);
    if r.is_nan() || (r != 0.0 && (r > 0.0) == (b > 0.0)) {
        q.next_up()
    } else {
        q
    }
}

/// Lower bound on `ln x`, `x > 0`. Exact at 1.
pub fn ln_down(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x == 1.0 {
        return 0.0;
    }
    down_n(x.ln(), TRANS_PAD)
}

/// Upper bound on `ln x`, `x > 0`. Exact at 1.
pub fn ln_up(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x == 1.0 {
        return 0.0;
    }
    up_n(x.ln(), TRANS_PAD)
}

/// Lower bound on `exp x`; clamped at 0 from below.
pub fn exp_down(x: f64) -> f64 {
    let y = down_n(x.exp(), TRANS_PAD);
    if y < 0.0 {
        0.0
    } else {
        y
    }
}

/// Upper bound on `exp x`.
pub fn exp_up(x: f64) -> f64 {
    up_n(x.exp(), TRANS_PAD)
}

/// Lower bound on `x^t` for `x > 0`, `t >= 0`.
pub fn pow_down(x: f64, t: f64) -> f64 {
    debug_assert!(x > 0.0 && t >= 0.0);
    if t == 0.0 || x == 1.0 {
        return 1.0;
    }
    exp_down(mul_down(t, ln_down(x)))
}

/// Upper bound on `x^t` for `x > 0`, `t >= 0`.
pub fn pow_up(x: f64, t: f64) -> f64 {
    debug_assert!(x > 0.0 && t >= 0.0);
    if t == 0.0 || x == 1.0 {
        return 1.0;
    }
    exp_up(mul_up(t, ln_up(x)))
}

/// Lower bound on `k^(-s)` for `k >= 1`, `s >= 0`.
pub fn neg_pow_down(k: f64, s: f64) -> f64 {
    debug_assert!(k >= 1.0 && s >= 0.0);
    exp_down(mul_down(-s, ln_up(k)))
}

/// Upper bound on `k^(-s)` for `k >= 1`, `s >= 0`.
pub fn neg_pow_up(k: f64, s: f64) -> f64 {
    debug_assert!(k >= 1.0 && s >= 0.0);
    exp_up(mul_up(-s, ln_down(k)))
}

/// Lower bound on the n-th root of `x > 0`.
pub fn root_down(x: f64, n: u32) -> f64 {
    debug_assert!(x > 0.0 && n >= 1);
    if n == 1 {
        return x;
    }
    exp_down(div_down(ln_down(x), n as f64))
}

/// Upper bound on the n-th root of `x > 0`.
pub fn root_up(x: f64, n: u32) -> f64 {
    debug_assert!(x > 0.0 && n >= 1);
    if n == 1 {
        return x;
    }
    exp_up(div_up(ln_up(x), n as f64))
}

fn ln2_down() -> f64 {
    std::f64::consts::LN_2.next_down()
}

fn ln2_up() -> f64 {
    std::f64::consts::LN_2.next_up()
}

const EXACT_BITS: u32 = 53;

/// Lower bound on `ln v` for an integer `v >= 1`.
pub fn ln_u128_down(v: u128) -> f64 {
    debug_assert!(v >= 1);
    if v == 1 {
        return 0.0;
    }
    let bits = 128 - v.leading_zeros();
    if bits <= EXACT_BITS {
        // The conversion to f64 is exact below 2^53.
        ln_down(v as f64)
    } else {
        let s = bits - EXACT_BITS;
        let m = (v >> s) as f64; // m <= v / 2^s, conversion exact
        add_down(ln_down(m), mul_down(s as f64, ln2_down()))
    }
}

/// Upper bound on `ln v` for an integer `v >= 1`.
pub fn ln_u128_up(v: u128) -> f64 {
    debug_assert!(v >= 1);
    if v == 1 {
        return 0.0;
    }
    let bits = 128 - v.leading_zeros();
    if bits <= EXACT_BITS {
        ln_up(v as f64)
    } else {
        let s = bits - EXACT_BITS;
        let m = ((v >> s) + 1) as f64; // m >= v / 2^s
        add_up(ln_up(m), mul_up(s as f64, ln2_up()))
    }
}

/// Lower bound on `ln v` for a positive big integer.
pub fn ln_bigint_down(v: &BigInt) -> f64 {
    debug_assert!(v.is_positive());
    let mag = v.magnitude();
    let bits = mag.bits();
    if bits <= u64::from(EXACT_BITS) {
        ln_u128_down(mag.to_u128().expect("fits"))
    } else {
        let s = bits - u64::from(EXACT_BITS);
        let m = (mag >> s).to_f64().expect("53-bit value");
        add_down(ln_down(m), mul_down(s as f64, ln2_down()))
    }
}

/// Upper bound on `ln v` for a positive big integer.
pub fn ln_bigint_up(v: &BigInt) -> f64 {
    debug_assert!(v.is_positive());
    let mag = v.magnitude();
    let bits = mag.bits();
    if bits <= u64::from(EXACT_BITS) {
        ln_u128_up(mag.to_u128().expect("fits"))
    } else {
        let s = bits - u64::from(EXACT_BITS);
        let m = ((mag >> s) + 1u32).to_f64().expect("54-bit value");
        add_up(ln_up(m), mul_up(s as f64, ln2_up()))
    }
}
