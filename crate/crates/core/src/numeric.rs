//! Dyadic interval arithmetic with directed rounding, at 128 fractional bits.
//!
//! Used for the closed-form guarantee `2^{-b (log₂ d)^{1-1/q}} · n` and the
//! default threshold vector `y_i = 2^{-x^i}`: the true real values are
//! bracketed by rationals with power-of-two denominators, and every claimed
//! inequality rounds in the conservative direction. No floating point.

use crate::{Int, Rational};
use num_traits::{One, Signed, Zero};

/// Fractional bits of the dyadic grid.
pub const PREC: u32 = 128;

fn two_pow(bits: u32) -> Int {
    Int::one() << bits as usize
}

/// Largest grid point `≤ x`.
pub fn round_down(x: &Rational) -> Rational {
    let scaled = (x * Rational::from_integer(two_pow(PREC))).floor();
    scaled / Rational::from_integer(two_pow(PREC))
}

/// Smallest grid point `≥ x`.
pub fn round_up(x: &Rational) -> Rational {
    let scaled = (x * Rational::from_integer(two_pow(PREC))).ceil();
    scaled / Rational::from_integer(two_pow(PREC))
}

/// A closed interval `[lo, hi]` guaranteed to contain the exact real value.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn exact(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Sum of two intervals.
    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: round_down(&(&self.lo + &other.lo)),
            hi: round_up(&(&self.hi + &other.hi)),
        }
    }

    /// Product, assuming both intervals are nonnegative.
    pub fn mul_nonneg(&self, other: &Interval) -> Interval {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Interval {
            lo: round_down(&(&self.lo * &other.lo)),
            hi: round_up(&(&self.hi * &other.hi)),
        }
    }

    /// Scales by a nonnegative exact rational.
    pub fn scale_nonneg(&self, c: &Rational) -> Interval {
        debug_assert!(!c.is_negative());
        Interval {
            lo: round_down(&(&self.lo * c)),
            hi: round_up(&(&self.hi * c)),
        }
    }
}

/// Exact floor of `log₂ x` for a positive rational.
fn floor_log2(x: &Rational) -> i64 {
    assert!(x.is_positive());
    let mut e: i64 = (x.numer().bits() as i64) - (x.denom().bits() as i64);
    // adjust so that 2^e ≤ x < 2^{e+1}
    while pow2(e) > *x {
        e -= 1;
    }
    while pow2(e + 1) <= *x {
        e += 1;
    }
    e
}

/// Exact rational `2^e` for possibly negative `e`.
fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(Int::one() << e as usize)
    } else {
        Rational::new(Int::one(), Int::one() << (-e) as usize)
    }
}

/// Binary-digit extraction for `log₂`: repeatedly square the normalized value
/// and shift out integer bits. With directed rounding the all-down chain
/// yields a lower bound, the all-up chain an upper bound.
fn log2_digits(x: &Rational, up: bool) -> Rational {
    let e = floor_log2(x);
    let mut z = x / pow2(e); // in [1, 2)
    z = if up { round_up(&z) } else { round_down(&z) };
    let mut acc = Rational::from_integer(Int::from(e));
    let mut place = pow2(-1);
    for _ in 0..PREC {
        let sq = &z * &z;
        z = if up { round_up(&sq) } else { round_down(&sq) };
        while z >= crate::ratio(2) {
            z /= crate::ratio(2);
            acc += &place;
        }
        place /= crate::ratio(2);
    }
    if up {
        // the truncated tail is worth less than two final places
        acc + pow2(-(PREC as i64) + 1)
    } else {
        acc
    }
}

/// Bracket for `log₂ x`, `x > 0`.
pub fn log2_interval(x: &Rational) -> Interval {
    Interval {
        lo: log2_digits(x, false),
        hi: log2_digits(x, true),
    }
}

/// Directed square root on the dyadic grid.
fn sqrt_dir(x: &Rational, up: bool) -> Rational {
    debug_assert!(!x.is_negative());
    // sqrt(x) = sqrt(x · 4^P) / 2^P, with integer sqrt under/over-shooting
    let scaled = (x * Rational::from_integer(two_pow(2 * PREC))).floor();
    let m = scaled.to_integer();
    let root = m.sqrt();
    let root = if up { root + Int::one() } else { root };
    Rational::new(root, two_pow(PREC))
}

/// Bracket for `2^t`, any sign of `t` (interval ends must be exact rationals).
pub fn exp2_interval(t: &Interval) -> Interval {
    Interval {
        lo: exp2_dir(&t.lo, false),
        hi: exp2_dir(&t.hi, true),
    }
}

fn exp2_dir(t: &Rational, up: bool) -> Rational {
    if t.is_negative() {
        // 2^t = 1 / 2^{-t}: invert with the opposite rounding
        let inv = exp2_dir(&-t, !up);
        let exact = Rational::one() / inv;
        return if up { round_up(&exact) } else { round_down(&exact) };
    }
    let n = t.floor().to_integer();
    let int_part = pow2(int_to_i64(&n));
    let mut frac = t - Rational::from_integer(n);
    // 2^frac via the binary expansion of frac and iterated square roots of 2
    let mut acc = Rational::one();
    let mut root = sqrt_dir(&crate::ratio(2), up);
    for i in 1..=PREC {
        frac *= crate::ratio(2);
        if frac >= Rational::one() {
            frac -= Rational::one();
            let prod = &acc * &root;
            acc = if up { round_up(&prod) } else { round_down(&prod) };
        }
        if i < PREC {
            root = sqrt_dir(&root, up);
        }
    }
    // remaining tail ε < 2^{-P}: 2^ε < 1 + 2^{1-P}
    if up {
        let fudge = Rational::one() + pow2(-(PREC as i64) + 1);
        round_up(&(acc * int_part * fudge))
    } else {
        round_down(&(acc * int_part))
    }
}

fn int_to_i64(x: &Int) -> i64 {
    use num_traits::ToPrimitive;
    x.to_i64().expect("exponent fits i64")
}

/// Bracket for `x^e` with `x ≥ 1` given as an interval and exact rational
/// exponent `e ≥ 0`, via `x^e = 2^{e · log₂ x}`.
pub fn pow_interval(x: &Interval, e: &Rational) -> Interval {
    debug_assert!(x.lo >= Rational::one() && !e.is_negative());
    if e.is_zero() {
        return Interval::exact(Rational::one());
    }
    let l = Interval {
        lo: log2_digits(&x.lo, false),
        hi: log2_digits(&x.hi, true),
    };
    exp2_interval(&l.scale_nonneg(e))
}
