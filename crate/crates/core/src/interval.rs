//! Closed real intervals with the handful of operations bound propagation needs.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(mul0(self.lo, c), mul0(self.hi, c))
        } else {
            Interval::new(mul0(self.hi, c), mul0(self.lo, c))
        }
    }

    /// `self^e` for a positive integer exponent.
    pub fn powi(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.powi(e as i32);
        let b = self.hi.powi(e as i32);
        if e % 2 == 1 || self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        }
    }

    /// Set of `x` with `x^e ∈ self`, intersected with `domain`; returns the hull.
    pub fn root_within(&self, e: u32, domain: &Interval) -> Interval {
        if e == 1 {
            return self.intersect(domain);
        }
        let inv = 1.0 / e as f64;
        if e % 2 == 1 {
            let r = |v: f64| v.signum() * v.abs().powf(inv);
            return Interval::new(r(self.lo), r(self.hi)).intersect(domain);
        }
        if self.hi < 0.0 {
            return Interval::new(1.0, 0.0);
        }
        let outer = self.hi.powf(inv);
        let inner = if self.lo > 0.0 { self.lo.powf(inv) } else { 0.0 };
        let pos = Interval::new(inner, outer).intersect(domain);
        let neg = Interval::new(-outer, -inner).intersect(domain);
        match (pos.is_empty(), neg.is_empty()) {
            (true, true) => pos,
            (false, true) => pos,
            (true, false) => neg,
            (false, false) => pos.hull(&neg),
        }
    }

    /// `self / d` when `d` does not contain zero; `None` otherwise.
    pub fn div(&self, d: &Interval) -> Option<Interval> {
        if d.contains_zero() {
            return None;
        }
        let inv = Interval::new(1.0 / d.hi, 1.0 / d.lo);
        Some(*self * inv)
    }

    /// Widens outward by a relative slack to absorb floating point error.
    pub fn widen(&self, rel: f64) -> Interval {
        Interval::new(
            self.lo - rel * (1.0 + self.lo.abs()),
            self.hi + rel * (1.0 + self.hi.abs()),
        )
    }
}

/// Multiplication where `0 · ∞ = 0`.
fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [
            mul0(self.lo, o.lo),
            mul0(self.lo, o.hi),
            mul0(self.hi, o.lo),
            mul0(self.hi, o.hi),
        ];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}
