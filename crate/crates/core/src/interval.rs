//! Closed intervals of `f64` with outward rounding.
//!
//! Every arithmetic result is widened by one ulp in each direction (two for
//! the transcendental functions, whose libm implementations are not
//! guaranteed correctly rounded). The enclosures are not tight, but they are
//! safe: the true real-number result always lies inside.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn from_pair(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `true` when `other` is a subset of `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn exp(self) -> Interval {
        Interval {
            lo: down(down(self.lo.exp())).max(0.0),
            hi: up(up(self.hi.exp())),
        }
    }

    /// Natural logarithm; the interval must be strictly positive.
    pub fn ln(self) -> Interval {
        assert!(self.lo > 0.0, "ln of non-positive interval {self}");
        Interval {
            lo: down(down(self.lo.ln())),
            hi: up(up(self.hi.ln())),
        }
    }

    pub fn powi(self, n: u32) -> Interval {
        let mut acc = Interval::point(1.0);
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn recip(self) -> Interval {
        Interval::point(1.0) / self
    }

    pub fn max_point(self, x: f64) -> Interval {
        Interval {
            lo: self.lo.max(x),
            hi: self.hi.max(x),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: down(self.lo + o.lo),
            hi: up(self.hi + o.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: down(self.lo - o.hi),
            hi: up(self.hi - o.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        // 0 * inf shows up as NaN; treat it as 0 since our infinities only
        // ever stand for "unbounded above".
        let c = c.map(|v| if v.is_nan() { 0.0 } else { v });
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: down(lo),
            hi: up(hi),
        }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            };
        }
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: down(lo),
            hi: up(hi),
        }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Interval {
            type Output = Interval;
            fn $m(self, o: f64) -> Interval { $tr::$m(self, Interval::point(o)) }
        }
        impl $tr<Interval> for f64 {
            type Output = Interval;
            fn $m(self, o: Interval) -> Interval { $tr::$m(Interval::point(self), o) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_arithmetic_encloses_exact_value() {
        let x = Interval::point(0.1) + Interval::point(0.2);
        assert!(x.contains(0.1 + 0.2));
        assert!(x.lo < 0.1 + 0.2 && 0.1 + 0.2 < x.hi);
    }

    #[test]
    fn division_by_straddling_interval_is_unbounded() {
        let q = Interval::point(1.0) / Interval::new(-1.0, 1.0);
        assert_eq!(q.lo, f64::NEG_INFINITY);
        assert_eq!(q.hi, f64::INFINITY);
    }

    #[test]
    fn exp_ln_round_trip_encloses() {
        let x = Interval::new(0.5, 2.0);
        let y = x.ln().exp();
        assert!(y.encloses(&x));
    }

    proptest! {
        #[test]
        fn ops_are_inclusion_isotone(a in 0.01f64..10.0, b in 0.01f64..10.0,
                                     w in 0.0f64..1.0, v in 0.0f64..1.0) {
            let x = Interval::point(a);
            let y = Interval::point(b);
            let xw = Interval::new(a - w * a * 0.5, a + w);
            let yw = Interval::new(b - v * b * 0.5, b + v);
            prop_assert!((xw + yw).encloses(&(x + y)));
            prop_assert!((xw - yw).encloses(&(x - y)));
            prop_assert!((xw * yw).encloses(&(x * y)));
            prop_assert!((xw / yw).encloses(&(x / y)));
            prop_assert!(xw.exp().encloses(&x.exp()));
            prop_assert!(xw.ln().encloses(&x.ln()));
            prop_assert!(xw.powi(3).encloses(&x.powi(3)));
        }
    }
}
