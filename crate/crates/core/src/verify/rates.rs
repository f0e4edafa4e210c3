//! Exact rate constants: the decay exponent `kappa_d`, the optimal moment
//! `s0`, the moment exponent `eta_d(s)` and the complementary `d / 2s`.

use std::fmt;

use num_rational::Rational64;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateConstants {
    d: u32,
}

impl RateConstants {
    pub fn new(d: u32) -> Self {
        assert!(d >= 1, "d must be positive");
        Self { d }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `kappa_d = d / (2 (2d^2 - d + 1))`.
    pub fn kappa(&self) -> Rational64 {
        let d = i64::from(self.d);
        Rational64::new(d, 2 * (2 * d * d - d + 1))
    }

    pub fn kappa_f64(&self) -> f64 {
        self.kappa().to_f64().expect("finite")
    }

    /// `s0 = d (2d - 1) + 1`.
    pub fn s0(&self) -> u64 {
        let d = u64::from(self.d);
        d * (2 * d - 1) + 1
    }

    /// `eta_d(s) = ((s - 1) / d + 1 - d) / (2s)`.
    pub fn eta(&self, s: u64) -> Rational64 {
        assert!(s >= 1, "s must be positive");
        let d = i64::from(self.d);
        let s = s as i64;
        (Rational64::new(s - 1, d) + Rational64::from_integer(1 - d)) / Rational64::from_integer(2 * s)
    }

    /// Whether `s` lies in the range `s - 1 <= d (2d - 1)` where `eta_d`
    /// applies.
    pub fn eta_applies(&self, s: u64) -> bool {
        s >= 1 && s - 1 < self.s0()
    }

    /// `d / (2s)`, the exponent available once `s - 1 > d (2d - 1)`.
    pub fn alt_exponent(&self, s: u64) -> Rational64 {
        Rational64::new(i64::from(self.d), 2 * s as i64)
    }
}

impl fmt::Display for RateConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kappa={} s0={}", self.kappa(), self.s0())
    }
}
