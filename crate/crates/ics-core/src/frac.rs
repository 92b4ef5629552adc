//! Exact nonnegative rationals for thresholds and confidences.
//!
//! Every protocol threshold (`1/3`, `1/6 − ε`, decoding radius `1 − ε`)
//! is compared in integer arithmetic; floats appear only in reports.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A nonnegative rational. Not automatically reduced; equality and ordering
/// go through cross multiplication, so `2/4 == 1/2`.
#[derive(Clone, Copy, Serialize, Deserialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub const fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Frac { num, den }
    }

    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self < 1`, i.e. a proper fraction.
    pub fn is_proper(&self) -> bool {
        self.num < self.den
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        (self.num as u128) * (other.den as u128) == (other.num as u128) * (self.den as u128)
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        ((self.num as u128) * (other.den as u128)).cmp(&((other.num as u128) * (self.den as u128)))
    }
}

impl fmt::Debug for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_by_value() {
        assert_eq!(Frac::new(2, 4), Frac::new(1, 2));
        assert!(Frac::new(1, 3) < Frac::new(1, 2));
        assert!(Frac::new(5, 6) > Frac::new(4, 5));
        assert!(Frac::new(1, 6) > Frac::ZERO);
    }

    #[test]
    fn proper_check() {
        assert!(Frac::new(2, 5).is_proper());
        assert!(!Frac::new(5, 5).is_proper());
    }
}
