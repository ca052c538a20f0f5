use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interval of the real line, used as the Borel set `B` in `1_B(x)`.
///
/// Infinite endpoints are always treated as open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl RealInterval {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints must satisfy lower <= upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        })
    }

    fn unchecked(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Self {
        debug_assert!(lower <= upper);
        Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        }
    }

    /// `(-∞, ∞)`
    pub fn whole() -> Self {
        Self::unchecked(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    /// `[t, ∞)`
    pub fn at_least(t: f64) -> Self {
        Self::unchecked(t, f64::INFINITY, true, false)
    }

    /// `(t, ∞)`
    pub fn greater_than(t: f64) -> Self {
        Self::unchecked(t, f64::INFINITY, false, false)
    }

    /// `(-∞, t)`
    pub fn less_than(t: f64) -> Self {
        Self::unchecked(f64::NEG_INFINITY, t, false, false)
    }

    /// `(-∞, t]`
    pub fn at_most(t: f64) -> Self {
        Self::unchecked(f64::NEG_INFINITY, t, false, true)
    }

    /// `[a, b)`
    pub fn half_open(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, true, false)
    }

    /// `[a, b]`
    pub fn closed(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, true, true)
    }

    /// Membership after snapping `value` onto an endpoint within
    /// `snap * (|endpoint| + 1)`.
    pub fn contains(&self, value: f64, snap: f64) -> bool {
        let v = self.snap(value, snap);
        let above = if self.lower.is_finite() {
            v > self.lower || (self.lower_closed && v == self.lower)
        } else {
            true
        };
        let below = if self.upper.is_finite() {
            v < self.upper || (self.upper_closed && v == self.upper)
        } else {
            true
        };
        above && below
    }

    fn snap(&self, value: f64, snap: f64) -> f64 {
        let near = |endpoint: f64| {
            endpoint.is_finite() && (value - endpoint).abs() <= snap * (endpoint.abs() + 1.0)
        };
        match (near(self.lower), near(self.upper)) {
            (true, true) => {
                if (value - self.lower).abs() <= (value - self.upper).abs() {
                    self.lower
                } else {
                    self.upper
                }
            }
            (true, false) => self.lower,
            (false, true) => self.upper,
            (false, false) => value,
        }
    }
}

impl std::fmt::Display for RealInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let open = if self.lower_closed && self.lower.is_finite() { '[' } else { '(' };
        let close = if self.upper_closed && self.upper.is_finite() { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lower, self.upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SNAP: f64 = 1e-9;

    #[test]
    fn closed_and_open_endpoints() {
        let b = RealInterval::at_least(2.0);
        assert!(b.contains(2.0, SNAP));
        assert!(!b.contains(1.5, SNAP));
        let b = RealInterval::greater_than(2.0);
        assert!(!b.contains(2.0, SNAP));
        assert!(b.contains(2.5, SNAP));
    }

    #[test]
    fn snapping_keeps_complementary_pairs_complementary() {
        let lo = RealInterval::half_open(0.0, 1.5).unwrap();
        let hi = RealInterval::at_least(1.5);
        for v in [1.5 - 1e-12, 1.5, 1.5 + 1e-12, 1.4999999, 1.5000001] {
            assert_ne!(lo.contains(v, SNAP), hi.contains(v, SNAP), "value {v}");
        }
        // Roundoff just below the endpoint is pulled onto it.
        assert!(hi.contains(1.5 - 1e-12, SNAP));
    }

    #[test]
    fn infinite_endpoints_are_open() {
        let all = RealInterval::whole();
        assert!(all.contains(-1e300, SNAP));
        assert!(all.contains(1e300, SNAP));
    }

    #[test]
    fn rejects_reversed_endpoints() {
        assert!(RealInterval::closed(2.0, 1.0).is_err());
        assert!(RealInterval::new(f64::NAN, 1.0, true, true).is_err());
    }
}
