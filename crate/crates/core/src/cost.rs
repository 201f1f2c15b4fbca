//! Path costs extended with an infinite element.

use std::fmt;
use std::ops::Add;

/// A nonnegative integer cost or `Infinite`.
///
/// The derived order puts every finite value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtCost {
    Finite(u64),
    Infinite,
}

impl ExtCost {
    pub const ZERO: ExtCost = ExtCost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtCost::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtCost::Finite(c) => Some(c),
            ExtCost::Infinite => None,
        }
    }

    /// Finite value, panicking on infinity. Intended for tests and for spots
    /// where finiteness was checked just before.
    pub fn unwrap(self) -> u64 {
        self.finite().expect("cost is infinite")
    }
}

impl Add for ExtCost {
    type Output = ExtCost;

    fn add(self, rhs: ExtCost) -> ExtCost {
        match (self, rhs) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => match a.checked_add(b) {
                Some(s) => ExtCost::Finite(s),
                None => ExtCost::Infinite,
            },
            _ => ExtCost::Infinite,
        }
    }
}

impl Add<u64> for ExtCost {
    type Output = ExtCost;

    fn add(self, rhs: u64) -> ExtCost {
        self + ExtCost::Finite(rhs)
    }
}

impl From<u64> for ExtCost {
    fn from(c: u64) -> Self {
        ExtCost::Finite(c)
    }
}

impl fmt::Display for ExtCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(c) => write!(f, "{c}"),
            ExtCost::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_saturation() {
        assert!(ExtCost::Finite(u64::MAX) < ExtCost::Infinite);
        assert_eq!(ExtCost::Finite(u64::MAX) + 1, ExtCost::Infinite);
        assert_eq!(ExtCost::Infinite + ExtCost::ZERO, ExtCost::Infinite);
        assert_eq!(ExtCost::Finite(2) + 3, ExtCost::Finite(5));
    }
}
