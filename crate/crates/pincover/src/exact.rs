//! Exact rational helpers shared by the symbolic modules.
//!
//! Angles and coordinates are stored as rational multiples of π.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Representative of `x` modulo `m` in `[0, m)`.
pub fn rem(x: Q, m: Q) -> Q {
    let k = (x / m).floor();
    x - k * m
}

/// Exact string such as `3/2·π`, `π`, `-π`, `0`.
pub fn fmt_pi(x: Q) -> String {
    fmt_coeff(x, "π")
}

/// `coeff·sym` with unit coefficients collapsed.
pub fn fmt_coeff(x: Q, sym: &str) -> String {
    if x.is_zero() {
        "0".to_string()
    } else if x.is_one() {
        sym.to_string()
    } else if x == -Q::one() {
        format!("-{sym}")
    } else {
        format!("{x}·{sym}")
    }
}

/// Affine map of the plane with rational linear part and constants in units of π:
/// `(x, y) -> (m00 x + m01 y + c0 π, m10 x + m11 y + c1 π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Affine2 {
    pub m: [[Q; 2]; 2],
    pub c: [Q; 2],
}

impl Affine2 {
    pub fn new(m: [[i64; 2]; 2], c: [Q; 2]) -> Self {
        Affine2 { m: [[qi(m[0][0]), qi(m[0][1])], [qi(m[1][0]), qi(m[1][1])]], c }
    }

    pub fn identity() -> Self {
        Self::new([[1, 0], [0, 1]], [Q::zero(), Q::zero()])
    }

    pub fn translation(cx: Q, cy: Q) -> Self {
        Self::new([[1, 0], [0, 1]], [cx, cy])
    }

    pub fn apply(&self, p: [Q; 2]) -> [Q; 2] {
        [self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.c[0], self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.c[1]]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        let m = |i: usize, j: usize| self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
        let c = self.apply(other.c);
        Affine2 { m: [[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]], c }
    }

    pub fn det(&self) -> Q {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Linear part has entries in {0, ±1} and is orthogonal.
    pub fn is_signed_permutation(&self) -> bool {
        let entries_ok = self.m.iter().flatten().all(|e| e.is_zero() || e.abs().is_one());
        let cols_ok = (0..2).all(|j| (0..2).filter(|&i| !self.m[i][j].is_zero()).count() == 1);
        let rows_ok = (0..2).all(|i| (0..2).filter(|&j| !self.m[i][j].is_zero()).count() == 1);
        entries_ok && cols_ok && rows_ok
    }
}

impl fmt::Display for Affine2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |i: usize| {
            let mut parts = Vec::new();
            for (j, sym) in ["x", "y"].iter().enumerate() {
                let a = self.m[i][j];
                if !a.is_zero() {
                    parts.push(fmt_coeff(a, sym));
                }
            }
            if !self.c[i].is_zero() {
                parts.push(fmt_pi(self.c[i]));
            }
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ").replace("+ -", "- ")
            }
        };
        write!(f, "(x, y) -> ({}, {})", row(0), row(1))
    }
}

/// Greatest common divisor of two integers as i64 (non-negative).
pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_pi(q(3, 2)), "3/2·π");
        assert_eq!(fmt_pi(qi(1)), "π");
        assert_eq!(fmt_pi(qi(-1)), "-π");
        assert_eq!(fmt_pi(qi(0)), "0");
    }

    #[test]
    fn remainder_is_nonnegative() {
        assert_eq!(rem(q(-1, 2), qi(2)), q(3, 2));
        assert_eq!(rem(q(5, 1), qi(2)), qi(1));
    }

    #[test]
    fn compose_and_display() {
        let t3 = Affine2::new([[-1, 0], [0, 1]], [qi(0), qi(0)]);
        let t4 = Affine2::new([[-1, 0], [0, 1]], [qi(1), qi(1)]);
        let both = t3.compose(&t4);
        assert_eq!(both.apply([qi(0), qi(0)]), [qi(-1), qi(1)]);
        assert_eq!(t4.to_string(), "(x, y) -> (-x + π, y + π)");
        assert!(t4.is_signed_permutation());
        assert!(!Affine2::new([[-1, 1], [0, 1]], [qi(0), qi(0)]).is_signed_permutation());
    }
}
