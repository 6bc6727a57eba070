//! Exact Pin±(2)-valued functions of the square coordinates θ, φ.
//!
//! Every element is `even(t) = cos t + sin t·e1e2` or `odd(t) = cos t·e1 + sin t·e2`
//! with `t = a·θ + c·φ + b·π` for rationals a, c, b. Shifting `t` by π negates the
//! element, so the global sign lives in the angle.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::clifford::{Multivector, Parity, Signature};
use crate::exact::{fmt_coeff, fmt_pi, q, qi, rem, Affine2, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Pin2Error {
    #[error("cannot combine {0} with {1}")]
    KindMismatch(PinKind, PinKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum PinKind {
    #[serde(rename = "pin+")]
    Plus,
    #[serde(rename = "pin-")]
    Minus,
}

impl PinKind {
    pub const BOTH: [PinKind; 2] = [PinKind::Plus, PinKind::Minus];

    /// Square of a unit vector.
    pub fn vector_square(self) -> i8 {
        match self {
            PinKind::Plus => 1,
            PinKind::Minus => -1,
        }
    }

    pub fn signature(self) -> Signature {
        match self {
            PinKind::Plus => Signature::pin_plus(2),
            PinKind::Minus => Signature::pin_minus(2),
        }
        .expect("dimension 2 is supported")
    }
}

impl fmt::Display for PinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PinKind::Plus => write!(f, "pin+"),
            PinKind::Minus => write!(f, "pin-"),
        }
    }
}

impl std::str::FromStr for PinKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pin+" | "plus" | "+" => Ok(PinKind::Plus),
            "pin-" | "minus" | "-" => Ok(PinKind::Minus),
            other => Err(format!("unknown pin kind `{other}` (expected pin+ or pin-)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Theta,
    Phi,
}

/// `theta·θ + phi·φ + pi·π`. Comparison treats the π coefficient modulo 2.
#[derive(Debug, Clone, Copy)]
pub struct AngleForm {
    pub theta: Q,
    pub phi: Q,
    pub pi: Q,
}

impl AngleForm {
    pub fn new(theta: Q, phi: Q, pi: Q) -> Self {
        AngleForm { theta, phi, pi }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero(), Q::zero())
    }

    pub fn constant(pi: Q) -> Self {
        Self::new(Q::zero(), Q::zero(), pi)
    }

    pub fn theta(a: Q) -> Self {
        Self::new(a, Q::zero(), Q::zero())
    }

    pub fn phi(c: Q) -> Self {
        Self::new(Q::zero(), c, Q::zero())
    }

    pub fn scale(self, k: Q) -> Self {
        Self::new(self.theta * k, self.phi * k, self.pi * k)
    }

    pub fn half(self) -> Self {
        self.scale(q(1, 2))
    }

    /// Same form with the π coefficient reduced into `[0, 2)`.
    pub fn normalized(self) -> Self {
        Self::new(self.theta, self.phi, rem(self.pi, qi(2)))
    }

    /// Equality modulo `period·π` in the constant term.
    pub fn eq_mod(&self, other: &AngleForm, period: Q) -> bool {
        self.theta == other.theta && self.phi == other.phi && rem(self.pi - other.pi, period).is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.theta.is_zero() && self.phi.is_zero()
    }

    pub fn coeff(&self, c: Coord) -> Q {
        match c {
            Coord::Theta => self.theta,
            Coord::Phi => self.phi,
        }
    }

    /// Substitute `(θ, φ) -> map(θ, φ)`.
    pub fn substitute(&self, map: &Affine2) -> AngleForm {
        AngleForm::new(
            self.theta * map.m[0][0] + self.phi * map.m[1][0],
            self.theta * map.m[0][1] + self.phi * map.m[1][1],
            self.pi + self.theta * map.c[0] + self.phi * map.c[1],
        )
    }

    /// Numeric value at `(θ, φ)` in radians.
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
        f(self.theta) * theta + f(self.phi) * phi + f(self.pi) * std::f64::consts::PI
    }
}

impl PartialEq for AngleForm {
    fn eq(&self, other: &Self) -> bool {
        self.eq_mod(other, qi(2))
    }
}

impl Eq for AngleForm {}

impl Hash for AngleForm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.normalized();
        (n.theta, n.phi, n.pi).hash(state);
    }
}

impl Add for AngleForm {
    type Output = AngleForm;
    fn add(self, o: AngleForm) -> AngleForm {
        AngleForm::new(self.theta + o.theta, self.phi + o.phi, self.pi + o.pi)
    }
}

impl Sub for AngleForm {
    type Output = AngleForm;
    fn sub(self, o: AngleForm) -> AngleForm {
        self + (-o)
    }
}

impl Neg for AngleForm {
    type Output = AngleForm;
    fn neg(self) -> AngleForm {
        AngleForm::new(-self.theta, -self.phi, -self.pi)
    }
}

impl fmt::Display for AngleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.theta.is_zero() {
            parts.push(fmt_coeff(self.theta, "θ"));
        }
        if !self.phi.is_zero() {
            parts.push(fmt_coeff(self.phi, "φ"));
        }
        if !self.pi.is_zero() || parts.is_empty() {
            parts.push(fmt_pi(self.pi));
        }
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pin2Element {
    kind: PinKind,
    parity: Parity,
    angle: AngleForm,
}

impl Pin2Element {
    pub fn even(kind: PinKind, angle: AngleForm) -> Self {
        Pin2Element { kind, parity: Parity::Even, angle: angle.normalized() }
    }

    pub fn odd(kind: PinKind, angle: AngleForm) -> Self {
        Pin2Element { kind, parity: Parity::Odd, angle: angle.normalized() }
    }

    pub fn one(kind: PinKind) -> Self {
        Self::even(kind, AngleForm::zero())
    }

    pub fn minus_one(kind: PinKind) -> Self {
        Self::even(kind, AngleForm::constant(qi(1)))
    }

    pub fn e1(kind: PinKind) -> Self {
        Self::odd(kind, AngleForm::zero())
    }

    pub fn e2(kind: PinKind) -> Self {
        Self::odd(kind, AngleForm::constant(q(1, 2)))
    }

    pub fn e1e2(kind: PinKind) -> Self {
        Self::even(kind, AngleForm::constant(q(1, 2)))
    }

    /// Identity-component lift of the rotation by `x`, continuous in `x` from
    /// `R̃_0 = 1`. Under the twisted adjoint `even(t)` rotates by `2t` in Pin-
    /// and by `-2t` in Pin+, hence the kind-dependent half angle.
    pub fn rotation_lift(kind: PinKind, x: AngleForm) -> Self {
        match kind {
            PinKind::Minus => Self::even(kind, x.half()),
            PinKind::Plus => Self::even(kind, (-x).half()),
        }
    }

    pub fn kind(&self) -> PinKind {
        self.kind
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn angle(&self) -> AngleForm {
        self.angle
    }

    pub fn neg(&self) -> Self {
        Pin2Element { angle: (self.angle + AngleForm::constant(qi(1))).normalized(), ..*self }
    }

    pub fn mul(&self, other: &Pin2Element) -> Result<Pin2Element, Pin2Error> {
        if self.kind != other.kind {
            return Err(Pin2Error::KindMismatch(self.kind, other.kind));
        }
        let k = self.kind;
        let (s, t) = (self.angle, other.angle);
        let half_turn = AngleForm::constant(qi(1));
        Ok(match (k, self.parity, other.parity) {
            (_, Parity::Even, Parity::Even) => Self::even(k, s + t),
            (PinKind::Plus, Parity::Even, Parity::Odd) => Self::odd(k, t - s),
            (PinKind::Plus, Parity::Odd, Parity::Even) => Self::odd(k, s + t),
            (PinKind::Plus, Parity::Odd, Parity::Odd) => Self::even(k, t - s),
            (PinKind::Minus, Parity::Even, Parity::Odd) => Self::odd(k, t + s),
            (PinKind::Minus, Parity::Odd, Parity::Even) => Self::odd(k, s - t),
            (PinKind::Minus, Parity::Odd, Parity::Odd) => Self::even(k, s - t + half_turn),
        })
    }

    /// Left-to-right product of a non-empty list.
    pub fn product(factors: &[Pin2Element]) -> Result<Pin2Element, Pin2Error> {
        let (first, rest) = factors.split_first().expect("product of at least one factor");
        rest.iter().try_fold(*first, |acc, x| acc.mul(x))
    }

    pub fn inverse(&self) -> Pin2Element {
        match (self.parity, self.kind) {
            (Parity::Even, _) => Self::even(self.kind, -self.angle),
            (Parity::Odd, PinKind::Plus) => *self,
            (Parity::Odd, PinKind::Minus) => self.neg(),
        }
    }

    pub fn project(&self) -> O2PathElement {
        match (self.parity, self.kind) {
            (Parity::Even, PinKind::Minus) => O2PathElement::rotation(self.angle.scale(qi(2))),
            (Parity::Even, PinKind::Plus) => O2PathElement::rotation(self.angle.scale(qi(-2))),
            (Parity::Odd, _) => O2PathElement::reflection(self.angle),
        }
    }

    pub fn substitute(&self, map: &Affine2) -> Pin2Element {
        Pin2Element { angle: self.angle.substitute(map).normalized(), ..*self }
    }

    /// Invariance under `coord -> coord + shift·π`.
    pub fn is_periodic_in(&self, coord: Coord, shift: Q) -> bool {
        rem(self.angle.coeff(coord) * shift, qi(2)).is_zero()
    }

    /// Invariance under `θ -> θ + shift·π`.
    pub fn is_periodic(&self, shift: Q) -> bool {
        self.is_periodic_in(Coord::Theta, shift)
    }

    /// `Some(±1)` when `other = ±self` identically in θ, φ.
    pub fn sign_relative_to(&self, other: &Pin2Element) -> Option<i8> {
        if self.kind != other.kind || self.parity != other.parity {
            return None;
        }
        if self.angle == other.angle {
            Some(1)
        } else if self.neg().angle == other.angle {
            Some(-1)
        } else {
            None
        }
    }

    /// `Some(±1)` when the element is the constant scalar ±1.
    pub fn as_sign(&self) -> Option<i8> {
        Pin2Element::one(self.kind).sign_relative_to(self)
    }

    /// Name of a constant element among ±1, ±e1, ±e2, ±e1e2.
    pub fn constant_name(&self) -> Option<String> {
        let k = self.kind;
        for (name, base) in [("1", Self::one(k)), ("e1", Self::e1(k)), ("e2", Self::e2(k)), ("e1e2", Self::e1e2(k))] {
            match base.sign_relative_to(self) {
                Some(1) => return Some(name.to_string()),
                Some(_) => return Some(format!("-{name}")),
                None => {}
            }
        }
        None
    }

    pub fn evaluate(&self, theta: f64, phi: f64) -> Multivector {
        let t = self.angle.eval(theta, phi);
        let sig = self.kind.signature();
        match self.parity {
            Parity::Even => Multivector::from_terms(sig, [(0, t.cos()), (0b11, t.sin())]),
            Parity::Odd => Multivector::from_terms(sig, [(0b01, t.cos()), (0b10, t.sin())]),
        }
    }
}

impl fmt::Display for Pin2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = self.constant_name() {
            return write!(f, "{name}");
        }
        match self.parity {
            Parity::Even => write!(f, "even({})", self.angle),
            Parity::Odd => write!(f, "odd({})", self.angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum O2Kind {
    Rotation,
    Reflection,
}

/// `rotation(t)`, or `reflection(t)` negating the unit vector at angle t.
#[derive(Debug, Clone, Copy)]
pub struct O2PathElement {
    kind: O2Kind,
    angle: AngleForm,
}

impl O2PathElement {
    pub fn rotation(angle: AngleForm) -> Self {
        O2PathElement { kind: O2Kind::Rotation, angle }
    }

    pub fn reflection(angle: AngleForm) -> Self {
        O2PathElement { kind: O2Kind::Reflection, angle }
    }

    pub fn identity() -> Self {
        Self::rotation(AngleForm::zero())
    }

    /// `j1 = diag(-1, 1)`.
    pub fn j1() -> Self {
        Self::reflection(AngleForm::zero())
    }

    /// `j2 = diag(1, -1)`.
    pub fn j2() -> Self {
        Self::reflection(AngleForm::constant(q(1, 2)))
    }

    pub fn kind(&self) -> O2Kind {
        self.kind
    }

    pub fn angle(&self) -> AngleForm {
        self.angle
    }

    fn period(&self) -> Q {
        match self.kind {
            O2Kind::Rotation => qi(2),
            O2Kind::Reflection => Q::one(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &O2PathElement) -> O2PathElement {
        let (a, b) = (self.angle, other.angle);
        match (self.kind, other.kind) {
            (O2Kind::Rotation, O2Kind::Rotation) => Self::rotation(a + b),
            (O2Kind::Rotation, O2Kind::Reflection) => Self::reflection(b + a.half()),
            (O2Kind::Reflection, O2Kind::Rotation) => Self::reflection(a - b.half()),
            (O2Kind::Reflection, O2Kind::Reflection) => Self::rotation((a - b).scale(qi(2))),
        }
    }

    pub fn inverse(&self) -> O2PathElement {
        match self.kind {
            O2Kind::Rotation => Self::rotation(-self.angle),
            O2Kind::Reflection => *self,
        }
    }

    pub fn substitute(&self, map: &Affine2) -> O2PathElement {
        O2PathElement { kind: self.kind, angle: self.angle.substitute(map) }
    }

    /// Numeric 2x2 matrix at `(θ, φ)`, row-major.
    pub fn matrix(&self, theta: f64, phi: f64) -> [[f64; 2]; 2] {
        let t = self.angle.eval(theta, phi);
        match self.kind {
            O2Kind::Rotation => [[t.cos(), -t.sin()], [t.sin(), t.cos()]],
            O2Kind::Reflection => {
                let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
                [[-c, -s], [-s, c]]
            }
        }
    }
}

impl PartialEq for O2PathElement {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.angle.eq_mod(&other.angle, self.period())
    }
}

impl Eq for O2PathElement {}

impl fmt::Display for O2PathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            O2Kind::Rotation => write!(f, "rotation({})", self.angle),
            O2Kind::Reflection => write!(f, "reflection({})", self.angle),
        }
    }
}

/// The two preimages of `g` under `project`, the second being the negative of the first.
pub fn lift_o2(g: &O2PathElement, kind: PinKind) -> (Pin2Element, Pin2Element) {
    let first = match g.kind {
        O2Kind::Rotation => Pin2Element::rotation_lift(kind, g.angle),
        O2Kind::Reflection => Pin2Element::odd(kind, g.angle),
    };
    (first, first.neg())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(a: Q, b: Q) -> AngleForm {
        AngleForm::new(a, Q::zero(), b)
    }

    #[test]
    fn sphere_products() {
        let l1 = |k| Pin2Element::odd(k, th(qi(1), q(3, 2)));
        let l0 = |k| Pin2Element::odd(k, th(qi(1), q(1, 2)));
        assert_eq!(l1(PinKind::Minus).mul(&l0(PinKind::Minus)).unwrap(), Pin2Element::one(PinKind::Minus));
        assert_eq!(l1(PinKind::Plus).mul(&l0(PinKind::Plus)).unwrap(), Pin2Element::minus_one(PinKind::Plus));
    }

    #[test]
    fn inverse_pair() {
        for k in PinKind::BOTH {
            let s = th(qi(1), q(1, 3));
            let x = Pin2Element::even(k, s);
            assert_eq!(x.mul(&Pin2Element::even(k, -s)).unwrap(), Pin2Element::one(k));
            let y = Pin2Element::odd(k, s);
            assert_eq!(y.mul(&y.inverse()).unwrap(), Pin2Element::one(k));
        }
    }

    #[test]
    fn kind_mismatch() {
        let a = Pin2Element::one(PinKind::Plus);
        let b = Pin2Element::one(PinKind::Minus);
        assert!(matches!(a.mul(&b), Err(Pin2Error::KindMismatch(..))));
    }

    #[test]
    fn projections() {
        let theta = th(qi(1), qi(0));
        let r = Pin2Element::even(PinKind::Minus, theta.half());
        assert_eq!(r.project(), O2PathElement::rotation(theta));
        let r = Pin2Element::even(PinKind::Plus, theta.half());
        assert_eq!(r.project(), O2PathElement::rotation(-theta));
        assert_eq!(Pin2Element::e1(PinKind::Plus).project(), O2PathElement::j1());
        let t = th(q(1, 3), q(1, 5));
        let a = Pin2Element::even(PinKind::Minus, t);
        assert_eq!(a.project(), a.neg().project());
    }

    #[test]
    fn o2_lifts() {
        let refl = O2PathElement::reflection(th(qi(1), q(1, 2)));
        let (a, b) = lift_o2(&refl, PinKind::Minus);
        assert_eq!(a, Pin2Element::odd(PinKind::Minus, th(qi(1), q(1, 2))));
        assert_eq!(b, Pin2Element::odd(PinKind::Minus, th(qi(1), q(3, 2))));
        let (a, b) = lift_o2(&O2PathElement::j2(), PinKind::Plus);
        assert_eq!(a, Pin2Element::e2(PinKind::Plus));
        assert_eq!(b.constant_name().unwrap(), "-e2");
        let (a, _) = lift_o2(&O2PathElement::rotation(th(qi(1), qi(0))), PinKind::Minus);
        assert_eq!(a, Pin2Element::even(PinKind::Minus, th(q(1, 2), qi(0))));
    }

    #[test]
    fn periodicity() {
        let x = Pin2Element::even(PinKind::Minus, th(q(-1, 2), qi(0)));
        assert!(!x.is_periodic(qi(2)));
        assert!(Pin2Element::e2(PinKind::Plus).is_periodic(qi(2)));
        assert!(Pin2Element::even(PinKind::Plus, th(qi(1), qi(0))).is_periodic(qi(2)));
    }

    #[test]
    fn evaluate_constants() {
        for k in PinKind::BOTH {
            let one = Pin2Element::one(k).evaluate(0.7, 0.1);
            assert!(one.approx_eq(&Multivector::scalar(k.signature(), 1.0), 1e-12));
            let e2 = Pin2Element::e2(k).evaluate(1.3, 2.0);
            assert!(e2.approx_eq(&Multivector::basis(k.signature(), 1).unwrap(), 1e-12));
        }
    }

    #[test]
    fn display() {
        let x = Pin2Element::even(PinKind::Minus, th(q(-1, 2), q(3, 2)));
        assert_eq!(x.to_string(), "even(-1/2·θ + 3/2·π)");
        assert_eq!(Pin2Element::e1e2(PinKind::Plus).to_string(), "e1e2");
    }
}
