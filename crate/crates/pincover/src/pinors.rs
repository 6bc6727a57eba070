//! Two-component pinor fields on the flat torus grid and their behaviour under
//! lifted involutions.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::clifford::Parity;
use crate::exact::{q, Q};
use crate::pin2::{Pin2Element, PinKind};
use crate::structures::{lift_involution, Chart, LiftResult, PinStructureDescriptor, StructureError};
use crate::surface::{Involution, SquareGluing};

/// Tolerance for residuals and certificates.
pub const PINOR_TOL: f64 = 1e-9;

/// Default number of grid nodes per side.
pub const DEFAULT_GRID: usize = 32;

pub type Pinor = Vector2<Complex64>;
pub type Gamma = Matrix2<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PinorError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("representation is for {expected}, element is {got}")]
    KindMismatch { expected: PinKind, got: PinKind },
    #[error("pinor fields live on the torus grid")]
    NotOnTorus,
    #[error("{0} has no single-valued lift on this structure")]
    NoLift(String),
    #[error("the lift squares to -1: averaging is not a projection")]
    SquareMinusOne,
    #[error("the {0}x{0} grid is not mapped to itself")]
    GridNotInvariant(usize),
    #[error("grid sizes differ")]
    GridMismatch,
    #[error("field is not invariant (residual {0:e})")]
    NotInvariant(f64),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Complex 2x2 matrices for `e1`, `e2` and the chirality `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    pub kind: PinKind,
    pub gamma1: Gamma,
    pub gamma2: Gamma,
    pub omega: Gamma,
}

impl GammaRep {
    pub fn new(kind: PinKind) -> Self {
        let sx = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let sy = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
        let scale = match kind {
            PinKind::Plus => c(1.0, 0.0),
            PinKind::Minus => c(0.0, 1.0),
        };
        let gamma1 = sx * scale;
        let gamma2 = sy * scale;
        let omega = gamma1 * gamma2 * c(0.0, -1.0);
        GammaRep { kind, gamma1, gamma2, omega }
    }

    /// Matrix of `x` at the point `(θ, φ)` in radians.
    pub fn rep(&self, x: &Pin2Element, theta: f64, phi: f64) -> Result<Gamma, PinorError> {
        if x.kind() != self.kind {
            return Err(PinorError::KindMismatch { expected: self.kind, got: x.kind() });
        }
        let t = x.angle().eval(theta, phi);
        let (cos, sin) = (c(t.cos(), 0.0), c(t.sin(), 0.0));
        Ok(match x.parity() {
            Parity::Even => Gamma::identity() * cos + self.gamma1 * self.gamma2 * sin,
            Parity::Odd => self.gamma1 * cos + self.gamma2 * sin,
        })
    }

    /// Projector onto chirality `±1`.
    pub fn chirality_projector(&self, positive: bool) -> Gamma {
        let s = if positive { 0.5 } else { -0.5 };
        Gamma::identity() * c(0.5, 0.0) + self.omega * c(s, 0.0)
    }
}

/// Values on the `n x n` grid with nodes at `(2πi/n, 2πj/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinorField {
    n: usize,
    values: Vec<Pinor>,
}

impl PinorField {
    pub fn zeros(n: usize) -> Self {
        PinorField { n, values: vec![Pinor::zeros(); n * n] }
    }

    pub fn constant(n: usize, v: Pinor) -> Self {
        PinorField { n, values: vec![v; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> Pinor) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (theta, phi) = node_angles(n, i, j);
                values.push(f(theta, phi));
            }
        }
        PinorField { n, values }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        PinorField { n, values: (0..n * n).map(|_| Pinor::new(draw(), draw())).collect() }
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Pinor] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Pinor {
        self.values[i * self.n + j]
    }

    pub fn map(&self, mut f: impl FnMut(usize, &Pinor) -> Pinor) -> Self {
        PinorField { n: self.n, values: self.values.iter().enumerate().map(|(k, v)| f(k, v)).collect() }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        self.map(|_, v| v * k)
    }

    pub fn add(&self, other: &PinorField) -> Result<Self, PinorError> {
        if self.n != other.n {
            return Err(PinorError::GridMismatch);
        }
        Ok(self.map(|k, v| v + other.values[k]))
    }

    pub fn sub(&self, other: &PinorField) -> Result<Self, PinorError> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    /// Largest Euclidean norm over nodes.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `Σ_x ⟨self(x), other(x)⟩`.
    pub fn inner(&self, other: &PinorField) -> Result<Complex64, PinorError> {
        if self.n != other.n {
            return Err(PinorError::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.dotc(b)).sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum()
    }
}

fn node(n: usize, i: usize, j: usize) -> [Q; 2] {
    [q(2 * i as i64, n as i64), q(2 * j as i64, n as i64)]
}

fn node_angles(n: usize, i: usize, j: usize) -> (f64, f64) {
    (2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64)
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Precomputed action `s ↦ (x ↦ rep(L(τx))·s(τx))` on a grid.
#[derive(Debug, Clone)]
pub struct LiftedAction {
    pub lift: LiftResult,
    pub rep: GammaRep,
    n: usize,
    image: Vec<usize>,
    matrices: Vec<Gamma>,
}

impl LiftedAction {
    pub fn new(xi: &PinStructureDescriptor, tau: &Involution, n: usize) -> Result<Self, PinorError> {
        if xi.chart != Chart::Torus {
            return Err(PinorError::NotOnTorus);
        }
        let lift = lift_involution(xi, tau)?;
        if !lift.exists {
            return Err(PinorError::NoLift(tau.name.clone()));
        }
        let rep = GammaRep::new(xi.kind);
        let mut image = Vec::with_capacity(n * n);
        let mut matrices = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let p = tau.apply(node(n, i, j)).ok_or(PinorError::NotOnTorus)?;
                let p = SquareGluing::Torus.normalize(p).ok_or(PinorError::NotOnTorus)?;
                let half = q(n as i64, 2);
                let (ti, tj) = (p[0] * half, p[1] * half);
                if !ti.is_integer() || !tj.is_integer() {
                    return Err(PinorError::GridNotInvariant(n));
                }
                image.push((ti.to_integer() as usize) * n + tj.to_integer() as usize);
                let (theta, phi) = (PI * to_f64(p[0]), PI * to_f64(p[1]));
                matrices.push(rep.rep(&lift.lift, theta, phi)?);
            }
        }
        Ok(LiftedAction { lift, rep, n, image, matrices })
    }

    pub fn square(&self) -> i8 {
        self.lift.square
    }

    /// `x ↦ sign·rep(L(τx))·s(τx)`.
    pub fn apply(&self, s: &PinorField, sign: i8) -> Result<PinorField, PinorError> {
        if s.n != self.n {
            return Err(PinorError::GridMismatch);
        }
        let k = c(f64::from(sign), 0.0);
        Ok(s.map(|x, _| self.matrices[x] * s.values[self.image[x]] * k))
    }

    pub fn residual(&self, s: &PinorField, sign: i8) -> Result<f64, PinorError> {
        Ok(s.sub(&self.apply(s, sign)?)?.max_norm())
    }

    pub fn project(&self, s: &PinorField, sign: i8) -> Result<PinorField, PinorError> {
        if self.square() != 1 {
            return Err(PinorError::SquareMinusOne);
        }
        Ok(s.add(&self.apply(s, sign)?)?.scale(c(0.5, 0.0)))
    }
}

pub fn invariance_residual(
    s: &PinorField,
    xi: &PinStructureDescriptor,
    tau: &Involution,
    sign: i8,
) -> Result<f64, PinorError> {
    LiftedAction::new(xi, tau, s.grid())?.residual(s, sign)
}

pub fn project_invariant(
    s: &PinorField,
    xi: &PinStructureDescriptor,
    tau: &Involution,
    sign: i8,
) -> Result<PinorField, PinorError> {
    LiftedAction::new(xi, tau, s.grid())?.project(s, sign)
}

/// Which chirality is called positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Standard,
    Opposite,
}

#[derive(Debug, Clone)]
pub struct SpinorCouple {
    pub plus: PinorField,
    pub minus: PinorField,
    pub orientation: Orientation,
    /// `max |s⁻(x) - sign·rep(L(τx))·s⁺(τx)|`.
    pub certificate_residual: f64,
    /// `max |ω s± ∓ s±|` with ω replaced by -ω for the opposite orientation.
    pub chirality_residual: f64,
}

impl SpinorCouple {
    pub fn recombine(&self) -> PinorField {
        self.plus.add(&self.minus).expect("same grid")
    }

    pub fn certified(&self) -> bool {
        self.certificate_residual < PINOR_TOL && self.chirality_residual < PINOR_TOL
    }
}

/// Splits an invariant pinor field into a couple of chiral fields exchanged by the lift.
pub fn couple_split(
    s: &PinorField,
    xi: &PinStructureDescriptor,
    tau: &Involution,
    sign: i8,
    orientation: Orientation,
) -> Result<SpinorCouple, PinorError> {
    let action = LiftedAction::new(xi, tau, s.grid())?;
    if action.square() != 1 {
        return Err(PinorError::SquareMinusOne);
    }
    let residual = action.residual(s, sign)?;
    if residual > PINOR_TOL {
        return Err(PinorError::NotInvariant(residual));
    }
    let positive = orientation == Orientation::Standard;
    let p_plus = action.rep.chirality_projector(positive);
    let p_minus = action.rep.chirality_projector(!positive);
    let plus = s.map(|_, v| p_plus * v);
    let minus = s.map(|_, v| p_minus * v);
    let certificate_residual = minus.sub(&action.apply(&plus, sign)?)?.max_norm();
    let omega = if positive { action.rep.omega } else { -action.rep.omega };
    let chirality_residual = plus
        .values
        .iter()
        .map(|v| (omega * v - v).norm())
        .chain(minus.values.iter().map(|v| (omega * v + v).norm()))
        .fold(0.0, f64::max);
    Ok(SpinorCouple { plus, minus, orientation, certificate_residual, chirality_residual })
}
