//! Real Clifford algebras Cl(p,q) with blade-bitmask storage.
//!
//! Blade `mask` has bit `i` set when basis vector `e_{i+1}` is present. The
//! product obeys `vw + wv = 2<v,w>` with `e_i^2 = +1` for the first `p` basis
//! vectors and `-1` for the remaining `q`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance for every floating comparison in this module.
pub const TOL: f64 = 1e-9;

/// Largest supported `p + q`.
pub const MAX_DIM: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(Signature, Signature),
    #[error("signature ({p},{q}) exceeds dimension {max}", max = MAX_DIM)]
    SignatureTooLarge { p: usize, q: usize },
    #[error("multivector is not invertible")]
    NotInvertible,
    #[error("expected a grade-1 multivector")]
    NotAVector,
    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),
    #[error("matrix has size {got}, signature needs {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("lifting needs a definite signature (n,0) or (0,n), got {0}")]
    IndefiniteSignature(Signature),
    #[error("multivector is not a product of unit vectors")]
    NotAVersor,
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self, CliffordError> {
        if p + q > MAX_DIM {
            return Err(CliffordError::SignatureTooLarge { p, q });
        }
        Ok(Signature { p, q })
    }

    /// Signature used for Pin+(n): every basis vector squares to +1.
    pub fn pin_plus(n: usize) -> Result<Self, CliffordError> {
        Self::new(n, 0)
    }

    /// Signature used for Pin-(n): every basis vector squares to -1.
    pub fn pin_minus(n: usize) -> Result<Self, CliffordError> {
        Self::new(0, n)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Square of basis vector with zero-based index `i`.
    pub fn square(&self, i: usize) -> f64 {
        if i < self.p {
            1.0
        } else {
            -1.0
        }
    }

    fn is_definite(&self) -> bool {
        self.p == 0 || self.q == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl({},{})", self.p, self.q)
    }
}

/// Sign picked up when reordering the product of two blades into canonical order.
fn reorder_sign(a: u32, b: u32) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn blade_product(sig: Signature, a: u32, b: u32) -> (u32, f64) {
    let mut sign = reorder_sign(a, b);
    let mut common = a & b;
    while common != 0 {
        let i = common.trailing_zeros() as usize;
        sign *= sig.square(i);
        common &= common - 1;
    }
    (a ^ b, sign)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    sig: Signature,
    coeffs: BTreeMap<u32, f64>,
}

impl Multivector {
    pub fn zero(sig: Signature) -> Self {
        Multivector { sig, coeffs: BTreeMap::new() }
    }

    pub fn scalar(sig: Signature, value: f64) -> Self {
        Self::blade(sig, 0, value)
    }

    pub fn blade(sig: Signature, mask: u32, value: f64) -> Self {
        let mut m = Self::zero(sig);
        m.add_term(mask, value);
        m
    }

    /// Basis vector `e_{index+1}`.
    pub fn basis(sig: Signature, index: usize) -> Result<Self, CliffordError> {
        if index >= sig.dim() {
            return Err(CliffordError::BasisIndex { index, dim: sig.dim() });
        }
        Ok(Self::blade(sig, 1 << index, 1.0))
    }

    pub fn vector(sig: Signature, components: &[f64]) -> Result<Self, CliffordError> {
        if components.len() != sig.dim() {
            return Err(CliffordError::DimensionMismatch { got: components.len(), want: sig.dim() });
        }
        let mut m = Self::zero(sig);
        for (i, &c) in components.iter().enumerate() {
            m.add_term(1 << i, c);
        }
        Ok(m)
    }

    pub fn from_terms(sig: Signature, terms: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut m = Self::zero(sig);
        for (mask, c) in terms {
            m.add_term(mask, c);
        }
        m
    }

    fn add_term(&mut self, mask: u32, value: f64) {
        debug_assert!((mask as u64) < (1u64 << self.sig.dim()));
        if value == 0.0 {
            return;
        }
        let entry = self.coeffs.entry(mask).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeff(0)
    }

    /// Vector components, ignoring other grades.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.sig.dim()).map(|i| self.coeff(1 << i)).collect()
    }

    fn check_sig(&self, other: &Multivector) -> Result<(), CliffordError> {
        if self.sig != other.sig {
            return Err(CliffordError::SignatureMismatch(self.sig, other.sig));
        }
        Ok(())
    }

    pub fn geometric_product(&self, other: &Multivector) -> Result<Multivector, CliffordError> {
        self.check_sig(other)?;
        let mut out = Multivector::zero(self.sig);
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &other.coeffs {
                let (mask, sign) = blade_product(self.sig, a, b);
                out.add_term(mask, sign * ca * cb);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector, CliffordError> {
        self.check_sig(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.coeffs {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Multivector) -> Result<Multivector, CliffordError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Multivector {
        Multivector::from_terms(self.sig, self.terms().map(|(m, c)| (m, k * c)))
    }

    /// Grade involution: negates odd-grade blades.
    pub fn grade_involution(&self) -> Multivector {
        Multivector::from_terms(
            self.sig,
            self.terms().map(|(m, c)| if m.count_ones() % 2 == 1 { (m, -c) } else { (m, c) }),
        )
    }

    /// Reversion: blade of grade k picks up (-1)^{k(k-1)/2}.
    pub fn reverse(&self) -> Multivector {
        Multivector::from_terms(
            self.sig,
            self.terms().map(|(m, c)| {
                let k = m.count_ones();
                if (k * k.saturating_sub(1) / 2) % 2 == 1 {
                    (m, -c)
                } else {
                    (m, c)
                }
            }),
        )
    }

    pub fn grade(&self, k: u32) -> Multivector {
        Multivector::from_terms(self.sig, self.terms().filter(|(m, _)| m.count_ones() == k))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// True when every blade outside grade `k` is below tolerance.
    pub fn is_grade(&self, k: u32) -> bool {
        self.terms().all(|(m, c)| m.count_ones() == k || c.abs() < TOL)
    }

    pub fn approx_eq(&self, other: &Multivector, tol: f64) -> bool {
        match self.sub(other) {
            Ok(d) => d.max_abs() < tol,
            Err(_) => false,
        }
    }

    /// Inverse of a versor-like element, via `x^-1 = reverse(x) / (x reverse(x))`.
    pub fn versor_inverse(&self) -> Result<Multivector, CliffordError> {
        let rev = self.reverse();
        let norm = self.geometric_product(&rev)?;
        let s = norm.scalar_part();
        if s.abs() < TOL || norm.sub(&Multivector::scalar(self.sig, s))?.max_abs() > TOL {
            return Err(CliffordError::NotInvertible);
        }
        Ok(rev.scale(1.0 / s))
    }

    /// Symmetric bilinear form on vectors, `<v,w> = (vw + wv)/2`.
    pub fn inner(&self, other: &Multivector) -> Result<f64, CliffordError> {
        if !self.is_grade(1) || !other.is_grade(1) {
            return Err(CliffordError::NotAVector);
        }
        self.check_sig(other)?;
        Ok((0..self.sig.dim()).map(|i| self.coeff(1 << i) * other.coeff(1 << i) * self.sig.square(i)).sum())
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&mask, &c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            let mut m = mask;
            while m != 0 {
                write!(f, "e{}", m.trailing_zeros() + 1)?;
                m &= m - 1;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_count(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Element of Pin(p,q): a product of unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PinElement {
    value: Multivector,
    parity: Parity,
    factor_count: usize,
}

impl PinElement {
    pub fn identity(sig: Signature) -> Self {
        PinElement { value: Multivector::scalar(sig, 1.0), parity: Parity::Even, factor_count: 0 }
    }

    /// Product `v_1 v_2 ... v_k` of vectors, each normalized to unit length.
    pub fn from_vectors(sig: Signature, vectors: &[Multivector]) -> Result<Self, CliffordError> {
        let mut value = Multivector::scalar(sig, 1.0);
        for v in vectors {
            if !v.is_grade(1) {
                return Err(CliffordError::NotAVector);
            }
            let q = v.inner(v)?;
            if q.abs() < TOL {
                return Err(CliffordError::NotInvertible);
            }
            value = value.geometric_product(&v.scale(1.0 / q.abs().sqrt()))?;
        }
        Ok(PinElement { value, parity: Parity::of_count(vectors.len()), factor_count: vectors.len() })
    }

    /// Checked construction: the twisted adjoint must preserve vectors and
    /// `value * reverse(value)` must be `±1`. A witnessing factorization is
    /// recomputed from the induced orthogonal map.
    pub fn new(value: Multivector) -> Result<Self, CliffordError> {
        let even = value.terms().all(|(m, c)| m.count_ones() % 2 == 0 || c.abs() < TOL);
        let odd = value.terms().all(|(m, c)| m.count_ones() % 2 == 1 || c.abs() < TOL);
        let parity = match (even, odd) {
            (true, _) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => return Err(CliffordError::NotAVersor),
        };
        let norm = value.geometric_product(&value.reverse())?;
        if (norm.scalar_part().abs() - 1.0).abs() > TOL || norm.grade(0).sub(&norm)?.max_abs() > TOL {
            return Err(CliffordError::NotAVersor);
        }
        let probe = PinElement { value, parity, factor_count: 0 };
        let m = probe.orthogonal_matrix()?;
        if m.iter().any(|x| !x.is_finite()) || orthogonality_defect(&m) > TOL {
            return Err(CliffordError::NotAVersor);
        }
        let count = householder_axes(&m).len();
        if Parity::of_count(count) != parity {
            return Err(CliffordError::NotAVersor);
        }
        Ok(PinElement { factor_count: count, ..probe })
    }

    pub fn value(&self) -> &Multivector {
        &self.value
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    pub fn signature(&self) -> Signature {
        self.value.signature()
    }

    pub fn neg(&self) -> PinElement {
        PinElement { value: self.value.scale(-1.0), ..self.clone() }
    }

    pub fn mul(&self, other: &PinElement) -> Result<PinElement, CliffordError> {
        Ok(PinElement {
            value: self.value.geometric_product(&other.value)?,
            parity: if self.parity == other.parity { Parity::Even } else { Parity::Odd },
            factor_count: self.factor_count + other.factor_count,
        })
    }

    /// Matrix of `v -> twisted_adjoint(self, v)` in the standard basis.
    pub fn orthogonal_matrix(&self) -> Result<DMatrix<f64>, CliffordError> {
        let sig = self.signature();
        let n = sig.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let image = twisted_adjoint(self, &Multivector::basis(sig, j)?)?;
            for (i, c) in image.vector_part().into_iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        Ok(m)
    }
}

/// `alpha(u) v u^-1`, where alpha is the grade involution.
pub fn twisted_adjoint(u: &PinElement, v: &Multivector) -> Result<Multivector, CliffordError> {
    if !v.is_grade(1) {
        return Err(CliffordError::NotAVector);
    }
    let inv = u.value.versor_inverse()?;
    let out = u.value.grade_involution().geometric_product(v)?.geometric_product(&inv)?;
    if !out.is_grade(1) {
        return Err(CliffordError::NotAVersor);
    }
    Ok(out.grade(1))
}

fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let prod = m.transpose() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - want).abs());
        }
    }
    worst
}

/// Unit axes `n_1, ..., n_k` with `M = H(n_1) ... H(n_k)`, `H(n) = I - 2 n n^T`.
///
/// Each step fixes the column farthest from its identity column (lowest index
/// on ties) with the reflection sending it there.
fn householder_axes(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut axes = Vec::new();
    for _ in 0..n {
        let mut best = (0usize, 0.0f64);
        for j in 0..n {
            let mut d = a.column(j).clone_owned();
            d[j] -= 1.0;
            let dev = d.norm();
            if dev > best.1 {
                best = (j, dev);
            }
        }
        if best.1 < TOL * 1e-3 {
            break;
        }
        let j = best.0;
        let mut axis = a.column(j).clone_owned();
        axis[j] -= 1.0;
        axis /= axis.norm();
        let h = DMatrix::identity(n, n) - 2.0 * &axis * axis.transpose();
        a = &h * a;
        axes.push(axis);
    }
    axes
}

/// Sign convention: the highest-grade nonzero coefficient (lowest bitmask among
/// blades of that grade) is positive.
fn leading_coefficient(m: &Multivector) -> f64 {
    let mut best: Option<(u32, u32, f64)> = None;
    for (mask, c) in m.terms() {
        if c.abs() < TOL {
            continue;
        }
        let g = mask.count_ones();
        best = match best {
            Some((bg, bm, bc)) if bg > g || (bg == g && bm < mask) => Some((bg, bm, bc)),
            _ => Some((g, mask, c)),
        };
    }
    best.map(|(_, _, c)| c).unwrap_or(0.0)
}

/// The two lifts `u, -u` of an orthogonal matrix to Pin(sig).
pub fn lift_orthogonal(m: &DMatrix<f64>, sig: Signature) -> Result<(PinElement, PinElement), CliffordError> {
    if !sig.is_definite() {
        return Err(CliffordError::IndefiniteSignature(sig));
    }
    if m.nrows() != sig.dim() || m.ncols() != sig.dim() {
        return Err(CliffordError::DimensionMismatch { got: m.nrows().max(m.ncols()), want: sig.dim() });
    }
    let defect = orthogonality_defect(m);
    if defect > TOL {
        return Err(CliffordError::NotOrthogonal(defect));
    }
    let vectors = householder_axes(m)
        .iter()
        .map(|axis| Multivector::vector(sig, axis.as_slice()))
        .collect::<Result<Vec<_>, _>>()?;
    let u = PinElement::from_vectors(sig, &vectors)?;
    let u = if leading_coefficient(&u.value) < 0.0 { u.neg() } else { u };
    let minus = u.neg();
    Ok((u, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FiberGroup {
    Z4,
    Z2xZ2,
}

impl fmt::Display for FiberGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberGroup::Z4 => write!(f, "Z4"),
            FiberGroup::Z2xZ2 => write!(f, "Z2xZ2"),
        }
    }
}

/// Classifies `{±1, ±e1}` from its multiplication table.
pub fn fiber_group_tag(sig: Signature) -> Result<FiberGroup, CliffordError> {
    let one = Multivector::scalar(sig, 1.0);
    let e1 = Multivector::basis(sig, 0)?;
    let elements = [one.clone(), one.scale(-1.0), e1.clone(), e1.scale(-1.0)];
    let index_of = |x: &Multivector| elements.iter().position(|y| y.approx_eq(x, TOL));
    let mut table = [[0usize; 4]; 4];
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            // closure holds for any definite signature
            table[i][j] = index_of(&a.geometric_product(b)?).ok_or(CliffordError::NotAVersor)?;
        }
    }
    let order = |i: usize| {
        let mut acc = i;
        let mut k = 1;
        while acc != 0 {
            acc = table[acc][i];
            k += 1;
        }
        k
    };
    if (0..4).any(|i| order(i) == 4) {
        Ok(FiberGroup::Z4)
    } else {
        Ok(FiberGroup::Z2xZ2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    #[test]
    fn basis_squares_follow_signature() {
        let s = sig(0, 2);
        let e1 = Multivector::basis(s, 0).unwrap();
        assert_eq!(e1.geometric_product(&e1).unwrap(), Multivector::scalar(s, -1.0));
        let s = sig(2, 0);
        let e12 = Multivector::blade(s, 0b11, 1.0);
        let e1 = Multivector::basis(s, 0).unwrap();
        let e2 = Multivector::basis(s, 1).unwrap();
        assert_eq!(e1.geometric_product(&e2).unwrap(), e12);
        assert_eq!(e12.geometric_product(&e12).unwrap(), Multivector::scalar(s, -1.0));
    }

    #[test]
    fn reflection_adjoint() {
        let s = sig(3, 0);
        let e1 = Multivector::basis(s, 0).unwrap();
        let e2 = Multivector::basis(s, 1).unwrap();
        let u = PinElement::from_vectors(s, std::slice::from_ref(&e1)).unwrap();
        assert!(twisted_adjoint(&u, &e1).unwrap().approx_eq(&e1.scale(-1.0), TOL));
        assert!(twisted_adjoint(&u, &e2).unwrap().approx_eq(&e2, TOL));
    }

    #[test]
    fn identity_and_j1_lifts() {
        for s in [sig(3, 0), sig(0, 3)] {
            let (u, v) = lift_orthogonal(&DMatrix::identity(3, 3), s).unwrap();
            assert!(u.value().approx_eq(&Multivector::scalar(s, 1.0), TOL));
            assert!(v.value().approx_eq(&Multivector::scalar(s, -1.0), TOL));
            let mut j1 = DMatrix::identity(3, 3);
            j1[(0, 0)] = -1.0;
            let (u, _) = lift_orthogonal(&j1, s).unwrap();
            assert!(u.value().approx_eq(&Multivector::basis(s, 0).unwrap(), TOL));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let s = sig(2, 0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(lift_orthogonal(&m, s), Err(CliffordError::NotOrthogonal(_))));
        assert!(matches!(lift_orthogonal(&m, sig(1, 1)), Err(CliffordError::IndefiniteSignature(_))));
        assert!(Signature::new(7, 6).is_err());
        let a = Multivector::scalar(sig(1, 0), 1.0);
        let b = Multivector::scalar(sig(0, 1), 1.0);
        assert!(a.geometric_product(&b).is_err());
    }

    #[test]
    fn checked_pin_element() {
        let s = sig(0, 2);
        let t = 0.3f64;
        let r = Multivector::from_terms(s, [(0, t.cos()), (0b11, t.sin())]);
        let u = PinElement::new(r).unwrap();
        assert_eq!(u.parity(), Parity::Even);
        assert_eq!(u.factor_count(), 2);
        let bad = Multivector::from_terms(s, [(0, 1.0), (0b1, 1.0)]);
        assert!(PinElement::new(bad).is_err());
    }

    #[test]
    fn fiber_groups() {
        assert_eq!(fiber_group_tag(sig(0, 2)).unwrap(), FiberGroup::Z4);
        assert_eq!(fiber_group_tag(sig(2, 0)).unwrap(), FiberGroup::Z2xZ2);
        assert_eq!(fiber_group_tag(sig(0, 1)).unwrap(), FiberGroup::Z4);
    }
}
