//! Pin± structures on the flat torus, the cylinder and the sphere; lifts of
//! involutions to the pin bundle; descent to quotients; gluing along boundaries.
//!
//! A structure on a flat model is the trivial bundle whose frame map is twisted
//! by `R_w` with `w = aθ + bφ`. Coordinates are those of the torus square; the
//! cylinder is its half `0 ≤ θ ≤ π`.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::characteristic::obstructions;
use crate::exact::{qi, Affine2, Q};
use crate::homology::b1_mod2;
use crate::pin2::{lift_o2, AngleForm, Coord, O2PathElement, Pin2Element, PinKind};
use crate::surface::{
    cover_diagram, jacobian_path, orientation_double_cover, tau3, tau4, Family, Involution, InvolutionMap,
    RelationCheck, SquareGluing, SurfaceError, SurfaceModel,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("{0} carries only counting data; no explicit structures are built")]
    CountOnly(String),
    #[error("{0} is non-orientable: its structures are quotients, see `descend`")]
    QuotientOnly(String),
    #[error("structures live on different surfaces or kinds")]
    Incompatible,
    #[error("{0} does not act on the coordinates of {1}")]
    WrongDomain(String, String),
    #[error("expected {expected} boundary tags, got {got}")]
    TagCount { expected: usize, got: usize },
    #[error("{0} has no boundary")]
    NoBoundary(String),
}

/// Where a descriptor's coordinates live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    /// `(θ, φ)` on the torus, both periodic.
    Torus,
    /// `(θ, φ)` with `0 ≤ θ ≤ π`, φ periodic.
    Cylinder,
    /// The equator `θ` of the two-disc sphere.
    SphereEquator,
}

impl Chart {
    /// Coordinate shifts (in units of π) generating the deck group of the chart.
    pub fn periods(self) -> Vec<(Coord, Q)> {
        match self {
            Chart::Torus => vec![(Coord::Theta, qi(2)), (Coord::Phi, qi(2))],
            Chart::Cylinder => vec![(Coord::Phi, qi(2))],
            Chart::SphereEquator => vec![(Coord::Theta, qi(2))],
        }
    }

    pub fn family(self) -> Family {
        match self {
            Chart::Torus => Family::Torus,
            Chart::Cylinder => Family::Cylinder,
            Chart::SphereEquator => Family::Sphere,
        }
    }
}

/// Isomorphism used to glue two boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryTag {
    Identity,
    Gamma,
}

impl BoundaryTag {
    fn sign(self) -> i8 {
        match self {
            BoundaryTag::Identity => 1,
            BoundaryTag::Gamma => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PinStructureDescriptor {
    pub chart: Chart,
    pub kind: PinKind,
    /// Twist coefficients `(a, b)` of `R_{aθ + bφ}`.
    pub twist: (i64, i64),
}

impl PinStructureDescriptor {
    pub fn new(chart: Chart, kind: PinKind, twist: (i64, i64)) -> Self {
        PinStructureDescriptor { chart, kind, twist }
    }

    pub fn torus(kind: PinKind, index: u8) -> Self {
        Self::new(Chart::Torus, kind, (i64::from(index & 1), i64::from(index >> 1)))
    }

    pub fn cylinder(kind: PinKind, index: u8) -> Self {
        Self::new(Chart::Cylinder, kind, (i64::from(index & 1), i64::from(index >> 1)))
    }

    pub fn sphere(kind: PinKind) -> Self {
        Self::new(Chart::SphereEquator, kind, (0, 0))
    }

    pub fn twist_form(&self) -> AngleForm {
        AngleForm::new(qi(self.twist.0), qi(self.twist.1), Q::zero())
    }

    pub fn label(&self) -> String {
        match self.chart {
            Chart::SphereEquator => "xi".into(),
            _ => format!("xi{}", self.twist.0.rem_euclid(2) + 2 * self.twist.1.rem_euclid(2)),
        }
    }

    pub fn surface(&self) -> SurfaceModel {
        SurfaceModel::build(self.chart.family()).expect("chart families build")
    }
}

impl fmt::Display for PinStructureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {} ({})", self.label(), self.chart.family(), self.kind)
    }
}

/// Structures built explicitly on a model: four on the torus, the untwisted and
/// θ-twisted ones on the cylinder, and the single clutching structure on the sphere.
pub fn enumerate(x: &SurfaceModel, kind: PinKind) -> Result<Vec<PinStructureDescriptor>, StructureError> {
    match x.family {
        Family::Torus => Ok((0..4).map(|i| PinStructureDescriptor::torus(kind, i)).collect()),
        Family::Cylinder => Ok((0..2).map(|i| PinStructureDescriptor::cylinder(kind, i)).collect()),
        Family::Sphere => Ok(vec![PinStructureDescriptor::sphere(kind)]),
        _ if !x.is_geometric() => Err(StructureError::CountOnly(x.name())),
        _ if !x.orientable => Err(StructureError::QuotientOnly(x.name())),
        _ => Err(StructureError::CountOnly(x.name())),
    }
}

/// Every twist class on a chart, one descriptor per equivalence class.
pub fn class_representatives(chart: Chart, kind: PinKind) -> Vec<PinStructureDescriptor> {
    let all: Vec<PinStructureDescriptor> = match chart {
        Chart::SphereEquator => vec![PinStructureDescriptor::sphere(kind)],
        _ => (0..4).map(|i| PinStructureDescriptor::new(chart, kind, (i & 1, i >> 1))).collect(),
    };
    let mut reps: Vec<PinStructureDescriptor> = Vec::new();
    for s in all {
        if !reps.iter().any(|r| are_equivalent(r, &s).unwrap_or(false)) {
            reps.push(s);
        }
    }
    reps
}

/// The path `ρ = R̃_{w - w'}` intertwining the two twisted frame maps.
pub fn intertwiner(xi: &PinStructureDescriptor, other: &PinStructureDescriptor) -> Result<Pin2Element, StructureError> {
    if xi.chart != other.chart || xi.kind != other.kind {
        return Err(StructureError::Incompatible);
    }
    Ok(Pin2Element::rotation_lift(xi.kind, xi.twist_form() - other.twist_form()))
}

/// Equivalent iff the intertwiner is single valued on the chart.
pub fn are_equivalent(xi: &PinStructureDescriptor, other: &PinStructureDescriptor) -> Result<bool, StructureError> {
    let rho = intertwiner(xi, other)?;
    Ok(xi.chart.periods().into_iter().all(|(c, shift)| rho.is_periodic_in(c, shift)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftResult {
    pub structure: String,
    pub involution: String,
    pub kind: PinKind,
    pub exists: bool,
    /// Canonical lift `L(θ, φ)` (constant term in `[0, π)`); the other lift is `-L`.
    #[serde(serialize_with = "display")]
    pub lift: Pin2Element,
    /// `L(τx)·L(x)`, exactly ±1.
    pub square: i8,
    /// `-L` solves the same equation and has the same square.
    pub both_lifts_related_by_gamma: bool,
    /// `project(L)` equals the twisted differential of τ.
    pub projection_matches: bool,
}

fn display<T: fmt::Display, S: serde::Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn canonical(x: Pin2Element) -> Pin2Element {
    if x.angle().pi >= Q::from_integer(1) {
        x.neg()
    } else {
        x
    }
}

/// Affine action of τ on the descriptor's coordinates.
fn coordinate_map(xi: &PinStructureDescriptor, tau: &Involution) -> Result<Affine2, StructureError> {
    match (&tau.map, xi.chart) {
        (InvolutionMap::Affine { map, domain: SquareGluing::Torus }, Chart::Torus | Chart::Cylinder) => Ok(*map),
        (InvolutionMap::Antipodal, Chart::SphereEquator) => Ok(Affine2::translation(qi(1), Q::zero())),
        _ => Err(StructureError::WrongDomain(tau.name.clone(), xi.chart.family().label())),
    }
}

/// Solves `project(L(x)) = R_{w(τx)}⁻¹ ∘ dτ ∘ R_{w(x)}` and squares the solution.
pub fn lift_involution(xi: &PinStructureDescriptor, tau: &Involution) -> Result<LiftResult, StructureError> {
    let map = coordinate_map(xi, tau)?;
    let k = xi.kind;
    let dtau = jacobian_path(tau)?;
    let w = xi.twist_form();
    let w_image = w.substitute(&map);
    let (first, _) = lift_o2(&dtau, k);
    let lift =
        Pin2Element::product(&[Pin2Element::rotation_lift(k, -w_image), first, Pin2Element::rotation_lift(k, w)])
            .expect("same kind throughout");
    let target = O2PathElement::rotation(-w_image).compose(&dtau).compose(&O2PathElement::rotation(w));
    let exists = xi.chart.periods().into_iter().all(|(c, shift)| lift.is_periodic_in(c, shift));
    let square_of = |l: &Pin2Element| l.substitute(&map).mul(l).expect("same kind").as_sign();
    let square = square_of(&lift).expect("the square of a lift is a constant sign");
    let other = lift.neg();
    Ok(LiftResult {
        structure: xi.label(),
        involution: tau.name.clone(),
        kind: k,
        exists,
        lift: canonical(lift),
        square,
        both_lifts_related_by_gamma: other.project() == lift.project() && square_of(&other) == Some(square),
        projection_matches: lift.project() == target,
    })
}

/// One of the two quotient structures over a τ-invariant structure with `L² = 1`:
/// `P/L` (sign +1) or `P/(L∘γ)` (sign -1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientLabel {
    pub upstairs: PinStructureDescriptor,
    pub sign: i8,
    pub label: String,
}

impl QuotientLabel {
    /// The structure this quotient pulls back to.
    pub fn pull_back(&self) -> PinStructureDescriptor {
        self.upstairs.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescentEntry {
    pub structure: String,
    pub lift_exists: bool,
    pub square: i8,
    pub qualifies: bool,
    pub quotients: Vec<QuotientLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescentReport {
    pub base: String,
    pub cover: String,
    pub kind: PinKind,
    pub involution: String,
    /// No explicit cover structures: counts come from the characteristic classes alone.
    pub count_only: bool,
    pub entries: Vec<DescentEntry>,
    pub qualifying: usize,
    pub predicted_count: u64,
    pub torsor_count: u64,
    pub consistent: Option<bool>,
}

/// `2^{dim H¹(X, Z₂)}` when a structure of the given kind exists, otherwise 0.
pub fn torsor_count(x: &SurfaceModel, kind: PinKind) -> u64 {
    if x.is_closed() {
        let r = obstructions(x).expect("closed surfaces have obstruction reports");
        match kind {
            PinKind::Plus => r.count_pin_plus,
            PinKind::Minus => r.count_pin_minus,
        }
    } else {
        1 << b1_mod2(x)
    }
}

/// Descends the given cover structures along τ, one entry per structure.
pub fn descend_structures(
    base: &SurfaceModel,
    cover_structures: &[PinStructureDescriptor],
    tau: &Involution,
    kind: PinKind,
) -> Result<DescentReport, StructureError> {
    let mut entries = Vec::new();
    for xi in cover_structures {
        let r = lift_involution(xi, tau)?;
        let qualifies = r.exists && r.square == 1;
        let quotients = if qualifies {
            [(1, format!("{}/dtau", xi.label())), (-1, format!("{}/(dtau*gamma)", xi.label()))]
                .into_iter()
                .map(|(sign, label)| QuotientLabel { upstairs: xi.clone(), sign, label })
                .collect()
        } else {
            Vec::new()
        };
        entries.push(DescentEntry {
            structure: xi.label(),
            lift_exists: r.exists,
            square: r.square,
            qualifies,
            quotients,
        });
    }
    let qualifying = entries.iter().filter(|e| e.qualifies).count();
    let predicted = 2 * qualifying as u64;
    let torsor = torsor_count(base, kind);
    let cover = cover_structures.first().map(|s| s.chart.family().label()).unwrap_or_default();
    Ok(DescentReport {
        base: base.name(),
        cover,
        kind,
        involution: tau.name.clone(),
        count_only: false,
        entries,
        qualifying,
        predicted_count: predicted,
        torsor_count: torsor,
        consistent: Some(predicted == torsor),
    })
}

/// Structures on a non-orientable surface as quotients of its orientation cover.
pub fn descend(x: &SurfaceModel, kind: PinKind) -> Result<DescentReport, StructureError> {
    let cover = orientation_double_cover(x)?;
    let (chart, tau) = match x.family {
        Family::Klein => (Chart::Torus, cover.deck.clone()),
        Family::ProjectivePlane => (Chart::SphereEquator, cover.deck.clone()),
        Family::Moebius => (Chart::Cylinder, tau4()),
        _ => {
            let torsor = torsor_count(x, kind);
            return Ok(DescentReport {
                base: x.name(),
                cover: cover.cover.name(),
                kind,
                involution: cover.deck.name.clone(),
                count_only: true,
                entries: Vec::new(),
                qualifying: (torsor / 2) as usize,
                predicted_count: torsor,
                torsor_count: torsor,
                consistent: None,
            });
        }
    };
    descend_structures(x, &class_representatives(chart, kind), &tau, kind)
}

/// Glues two copies of a cylinder structure into a torus structure. Each boundary
/// circle is identified by continuing the embedded boundary frame lifts, composed with
/// the tag; relative to the restricted lift of `dτ3` the seam at `θ_c` carries the
/// sign of `R̃_{-2α(θ_c)}`, with `α` the turning of the outward normal.
pub fn double_structure(
    xi: &PinStructureDescriptor,
    tags: &[BoundaryTag],
) -> Result<PinStructureDescriptor, StructureError> {
    if xi.chart != Chart::Cylinder {
        return Err(StructureError::NoBoundary(xi.chart.family().label()));
    }
    if tags.len() != 2 {
        return Err(StructureError::TagCount { expected: 2, got: tags.len() });
    }
    let seams = [Q::zero(), qi(1)].map(|alpha| {
        Pin2Element::rotation_lift(xi.kind, AngleForm::constant(-qi(2) * alpha))
            .as_sign()
            .expect("seam comparison is a constant sign")
    });
    let product: i8 = seams.iter().zip(tags).map(|(s, t)| s * t.sign()).product();
    let flip = i64::from(product == -1);
    Ok(PinStructureDescriptor::new(Chart::Torus, xi.kind, ((xi.twist.0 + flip).rem_euclid(2), xi.twist.1)))
}

/// Glues two copies by the restricted lift of `dτ3` itself: the double is the
/// structure whose restriction was taken.
pub fn double_along_reflection(xi: &PinStructureDescriptor) -> Result<PinStructureDescriptor, StructureError> {
    if xi.chart != Chart::Cylinder {
        return Err(StructureError::NoBoundary(xi.chart.family().label()));
    }
    Ok(PinStructureDescriptor::new(Chart::Torus, xi.kind, (xi.twist.0.rem_euclid(2), xi.twist.1.rem_euclid(2))))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryRow {
    pub structure: String,
    /// Lift of the embedded frame at θ = 0, up to sign.
    pub at_zero: String,
    /// Lift of the embedded frame at θ = π, up to sign.
    pub at_pi: String,
}

fn at_theta(x: &Pin2Element, theta: Q) -> Pin2Element {
    x.substitute(&Affine2 { m: [[Q::zero(), Q::zero()], [Q::zero(), qi(1)]], c: [theta, Q::zero()] })
}

fn up_to_sign(x: &Pin2Element) -> String {
    let name = x.constant_name().unwrap_or_else(|| x.to_string());
    format!("±{}", name.trim_start_matches('-'))
}

/// Frame lift `R̃_{α - aθ}` of ξ_a and `R̃_{aθ - α}·e1` of its τ3 pullback, at the
/// two boundary circles of the cylinder (α = 0 at θ = 0 and π at θ = π).
pub fn boundary_lift_table(kind: PinKind) -> Vec<BoundaryRow> {
    let theta = AngleForm::theta(qi(1));
    let alpha = |c: Q| AngleForm::constant(c);
    let mut rows = Vec::new();
    for a in 0..2 {
        let w = theta.scale(qi(a));
        let own = |c: Q| at_theta(&Pin2Element::rotation_lift(kind, alpha(c) - w), c);
        rows.push(BoundaryRow {
            structure: format!("xi{a}"),
            at_zero: up_to_sign(&own(Q::zero())),
            at_pi: up_to_sign(&own(qi(1))),
        });
    }
    for a in 0..2 {
        let w = theta.scale(qi(a));
        let pulled = |c: Q| {
            let x = Pin2Element::rotation_lift(kind, w - alpha(c)).mul(&Pin2Element::e1(kind)).expect("same kind");
            at_theta(&x, c)
        };
        rows.push(BoundaryRow {
            structure: format!("tau3*xi{a}"),
            at_zero: up_to_sign(&pulled(Q::zero())),
            at_pi: up_to_sign(&pulled(qi(1))),
        });
    }
    rows
}

/// `ρ = R̃_{-θ}` against its τ3 pushforward `R̃_θ` at the boundary circles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoncommutationWitness {
    pub sign_at_zero: i8,
    pub sign_at_pi: i8,
}

pub fn noncommutation_witness(kind: PinKind) -> NoncommutationWitness {
    let rho = Pin2Element::rotation_lift(kind, AngleForm::theta(qi(-1)));
    let (t3, _) = tau3().affine_map().expect("affine");
    let pushed = rho.substitute(&t3);
    let sign = |c: Q| at_theta(&rho, c).sign_relative_to(&at_theta(&pushed, c)).expect("same up to sign");
    NoncommutationWitness { sign_at_zero: sign(Q::zero()), sign_at_pi: sign(qi(1)) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoebiusRow {
    pub structure: String,
    pub kind: PinKind,
    pub tau4_square: i8,
    pub tau3_lift_exists: bool,
    pub tau3_square: i8,
    pub descends: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleRow {
    pub structure: String,
    pub kind: PinKind,
    pub tags: [BoundaryTag; 2],
    pub double: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoebiusReport {
    pub relations: Vec<RelationCheck>,
    pub quotient_oriented: bool,
    pub rows: Vec<MoebiusRow>,
    pub boundary_table: Vec<(PinKind, Vec<BoundaryRow>)>,
    pub noncommutation: Vec<(PinKind, NoncommutationWitness)>,
    pub doubles: Vec<DoubleRow>,
    pub descent: Vec<DescentReport>,
}

/// Grid resolution used for the diagram relations in the Möbius report.
pub const DIAGRAM_GRID: i64 = 64;

pub fn moebius_descent() -> MoebiusReport {
    let m2 = SurfaceModel::build(Family::Moebius).expect("Möbius strip builds");
    let diagram = cover_diagram(&m2).expect("Möbius diagram exists");
    let mut rows = Vec::new();
    for kind in PinKind::BOTH {
        for index in 0..3 {
            let xi = PinStructureDescriptor::torus(kind, index);
            let l4 = lift_involution(&xi, &diagram.tau4).expect("τ4 acts on the torus");
            let l3 = lift_involution(&xi, &diagram.tau3).expect("τ3 acts on the torus");
            rows.push(MoebiusRow {
                structure: xi.label(),
                kind,
                tau4_square: l4.square,
                tau3_lift_exists: l3.exists,
                tau3_square: l3.square,
                descends: l4.exists && l4.square == 1 && l3.exists,
            });
        }
    }
    let mut doubles = Vec::new();
    for kind in PinKind::BOTH {
        for xi in enumerate(&diagram.x_cover, kind).expect("cylinder structures") {
            for tags in [
                [BoundaryTag::Identity, BoundaryTag::Identity],
                [BoundaryTag::Gamma, BoundaryTag::Identity],
                [BoundaryTag::Gamma, BoundaryTag::Gamma],
            ] {
                let d = double_structure(&xi, &tags).expect("two boundary circles");
                doubles.push(DoubleRow { structure: xi.label(), kind, tags, double: d.label() });
            }
        }
    }
    MoebiusReport {
        relations: diagram.verify(DIAGRAM_GRID),
        quotient_oriented: diagram.quotient_is_oriented(),
        rows,
        boundary_table: PinKind::BOTH.iter().map(|&k| (k, boundary_lift_table(k))).collect(),
        noncommutation: PinKind::BOTH.iter().map(|&k| (k, noncommutation_witness(k))).collect(),
        doubles,
        descent: PinKind::BOTH.iter().map(|&k| descend(&m2, k).expect("Möbius descent")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::klein_deck;

    #[test]
    fn torus_equivalences() {
        let k = PinKind::Minus;
        let xs: Vec<_> = (0..4).map(|i| PinStructureDescriptor::torus(k, i)).collect();
        assert!(!are_equivalent(&xs[0], &xs[1]).unwrap());
        assert!(are_equivalent(&xs[0], &xs[0]).unwrap());
        assert_eq!(class_representatives(Chart::Torus, k).len(), 4);
        let c0 = PinStructureDescriptor::cylinder(k, 0);
        let c1 = PinStructureDescriptor::cylinder(k, 1);
        assert!(are_equivalent(&c0, &c1).unwrap());
        assert_eq!(class_representatives(Chart::Cylinder, k).len(), 2);
    }

    #[test]
    fn klein_deck_squares() {
        let tau = klein_deck();
        let sq = |kind, i| lift_involution(&PinStructureDescriptor::torus(kind, i), &tau).unwrap().square;
        assert_eq!(sq(PinKind::Plus, 0), 1);
        assert_eq!(sq(PinKind::Minus, 1), 1);
        assert_eq!(sq(PinKind::Plus, 1), -1);
    }

    #[test]
    fn sphere_square() {
        let tau = Involution::antipodal();
        let r = lift_involution(&PinStructureDescriptor::sphere(PinKind::Minus), &tau).unwrap();
        assert_eq!(r.square, 1);
        assert!(r.exists && r.projection_matches);
        let r = lift_involution(&PinStructureDescriptor::sphere(PinKind::Plus), &tau).unwrap();
        assert_eq!(r.square, -1);
    }

    #[test]
    fn doubling_flips_theta_twist() {
        for k in PinKind::BOTH {
            let id = [BoundaryTag::Identity, BoundaryTag::Identity];
            let gg = [BoundaryTag::Gamma, BoundaryTag::Gamma];
            let x1 = PinStructureDescriptor::cylinder(k, 1);
            let x0 = PinStructureDescriptor::cylinder(k, 0);
            assert_eq!(double_structure(&x1, &id).unwrap().label(), "xi0");
            assert_eq!(double_structure(&x0, &id).unwrap().label(), "xi1");
            assert_eq!(double_structure(&x0, &gg).unwrap(), double_structure(&x0, &id).unwrap());
            assert!(double_structure(&x0, &id[..1]).is_err());
        }
    }
}
