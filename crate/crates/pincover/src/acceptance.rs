//! The acceptance suite: ten exact or seeded checks of the library against its
//! reference tables, shared by the `acceptance` test target and `pincover verify`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characteristic::w1;
use crate::clifford::{
    fiber_group_tag, lift_orthogonal, twisted_adjoint, FiberGroup, Multivector, PinElement, Signature,
};
use crate::exact::q;
use crate::homology::{homology, induced_maps, Coefficients, GroupSummary, IntMatrix};
use crate::pin2::{AngleForm, Pin2Element, PinKind};
use crate::pinors::{couple_split, LiftedAction, Orientation, PinorField};
use crate::structures::{
    boundary_lift_table, descend, double_structure, lift_involution, noncommutation_witness, torsor_count, BoundaryTag,
    PinStructureDescriptor,
};
use crate::surface::{cover_diagram, klein_deck, orientation_double_cover, tau4, Family, Involution, SurfaceModel};

/// Numeric tolerance for every floating-point criterion.
pub const TOLERANCE: f64 = 1e-9;
/// Side of the rational grid used for the cover-diagram relations.
pub const RELATION_GRID: i64 = 64;
/// Pinor grid side used by the property suite.
pub const PINOR_GRID: usize = 16;
pub const DEFAULT_SEED: u64 = 0x5eed;

pub const CLIFFORD_CASES: usize = 200;
pub const LIFT_CASES: usize = 100;
pub const PIN2_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub grid: usize,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { seed: DEFAULT_SEED, tolerance: TOLERANCE, grid: PINOR_GRID }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: String,
    pub anchor: String,
    pub passed: bool,
    /// Failures, or a one-line summary of what was checked.
    pub detail: String,
}

impl Criterion {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("[{verdict}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

/// Collects failures for one criterion.
struct Check {
    failures: Vec<String>,
    checked: usize,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), checked: 0 }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, id: u8, name: &str, anchor: &str) -> Criterion {
        let passed = self.failures.is_empty();
        let detail = if passed {
            format!("{} checks", self.checked)
        } else {
            format!("{} of {} failed: {}", self.failures.len(), self.checked, self.failures.join("; "))
        };
        Criterion { id, name: name.to_string(), anchor: anchor.to_string(), passed, detail }
    }
}

pub fn run(config: &AcceptanceConfig) -> Vec<Criterion> {
    vec![
        fiber_groups(),
        sphere_and_projective_plane(),
        klein_table(),
        moebius_table(),
        boundary_table(),
        cylinder_classes(),
        homology_groups(),
        splitting(),
        relations(),
        property_suites(config),
    ]
}

pub fn all_passed(results: &[Criterion]) -> bool {
    results.iter().all(|c| c.passed)
}

fn surface(name: &str) -> SurfaceModel {
    SurfaceModel::parse(name).expect("built-in surface name")
}

fn fiber_groups() -> Criterion {
    let mut c = Check::new();
    for n in 1..=6 {
        for (kind, want) in [(PinKind::Minus, FiberGroup::Z4), (PinKind::Plus, FiberGroup::Z2xZ2)] {
            let sig = match kind {
                PinKind::Plus => Signature::pin_plus(n),
                PinKind::Minus => Signature::pin_minus(n),
            }
            .expect("n ≤ 6");
            let got = fiber_group_tag(sig);
            c.expect(got.as_ref() == Ok(&want), || format!("{kind} n={n}: {got:?}"));
        }
    }
    c.finish(1, "fiber group of ±1, ±e1", "Pin±(n) fibers")
}

fn sphere_and_projective_plane() -> Criterion {
    let mut c = Check::new();
    for (kind, want) in [(PinKind::Plus, -1), (PinKind::Minus, 1)] {
        let got = lift_involution(&PinStructureDescriptor::sphere(kind), &Involution::antipodal()).map(|r| r.square);
        c.expect(got == Ok(want), || format!("S2 {kind} square {got:?}"));
    }
    for (kind, want) in [(PinKind::Minus, 2), (PinKind::Plus, 0)] {
        let got = descend(&surface("rp2"), kind).map(|r| (r.predicted_count, r.consistent));
        c.expect(got == Ok((want, Some(true))), || format!("RP2 {kind} count {got:?}"));
    }
    c.finish(2, "antipodal lift on S2 and descent to RP2", "sphere and RP2")
}

fn klein_table() -> Criterion {
    let mut c = Check::new();
    let table = [(PinKind::Plus, [1, -1, 1, -1]), (PinKind::Minus, [-1, 1, -1, 1])];
    for (kind, want) in table {
        for (i, w) in want.iter().enumerate() {
            let xi = PinStructureDescriptor::torus(kind, i as u8);
            let got = lift_involution(&xi, &klein_deck()).map(|r| r.square);
            c.expect(got == Ok(*w), || format!("{kind} xi{i}: {got:?}"));
        }
        let k2 = surface("k2");
        let torsor = 1u64 << crate::homology::b1_mod2(&k2);
        let got = descend(&k2, kind).map(|r| (r.predicted_count, r.torsor_count));
        c.expect(got == Ok((4, torsor)), || format!("K2 {kind} counts {got:?} vs 2^b1 = {torsor}"));
    }
    c.finish(3, "Klein bottle lift squares and counts", "Klein bottle table")
}

fn moebius_table() -> Criterion {
    let mut c = Check::new();
    for kind in PinKind::BOTH {
        let e1_squared = kind.vector_square();
        for (i, want) in [(0u8, e1_squared), (1, e1_squared), (2, -e1_squared)] {
            let got = lift_involution(&PinStructureDescriptor::torus(kind, i), &tau4()).map(|r| r.square);
            c.expect(got == Ok(want), || format!("{kind} xi{i}: {got:?}, want {want}"));
        }
    }
    c.finish(4, "Moebius tau4 squares", "Moebius table")
}

fn boundary_table() -> Criterion {
    let mut c = Check::new();
    let want = [("xi0", "±1", "±e1e2"), ("xi1", "±1", "±1"), ("tau3*xi0", "±e1", "±e2"), ("tau3*xi1", "±e1", "±e1")];
    let rows = boundary_lift_table(PinKind::Minus);
    c.expect(rows.len() == want.len(), || format!("{} rows", rows.len()));
    for (row, (s, zero, pi)) in rows.iter().zip(want) {
        let ok = row.structure == s && row.at_zero == zero && row.at_pi == pi;
        c.expect(ok, || format!("{}: ({}, {})", row.structure, row.at_zero, row.at_pi));
    }
    for kind in PinKind::BOTH {
        let w = noncommutation_witness(kind);
        c.expect(w.sign_at_zero == 1 && w.sign_at_pi == -1, || format!("{kind} witness {w:?}"));
    }
    c.finish(5, "cylinder boundary lifts and witness", "cylinder boundary table")
}

fn cylinder_classes() -> Criterion {
    let mut c = Check::new();
    let id = [BoundaryTag::Identity, BoundaryTag::Identity];
    for kind in PinKind::BOTH {
        for (cyl, torus) in [(1u8, 0u8), (0, 1)] {
            let got = double_structure(&PinStructureDescriptor::cylinder(kind, cyl), &id);
            let want = PinStructureDescriptor::torus(kind, torus);
            c.expect(got.as_ref() == Ok(&want), || format!("{kind} xi{cyl} ∪id xi{cyl}: {got:?}"));
        }
    }
    c.finish(6, "cylinder doubles", "cylinder classes")
}

fn expected_h1(family: Family) -> GroupSummary {
    let g = |free: usize, torsion: Vec<u64>| GroupSummary { free, torsion };
    match family {
        Family::Sphere => g(0, vec![]),
        Family::ProjectivePlane => g(0, vec![2]),
        Family::Torus => g(2, vec![]),
        Family::Klein => g(1, vec![2]),
        Family::Cylinder | Family::Moebius => g(1, vec![]),
        Family::Orientable(n) => g(2 * n as usize, vec![]),
        Family::NonOrientable { genus, crosscaps: 1 } => g(2 * genus as usize, vec![2]),
        Family::NonOrientable { genus, .. } => g(2 * genus as usize + 1, vec![2]),
    }
}

fn closed_families() -> Vec<Family> {
    let mut out = vec![Family::Sphere, Family::ProjectivePlane, Family::Torus, Family::Klein];
    for g in 0..=4 {
        out.push(Family::Orientable(g));
        out.push(Family::NonOrientable { genus: g, crosscaps: 1 });
        out.push(Family::NonOrientable { genus: g, crosscaps: 2 });
    }
    out
}

fn homology_groups() -> Criterion {
    let mut c = Check::new();
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).expect("closed family");
        let h1 = homology(&x, Coefficients::Z).h1;
        c.expect(h1 == expected_h1(fam), || format!("{}: H1 = {h1}", x.name()));
        if x.orientable {
            continue;
        }
        match orientation_double_cover(&x)
            .map_err(|e| e.to_string())
            .and_then(|d| induced_maps(&d).map_err(|e| e.to_string()))
        {
            Ok(maps) => {
                let kernel = vec![w1(&x).on_generators];
                c.expect(maps.pull_kernel == kernel, || format!("{}: Ker π* = {:?}", x.name(), maps.pull_kernel));
            }
            Err(e) => c.expect(false, || format!("{}: {e}", x.name())),
        }
    }
    let k2 = surface("k2");
    let push = orientation_double_cover(&k2).ok().and_then(|d| induced_maps(&d).ok()).map(|m| m.push_z);
    let want = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]);
    c.expect(push.as_ref() == Some(&want), || format!("π* on T2 -> K2: {push:?}"));
    c.finish(7, "integral homology and Ker π*", "homology of surfaces")
}

fn splitting() -> Criterion {
    let mut c = Check::new();
    let families = closed_families().into_iter().chain([Family::Moebius]);
    for fam in families {
        let x = SurfaceModel::build(fam).expect("family");
        if x.orientable {
            continue;
        }
        let maps = orientation_double_cover(&x)
            .map_err(|e| e.to_string())
            .and_then(|d| induced_maps(&d).map_err(|e| e.to_string()));
        match maps {
            Ok(m) => c.expect(m.splitting_holds(), || {
                format!(
                    "{}: k = {}, b1(cover) = {}, b1(base) = {}",
                    x.name(),
                    m.push_kernel_dim,
                    m.b1_2_cover,
                    m.b1_2_base
                )
            }),
            Err(e) => c.expect(false, || format!("{}: {e}", x.name())),
        }
        for kind in PinKind::BOTH {
            let closed_count = x.is_closed().then(|| torsor_count(&x, kind));
            if let Some(count) = closed_count.filter(|&n| n > 0) {
                let b1 = crate::homology::b1_mod2(&x);
                c.expect(count == 1 << b1, || format!("{} {kind}: count {count}, b1 {b1}", x.name()));
            }
        }
    }
    c.finish(8, "splitting dimension count", "splitting bookkeeping")
}

fn relations() -> Criterion {
    let mut c = Check::new();
    let required = ["pi1∘pi3 = pi2∘pi4", "tau3∘tau4 = tau4∘tau3", "tau4|Cyl = tau1", "tau34 fixed-point free"];
    match cover_diagram(&surface("moebius")) {
        Ok(diagram) => {
            let checks = diagram.verify(RELATION_GRID);
            for name in required {
                let found = checks.iter().find(|r| r.relation == name);
                c.expect(found.is_some_and(|r| r.holds()), || format!("{name}: {found:?}"));
            }
            for r in checks.iter().filter(|r| !required.contains(&r.relation.as_str())) {
                c.expect(r.holds(), || format!("{}: {} of {} failed", r.relation, r.failures, r.points));
            }
        }
        Err(e) => c.expect(false, || e.to_string()),
    }
    c.finish(9, "cover diagram relations", "Moebius cover diagram")
}

fn random_multivector(sig: Signature, rng: &mut ChaCha8Rng) -> Multivector {
    let blades = 1u32 << sig.dim();
    let count = rng.gen_range(1..8);
    Multivector::from_terms(sig, (0..count).map(|_| (rng.gen_range(0..blades), rng.gen_range(-2.0..2.0))))
}

fn random_vector(sig: Signature, rng: &mut ChaCha8Rng) -> Multivector {
    let comps: Vec<f64> = (0..sig.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Multivector::vector(sig, &comps).expect("matching dimension")
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)) + DMatrix::identity(n, n) * 0.1;
    a.qr().q()
}

fn random_pin2(kind: PinKind, rng: &mut ChaCha8Rng) -> Pin2Element {
    let t = AngleForm::new(
        q(rng.gen_range(-4..=4), 2),
        q(rng.gen_range(-4..=4), 2),
        q(rng.gen_range(-8..=8), rng.gen_range(1..=4)),
    );
    if rng.gen_bool(0.5) {
        Pin2Element::odd(kind, t)
    } else {
        Pin2Element::even(kind, t)
    }
}

fn property_suites(config: &AcceptanceConfig) -> Criterion {
    let tol = config.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut c = Check::new();

    for case in 0..CLIFFORD_CASES {
        let (p, q) = loop {
            let pq = (rng.gen_range(0..=4), rng.gen_range(0..=4));
            if pq.0 + pq.1 > 0 {
                break pq;
            }
        };
        let sig = Signature::new(p, q).expect("small signature");
        let [a, b, d] = [0; 3].map(|_| random_multivector(sig, &mut rng));
        let left = a.geometric_product(&b).and_then(|ab| ab.geometric_product(&d)).expect("same signature");
        let right = b.geometric_product(&d).and_then(|bd| a.geometric_product(&bd)).expect("same signature");
        c.expect(left.approx_eq(&right, tol * (1.0 + left.max_abs())), || {
            format!("associativity case {case} in {sig:?}")
        });

        let definite = Signature::new(p + q, 0).expect("small signature");
        let axes: Vec<_> = (0..rng.gen_range(1..4)).map(|_| random_vector(definite, &mut rng)).collect();
        if axes.iter().all(|v| v.inner(v).is_ok_and(|n| n > 1e-3)) {
            let u = PinElement::from_vectors(definite, &axes).expect("non-null axes");
            let (v, w) = (random_vector(definite, &mut rng), random_vector(definite, &mut rng));
            let before = v.inner(&w).expect("same signature");
            let after = twisted_adjoint(&u, &v).and_then(|rv| twisted_adjoint(&u, &w).and_then(|rw| rv.inner(&rw)));
            let drift = after.map(|x| (x - before).abs()).unwrap_or(f64::INFINITY);
            c.expect(drift < 10.0 * tol * (1.0 + before.abs()), || format!("metric case {case}: drift {drift:e}"));
        }
    }

    for case in 0..LIFT_CASES {
        let n = rng.gen_range(1..=6);
        let m = random_orthogonal(n, &mut rng);
        let sig = if rng.gen_bool(0.5) { Signature::pin_plus(n) } else { Signature::pin_minus(n) }.expect("n ≤ 6");
        let err = lift_orthogonal(&m, sig)
            .and_then(|(u, v)| {
                let back = u.orthogonal_matrix()?;
                let sum = u.value().add(v.value())?.max_abs();
                Ok((back - &m).amax().max(sum))
            })
            .unwrap_or(f64::INFINITY);
        c.expect(err < tol, || format!("lift case {case} (n = {n}): {err:e}"));
    }

    let mut worst: f64 = 0.0;
    for _ in 0..PIN2_SAMPLES {
        let kind = if rng.gen_bool(0.5) { PinKind::Plus } else { PinKind::Minus };
        let (x, y) = (random_pin2(kind, &mut rng), random_pin2(kind, &mut rng));
        let (theta, phi) = (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0));
        let exact = x.mul(&y).expect("same kind").evaluate(theta, phi);
        let numeric = x.evaluate(theta, phi).geometric_product(&y.evaluate(theta, phi)).expect("same signature");
        worst = worst.max(exact.sub(&numeric).expect("same signature").max_abs());
        let matrix = x.project().matrix(theta, phi);
        let oracle = PinElement::new(x.evaluate(theta, phi)).and_then(|u| u.orthogonal_matrix());
        let gap = oracle
            .map(|o| {
                (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .map(|(i, j)| (o[(i, j)] - matrix[i][j]).abs())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY);
        worst = worst.max(gap);
    }
    c.expect(worst < tol, || format!("pin2 evaluation gap {worst:e}"));

    let n = config.grid;
    for tau in [klein_deck(), tau4()] {
        for kind in PinKind::BOTH {
            for i in 0..4u8 {
                let xi = PinStructureDescriptor::torus(kind, i);
                let Ok(action) = LiftedAction::new(&xi, &tau, n) else {
                    c.expect(false, || format!("{xi} {}: no lifted action", tau.name));
                    continue;
                };
                if action.square() != 1 {
                    continue;
                }
                for sign in [1, -1] {
                    let s = PinorField::random(n, &mut rng);
                    let result = action.project(&s, sign).and_then(|p| {
                        let residual = action.residual(&p, sign)?;
                        let drift = action.project(&p, sign)?.sub(&p)?.max_norm();
                        let couple = couple_split(&p, &xi, &tau, sign, Orientation::Standard)?;
                        Ok((residual, drift, couple.certificate_residual.max(couple.chirality_residual)))
                    });
                    let ok = matches!(result, Ok((r, d, cert)) if r < tol && d < tol && cert < tol);
                    c.expect(ok, || format!("{xi} {} sign {sign}: {result:?}", tau.name));
                }
            }
        }
    }
    c.finish(10, "seeded property suites", "algebra and pinor properties")
}
