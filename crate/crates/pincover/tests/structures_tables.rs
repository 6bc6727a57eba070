use pincover::pin2::PinKind;
use pincover::structures::{
    are_equivalent, boundary_lift_table, class_representatives, descend, enumerate, lift_involution, moebius_descent,
    noncommutation_witness, Chart, PinStructureDescriptor,
};
use pincover::surface::{klein_deck, tau3, tau4, Involution, SurfaceModel};

#[test]
fn enumeration_sizes() {
    for k in PinKind::BOTH {
        assert_eq!(enumerate(&SurfaceModel::parse("t2").unwrap(), k).unwrap().len(), 4);
        assert_eq!(enumerate(&SurfaceModel::parse("cyl").unwrap(), k).unwrap().len(), 2);
        assert_eq!(enumerate(&SurfaceModel::parse("s2").unwrap(), k).unwrap().len(), 1);
        assert!(enumerate(&SurfaceModel::parse("sigma(2)").unwrap(), k).is_err());
        assert!(enumerate(&SurfaceModel::parse("k2").unwrap(), k).is_err());
    }
}

#[test]
fn equivalence_is_an_equivalence_relation() {
    for chart in [Chart::Torus, Chart::Cylinder] {
        for k in PinKind::BOTH {
            let all: Vec<_> = (0..4).map(|i| PinStructureDescriptor::new(chart, k, (i & 1, i >> 1))).collect();
            for a in &all {
                assert!(are_equivalent(a, a).unwrap());
                for b in &all {
                    assert_eq!(are_equivalent(a, b).unwrap(), are_equivalent(b, a).unwrap());
                    for c in &all {
                        if are_equivalent(a, b).unwrap() && are_equivalent(b, c).unwrap() {
                            assert!(are_equivalent(a, c).unwrap());
                        }
                    }
                }
            }
        }
    }
    assert_eq!(class_representatives(Chart::Torus, PinKind::Plus).len(), 4);
}

/// Expected squares of the lifted involutions, computed by hand from
/// `L(τx)·L(x) = R̃_{-w(τ²x)} J² R̃_{w(x)}`.
#[test]
fn lift_squares_table() {
    let cases: [(&str, Involution, [i8; 4], [i8; 4]); 2] =
        [("klein", klein_deck(), [1, -1, 1, -1], [-1, 1, -1, 1]), ("tau4", tau4(), [1, 1, -1, -1], [-1, -1, 1, 1])];
    for (name, tau, plus, minus) in cases {
        for (k, want) in [(PinKind::Plus, plus), (PinKind::Minus, minus)] {
            for i in 0..4u8 {
                let r = lift_involution(&PinStructureDescriptor::torus(k, i), &tau).unwrap();
                assert!(r.exists, "{name} xi{i} {k}");
                assert!(r.projection_matches, "{name} xi{i} {k}");
                assert!(r.both_lifts_related_by_gamma, "{name} xi{i} {k}");
                assert_eq!(r.square, want[i as usize], "{name} xi{i} {k}");
            }
        }
    }
    for k in PinKind::BOTH {
        for i in 0..4u8 {
            let r = lift_involution(&PinStructureDescriptor::torus(k, i), &tau3()).unwrap();
            assert!(r.exists);
            assert_eq!(r.square, k.vector_square(), "tau3 xi{i} {k}");
        }
    }
}

#[test]
fn sphere_lift_is_on_the_equator() {
    let r = lift_involution(&PinStructureDescriptor::sphere(PinKind::Minus), &Involution::antipodal()).unwrap();
    assert_eq!(r.lift.to_string(), "odd(θ + 1/2·π)");
    assert!(lift_involution(&PinStructureDescriptor::sphere(PinKind::Minus), &klein_deck()).is_err());
}

#[test]
fn descent_counts() {
    let cases =
        [("rp2", PinKind::Minus, 2), ("rp2", PinKind::Plus, 0), ("k2", PinKind::Plus, 4), ("k2", PinKind::Minus, 4)];
    for (name, k, count) in cases {
        let r = descend(&SurfaceModel::parse(name).unwrap(), k).unwrap();
        assert_eq!(r.predicted_count, count, "{name} {k}");
        assert_eq!(r.consistent, Some(true), "{name} {k}");
    }
    let k2 = descend(&SurfaceModel::parse("k2").unwrap(), PinKind::Plus).unwrap();
    let names: Vec<_> = k2.entries.iter().filter(|e| e.qualifies).map(|e| e.structure.clone()).collect();
    assert_eq!(names, ["xi0", "xi2"]);
    let k2 = descend(&SurfaceModel::parse("k2").unwrap(), PinKind::Minus).unwrap();
    let names: Vec<_> = k2.entries.iter().filter(|e| e.qualifies).map(|e| e.structure.clone()).collect();
    assert_eq!(names, ["xi1", "xi3"]);
    for k in PinKind::BOTH {
        let m = descend(&SurfaceModel::parse("moebius").unwrap(), k).unwrap();
        assert_eq!(m.consistent, Some(true), "moebius {k}");
        let n = descend(&SurfaceModel::parse("n(2,1)").unwrap(), k).unwrap();
        assert!(n.count_only);
    }
}

#[test]
fn quotients_pull_back_to_their_source() {
    for k in PinKind::BOTH {
        let r = descend(&SurfaceModel::parse("k2").unwrap(), k).unwrap();
        for e in r.entries.iter().filter(|e| e.qualifies) {
            assert_eq!(e.quotients.len(), 2);
            assert_ne!(e.quotients[0].label, e.quotients[1].label);
            for quotient in &e.quotients {
                let back = quotient.pull_back();
                assert!(are_equivalent(&back, &quotient.upstairs).unwrap());
                assert_eq!(back.label(), e.structure);
            }
        }
    }
}

#[test]
fn cylinder_boundary_table() {
    let minus = boundary_lift_table(PinKind::Minus);
    let cells: Vec<(&str, &str, &str)> =
        minus.iter().map(|r| (r.structure.as_str(), r.at_zero.as_str(), r.at_pi.as_str())).collect();
    assert_eq!(
        cells,
        [("xi0", "±1", "±e1e2"), ("xi1", "±1", "±1"), ("tau3*xi0", "±e1", "±e2"), ("tau3*xi1", "±e1", "±e1")]
    );
    let plus = boundary_lift_table(PinKind::Plus);
    assert_eq!(plus[2].at_pi, "±e2");
    for k in PinKind::BOTH {
        let w = noncommutation_witness(k);
        assert_eq!((w.sign_at_zero, w.sign_at_pi), (1, -1));
    }
}

#[test]
fn moebius_report_rows() {
    let report = moebius_descent();
    assert!(report.relations.iter().all(|r| r.holds()));
    assert!(report.quotient_oriented);
    let row = |s: &str, k: PinKind| report.rows.iter().find(|r| r.structure == s && r.kind == k).unwrap().clone();
    assert_eq!(row("xi0", PinKind::Plus).tau4_square, 1);
    assert_eq!(row("xi0", PinKind::Minus).tau4_square, -1);
    assert_eq!(row("xi1", PinKind::Plus).tau4_square, 1);
    assert_eq!(row("xi2", PinKind::Plus).tau4_square, -1);
    assert_eq!(row("xi2", PinKind::Minus).tau4_square, 1);
    assert!(row("xi2", PinKind::Minus).descends);
}
