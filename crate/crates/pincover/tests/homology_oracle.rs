use num_bigint::BigInt;
use pincover::homology::{
    b1_mod2, homology, induced_maps, smith_normal_form, ChainComplex, Coefficients, GroupSummary, IntMatrix,
};
use pincover::surface::{orientation_double_cover, Family, SurfaceModel};
use proptest::prelude::*;

/// Classification formulas for H₁ over Z, written independently of the cell complex.
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

#[test]
fn h1_matches_classification() {
    for fam in closed_families().into_iter().chain([Family::Cylinder, Family::Moebius]) {
        let x = SurfaceModel::build(fam).unwrap();
        let h = homology(&x, Coefficients::Z);
        assert_eq!(h.h1, expected_h1(x.family), "{}", x.name());
        assert_eq!(h.h0, GroupSummary { free: 1, torsion: vec![] }, "{}", x.name());
        let h2_free = usize::from(x.orientable && x.is_closed());
        assert_eq!(h.h2, GroupSummary { free: h2_free, torsion: vec![] }, "{}", x.name());
    }
}

#[test]
fn universal_coefficients() {
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).unwrap();
        let z = homology(&x, Coefficients::Z);
        let two_torsion = z.h1.torsion.iter().filter(|t| *t % 2 == 0).count();
        assert_eq!(b1_mod2(&x), z.h1.free + two_torsion, "{}", x.name());
        let z2 = homology(&x, Coefficients::Z2);
        assert_eq!(z2.h2.free, 1, "{}", x.name());
    }
    let t2 = SurfaceModel::parse("t2").unwrap();
    assert_eq!(homology(&t2, Coefficients::Z2).h1.free, 2);
}

#[test]
fn boundary_maps_compose_to_zero() {
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).unwrap();
        let c = ChainComplex::from_word(&x.word).unwrap();
        assert!(c.d1.mul(&c.d2).is_zero());
        let cover = x.word.orientation_cover();
        let up = ChainComplex::from_word(&cover.word).unwrap();
        assert!(up.d1.mul(&up.d2).is_zero());
    }
}

#[test]
fn torus_pushes_forward_as_doubling_and_identity() {
    let k2 = SurfaceModel::parse("k2").unwrap();
    let maps = induced_maps(&orientation_double_cover(&k2).unwrap()).unwrap();
    assert_eq!(maps.base_generators, vec!["b", "a"]);
    assert_eq!(maps.base_orders, vec![None, Some(2)]);
    assert_eq!(maps.push_z, IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]));
}

#[test]
fn pullback_kills_one_class_for_every_non_orientable_surface() {
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).unwrap();
        if x.orientable {
            continue;
        }
        let maps = induced_maps(&orientation_double_cover(&x).unwrap()).unwrap();
        assert_eq!(maps.pull_kernel.len(), 1, "{}", x.name());
        assert_eq!(maps.image_index(), 2, "{}", x.name());
        assert!(maps.splitting_holds(), "{}", x.name());
        assert!(maps.pull_is_transpose(), "{}", x.name());
        let cover = SurfaceModel::build(orientation_double_cover(&x).unwrap().cover.family).unwrap();
        assert_eq!(maps.b1_2_cover, b1_mod2(&cover), "{}", x.name());
    }
    let rp2 = SurfaceModel::parse("rp2").unwrap();
    let maps = induced_maps(&orientation_double_cover(&rp2).unwrap()).unwrap();
    assert_eq!(maps.b1_2_cover, 0);
    assert_eq!(maps.pull_kernel, vec![vec![1]]);
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=5, 1usize..=5)
        .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r))
}

proptest! {
    #[test]
    fn smith_form_is_a_unimodular_diagonalisation(rows in small_matrix()) {
        let a = IntMatrix::from_rows(&rows);
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(a.rows()));
        prop_assert_eq!(s.v.mul(&s.v_inv), IntMatrix::identity(a.cols()));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert_eq!(s.d.get(i, j), &BigInt::from(0));
                }
            }
        }
        let f = s.invariant_factors();
        for w in f.windows(2) {
            prop_assert!((&w[1] % &w[0]) == BigInt::from(0));
        }
        prop_assert!(f.iter().all(|x| *x > BigInt::from(0)));
        // rank agrees with floating-point rank
        let m = nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| rows[i][j] as f64);
        prop_assert_eq!(s.rank(), m.rank(1e-9));
    }
}
