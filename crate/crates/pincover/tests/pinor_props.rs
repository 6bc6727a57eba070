use nalgebra::Vector2;
use num_complex::Complex64;
use pincover::exact::q;
use pincover::pin2::{AngleForm, Pin2Element, PinKind};
use pincover::pinors::{
    couple_split, invariance_residual, project_invariant, GammaRep, LiftedAction, Orientation, PinorField, PINOR_TOL,
};
use pincover::structures::{lift_involution, PinStructureDescriptor};
use pincover::surface::{klein_deck, tau4, Involution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 16;

fn qualifying() -> Vec<(PinStructureDescriptor, Involution)> {
    let mut out = Vec::new();
    for tau in [klein_deck(), tau4()] {
        for k in PinKind::BOTH {
            for i in 0..4 {
                let xi = PinStructureDescriptor::torus(k, i);
                if lift_involution(&xi, &tau).unwrap().square == 1 {
                    out.push((xi, tau.clone()));
                }
            }
        }
    }
    out
}

#[test]
fn representation_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let k = if i % 2 == 0 { PinKind::Plus } else { PinKind::Minus };
        let rep = GammaRep::new(k);
        let mut pick = || {
            let t =
                AngleForm::new(q(rng.gen_range(-4..=4), 2), q(rng.gen_range(-4..=4), 2), q(rng.gen_range(-8..=8), 4));
            if rng.gen_bool(0.5) {
                Pin2Element::odd(k, t)
            } else {
                Pin2Element::even(k, t)
            }
        };
        let (x, y) = (pick(), pick());
        let (th, ph) = (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0));
        let lhs = rep.rep(&x.mul(&y).unwrap(), th, ph).unwrap();
        let rhs = rep.rep(&x, th, ph).unwrap() * rep.rep(&y, th, ph).unwrap();
        worst = worst.max((lhs - rhs).norm());
        let neg = rep.rep(&x.neg(), th, ph).unwrap() + rep.rep(&x, th, ph).unwrap();
        worst = worst.max(neg.norm());
    }
    assert!(worst < PINOR_TOL, "{worst:e}");
}

#[test]
fn projections_are_idempotent_with_invariant_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (xi, tau) in qualifying() {
        let action = LiftedAction::new(&xi, &tau, N).unwrap();
        for sign in [1, -1] {
            let s = PinorField::random(N, &mut rng);
            let p = action.project(&s, sign).unwrap();
            assert!(action.residual(&p, sign).unwrap() < PINOR_TOL, "{xi} {}", tau.name);
            let pp = action.project(&p, sign).unwrap();
            assert!(pp.sub(&p).unwrap().max_norm() < PINOR_TOL);
            let anti = s.sub(&action.apply(&s, sign).unwrap()).unwrap();
            assert!(action.project(&anti, sign).unwrap().max_norm() < PINOR_TOL);
        }
        let s = PinorField::random(N, &mut rng);
        let plus = action.project(&s, 1).unwrap();
        let minus = action.project(&s, -1).unwrap();
        assert!(plus.add(&minus).unwrap().sub(&s).unwrap().max_norm() < PINOR_TOL);
        assert!(plus.inner(&minus).unwrap().norm() < PINOR_TOL * s.norm_squared());
        assert!((plus.norm_squared() + minus.norm_squared() - s.norm_squared()).abs() < PINOR_TOL * s.norm_squared());
    }
}

#[test]
fn couples_certify_on_projected_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (xi, tau) in qualifying() {
        for sign in [1, -1] {
            let s = project_invariant(&PinorField::random(N, &mut rng), &xi, &tau, sign).unwrap();
            let std = couple_split(&s, &xi, &tau, sign, Orientation::Standard).unwrap();
            assert!(std.certified(), "{xi} {} {sign}: {:e}", tau.name, std.certificate_residual);
            let opp = couple_split(&s, &xi, &tau, sign, Orientation::Opposite).unwrap();
            assert!(opp.certified());
            assert_eq!(opp.plus, std.minus);
            assert_eq!(opp.minus, std.plus);
            assert!(std.recombine().sub(&s).unwrap().max_norm() < PINOR_TOL);
        }
    }
    let (xi, tau) = qualifying().remove(0);
    let zero = couple_split(&PinorField::zeros(N), &xi, &tau, 1, Orientation::Standard).unwrap();
    assert_eq!(zero.plus.max_norm(), 0.0);
    assert_eq!(zero.minus.max_norm(), 0.0);
    let noisy = PinorField::random(N, &mut rng);
    assert!(couple_split(&noisy, &xi, &tau, 1, Orientation::Standard).is_err());
}

#[test]
fn eigenvector_oracle() {
    // +1 eigenvector of σ_y, solved by hand
    let v = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)) * Complex64::new(0.5f64.sqrt(), 0.0);
    let gamma2 = GammaRep::new(PinKind::Plus).gamma2;
    assert!((gamma2 * v - v).norm() < PINOR_TOL);
    let xi = PinStructureDescriptor::torus(PinKind::Plus, 0);
    let s = PinorField::constant(32, v);
    assert!(invariance_residual(&s, &xi, &klein_deck(), 1).unwrap() < PINOR_TOL);
    assert!((invariance_residual(&s, &xi, &klein_deck(), -1).unwrap() - 2.0).abs() < PINOR_TOL);
}
