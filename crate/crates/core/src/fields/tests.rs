use super::*;
use crate::qdiff::qs_basis;
use proptest::prelude::*;
use std::f64::consts::PI;

fn lam(re: f64, im: f64) -> LambdaParam {
    LambdaParam::new(c64(re, im)).unwrap()
}

/// `f_z̄ / f_z` by central differences.
fn fd_coefficient(f: impl Fn(C64) -> C64, z: C64, h: f64) -> C64 {
    let fx = (f(z + h) - f(z - h)) / (2.0 * h);
    let fy = (f(z + C64::i() * h) - f(z - C64::i() * h)) / (2.0 * h);
    (fx + C64::i() * fy) / (fx - C64::i() * fy)
}

fn strip_map(l: C64, r: f64) -> impl Fn(C64) -> C64 {
    move |z: C64| {
        let eta = z.im;
        let s = if eta <= r / 2.0 { eta } else { r - eta };
        c64(z.re, 0.0) + l * s + C64::i() * eta
    }
}

fn shear_map(l: C64, r: f64) -> impl Fn(C64) -> C64 {
    move |z: C64| {
        let eta = -z.norm().ln();
        z * (C64::i() * l * eta.min(r - eta)).exp()
    }
}

#[test]
fn strip_examples() {
    let f = strip_family(lam(1.0, 0.0), 2.0).unwrap();
    let v = f.eval(c64(0.3, 0.5)).unwrap();
    assert!((v - c64(-0.2, 0.4)).norm() < 1e-15);
    assert!((f.sup_norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    assert!((f.eval(c64(7.0, 1.5)).unwrap().norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    let z = strip_family(lam(0.0, 0.0), 2.0).unwrap();
    assert_eq!(z.eval(c64(0.0, 1.0)).unwrap(), c64(0.0, 0.0));
    assert_eq!(z.sup_norm(), 0.0);
    assert!(strip_family(lam(1.0, 0.0), -1.0).is_err());
}

#[test]
fn strip_matches_affine_map() {
    let r = 2.0;
    for l in [c64(1.0, 0.0), c64(0.4, 0.7), c64(2.5, -0.9)] {
        let f = strip_family(LambdaParam::new(l).unwrap(), r).unwrap();
        for z in [c64(0.1, 0.3), c64(-2.0, 0.9), c64(3.0, 1.4), c64(0.0, 1.9)] {
            let fd = fd_coefficient(strip_map(l, r), z, 1e-4);
            assert!((fd - f.eval(z).unwrap()).norm() < 1e-6, "{l} {z}");
        }
    }
}

#[test]
fn annulus_matches_shear_map() {
    let r = 0.2f64;
    let big_r = -r.ln();
    for l in [c64(1.0, 0.0), c64(0.4, 0.7), c64(2.5, -0.9)] {
        let f = annulus_family(LambdaParam::new(l).unwrap(), r).unwrap();
        for z in [c64(0.9, 0.0), c64(0.3, 0.5), c64(-0.25, 0.1), c64(0.05, -0.6)] {
            let fd = fd_coefficient(shear_map(l, big_r), z, 1e-4);
            assert!((fd - f.eval(z).unwrap()).norm() < 1e-6, "{l} {z}");
        }
    }
    let f = annulus_family(lam(1.0, 0.0), r).unwrap();
    let v = f.eval(c64(0.9, 0.0)).unwrap();
    assert!((v.norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    assert_eq!(annulus_family(lam(0.0, 0.0), r).unwrap().eval(c64(0.5, 0.0)).unwrap(), c64(0.0, 0.0));
    // punctured disk: only the outer shear
    let f = annulus_family(lam(0.5, 0.2), 0.0).unwrap();
    let z = c64(0.01, 0.02);
    let fd = fd_coefficient(shear_map(c64(0.5, 0.2), f64::INFINITY), z, 1e-6);
    assert!((fd - f.eval(z).unwrap()).norm() < 1e-6);
}

#[test]
fn exp_pullback_of_annulus_is_strip() {
    let r = 0.3f64;
    let mut s = Sampler::new(7);
    for l in [c64(1.0, 0.0), c64(0.3, -0.6)] {
        let lp = LambdaParam::new(l).unwrap();
        let nu = annulus_family(lp, r).unwrap();
        let pulled = pullback(&nu, &CoveringMap::ExpCover).unwrap();
        let strip = strip_family(lp, -r.ln()).unwrap();
        assert_eq!(pulled.domain, strip.domain);
        for _ in 0..100 {
            let z = s.rect(-10.0, 10.0, 0.0, -r.ln());
            if !strip.domain.contains(z) || (z.im - strip_height_half(r)).abs() < 1e-9 {
                continue;
            }
            assert!((pulled.eval(z).unwrap() - strip.eval(z).unwrap()).norm() < 1e-12);
        }
    }
}

fn strip_height_half(r: f64) -> f64 {
    -r.ln() / 2.0
}

#[test]
fn disk_family_is_strip_pushforward() {
    let t = 0.5;
    let l = lam(1.0, 0.0);
    let tau = disk_family(l, t).unwrap();
    assert!((tau.sup_norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    let sampled = tau.sampled_sup_norm(100, (-1.0, 1.0, -1.0, 1.0), 3).unwrap();
    assert!((sampled - 1.0 / 5f64.sqrt()).abs() < 1e-9);
    // pulling back through the covering returns the strip coefficient
    let cover = CoveringMap::elliptic(t).unwrap();
    let pulled = pullback(&tau, &cover).unwrap();
    let data = EllipticCoverData::new(t).unwrap();
    let strip = strip_family(l, data.height()).unwrap();
    let mut s = Sampler::new(11);
    for _ in 0..30 {
        let z = s.rect(0.05, 2.0 * PI - 0.05, 0.05, data.height() - 0.05);
        if (z.im - data.height() / 2.0).abs() < 1e-3 {
            continue;
        }
        let d = (pulled.eval(z).unwrap() - strip.eval(z).unwrap()).norm();
        assert!(d < 1e-8, "{z} {d}");
    }
    let zero = disk_family(lam(0.0, 0.0), t).unwrap();
    assert_eq!(zero.eval(c64(0.3, 0.3)).unwrap(), c64(0.0, 0.0));
}

#[test]
fn weighted_field() {
    let basis = qs_basis().unwrap();
    let mu = example1_field(0.3, WeightSequences::Logistic, basis.clone()).unwrap();
    assert_eq!(mu.sup_norm(), 0.3);
    let mut s = Sampler::new(5);
    for _ in 0..200 {
        let z = s.rect(-30.0, 30.0, -3.0, 3.0);
        assert!((mu.eval(z).unwrap().norm() - 0.3).abs() < 1e-14);
    }
    let lift = example1_field(0.3, WeightSequences::constant(1.0, 0.0).unwrap(), basis.clone()).unwrap();
    for _ in 0..20 {
        let z = s.rect(-30.0, 30.0, -3.0, 3.0);
        let p = basis.phi_r.eval(z);
        assert!((lift.eval(z).unwrap() - p.conj() / p.norm() * 0.3).norm() < 1e-14);
    }
    let zero = example1_field(0.0, WeightSequences::Logistic, basis.clone()).unwrap();
    assert_eq!(zero.eval(c64(0.5, 0.5)).unwrap(), c64(0.0, 0.0));
    assert!(example1_field(1.0, WeightSequences::Logistic, basis).is_err());
}

#[test]
fn deck_twist_converges_to_lift() {
    let basis = qs_basis().unwrap();
    let k = 0.4;
    let mu = example1_field(k, WeightSequences::Logistic, basis.clone()).unwrap();
    let deck = CoveringMap::TranslationDeck { step: 3.0 };
    assert_eq!(deck_twist(&mu, &deck, 0).unwrap(), mu);
    let twisted = deck_twist(&mu, &deck, 40).unwrap();
    let mut s = Sampler::new(9);
    for _ in 0..50 {
        let z = s.in_region(&Region::Cell { period: 3.0, index: 0 }, (0.0, 3.0, -2.0, 2.0));
        let p = basis.phi_r.eval(z);
        let target = p.conj() / p.norm() * k;
        assert!((twisted.eval(z).unwrap() - target).norm() < 1e-3);
    }
    let strip = strip_family(lam(0.7, 0.1), 1.0).unwrap();
    let shifted = deck_twist(&strip, &CoveringMap::TranslationDeck { step: 2.5 }, 3).unwrap();
    for z in [c64(0.1, 0.2), c64(4.0, 0.8)] {
        assert_eq!(shifted.eval(z).unwrap(), strip.eval(z).unwrap());
    }
    assert!(deck_twist(&strip, &CoveringMap::ExpCover, 1).is_err());
}

fn ring(j: i64) -> Region {
    Region::Ring {
        center: c64(3.0 * j as f64 + 1.5, 0.0),
        inner: 0.5,
        outer: 0.5 + (-(j.abs() as f64)).exp2(),
    }
}

#[test]
fn glue_examples() {
    let basis = qs_basis().unwrap();
    let base = example1_field(0.5, WeightSequences::Logistic, basis).unwrap();
    let mut mu = base.clone();
    let l = 2;
    for j in -l..=l {
        let Region::Ring { center, inner, outer } = ring(j) else { unreachable!() };
        let patch = ring_family(lam(0.3, 0.1 * j as f64), center, inner, outer).unwrap();
        mu = glue(&mu, &patch, &ring(j)).unwrap();
    }
    assert_eq!(mu.pieces.len() as i64, 1 + (2 * l + 1));
    assert_eq!(mu.sup_norm(), 0.5);
    let z = c64(1.5, 0.6);
    let Region::Ring { center, inner, outer } = ring(0) else { unreachable!() };
    let expect = ring_family(lam(0.3, 0.0), center, inner, outer).unwrap().eval(z).unwrap();
    assert_eq!(mu.eval(z).unwrap(), expect);
    let off = c64(1.5, 3.0);
    assert_eq!(mu.eval(off).unwrap(), base.eval(off).unwrap());

    // zero patch
    let zero = BeltramiField::zero(ring(0));
    let g = glue(&base, &zero, &ring(0)).unwrap();
    assert_eq!(g.eval(z).unwrap(), c64(0.0, 0.0));
    assert_eq!(g.eval(off).unwrap(), base.eval(off).unwrap());

    // a patch leaving the base domain
    let strip = strip_family(lam(0.5, 0.0), 1.0).unwrap();
    let disk = Region::Disk { center: c64(0.0, 0.5), radius: 0.8 };
    let p = BeltramiField::zero(disk.clone());
    assert!(glue(&strip, &p, &disk).is_err());
}

#[test]
fn glue_associative_and_pullback_distributes() {
    let a = annulus_family(lam(0.6, 0.2), 0.1).unwrap();
    let u1 = Region::Disk { center: c64(0.5, 0.0), radius: 0.2 };
    let u2 = Region::Disk { center: c64(-0.5, 0.0), radius: 0.2 };
    let p1 = BeltramiField::zero(u1.clone());
    let p2 = placed_disk_family(lam(0.2, 0.0), 0.5, c64(-0.5, 0.0), 0.2).unwrap();
    let left = glue(&glue(&a, &p1, &u1).unwrap(), &p2, &u2).unwrap();
    let right = glue(&glue(&a, &p2, &u2).unwrap(), &p1, &u1).unwrap();
    let pulled_after = pullback(&left, &CoveringMap::ExpCover).unwrap();
    let mut s = Sampler::new(21);
    for _ in 0..200 {
        let z = s.in_region(&a.domain, (-1.0, 1.0, -1.0, 1.0));
        assert_eq!(left.eval(z).unwrap(), right.eval(z).unwrap());
    }
    // pullback of the glued field against gluing computed upstairs
    for _ in 0..100 {
        let w = s.rect(0.0, 2.0 * PI, 0.0, -(0.1f64).ln());
        let z = (C64::i() * w).exp();
        let d = C64::i() * z;
        let expect = left.eval(z).unwrap() * d.conj() / d;
        assert!((pulled_after.eval(w).unwrap() - expect).norm() < 1e-14);
    }
}

#[test]
fn holomorphic_in_lambda() {
    let h = 1e-4;
    let z_strip = c64(0.2, 0.3);
    let z_ann = c64(0.6, 0.2);
    for l0 in [c64(0.8, 0.1), c64(2.0, -0.5)] {
        for eval in [
            &(|l: C64| strip_family(LambdaParam::new(l).unwrap(), 1.0).unwrap().eval(z_strip).unwrap())
                as &dyn Fn(C64) -> C64,
            &|l: C64| annulus_family(LambdaParam::new(l).unwrap(), 0.2).unwrap().eval(z_ann).unwrap(),
        ] {
            let dx = (eval(l0 + h) - eval(l0 - h)) / (2.0 * h);
            let dy = (eval(l0 + C64::i() * h) - eval(l0 - C64::i() * h)) / (2.0 * h);
            assert!((dx + C64::i() * dy).norm() < 1e-6);
        }
    }
}

#[test]
fn parameter_domains() {
    assert!(LambdaParam::new(c64(1.0, 1.0)).is_err());
    assert!(LambdaParam::new(c64(-0.1, 0.0)).is_err());
    assert!(LambdaParam::new(c64(0.0, 0.5)).unwrap().is_boundary());
    assert!(!lam(0.5, 0.0).is_boundary());
    let l = lam(1.0, 0.0);
    assert!(l.in_lambda_prime(0.5) && !l.in_lambda_prime(0.4));
    assert!(WeightSequences::Logistic.limits_hold());
    assert!(!WeightSequences::constant(0.5, 0.5).unwrap().limits_hold());
    assert!(WeightSequences::constant(0.0, 0.0).is_err());
    for n in -50..50 {
        assert!(WeightSequences::Logistic.a(n) + WeightSequences::Logistic.b(n) != 0.0);
    }
    let js = serde_json::to_string(&l).unwrap();
    assert!(serde_json::from_str::<LambdaParam>(&js).is_ok());
    assert!(serde_json::from_str::<LambdaParam>("{\"re\":0.0,\"im\":2.0}").is_err());
}

#[test]
fn field_json_round_trip() {
    let basis = qs_basis().unwrap();
    let mu = glue(
        &example1_field(0.2, WeightSequences::Logistic, basis).unwrap(),
        &ring_family(lam(0.4, 0.0), c64(1.5, 0.0), 0.5, 1.0).unwrap(),
        &Region::Ring { center: c64(1.5, 0.0), inner: 0.5, outer: 1.0 },
    );
    let mu = mu.unwrap();
    let js = serde_json::to_string(&mu).unwrap();
    let back: BeltramiField = serde_json::from_str(&js).unwrap();
    assert_eq!(back, mu);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_shear_has_constant_modulus(l in 0.01f64..5.0, r in 0.01f64..0.9, th in 0.0f64..6.28, u in 0.0f64..1.0) {
        let f = annulus_family(LambdaParam::real(l).unwrap(), r).unwrap();
        let rad = r + (1.0 - r) * u.clamp(1e-6, 1.0 - 1e-6);
        let v = f.eval(C64::from_polar(rad, th)).unwrap();
        prop_assert!((v.norm() - l / (4.0 + l * l).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pullback_preserves_modulus(re in 0.0f64..3.0, im in -0.99f64..0.99, x in -5.0f64..5.0, y in 0.01f64..1.6) {
        let lp = LambdaParam::new(c64(re, im)).unwrap();
        let nu = annulus_family(lp, 0.2).unwrap();
        let p = pullback(&nu, &CoveringMap::ExpCover).unwrap();
        let z = c64(x, y);
        let w = (C64::i() * z).exp();
        prop_assert!((p.eval(z).unwrap().norm() - nu.eval(w).unwrap().norm()).abs() < 1e-14);
        prop_assert!(p.sup_norm() == nu.sup_norm());
    }
}
