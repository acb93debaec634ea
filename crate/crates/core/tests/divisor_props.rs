use pix_core::curve::{EllipticModel, HyperellipticModel};
use pix_core::divisor::{
    check_identity, conjugate_divisor, divisor_of_function, divisor_of_y, divisor_of_zpoly,
    verify_case3_identity, weierstrass_divisor, CurvePoint, Divisor, FunctionSpec,
};
use pix_core::forge::{case3_tower, twist_params, Case3Tower};
use pix_core::poly::{FieldElem, Poly};
use pix_core::tower::TowerElement;
use proptest::prelude::*;

fn golden() -> (HyperellipticModel, Case3Tower) {
    let params = twist_params(&EllipticModel::new(1, 2).unwrap(), None).unwrap();
    let tower = case3_tower(&params).unwrap();
    (params.model().base_extend(&tower.k2), tower)
}

#[test]
fn displays_of_the_construction() {
    let (model, t) = golden();
    let [ra, rb, rc] = t.roots.clone();
    let k = Divisor::canonical();
    let d = weierstrass_divisor(&model, &t.roots).unwrap();

    // div(z - √α) = 2(√α, 0) - 𝒦
    let dz = divisor_of_zpoly(&Poly::linear(&ra), &model).unwrap();
    assert_eq!(dz, Divisor::point(CurvePoint::weierstrass(ra.clone()), 2).sub(&k));

    // σD negates the three roots
    let sd = conjugate_divisor(&d, "w", &model).unwrap();
    let mut expect = Divisor::zero();
    for r in [&ra, &rb, &rc] {
        expect.add_point(CurvePoint::weierstrass(r.neg()), 1);
    }
    assert_eq!(sd, expect);
    assert_eq!(sd.degree(), 3);

    // div(y) = D + σD - 3𝒦
    assert_eq!(divisor_of_y(&model).unwrap(), d.add(&sd).sub(&k.scale(3)));

    let check = verify_case3_identity(&model, "w", &t.roots).unwrap();
    assert!(check.holds);
    assert_eq!(check.lhs, sd.sub(&d));
    assert_eq!(check.lhs.degree(), 0);

    assert_eq!(conjugate_divisor(&sd, "w", &model).unwrap(), d);
    assert_eq!(conjugate_divisor(&k, "w", &model).unwrap(), k);
}

#[test]
fn perturbations_break_the_identity() {
    let (model, t) = golden();
    let [ra, rb, rc] = t.roots.clone();
    let lin = Poly::linear;

    // factor sign flip: (z + √α) in place of (z - √α)
    let flipped = FunctionSpec {
        m: 1,
        g: Poly::one(),
        h: Poly::product(&[lin(&ra.neg()), lin(&rb), lin(&rc)]),
    };
    let c = check_identity(&model, "w", &t.roots, &flipped).unwrap();
    assert!(!c.holds);
    let at = CurvePoint::weierstrass(ra.clone());
    assert_ne!(c.lhs.multiplicity(&at), c.rhs.multiplicity(&at));

    // root swap: D built with -√α
    let swapped = [ra.neg(), rb.clone(), rc.clone()];
    let c = check_identity(&model, "w", &swapped, &FunctionSpec::y_over_product(&t.roots)).unwrap();
    assert!(!c.holds);

    // multiplicity change: (z - √α)²
    let doubled = FunctionSpec {
        m: 1,
        g: Poly::one(),
        h: Poly::product(&[lin(&ra), lin(&ra), lin(&rb), lin(&rc)]),
    };
    let c = check_identity(&model, "w", &t.roots, &doubled).unwrap();
    assert!(!c.holds);
    assert_eq!(c.lhs.degree(), 0);
}

fn root_pool(t: &Case3Tower) -> Vec<TowerElement> {
    let mut pool: Vec<TowerElement> = t.roots.iter().flat_map(|r| [r.clone(), r.neg()]).collect();
    for n in [0, 1, -1, 2, 3] {
        pool.push(TowerElement::from_int(n));
    }
    pool
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zpoly_divisor_is_additive(a in prop::collection::vec(0usize..11, 1..3), b in prop::collection::vec(0usize..11, 1..3)) {
        let (model, t) = golden();
        let pool = root_pool(&t);
        let g1 = Poly::product(&a.iter().map(|&i| Poly::linear(&pool[i])).collect::<Vec<_>>());
        let g2 = Poly::product(&b.iter().map(|&i| Poly::linear(&pool[i])).collect::<Vec<_>>());
        let (d1, d2, d12) = (
            divisor_of_zpoly(&g1, &model),
            divisor_of_zpoly(&g2, &model),
            divisor_of_zpoly(&g1.mul(&g2), &model),
        );
        // some rational points have f(r) outside the squares of the tower
        if let (Ok(d1), Ok(d2), Ok(d12)) = (d1, d2, d12) {
            prop_assert_eq!(d12, d1.add(&d2));
        }
    }

    #[test]
    fn conjugation_commutes_with_zpoly(a in prop::collection::vec(0usize..6, 1..4), m in 0i64..3) {
        let (model, t) = golden();
        let pool = root_pool(&t);
        let g = Poly::product(&a.iter().map(|&i| Poly::linear(&pool[i])).collect::<Vec<_>>());
        let gs = Poly::new(g.coeffs().iter().map(|c| c.lift_to(model.base()).conjugate("w").unwrap()).collect());
        let df = divisor_of_function(m, &g, &g, &model).unwrap();
        prop_assert_eq!(df, divisor_of_y(&model).unwrap().scale(m));
        let lhs = conjugate_divisor(&divisor_of_zpoly(&g, &model).unwrap(), "w", &model).unwrap();
        prop_assert_eq!(lhs, divisor_of_zpoly(&gs, &model).unwrap());
        let dz = divisor_of_zpoly(&g, &model).unwrap();
        prop_assert_eq!(dz.map_points(CurvePoint::involution), dz);
    }
}

#[test]
fn involution_on_divisor_of_y() {
    let (model, _) = golden();
    let dy = divisor_of_y(&model).unwrap();
    assert_eq!(dy.map_points(CurvePoint::involution), dy);
    for (p, _) in dy.terms() {
        if let CurvePoint::Affine { y, .. } = p {
            assert!(y.is_zero());
        }
    }
}
