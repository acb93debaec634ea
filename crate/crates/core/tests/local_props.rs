use num_bigint::BigInt;
use num_traits::Zero;
use pix_core::arith::{rational, Modulus, Place, Prime, Rational};
use pix_core::curve::EllipticModel;
use pix_core::local::{
    count_affine_points, deficiency_at_place, find_smooth_point, hensel_lift, qp_points_exist,
    QpEvidence, TwistParams, Verdict,
};
use pix_core::poly::Poly;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_count(f: &[u64], p: u64) -> (u64, u64) {
    let ev = |z: u64| f.iter().rev().fold(0u64, |a, &c| (a * z + c) % p);
    let df: Vec<u64> = f.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 * c) % p).collect();
    let dev = |z: u64| df.iter().rev().fold(0u64, |a, &c| (a * z + c) % p);
    let (mut total, mut smooth) = (0, 0);
    for z in 0..p {
        for y in 0..p {
            if (y * y) % p == ev(z) {
                total += 1;
                if (2 * y) % p != 0 || dev(z) != 0 {
                    smooth += 1;
                }
            }
        }
    }
    (total, smooth)
}

const SMALL_PRIMES: [u64; 11] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn count_matches_double_loop(idx in 0usize..11, raw in prop::collection::vec(0u64..1000, 7)) {
        let p = SMALL_PRIMES[idx];
        let f: Vec<u64> = raw.iter().map(|c| c % p).collect();
        let c = count_affine_points(&f, p);
        prop_assert_eq!((c.total, c.smooth), naive_count(&f, p));
    }

    #[test]
    fn smooth_points_lift(idx in 1usize..11, raw in prop::collection::vec(-50i64..50, 7)) {
        let p = SMALL_PRIMES[idx];
        let f = Poly::from_i64s(&raw);
        let fbar: Vec<u64> = raw.iter().map(|c| c.rem_euclid(p as i64) as u64).collect();
        if let Some((z, y)) = find_smooth_point(&fbar, p) {
            let pt = hensel_lift(&f, Prime::new(p).unwrap(), (&z.into(), &y.into()), 5).unwrap();
            prop_assert!(pt.satisfies(&f));
            prop_assert_eq!(&pt.z % p, BigInt::from(z));
        }
    }
}

fn random_sextic(rng: &mut ChaCha8Rng, range: i64) -> Poly<Rational> {
    loop {
        let mut cs: Vec<i64> = (0..7).map(|_| rng.gen_range(-range..=range)).collect();
        if cs[6] == 0 {
            cs[6] = 1;
        }
        let f = Poly::from_i64s(&cs);
        if f.is_squarefree() {
            return f;
        }
    }
}

#[test]
fn qp_finds_points_when_reduction_has_smooth_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = 0;
    let mut trials = 0;
    for &p in &[3u64, 5, 7, 17] {
        let mut done = 0;
        while done < 25 {
            let f = random_sextic(&mut rng, 40);
            let fbar: Vec<u64> = f
                .coeffs()
                .iter()
                .map(|c| c.numer().to_string().parse::<i64>().unwrap().rem_euclid(p as i64) as u64)
                .collect();
            if find_smooth_point(&fbar, p).is_none() {
                continue;
            }
            done += 1;
            trials += 1;
            let d = qp_points_exist(&f, Prime::new(p).unwrap()).unwrap();
            if let QpEvidence::Point(w) = &d.evidence {
                assert!(w.verify(&f));
                found += 1;
            }
        }
    }
    assert_eq!(trials, 100);
    assert_eq!(found, 100);
}

/// Rational points of height at most `h` in the affine chart.
fn brute_point(f: &Poly<Rational>, h: i64) -> Option<Rational> {
    for d in 1..=h {
        for n in -h..=h {
            let z = rational(n, d);
            if z.denom() != &BigInt::from(d) {
                continue;
            }
            let v = f.eval(&z);
            if v.is_zero() || pix_core::arith::exact_sqrt(&v).is_some() {
                return Some(z);
            }
        }
    }
    None
}

#[test]
fn qp_agrees_with_rational_brute_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut agreed = 0;
    let mut models = 0;
    while models < 100 {
        let f = random_sextic(&mut rng, 6);
        models += 1;
        if brute_point(&f, 20).is_none() && pix_core::arith::exact_sqrt(&f.leading()).is_none() {
            continue;
        }
        for &p in &[3u64, 5, 7, 17] {
            let d = qp_points_exist(&f, Prime::new(p).unwrap()).unwrap();
            assert!(d.exists, "{f} at {p}");
        }
        agreed += 1;
    }
    assert!(agreed > 10);
}

#[test]
fn qp_empty_on_odd_valuation_everywhere() {
    let f = Poly::from_i64s(&[7, 0, 7]).mul(&Poly::from_i64s(&[1, 0, 0, 0, 1]));
    // -1 is a nonresidue mod 7, so z² + 1 and z⁴ + 1 are units on ℤ₇.
    let d = qp_points_exist(&f, Prime::new(7).unwrap()).unwrap();
    assert!(!d.exists);
}

#[test]
fn pi_place_cross_check() {
    let params = TwistParams {
        elliptic: EllipticModel::new(1, 2).unwrap(),
        modulus: Modulus::new(120120, true).unwrap(),
        pi: Prime::new(120121).unwrap(),
        alpha: BigInt::from(19),
    };
    let c = deficiency_at_place(&params, Place::Finite(params.pi), &[]).unwrap();
    assert!(c.deficient);
    assert!(matches!(c.verdict, Verdict::EmptyByValuation { .. }));
}

#[test]
fn qp_terminates_and_witnesses_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let mut f = random_sextic(&mut rng, 8);
        if rng.gen_bool(0.3) {
            f = f.scale(&rational(1, 4));
        }
        for &p in &[2u64, 3, 5] {
            let d = qp_points_exist(&f, Prime::new(p).unwrap()).unwrap();
            match &d.evidence {
                QpEvidence::Point(w) => assert!(w.verify(&f)),
                QpEvidence::Empty(_) => {
                    assert!(brute_point(&f, 12).is_none(), "{f} at {p}");
                    assert!(pix_core::arith::exact_sqrt(&f.leading()).is_none());
                }
            }
        }
    }
}
