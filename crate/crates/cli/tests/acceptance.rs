//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use pix_core::arith::{Place, Prime, Rational};
use pix_core::calculus::{check_trace, classify_case, derive_period_index, is_admissible, Case, Triple};
use pix_core::cert::CertificateBundle;
use pix_core::curve::{EllipticModel, HyperellipticModel};
use pix_core::divisor::{check_identity, verify_case3_identity, FunctionSpec};
use pix_core::forge::{build_case2, case3_tower, twist_params, ForgeOptions};
use pix_core::local::{
    count_affine_points, deficiency_at_place, find_smooth_point, hensel_lift, qp_points_exist, weil_lower_bound,
    QpEvidence, Verdict,
};
use pix_core::poly::{FieldElem, Poly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rat(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

// ---- independent oracles -------------------------------------------------

fn is_prime_trial(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// `⌈q + 1 - 4√q⌉` by comparing squares: the least `n` with `q + 1 - n ≤ 4√q`.
fn weil_oracle(q: i64) -> i64 {
    let mut n = q + 1;
    loop {
        let d = q + 1 - (n - 1);
        if d > 0 && d * d > 16 * q {
            return n;
        }
        n -= 1;
    }
}

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

fn vp(n: &BigInt, p: u64) -> u32 {
    let p = big(p as i64);
    let mut n = n.abs();
    let mut k = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        k += 1;
    }
    k
}

/// `v_p` of a nonzero rational.
fn vp_rat(x: &Rational, p: u64) -> i64 {
    vp(x.numer(), p) as i64 - vp(x.denom(), p) as i64
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

fn reduce_coeffs(f: &Poly<Rational>, p: u64) -> Vec<u64> {
    let pb = big(p as i64);
    f.coeffs()
        .iter()
        .map(|c| {
            let r = ((c.numer() % &pb) + &pb) % &pb;
            r.to_string().parse().unwrap()
        })
        .collect()
}

// ---- criteria ------------------------------------------------------------

fn genus_two_enumeration() -> Outcome {
    let start = Instant::now();
    let pairs: Vec<(u64, u64)> = (1..=20)
        .flat_map(|p| (1..=20).map(move |i| (p, i)))
        .filter(|&(p, i)| is_admissible(Triple::new(2, p, i)).0)
        .collect();
    let elapsed = start.elapsed();
    ensure(pairs == vec![(1, 1), (1, 2), (2, 2)], format!("pairs {pairs:?}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("{{(1,1), (1,2), (2,2)}} in {elapsed:?}"))
}

fn case2_golden() -> Outcome {
    let start = Instant::now();
    let e = EllipticModel::new(1, 2).map_err(|e| e.to_string())?;
    let curve = build_case2(&e, ForgeOptions::default()).map_err(|e| e.to_string())?;
    let twist = curve.params.twist.as_ref().ok_or("no twist")?;
    let m = twist.modulus.value();
    ensure(m == 120120, format!("M = {m}"))?;
    let pi = twist.pi.get();
    ensure(is_prime_trial(pi) && pi % m == 1, format!("pi = {pi}"))?;
    let alpha: u128 = twist.alpha.to_string().parse().map_err(|_| "alpha")?;
    ensure(
        pow_mod(alpha, (pi as u128 - 1) / 2, pi as u128) == pi as u128 - 1,
        format!("alpha = {alpha} is a residue"),
    )?;
    let report = curve.certificates.deficiency_report.as_ref().ok_or("no report")?;
    ensure(report.deficient_places == vec![Place::Finite(twist.pi)], "deficient places")?;

    let f = twist.model().f().clone();
    let mut good = 0;
    for cert in &report.certificates {
        let in_modulus = match cert.place {
            Place::Real => true,
            Place::Finite(p) => m % p.get() == 0,
        };
        match (&cert.verdict, cert.place) {
            (Verdict::InfinityRational { .. }, _) if in_modulus => {}
            (_, _) if in_modulus => return Err(format!("{} is not infinity_rational", cert.place)),
            (Verdict::EmptyByValuation { .. }, Place::Finite(p)) if p.get() == pi => {}
            (Verdict::PointFound { witness, .. }, Place::Finite(p)) => {
                // y² - f(z) ≡ 0 mod p^k, with f p-integral at good places
                let pk = big(p.get() as i64).pow(witness.precision);
                let diff = rat(&(&witness.y * &witness.y)) - f.eval(&rat(&witness.z));
                let ok = witness.precision >= 3
                    && (diff.denom() % big(p.get() as i64)) != BigInt::zero()
                    && (diff.numer() % &pk).is_zero();
                ensure(ok, format!("witness at {p} does not check"))?;
                good += 1;
            }
            _ => return Err(format!("unexpected certificate at {}", cert.place)),
        }
    }
    let expected_good = pix_core::arith::primes_up_to(1000)
        .into_iter()
        .filter(|p| m % p != 0 && *p != pi)
        .count();
    ensure(good == expected_good, format!("{good} good places, expected {expected_good}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!("M = {m}, pi = {pi}, alpha = {alpha}, one deficient place, {good} Hensel witnesses, {elapsed:?}"))
}

fn oracle_agreement() -> Outcome {
    let inputs = [(1, 2), (3, 5), (1, 3), (2, 3), (1, 4), (3, 7)];
    for (b, c) in inputs {
        let e = EllipticModel::new(b, c).map_err(|e| e.to_string())?;
        let params = twist_params(&e, None).map_err(|e| e.to_string())?;
        let d = qp_points_exist(params.model().f(), params.pi).map_err(|e| e.to_string())?;
        ensure(!d.exists, format!("E({b},{c}): points at pi"))?;
        let cert = deficiency_at_place(&params, Place::Finite(params.pi), &[]).map_err(|e| e.to_string())?;
        ensure(
            cert.deficient && matches!(cert.verdict, Verdict::EmptyByValuation { .. }),
            format!("E({b},{c}): no valuation certificate"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let primes = [3u64, 5, 7, 17];
    let (mut trials, mut found) = (0, 0);
    while trials < 100 {
        let p = primes[trials % 4];
        let f = random_sextic(&mut rng, 40);
        if find_smooth_point(&reduce_coeffs(&f, p), p).is_none() {
            continue;
        }
        trials += 1;
        let d = qp_points_exist(&f, Prime::new(p).unwrap()).map_err(|e| e.to_string())?;
        if let QpEvidence::Point(w) = &d.evidence {
            if d.exists && w.verify(&f) {
                found += 1;
            }
        }
    }
    ensure(found >= 95, format!("{found}/100 witnesses"))?;
    Ok(format!("empty at pi for {} curves; {found}/100 witnesses verified", inputs.len()))
}

fn case3_divisor() -> Outcome {
    let e = EllipticModel::new(1, 2).map_err(|e| e.to_string())?;
    let params = twist_params(&e, None).map_err(|e| e.to_string())?;
    let tower = case3_tower(&params).map_err(|e| e.to_string())?;
    let model: HyperellipticModel = params.model().base_extend(&tower.k2);
    let check = verify_case3_identity(&model, "w", &tower.roots).map_err(|e| e.to_string())?;
    ensure(check.holds && check.lhs == check.rhs, "identity fails on the golden instance")?;
    ensure(check.lhs.degree() == 0, "nonzero degree")?;

    let [ra, rb, rc] = tower.roots.clone();
    let lin = Poly::linear;
    let flipped = FunctionSpec { m: 1, g: Poly::one(), h: Poly::product(&[lin(&ra.neg()), lin(&rb), lin(&rc)]) };
    let doubled = FunctionSpec { m: 1, g: Poly::one(), h: Poly::product(&[lin(&ra), lin(&ra), lin(&rb), lin(&rc)]) };
    let standard = FunctionSpec::y_over_product(&tower.roots);
    let swapped = [ra.neg(), rb.clone(), rc.clone()];
    let perturbed = [
        ("factor sign flip", check_identity(&model, "w", &tower.roots, &flipped)),
        ("root swap", check_identity(&model, "w", &swapped, &standard)),
        ("multiplicity change", check_identity(&model, "w", &tower.roots, &doubled)),
    ];
    for (name, c) in perturbed {
        let c = c.map_err(|e| format!("{name}: {e}"))?;
        ensure(!c.holds, format!("{name} still holds"))?;
    }
    Ok("sigma D - D on the golden instance; 3 perturbations rejected".into())
}

fn derivation_coverage() -> Outcome {
    let start = Instant::now();
    let (mut count, mut case_ii) = (0, 0);
    for g in 3..=10u64 {
        for p in 1..=20u64 {
            for i in 1..=20u64 {
                let t = Triple::new(g, p, i);
                if !is_admissible(t).0 || i % 4 == 0 {
                    continue;
                }
                let tr = derive_period_index(t).map_err(|e| format!("{t}: {e}"))?;
                let c = tr.conclusion;
                ensure((c.period, c.index, c.genus) == (p, i, g), format!("{t}: wrong conclusion"))?;
                check_trace(&tr).map_err(|e| format!("{t}: {e}"))?;
                if classify_case(t).unwrap() == Case::Ii {
                    ensure(tr.setup.m % 2 == 1, format!("{t}: m even"))?;
                    case_ii += 1;
                }
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("{count} triples checked ({case_ii} in case ii, m odd), {elapsed:?}"))
}

fn local_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let primes: Vec<u64> = (2..=31).filter(|&n| is_prime_trial(n)).collect();
    for _ in 0..100 {
        let f = random_sextic(&mut rng, 1000);
        for &p in &primes {
            let fbar = reduce_coeffs(&f, p);
            let c = count_affine_points(&fbar, p);
            ensure((c.total, c.smooth) == naive_count(&fbar, p), format!("count mismatch at {p}"))?;
        }
    }
    for q in [16, 17, 25] {
        ensure(weil_lower_bound(q as u64) == weil_oracle(q), format!("weil({q})"))?;
    }
    ensure(weil_oracle(16) == 1 && weil_oracle(17) == 2 && weil_oracle(25) == 6, "weil oracle values")?;

    // local points on E: y² = x(x - b)(x - c) at good primes
    let curves = [(1i64, 2i64, 7u64), (3, 5, 11), (1, 3, 13), (2, 7, 17), (1, 4, 19)];
    let (mut points, mut odd_rejected) = (0, 0);
    let mut attempts = 0;
    while points < 50 {
        attempts += 1;
        ensure(attempts < 100_000, "too few local points")?;
        let (b, c, p) = curves[rng.gen_range(0..curves.len())];
        let e = EllipticModel::new(b, c).map_err(|e| e.to_string())?;
        let j: i32 = rng.gen_range(-3..=3);
        let u = loop {
            let u: i64 = rng.gen_range(1..(p * p * p) as i64);
            if u % p as i64 != 0 {
                break u;
            }
        };
        let pj = Rational::from_integer(big(p as i64)).pow(j);
        let x = pj * rat(&big(u));
        let rhs = e.rhs(&x);
        if rhs.is_zero() {
            continue;
        }
        // rhs = p^v · w with w a unit; a square iff v even and w a square mod p
        let v = vp_rat(&rhs, p);
        let unit = rhs.clone() / Rational::from_integer(big(p as i64)).pow(v as i32);
        let pb = big(p as i64);
        let w_mod = ((unit.numer() * pow_inv(unit.denom(), &pb)) % &pb + &pb) % &pb;
        let w_mod: u64 = w_mod.to_string().parse().unwrap();
        let y0 = (1..p).find(|y| y * y % p == w_mod);
        if v % 2 != 0 || y0.is_none() {
            if j % 2 != 0 {
                odd_rejected += 1;
            }
            continue;
        }
        let lifted = hensel_lift(&Poly::constant(unit.clone()), Prime::new(p).unwrap(), (&BigInt::zero(), &big(y0.unwrap() as i64)), 3)
            .map_err(|e| e.to_string())?;
        // y = p^{v/2}·lifted.y satisfies y² ≡ rhs(x) to relative precision p³
        let y = Rational::from_integer(big(p as i64)).pow((v / 2) as i32) * rat(&lifted.y);
        let err = &y * &y - &rhs;
        ensure(err.is_zero() || vp_rat(&err, p) >= v + 3, "lifted point is off the curve")?;
        ensure(vp_rat(&x, p) % 2 == 0, format!("odd valuation v(x) = {} at {p}", vp_rat(&x, p)))?;
        points += 1;
    }
    Ok(format!(
        "counts agree at all p <= 31; weil 16/17/25 -> 1/2/6; 50 local points with even v(x) ({odd_rejected} odd-valuation x rejected)"
    ))
}

fn pow_inv(d: &BigInt, p: &BigInt) -> BigInt {
    // d^(p-2) mod p
    d.modpow(&(p - 2), p)
}

fn fixtures() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

fn verify_exit(path: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_pix"))
        .arg("verify")
        .arg(path)
        .env_remove("PIX_SEARCH_CEILING")
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

type Mutation = (&'static str, &'static str, fn(&mut serde_json::Value));

fn mutations() -> Vec<Mutation> {
    fn twist(v: &mut serde_json::Value) -> &mut serde_json::Value {
        &mut v["artifacts"]["curve"]["params"]["twist"]
    }
    fn report(v: &mut serde_json::Value) -> &mut serde_json::Value {
        &mut v["artifacts"]["curve"]["certificates"]["deficiency_report"]
    }
    vec![
        ("alpha replaced by a residue", "forge-case2.json", |v| twist(v)["alpha"] = "4".into()),
        ("pi replaced", "forge-case2.json", |v| twist(v)["pi"] = "120157".into()),
        ("deficient flag cleared", "forge-case2.json", |v| {
            let certs = report(v)["certificates"].as_array_mut().unwrap();
            let pi = certs.iter_mut().find(|c| c["deficient"] == true).unwrap();
            pi["deficient"] = false.into();
        }),
        ("witness ordinate changed", "forge-case2.json", |v| {
            let certs = report(v)["certificates"].as_array_mut().unwrap();
            let w = &mut certs.iter_mut().find(|c| c["verdict"] == "point_found").unwrap()["witness"];
            let y: i64 = w["y"].as_str().unwrap().parse().unwrap();
            w["y"] = (y + 1).to_string().into();
        }),
        ("model coefficient changed", "forge-case1.json", |v| {
            v["artifacts"]["curve"]["model"]["coefficients"][0] = "-7".into()
        }),
        ("conclusion changed", "forge-case1.json", |v| v["conclusions"]["index"] = "2".into()),
        ("schema version changed", "forge-case1.json", |v| v["version"] = "pix/2".into()),
        ("divisor identity flag cleared", "forge-case3.json", |v| {
            v["artifacts"]["curve"]["certificates"]["divisor_certificate"]["identity_holds"] = false.into()
        }),
        ("trace operand changed", "pipeline-4-1-2.json", |v| {
            let steps = v["artifacts"]["derivation_trace"]["steps"].as_array_mut().unwrap();
            let s = steps.iter_mut().find(|s| s["justification_tag"] == "fact.4").unwrap();
            s["operands"][0]["value"] = "3".into();
        }),
        ("deviation note removed", "forge-case2.json", |v| v["deviations"] = serde_json::json!([])),
    ]
}

fn determinism_and_verification() -> Outcome {
    let files = fixtures();
    ensure(files.len() >= 6, "golden corpus incomplete")?;
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let b = CertificateBundle::from_json(&text).map_err(|e| e.to_string())?;
        ensure(b.to_json() == text, format!("{} does not round-trip", f.display()))?;
        let (code, out) = verify_exit(f);
        ensure(code == 0, format!("{}: exit {code}\n{out}", f.display()))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let muts = mutations();
    for (i, (name, file, mutate)) in muts.iter().enumerate() {
        let text = std::fs::read_to_string(base.join(file)).map_err(|e| e.to_string())?;
        let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        mutate(&mut v);
        let path = dir.path().join(format!("tampered-{i}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).map_err(|e| e.to_string())?;
        let (code, out) = verify_exit(&path);
        ensure(code != 0, format!("tamper '{name}' accepted"))?;
        if *name == "alpha replaced by a residue" {
            ensure(out.contains("alpha_nonresidue_mod_pi"), "alpha tamper does not name the hypothesis")?;
        }
    }
    Ok(format!("{} golden bundles verify and round-trip; {}/{} tampered bundles rejected", files.len(), muts.len(), muts.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("genus-2 enumeration", genus_two_enumeration),
        ("case-2 golden instance", case2_golden),
        ("independent-oracle agreement", oracle_agreement),
        ("case-3 divisor certificate", case3_divisor),
        ("derivation coverage", derivation_coverage),
        ("local-arithmetic oracles", local_oracles),
        ("determinism and verification", determinism_and_verification),
    ];
    let mut failed = Vec::new();
    for (n, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", n + 1),
            Err(why) => {
                println!("criterion {} ({name}): FAIL - {why}", n + 1);
                failed.push(n + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
