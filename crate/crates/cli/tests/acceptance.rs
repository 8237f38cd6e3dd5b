//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kummer_core::basis::{basis_data, basis_rank_check, c_valuation};
use kummer_core::exact::{bernoulli, padic_valuation, rat_int, von_staudt_check, PadicResidue, ProfiniteResidue, Valuation};
use kummer_core::measures::{default_generator, regularize, CosetMeasure};
use kummer_core::momgroups::{
    mom_euler_check, mom_euler_check_local, phi_apply_with, phi_invert_with,
    phi_matrix, psi0_apply, psi0_invert, PrecisionBudget, Psi0Params,
};
use kummer_core::orientations::{
    cusp_evaluate, eisenstein, hecke_tp, ko_check, ko_from_lattice, lift_to_tmf, psi2_apply,
    pullback_check, spin_extend, KOSeq, LiftOutcome, Variant,
};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn kummer(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_kummer")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), serde_json::from_slice(&out.stdout).unwrap_or(Value::Null))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (code, v) = kummer(&["phi-matrix", "--m", "1", "--rows", "2"]);
    let elapsed = start.elapsed();
    ensure(code == 0, format!("exit code {code}"))?;
    let rows: Vec<Vec<String>> = v["rows"]
        .as_array()
        .ok_or("no rows")?
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect())
        .collect();
    ensure(rows == vec![vec!["1"], vec!["7", "24"], vec!["511", "4080", "5760"]], format!("rows {rows:?}"))?;
    ensure(v["moduli"][1] == "24" && v["moduli"][2] == "5760", format!("moduli {}", v["moduli"]))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))
}

fn criterion_2() -> Check {
    let expected: [(u64, u64, i64, &[i64]); 5] = [
        (2, 1, 24, &[1]),
        (3, 1, 6, &[1]),
        (2, 2, 40320, &[-9, 10]),
        (3, 2, 36, &[-1, 2]),
        (5, 2, 120, &[-4, 5]),
    ];
    for (p, k, modulus, coeffs) in expected {
        let d = basis_data(p, 1, k).map_err(|e| e.to_string())?;
        ensure(
            d.modulus == BigInt::from(modulus) && d.c_coeffs == ints(coeffs),
            format!("C_{p}({k}) = {}, c = {:?}", d.modulus, d.c_coeffs),
        )?;
    }
    Ok(())
}

fn criterion_3() -> Check {
    let b12 = bernoulli(12);
    ensure((b12.numer() % BigInt::from(691)).is_zero(), format!("B_12 = {b12}"))?;
    for n in (2..=60).step_by(2) {
        ensure(von_staudt_check(n).map_err(|e| e.to_string())?, format!("von Staudt-Clausen fails at {n}"))?;
    }
    for p in [2u64, 3, 5] {
        for r in [2u32, 3] {
            let phi = p.pow(r - 1) * (p - 1);
            let x = bernoulli(phi as usize) / rat_int(BigInt::from(phi));
            let v = padic_valuation(&x, p);
            ensure(v == Valuation::Finite(-(r as i64)), format!("p = {p}, r = {r}: valuation {v}"))?;
        }
    }
    Ok(())
}

fn criterion_4() -> Check {
    let start = Instant::now();
    for p in [2u64, 3, 5, 7] {
        let top = if p == 2 { 5 } else { 3 };
        for n in 1..=top {
            for (shift, even) in [(0, false), (1, false), (0, true), (2, true)] {
                let ok = basis_rank_check(p, n, shift, even).map_err(|e| e.to_string())?;
                ensure(ok, format!("p = {p}, n = {n}, shift {shift}, even {even}"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k_max = 12;
    for m in [1u64, 2] {
        let matrix = phi_matrix(m, k_max - m).map_err(|e| e.to_string())?;
        for _ in 0..60 {
            let l: Vec<BigInt> = (0..=k_max - m).map(|_| BigInt::from(rng.gen_range(-1_000_000i64..1_000_000))).collect();
            let seq = phi_apply_with(&matrix, &l);
            ensure(mom_euler_check(&seq, k_max).map_err(|e| e.to_string())?.passed(), "phi output fails mom-euler")?;
            let back = phi_invert_with(&matrix, &seq).map_err(|e| e.to_string())?;
            ensure(back == l, "phi round trip")?;
        }
    }
    let budget = PrecisionBudget::new();
    for case in 0..100 {
        let m = 2 + case % 2;
        let low: Vec<BigInt> = (1..m).map(|_| BigInt::from(rng.gen_range(-100_000i64..100_000))).collect();
        let high: Vec<BigInt> = (m..=k_max).map(|_| BigInt::from(rng.gen_range(-1000i64..1000))).collect();
        let params = Psi0Params::from_integers(m, &low, &high, k_max);
        let seq = psi0_apply(&params, k_max).map_err(|e| e.to_string())?;
        let back = psi0_invert(&seq, k_max, &budget).map_err(|e| e.to_string())?;
        ensure(back.agrees_with(&params), format!("psi0 round trip, case {case}"))?;
        if m > 2 {
            // several unknown low moments are pinned down jointly, so
            // independent lifts of their residues need not be consistent
            continue;
        }
        // with a single unknown low moment any lift of its residue reproduces the sequence
        let mut lifted = back.clone();
        for l in lifted.profinite.iter_mut() {
            let mut full = ProfiniteResidue::new();
            for r in l.entries() {
                full.insert(PadicResidue::new(r.prime(), c_valuation(r.prime(), k_max), r.value().clone()));
            }
            *l = full;
        }
        ensure(psi0_apply(&lifted, k_max).ok() == Some(seq), format!("psi0 re-application, case {case}"))?;
    }
    Ok(())
}

fn random_measure(rng: &mut ChaCha8Rng, p: u64, level: u32, precision: u32) -> CosetMeasure {
    let pn = p.pow(level);
    let points: Vec<(BigInt, BigInt)> = (0..rng.gen_range(1..6))
        .map(|_| {
            let mut x = rng.gen_range(1..pn.max(2));
            if x % p == 0 {
                x += 1;
            }
            (BigInt::from(x), BigInt::from(rng.gen_range(-50i64..50)))
        })
        .collect();
    CosetMeasure::from_values(p, level, precision, points).expect("valid measure")
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let weights = [0u64, 2, 4, 6, 8, 12, 20];
    for case in 0..60 {
        let p = [2u64, 3, 5][case % 3];
        let level = 1 + (case / 3 % 3) as u32;
        let a = random_measure(&mut rng, p, level, 6);
        let b = random_measure(&mut rng, p, level, 6);
        let err = |e: kummer_core::Error| e.to_string();
        let conv = a.convolve(&b).map_err(err)?;
        let (ma, mb, mc) = (a.moments_of(&weights).map_err(err)?, b.moments_of(&weights).map_err(err)?, conv.moments_of(&weights).map_err(err)?);
        for i in 0..weights.len() {
            ensure(ma[i].mul(&mb[i]) == mc[i], format!("moments multiply, case {case}, weight {}", weights[i]))?;
        }
        let mut centred = a.clone();
        centred.add_at(&BigInt::one(), &-a.total_mass().value().clone()).map_err(err)?;
        let c = BigInt::from(default_generator(p).map_err(err)?);
        let mu = regularize(&centred, &c).map_err(err)?;
        ensure(mu.minus_push(&c).map_err(err)? == centred, format!("regularization, case {case}"))?;
    }
    Ok(())
}

fn criterion_7() -> Check {
    for k in (4..=20).step_by(2) {
        let g = eisenstein(k, 200).map_err(|e| e.to_string())?;
        ensure(g.coeffs.iter().all(|a| a.is_integer()), format!("G_{k} not integral"))?;
        ensure(g.a0 == -bernoulli(k as usize) / rat_int(BigInt::from(2 * k)), format!("G_{k} constant"))?;
    }
    for p in [2u64, 3, 5] {
        for k in (4..=14).step_by(2) {
            let terms = 40;
            let g = eisenstein(k, terms * p as usize).map_err(|e| e.to_string())?;
            let lhs = hecke_tp(&g, p, terms).map_err(|e| e.to_string())?;
            let eigen = rat_int(BigInt::one() + num_traits::pow(BigInt::from(p), k as usize - 1));
            ensure(lhs == g.truncate(terms).scale(&eigen), format!("T({p}) on G_{k}"))?;
        }
    }
    Ok(())
}

fn criterion_8() -> Check {
    let budget = PrecisionBudget::new();
    let err = |e: kummer_core::Error| e.to_string();
    let k_max = 10;
    match lift_to_tmf(&KOSeq::abs_point(Variant::String, k_max), k_max, &budget).map_err(err)? {
        LiftOutcome::Lifted(t) => ensure(t.multipliers.entries().iter().all(|r| r.is_one()), "r != 1")?,
        LiftOutcome::Obstructed(o) => return Err(format!("Eisenstein point obstructed: {o:?}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..24 {
        let low = [BigInt::from(rng.gen_range(-1000i64..1000))];
        let high: Vec<BigInt> = (0..k_max).map(|_| BigInt::from(rng.gen_range(-50i64..50))).collect();
        let q = psi0_apply(&Psi0Params::from_integers(2, &low, &high, k_max), k_max).map_err(err)?;
        let tmf = psi2_apply(&q, k_max, &budget).map_err(err)?;
        let ko = cusp_evaluate(&tmf);
        ensure(ko_check(&ko, k_max, &[]).map_err(err)?.passed(), format!("cusp image fails ko-string, case {case}"))?;
        match lift_to_tmf(&ko, k_max, &budget).map_err(err)? {
            LiftOutcome::Lifted(back) => ensure(back == tmf, format!("lift differs, case {case}"))?,
            LiftOutcome::Obstructed(o) => return Err(format!("case {case} obstructed: {o:?}")),
        }
    }
    for a in [1i64, 2, 690] {
        let ko = ko_from_lattice(Variant::String, &ints(&[0, 0, 0, 0, a]), 6).map_err(err)?;
        match lift_to_tmf(&ko, 6, &budget).map_err(err)? {
            LiftOutcome::Obstructed(o) => ensure(
                (o.prime, o.weight, o.deficit) == (691, 12, 1),
                format!("a = {a}: {o:?}"),
            )?,
            LiftOutcome::Lifted(_) => return Err(format!("a = {a} lifted")),
        }
    }
    let consts = "1/240,-1/504,1/480,-1/264,691/65520";
    ensure(kummer(&["lift", "--seq", consts, "--K", "6"]).0 == 0, "lift exit code on the Eisenstein point")?;
    let (code, v) = kummer(&["lift", "--lattice", "0,0,0,0,1", "--K", "6"]);
    ensure(code == 1 && v["obstruction"]["prime"] == 691, "lift exit code on the 691 example")?;
    ensure(kummer(&["lift", "--seq", "1/240,x"]).0 == 2, "lift exit code on malformed input")?;
    ensure(kummer(&["verify", "mom0", "--seq", "1", "--m", "2"]).0 == 1, "verify exit code on a negative verdict")
}

fn criterion_9() -> Check {
    let err = |e: kummer_core::Error| e.to_string();
    let k_max = 8;
    let run = |n: u32, value: i64| spin_extend(2, &PadicResidue::new(2, n, BigInt::from(value)), &[], k_max);
    let s8 = run(8, 5).map_err(err)?;
    let b2 = s8.at(1).ok_or("no b_2")?.to_integer();
    ensure(kummer_core::exact::modulo(&b2, &BigInt::from(256)) == BigInt::from(5), format!("b_2 = {b2}"))?;
    ensure(mom_euler_check_local(&s8, k_max, &[2]).map_err(err)?.passed(), "2-local congruences fail")?;
    ensure(pullback_check(&s8, &s8.window(2, k_max).map_err(err)?, 2, k_max).map_err(err)?, "pullback")?;
    // every N = 8 refinement of the N = 4 target gives a valid extension
    // whose b_2 reduces to the coarser target
    let s4 = run(4, 5).map_err(err)?;
    ensure(mom_euler_check_local(&s4, k_max, &[2]).map_err(err)?.passed(), "N = 4 extension fails")?;
    for lift in [5i64, 21, 37, 245] {
        let s = run(8, lift).map_err(err)?;
        ensure(mom_euler_check_local(&s, k_max, &[2]).map_err(err)?.passed(), format!("refinement {lift} fails"))?;
        let low = kummer_core::exact::modulo(&s.at(1).unwrap().to_integer(), &BigInt::from(16));
        ensure(low == BigInt::from(5), format!("refinement {lift} reduces to {low}"))?;
    }
    ensure(s4 == s8, "N = 4 and N = 8 extensions of 5 differ")
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("phi-matrix reproduction", criterion_1),
        ("basis constants", criterion_2),
        ("Bernoulli and valuations", criterion_3),
        ("basis rank", criterion_4),
        ("round trips", criterion_5),
        ("measure algebra", criterion_6),
        ("Eisenstein and Hecke", criterion_7),
        ("lifting", criterion_8),
        ("spin extension", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("PASS {} {name} ({secs:.2}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
