use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use kummer_core::exact::{int_valuation, rat_int, PadicResidue, ProfiniteResidue};
use kummer_core::measures::{
    check_bp, check_bp_tilde, default_generator, regularize, CosetMeasure,
};
use kummer_core::momgroups::{
    mom0_check, mom_euler_check, phi_apply, phi_apply_with, phi_invert, phi_invert_with,
    phi_matrix, psi0_apply, psi0_invert, PrecisionBudget, Psi0Params,
};
use kummer_core::orientations::{
    cusp_evaluate, ko_check, ko_from_lattice, lift_to_tmf, psi2_apply, tmf_check, LiftOutcome,
    Variant,
};
use kummer_core::seq::EvenSeq;

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn measure(p: u64, level: u32, precision: u32, vals: &[(u64, i64)]) -> CosetMeasure {
    let pn = p.pow(level);
    let units: Vec<u64> = (1..pn).filter(|x| x % p != 0).collect();
    CosetMeasure::from_values(
        p,
        level,
        precision,
        vals.iter().map(|&(i, v)| (BigInt::from(units[i as usize % units.len()]), BigInt::from(v))),
    )
    .unwrap()
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_is_additive_and_lands_in_mom_euler(
        m in 1u64..=2,
        a in prop::collection::vec(-1000i64..1000, 8),
        b in prop::collection::vec(-1000i64..1000, 8),
    ) {
        let k = m + 7;
        let matrix = phi_matrix(m, 7).unwrap();
        let (la, lb) = (big(&a), big(&b));
        let sum: Vec<BigInt> = la.iter().zip(&lb).map(|(x, y)| x + y).collect();
        let (sa, sb, ss) = (phi_apply_with(&matrix, &la), phi_apply_with(&matrix, &lb), phi_apply_with(&matrix, &sum));
        for i in 0..8 {
            prop_assert_eq!(&ss.entries()[i], &(&sa.entries()[i] + &sb.entries()[i]));
        }
        prop_assert!(mom_euler_check(&sa, k).unwrap().passed());
        prop_assert_eq!(phi_invert_with(&matrix, &sa).unwrap(), la);
    }

    #[test]
    fn perturbing_one_entry_leaves_mom_euler(
        a in prop::collection::vec(-50i64..50, 5),
        pos in 1usize..5,
    ) {
        let seq = phi_apply(1, &big(&a), 5).unwrap();
        let mut entries = seq.entries().to_vec();
        entries[pos] += 1;
        let bumped = EvenSeq::new(1, entries);
        prop_assert!(!mom_euler_check(&bumped, 5).unwrap().passed());
        prop_assert!(phi_invert(&bumped, 5).is_err());
    }

    #[test]
    fn convolution_multiplies_moments(
        p in small_prime(),
        level in 1u32..=3,
        a in prop::collection::vec((0u64..64, -30i64..30), 1..6),
        b in prop::collection::vec((0u64..64, -30i64..30), 1..6),
    ) {
        let (ma, mb) = (measure(p, level, 6, &a), measure(p, level, 6, &b));
        let conv = ma.convolve(&mb).unwrap();
        let weights = [0u64, 2, 4, 6, 10, 12];
        let (xa, xb, xc) = (
            ma.moments_of(&weights).unwrap(),
            mb.moments_of(&weights).unwrap(),
            conv.moments_of(&weights).unwrap(),
        );
        for i in 0..weights.len() {
            prop_assert_eq!(&xa[i].mul(&xb[i]), &xc[i]);
        }
    }

    #[test]
    fn regularization_is_exact(
        p in small_prime(),
        level in 1u32..=3,
        vals in prop::collection::vec((0u64..64, -30i64..30), 1..6),
    ) {
        let mu = measure(p, level, 5, &vals);
        let mass = mu.total_mass();
        let mut centred = mu.clone();
        centred.add_at(&BigInt::one(), &-mass.value().clone()).unwrap();
        let c = BigInt::from(default_generator(p).unwrap());
        let solved = regularize(&centred, &c).unwrap();
        prop_assert_eq!(solved.minus_push(&c).unwrap(), centred);
        if !mass.is_zero() {
            prop_assert!(regularize(&mu, &c).is_err());
        }
    }

    #[test]
    fn moment_sequences_satisfy_b_and_b_tilde(
        p in small_prime(),
        points in prop::collection::vec((1i64..500, -20i64..20), 1..5),
    ) {
        // a finite sum of Dirac measures at units of Z_p, moments computed exactly
        let points: Vec<(BigInt, BigInt)> = points
            .into_iter()
            .map(|(x, v)| (BigInt::from(if x % p as i64 == 0 { x + 1 } else { x }), BigInt::from(v)))
            .collect();
        let moments = |k: u64| -> BigInt {
            points.iter().map(|(x, v)| v * num_traits::pow(x.clone(), 2 * k as usize)).sum()
        };
        let seq = EvenSeq::new(1, (1..=8).map(|k| rat_int(moments(k))).collect());
        prop_assert!(check_bp(&seq, p, 8).unwrap().passed());
        let c = BigInt::from(default_generator(p).unwrap());
        prop_assert!(check_bp_tilde(&seq, p, 8, &[c.clone(), BigInt::from(7 * p as i64 + 1)]).unwrap().passed());

        // (B~) => (B): for a mass-zero measure nu, nu = (id - c_*) mu and the
        // quotient of moments by (1 - c^{2k}) is the moment sequence of mu
        let mass: BigInt = points.iter().map(|(_, v)| v.clone()).sum();
        let nu_moment = |k: u64| moments(k) - &mass;
        let quotient = EvenSeq::new(1, (1..=8).map(|k| {
            BigRational::new(nu_moment(k), BigInt::one() - num_traits::pow(c.clone(), 2 * k as usize))
        }).collect());
        prop_assert!(check_bp(&quotient, p, 8).unwrap().passed());
    }

    #[test]
    fn check_bp_failure_persists_with_truncation(
        p in small_prime(),
        vals in prop::collection::vec(-40i64..40, 6),
    ) {
        let seq = EvenSeq::new(1, vals.iter().map(|&v| rat_int(BigInt::from(v))).collect());
        let mut failed = false;
        for k in 1..=6 {
            let pass = check_bp(&seq, p, k).unwrap().passed();
            prop_assert!(!(failed && pass));
            failed |= !pass;
        }
    }
}

fn random_psi0_params(m: u64, k_max: u64, low: &[i64], high: &[i64]) -> Psi0Params {
    Psi0Params::from_integers(m, &big(low), &big(high), k_max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi0_round_trip(
        m in 2u64..=3,
        low in prop::collection::vec(-10_000i64..10_000, 2),
        high in prop::collection::vec(-100i64..100, 12),
    ) {
        let k_max = 10;
        let params = random_psi0_params(m, k_max, &low, &high);
        let seq = psi0_apply(&params, k_max).unwrap();
        let budget = PrecisionBudget::new();
        let (report, witness) = mom0_check(&seq, k_max, &budget).unwrap();
        prop_assert!(report.passed(), "{:?}", report);
        for res in witness.residues.values() {
            prop_assert!(res[0].is_zero());
        }
        let back = psi0_invert(&seq, k_max, &budget).unwrap();
        prop_assert!(back.agrees_with(&params));
        if m == 2 {
            prop_assert_eq!(psi0_apply(&back, k_max).unwrap(), seq.clone());
        }
        // the parameters are recovered exactly where the truncation pins them down
        for (l, orig) in back.profinite.iter().zip(&params.profinite) {
            for p in [2u64, 3] {
                prop_assert!(l.get(p).unwrap().precision() >= 1);
                prop_assert!(l.get(p).unwrap().agrees_with(orig.get(p).unwrap()));
            }
        }
    }

    #[test]
    fn psi0_moments_vanish_at_totients(high in prop::collection::vec(-100i64..100, 11), low in -500i64..500) {
        let params = random_psi0_params(2, 12, &[low], &high);
        let seq = psi0_apply(&params, 12).unwrap();
        // weight phi(p^r) moment of a mass-zero measure has valuation >= r
        for (p, weight, r) in [(2u64, 4u64, 3i64), (2, 8, 4), (2, 16, 5), (3, 6, 2), (3, 18, 3), (5, 20, 2)] {
            let v = int_valuation(seq.at_weight(weight).unwrap(), p);
            prop_assert!(v.is_at_least(r), "p={} weight={} v={}", p, weight, v);
        }
    }

    #[test]
    fn tmf_and_cusp_round_trip(high in prop::collection::vec(-30i64..30, 11), low in -100i64..100) {
        let k_max = 8;
        let params = random_psi0_params(2, k_max, &[low], &high);
        let q = psi0_apply(&params, k_max).unwrap();
        let budget = PrecisionBudget::new();
        let tmf = psi2_apply(&q, k_max, &budget).unwrap();
        prop_assert!(tmf_check(&tmf, k_max, 6, &budget).unwrap().passed());
        let ko = cusp_evaluate(&tmf);
        prop_assert!(ko_check(&ko, k_max, &[]).unwrap().passed());
        // torsor coordinate is -B_k/2k * q_k
        let t = ko.torsor_coordinate();
        for ((k, tk), qk) in t.iter().zip(q.entries()) {
            prop_assert_eq!(tk, &(kummer_core::orientations::eisenstein_constant(k) * rat_int(qk.clone())));
        }
        match lift_to_tmf(&ko, k_max, &budget).unwrap() {
            LiftOutcome::Lifted(back) => prop_assert_eq!(back, tmf),
            LiftOutcome::Obstructed(o) => prop_assert!(false, "obstructed: {:?}", o),
        }
    }

    #[test]
    fn ko_lattice_round_trip(v in prop::sample::select(vec![Variant::Spin, Variant::String]), l in prop::collection::vec(-500i64..500, 8)) {
        let k_max = v.m() + 7;
        let ko = ko_from_lattice(v, &big(&l), k_max).unwrap();
        prop_assert!(ko_check(&ko, k_max, &[(2, BigInt::from(3)), (3, BigInt::from(2))]).unwrap().passed());
        let t = ko.torsor_coordinate().map(|x| x.to_integer());
        prop_assert_eq!(phi_invert(&t, k_max).unwrap(), big(&l));
    }
}

#[test]
fn cusp_map_is_injective_on_multipliers() {
    let a = kummer_core::orientations::TmfSeq::new(vec![rat_int(1.into()), rat_int(2.into())]);
    let b = kummer_core::orientations::TmfSeq::new(vec![rat_int(1.into()), rat_int(3.into())]);
    assert_ne!(cusp_evaluate(&a), cusp_evaluate(&b));
}

#[test]
fn profinite_zero_is_neutral() {
    let z = ProfiniteResidue::from_integer(&BigInt::zero(), &[(2, 5), (3, 2)]);
    assert!(z.agrees_with(&ProfiniteResidue::new()));
    assert!(PadicResidue::zero(2, 5).is_zero());
}
