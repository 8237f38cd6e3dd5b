use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};

use kummer_core::basis::{basis_data, big_e_poly, c_valuation, e_poly};
use kummer_core::error::Error;
use kummer_core::exact::{primes_s, ProfiniteResidue, Rational};
use kummer_core::measures::default_generator;
use kummer_core::momgroups::{
    mom0_check, mom_euler_check, phi_matrix, psi0_apply, PrecisionBudget, Psi0Params,
};
use kummer_core::orientations::{
    cusp_evaluate, eisenstein, ko_check, ko_from_lattice, lift_to_tmf, psi2_apply, spin_extend,
    tmf_check, KOSeq, LiftOutcome, TmfSeq, Variant,
};
use kummer_core::report::CheckReport;
use kummer_core::seq::EvenSeq;

use crate::input::{
    parse_int_list, parse_param, parse_rational_list, parse_residue, read_sequence_file,
    to_integers, ParamSet, UsageError,
};
use crate::output::{report_into, seq_csv, seq_json, seq_text, strings, Doc};
use crate::{Checker, Cli, Command, SeqInput, VariantArg};

const PASS: u8 = 0;
const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;

enum Failure {
    Usage(String),
    Negative(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotInMom0(_)
            | Error::NotInMomEuler { .. }
            | Error::NotInZetaIdeal { .. }
            | Error::NonzeroMass(_)
            | Error::NotGenerator { .. } => Failure::Negative(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(u8, Doc), Failure>;

pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::PhiMatrix { m, rows } => cmd_phi_matrix(*m, *rows),
        Command::Verify { checker, input, m } => cmd_verify(cli, *checker, input, *m),
        Command::Psi0 { m, set } => cmd_psi0(cli, *m, set),
        Command::Psi2 { input, set } => cmd_psi2(cli, input, set),
        Command::Eisenstein { k } => cmd_eisenstein(cli, *k),
        Command::CheckKo { variant, input } => cmd_check_ko(cli, *variant, input),
        Command::CheckTmf { input } => cmd_verify(cli, Checker::Tmf, input, 2),
        Command::Lift { input, lattice } => cmd_lift(cli, input, lattice.as_deref()),
        Command::SpinExtend { p, b2, lattice } => cmd_spin_extend(cli, *p, b2, lattice.as_deref()),
        Command::BasisDump { p, n, k, m } => cmd_basis_dump(*p, *n, *k, *m),
    };
    let (code, doc) = match outcome {
        Ok(done) => done,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return USAGE;
        }
        Err(Failure::Negative(msg)) => {
            let mut doc = Doc::new("error");
            doc.set("status", json!("fail"));
            doc.set("detail", json!(msg));
            doc.csv_row(["status", "detail"]);
            doc.csv_row(["fail".to_string(), msg.replace(',', ";")]);
            doc.line(format!("FAIL: {msg}"));
            (NEGATIVE, doc)
        }
    };
    if let Err(e) = doc.emit(cli.format, cli.out.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return USAGE;
    }
    code
}

fn budget(cli: &Cli) -> PrecisionBudget {
    cli.primes.iter().map(|&p| (p, cli.precision)).collect()
}

fn read_seq(input: &SeqInput, keys: &[&str]) -> Result<Vec<Rational>, Failure> {
    let values = match (&input.seq, &input.input) {
        (Some(s), None) => parse_rational_list(s)?,
        (None, Some(path)) => read_sequence_file(path, keys)?,
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --seq or --in, not both".into())),
        (None, None) => return Err(Failure::Usage("a sequence is required (--seq or --in)".into())),
    };
    if values.is_empty() {
        return Err(Failure::Usage("empty sequence".into()));
    }
    Ok(values)
}

fn verdict(report: &CheckReport) -> u8 {
    if report.passed() {
        PASS
    } else {
        NEGATIVE
    }
}

fn cmd_phi_matrix(m: u64, rows: u64) -> Outcome {
    let phi = phi_matrix(m, rows)?;
    let mut doc = Doc::new("phi-matrix");
    doc.set("m", json!(m));
    doc.set("rows", serde_json::to_value(&phi).expect("serializable")["rows"].clone());
    doc.set("moduli", strings(&phi.moduli));
    doc.set("prime_sets", json!(phi.prime_sets));
    doc.csv_row(["k", "j", "value"]);
    for (k, row) in phi.rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            doc.csv_row([k.to_string(), j.to_string(), v.to_string()]);
        }
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let primes: Vec<String> = phi.prime_sets[k].iter().map(ToString::to_string).collect();
        doc.line(format!(
            "weight {:>3}: ({})  M = {}  S = {{{}}}",
            2 * (k as u64 + m),
            cells.join(", "),
            phi.moduli[k],
            primes.join(", ")
        ));
    }
    Ok((PASS, doc))
}

fn cmd_verify(cli: &Cli, checker: Checker, input: &SeqInput, m: u64) -> Outcome {
    let keys: &[&str] = match checker {
        Checker::MomEuler | Checker::Mom0 => &["sequence", "values"],
        Checker::KoSpin | Checker::KoString => &["ko_sequence", "sequence", "values"],
        Checker::Tmf => &["multipliers", "values"],
    };
    let values = read_seq(input, keys)?;
    let k_max = cli.k_max;
    let report = match checker {
        Checker::MomEuler => {
            let seq = EvenSeq::new(m, to_integers(&values)?);
            mom_euler_check(&seq, k_max)?
        }
        Checker::Mom0 => {
            let seq = EvenSeq::new(m, to_integers(&values)?);
            mom0_check(&seq, k_max, &budget(cli))?.0
        }
        Checker::KoSpin => ko_check(&KOSeq::new(Variant::Spin, values), k_max, &samples(cli)?)?,
        Checker::KoString => ko_check(&KOSeq::new(Variant::String, values), k_max, &samples(cli)?)?,
        Checker::Tmf => tmf_check(&TmfSeq::new(values), k_max, cli.terms, &budget(cli))?,
    };
    let mut doc = Doc::new("verify");
    report_into(&mut doc, &report);
    Ok((verdict(&report), doc))
}

fn samples(cli: &Cli) -> Result<Vec<(u64, BigInt)>, Failure> {
    cli.primes
        .iter()
        .map(|&p| Ok((p, BigInt::from(default_generator(p)?))))
        .collect()
}

fn cmd_check_ko(cli: &Cli, variant: VariantArg, input: &SeqInput) -> Outcome {
    let checker = match variant {
        VariantArg::Spin => Checker::KoSpin,
        VariantArg::String => Checker::KoString,
    };
    cmd_verify(cli, checker, input, 1)
}

fn build_psi0(cli: &Cli, m: u64, set: &[String]) -> Result<(Psi0Params, EvenSeq<BigInt>), Failure> {
    let k_max = cli.k_max;
    if m == 0 || k_max < m {
        return Err(Failure::Usage(format!("need 1 <= m <= K, got m = {m}, K = {k_max}")));
    }
    let mut params = Psi0Params::zero(m, k_max);
    let precisions: Vec<(u64, u32)> =
        primes_s(k_max).into_iter().map(|p| (p, c_valuation(p, k_max))).collect();
    for s in set {
        match parse_param(s)? {
            ParamSet::Integer { k, value } if (1..m).contains(&k) => {
                params.profinite[(k - 1) as usize] = ProfiniteResidue::from_integer(&value, &precisions);
            }
            ParamSet::Integer { k, value } if (m..=k_max).contains(&k) => {
                params.integers[(k - m) as usize] = value;
            }
            ParamSet::Residue { k, residue } if (1..m).contains(&k) => {
                params.profinite[(k - 1) as usize].insert(residue);
            }
            other => return Err(Failure::Usage(format!("parameter out of range: {other:?}"))),
        }
    }
    let seq = psi0_apply(&params, k_max)?;
    Ok((params, seq))
}

fn cmd_psi0(cli: &Cli, m: u64, set: &[String]) -> Outcome {
    let (params, seq) = build_psi0(cli, m, set)?;
    let mut doc = Doc::new("psi0");
    doc.set("params", serde_json::to_value(&params).expect("serializable"));
    doc.set("sequence", seq_json(&seq));
    seq_csv(&mut doc, &seq);
    seq_text(&mut doc, "b", &seq);
    Ok((PASS, doc))
}

fn cmd_psi2(cli: &Cli, input: &SeqInput, set: &[String]) -> Outcome {
    let q = if input.seq.is_none() && input.input.is_none() {
        build_psi0(cli, 2, set)?.1
    } else {
        if !set.is_empty() {
            return Err(Failure::Usage("--set cannot be combined with an input sequence".into()));
        }
        EvenSeq::new(2, to_integers(&read_seq(input, &["sequence", "values"])?)?)
    };
    let tmf = psi2_apply(&q, cli.k_max, &budget(cli))?;
    let ko = cusp_evaluate(&tmf);
    let mut doc = Doc::new("psi2");
    doc.set("q", seq_json(&q));
    doc.set("multipliers", seq_json(&tmf.multipliers));
    doc.set("ko_sequence", seq_json(&ko.seq));
    seq_csv(&mut doc, &tmf.multipliers);
    seq_text(&mut doc, "r", &tmf.multipliers);
    seq_text(&mut doc, "b", &ko.seq);
    Ok((PASS, doc))
}

fn cmd_eisenstein(cli: &Cli, k: u64) -> Outcome {
    let g = eisenstein(k, cli.terms)?;
    let mut doc = Doc::new("eisenstein");
    doc.set("weight", json!(k));
    doc.set("terms", json!(cli.terms));
    doc.set("a0", json!(g.a0.to_string()));
    doc.set("coefficients", strings(&g.coeffs));
    doc.csv_row(["weight", "n", "coefficient"]);
    for n in 0..=g.terms() {
        doc.csv_row([k.to_string(), n.to_string(), g.coeff(n).expect("in range").to_string()]);
    }
    doc.line(format!("G_{k} = {} + sum a_n q^n", g.a0));
    for (n, a) in g.coeffs.iter().enumerate() {
        doc.line(format!("a_{} = {a}", n + 1));
    }
    Ok((PASS, doc))
}

fn cmd_lift(cli: &Cli, input: &SeqInput, lattice: Option<&str>) -> Outcome {
    let k_max = cli.k_max;
    let ko = match lattice {
        Some(l) => {
            if input.seq.is_some() || input.input.is_some() {
                return Err(Failure::Usage("--lattice cannot be combined with an input sequence".into()));
            }
            ko_from_lattice(Variant::String, &parse_int_list(l)?, k_max)?
        }
        None => KOSeq::new(Variant::String, read_seq(input, &["ko_sequence", "sequence", "values"])?),
    };
    let mut doc = Doc::new("lift");
    doc.set("ko_sequence", seq_json(&ko.seq));
    match lift_to_tmf(&ko, k_max, &budget(cli))? {
        LiftOutcome::Lifted(tmf) => {
            doc.set("status", json!("lifted"));
            doc.set("multipliers", seq_json(&tmf.multipliers));
            seq_csv(&mut doc, &tmf.multipliers);
            doc.line("lifts to tmf");
            seq_text(&mut doc, "r", &tmf.multipliers);
            Ok((PASS, doc))
        }
        LiftOutcome::Obstructed(o) => {
            doc.set("status", json!("obstructed"));
            doc.set("obstruction", serde_json::to_value(&o).expect("serializable"));
            doc.csv_row(["prime", "weight", "deficit"]);
            doc.csv_row([o.prime.to_string(), o.weight.to_string(), o.deficit.to_string()]);
            doc.line(format!(
                "obstructed at p = {}, weight {}, valuation deficit {}",
                o.prime, o.weight, o.deficit
            ));
            doc.line(&o.detail);
            Ok((NEGATIVE, doc))
        }
    }
}

fn cmd_spin_extend(cli: &Cli, p: u64, b2: &str, lattice: Option<&str>) -> Outcome {
    let target = parse_residue(p, b2)?;
    let offsets = match lattice {
        Some(l) => parse_int_list(l)?,
        None => Vec::new(),
    };
    let seq = spin_extend(p, &target, &offsets, cli.k_max)?;
    let report = kummer_core::momgroups::mom_euler_check_local(&seq, cli.k_max, &[p])?;
    let mut doc = Doc::new("spin-extend");
    doc.set("prime", json!(p));
    doc.set("b2_target", json!(target.to_string()));
    doc.set("sequence", seq_json(&seq));
    doc.set("report", crate::output::report_json(&report));
    seq_csv(&mut doc, &seq);
    seq_text(&mut doc, "b", &seq);
    doc.line(format!("{p}-local congruences: {}", if report.passed() { "PASS" } else { "FAIL" }));
    Ok((verdict(&report), doc))
}

fn cmd_basis_dump(p: u64, n: Option<u64>, k: Option<u64>, m: u64) -> Outcome {
    let mut doc = Doc::new("basis-dump");
    doc.set("prime", json!(p));
    doc.csv_row(["object", "index", "degree", "coefficient", "value"]);
    let mut es = Vec::new();
    for j in 0..=2 {
        let e = e_poly(p, j)?;
        doc.line(format!("e_{j} = {e}"));
        push_poly_csv(&mut doc, "e", j, &e);
        es.push(json!({ "j": j, "poly": serde_json::to_value(&*e).expect("serializable") }));
    }
    doc.set("e", Value::Array(es));
    if let Some(n) = n {
        let big = big_e_poly(p, n)?;
        doc.line(format!("E_{n} = {big}"));
        push_poly_csv(&mut doc, "E", n, &big);
        doc.set("E", json!({ "n": n, "poly": serde_json::to_value(&*big).expect("serializable") }));
    }
    if let Some(k) = k {
        let data = basis_data(p, m, k)?;
        doc.line(format!("C_{p}({k}) = {}", data.modulus));
        let cs: Vec<String> = data.c_coeffs.iter().map(ToString::to_string).collect();
        doc.line(format!("c^({k},{p}) = ({})", cs.join(", ")));
        doc.csv_row(["C".to_string(), k.to_string(), String::new(), String::new(), data.modulus.to_string()]);
        for (j, c) in data.c_coeffs.iter().enumerate() {
            doc.csv_row(["c".to_string(), k.to_string(), (2 * j).to_string(), String::new(), c.to_string()]);
        }
        doc.set("data", serde_json::to_value(&data).expect("serializable"));
    }
    Ok((PASS, doc))
}

fn push_poly_csv(doc: &mut Doc, name: &str, index: u64, poly: &kummer_core::poly::PolyQ) {
    for (d, c) in poly.coeffs().iter().enumerate() {
        if !c.is_zero() {
            doc.csv_row([name.to_string(), index.to_string(), d.to_string(), c.to_string(), String::new()]);
        }
    }
}
