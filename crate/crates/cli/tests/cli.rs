use std::process::{Command, Output};

use serde_json::Value;

fn kummer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kummer")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = kummer(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn strs(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn phi_matrix_rows_and_formats_agree() {
    let (code, v) = json(&["phi-matrix", "--m", "1", "--rows", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema_version"], 1);
    let rows: Vec<Vec<String>> = v["rows"].as_array().unwrap().iter().map(strs).collect();
    assert_eq!(rows, vec![vec!["1"], vec!["7", "24"], vec!["511", "4080", "5760"]]);
    assert_eq!(strs(&v["moduli"]), vec!["1", "24", "5760"]);

    let csv = String::from_utf8(kummer(&["phi-matrix", "--m", "1", "--rows", "2", "--format", "csv"]).stdout).unwrap();
    let mut from_csv = vec![Vec::new(); 3];
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        from_csv[f[0].parse::<usize>().unwrap()].push(f[2].to_string());
    }
    assert_eq!(from_csv, rows);

    let (_, single) = json(&["phi-matrix", "--rows", "0"]);
    assert_eq!(single["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn output_is_deterministic() {
    let args = ["psi2", "--set", "l2=5", "--K", "8"];
    assert_eq!(kummer(&args).stdout, kummer(&args).stdout);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(json(&["verify", "mom-euler", "--seq", "1,7,511"]).0, 0);
    assert_eq!(json(&["verify", "mom-euler", "--seq", "1,8,511"]).0, 1);
    let (code, v) = json(&["verify", "tmf", "--seq", "2,2,2,2"]);
    assert_eq!(code, 1);
    assert_eq!(v["report"]["first_failure_weight"], 4);
    assert_eq!(json(&["verify", "mom-euler", "--seq", ""]).0, 2);
    assert_eq!(json(&["verify", "mom-euler", "--seq", "1.5"]).0, 2);
    assert_eq!(json(&["verify", "mom-euler"]).0, 2);
    assert_eq!(json(&["phi-matrix", "--m", "0"]).0, 2);
    assert_eq!(json(&["no-such-command"]).0, 2);
}

#[test]
fn eisenstein_psi0_spin_extend() {
    let (code, v) = json(&["eisenstein", "--k", "4", "--terms", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["a0"], "1/240");
    assert_eq!(strs(&v["coefficients"])[..4], ["1", "9", "28", "73"]);

    let (code, v) = json(&["psi0", "--m", "2", "--set", "l2=1", "--K", "6"]);
    assert_eq!(code, 0);
    assert_eq!(strs(&v["sequence"]["values"])[0], "5760");

    let (code, v) = json(&["spin-extend", "--p", "2", "--b2", "5:8", "--K", "8"]);
    assert_eq!(code, 0);
    let b2: i64 = strs(&v["sequence"]["values"])[0].parse().unwrap();
    assert_eq!(b2.rem_euclid(256), 5);
    assert_eq!(json(&["spin-extend", "--p", "4", "--b2", "5:8"]).0, 2);
}

#[test]
fn lift_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("kummer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("psi2.json");
    let p = path.to_str().unwrap();
    assert_eq!(json(&["psi2", "--set", "l2=3", "--set", "l5=-7", "--K", "8", "--out", p]).0, 0);
    let psi2: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let (code, lifted) = json(&["lift", "--in", p, "--K", "8"]);
    assert_eq!(code, 0);
    assert_eq!(lifted["status"], "lifted");
    assert_eq!(lifted["multipliers"], psi2["multipliers"]);
    assert_eq!(json(&["check-tmf", "--in", p, "--K", "8"]).0, 0);
    assert_eq!(json(&["check-ko", "--in", p, "--K", "8", "--primes", "2,3,5"]).0, 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lift_eisenstein_and_691() {
    let consts = "1/240,-1/504,1/480,-1/264,691/65520";
    let (code, v) = json(&["lift", "--seq", consts, "--K", "6"]);
    assert_eq!(code, 0);
    assert!(strs(&v["multipliers"]["values"]).iter().all(|r| r == "1"));

    let (code, v) = json(&["lift", "--lattice", "0,0,0,0,1", "--K", "6"]);
    assert_eq!(code, 1);
    assert_eq!(v["obstruction"]["prime"], 691);
    assert_eq!(v["obstruction"]["weight"], 12);
    assert_eq!(v["obstruction"]["deficit"], 1);
}

#[test]
fn basis_dump_constants() {
    let (code, v) = json(&["basis-dump", "--p", "5", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["modulus"], "120");
    assert_eq!(strs(&v["data"]["c_coeffs"]), vec!["-4", "5"]);
}
