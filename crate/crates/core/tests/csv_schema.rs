//! The CSV files read by the plotting scripts: decay fits, martingale
//! checkpoints and identity z-tables. Golden copies live in `tests/golden`;
//! set `SLE_RHO_BLESS=1` to regenerate them.

use std::path::PathBuf;

use sle_rho::conformal::SlitHull;
use sle_rho::estimators::*;

const DECAY_HEADER: &str = "experiment,kappa,rho,alpha,a,exact,target_slope,estimate,stderr,n,seed,config_hash";
const MARTINGALE_HEADER: &str = "experiment,rho,x,y,a,t,m0,estimate,stderr,n,seed,config_hash";
const ZTABLE_HEADER: &str = "experiment,kappa,rho,alpha,a,estimate,stderr,n,seed,config_hash";

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn csv(records: &[Record]) -> String {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn check_against_golden(name: &str, fresh: &str, header: &str) {
    assert_eq!(fresh.lines().next(), Some(header));
    let path = golden(name);
    if std::env::var_os("SLE_RHO_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, fresh).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stored.lines().next(), Some(header), "{name} header drifted");
    assert_eq!(stored, fresh, "{name} is not reproduced byte for byte");
}

fn decay_csv() -> String {
    let cfg = MCConfig::new(2_000, 1e-3, 1.0, 7);
    let r = identity_decay(8.0 / 3.0, 0.0, 5.0 / 8.0, &[0.02, 0.05, 0.1, 0.2], &cfg).unwrap();
    csv(&r.records(&cfg))
}

fn martingale_csv() -> String {
    let cfg = MCConfig::new(200, 1e-3, 0.2, 7);
    let hull = SlitHull::new(1.0, 1.0).unwrap();
    let r = martingale_check(2.0, &hull, 0.1, &[0.05, 0.1, 0.2], &cfg).unwrap();
    csv(&r.records(&cfg))
}

fn ztable_csv() -> String {
    let cfg = MCConfig::new(2_000, 1e-3, 1.0, 7);
    let mut records = Vec::new();
    for (k, rho, alpha) in [(8.0 / 3.0, 0.0, 5.0 / 8.0), (6.0, 2.0, 1.0 / 3.0), (2.0, 0.0, 1.0)] {
        records.extend(verify_bessel_identity(k, rho, alpha, 1.0, &cfg).unwrap().records(&cfg));
    }
    csv(&records)
}

#[test]
fn decay_csv_schema() {
    let text = decay_csv();
    check_against_golden("decay.csv", &text, DECAY_HEADER);
    let rows = rows(&text);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[0], "decay");
        assert_eq!(r.len(), 12);
        let est: f64 = r[7].parse().unwrap();
        let se: f64 = r[8].parse().unwrap();
        assert!(est > 0.0 && se > 0.0);
        assert_eq!(r[6], "0.75");
    }
}

#[test]
fn martingale_csv_schema() {
    let text = martingale_csv();
    check_against_golden("martingale.csv", &text, MARTINGALE_HEADER);
    let rows = rows(&text);
    assert_eq!(rows.len(), 3);
    let times: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(times.windows(2).all(|t| t[1] > t[0]));
    for r in &rows {
        let m: f64 = r[7].parse().unwrap();
        assert!((0.0..=1.0).contains(&m));
    }
}

#[test]
fn ztable_csv_schema() {
    let text = ztable_csv();
    check_against_golden("ztable.csv", &text, ZTABLE_HEADER);
    let rows = rows(&text);
    assert_eq!(rows.len(), 9);
    // each case is an lhs, rhs, exact triple; the z-score is recoverable from the rows
    for case in rows.chunks(3) {
        let kinds: Vec<&str> = case.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(kinds, ["identity_lhs", "identity_rhs", "identity_exact"]);
        let num = |r: &Vec<String>, i: usize| -> f64 { r[i].parse().unwrap() };
        let z = (num(&case[0], 5) - num(&case[1], 5)) / num(&case[0], 6).hypot(num(&case[1], 6));
        assert!(z.is_finite());
        assert_eq!(num(&case[2], 6), 0.0);
    }
}

#[test]
fn reserved_columns_are_rejected() {
    let cfg = MCConfig::new(1, 1e-3, 1.0, 0);
    let est = sle_rho::mc::Estimate::exact(1.0, 1);
    let r = Record::new("x", &[("n", 1.0)], est, &cfg);
    assert!(write_records_csv(&[r], Vec::new()).is_err());
}
