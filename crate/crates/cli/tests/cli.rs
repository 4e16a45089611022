use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use msvou::calibration::{self, Market};
use msvou::fourier::PricingConfig;

const STEP_A: &str = "\
lambda = 0.774
a = -2.392
rho1 = -3.741
rho2 = -0.494
gamma1 = 0.027
gamma2 = 0
theta11 = 0.011
theta12 = 0.022
theta22 = 0.063
sigma0_11 = 0.019
sigma0_12 = 0.013
sigma0_22 = 0.017
r_dom = 0.00676
r_for1 = 0.00604
r_for2 = 0.00344
spot1 = 1.3249
spot2 = 1.5333
";

fn msvou(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msvou")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_model(dir: &Path) -> String {
    let p = dir.join("stepA.cfg");
    fs::write(&p, STEP_A).unwrap();
    p.to_string_lossy().into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace().find_map(|kv| kv.strip_prefix(&format!("{key}="))).unwrap().parse().unwrap()
}

#[test]
fn price_prints_one_line_matching_library() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let o = msvou(&["price", "--model", &model, "--pair", "EURUSD", "--strike", "1.30", "--maturity", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let file = calibration::load_model(&dir.path().join("stepA.cfg")).unwrap();
    let mk = file.market.clone().unwrap();
    let lib = calibration::price_option(&file.params, &mk, "EURUSD", 1.30, 0.5, &PricingConfig::default()).unwrap();
    assert_eq!(field(&out, "price"), lib.price);
    let cross = msvou(&["price", "--model", &model, "--pair", "EURGBP", "--strike", "0.86", "--maturity", "1", "--threads", "1"]);
    assert!(cross.status.success());
    let v = field(&stdout(&cross), "price");
    assert!(v > 0.0 && v < 0.8641);
}

#[test]
fn usage_and_computation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let o = msvou(&["price", "--model", &model, "--pair", "EURUSD", "--maturity", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--strike"));
    assert_eq!(msvou(&["frobnicate"]).status.code(), Some(2));
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, STEP_A.replace("a = -2.392", "a = 1")).unwrap();
    let o = msvou(&["price", "--model", bad.to_str().unwrap(), "--pair", "EURUSD", "--strike", "1.3", "--maturity", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mean reversion must be negative"));
    let no_spots = dir.path().join("nospots.cfg");
    fs::write(&no_spots, STEP_A.replace("spot1 = 1.3249\nspot2 = 1.5333\n", "")).unwrap();
    let args = ["price", "--model", no_spots.to_str().unwrap(), "--pair", "EURUSD", "--strike", "1.3", "--maturity", "0.5"];
    assert_eq!(msvou(&args).status.code(), Some(2));
    let mut with_spots = args.to_vec();
    with_spots.extend(["--spot1", "1.3249", "--spot2", "1.5333"]);
    assert!(msvou(&with_spots).status.success());
    let o = msvou(&["price", "--model", &model, "--pair", "USDJPY", "--strike", "1.3", "--maturity", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mgfcheck_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let o = msvou(&["mgfcheck", "--model", &model, "--t", "1.0", "--grid", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(field(&out, "max_rel_error") < 1e-8);
    assert!(field(&out, "points") > 10.0);
}

#[test]
fn covswap_and_smile_csv_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let curve = dir.path().join("curve.csv");
    let o = msvou(&["covswap", "--model", &model, "--maturities", "0.1:5:11", "--out", curve.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pts = msvou::covswap::read_curve_csv(fs::read(&curve).unwrap().as_slice()).unwrap();
    assert_eq!(pts.len(), 11);
    assert!(pts.iter().all(|(_, v)| *v > 0.0));

    let smile = dir.path().join("smile.csv");
    let o = msvou(&["smile", "--model", &model, "--pair", "GBPUSD", "--strikes", "1.4:1.65:6", "--maturities", "0.25,1", "--out", smile.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&smile).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("K,T,model_iv"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[2] > 0.01 && r[2] < 1.0));
}

#[test]
fn simulate_writes_readable_paths() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let out = dir.path().join("paths.csv");
    let o = msvou(&["simulate", "--model", &model, "--maturity", "1", "--paths", "20", "--steps", "4", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = msvou::mc::read_paths_csv(fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.time == 1.0).count(), 20);
    let again = dir.path().join("again.csv");
    msvou(&["simulate", "--model", &model, "--maturity", "1", "--paths", "20", "--steps", "4", "--seed", "3", "--threads", "1", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn calibrate_writes_params_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = calibration::params_io::parse_model(STEP_A).unwrap();
    let mk = Market::eur_gbp_usd([1.3249, 1.5333]).unwrap();
    let pc = PricingConfig { tol: 1e-8, ..PricingConfig::default() };
    let quotes = calibration::synthetic_quotes(&file.params, &mk, &[0.5, 1.0], &[-1.0, 0.0, 1.0], 0.002, &pc).unwrap();
    let qpath = dir.path().join("quotes.csv");
    let mut buf = Vec::new();
    calibration::write_quotes_csv(&quotes, &mut buf).unwrap();
    fs::write(&qpath, buf).unwrap();
    let cfg = dir.path().join("calib.cfg");
    fs::write(&cfg, "variant = A\nmax_evals = 40\nseed = 7\n").unwrap();
    let out = dir.path().join("fitted.cfg");
    let report = dir.path().join("report.csv");
    let o = msvou(&[
        "calibrate",
        "--quotes",
        qpath.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(field(text.lines().next().unwrap(), "evaluations") <= 40.0);
    assert_eq!(text.lines().filter(|l| l.starts_with("pair=")).count(), 3);
    let fitted = calibration::load_model(&out).unwrap();
    assert_eq!(fitted.params.a1, fitted.params.a2);
    assert!((fitted.market.unwrap().spots[1] - 1.5333).abs() < 1e-12);
    let rep = fs::read_to_string(&report).unwrap();
    assert!(rep.starts_with("pair,T,K,market_iv,model_iv,abs_err\n"));
    assert_eq!(rep.lines().count(), 19);
    let o = msvou(&["calibrate", "--quotes", qpath.to_str().unwrap(), "--variant", "Q", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
