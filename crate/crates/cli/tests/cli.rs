use std::fs;
use std::process::{Command, Output};

fn glgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glgp")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("one JSON line")
}

#[test]
fn run_writes_all_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let st = Command::new(env!("CARGO_BIN_EXE_glgp"))
            .args(["run", "--n", "24", "--trials", "4", "--seed", "5", "--check-girth", "--out"])
            .arg(out)
            .env("GLGP_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in ["trace.csv", "params.json", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(
        csv.starts_with("trial,seed,n,r,ell,i,t,Q_emp,q_pred,eps_q,y2_emp_mean,y2_emp_count,w_samples_json,M_final\n")
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"].as_array().unwrap().len(), 4);
    assert!(summary["envelope"]["variables"].is_array());
}

#[test]
fn capped_run_stops_at_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = glgp(&[
        "run",
        "--n",
        "40",
        "--stop",
        "cap",
        "--y-samples",
        "0",
        "--w-samples",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let params: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("params.json")).unwrap()).unwrap();
    let horizon = (1600.0 * params["t_m"].as_f64().unwrap()).floor() as u64;
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let m_final: u64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(m_final, horizon);
}

#[test]
fn trajectory_table() {
    let out = glgp(&["trajectory", "--n", "100", "--r", "3", "--ell", "4", "--t-grid", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,p,xi,xi_tilde,sigma,q,eps_q,y_2,eps_y_2,w_3_0,eps_w_3_0,w_3_1,eps_w_3_1,w_4_0,eps_w_4_0,w_4_1,eps_w_4_1,w_4_2,eps_w_4_2"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let wit = dir.path().join("w.txt");
    let v = stdout_json(&glgp(&["oracle", "turan", "--n", "6", "--ell", "3", "--witness", wit.to_str().unwrap()]));
    assert_eq!(v["ex"], 2);
    assert_eq!(fs::read_to_string(&wit).unwrap(), v["witness"].as_str().unwrap());
    let v = stdout_json(&glgp(&["oracle", "forb", "--n", "6", "--ell", "3", "--order", "reverse-colex"]));
    assert_eq!(v["count"], "121");
    let v = stdout_json(&glgp(&["oracle", "deletion", "--n", "60", "--seed", "1"]));
    assert!(v["edges"].as_u64().unwrap() <= v["retained"].as_u64().unwrap());
}

#[test]
fn verify_mode_reports_no_mismatch() {
    let v = stdout_json(&glgp(&["verify", "--n", "16", "--r", "3", "--ell", "4", "--trials", "2", "--seed", "8"]));
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["girth_ok"], true);
}

#[test]
fn sweep_fits_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&glgp(&["sweep", "--ns", "20,30,40", "--trials", "5", "--out", dir.path().to_str().unwrap()]));
    assert!(v["fit"]["slope"].as_f64().unwrap().is_finite());
    assert!(dir.path().join("n30/summary.json").exists());
    let v = glgp(&["sweep", "--ns", "20,30", "--out", dir.path().to_str().unwrap()]);
    assert!(!v.status.success());
}

#[test]
fn bad_parameters_fail_cleanly() {
    let out = glgp(&["trajectory", "--n", "100", "--lambda", "1.0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
    let out = glgp(&["run", "--n", "10", "--out", "/tmp/never"]);
    assert!(!out.status.success());
}
