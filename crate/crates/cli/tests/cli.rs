use std::process::{Command, Output};

fn friable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_friable"))
        .args(args)
        .env_remove("FRIABLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Column `name` of the first data row of a CSV document.
fn field(csv: &str, name: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].to_string()
}

#[test]
fn bias_at_h_zero_is_one_half() {
    let o = friable(&["bias", "--x", "1e6", "--y", "100", "--z", "1e6"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(field(&s, "p_gaussian").parse::<f64>().unwrap(), 0.5);
    assert_eq!(field(&s, "h").parse::<f64>().unwrap(), 0.0);
    let p: f64 = field(&s, "p_exact").parse().unwrap();
    assert!(p > 0.5 && p < 0.6);
}

#[test]
fn kappa_one_one() {
    let o = friable(&["kappa", "--u", "1", "--w", "1"]);
    assert!(o.status.success());
    let k: f64 = field(&stdout(&o), "kappa").parse().unwrap();
    assert!((k - (-0.5772156649015329f64).exp()).abs() < 1e-12);
    assert!(field(&stdout(&o), "kappa").starts_with("5.614594835668"));
}

#[test]
fn verify_dickman_suite_passes() {
    let o = friable(&["verify", "--suite", "dickman"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 3);
    assert!(s.lines().all(|l| l.contains("PASS")));
}

#[test]
fn verify_reports_failure_with_exit_one() {
    let dir = std::env::temp_dir().join(format!("friable-tol-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tight.toml");
    std::fs::write(&path, "laplace_rel = 0.0\n").unwrap();
    let o = friable(&["verify", "--suite", "3", "--tol-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    std::fs::write(&path, "bogus = 1\n").unwrap();
    let o = friable(&["verify", "--suite", "3", "--tol-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(friable(&["psi", "--x", "100"]).status.code(), Some(2));
    assert_eq!(friable(&["psi", "--x", "100", "--y", "1"]).status.code(), Some(2));
    assert_eq!(friable(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(friable(&["dickman", "--t", "150"]).status.code(), Some(2));
    let o = friable(&["psi", "--x", "1e6", "--y", "100", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8(o.stderr).unwrap().contains("resource"));
    let o = Command::new(env!("CARGO_BIN_EXE_friable"))
        .args(["psi", "--x", "1e6", "--y", "100"])
        .env("FRIABLE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn psi_methods() {
    let o = friable(&["psi", "--x", "100", "--y", "100"]);
    assert_eq!(field(&stdout(&o), "psi"), "100");
    let o = friable(&["psi", "--x", "10", "--y", "2"]);
    assert_eq!(field(&stdout(&o), "psi"), "4");
    let o = friable(&["psi", "--logx", "1e5", "--y", "1000", "--method", "saddle"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "overflow"), "true");
    assert_eq!(field(&stdout(&o), "psi"), "");
}

#[test]
fn huge_x_through_logx() {
    let o = friable(&["alpha", "--logx", "2839.0", "--y", "2"]);
    assert!(o.status.success());
    let a: f64 = field(&stdout(&o), "alpha").parse().unwrap();
    let want = (1.0 + 2f64.ln() / 2839.0).ln() / 2f64.ln();
    assert!((a - want).abs() < 1e-12);
}

#[test]
fn json_rows_match_csv_headers() {
    let csv = stdout(&friable(&["delta", "--x", "1e5", "--y", "50"]));
    let json = stdout(&friable(&["delta", "--x", "1e5", "--y", "50", "--format", "json"]));
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let v: serde_json::Value = serde_json::from_str(json.lines().next().unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut sorted = header.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
    assert!(!json.contains("NaN") && !json.contains("inf"));
}

#[test]
fn dickman_rows() {
    let o = friable(&["dickman", "--t", "0.5,2", "--rho2"]);
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "t,rho,ln_rho,rho2,xi,xi_prime");
    assert!(lines[1].starts_with("5.0000000000000000e-1,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1,,"));
    let rho: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((rho - (1.0 - 2f64.ln())).abs() < 1e-15);
}

#[test]
fn sample_is_reproducible() {
    let a = friable(&["sample", "--x", "1e6", "--y", "100", "-n", "2000", "--seed", "4"]);
    let b = friable(&["sample", "--x", "1e6", "--y", "100", "-n", "2000", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = friable(&["sample", "--x", "1e6", "--y", "100", "-n", "2000", "--seed", "5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn table_is_ordered_and_deterministic() {
    let dir = std::env::temp_dir().join(format!("friable-table-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("a.csv");
    let p2 = dir.join("b.csv");
    let spec = "x=1e4:1e6:100;y=30,100;h=-1,0,1";
    for p in [&p1, &p2] {
        let o = friable(&["table", "--grid", spec, "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&p1).unwrap();
    assert_eq!(a, std::fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(9).map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    // x-major, then y, then h
    assert!(rows[0][0] < rows[6][0]);
    assert_eq!(rows[0][1], 30.0);
    assert_eq!(rows[3][1], 100.0);
    assert_eq!(rows[0][8], -1.0);
    assert!((rows[2][8] - 1.0).abs() < 1e-12);
    assert_eq!(friable(&["table", "--grid", "x=1e4;q=1"]).status.code(), Some(2));
    assert_eq!(friable(&["table", "--grid", "x=1e4"]).status.code(), Some(2));
}
