use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::{Command, Output};

fn polyconf() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polyconf"));
    for (key, _) in std::env::vars() {
        if key.starts_with("POLYCONF_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    polyconf().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyconf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Header and data rows of a CSV with `#` comment lines.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn curve_over_the_full_range_passes() {
    let o = run(&["curve", "--r-min", "1.0", "--r-max", "2.0", "--steps", "21", "--method", "quadrature"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header.join(","), "r,kappa_bar,method,std_error,area,kappa_B,crofton_residual");
    assert_eq!(rows.len(), 22);
    assert_eq!(rows[21][..2], ["verdict".to_string(), "PASS".to_string()]);
    let kappa: Vec<f64> = rows[..21].iter().map(|r| f(&r[1])).collect();
    assert!(kappa.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

#[test]
fn single_point_curve_at_two_is_the_unconfined_mean() {
    let o = run(&["curve", "--steps", "1", "--r-min", "2.0", "--r-max", "2.0"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!((f(&rows[0][1]) - 8.0).abs() < 1e-7);
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let (_, rows) = table(&stdout(&run(&["curve", "--steps", "1", "--r-min", "1.3", "--r-max", "1.3"])));
    let mantissa = rows[0][1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{}", rows[0][1]);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tmp("curve_a.csv"), tmp("curve_b.csv"));
    for p in [&a, &b] {
        let o = run(&["curve", "--steps", "6", "--method", "mc", "--samples", "2000", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn output_does_not_depend_on_parallelism() {
    let args = ["sample", "--n", "6", "--r", "2", "--samples", "300", "--seed", "4"];
    let seq = run(&[&args[..], &["--exec", "sequential"]].concat());
    let par = run(&[&args[..], &["--exec", "parallel"]].concat());
    let strip = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with("# exec")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&seq), strip(&par));
}

#[test]
fn bad_grid_and_unwritable_path_are_usage_errors() {
    assert_eq!(run(&["curve", "--r-min", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["curve", "--r-min", "1.5", "--r-max", "1.2"]).status.code(), Some(1));
    let o = run(&["curve", "--steps", "1", "--r-min", "2", "--r-max", "2", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
    assert_eq!(run(&["curve", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn boundary_alpha_is_one_half() {
    let o = run(&["boundary", "--r", "1.1"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header.join(","), "arc,param,mu_B,mu_I");
    let last = rows.last().unwrap();
    assert_eq!(last[0], "alpha");
    assert!((f(&last[1]) - 0.5).abs() < 5e-3);
    assert!((f(&last[2]) - 0.5).abs() < 5e-3);
}

#[test]
fn boundary_nu_density_is_constant() {
    let o = run(&["boundary", "--r", "1.5", "--measure", "nu", "--grid-size", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header.join(","), "arc,param,nu_B,nu_I");
    let col: Vec<f64> = rows.iter().filter(|r| r[0] == "long_diagonal").map(|r| f(&r[2])).collect();
    assert_eq!(col.len(), 64);
    assert!(col.iter().all(|v| *v == col[0]));
}

#[test]
fn boundary_grid_doubling_is_stable() {
    let coarse = table(&stdout(&run(&["boundary", "--r", "1.2", "--grid-size", "65"]))).1;
    let fine = table(&stdout(&run(&["boundary", "--r", "1.2", "--grid-size", "129"]))).1;
    for arc in ["ell", "theta"] {
        let c: Vec<_> = coarse.iter().filter(|r| r[0] == arc).collect();
        let d: Vec<_> = fine.iter().filter(|r| r[0] == arc).collect();
        // The last point of each arc sits on the density's singular endpoint.
        for (i, row) in c.iter().enumerate().take(c.len() - 1) {
            assert!((f(&row[1]) - f(&d[2 * i][1])).abs() < 1e-12);
            for col in [2, 3] {
                assert!((f(&row[col]) - f(&d[2 * i][col])).abs() < 1e-6, "{arc} {row:?}");
            }
        }
    }
}

#[test]
fn boundary_mu_outside_its_regime_names_the_interval() {
    let o = run(&["boundary", "--r", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[1, sqrt(2))"));
}

#[test]
fn verify_unknown_suite_is_a_usage_error() {
    assert_eq!(run(&["verify", "--suite", "everything"]).status.code(), Some(1));
}

#[test]
fn verify_alpha_writes_a_passing_report() {
    let path = tmp("alpha.json");
    let o = run(&["verify", "--suite", "alpha", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let checks = doc["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    for c in checks {
        assert_eq!(c["pass"], true);
        assert!(c["measured"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
        assert!(c["margin"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(doc["config"]["suite"], "alpha");
}

#[test]
fn verify_crofton_residuals_are_small() {
    let o = run(&["verify", "--suite", "crofton", "--mc-samples", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let residuals: Vec<f64> = doc["result"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("Crofton residual"))
        .map(|c| c["measured"].as_f64().unwrap())
        .collect();
    assert!(residuals.len() >= 10);
    assert!(residuals.iter().all(|r| *r <= 1e-3));
}

#[test]
fn sample_quadrilaterals_respect_the_bound() {
    let o = run(&["sample", "--n", "4", "--r", "2", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header.join(","), "index,ell_3,theta_3,curvature,diameter,accepted");
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| f(&r[4]) <= 2.0 + 1e-12 && r[5] == "true"));
}

#[test]
fn sample_is_determined_by_the_seed() {
    let args = ["sample", "--n", "6", "--r", "1", "--samples", "50", "--seed", "5"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&args).stdout);
    assert_ne!(a.stdout, run(&["sample", "--n", "6", "--r", "1", "--samples", "50", "--seed", "6"]).stdout);
}

#[test]
fn near_maximal_hexagons_are_nearly_planar() {
    let o = run(&["sample", "--n", "6", "--r-min", "2.95", "--samples", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = table(&stdout(&o));
    let dev = rows.iter().map(|r| (f(&r[r.len() - 3]) - TAU).abs()).fold(0.0, f64::max);
    assert!(dev < 2.0, "max |kappa - 2 pi| = {dev}");
    assert!(rows.iter().all(|r| f(&r[r.len() - 2]) >= 2.95 - 1e-9));
}

#[test]
fn empty_region_exits_with_exhaustion() {
    let path = tmp("never.csv");
    let o = run(&["sample", "--n", "6", "--r", "0.5", "--samples", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("region too small"));
    assert!(!path.exists());
}

#[test]
fn flags_override_env_which_overrides_the_config_file() {
    let cfg = tmp("run.toml");
    std::fs::write(&cfg, "seed = 11\nsamples = 3\nn = 6\n").unwrap();
    let seed_line = |o: Output| stdout(&o).lines().find(|l| l.starts_with("# seed")).unwrap().to_string();
    let base = ["sample", "--config", cfg.to_str().unwrap()];
    assert_eq!(seed_line(run(&base)), "# seed = 11");
    assert_eq!(seed_line(polyconf().args(base).env("POLYCONF_SEED", "12").output().unwrap()), "# seed = 12");
    let flagged = polyconf().args(base).args(["--seed", "13"]).env("POLYCONF_SEED", "12").output().unwrap();
    assert_eq!(seed_line(flagged), "# seed = 13");

    std::fs::write(&cfg, "unknown-key = 1\n").unwrap();
    assert_eq!(run(&base).status.code(), Some(1));
}
