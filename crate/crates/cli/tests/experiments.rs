//! End-to-end experiment drivers: artifact shape, determinism at the
//! file level, and the two-dimensional log-branch decay case.

use mgtlab_cli::config::Config;
use mgtlab_cli::experiments::{self, Kind};

fn config_from(text: &str) -> Config {
    toml::from_str(text).unwrap()
}

#[test]
fn n2_log_branch_solution_norm() {
    // || phi(t) ||_{L2} in two dimensions rides the sqrt(ln(e+t)) envelope
    let cfg = config_from(
        r#"
[data]
n = 2.0
[grid]
nodes = 1600
[fit]
t_min = 10.0
t_max = 1e4
samples = 17
"#,
    );
    let out = experiments::decay::run(&cfg).unwrap();
    for check in &out.checks {
        println!("{}", check.line());
        assert!(check.pass, "{}", check.name);
    }
}

#[test]
fn roots_artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Config::default();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(experiments::run(Kind::Roots, &cfg, &a, 7).unwrap());
    assert!(experiments::run(Kind::Roots, &cfg, &b, 7).unwrap());
    for name in ["roots.csv", "roots_report.json"] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fb = std::fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between runs");
    }
}

#[test]
fn unstable_parameters_reported() {
    let cfg = config_from("tau = 1.0\ndelta = 0.1\nm = 2.0\nallow_unstable = true\n");
    let out = experiments::roots::run(&cfg).unwrap();
    assert!(out
        .checks
        .iter()
        .any(|c| c.name == "unstable_abscissa_positive" && c.pass));
}

#[test]
fn oscint_case_three_is_one_sided() {
    let cfg = config_from(
        r#"
[oscint]
n = 2.0
s = 0.4
eps = 0.5
t_min = 1e2
t_max = 1e4
samples = 12
"#,
    );
    let out = experiments::oscint::run(&cfg).unwrap();
    for check in &out.checks {
        println!("{}", check.line());
        assert!(check.pass, "{}", check.name);
    }
}
