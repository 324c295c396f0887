use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ricci-lab"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.arg("--out").arg(out).output().unwrap()
}

fn verdict(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("verdict.json")).unwrap()).unwrap()
}

#[test]
fn gaussian_scenario_certifies() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--no-plots"], Some(&scenario("gaussian.toml")), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = verdict(out.path());
    let certs = v["certificates"].as_object().unwrap();
    assert_eq!(certs.len(), 18);
    assert!(certs.values().all(|c| c["status"] == "pass"));
    assert!(out.path().join("config.resolved.toml").is_file());
}

#[test]
fn inflated_l_fails_the_identity() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--no-plots"], Some(&scenario("corrupted_l.toml")), out.path());
    assert_eq!(o.status.code(), Some(1));
    let v = verdict(out.path());
    assert_eq!(v["certificates"]["eq_l_1"]["pass"], false);
    assert_eq!(v["certificates"]["grad_l_law"]["pass"], true);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&["lgeo", "--no-plots"], Some(&scenario("corrupted_l.toml")), d.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["lfield.csv", "residuals.csv", "config.resolved.toml"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invalid_config_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("gaussian.toml")).unwrap().replace("alpha = 0.25", "alpha = 1.25");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["verify"], Some(&cfg), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("breather.alpha"));
}

#[test]
fn stage_override_is_validated() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["blowdown", "--stages", "5,40"], Some(&scenario("gaussian.toml")), out.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_models_are_limited_to_model_and_evolve() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["model"], Some(&scenario("bump.toml")), out.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("model.csv")).unwrap();
    assert!(csv.starts_with("r,phi,psi,scalar,ric_rad,ric_tan\n"));
    assert_eq!(csv.lines().count(), 66);
    let o = run(&["lgeo"], Some(&scenario("bump.toml")), out.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn blowdown_outputs_render() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["blowdown", "--stages", "2,4"], Some(&scenario("corrupted_l.toml")), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["stages.csv", "residuals_2.csv", "residuals_4.csv", "rvol.csv", "residual_maxima.svg", "rvol.svg"] {
        assert!(out.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn plotting_an_empty_directory_lists_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ricci-lab")).args(["plot", "--dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("rvol.csv") && err.contains("stages.csv") && err.contains("lfield.csv"), "{err}");
}
