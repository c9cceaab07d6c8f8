use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schro-ldp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sinkhorn_dirac_source_in_phi0_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let mu0 = write(dir.path(), "mu0.csv", "w,x1\n1,0\n");
    let mu1 = write(dir.path(), "mu1.csv", "w,x1\n0.5,-1\n0.5,1\n");
    let out = run(&["sinkhorn", "--mu0", &mu0, "--mu1", &mu1, "--eps", "1", "--gauge", "phi0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["phi"][0].as_f64().unwrap(), 0.0);
    for psi in v["psi"].as_array().unwrap() {
        assert!((psi.as_f64().unwrap() - 0.5).abs() < 1e-8);
    }
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn ldp_geodesic_tube_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        r#"
schedule = [0.25, 0.125, 0.0625]
n = 20000
seed = 3
tol = 0.15
importance = "always"
[instance]
sampler = "bridge"
x = [0.0]
y = [0.0]
[event]
kind = "tube"
center = [[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]]
radius = 0.25
grid = 100
[output]
name = "tent"
"#,
    );
    let out = run(&["ldp", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tent.json")).unwrap()).unwrap();
    assert_eq!(json["verdict"], "pass");
    assert!((json["rate_inf"].as_f64().unwrap() - 1.125).abs() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("tent.csv")).unwrap();
    assert!(csv.starts_with("eps,p_hat,se,eps_log_p\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn malformed_config_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "schedule = [0.1, 0.2]\nn = 10\nbogus = 1\n");
    let out = run(&["ldp", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec![std::ffi::OsString::from("bad.toml")]);
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(run(&["teleport"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sample_output_depends_only_on_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mu0 = write(dir.path(), "mu0.csv", "w,x1,x2\n0.5,0,0\n0.5,1,0\n");
    let mu1 = write(dir.path(), "mu1.csv", "w,x1,x2\n0.3,0,1\n0.7,1,1\n");
    let args = ["sample", "--mu0", &mu0, "--mu1", &mu1, "--eps", "0.2", "--n", "300", "--grid", "20"];
    let once = |seed: &str, threads: &str| {
        let out = bin().args(args).args(["--seed", seed]).env("SCHRO_LDP_THREADS", threads).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = once("5", "1");
    assert_eq!(a, once("5", "3"));
    assert_ne!(a, once("6", "1"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# eps="));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 300 * 21);
}

#[test]
fn rate_reports_infinity_off_support() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "h.csv", "t,x1\n0,0\n0.5,0.7\n1,0.2\n");
    let out = run(&["rate", "--kind", "Jxy", "--path", &path, "--x", "0", "--y", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "inf");
}
