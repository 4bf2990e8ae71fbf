use std::path::Path;
use std::process::{Command, Output};

use splashwave_cli::verify_manifest;

fn splashwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splashwave"))
        .args(args)
        .env_remove("SPLASHWAVE_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const STANDING: &str = "n = 32
domain = plain
preset = standing_wave
tau = 0.1
dt_policy = fixed
dt = 1e-3
t_end = 0.02
snapshot_every = 10
record_every = 5
";

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_splash_passes() {
    let out = splashwave(&["validate", "--preset", "splash", "--n", "128"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("single contact: PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_with_config_code() {
    assert_eq!(code(&splashwave(&["validate", "--bogus"])), 1);
    assert_eq!(code(&splashwave(&["validate", "--preset", "nonsense"])), 1);
    assert_eq!(code(&splashwave(&["rt-sweep", "--taus", "-1"])), 1);
    assert_eq!(code(&splashwave(&["--help"])), 0);
}

#[test]
fn bad_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "n = 32\nwobble = 3\n");
    let out = splashwave(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    assert_eq!(code(&splashwave(&["run", "--config", "/nonexistent/run.cfg"])), 3);
}

#[test]
fn rt_sweep_writes_one_file_per_tau_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = splashwave(&["rt-sweep", "--taus", "0,0.1,0.5,1", "--n", "128", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for tau in ["0", "0.1", "0.5", "1"] {
        let text = std::fs::read_to_string(out_dir.join(format!("sigma_tau_{tau}.txt"))).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 128);
    }
    let svg = std::fs::read_to_string(out_dir.join("rt_sweep.svg")).unwrap();
    assert_eq!(svg.matches("class=\"sigma\"").count(), 4);
    assert!(verify_manifest(&out_dir).unwrap());
}

#[test]
fn run_writes_verifiable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "standing.cfg", STANDING);
    let out_dir = dir.path().join("run");
    let out = splashwave(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.txt", "diagnostics.csv", "final.txt", "final.svg", "snapshot_000000.txt", "snapshot_000020.txt"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    assert!(verify_manifest(&out_dir).unwrap());

    let render = splashwave(&["render", "--snapshot", out_dir.join("snapshot_000010.txt").to_str().unwrap()]);
    assert_eq!(code(&render), 0);
    assert!(std::fs::read_to_string(out_dir.join("snapshot_000010.svg")).unwrap().contains("<polyline"));

    std::fs::write(out_dir.join("final.txt"), "tampered").unwrap();
    assert!(!verify_manifest(&out_dir).unwrap());
}

#[test]
fn output_env_var_overrides_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "standing.cfg", &format!("{STANDING}out_dir = {}\n", dir.path().join("ignored").display()));
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_splashwave"))
        .args(["run", "--config", &cfg])
        .env("SPLASHWAVE_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("diagnostics.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "standing.cfg", STANDING);
    let read = |sub: &str| {
        let d = dir.path().join(sub);
        assert_eq!(code(&splashwave(&["run", "--config", &cfg, "--out", d.to_str().unwrap()])), 0);
        (std::fs::read(d.join("diagnostics.csv")).unwrap(), std::fs::read(d.join("final.txt")).unwrap())
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn unstable_run_exits_with_blow_up_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unstable.cfg",
        "n = 64\ndomain = plain\npreset = standing_wave\namplitude = 0.5\ntau = 0\ndt_policy = fixed\ndt = 0.5\n\
         t_end = 50\nstop_at_contact = false\nhalt_arc_chord_factor = 1e12\n",
    );
    let out_dir = dir.path().join("run");
    let out = splashwave(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert!(csv.trim_end().ends_with("blow-up"));
}
