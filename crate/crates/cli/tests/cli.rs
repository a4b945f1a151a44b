use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

fn phasebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasebench"))
        .args(args)
        .env_remove("PHASEBENCH_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn spe_run(out: &Path, extra: &[&str]) -> Output {
    let ham = data("h2_sto3g_1.0A.ham");
    let mut args = vec![
        "spe",
        "run",
        "--hamiltonian",
        ham.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--name",
        "cli",
    ];
    args.extend_from_slice(extra);
    phasebench(&args)
}

fn only_row_dir(out: &Path) -> PathBuf {
    let mut dirs: Vec<PathBuf> = fs::read_dir(out.join("cli"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    assert_eq!(dirs.len(), 1);
    dirs.pop().unwrap()
}

#[test]
fn lt22_run_writes_table_and_records() {
    let out = tempfile::tempdir().unwrap();
    let o = ok(spe_run(
        out.path(),
        &["--algo", "lt22", "--d", "200", "--nsample", "500", "--backend", "shots", "--trotter", "5"],
    ));
    let csv = stdout(&o);
    assert!(csv.starts_with("experiment,algorithm"));
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(fs::read_to_string(out.path().join("cli/results.csv")).unwrap(), csv);

    let run = only_row_dir(out.path());
    let r = ok(phasebench(&["resource", "estimate", "--run", run.to_str().unwrap()]));
    let text = stdout(&r);
    assert!(text.contains("shots = 1000"), "{text}");
    assert!(text.contains("T_max = "));
}

#[test]
fn fit_and_dump_replay_a_gaussian_run() {
    let out = tempfile::tempdir().unwrap();
    ok(spe_run(
        out.path(),
        &["--algo", "gaussian_fit", "--eps", "1e-2", "--nsample", "20000", "--backend", "ideal"],
    ));
    let run = only_row_dir(out.path());
    let fit = stdout(&ok(phasebench(&["fit", "--run", run.to_str().unwrap()])));
    let energy: f64 = fit
        .lines()
        .find_map(|l| l.strip_prefix("energy = "))
        .and_then(|v| v.trim_end_matches(" Ha").parse().ok())
        .unwrap();
    assert!((energy + 1.10115033).abs() < 1e-2, "{fit}");
    assert!(fit.contains("p_star = "));

    let dump = ok(phasebench(&["signal", "dump", "--run", run.to_str().unwrap(), "--grid", "-0.9:-0.7:11"]));
    let text = stdout(&dump);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1].split(',').count(), 3);
}

#[test]
fn resource_estimate_reports_gate_counts() {
    let ham = data("h2_sto3g_1.0A.ham");
    let o = ok(phasebench(&["resource", "estimate", "--hamiltonian", ham.to_str().unwrap(), "--pphys", "1e-4"]));
    let text = stdout(&o);
    assert!(text.contains("rz = 2250 cnot = 3200 h = 1602"), "{text}");
    assert!(text.contains("p_phys = 1e-4: fidelity = "));
}

#[test]
fn invalid_config_exits_with_two() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("bad.toml");
    fs::write(&cfg, "hamiltonian = \"x.ham\"\nalgorithm = \"lt22\"\n[spe]\neta = 1.5\n").unwrap();
    let o = phasebench(&["spe", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spe.eta"));

    let o = spe_run(out.path(), &["--algo", "lt22", "--eta", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
}
