use std::path::Path;
use std::process::{Command, Output};

fn gfdm_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfdm-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "scheme = \"proposed_dirichlet\"\nK = 4\nM = 2\nT = 2\nR = 2\nsnr_db = [0, 10]\nn_channels = 3\nn_blocks = 2\n";

#[test]
fn complexity_prints_formula_values() {
    let o = gfdm_sim(&["complexity", "--scheme", "proposed_dirichlet", "-K", "256", "-M", "4", "-T", "2", "-R", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("cm_sqrd  154624"), "{}", stdout(&o));

    let o = gfdm_sim(&["complexity", "--scheme", "ofdm", "-K", "1024", "-M", "1", "-T", "2", "-R", "2"]);
    assert!(stdout(&o).contains("cm_sqrd  13312"));

    let o = gfdm_sim(&["complexity", "--scheme", "baseline_rc(0.9)", "-K", "256", "-M", "4", "-T", "2", "-R", "2"]);
    assert!(stdout(&o).contains("cm_sic   4194304"), "{}", stdout(&o));
}

#[test]
fn complexity_rejects_unknown_scheme() {
    let o = gfdm_sim(&["complexity", "--scheme", "zf", "-K", "4", "-M", "2", "-T", "2", "-R", "2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown scheme"), "{}", stderr(&o));
}

#[test]
fn verify_reports_max_residual() {
    let o = gfdm_sim(&["verify", "--channels", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("K=")).count(), 4);
    assert!(out.contains("max residual") && out.contains("(ok)"), "{out}");
}

#[test]
fn simulate_writes_csv_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("r.csv");
    let o = gfdm_sim(&[
        "simulate",
        "--config",
        &cfg,
        "--scheme",
        "ofdm,proposed_dirichlet",
        "--snr",
        "-5,inf",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], gfdm_mimo::sim::CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("-5,ofdm,rect,4,2,2,2,"));
    assert!(lines[2].starts_with("-5,proposed_dirichlet,dirichlet,"));
    assert!(lines[3].starts_with("inf,ofdm,rect,4,2,2,2,0,0,96,"), "{}", lines[3]);
}

#[test]
fn simulate_reports_config_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}alpha = 0.9\n"));
    let o = gfdm_sim(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("alpha") && err.contains("line 9"), "{err}");

    let cfg = write_config(dir.path(), &SMALL.replace("T = 2", "T = 0"));
    let err = stderr(&gfdm_sim(&["simulate", "--config", &cfg]));
    assert!(err.contains("cfg.toml:4: `T`"), "{err}");
}

#[test]
fn simulate_gates_large_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("K = 4", "K = 128"));
    let o = gfdm_sim(&["simulate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--large"), "{}", stderr(&o));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = gfdm_mimo::sim::SimConfig::from_file(&path).unwrap();
            let large = cfg.block_len() > gfdm_mimo::sim::DESK_SCALE_MAX_BLOCK;
            assert_eq!(cfg.check_scale(false).is_err(), large, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
