use std::path::Path;
use std::process::{Command, Output};

use hspectra::machine::library;

fn hspectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hspectra"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_machine(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let champ = write_machine(dir.path(), "champ.tm", &library::champion_2x2().to_string());
    let out = hspectra(&["run", "--machine", &champ, "--budget", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["outcome"]["status"], "halted");
    assert_eq!(v["steps"], 6);
    assert_eq!(v["output"], "1111");

    let out = hspectra(&["run", "--code", "2", "--class", "1,2", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["outcome"]["status"], "cycle_certified");

    let counter = write_machine(
        dir.path(),
        "counter.tm",
        &library::binary_counter().to_string(),
    );
    let out = hspectra(&["run", "--machine", &counter, "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["outcome"]["status"], "budget_exhausted");
}

#[test]
fn bad_machine_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_machine(dir.path(), "bad.tm", "states=1 symbols=2\n0 0 -> 1 R 0\n");
    let out = hspectra(&["run", "--machine", &bad]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("(0, 1)"), "{err}");

    let garbled = write_machine(
        dir.path(),
        "garbled.tm",
        "states=1 symbols=2\n0 0 -> 1 X 0\n",
    );
    let err = String::from_utf8(hspectra(&["run", "--machine", &garbled]).stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(hspectra(&[]).status.code(), Some(3));
    assert_eq!(hspectra(&["run"]).status.code(), Some(3));
    assert_eq!(hspectra(&["run", "--code", "7"]).status.code(), Some(3));
    assert_eq!(
        hspectra(&["census", "--class", "two"]).status.code(),
        Some(3)
    );
    // wider than the 6-bit (1,2) layout
    assert_eq!(
        hspectra(&["run", "--code", "99999", "--class", "1,2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(hspectra(&["--help"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_hspectra"))
        .args(["census", "--class", "1,2"])
        .env("HSPECTRA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gap_sweep_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = hspectra(&[
        "gap-sweep",
        "--code",
        "2",
        "--class",
        "1,2",
        "--truncations",
        "64,128,256,512,1024",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "GAPLESS_TREND exponent≈-1.990 certificate=cycle\n"
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert!(lines[0].contains("\"truncations\":[64,128,256,512,1024]"));
    assert!(lines[1].starts_with("# generated_unix="));
    assert_eq!(lines[2], "truncation,length,halted,gap,exponent_so_far");
    assert_eq!(lines.len(), 8);

    let champ = write_machine(dir.path(), "champ.tm", &library::champion_2x2().to_string());
    let out = hspectra(&[
        "gap-sweep",
        "--machine",
        &champ,
        "--truncations",
        "16,64,256",
    ]);
    assert!(stdout(&out).starts_with("GAPPED T=6 gap=0.43354550264"));

    let out = hspectra(&[
        "gap-sweep",
        "--code",
        "2",
        "--class",
        "1,2",
        "--truncations",
        "64",
    ]);
    assert!(stdout(&out).starts_with("UNKNOWN"));
}

#[test]
fn kt_and_census_json() {
    let out = hspectra(&["kt", "--target", "1", "--class", "1,2"]);
    assert!(out.status.success());
    let v = json(&out);
    // (q0,0) -> 1 L STOP beats the literal writer's 1 R STOP (code 7)
    assert_eq!(v["found"]["code"], 5);
    assert_eq!(v["found"]["code_bit_length"], 3);
    assert_eq!(v["exhaustive_up_to"], 2);

    let out = hspectra(&["kt", "--target", "111", "--class", "1,2", "--budget", "50"]);
    let v = json(&out);
    assert!(v["found"].is_null());
    assert_eq!(v["machines_searched"], 64);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("census.csv");
    let out = hspectra(&[
        "census",
        "--class",
        "1,2",
        "--budget",
        "16",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["counts"]["halted"], 32);
    assert_eq!(v["counts"]["cycle_certified"], 32);
    assert_eq!(v["fraction_halted"], 0.5);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "code,outcome,steps");
    assert_eq!(rows.len(), 65);
    // code 3 writes 1 and drifts right in q0; code 4 writes blank and stops
    assert_eq!(rows[4], "3,cycle,1");
    assert_eq!(rows[5], "4,halted,1");

    let out = hspectra(&["census", "--class", "2,2", "--limit", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn curve_enumerate_spectrum_epsilon() {
    let out = hspectra(&[
        "kt-curve",
        "--target",
        "11",
        "--class",
        "2,2",
        "--budgets",
        "1,4,16",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "budget,found,code_bits,halt_steps");
    assert_eq!(lines[1], "1,,,");
    assert_eq!(lines.len(), 4);
    assert_eq!(
        hspectra(&[
            "kt-curve",
            "--target",
            "1",
            "--class",
            "1,2",
            "--budgets",
            "4,2"
        ])
        .status
        .code(),
        Some(3)
    );

    let out = hspectra(&["enumerate", "--class", "1,2", "--count", "3"]);
    assert_eq!(stdout(&out), "rank,code,code_bits\n0,0,1\n1,1,1\n2,2,2\n");
    let out = hspectra(&["enumerate", "--class", "1,2", "--code", "7"]);
    assert!(stdout(&out).contains("0 0 -> 1 R STOP"));

    let out = hspectra(&["spectrum", "--length", "2"]);
    let v = json(&out);
    assert!((v["ground_gap"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = hspectra(&[
        "gap-epsilon",
        "--code",
        "2",
        "--class",
        "1,2",
        "--epsilon",
        "1e-3",
    ]);
    let v = json(&out);
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["witness"], 172);
}
