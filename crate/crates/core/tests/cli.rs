use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn todalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_todalab"))
        .args(args)
        .output()
        .expect("spawn todalab")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn diagonal_source_halts_immediately() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = todalab(&[
        "toda-t1",
        "--n",
        "10",
        "--samples",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "ensemble=diagonal",
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = read(&out, "halting.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert!(lines.next().unwrap().starts_with("index,t1,"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row.split(',').nth(1), Some("0e0"));
    }
}

#[test]
fn every_output_file_carries_the_same_header() {
    let dir = tempfile::tempdir().unwrap();
    let res = todalab(&[
        "fredholm-grid",
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "s_grid=0.5,1",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let header = read(dir.path(), "config.txt").lines().next().unwrap().to_string();
    assert!(header.ends_with("seed=9"), "{header}");
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{}", path.display());
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let res = todalab(&[
            "qr-halting",
            "--n",
            "12",
            "--samples",
            "20",
            "--eps",
            "1e-4",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap();
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn config_file_and_run_verb() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# comment\nkind = fredholm-grid\ns_grid = 1, 2\n").unwrap();
    let out = dir.path().join("out");
    let res = todalab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(read(&out, "fredholm.csv").lines().count(), 4);

    let mismatch = todalab(&["toda-t1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(todalab(&["toda-t1", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(todalab(&["run"]).status.code(), Some(2));
    assert_eq!(todalab(&["toda-t1", "--set", "n"]).status.code(), Some(2));
    assert_ne!(todalab(&["not-a-verb"]).status.code(), Some(0));
}
