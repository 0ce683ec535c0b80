use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn qsat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsat"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsat-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bench_record_and_row_counts() {
    let dir = scratch("bench");
    let csv = dir.join("out.csv");
    let out = qsat()
        .args(["bench", "--gen", "sr:50:10:4", "--strategy", "vsids", "--strategy", "fixed:3"])
        .args(["--hidden", "16", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 60);
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("sr:50:10:4")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split_whitespace().nth(2) == Some("30")));
}

#[test]
fn gen_then_solve_and_bench_directory() {
    let dir = scratch("gen");
    let out = qsat().args(["gen", "--gen", "sr:15:4:9", "--out-dir"]).arg(&dir).output().unwrap();
    assert!(out.status.success());
    let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 4);
    let first = fs::read_to_string(&files[0]).unwrap();
    assert!(first.starts_with("c generator sr:15:4:9"));

    for (file, expect) in [(&files[0], "s UNSATISFIABLE"), (&files[1], "s SATISFIABLE")] {
        let out = qsat()
            .arg("solve")
            .arg(file)
            .args(["--strategy", "pool:k=5,r=2+qact", "--hidden", "8"])
            .output()
            .unwrap();
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.lines().any(|l| l == expect), "{stdout}");
    }

    let out = qsat()
        .args(["bench", "--strategy", "vsids", "--trials", "1", "--restarts", "off", "--dataset"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("instance,strategy,trial,status,"));
    assert_eq!(stdout.lines().filter(|l| l.contains(",vsids,1,")).count(), 4);
}

#[test]
fn weights_file_round_trip_through_cli() {
    let dir = scratch("weights");
    let w = dir.join("sat.gqw");
    let out = qsat()
        .args(["init-weights", "--kind", "sat", "--hidden", "8", "--seed", "3", "--out"])
        .arg(&w)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(fs::read_to_string(&w).unwrap().starts_with("GQW 1\n"));
    let run = || {
        qsat()
            .args(["bench", "--gen", "sr:20:4:2", "--strategy", "fixed:2", "--trials", "1", "--weights"])
            .arg(&w)
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.status.success());
    let decisions = |o: &std::process::Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(1)
            .take_while(|l| !l.is_empty())
            .map(|l| l.split(',').nth(5).unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(decisions(&a), decisions(&b));

    // OSSP weights where SAT weights are expected.
    let ow = dir.join("ossp.gqw");
    qsat().args(["init-weights", "--kind", "ossp", "--hidden", "8", "--out"]).arg(&ow).output().unwrap();
    let out = qsat()
        .args(["bench", "--gen", "sr:20:2:2", "--strategy", "fixed:2", "--weights"])
        .arg(&ow)
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn invalid_inputs_fail() {
    let out = qsat().args(["bench", "--gen", "sr:20:2:2", "--strategy", "pool:k=0"]).output().unwrap();
    assert!(!out.status.success());
    let out = qsat().args(["bench", "--dataset", "/nonexistent/qsat", "--strategy", "vsids"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn ossp_makespan_output() {
    let dir = scratch("ossp");
    let f = dir.join("a.ossp");
    fs::write(&f, "2 2\n3 2\n2 3\n").unwrap();
    let out = qsat().arg("ossp").arg(&f).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().next(), Some("makespan 5"));
    assert_eq!(stdout.lines().count(), 1 + 4);
}
