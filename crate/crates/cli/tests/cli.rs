use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spikearith(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikearith"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPIKEARITH_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_prints_decoded_results() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (
            &["run", "adder", "--a", "3", "--b", "1", "--width", "3"],
            "4",
        ),
        (&["run", "not", "--x", "5", "--width", "4"], "10"),
        (
            &[
                "run", "minmax", "--mode", "max", "--a", "4", "--b", "4", "--width", "4",
            ],
            "4",
        ),
        (
            &[
                "run", "minmax", "--mode", "min", "--a", "6", "--b", "2", "--width", "3",
            ],
            "2",
        ),
        (
            &["run", "subtractor", "--a", "3", "--b", "5", "--width", "3"],
            "-2",
        ),
        (
            &[
                "run",
                "inequality",
                "--variant",
                "decay",
                "--a",
                "5",
                "--b",
                "3",
                "-k",
                "3",
            ],
            "1",
        ),
        (
            &[
                "run", "mux", "--a", "3", "--b", "9", "--select", "1", "-k", "4",
            ],
            "9",
        ),
        (
            &["run", "scalar_mult", "--scalar", "5", "--x", "3", "-k", "4"],
            "15",
        ),
        (
            &["run", "variable_mult", "--x", "5", "--y", "3", "-k", "3"],
            "15",
        ),
        (
            &[
                "run",
                "not",
                "--leak",
                "multiplicative",
                "--x",
                "0",
                "-k",
                "3",
            ],
            "7",
        ),
    ];
    for (args, want) in cases {
        let o = spikearith(dir.path(), args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(stdout(&o).trim(), *want, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "adder", "--a", "9", "--b", "1", "--width", "3"][..],
        &["run", "divider", "--a", "1", "--width", "3"],
        &["run", "adder", "--a", "1", "--width", "3"],
        &[
            "verify",
            "--circuit",
            "adder",
            "--widths",
            "9",
            "--mode",
            "exhaustive",
        ],
        &["run", "adder"],
    ] {
        let o = spikearith(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_exit_status_tracks_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ok = spikearith(
        dir.path(),
        &["verify", "--circuit", "variable_mult", "--widths", "1..4"],
    );
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("failures=0 => PASS"));
    let report = fs::read_to_string(dir.path().join("verify-report.json")).unwrap();
    assert!(report
        .trim_start()
        .starts_with("{\n  \"format_version\": 1"));

    let bad = spikearith(
        dir.path(),
        &[
            "verify",
            "--circuit",
            "adder",
            "--widths",
            "3",
            "--mutation",
            "1",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("counterexample"));
}

#[test]
fn random_verify_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |r: &'static str| {
        vec![
            "verify",
            "--circuit",
            "subtractor",
            "--widths",
            "9..10",
            "--mode",
            "random",
            "--samples",
            "50",
            "--seed",
            "11",
            "--report",
            r,
        ]
    };
    assert!(spikearith(dir.path(), &args("a.json")).status.success());
    assert!(spikearith(dir.path(), &args("b.json")).status.success());
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn export_import_export_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let o = spikearith(
        dir.path(),
        &[
            "export", "mux", "--width", "4", "--format", "netlist", "--out", "mux.json",
        ],
    );
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("mux.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["neurons"].as_array().unwrap().len(), 4);
    assert_eq!(v["taps"]["inputs"].as_object().unwrap().len(), 4);

    let o = spikearith(dir.path(), &["import", "mux.json", "--out", "again.json"]);
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("again.json")).unwrap(),
        text.as_bytes()
    );
}

#[test]
fn dot_export_shows_adder_structure() {
    let dir = tempfile::tempdir().unwrap();
    let o = spikearith(
        dir.path(),
        &[
            "export",
            "adder",
            "-k",
            "3",
            "--format",
            "dot",
            "--out",
            "adder.dot",
        ],
    );
    assert!(o.status.success());
    let dot = fs::read_to_string(dir.path().join("adder.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.trim_end().ends_with('}'));
    for t in ["T1", "T2", "T3"] {
        assert!(dot.contains(&format!("/{t}\\n")));
    }
    // carry edges from T2 into each hidden neuron
    assert!(dot.contains("n3 -> n2 [label=\"w=1 d=1\"]"));
    assert!(dot.contains("n3 -> n4 [label=\"w=1 d=1\"]"));
}

#[test]
fn raster_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let o = Command::new(env!("CARGO_BIN_EXE_spikearith"))
        .args([
            "run", "adder", "--a", "3", "--b", "1", "-k", "3", "--raw", "--raster", "r.csv",
        ])
        .current_dir(dir.path())
        .env("SPIKEARITH_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    // 4 = 0b100 on S (offset 3)
    assert_eq!(stdout(&o).trim(), "S offset=3 width=4: 5");
    let csv = fs::read_to_string(out.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# spikearith-raster v1"));
    assert_eq!(lines.next(), Some("time,neuron_id"));
    let rows: Vec<(u64, u32)> = lines
        .map(|l| {
            let (t, n) = l.split_once(',').unwrap();
            (t.parse().unwrap(), n.parse().unwrap())
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort();
    assert_eq!(rows, sorted);
}
