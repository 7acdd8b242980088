use covertmac::channel::reference::{reference_mac_json, REFERENCE_ROWS};
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covertmac")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn reference_file(dir: &Path) -> String {
    let p = dir.join("reference.json");
    std::fs::write(&p, reference_mac_json()).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn validate_accepts_the_bundled_channel() {
    let dir = tempfile::tempdir().unwrap();
    let ch = reference_file(dir.path());
    let out = run(&["validate", "--channel", &ch]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("admissible"));
}

#[test]
fn row_import_reproduces_the_bundled_json() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("reference.rows");
    std::fs::write(&rows, REFERENCE_ROWS).unwrap();
    let json = dir.path().join("imported.json");
    let args = ["validate", "--from-rows", rows.to_str().unwrap(), "--save-json", json.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    assert_eq!(std::fs::read_to_string(json).unwrap(), reference_mac_json());
}

#[test]
fn malformed_channels_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"dmmac\", \"alphabets\": ").unwrap();
    assert_eq!(code(&["validate", "--channel", bad.to_str().unwrap()]), 2);
    // a row that does not sum to one
    let text = reference_mac_json().replacen("0.28", "0.38", 1);
    std::fs::write(&bad, text).unwrap();
    assert_eq!(code(&["validate", "--channel", bad.to_str().unwrap()]), 2);
}

#[test]
fn unreachable_fixed_rate_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let ch = reference_file(dir.path());
    let out = dir.path().join("out");
    let args = ["region", "--channel", &ch, "--fix", "R3=0.5", "--starts", "4", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 3);
}

#[test]
fn bits_are_nats_over_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let ch = reference_file(dir.path());
    let (n, b) = (dir.path().join("n"), dir.path().join("b"));
    let base = ["region", "--channel", &ch, "--weights", "1,0.5,2", "--starts", "8", "--seed", "4"];
    let mut an = base.to_vec();
    an.extend(["--budgets", "0.4,0.4", "--out", n.to_str().unwrap()]);
    let bud = format!("{0},{0}", 0.4 / std::f64::consts::LN_2);
    let mut ab = base.to_vec();
    ab.extend(["--budgets", &bud, "--bits", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&an), 0);
    assert_eq!(code(&ab), 0);
    let (jn, jb) = (read_json(&n.join("region.json")), read_json(&b.join("region.json")));
    for key in ["r", "r_nc", "k"] {
        let vn = jn[key].as_array().unwrap();
        let vb = jb[key].as_array().unwrap();
        for (x, y) in vn.iter().zip(vb) {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x / std::f64::consts::LN_2 - y).abs() <= 1e-9, "{key}: {x} nats vs {y} bits");
        }
    }
    assert_eq!(jb["provenance"]["unit"], "bits");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let ch = reference_file(dir.path());
    // same paths both times, since the arguments are part of the provenance
    let files = || {
        let out = dir.path().join("out");
        let o = out.to_str().unwrap();
        let sweep = ["region", "--channel", &ch, "--sweep", "r1,R3", "--angles", "7", "--starts", "4", "--seed", "2", "--out", o];
        assert_eq!(code(&sweep), 0);
        let params = out.join("boundary.params.json");
        let first: serde_json::Value = read_json(&params)["p0000"].clone();
        let single = out.join("single.json");
        std::fs::write(&single, first.to_string()).unwrap();
        let sim = out.join("sim.json");
        let args = [
            "simulate", "--channel", &ch, "--params", single.to_str().unwrap(), "--n", "300", "--trials", "20",
            "--delta-samples", "20", "--seed", "5", "--out", sim.to_str().unwrap(),
        ];
        assert_eq!(code(&args), 0);
        ["boundary.csv", "boundary.params.json", "sim.json"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    let first = files();
    std::fs::remove_dir_all(dir.path().join("out")).unwrap();
    assert_eq!(first, files());
}

#[test]
fn tradeoff_writes_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let ch = reference_file(dir.path());
    let csv = dir.path().join("t.csv");
    assert_eq!(code(&["tradeoff", "--channel", &ch, "--out", csv.to_str().unwrap()]), 2);
    let args = ["tradeoff", "--channel", &ch, "--reduce", "user=1", "--points", "5", "--out", csv.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k1,r1"));
    assert_eq!(text.lines().count(), 6);
    assert!(csv.with_extension("provenance.json").exists());
}
