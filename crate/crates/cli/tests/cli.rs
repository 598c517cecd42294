use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn repcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repcone"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn alexander_outputs() {
    let fig8 = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/fig8.grp");
    for (args, expected) in [
        (vec!["--knot", "trefoil"], "t^2 - t + 1"),
        (vec!["--knot", "torus:3,4"], "(t^2-t+1)(t^4-t^2+1)"),
        (vec!["--file", fig8], "t^2 - 3t + 1"),
    ] {
        let o = repcone(&[&["alexander"], args.as_slice()].concat());
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), expected);
    }
}

#[test]
fn catalog_entries() {
    let o = repcone(&["catalog"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().count() >= 3);
    let a = stdout(&repcone(&["alexander", "--knot", "torus:3,2"]));
    let b = stdout(&repcone(&["alexander", "--knot", "trefoil"]));
    assert_eq!(a, b);
    assert_eq!(
        repcone(&["alexander", "--knot", "torus:2,2"]).status.code(),
        Some(1)
    );
}

#[test]
fn analyze_trefoil_n2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = repcone(&[
        "analyze",
        "--knot",
        "trefoil",
        "--n",
        "2",
        "--eig",
        "cyc:12/1,cyc:12/11",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = read_json(&path);
    let keys = [
        "presentation",
        "alexander",
        "hypotheses",
        "cohomology",
        "cone",
        "deformation",
        "character",
        "checks",
    ];
    assert_eq!(r.as_object().unwrap().keys().count(), keys.len());
    for k in keys {
        assert!(r.get(k).is_some(), "{k}");
    }
    let d = &r["cohomology"]["diagonal"];
    assert_eq!(
        (
            d["dim_z1"]["measured"].as_u64(),
            d["h1"]["measured"].as_u64(),
            d["h2"]["measured"].as_u64()
        ),
        (Some(5), Some(3), Some(2))
    );
    let t = &r["cohomology"]["triangular"];
    assert_eq!(
        (t["h0"]["measured"].as_u64(), t["h1"]["measured"].as_u64()),
        (Some(0), Some(1))
    );
    let dims: Vec<u64> = r["cone"]["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["dim"]["measured"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![3, 4]);
    assert_eq!(r["deformation"]["irreducible"], Value::Bool(true));
}

#[test]
fn analyze_torus_3_4() {
    let o = repcone(&[
        "analyze",
        "--knot",
        "torus:3,4",
        "--n",
        "3",
        "--eig",
        "cyc:36/4,cyc:36/1,cyc:36/31",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("cone dims: 8,9,9,10"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = repcone(&[
        "analyze",
        "--knot",
        "torus:3,4",
        "--n",
        "3",
        "--eig",
        "cyc:12/1,cyc:1/0,cyc:12/11",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r = read_json(&path);
    assert!(r["cohomology"].is_null());
    assert!(r["hypotheses"]["reasons"][0]
        .as_str()
        .unwrap()
        .starts_with("lambda_1/lambda_3"));
}

#[test]
fn json_is_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let o = repcone(&[
            "analyze",
            "--knot",
            "trefoil",
            "--n",
            "3",
            "--eig",
            "cyc:6/1,cyc:1/0,cyc:6/5",
            "--samples",
            "30",
            "--seed",
            seed,
            "--json",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json", "5"), run("b.json", "5"));
    assert_ne!(run("a.json", "5"), run("c.json", "6"));
}

#[test]
fn subcommands_and_exit_codes() {
    let o = repcone(&[
        "hypotheses",
        "--knot",
        "fig8",
        "--eig",
        "cyc:12/1,cyc:12/11",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = repcone(&[
        "hypotheses",
        "--knot",
        "trefoil",
        "--eig",
        "cyc:12/1,cyc:12/11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("hypotheses hold"));

    let o = repcone(&[
        "cone",
        "--knot",
        "trefoil",
        "--n",
        "3",
        "--eig",
        "cyc:6/1,cyc:1/0,cyc:6/5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("oracle 100/100 agree"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = repcone(&[
        "character",
        "--knot",
        "trefoil",
        "--n",
        "3",
        "--eig",
        "cyc:6/1,cyc:1/0,cyc:6/5",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        read_json(&path)["character"]["dim_h1_quotient"]["measured"].as_u64(),
        Some(4)
    );

    assert_eq!(
        repcone(&[
            "analyze",
            "--knot",
            "trefoil",
            "--n",
            "3",
            "--eig",
            "cyc:12/1,cyc:12/11"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(repcone(&["alexander"]).status.code(), Some(1));
    assert_eq!(
        repcone(&["alexander", "--knot", "unknot"]).status.code(),
        Some(1)
    );
}

#[test]
fn numeric_eigenvalues_are_accepted() {
    // cyc:12/1 and cyc:12/11 written out numerically
    let (c, s) = (3f64.sqrt() / 2.0, 0.5);
    let eig = format!("num:{c},{s},num:{c},-{s}");
    let o = repcone(&["hypotheses", "--knot", "trefoil", "--n", "2", "--eig", &eig]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
