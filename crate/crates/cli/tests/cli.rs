use std::path::{Path, PathBuf};

use flatnorm::exact::{parse_rational, rationalize};
use flatnorm::fixtures::{equilateral_lattice, moebius_regression_chain, moebius_strip, square, square_path};
use flatnorm_cli::app::{EXIT_INFEASIBLE, EXIT_OK, EXIT_PARSE};
use flatnorm_cli::io::{write_chain, write_off};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let mut out = Vec::new();
    let code = flatnorm_cli::run(std::iter::once("flatnorm").chain(args.iter().copied()), &mut out);
    let text = String::from_utf8(out).unwrap();
    (code, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn square_files(dir: &Path) -> (PathBuf, PathBuf) {
    let k = square();
    (write(dir, "square.off", &write_off(&k).unwrap()), write(dir, "path.chain", &write_chain(&k, &square_path(&k))))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn msfn_on_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, chain) = square_files(dir.path());
    let (code, record) = run(&["msfn", "--mesh", s(&mesh), "--chain", s(&chain), "--dim", "1", "--lambda", "1"]);
    assert_eq!(code, EXIT_OK);
    let f = &record["outputs"]["flat_norm"];
    let expected = rationalize(2f64.sqrt()) + parse_rational("1/2").unwrap();
    assert_eq!(parse_rational(f["exact"].as_str().unwrap()).unwrap(), expected);
    assert!((f["decimal"].as_f64().unwrap() - (2f64.sqrt() + 0.5)).abs() < 1e-12);
    assert_eq!(record["command"], "msfn");
    assert_eq!(record["inputs_digest"].as_str().unwrap().len(), 64);
    assert!(record["outputs"].get("weights").is_none());
    let (_, record) =
        run(&["msfn", "--mesh", s(&mesh), "--chain", s(&chain), "--dim", "1", "--lambda", "1", "--echo-weights"]);
    assert_eq!(record["outputs"]["weights"]["w"].as_array().unwrap().len(), 5);
    assert_eq!(record["outputs"]["weights"]["v"][0]["exact"], "1/2");
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, chain) = square_files(dir.path());
    let out = dir.path().join("sweep.json");
    let (code, _) = run(&[
        "sweep", "--mesh", s(&mesh), "--chain", s(&chain), "--dim", "1", "--lambdas", "0.5,1,2", "--out", s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let mut reader = csv::Reader::from_path(out.with_extension("csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["lambda", "F", "x_mass", "s_mass", "solver_path"]);
    let f: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(f.len(), 3);
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    let (code, record) =
        run(&["sweep", "--mesh", s(&mesh), "--chain", s(&chain), "--dim", "1", "--lambda-range", "0:4:5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"]["points"].as_array().unwrap().len(), 5);
}

#[test]
fn certify_moebius_off() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "moebius.off", &write_off(&moebius_strip()).unwrap());
    let (code, record) = run(&["certify-tu", "--mesh", s(&mesh), "--dim", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"]["verdict"], "NotTU");
    let witness = &record["outputs"]["reason"]["MoebiusFound"];
    assert_eq!(witness["triangles"].as_array().unwrap().len(), 5);
    assert_eq!(witness["det"].as_i64().unwrap().abs(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, _) = square_files(dir.path());
    let bad = write(dir.path(), "bad.chain", "1 3 1\n");
    let (code, record) = run(&["msfn", "--mesh", s(&mesh), "--chain", s(&bad), "--dim", "1", "--lambda", "1"]);
    assert_eq!(code, EXIT_PARSE);
    assert_eq!(record["error"]["kind"], "parse");
    assert_eq!(run(&["msfn", "--mesh", s(&mesh)]).0, EXIT_PARSE);

    let m = moebius_strip();
    let mesh = write(dir.path(), "moebius.off", &write_off(&m).unwrap());
    let chain = write(dir.path(), "reg.chain", &write_chain(&m, &moebius_regression_chain()));
    let args = ["msfn", "--mesh", s(&mesh), "--chain", s(&chain), "--dim", "1", "--lambda", "0", "--weights", "unit"];
    let (code, record) = run(&[&args[..], &["--node-budget", "0"]].concat());
    assert_eq!(code, EXIT_INFEASIBLE);
    assert_eq!(record["error"]["kind"], "budget");
    let (code, record) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"]["solver_path"], "BranchAndBound");
    assert_eq!(record["outputs"]["flat_norm"]["exact"], "5");
}

#[test]
fn geometry_commands() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "lattice.off", &write_off(&equilateral_lattice(3, 2)).unwrap());
    let (code, record) = run(&["regularity", "--mesh", s(&mesh)]);
    assert_eq!(code, EXIT_OK);
    assert!(record["outputs"]["theta"].as_f64().unwrap() > 0.0);
    assert!(record["outputs"].get("per_simplex").is_none());

    let (code, record) = run(&["bounds", "--mesh", s(&mesh), "--dim", "1", "--mass-t", "1", "--mass-bdt", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!((record["outputs"]["bounds"]["bound_mp"].as_f64().unwrap() - 211.06).abs() < 0.01);

    let h = 3f64.sqrt() / 6.0;
    let curve = write(
        dir.path(),
        "square.curve",
        &format!("closed\n1.25 {}\n1.75 {}\n1.75 {}\n1.25 {}\n", h - 0.25, h - 0.25, h + 0.25, h + 0.25),
    );
    let (code, record) = run(&["retract", "--mesh", s(&mesh), "--curve", s(&curve), "--samples", "8"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"]["within_bound"], true);
    let (code, record) = run(&["refine-study", "--mesh", s(&mesh), "--curve", s(&curve), "--levels", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"].as_array().unwrap().len(), 2);

    let outside = write(dir.path(), "far.curve", "open\n0.5 0.1\n9 0.1\n");
    assert_eq!(run(&["retract", "--mesh", s(&mesh), "--curve", s(&outside)]).0, EXIT_PARSE);
}

#[test]
fn pyramid_files_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("p");
    let (code, record) = run(&["gen-pyramid", "--n", "4", "--out-prefix", s(&prefix)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(record["outputs"]["surface_triangles"], 18);
    let mesh = flatnorm_cli::io::load_mesh(&prefix.with_extension("ele")).unwrap();
    let (k, t) = flatnorm_cli::synth::generate_noisy_pyramid(4, 0.0, 0);
    assert_eq!(mesh.complex, k);
    assert_eq!(mesh.faces.unwrap(), t);
}
