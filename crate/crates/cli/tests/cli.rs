use std::fs::File;
use std::io::BufWriter;
use std::process::{Command, Output};

use dcdp::cdp::construct_v;
use dcdp::conjugate::llt_nd;
use dcdp::grid::{io, Grid, GridFn};

fn dcdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcdp")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["run", "--preset", "nope"],
        vec!["run"],
        vec!["run", "--preset", "sir", "--alg", "cdp2", "--n", "5", "--reference-n", "5", "--x0-count", "2"],
        vec!["run", "--preset", "sir", "--n", "1"],
        vec!["rollout", "--preset", "sir", "--x0", "0.5"],
        vec!["rollout", "--preset", "sir", "--alg", "cdp2", "--x0", "0.5,0.2", "--n", "5"],
        vec!["rollout", "--preset", "sir", "--alg", "cdp1", "--policy", "--x0", "0.5,0.2", "--n", "5"],
    ] {
        let o = dcdp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"));
    }
}

#[test]
fn run_prints_table_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = dcdp(&[
        "run",
        "--preset",
        "synthetic_separable",
        "--horizon",
        "3",
        "--alg",
        "ddp,cdp2",
        "--n",
        "5,7",
        "--reference-n",
        "9",
        "--x0-count",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("ddp"));
    for f in ["report.json", "table.csv", "error_curves.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn rollout_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = dcdp(&[
        "rollout",
        "--preset",
        "synthetic_separable",
        "--horizon",
        "4",
        "--n",
        "7",
        "--x0",
        "-0.5,0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x0,x1,u0,u1,stage_cost");
    assert_eq!(text.lines().count(), 6);
    assert!(stderr(&o).starts_with("cost "));

    let o = dcdp(&["rollout", "--preset", "sir", "--alg", "ddp", "--policy", "--x0", "0.5,0.2", "--n", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dcdp(&["rollout", "--preset", "sir", "--alg", "cdp1", "--numeric-conj", "--x0", "0.5,0.2", "--n", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn transform_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let f = GridFn::from_fn(Grid::uniform(&[-1.0, -2.0], &[1.0, 2.0], &[9, 5]).unwrap(), |x| {
        x[0] * x[0] + (x[1] - 0.5).abs()
    })
    .unwrap();
    let input = dir.path().join("f.json");
    io::write_json(&f, BufWriter::new(File::create(&input).unwrap())).unwrap();

    let out = dir.path().join("g.csv");
    let o = dcdp(&["transform", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = io::read_csv(File::open(&out).unwrap()).unwrap();
    let dual = construct_v(&f, &[9, 5]).unwrap().grid;
    assert_eq!(got, llt_nd(&f, &dual).unwrap().values);

    let o = dcdp(&[
        "transform",
        "--input",
        input.to_str().unwrap(),
        "--dual-lo",
        "-3,-1",
        "--dual-hi",
        "3,1",
        "--dual-n",
        "4,3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = io::read_json(o.stdout.as_slice()).unwrap();
    let dual = Grid::uniform(&[-3.0, -1.0], &[3.0, 1.0], &[4, 3]).unwrap();
    assert_eq!(got, llt_nd(&f, &dual).unwrap().values);

    let o = dcdp(&["transform", "--input", input.to_str().unwrap(), "--dual-lo", "-3,-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dcdp(&["transform", "--input", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
