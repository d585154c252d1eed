use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use parbundle_cli::run;
use tempfile::TempDir;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("parbundle").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three rungs of length 1 hanging from y = 0, every endpoint of degree 3.
/// Slopes along cut `c1` are 0.3, -0.2, -0.05 and along `c2` -0.2, 0.3, -0.05.
fn ladder(slopes: &[f64]) -> String {
    let mu = |h: f64| 2.0 * h / 3.0;
    let mut t = String::new();
    for (i, s) in slopes.iter().enumerate() {
        let x = i as f64 * 0.5;
        t.push_str(&format!("vertex u{i} {x} 0 {}\n", mu(PI)));
        t.push_str(&format!("vertex v{i} {x} -1 {}\n", mu(PI + s)));
    }
    let last = slopes.len() - 1;
    let lx = last as f64 * 0.5;
    t.push_str(&format!(
        "vertex lt -1 0 1\nvertex lb -1 -1 1\nvertex rt {} 0 1\nvertex rb {} -1 1\n",
        lx + 1.0,
        lx + 1.0
    ));
    for i in 0..slopes.len() {
        t.push_str(&format!("edge r{i} u{i} v{i}\n"));
    }
    for i in 0..last {
        t.push_str(&format!(
            "edge t{i} u{i} u{}\nedge b{i} v{i} v{}\n",
            i + 1,
            i + 1
        ));
    }
    t.push_str(&format!(
        "edge elt lt u0\nedge elb lb v0\nedge ert u{last} rt\nedge erb v{last} rb\n"
    ));
    t
}

fn worked_example(dir: &TempDir) -> PathBuf {
    let mut text = ladder(&[0.3, -0.2, -0.05]);
    text.push_str("cut c1 r0+ r1+ r2+\ncut c2 r2- r1- r0-\n");
    write(dir, "m.pmg", &text)
}

#[test]
fn validate_ok_and_violations() {
    let dir = TempDir::new().unwrap();
    let ok = write(
        &dir,
        "ok.pmg",
        "vertex a 0 0 1\nvertex b 1 0 1\nedge ab a b\n",
    );
    let r = cli(&["validate", s(&ok)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out.trim(), "ok");

    let bad = write(
        &dir,
        "x.pmg",
        "vertex a 0 0 1\nvertex b 1 1 1\nvertex c 0 1 1\nvertex d 1 0 1\nedge ac a b\nedge bd c d\nedge ab a c\nedge cd b d\n",
    );
    let r = cli(&["validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains("ac") && r.out.contains("bd"));
    let r = cli(&["--porcelain", "validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.out.lines().any(|l| l == "valid=false"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.pmg", &format!("vertex a 0 0 {}\n", PI));
    let r = cli(&["validate", s(&f)]);
    assert_eq!(r.code, 2);
    assert_eq!(r.err.lines().count(), 1);
    assert!(r.err.contains('a'));
    let r = cli(&["validate", "/no/such/file.pmg"]);
    assert_eq!(r.code, 2);
    let r = cli(&["frobnicate"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.err.lines().count(), 1);
}

#[test]
fn cut_check_worked_example() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    let r = cli(&["cut-check", s(&m), "--cut", "c1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("bundle: yes"));
    assert!(r.out.contains("prefix"));
    assert_eq!(r.out.lines().filter(|l| l.contains(" r")).count(), 3);

    let r = cli(&["--porcelain", "cut-check", s(&m), "--cut", "c1"]);
    assert_eq!(r.code, 0);
    assert!(r.out.lines().all(|l| l.contains('=')));
    let get = |k: &str| -> f64 {
        r.out
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("prefix.1") - 0.3).abs() < 1e-9);
    assert!((get("prefix.2") - 0.1).abs() < 1e-9);
    assert!((get("prefix.3") - 0.05).abs() < 1e-9);

    // reversed traversal of the same edges starts with a negative slope
    let r = cli(&["cut-check", s(&m), "--cut", "c2"]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains("bundle: no"));
    let r = cli(&["cut-check", s(&m), "--cut", "nope"]);
    assert_eq!(r.code, 2);
}

#[test]
fn edge_check_directions() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    assert_eq!(cli(&["edge-check", s(&m), "--edge", "r0"]).code, 0);
    assert_eq!(
        cli(&["edge-check", s(&m), "--edge", "r0", "--reverse"]).code,
        1
    );
    assert_eq!(cli(&["edge-check", s(&m), "--edge", "r1"]).code, 1);
    let r = cli(&[
        "--porcelain",
        "edge-check",
        s(&m),
        "--edge",
        "r1",
        "--reverse",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.out.lines().any(|l| l == "edge=r1-"));
    assert!(r.out.lines().any(|l| l == "bundle=true"));
}

#[test]
fn classify_needs_orientation() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    let r = cli(&["classify", s(&m)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("orientation"));
    assert_eq!(r.err.lines().count(), 1);

    let r = cli(&["classify", s(&m), "--orientation", "1,0"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.lines().next().unwrap().starts_with("class=C"));
    assert!(r.out.contains("cut 1: type="));
    assert!(r.out.contains("|C|="));
    let r = cli(&["classify", s(&m), "--orientation", "0,0"]);
    assert_eq!(r.code, 2);
}

#[test]
fn gen_class_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    for code in ["1000", "0101", "1111", "0001"] {
        let out = dir.path().join(format!("{code}.pmg"));
        let r = cli(&["gen-class", "--code", code, "-o", s(&out)]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(fs::read_to_string(&out)
            .unwrap()
            .contains("orientation 1 0"));
        assert_eq!(cli(&["validate", s(&out)]).code, 0);
        let r = cli(&["--porcelain", "classify", s(&out)]);
        assert_eq!(r.code, 0);
        assert!(
            r.out.lines().any(|l| l == format!("class=C{code}")),
            "{}",
            r.out
        );
        assert!(r.out.lines().any(|l| l == "chain=true" || l == "chain=na"));
    }
    let r = cli(&[
        "gen-class",
        "--code",
        "0000",
        "-o",
        s(&dir.path().join("z.pmg")),
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn porcelain_and_human_agree() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.pmg");
    cli(&["gen-class", "--code", "1110", "-o", s(&out)]);
    let human = cli(&["classify", s(&out)]);
    let machine = cli(&["--porcelain", "classify", s(&out)]);
    assert_eq!(human.code, machine.code);
    let class = human.out.lines().next().unwrap();
    assert!(machine.out.lines().any(|l| l == class));
    assert!(machine.out.lines().all(|l| l.split_once('=').is_some()));
}

#[test]
fn trace_verdicts_and_dump() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    let dump = dir.path().join("dump.txt");
    let r = cli(&[
        "trace",
        s(&m),
        "--rays",
        "4",
        "--spacing",
        "0.05",
        "--origin",
        "-0.5,-0.4",
        "--dir",
        "1,0",
        "--dump",
        s(&dump),
    ]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    let text = fs::read_to_string(&dump).unwrap();
    let paths = text.lines().filter(|l| l.starts_with("path ")).count();
    let events: Vec<&str> = text.lines().filter(|l| l.starts_with("event ")).collect();
    assert_eq!(events.len(), 12);
    assert_eq!(paths, 4 * 5);
    let fields: Vec<&str> = events[0].split_whitespace().collect();
    assert_eq!(fields.len(), 6);
    assert_eq!(fields[2], "r0");

    // converging family over a decreasing edge
    let conv = write(&dir, "conv.pmg", &ladder(&[-0.6]));
    let r = cli(&[
        "--porcelain",
        "trace",
        s(&conv),
        "--rays",
        "2",
        "--spacing",
        "0.6",
        "--origin",
        "-0.5,-0.2",
        "--dir",
        "1,0",
    ]);
    assert!(r.out.lines().any(|l| l == "strict=false"), "{}", r.out);
    assert!(r
        .out
        .lines()
        .any(|l| l == "converges_beyond=true" || l == "intersects=true"));

    let r = cli(&[
        "trace",
        s(&m),
        "--rays",
        "1",
        "--spacing",
        "0.1",
        "--origin",
        "0,0",
        "--dir",
        "1,0",
    ]);
    assert_eq!(r.code, 2);
    let r = cli(&[
        "trace",
        s(&m),
        "--rays",
        "3",
        "--spacing",
        "0.1",
        "--origin",
        "0,0",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn render_writes_svg() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    let out = dir.path().join("m.svg");
    let r = cli(&["render", s(&m), "-o", s(&out), "--labels"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.contains("<svg") && svg.contains("<text"));
    assert!(!svg.contains("<polyline"));
    let r = cli(&[
        "render",
        s(&m),
        "-o",
        s(&out),
        "--rays",
        "3",
        "--spacing",
        "0.1",
        "--origin",
        "-0.5,-0.3",
        "--dir",
        "1,0",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(
        fs::read_to_string(&out)
            .unwrap()
            .matches("<polyline")
            .count(),
        3
    );
    let r = cli(&["render", s(&m), "-o", s(&out), "--rays", "3"]);
    assert_eq!(r.code, 2);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let m = worked_example(&dir);
    let bin = env!("CARGO_BIN_EXE_parbundle");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let o = status(&["cut-check", s(&m), "--cut", "c1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = status(&["cut-check", s(&m), "--cut", "c2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = status(&["classify", s(&m)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
}
