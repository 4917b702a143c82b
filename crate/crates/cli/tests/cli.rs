use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use basedet::raster::draw_polyline;
use basedet::{formats, pgm, ProbabilityGrid};
use tempfile::TempDir;

fn basedet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basedet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, spec: &str) -> std::path::PathBuf {
    let spec_path = dir.join("spec.txt");
    fs::write(&spec_path, spec).unwrap();
    let out = dir.join("page");
    let o = basedet(&["synth", "--spec", s(&spec_path), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn machine_line(o: &Output) -> Vec<f64> {
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    text.lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect()
}

const SMALL: &str = "page_w=900\npage_h=1200\nn_lines=12\nleading=50\nseed=4\n";

#[test]
fn synth_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let pa = synth(a.path(), SMALL);
    let pb = synth(b.path(), SMALL);
    for name in ["page.pgm", "baselines.txt", "regions.txt", "props.txt"] {
        assert_eq!(fs::read(pa.join(name)).unwrap(), fs::read(pb.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn synth_layout_keys() {
    let dir = TempDir::new().unwrap();
    let p = synth(dir.path(), "n_lines=12\nleading=40\ncolumns=2\n");
    let props = fs::read_to_string(p.join("props.txt")).unwrap();
    assert!(props.lines().any(|l| l == "dblp=1"), "{props}");
    let lines = fs::read_to_string(p.join("baselines.txt")).unwrap();
    assert_eq!(lines.lines().count(), 12);
}

#[test]
fn synth_rejects_unwritable_output() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.txt");
    fs::write(&spec, SMALL).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = basedet(&["synth", "--spec", s(&spec), "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
}

#[test]
fn oracle_round_trip_scores_one() {
    let dir = TempDir::new().unwrap();
    let p = synth(dir.path(), SMALL);
    let out = dir.path().join("pred.txt");
    let o = basedet(&[
        "detect",
        "--image",
        s(&p.join("page.pgm")),
        "--props",
        s(&p.join("props.txt")),
        "--regions",
        s(&p.join("regions.txt")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = basedet(&["eval", "--gt", s(&p.join("baselines.txt")), "--pred", s(&out)]);
    assert!(e.status.success());
    let m = machine_line(&e);
    assert_eq!(m, vec![1.0, 1.0, 1.0, 12.0, 12.0]);
}

#[test]
fn noisy_detection_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let p = synth(dir.path(), SMALL);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = basedet(&[
            "detect",
            "--image",
            s(&p.join("page.pgm")),
            "--regions",
            s(&p.join("regions.txt")),
            "--flip-rate",
            "0.02",
            "--p-fg",
            "0.9",
            "--p-bg",
            "0.1",
            "--seed",
            "8",
            "--regions-out",
            s(&dir.path().join(format!("{name}.regions"))),
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run("a.txt");
    let b = run("b.txt");
    assert_eq!(a, b);
    assert_eq!(
        fs::read(dir.path().join("a.txt.regions")).unwrap(),
        fs::read(dir.path().join("b.txt.regions")).unwrap()
    );
}

#[test]
fn blank_page_gives_empty_file() {
    let dir = TempDir::new().unwrap();
    let p = synth(dir.path(), "page_w=600\npage_h=800\nn_lines=0\n");
    let out = dir.path().join("pred.txt");
    let masks = dir.path().join("masks");
    let o = basedet(&[
        "detect",
        "--image",
        s(&p.join("page.pgm")),
        "--dump-masks",
        s(&masks),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&out).unwrap(), b"");
    let mask = pgm::read(&masks.join("baseline_mask.pgm")).unwrap();
    assert_eq!(mask.count_foreground(), 0);
}

#[test]
fn file_classifier_uses_probability_map() {
    let dir = TempDir::new().unwrap();
    let p = synth(dir.path(), SMALL);
    let image = pgm::read(&p.join("page.pgm")).unwrap();
    let gt = formats::parse_polylines(&fs::read_to_string(p.join("baselines.txt")).unwrap()).unwrap();
    let mut map = ProbabilityGrid::zeros(image.width(), image.height());
    for line in &gt {
        draw_polyline(&mut map, line, 7.0).unwrap();
    }
    let map_path = dir.path().join("map.pgm");
    fs::write(&map_path, pgm::encode(&map)).unwrap();
    let out = dir.path().join("pred.txt");
    let o = basedet(&[
        "detect",
        "--image",
        s(&p.join("page.pgm")),
        "--classifier",
        "file",
        "--prob-map",
        s(&map_path),
        "--regions",
        s(&p.join("regions.txt")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = basedet(&["eval", "--gt", s(&p.join("baselines.txt")), "--pred", s(&out)]);
    assert!(machine_line(&e)[2] > 0.99);

    let o = basedet(&["detect", "--image", s(&p.join("page.pgm")), "--classifier", "file", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn detect_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pred.txt");
    let image = dir.path().join("page.pgm");
    fs::write(&image, pgm::encode(&ProbabilityGrid::filled(64, 64, 1.0))).unwrap();

    let o = basedet(&["detect", "--image", s(&image), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("properties"));

    let props = dir.path().join("props.txt");
    fs::write(&props, "spac=0\ndblp=0\n").unwrap();
    let o = basedet(&["detect", "--image", s(&image), "--props", s(&props), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&props, "spac=0\ndblp=0\nlnds=0\nnotxt=0\n").unwrap();
    let missing = dir.path().join("missing.pgm");
    let o = basedet(&["detect", "--image", s(&missing), "--props", s(&props), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let garbage = dir.path().join("garbage.pgm");
    fs::write(&garbage, "P7 nonsense").unwrap();
    let o = basedet(&["detect", "--image", s(&garbage), "--props", s(&props), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
    assert!(!out.exists());
}

#[test]
fn eval_reports_parse_line() {
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.txt");
    let bad = dir.path().join("bad.txt");
    fs::write(&good, "0,0;100,0\n").unwrap();
    fs::write(&bad, "0,0;100,0\n\n5,5;oops\n").unwrap();
    let o = basedet(&["eval", "--gt", s(&good), "--pred", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let shifted = dir.path().join("shifted.txt");
    fs::write(&shifted, "0,30;100,30\n").unwrap();
    let o = basedet(&["eval", "--gt", s(&good), "--pred", s(&shifted)]);
    assert!(o.status.success());
    assert_eq!(machine_line(&o), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    let o = basedet(&["eval", "--gt", s(&good), "--pred", s(&shifted), "--tolerance", "31"]);
    assert_eq!(machine_line(&o)[2], 1.0);
}

#[test]
fn netspec_tables() {
    let o = basedet(&["netspec", "--net", "da"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "bottom,10,512"));
    let o = basedet(&["netspec", "--net", "bl"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "prescale,160,32"));
    assert_eq!(text.lines().last(), Some("output,160,1"));
}

#[test]
fn dice_command() {
    let dir = TempDir::new().unwrap();
    let h = dir.path().join("h.pgm");
    let y = dir.path().join("y.pgm");
    fs::write(&h, pgm::encode(&ProbabilityGrid::filled(20, 20, 1.0))).unwrap();
    fs::write(&y, pgm::encode(&ProbabilityGrid::filled(20, 20, 1.0))).unwrap();
    let o = basedet(&["dice", "--h", s(&h), "--y", s(&y), "--inner", "5,15", "--outer", "3,17"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("D    1.000000"));
    assert!(text.contains("1-D  0.000000"));

    let o = basedet(&["dice", "--h", s(&h), "--y", s(&y), "--inner", "2,19", "--outer", "3,17"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_config_keys() {
    let o = basedet(&["synth", "--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["page_w", "page_h", "n_lines", "leading", "skew", "columns", "margin_text", "seed"] {
        assert!(text.contains(key), "synth help lacks {key}");
    }
    let o = basedet(&["detect", "--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["spac", "dblp", "lnds", "notxt"] {
        assert!(text.contains(key), "detect help lacks {key}");
    }
}
