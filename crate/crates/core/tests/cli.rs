use std::path::Path;
use std::process::{Command, Output};

fn dwtmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwtmark"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Generates fixtures and embeds the logo into the blobs host.
fn setup(dir: &Path) {
    assert_eq!(dwtmark(&["gen-fixtures", "--out", s(dir)]).status.code(), Some(0));
    let out = dwtmark(&[
        "embed",
        s(&dir.join("blobs.png")),
        s(&dir.join("watermark.png")),
        "--out",
        s(&dir.join("marked.png")),
        "--key",
        s(&dir.join("key.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let line = stdout(&out);
    assert!(line.contains("payload_percent=21.9727"), "{line}");
    assert!(line.contains("sites=225"), "{line}");
}

#[test]
fn embed_extract_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    let out = dwtmark(&[
        "extract",
        s(&d.join("marked.png")),
        "--key",
        s(&d.join("key.json")),
        "--out",
        s(&d.join("wm.png")),
        "--reference",
        s(&d.join("watermark.png")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("nc=1.0000 error_bits=0"), "{}", stdout(&out));
}

#[test]
fn embed_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    let first = (
        std::fs::read(d.join("marked.png")).unwrap(),
        std::fs::read(d.join("key.json")).unwrap(),
    );
    setup(d);
    let second = (
        std::fs::read(d.join("marked.png")).unwrap(),
        std::fs::read(d.join("key.json")).unwrap(),
    );
    assert!(first == second);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    assert_eq!(dwtmark(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dwtmark(&["embed", "only-one-arg"]).status.code(), Some(1));
    assert_eq!(dwtmark(&["--help"]).status.code(), Some(0));

    let missing = dwtmark(&[
        "embed",
        s(&d.join("nope.png")),
        s(&d.join("watermark.png")),
        "--out",
        s(&d.join("x.png")),
        "--key",
        s(&d.join("x.json")),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());

    // 16×16 host holds 4·(16/8)² = 16 bits < 900
    let tiny = dwtmark::RgbImage::from_fn(16, 16, |r, c| [r as u8 * 9, c as u8 * 9, 77]).unwrap();
    dwtmark::save_rgb_image(&tiny, d.join("tiny.png")).unwrap();
    let capacity = dwtmark(&[
        "embed",
        s(&d.join("tiny.png")),
        s(&d.join("watermark.png")),
        "--out",
        s(&d.join("x.png")),
        "--key",
        s(&d.join("x.json")),
    ]);
    assert_eq!(capacity.status.code(), Some(3));

    let wrong_dims = dwtmark(&[
        "extract",
        s(&d.join("tiny.png")),
        "--key",
        s(&d.join("key.json")),
        "--out",
        s(&d.join("x.png")),
    ]);
    assert_eq!(wrong_dims.status.code(), Some(3));

    let oob = dwtmark(&[
        "attack",
        s(&d.join("marked.png")),
        "crop:250,250,64,64",
        "--out",
        s(&d.join("x.png")),
    ]);
    assert_eq!(oob.status.code(), Some(3));
    let bad_spec = dwtmark(&[
        "attack",
        s(&d.join("marked.png")),
        "blur:3",
        "--out",
        s(&d.join("x.png")),
    ]);
    assert_eq!(bad_spec.status.code(), Some(3));
}

#[test]
fn attacks_via_spec_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    let marked = s(&d.join("marked.png")).to_string();

    let copy = d.join("copy.png");
    assert_eq!(
        dwtmark(&["attack", &marked, "crop:0,0,0,0", "--out", s(&copy)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&marked).unwrap());

    let by_spec = d.join("a.png");
    let by_flag = d.join("b.png");
    assert_eq!(
        dwtmark(&["attack", &marked, "compress:6.0", "--out", s(&by_spec)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        dwtmark(&["attack", &marked, "--threshold", "6", "--out", s(&by_flag)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&by_spec).unwrap(), std::fs::read(&by_flag).unwrap());

    let cropped = d.join("c.png");
    assert_eq!(
        dwtmark(&["attack", &marked, "--crop", "0,0,64,64", "--out", s(&cropped)])
            .status
            .code(),
        Some(0)
    );
    let img = dwtmark::load_rgb_image(&cropped).unwrap();
    assert_eq!(img.pixel(10, 10), [0; 3]);
}

#[test]
fn report_has_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(dwtmark(&["gen-fixtures", "--out", s(d)]).status.code(), Some(0));
    let csv = d.join("report.csv");
    let out = dwtmark(&[
        "report",
        s(&d.join("gradient.png")),
        s(&d.join("blobs.png")),
        s(&d.join("texture.png")),
        "--watermark",
        s(&d.join("watermark.png")),
        "--out",
        s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], dwtmark::cli::CSV_HEADER);
    assert_eq!(lines.len(), 1 + 36);
    assert!(lines[1].starts_with("gradient,ycbcr,none,"));
    assert!(lines[2].starts_with("gradient,ycbcr,compress t=1.0,"));
    assert!(lines[5].starts_with("gradient,ycbcr,\"crop 0,0,64,64,0\","));
    assert!(lines[7].starts_with("gradient,rgb,none,"));
    for line in lines.iter().filter(|l| l.contains(",none,")) {
        assert!(line.ends_with(",1.0000,0,21.9727"), "{line}");
    }
}
