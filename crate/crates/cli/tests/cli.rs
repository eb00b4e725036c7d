use std::path::Path;
use std::process::{Command, Output};

fn amrdual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amrdual"))
        .args(args)
        .env_remove("AMRDUAL_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth_sphere(dir: &Path, name: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = amrdual(&[
        "synth",
        "uniform",
        "--n",
        "12",
        "--field",
        "sphere:6,6,6,4",
        "--output",
        p(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn extract_obj_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_sphere(dir.path(), "s.amr");
    let obj = dir.path().join("s.obj");
    let out = amrdual(&[
        "extract",
        "--input",
        p(&input),
        "--iso",
        "0",
        "--output",
        p(&obj),
        "--stats",
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(text.starts_with("# amrdual iso-surface\n"));
    assert!(text.lines().any(|l| l.starts_with("f ")));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let get = |k: &str| {
        stderr
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k}=")))
            .unwrap_or_else(|| panic!("missing {k} in {stderr}"))
            .to_string()
    };
    assert_eq!(get("cells"), "1728");
    assert_eq!(get("pass1_triangles"), get("pass2_triangles"));
    let tally: u64 = [
        "duals_accepted",
        "duals_rejected_rule1",
        "duals_rejected_rule2",
        "duals_rejected_rule3",
    ]
    .iter()
    .map(|k| get(k).parse::<u64>().unwrap())
    .sum();
    assert_eq!(tally, 8 * 1728);
}

#[test]
fn ply_by_extension_or_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_sphere(dir.path(), "s.txt");
    let ply = dir.path().join("s.ply");
    assert_eq!(
        code(&amrdual(&[
            "extract",
            "--input",
            p(&input),
            "--iso",
            "0",
            "--output",
            p(&ply)
        ])),
        0
    );
    assert!(std::fs::read(&ply)
        .unwrap()
        .starts_with(b"ply\nformat binary_little_endian 1.0\n"));
    let forced = dir.path().join("mesh.out");
    let out = amrdual(&[
        "extract",
        "--input",
        p(&input),
        "--iso",
        "0",
        "--output",
        p(&forced),
        "--format",
        "ply",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read(&ply).unwrap(),
        std::fs::read(&forced).unwrap()
    );
}

#[test]
fn threads_flag_and_env_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_sphere(dir.path(), "s.amr");
    let a = dir.path().join("a.obj");
    let b = dir.path().join("b.obj");
    assert_eq!(
        code(&amrdual(&[
            "extract",
            "--input",
            p(&input),
            "--iso",
            "0.5",
            "--output",
            p(&a),
            "--threads",
            "1"
        ])),
        0
    );
    let out = Command::new(env!("CARGO_BIN_EXE_amrdual"))
        .args([
            "extract",
            "--input",
            p(&input),
            "--iso",
            "0.5",
            "--output",
            p(&b),
        ])
        .env("AMRDUAL_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let out = amrdual(&[
        "extract",
        "--input",
        p(&input),
        "--iso",
        "0",
        "--output",
        p(&a),
        "--threads",
        "many",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&amrdual(&[])), 1);
    assert_eq!(code(&amrdual(&["extract", "--iso", "0"])), 1);
    assert_eq!(code(&amrdual(&["frobnicate"])), 1);
    assert_eq!(code(&amrdual(&["--help"])), 0);
    assert_eq!(code(&amrdual(&["--version"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let input = synth_sphere(dir.path(), "s.amr");
    let out_path = dir.path().join("o.obj");
    let out = amrdual(&[
        "extract",
        "--input",
        p(&input),
        "--iso",
        "nan",
        "--output",
        p(&out_path),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!out_path.exists());
    let out = amrdual(&[
        "synth",
        "uniform",
        "--n",
        "0",
        "--field",
        "sphere:0,0,0,1",
        "--output",
        p(&out_path),
    ]);
    assert_eq!(code(&out), 1);
    let out = amrdual(&[
        "synth",
        "uniform",
        "--n",
        "2",
        "--field",
        "cube:0,0,0,1",
        "--output",
        p(&out_path),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!out_path.exists());
}

#[test]
fn load_errors_exit_2_and_name_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0 0 0 1.0\n1 0 0 1 2.0\n").unwrap();
    let obj = dir.path().join("o.obj");
    let out = amrdual(&[
        "extract",
        "--input",
        p(&bad),
        "--iso",
        "0",
        "--output",
        p(&obj),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("record 1"));
    assert!(!obj.exists());

    let truncated = dir.path().join("t.amr");
    let good = synth_sphere(dir.path(), "g.amr");
    let bytes = std::fs::read(&good).unwrap();
    std::fs::write(&truncated, &bytes[..bytes.len() - 5]).unwrap();
    let out = amrdual(&[
        "extract",
        "--input",
        p(&truncated),
        "--iso",
        "0",
        "--output",
        p(&obj),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!obj.exists());

    let missing = dir.path().join("nope.amr");
    assert_eq!(code(&amrdual(&["validate", "--input", p(&missing)])), 2);
}

#[test]
fn validate_reports_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let overlap = dir.path().join("o.txt");
    std::fs::write(&overlap, "0 0 0 1 1.0\n0 0 0 0 2.0\n").unwrap();
    let out = amrdual(&["validate", "--input", p(&overlap)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));

    let obj = dir.path().join("o.obj");
    let out = amrdual(&[
        "extract",
        "--input",
        p(&overlap),
        "--iso",
        "0",
        "--output",
        p(&obj),
        "--validate",
    ]);
    assert_eq!(code(&out), 2);
    assert!(!obj.exists());

    let good = synth_sphere(dir.path(), "g.amr");
    let out = amrdual(&["validate", "--input", p(&good)]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 1728 cells"));
}

#[test]
fn dual_listing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("b.txt");
    std::fs::write(
        &input,
        "0 0 0 0 0\n1 0 0 0 1\n0 1 0 0 2\n1 1 0 0 3\n0 0 1 0 4\n1 0 1 0 5\n0 1 1 0 6\n1 1 1 0 7\n",
    )
    .unwrap();
    let out_path = dir.path().join("d.txt");
    assert_eq!(
        code(&amrdual(&[
            "dual",
            "--input",
            p(&input),
            "--output",
            p(&out_path)
        ])),
        0
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "duals 1");
    assert_eq!(
        rows[1],
        "0.5 0.5 0.5 1.5 0.5 0.5 0.5 1.5 0.5 1.5 1.5 0.5 0.5 0.5 1.5 1.5 0.5 1.5 0.5 1.5 1.5 1.5 1.5 1.5 0.0 1.0 2.0 3.0 4.0 5.0 6.0 7.0"
    );
}

#[test]
fn synth_octree_and_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let oct = dir.path().join("o.amr");
    let out = amrdual(&[
        "synth",
        "octree",
        "--depth",
        "4",
        "--threshold",
        "3",
        "--field",
        "sphere:5.3,6.1,7.7,3.5",
        "--output",
        p(&oct),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&amrdual(&["validate", "--input", p(&oct)])), 0);

    let blocks = dir.path().join("b.txt");
    let out = amrdual(&[
        "synth",
        "blocks",
        "--block",
        "0,0,0:4,4,4:0",
        "--block",
        "4,0,0:1,1,1:2",
        "--hole",
        "1,1,1:2,2,2",
        "--field",
        "linear:1,0,0,-3",
        "--output",
        p(&blocks),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&blocks).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 64);

    let out = amrdual(&[
        "synth",
        "blocks",
        "--block",
        "0,0,0:4,4,4:0",
        "--block",
        "2,0,0:1,1,1:1",
        "--field",
        "linear:1,0,0,0",
        "--output",
        p(&blocks),
    ]);
    assert_eq!(code(&out), 1);
}
