use std::path::Path;
use std::process::{Command, Output};

use qsl::cli::{Cli, RunManifest};

fn qsl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QSL_THREADS")
        .output()
        .unwrap()
}

fn stdout_row(out: &Output) -> Vec<f64> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let row = text.lines().find(|l| !l.starts_with('#')).expect("a data row");
    row.split(',').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn tmin_prints_area_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsl(&["two-level", "tmin", "--eps", "0.002"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let row = stdout_row(&out);
    assert!((row[1] - 7.5999).abs() < 1e-3);

    let out = qsl(&["two-level", "tmin", "--eps", "1.0"], dir.path());
    assert_eq!(stdout_row(&out)[1], 0.0);
}

#[test]
fn energy_and_unit_rescaling() {
    let dir = tempfile::tempdir().unwrap();
    let base = stdout_row(&qsl(
        &["two-level", "energy", "--T", "10", "--eps", "0.002"],
        dir.path(),
    ));
    assert!((base[4] - 5.7758).abs() < 1e-4, "{base:?}");

    // same physical duration with W = 2: field A/T unchanged, energy scales with hbar only
    let scaled = stdout_row(&qsl(
        &[
            "two-level",
            "energy",
            "--T",
            "10",
            "--eps",
            "0.002",
            "--omega0",
            "2",
            "--hbar",
            "3",
        ],
        dir.path(),
    ));
    assert!((scaled[3] - base[3]).abs() < 1e-14);
    assert!((scaled[4] - 3.0 * base[4]).abs() < 1e-12);

    let t1 = stdout_row(&qsl(&["two-level", "tmin", "--eps", "0.01"], dir.path()));
    let t2 = stdout_row(&qsl(
        &["two-level", "tmin", "--eps", "0.01", "--omega0", "4"],
        dir.path(),
    ));
    assert_eq!(t1[1], t2[1]);
    assert!((t2[2] - t1[2] / 4.0).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| qsl(args, dir.path()).status.code();
    assert_eq!(code(&["two-level", "tmin"]), Some(2));
    assert_eq!(code(&["two-level", "tmin", "--eps", "x"]), Some(2));
    assert_eq!(code(&["two-level", "tmin", "--eps", "0.1", "--format", "xml"]), Some(2));
    assert_eq!(code(&["two-level", "tmin", "--eps", "0.1", "--omega0", "-1"]), Some(2));
    assert_eq!(
        code(&["two-level", "simulate", "--eps", "0.1", "--kerr", "1,2"]),
        Some(2)
    );
    assert_eq!(code(&["three-level", "optimize", "--eps", "1.5"]), Some(2));
    assert_eq!(code(&["three-level", "areacurve", "--n", "3"]), Some(2));
    assert_eq!(code(&["two-level", "tmin", "--eps", "0"]), Some(3));
    assert_eq!(code(&["two-level", "tmin", "--eps", "-0.5"]), Some(3));
    assert_eq!(code(&["two-level", "energy", "--T", "-1", "--eps", "0.1"]), Some(3));
    assert_eq!(
        code(&["three-level", "optimize", "--eps", "0.002", "--horizon", "1"]),
        Some(5)
    );
    assert_eq!(
        code(&[
            "three-level",
            "landscape",
            "--eps",
            "0.002",
            "--range",
            "1,2",
            "--res",
            "2",
            "--horizon",
            "1"
        ]),
        Some(5)
    );
    assert_eq!(code(&["iso", "check", "--eps", "0.002"]), Some(0));
    assert_eq!(code(&["iso", "check", "--eps", "0.002", "--corrupt-mapping"]), Some(6));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qsl"))
            .args([
                "three-level",
                "landscape",
                "--eps",
                "0.005",
                "--range",
                "0,2",
                "--res",
                "6",
                "--out",
            ])
            .arg(dir.path())
            .env("QSL_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("two").status.code(), Some(2));
    let one = run("1");
    assert_eq!(one.status.code(), Some(0));
    let body_one = std::fs::read(dir.path().join("three_level_landscape.csv")).unwrap();
    assert_eq!(run("0").status.code(), Some(0));
    let body_auto = std::fs::read(dir.path().join("three_level_landscape.csv")).unwrap();
    assert_eq!(body_one, body_auto);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let out = qsl(
        &[
            "three-level",
            "optimize",
            "--eps",
            "0.01",
            "--lphi",
            "1.85",
            "--guess",
            "0.8",
        ],
        first.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let manifest: RunManifest = serde_json::from_str(
        &std::fs::read_to_string(first.path().join("three_level_optimize.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest.command, "three-level optimize");
    assert_eq!(manifest.outputs, vec!["three_level_optimum.csv".to_string()]);

    // parameters round-trip through the manifest
    let reparsed: Cli = serde_json::from_value(serde_json::to_value(&manifest.parameters).unwrap()).unwrap();
    assert_eq!(reparsed, manifest.parameters);

    let second = tempfile::tempdir().unwrap();
    let mut argv: Vec<String> = manifest.argv[1..].to_vec();
    let at = argv.iter().position(|a| a == "--out").unwrap();
    argv[at + 1] = second.path().display().to_string();
    let status = Command::new(env!("CARGO_BIN_EXE_qsl")).args(&argv).status().unwrap();
    assert!(status.success());
    let a = std::fs::read(first.path().join("three_level_optimum.csv")).unwrap();
    let b = std::fs::read(second.path().join("three_level_optimum.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1);
    assert_eq!(
        text.lines().next().unwrap(),
        "# t,phi,theta,l_phi,l_theta,omega_p,omega_s,p1,p2,p3,ansatz"
    );
    // every value carries 17 significant digits
    let first_row = text.lines().nth(1).unwrap();
    for cell in first_row.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
    }
}

#[test]
fn json_mirror_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["two-level", "simulate", "--eps", "0.05", "--kerr", "0.5,-0.25,1"];
    assert!(qsl(&args, dir.path()).status.success());
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    assert!(qsl(&json_args, dir.path()).status.success());

    let csv = std::fs::read_to_string(dir.path().join("two_level_simulate.csv")).unwrap();
    let json: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("two_level_simulate.json")).unwrap()).unwrap();
    let header: Vec<&str> = csv
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("# ")
        .split(',')
        .collect();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), json.len());
    for (row, obj) in rows.iter().zip(&json) {
        for (name, cell) in header.iter().zip(row.split(',')) {
            assert_eq!(obj[*name].as_f64().unwrap(), cell.parse::<f64>().unwrap());
        }
    }
    assert!(dir.path().join("two_level_simulate.manifest.json").exists());
    // no temporary files left behind
    let leftovers = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn areacurve_and_areadiv_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsl(
        &[
            "three-level",
            "areacurve",
            "--eps-min",
            "0.01",
            "--eps-max",
            "0.1",
            "--n",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let curve = std::fs::read_to_string(dir.path().join("three_level_areacurve.csv")).unwrap();
    let areas: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(areas.len(), 5);
    assert!(areas.windows(2).all(|w| w[0] > w[1]), "{areas:?}");
    assert!(dir.path().join("three_level_areafit.csv").exists());

    let out = qsl(&["iso", "areadiv", "--eps-list", "0.1,0.01,0.001"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let div = std::fs::read_to_string(dir.path().join("iso_areadiv.csv")).unwrap();
    let pump: Vec<f64> = div
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(pump[0] > pump[1] && pump[1] > pump[2], "{pump:?}");
}
