//! End-to-end tests of the `twofold` binary: golden outputs and exit codes.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SADDLE: [&str; 8] = ["--cx", "-1", "--cy", "1", "--cxy", "2", "--cyx", "-2"];
const PERIODIC: [&str; 8] = ["--cx", "-1", "--cy", "1", "--cxy", "-1", "--cyx", "1"];
const PSEUDO: [&str; 8] = ["--cx", "-1", "--cy", "1", "--cxy", "1", "--cyx", "-1"];
const RESONANT: [&str; 8] = ["--cx", "-1", "--cy", "2", "--cxy", "-2", "--cyx", "1"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twofold"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
    assert!(expected == actual, "output differs from golden {name}");
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn classify_golden() {
    check_golden(
        "classify_saddle.json",
        &stdout_of(&with(&["classify"], &SADDLE)),
    );
    check_golden(
        "classify_saddle.txt",
        &stdout_of(&with(&with(&["classify"], &SADDLE), &["--format", "text"])),
    );
    check_golden(
        "classify_resonant.json",
        &stdout_of(&with(&["classify"], &RESONANT)),
    );
}

#[test]
fn classify_reports_expected_facts() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout_of(&with(&["classify"], &SADDLE))).unwrap();
    assert_eq!(v["schema_version"], "1");
    let r = &v["result"];
    assert_eq!(r["system"]["class"], "Elliptic");
    assert_eq!(r["system"]["simple"], true);
    assert_eq!(r["system"]["reversible"], true);
    assert_eq!(r["map"]["kind"], "Saddle");

    let v: serde_json::Value =
        serde_json::from_str(&stdout_of(&with(&["classify"], &RESONANT))).unwrap();
    assert_eq!(v["result"]["system"]["resonant"], true);
    assert_eq!(v["result"]["system"]["sliding_degenerate"], true);
}

#[test]
fn coefficients_round_trip_through_reports() {
    let args = [
        "classify",
        "--cx",
        "-0.1",
        "--cy",
        "0.30000000000000004",
        "--cxy",
        "1e-7",
        "--cyx",
        "-2.5",
    ];
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&args)).unwrap();
    let c = &v["input"]["coefficients"];
    assert_eq!(c["c_x"].as_f64().unwrap(), -0.1);
    assert_eq!(c["c_y"].as_f64().unwrap(), 0.30000000000000004);
    assert_eq!(c["c_xy"].as_f64().unwrap(), 1e-7);
    assert_eq!(c["c_yx"].as_f64().unwrap(), -2.5);
}

#[test]
fn return_map_golden() {
    let out = stdout_of(&with(
        &with(&["return-map"], &SADDLE),
        &["--x", "1", "--y", "0", "--n", "1"],
    ));
    assert_eq!(out.lines().nth(2), Some("1,15,-4,2,-8,false"));
    check_golden("return_map_saddle.csv", &out);

    let out = stdout_of(&with(
        &with(&["return-map"], &SADDLE),
        &["--x", "0", "--y", "0", "--n", "3"],
    ));
    assert!(out.lines().skip(2).all(|l| l.ends_with(",0,0,0,0,true")));
    check_golden("return_map_origin.csv", &out);

    let out = stdout_of(&with(
        &with(&["return-map"], &PERIODIC),
        &["--x", "1", "--y", "1", "--n", "5"],
    ));
    assert_eq!(out.lines().count(), 7);
    assert!(out.lines().skip(1).all(|l| l.contains(",1,1,")));
    check_golden("return_map_periodic.csv", &out);
}

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn orbits_golden() {
    let out = stdout_of(&with(&["orbits"], &PERIODIC));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        floats(&v["result"]["families"]["periodic_alphas"]),
        [1.0] as [f64; 1]
    );
    check_golden("orbits_periodic.json", &out);

    let v: serde_json::Value =
        serde_json::from_str(&stdout_of(&with(&["orbits"], &SADDLE))).unwrap();
    assert_eq!(
        floats(&v["result"]["families"]["periodic_alphas"]),
        [] as [f64; 0]
    );
    assert_eq!(
        floats(&v["result"]["families"]["pseudo_alphas"]),
        [] as [f64; 0]
    );

    let v: serde_json::Value =
        serde_json::from_str(&stdout_of(&with(&["orbits"], &PSEUDO))).unwrap();
    assert_eq!(
        floats(&v["result"]["families"]["pseudo_alphas"]),
        [-1.0] as [f64; 1]
    );

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("orbit.csv");
    let out = stdout_of(&with(
        &with(&["orbits"], &RESONANT),
        &[
            "--anchor-x",
            "1",
            "--anchor-y",
            "2",
            "--orbit-out",
            csv_path.to_str().unwrap(),
        ],
    ));
    check_golden("orbits_resonant.json", &out);
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("seg,t,x,y,z\n"));
    assert!(csv.lines().any(|l| l.starts_with("1,")));
    check_golden("orbit_resonant.csv", &csv);
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let events_path = dir.path().join("events.csv");
    let traj = stdout_of(&with(
        &with(&["simulate"], &SADDLE),
        &[
            "--x0",
            "1",
            "--y0",
            "-5",
            "--z0",
            "1e-10",
            "--tmax",
            "5",
            "--events-out",
            events_path.to_str().unwrap(),
        ],
    ));
    assert!(traj.starts_with("t,x,y,z,mode\n"));
    let events = fs::read_to_string(&events_path).unwrap();
    check_golden("simulate_events.csv", &events);
    let kinds: Vec<&str> = events
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(kinds, ["Crossing", "SlideEntry"]);

    let traj = stdout_of(&with(
        &with(&["simulate"], &SADDLE),
        &["--x0", "1", "--y0", "0", "--tmax", "0"],
    ));
    assert_eq!(traj, "t,x,y,z,mode\n0,1,0,0,AboveX\n");

    let traj = stdout_of(&with(
        &with(&["simulate"], &RESONANT),
        &["--x0", "-0.5", "--y0", "0.5", "--tmax", "1"],
    ));
    assert!(traj
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",-0.5,0.5,0,Slide")));
}

#[test]
fn simulate_reads_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "c_x = -1\nc_y = 1\nc_xy = 2\nc_yx = -2\n[perturb_x]\n\"2,0,0\" = [0.0001, 0.0, 0.0]\n",
    )
    .unwrap();
    let traj = stdout_of(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--x0",
        "1",
        "--y0",
        "0",
        "--tmax",
        "0.5",
    ]);
    assert!(traj.lines().count() > 400);

    fs::write(
        &spec,
        "c_x = -1\nc_y = 1\nc_xy = 2\nc_yx = -2\n[perturb_x]\n\"1,0,0\" = [1.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--x0",
        "1",
        "--y0",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_golden() {
    let out = stdout_of(&with(&["verify"], &SADDLE));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["result"]["max_deviation"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["input"]["seed"], 42);
    check_golden("verify_saddle.json", &out);

    let out = run(&with(&with(&["verify"], &SADDLE), &["--samples", "1"]));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn plot_golden() {
    let svg = stdout_of(&with(&with(&["plot"], &SADDLE), &["--what", "regions"]));
    for region in ["SwR+", "SwR-", "SlR", "EscR"] {
        assert!(svg.contains(&format!("data-region=\"{region}\"")));
    }
    check_golden("plot_regions.svg", &svg);

    let svg = stdout_of(&with(
        &with(&["plot"], &SADDLE),
        &["--what", "map", "--x", "1", "--y", "0", "--n", "3"],
    ));
    assert_eq!(svg.matches("<circle").count(), 4);
    check_golden("plot_map.svg", &svg);

    let svg = stdout_of(&with(
        &with(&["plot"], &PERIODIC),
        &["--what", "orbit", "--anchor-x", "1", "--anchor-y", "1"],
    ));
    assert!(svg.contains("<polygon id=\"orbit-0\""));
    check_golden("plot_orbit.svg", &svg);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(
        code(&["classify", "--cx", "0", "--cy", "1", "--cxy", "2", "--cyx", "-2"]),
        Some(2)
    );
    let out = run(&[
        "classify", "--cx", "0", "--cy", "1", "--cxy", "2", "--cyx", "-2",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("c_x"));
    assert_eq!(code(&["classify", "--cx", "-1"]), Some(2));
    assert_eq!(code(&["classify", "--cx", "abc"]), Some(2));
    assert_eq!(
        code(&with(
            &with(&["return-map"], &SADDLE),
            &["--x", "1", "--y", "0", "--n", "0"]
        )),
        Some(2)
    );
    assert_eq!(
        code(&with(
            &with(&["orbits"], &SADDLE),
            &["--anchor-x", "1", "--anchor-y", "-5"]
        )),
        Some(3)
    );
    assert_eq!(
        code(&[
            "simulate", "--cx", "1", "--cy", "1", "--cxy", "0", "--cyx", "0", "--x0", "-1", "--y0",
            "1", "--z0", "0.01", "--step", "3",
        ]),
        Some(4)
    );
    assert_eq!(
        code(&with(
            &with(&["simulate"], &PERIODIC),
            &[
                "--x0",
                "1",
                "--y0",
                "1",
                "--tmax",
                "100",
                "--max-events",
                "5"
            ]
        )),
        Some(4)
    );
    assert_eq!(
        code(&with(&with(&["verify"], &SADDLE), &["--event-tol", "1e-2"])),
        Some(5)
    );
    assert_eq!(code(&with(&["verify"], &RESONANT)), Some(2));
    assert_eq!(
        code(&with(&with(&["plot"], &SADDLE), &["--what", "orbit"])),
        Some(2)
    );
}

#[test]
fn outputs_are_deterministic() {
    let cases: Vec<Vec<&str>> = vec![
        with(&["classify"], &SADDLE),
        with(&["verify"], &SADDLE),
        with(&with(&["plot"], &SADDLE), &["--what", "map"]),
        with(
            &with(&["simulate"], &SADDLE),
            &["--x0", "0.3", "--y0", "-0.9", "--z0", "0.2", "--tmax", "3"],
        ),
    ];
    for args in cases {
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}
