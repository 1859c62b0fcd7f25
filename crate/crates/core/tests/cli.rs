use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn uavmec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavmec")).args(args).output().expect("binary runs")
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_hover_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavmec(&["solve", "--scenario", path_str(&scenario("hover.toml")), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("n_slots = 5"), "{summary}");
    let table = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "slot,x_m,y_m,tau_s_1,bits_1");
    assert_eq!(table.lines().count(), 7);
    assert!(dir.path().join("summary.toml").exists());

    let check = uavmec(&[
        "validate",
        "--scenario",
        path_str(&scenario("hover.toml")),
        "--plan",
        path_str(&dir.path().join("trajectory.csv")),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
}

#[test]
fn identical_inputs_give_identical_tables() {
    let tables: Vec<String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = uavmec(&[
                "solve",
                "--scenario",
                path_str(&scenario("golden.toml")),
                "--l-bits",
                "5e7",
                "--out",
                path_str(dir.path()),
            ]);
            assert_eq!(out.status.code(), Some(0));
            std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap()
        })
        .collect();
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavmec(&[
        "sweep",
        "--scenario",
        path_str(&scenario("travel.toml")),
        "--l-bits",
        "0,1e6,1e7",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv, String::from_utf8(out.stdout).unwrap());
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    assert!(csv.starts_with("l_bits,scheme,n_slots,t_s,achieved_bits\n0,proposed,20,20,0\n"), "{csv}");
    assert!(dir.path().join("straight_10000000").join("trajectory.csv").exists());
}

#[test]
fn baseline_compare_lists_all_schemes() {
    let out = uavmec(&["baseline-compare", "--scenario", path_str(&scenario("hover.toml"))]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    for scheme in ["proposed", "straight", "hover-fly"] {
        assert!(csv.contains(&format!("1e7,{scheme},5,5,")) || csv.contains(&format!("10000000,{scheme},5,5,")), "{csv}");
    }
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(scenario("hover.toml")).unwrap().replace("slot_s = 1.0", "slot_s = 1.0\nwind_mps = 3.0");
    std::fs::write(&bad, text).unwrap();
    let out = uavmec(&["solve", "--scenario", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("wind_mps") && err.contains("line"), "{err}");

    assert_eq!(uavmec(&["solve", "--scenario", "/nonexistent/scenario.toml"]).status.code(), Some(2));
    assert_eq!(uavmec(&["solve", "--scenario", path_str(&scenario("hover.toml")), "--scheme", "teleport"]).status.code(), Some(2));
    assert_eq!(uavmec(&["solve", "--scenario", path_str(&scenario("hover.toml")), "--l-bits=-1"]).status.code(), Some(2));
    assert_eq!(uavmec(&["solve", "--scenario", path_str(&scenario("hover.toml")), "--tol", "0"]).status.code(), Some(2));
    assert_eq!(
        uavmec(&["sweep", "--scenario", path_str(&scenario("hover.toml")), "--l-bits", "2e7,1e7"]).status.code(),
        Some(2)
    );
}

#[test]
fn solver_failures_exit_with_three() {
    // The exact visiting-order search stops at 20 GBSs.
    let base = std::fs::read_to_string(scenario("hover.toml")).unwrap();
    let extra: String = (1..=20).map(|i| format!("\n[[gbs]]\nxy_m = [{}.0, 0.0]\ncpu_ghz = 2.5\ncycles_per_bit = 1000.0\n", 10 * i)).collect();
    let text = base.replace("\n[task]", &format!("{extra}\n[task]"));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("many.toml");
    std::fs::write(&file, text).unwrap();
    let out = uavmec(&["solve", "--scenario", path_str(&file), "--scheme", "hover-fly"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
