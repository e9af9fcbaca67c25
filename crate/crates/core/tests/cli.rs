use std::fs;
use std::process::Command;

use meanshift_swarm::io::read_trace;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn msswarm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_msswarm")).args(args).output().unwrap()
}

#[test]
fn precise_run_writes_trace_metrics_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("p.csv");
    let metrics = dir.path().join("p.txt");
    let goals = fixture("letter_g.goals");
    let out = msswarm(&[
        "precise",
        "--goals",
        &goals,
        "--seed",
        "3",
        "--steps",
        "40",
        "--out",
        trace.to_str().unwrap(),
        "--metrics-out",
        metrics.to_str().unwrap(),
        "--svg-every",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_trace(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(records.len(), 41 * 50);
    assert!(records.iter().all(|r| r.h.is_some() && r.q_o.is_none()));
    let summary = fs::read_to_string(&metrics).unwrap();
    assert!(summary.contains("steps = 40"));
    let svgs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 3);

    let again = msswarm(&["metrics", "--trace", trace.to_str().unwrap(), "--goals", &goals]);
    assert_eq!(again.status.code(), Some(0), "{}", String::from_utf8_lossy(&again.stderr));
    assert!(String::from_utf8_lossy(&again.stdout).contains("avg_distance"));
}

#[test]
fn coverage_and_maneuver_runs() {
    let grid = fixture("m_26.grid");
    let out = msswarm(&["coverage", "--grid", &grid, "--robots", "100", "--steps", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let block = fixture("block_26.grid");
    let traj = fixture("circle_r5_p60.csv");
    let out = msswarm(&[
        "maneuver", "--grid", &block, "--trajectory", &traj, "--robots", "20", "--informed", "2", "--steps", "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("final_frame_disagreement"));
}

#[test]
fn config_errors_exit_with_two() {
    let goals = fixture("letter_g.goals");
    let grid = fixture("m_26.grid");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.params");
    fs::write(&bad, "warp_factor = 9\n").unwrap();
    let neg = dir.path().join("neg.params");
    fs::write(&neg, "kappa1 = -1\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["precise"],
        vec!["precise", "--goals", &goals, "--robots", "7"],
        vec!["precise", "--goals", &goals, "--params", bad.to_str().unwrap()],
        vec!["precise", "--goals", &goals, "--params", neg.to_str().unwrap()],
        vec!["coverage", "--grid", &grid],
        vec!["maneuver", "--grid", &grid, "--robots", "20"],
        vec!["precise", "--goals", "/nonexistent.goals"],
    ];
    for args in cases {
        let out = msswarm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("wild.params");
    fs::write(&p, "v_max = 1e308\nkappa2 = 1e308\n").unwrap();
    let out = msswarm(&["precise", "--goals", &fixture("letter_g.goals"), "--params", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}
