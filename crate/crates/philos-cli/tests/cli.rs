//! End-to-end tests of the `philos` binary: flags, files, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use philos_trust::TrustParams;

fn philos() -> Command {
    Command::new(env!("CARGO_BIN_EXE_philos"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn params_prints_published_base_and_constants() {
    let out = run(philos().arg("params"));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0.9999111696"), "{text}");
    assert!(text.contains("T*"), "{text}");
    assert!(text.contains("beta^delta"), "{text}");

    let out = run(philos().args(["params", "--months", "12"]));
    assert!(stdout(&out).contains("0.9999555838"));
}

#[test]
fn params_rejects_out_of_range_target() {
    let out = run(philos().args(["params", "--pct", "150"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("strictly between"));
}

#[test]
fn replay_writes_csv_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(philos()
        .args(["replay", "fig3", "--out-dir"])
        .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("all match"));

    let csv = read(&dir.path().join("fig3.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,b,k_minus_b,s_m,trust_calc");
    assert_eq!(lines.len(), 58);
    assert!(csv.contains(",,,,prev*beta^48 + 48(1)"));
}

#[test]
fn replay_rejects_unknown_figure() {
    let out = run(philos().args(["replay", "fig9"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_env_var_sets_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(philos()
        .args(["replay", "fig4"])
        .env("PHILOS_OUT_DIR", dir.path()));
    assert!(out.status.success());
    assert!(dir.path().join("fig4.csv").exists());
    assert!(read(&dir.path().join("fig4.csv")).contains("107,103,4,--,"));
}

#[test]
fn simulate_bundled_config_produces_three_policy_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(philos().args(["simulate", "--out-dir"]).arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for label in ["steady", "lapse", "mixed"] {
        assert!(text.contains(&format!("{label}: final trust")), "{text}");
        assert!(dir.path().join(format!("{label}_trajectory.csv")).exists());
        assert!(dir.path().join(format!("{label}_events.csv")).exists());
    }
    assert!(text.contains("misses 1"), "{text}");

    // every steady sample is a bridge: 1095 rows plus the header
    let steady = read(&dir.path().join("steady_trajectory.csv"));
    assert_eq!(steady.lines().count(), 1096);
    assert_eq!(
        steady.lines().next().unwrap(),
        "peer_id,k,day,raw_trust,fractional_trust"
    );
    let events = read(&dir.path().join("lapse_events.csv"));
    assert_eq!(
        events.lines().next().unwrap(),
        "k,event,list_id,peer_id,b,k_minus_b,s_m,trust_before,trust_after"
    );
    assert!(events.contains("missed_primary"));
}

#[test]
fn simulate_is_deterministic() {
    let config = r#"
        horizon_days = 3
        [[scenario]]
        label = "a"
        miss_at = [100]
        unmatched_steps = 10
        [[scenario.phase]]
        start_day = 0
        end_day = 3
        bridge_interval = 24
    "#;
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("plan.toml");
    fs::write(&config_path, config).unwrap();

    let mut outputs = Vec::new();
    for sub in ["one", "two"] {
        let out_dir = dir.path().join(sub);
        let out = run(philos()
            .args(["simulate", "--config"])
            .arg(&config_path)
            .arg("--out-dir")
            .arg(&out_dir));
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push((
            read(&out_dir.join("a_trajectory.csv")),
            read(&out_dir.join("a_events.csv")),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_zero_horizon_emits_header_only_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("plan.toml");
    fs::write(
        &config_path,
        r#"
        horizon_steps = 0
        [[scenario]]
        label = "idle"
        [[scenario.phase]]
        start_day = 0
        end_day = 1
        bridge_interval = 48
        "#,
    )
    .unwrap();
    let out = run(philos()
        .args(["simulate", "--config"])
        .arg(&config_path)
        .arg("--out-dir")
        .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        read(&dir.path().join("idle_trajectory.csv")),
        "peer_id,k,day,raw_trust,fractional_trust\n"
    );
}

#[test]
fn simulate_reports_config_errors_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("plan.toml");
    fs::write(&config_path, "horizon_days = 1\nhorizont_steps = 2\n").unwrap();
    let out = run(philos()
        .args(["simulate", "--config"])
        .arg(&config_path)
        .arg("--out-dir")
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("horizont_steps"));

    let out = run(philos()
        .args(["simulate", "--config"])
        .arg(dir.path().join("missing.toml")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn incentive_sweep_reports_full_agreement() {
    let out = run(philos().args(["incentive", "--random", "1000", "--seed", "7"]));
    assert!(out.status.success());
    assert!(stdout(&out).contains("1000/1000 agree, 0 counterexamples"));
}

#[test]
fn incentive_bound_matches_the_closed_form() {
    let params: TrustParams = TrustParams::reference();
    let t_star = params.equilibrium_trust().value();
    let out = run(philos()
        .args(["incentive", "--bound", "--total-trust"])
        .arg(format!("{}", 100.0 * t_star)));
    assert!(out.status.success());
    assert!(stdout(&out).trim().ends_with(": 100"), "{}", stdout(&out));

    let out = run(philos()
        .args(["incentive", "--bound", "--peers", "50", "--avg-trust"])
        .arg(format!("{}", t_star / 2.0)));
    assert!(out.status.success());
    assert!(stdout(&out).trim().ends_with(": 25"), "{}", stdout(&out));
}

#[test]
fn incentive_argument_validation() {
    let out = run(philos().args(["incentive", "--random", "0"]));
    assert_eq!(out.status.code(), Some(2));

    let out = run(philos().arg("incentive"));
    assert_eq!(out.status.code(), Some(2));

    let out = run(philos().args(["incentive", "--bound"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_battery_passes() {
    let out = run(philos().arg("verify"));
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("\nok   ").count() + text.starts_with("ok   ") as usize, 7, "{text}");
    assert!(text.contains("verified: 7 checks passed"));
    assert!(!text.contains("FAIL"));
}
