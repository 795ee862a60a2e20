mod common;

use std::path::Path;

use arcad_core::analysis::response_metrics;
use arcad_core::exec::Mode;
use arcad_core::scenario::{
    channel_catalogue, csv_string, export_csv, load_scenario, parse_scenario, read_csv, render_plots, run_batch,
    run_scenario,
};
use arcad_core::Error;
use common::*;
use proptest::prelude::*;

fn airframes_dir() -> std::path::PathBuf {
    fixtures().join("airframes")
}

fn minimal(extra: &str) -> String {
    format!("airframe = \"hexarotor_tilted.toml\"\nduration = 0.05\n{extra}")
}

#[test]
fn shipped_scenarios_parse() {
    for name in ["quad_hover", "hex_attitude_step", "hex_wall_5N", "hex_write_AIR"] {
        let spec = load_scenario(&scenario_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(spec.controller.is_some(), "{name}");
    }
}

#[test]
fn wall_fixture_structure() {
    let spec = load_scenario(&scenario_path("hex_wall_5N")).unwrap();
    assert_eq!(spec.environment.obstacles.len(), 1);
    assert!(spec.waypoints.iter().any(|w| w.wrench.is_some()));
    let air = load_scenario(&scenario_path("hex_write_AIR")).unwrap();
    assert!(air.waypoints.iter().filter(|w| w.wrench.is_some()).count() > 20);
}

#[test]
fn minimal_scenario_reports_each_default_once() {
    let spec = parse_scenario(&minimal(""), &airframes_dir()).unwrap();
    assert_eq!(spec.dt, 0.001);
    assert_eq!(spec.environment.gravity, 9.81);
    assert!(spec.environment.obstacles.is_empty());
    let keys: Vec<&str> = spec.provenance.iter().map(|p| p.split(" = ").next().unwrap()).collect();
    for expected in [
        "dt",
        "seed",
        "environment.gravity",
        "obstacles",
        "controller",
        "initial.position",
        "log",
    ] {
        assert_eq!(
            keys.iter().filter(|k| **k == expected).count(),
            1,
            "{expected} in {keys:?}"
        );
    }
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), keys.len());
}

#[test]
fn explicit_values_are_not_reported_as_defaults() {
    let spec = parse_scenario(&minimal("dt = 0.002\n[environment]\ngravity = 3.7\n"), &airframes_dir()).unwrap();
    assert!(!spec
        .provenance
        .iter()
        .any(|p| p.starts_with("dt") || p.starts_with("environment.gravity")));
}

#[test]
fn negative_tolerance_is_a_validation_error() {
    let text = minimal("[[waypoint]]\nposition = [0.0, 0.0, -1.0]\ntolerance = -0.1\n");
    match parse_scenario(&text, &airframes_dir()) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("tolerance")), "{v:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn scenario_errors_carry_locations() {
    let err = parse_scenario(&minimal("[initial]\nposition = [1.0, 2.0]\n"), &airframes_dir()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 4") && msg.contains("initial.position"), "{msg}");
    let err = parse_scenario(&minimal("log = [\"state.xy\"]\n"), &airframes_dir()).unwrap_err();
    assert!(err.to_string().contains("state.x"), "{err}");
    let err = parse_scenario(
        &minimal("[[obstacle]]\nkind = \"cone\"\nstiffness = 1.0\n"),
        &airframes_dir(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("cone"), "{err}");
}

#[test]
fn zero_duration_logs_only_the_initial_sample() {
    let text = "airframe = \"hexarotor_tilted.toml\"\nduration = 0.0\n";
    let spec = parse_scenario(text, &airframes_dir()).unwrap();
    let log = run_scenario(&spec).unwrap();
    assert_eq!(log.len(), 1);
    assert_eq!(log.names().len(), channel_catalogue(6).len());
}

#[test]
fn open_loop_hover_is_quiet() {
    let spec = parse_scenario(&minimal("[initial]\nposition = [0.0, 0.0, -1.0]\n"), &airframes_dir()).unwrap();
    let log = run_scenario(&spec).unwrap();
    assert_eq!(log.len(), 51);
    let z = log.require("state.z").unwrap();
    assert!(z.iter().all(|v| (v + 1.0).abs() < 1e-9));
}

#[test]
fn logs_are_complete_and_finite() {
    let mut spec = load_scenario(&scenario_path("hex_wall_5N")).unwrap();
    spec.duration = 4.0;
    spec.log_channels = channel_catalogue(6);
    let log = run_scenario(&spec).unwrap();
    for name in &spec.log_channels {
        let ch = log.require(name).unwrap();
        assert_eq!(ch.len(), log.len());
        assert!(ch.iter().all(|v| v.is_finite()), "{name}");
    }
}

#[test]
fn quad_hover_holds_position() {
    let spec = load_scenario(&scenario_path("quad_hover")).unwrap();
    let log = run_scenario(&spec).unwrap();
    let last = log.len() - 1;
    let err = ["x", "y", "z"]
        .iter()
        .map(|a| {
            log.require(&format!("state.{a}")).unwrap()[last] - log.require(&format!("setpoint.{a}")).unwrap()[last]
        })
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    assert!(err < 0.01, "{err}");
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let mut spec = load_scenario(&scenario_path("hex_attitude_step")).unwrap();
    spec.duration = 0.5;
    let log = run_scenario(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    export_csv(&log, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.names(), log.names());
    for ((_, a), (_, b)) in log.columns().zip(back.columns()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("t,state.x,"));
}

#[test]
fn batch_matches_individual_runs() {
    let mut specs = Vec::new();
    for name in ["quad_hover", "hex_attitude_step", "hex_wall_5N"] {
        let mut s = load_scenario(&scenario_path(name)).unwrap();
        s.duration = 1.0;
        specs.push(s);
    }
    let par = run_batch(&specs, Mode::Parallel);
    let seq = run_batch(&specs, Mode::Sequential);
    for (p, s) in par.into_iter().zip(seq) {
        assert_eq!(csv_string(&p.unwrap()), csv_string(&s.unwrap()));
    }
}

#[test]
fn three_channels_give_three_panels() {
    let mut spec = load_scenario(&scenario_path("hex_wall_5N")).unwrap();
    spec.duration = 3.0;
    let log = run_scenario(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.svg");
    render_plots(&log, &["state.x", "state.roll", "ee.fx"], &path).unwrap();
    let svg = std::fs::read_to_string(&path).unwrap();
    assert_eq!(svg.matches(r#"class="panel""#).count(), 3);
    assert!(svg.contains("stroke-dasharray"), "setpoint overlay missing");
}

#[test]
fn step_metrics_are_annotated() {
    let mut spec = load_scenario(&scenario_path("hex_attitude_step")).unwrap();
    spec.duration = 3.0;
    let log = run_scenario(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("att.svg");
    render_plots(&log, &["state.roll", "state.pitch", "state.yaw"], &path).unwrap();
    let svg = std::fs::read_to_string(&path).unwrap();
    assert_eq!(svg.matches(r#"class="panel""#).count(), 1);
    assert_eq!(svg.matches(r#"class="metrics""#).count(), 3);
}

#[test]
fn unknown_plot_channel_suggests_near_match() {
    let spec = parse_scenario(&minimal(""), &airframes_dir()).unwrap();
    let log = run_scenario(&spec).unwrap();
    let err = render_plots(&log, &["state.xy"], Path::new("/nonexistent/plot.svg")).unwrap_err();
    match err {
        Error::UnknownChannel { suggestions, .. } => assert_eq!(suggestions[0], "`state.x`"),
        other => panic!("{other}"),
    }
}

#[test]
fn divergence_is_reported_with_time() {
    // gravity large enough that the state overflows within a few hundred steps
    let text = "airframe = \"hexarotor_tilted.toml\"\nduration = 5.0\ndt = 0.01\n[environment]\ngravity = 1e308\n";
    let spec = parse_scenario(text, &airframes_dir()).unwrap();
    match run_scenario(&spec) {
        Err(Error::Divergence { time, .. }) => assert!(time > 0.0 && time <= 5.0),
        other => panic!("expected divergence, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metrics_survive_affine_maps(a in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.5]), b in -10.0f64..10.0) {
        let y = second_order(0.4, 1e-3, 30.0);
        let base = response_metrics(&y, 1e-3, 0.0, 1.0).unwrap();
        let mapped: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let m = response_metrics(&mapped, 1e-3, b, a + b).unwrap();
        let close = |x: Option<f64>, y: Option<f64>| (x.unwrap() - y.unwrap()).abs() < 1e-9;
        prop_assert!(close(m.rise_time, base.rise_time));
        prop_assert!(close(m.settling_time, base.settling_time));
        prop_assert!((m.overshoot - base.overshoot).abs() < 1e-9);
        // the error is reported in signal units, so it scales with |a|
        prop_assert!((m.steady_state_error - a.abs() * base.steady_state_error).abs() < 1e-9);
    }
}
