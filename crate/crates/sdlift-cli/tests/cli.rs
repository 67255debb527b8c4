use serde_json::Value;
use std::process::{Command, Output};

fn sdlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdlift")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = sdlift(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8").trim_end().to_string()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&stdout(&full)).expect("json output")
}

#[test]
fn classical_values_print_exact_fractions() {
    assert_eq!(stdout(&["value", "sdl_magic_square", "--classical"]), "15/16");
    assert_eq!(stdout(&["value", "chsh", "--classical"]), "3/4");
    assert_eq!(stdout(&["value", "ghz_cube", "--classical"]), "7/8");
    assert_eq!(stdout(&["value", "lifted_ghz", "--classical"]), "26/27");
}

#[test]
fn quantum_values() {
    assert_eq!(stdout(&["value", "sdl_magic_square"]), "1");
    assert_eq!(stdout(&["value", "sdl_magic_star"]), "1");
    assert_eq!(stdout(&["value", "lifted_chsh"]), "8/9+1/18*sqrt2");
    assert_eq!(stdout(&["value", "lifted_ghz"]), "1");
    assert_eq!(stdout(&["value", "chsh_xor", "--behavior", "pr_box"]), "1");
    let f: f64 = stdout(&["--mode", "float", "value", "chsh_xor"]).parse().unwrap();
    assert!((f - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
}

#[test]
fn classical_guessing_is_certified() {
    let args = ["guess", "sdl_magic_square_behavior", "--x", "r3", "--y", "c2", "--adversary", "classical"];
    assert_eq!(stdout(&args), "1 (certified)");
    // Scenario labels resolve to the same input as the prefixed index.
    let by_label = ["guess", "sdl_magic_square_behavior", "--x", "3", "--y", "6", "--adversary", "classical"];
    assert_eq!(stdout(&by_label), "1 (certified)");
}

#[test]
fn ns_guessing_below_one_for_tsirelson() {
    let j = json(&["guess", "tsirelson", "--x", "0", "--y", "0", "--adversary", "ns"]);
    assert_eq!(j["value"], "3/2-1/2*sqrt2");
}

#[test]
fn theorem3_summary() {
    assert_eq!(stdout(&["verify-thm3"]), "CHSH: 3/4 = classical ✓; I3322: bound = classical ✓");
    let float = stdout(&["--mode", "float", "--tol", "1e-9", "verify-thm3"]);
    assert!(float.ends_with("I3322: bound = classical ✓"), "{float}");
}

#[test]
fn build_reports_structure() {
    assert_eq!(stdout(&["build", "sdl_magic_square"]), "16 variables, 8 constraints, parity -1");
    let j = json(&["build", "magic_square"]);
    assert_eq!(j["provenance"]["builtin"], "magic_square");
    assert_eq!(j["provenance"]["mode"], "exact");
}

#[test]
fn built_systems_reload_from_file() {
    let dir = std::env::temp_dir().join(format!("sdlift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ms.json");
    let j = json(&["build", "magic_square"]);
    std::fs::write(&path, serde_json::to_string(&j["system"]).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["build", p]), "9 variables, 6 constraints, parity -1");
    assert!(stdout(&["lift", "--protocol", "1", p]).starts_with("protocol 1: 34 variables, 7 constraints"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lifting_checks_reductions() {
    let out = stdout(&["lift", "--protocol", "1", "magic_square"]);
    assert!(out.contains("34 variables, 7 constraints, parity -1, even degrees"), "{out}");
    assert!(out.ends_with("7/7 case reductions isomorphic to the input"), "{out}");
    let j = json(&["lift", "--protocol", "3", "chsh"]);
    assert!(j["reductions"].as_array().unwrap().iter().all(|r| r["ok"] == true));
}

#[test]
fn decompositions_verify() {
    let j = json(&["decompose", "sdl_magic_star_behavior", "--x", "e2", "--y", "v1"]);
    assert_eq!(j["verified"], true);
    assert_eq!(j["max_deviation"], "0");
}

#[test]
fn json_output_is_deterministic() {
    let args = ["--format", "json", "--seed", "7", "attack", "sdl_magic_square_behavior", "--x", "r1", "--y", "c1", "--rounds", "2000"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let j: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(j["provenance"]["seed"], 7);
    assert_eq!(j["correct_guesses"], j["generation_rounds"]);
}

#[test]
fn attack_csv_transcript() {
    let args = ["--format", "csv", "--seed", "3", "attack", "sdl_magic_square_behavior", "--x", "r4", "--y", "c4", "--rounds", "500"];
    // Too few test rounds for the 4σ bands to be meaningful; only the transcript is checked.
    let out = String::from_utf8(sdlift(&args).stdout).unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# builtin=sdl_magic_square_behavior"));
    assert!(lines.count() >= 500);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["build", "nosuch"][..],
        &["guess", "pr_box", "--x", "q9", "--y", "0", "--adversary", "ns"],
        &["attack", "sdl_magic_square_behavior", "--x", "r1", "--y", "c1"],
        &["--mode", "float", "--tol", "0", "verify-thm3"],
        &["--format", "csv", "value", "chsh", "--classical"],
        &["lift", "--protocol", "4", "chsh"],
    ] {
        assert_eq!(sdlift(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_verification_exits_one() {
    // The PR box is not partially deterministic at any input.
    let out = sdlift(&["decompose", "pr_box", "--x", "0", "--y", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("separating functional"));
}
