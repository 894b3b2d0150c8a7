use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn metaforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metaforge")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_metaforge"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn puml2ecore_minimal_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.puml");
    let output = dir.path().join("v.ecore");
    fs::write(&input, "@startuml\nclass Vehicle\n@enduml\n").unwrap();
    let o = metaforge(&["puml2ecore", s(&input), s(&output)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let xml = fs::read_to_string(&output).unwrap();
    assert_eq!(xml.matches("ecore:EClass").count(), 1);
    assert!(xml.contains("name=\"Vehicle\""));
}

#[test]
fn strict_mode_rejects_notes_with_location() {
    let diagram = "@startuml\nclass Vehicle\nnote left of Vehicle : the car\n@enduml\n";
    let o = with_stdin(&["puml2ecore", "--strict", "-", "-"], diagram);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("-:3:1: error: unsupported construct `note`"), "{}", stderr(&o));

    let lenient = with_stdin(&["puml2ecore", "-", "-"], diagram);
    assert_eq!(code(&lenient), 0);
    assert!(stderr(&lenient).contains("-:3:1: warning:"));
    assert!(stdout(&lenient).contains("name=\"Vehicle\""));
}

#[test]
fn sensors_diagram_converts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sensors.ecore");
    let o = metaforge(&["puml2ecore", s(&fixtures().join("scoring/sensors/candidate.puml")), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let xml = fs::read_to_string(&out).unwrap();
    // Six sensor classes on top of Vehicle and Component.
    assert_eq!(xml.matches("ecore:EClass").count(), 8);
    for class in ["Sensor", "Camera", "Radar", "Lidar", "UltrasonicSensor", "GnssReceiver"] {
        assert!(xml.contains(&format!("name=\"{class}\"")), "{class}");
    }
}

#[test]
fn ecore2puml_seed_and_errors() {
    let seed = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<ecore:EPackage xmi:version=\"2.0\" xmlns:xmi=\"http://www.omg.org/XMI\" xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" xmlns:ecore=\"http://www.eclipse.org/emf/2002/Ecore\" name=\"vehicle\" nsURI=\"http://www.example.org/vehicle\" nsPrefix=\"vehicle\">\n  <eClassifiers xsi:type=\"ecore:EClass\" name=\"Vehicle\"/>\n</ecore:EPackage>\n";
    let o = with_stdin(&["ecore2puml", "-", "-"], seed);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "@startuml\nclass Vehicle\n@enduml\n");

    let bad = with_stdin(&["ecore2puml", "-", "-"], "<ecore:EPackage name=\"x\"");
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("malformed XML"), "{}", stderr(&bad));

    let missing = metaforge(&["ecore2puml", "/nonexistent/in.ecore", "-"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("/nonexistent/in.ecore"));

    let not_ecore = with_stdin(&["ecore2puml", "-", "-"], "<html/>");
    assert_eq!(code(&not_ecore), 1);
}

#[test]
fn score_rows_and_identity() {
    let row = fixtures().join("scoring/power");
    let o = metaforge(&[
        "score",
        s(&row.join("candidate.puml")),
        s(&row.join("reference.ecore")),
        "--context",
        s(&row.join("context.ecore")),
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cell = |k: &str| format!("{}/{}", report[k]["matched"], report[k]["total"]);
    assert_eq!(
        [cell("classes"), cell("attributes"), cell("compositions"), cell("subclassRelations")],
        ["1/1", "3/6", "1/1", "0/1"]
    );

    let reference = fixtures().join("scenario/expected.ecore");
    let same = metaforge(&["score", s(&reference), s(&reference)]);
    assert_eq!(code(&same), 0);
    let text = stdout(&same);
    for line in text.lines().skip(1).take(4) {
        let cell = line.split_whitespace().last().unwrap();
        let (m, t) = cell.split_once('/').unwrap();
        assert_eq!(m, t, "{line}");
    }
    assert!(!text.contains("missing") && !text.contains("extra"));
}

#[test]
fn validate_reports_violations() {
    let ok = metaforge(&["validate", s(&fixtures().join("scenario/expected.ecore"))]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("valid (12 classes"), "{}", stdout(&ok));

    let cyclic = "@startuml\nclass A\nclass B\nA <|-- B\nB <|-- A\n@enduml\n";
    let o = with_stdin(&["validate", "-"], cyclic);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("[inheritance-cycle]"), "{}", stderr(&o));
}

fn copy_scenario(to: &Path) {
    let from = fixtures().join("scenario");
    for entry in fs::read_dir(&from).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            fs::copy(&path, to.join(path.file_name().unwrap())).unwrap();
        }
    }
}

#[test]
fn run_scenario_matches_and_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("final.ecore");
    let o = metaforge(&["run-scenario", s(&fixtures().join("scenario")), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("final metamodel matches expected.ecore"));
    assert_eq!(fs::read_to_string(&out).unwrap(), fs::read_to_string(fixtures().join("scenario/expected.ecore")).unwrap());

    let puml_first = metaforge(&["run-scenario", s(&fixtures().join("scenario")), "--puml-first"]);
    // PlantUML-only prompts were recorded too, so this track replays as well.
    assert_eq!(code(&puml_first), 0, "{}{}", stdout(&puml_first), stderr(&puml_first));
}

#[test]
fn run_scenario_missing_fixture_names_the_hash() {
    let empty = tempfile::tempdir().unwrap();
    let o = metaforge(&["run-scenario", s(&fixtures().join("scenario")), "--fixtures", s(empty.path())]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("01-update-sensors.txt"), "{err}");
    let hash = err.split("no fixture for prompt ").nth(1).expect("names the prompt hash");
    assert!(hash.trim().len() == 64 && hash.trim().chars().all(|c| c.is_ascii_hexdigit()), "{err}");
}

#[test]
fn run_scenario_tampered_expectation() {
    let dir = tempfile::tempdir().unwrap();
    copy_scenario(dir.path());
    let expected = dir.path().join("expected.ecore");
    let text = fs::read_to_string(&expected).unwrap().replace("name=\"clock\"", "name=\"clockRate\"");
    fs::write(&expected, text).unwrap();
    let o = metaforge(&[
        "run-scenario",
        s(dir.path()),
        "--fixtures",
        s(&fixtures().join("scenario/llm")),
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("differs from expected.ecore"), "{out}");
    assert!(out.contains("extra attributes: HardwareAccelerator.clock"), "{out}");
    assert!(out.contains("missing attributes: HardwareAccelerator.clockRate"), "{out}");
}

#[test]
fn run_scenario_live_reaches_the_configured_endpoint() {
    let o = Command::new(env!("CARGO_BIN_EXE_metaforge"))
        .args(["run-scenario", s(&fixtures().join("scenario")), "--live"])
        .env("MF_LLM_BASE_URL", "http://127.0.0.1:9")
        .env_remove("MF_FIXTURE_DIR")
        .env_remove("MF_LLM_MODE")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("transport error"), "{err}");
}
