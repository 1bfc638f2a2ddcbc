use std::path::Path;
use std::process::{Command, Output};

use pcmkit::dataset::{read_samples, write_samples};
use pcmkit::ingest::{parse_log_str, write_log, FlightLog, Schema};
use pcmkit::model_io::ModelDocument;
use pcmkit_core::synth::{fleet_samples, generate_fleet, raw_channels, SynthConfig};
use pcmkit_core::{builtin_aircraft, AircraftKind};

fn pcmkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcmkit"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = pcmkit(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn small_fleet() -> SynthConfig {
    SynthConfig {
        n_flights: 4,
        seed: 3,
        ..SynthConfig::default()
    }
}

#[test]
fn log_text_round_trips() {
    let fleet = generate_fleet(&small_fleet()).unwrap();
    let f = &fleet[0];
    let log = FlightLog {
        schema: Schema::Matrice100,
        flight_id: f.flight_id.clone(),
        aircraft: builtin_aircraft().into_iter().find(|a| a.kind == AircraftKind::Matrice100).unwrap(),
        payload_g: 0.0,
        channels: raw_channels(f).unwrap(),
    };
    let text = write_log(&log);
    let back = parse_log_str(&text, Path::new("x.log"), Some(Schema::Matrice100)).unwrap();
    assert_eq!(back, log);
    assert_eq!(write_log(&back), text);
}

#[test]
fn dataset_csv_round_trips() {
    let samples = fleet_samples(&generate_fleet(&small_fleet()).unwrap());
    let mut buf = Vec::new();
    write_samples(&mut buf, &samples).unwrap();
    assert_eq!(read_samples(&buf, Path::new("d.csv")).unwrap(), samples);
}

#[test]
fn pipeline_produces_loadable_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--seed", "5", "synth", "--out", "s", "--flights", "6", "--logs"]);
    ok(d, &["preprocess", "s/logs", "--out", "p", "--schema", "m100"]);
    ok(
        d,
        &["train", "--data", "p/dataset.csv", "--out", "m", "--model", "GBRT", "--param", "n_trees=100"],
    );
    for f in ["model.json", "train.csv", "test.csv", "report.json", "report.csv", "manifest.json"] {
        assert!(d.join("m").join(f).is_file(), "missing {f}");
    }
    let doc = ModelDocument::load(&d.join("m/model.json")).unwrap();
    assert_eq!(doc.model.name(), "GBRT");
    assert!(!doc.training_flights.is_empty());

    ok(d, &["predict", "--model", "m/model.json", "--data", "m/test.csv", "--out", "pr"]);
    let preds = std::fs::read_to_string(d.join("pr/predictions.csv")).unwrap();
    let test = std::fs::read_to_string(d.join("m/test.csv")).unwrap();
    assert_eq!(preds.lines().count(), test.lines().count());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("m/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "train");
    let outputs = manifest["outputs"].as_array().unwrap();
    let model_digest = outputs.iter().find(|o| o["path"] == "model.json").unwrap();
    assert_eq!(
        model_digest["sha256"],
        pcmkit::manifest::sha256_file(&d.join("m/model.json")).unwrap()
    );
}

#[test]
fn occupied_output_directory_is_kept() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--out", "s", "--flights", "2"]);
    let first = std::fs::read(d.join("s/dataset.csv")).unwrap();
    ok(d, &["--seed", "1", "synth", "--out", "s", "--flights", "2"]);
    assert_eq!(std::fs::read(d.join("s/dataset.csv")).unwrap(), first);
    let siblings: Vec<_> = std::fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("s.run-"))
        .collect();
    assert_eq!(siblings.len(), 1);
    ok(d, &["--force", "--seed", "1", "synth", "--out", "s", "--flights", "2"]);
    assert_ne!(std::fs::read(d.join("s/dataset.csv")).unwrap(), first);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(pcmkit(d, &["--help"]).status.code(), Some(0));
    assert_eq!(pcmkit(d, &["fly"]).status.code(), Some(1));
    assert_eq!(pcmkit(d, &["train", "--data", "nope.csv", "--out", "o"]).status.code(), Some(2));
    assert!(!d.join("o").exists());

    ok(d, &["synth", "--out", "s", "--flights", "3"]);
    let bad = pcmkit(
        d,
        &["train", "--data", "s/dataset.csv", "--out", "o", "--model", "RF", "--param", "max_depth=0"],
    );
    assert_eq!(bad.status.code(), Some(1));
    let bad = pcmkit(d, &["train", "--data", "s/dataset.csv", "--out", "o", "--model", "XGB"]);
    assert_eq!(bad.status.code(), Some(1));

    std::fs::write(d.join("broken.log"), "# pcmkit-log 1\n# schema = m100\n[battery rate=1]\nt,voltage,current\n0,1,1\n").unwrap();
    let bad = pcmkit(d, &["preprocess", "broken.log", "--out", "p"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("broken.log"));
}

#[test]
fn decreasing_timestamps_name_the_line() {
    let text = "# pcmkit-log 1\n# schema = m100\n[battery rate=1]\nt,voltage,current\n0,20,5\n2,20,5\n1,20,5\n";
    let err = parse_log_str(text, Path::new("f.log"), None).unwrap_err().to_string();
    assert!(err.contains("f.log") && err.contains('7'), "{err}");
}
