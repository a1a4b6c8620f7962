use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use runway_odd::labeler::{DatasetManifest, OddFlag};
use runway_odd::metrics::{predictions_to_json, Detection, EvalReport};
use runway_odd::scenario::parse_scenario;

const LFBO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/lfbo_runways.json");

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_runway-odd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_label_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scen = p(dir.path(), "scen.yaml");
    ok(&["sample", "--runway-db", LFBO, "--airports", "LFBO/14R", "--seed", "3", "--out", s(&scen)]);
    let doc = fs::read_to_string(&scen).unwrap();
    assert_eq!(parse_scenario(&doc).unwrap().poses.len(), 30);
    assert!(dir.path().join("scen.yaml.run.json").exists());

    let again = p(dir.path(), "again.yaml");
    ok(&["sample", "--runway-db", LFBO, "--airports", "LFBO/14R", "--seed", "3", "--out", s(&again)]);
    assert_eq!(fs::read(&scen).unwrap(), fs::read(&again).unwrap());

    let man = p(dir.path(), "manifest.json");
    ok(&["label", "--scenario", s(&scen), "--runway-db", LFBO, "--out", s(&man)]);
    let m = DatasetManifest::from_json(&fs::read_to_string(&man).unwrap()).unwrap();
    assert_eq!(m.images.len(), 30);
    for img in &m.images {
        assert!(img
            .annotations
            .iter()
            .any(|a| a.runway == "14R" && a.odd == OddFlag::In));
    }

    let dets: Vec<Detection> = m
        .images
        .iter()
        .flat_map(|img| {
            img.annotations
                .iter()
                .map(|a| Detection::new(img.image_id.clone(), a.bbox, 0.9).unwrap())
        })
        .collect();
    let preds = p(dir.path(), "preds.json");
    fs::write(&preds, predictions_to_json(&dets)).unwrap();
    let report = p(dir.path(), "report.json");
    ok(&["eval", "--manifest", s(&man), "--predictions", s(&preds), "--out", s(&report)]);
    let r = EvalReport::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    for row in [&r.in_odd, &r.in_plus_extended, &r.e_map] {
        assert_eq!((row.map, row.map50, row.map75), (1.0, 1.0, 1.0));
    }

    let xdir = p(dir.path(), "xbar");
    let pair = format!("m1,GES,{},{}", s(&man), s(&preds));
    ok(&["eval", "--pair", &pair, "--crossbar-dir", s(&xdir), "--out", s(&p(dir.path(), "cells.json"))]);
    let csv = fs::read_to_string(xdir.join("crossbar_e_map.csv")).unwrap();
    assert_eq!(csv, "model,GES\nm1,1\n");
}

#[test]
fn sample_rejects_unknown_airport() {
    let out = bin(&["sample", "--runway-db", LFBO, "--airports", "ZZZZ"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZZZZ"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_is_io_error() {
    let out = bin(&["label", "--scenario", "/nonexistent/s.yaml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn split_260_airports() {
    let dir = tempfile::tempdir().unwrap();
    let list = p(dir.path(), "airports.txt");
    let names: Vec<String> = (0..260).map(|i| format!("K{i:03}")).collect();
    fs::write(&list, names.join("\n")).unwrap();
    let a = ok(&["split", "--airports", s(&list), "--seed", "5"]).stdout;
    let b = ok(&["split", "--airports", s(&list), "--seed", "5"]).stdout;
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["train"].as_array().unwrap().len(), 130);
    assert_eq!(v["test"].as_array().unwrap().len(), 130);
}

#[test]
fn dump_odd_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let yaml = ok(&["dump-odd-config"]).stdout;
    let f = p(dir.path(), "odd.yaml");
    fs::write(&f, &yaml).unwrap();
    let out = p(dir.path(), "odd2.yaml");
    ok(&["dump-odd-config", "--config", s(&f), "--out", s(&out)]);
    assert_eq!(fs::read(&out).unwrap(), yaml);
    fs::write(&f, "extension_factor: 0.5\n").unwrap();
    assert_eq!(bin(&["dump-odd-config", "--config", s(&f)]).status.code(), Some(1));
}

#[test]
fn calibrate_requires_altitude_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = p(dir.path(), "obs.csv");
    fs::write(&csv, "image_id,corner,u,v\nLFBO/14R,0,500,500\n").unwrap();
    let out = bin(&["calibrate", "--observations", s(&csv), "--runway-db", LFBO]);
    assert_eq!(out.status.code(), Some(1));
}
