use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use telebrain_core::model::*;
use telebrain_core::store::VenueFile;

fn telebrain(args: &[&str], data_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_telebrain"));
    cmd.args(args).env_remove("TELEBRAIN_DATA_DIR");
    if let Some(d) = data_dir {
        cmd.arg("--data-dir").arg(d);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON value")
}

/// Exactly one JSON line on stderr, nothing on stdout, nonzero exit.
fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    assert!(out.stdout.is_empty(), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    serde_json::from_str(lines[0]).unwrap()
}

fn role(name: &str) -> VenueRole {
    VenueRole {
        role: Role {
            id: ObjectId::from(format!("role-{name}")),
            name: name.into(),
            capabilities: [Capability::ReceiveText].into_iter().collect(),
            audio_required: false,
            lock: None,
        },
        capacity: None,
    }
}

fn venue_file(roles: &[&str]) -> VenueFile {
    VenueFile {
        documents: vec![Document::Venue(Venue {
            id: ObjectId::from("v-hall"),
            name: "Hall".into(),
            roles: roles.iter().map(|r| role(r)).collect(),
            passcode: None,
            join_requirements: BTreeSet::new(),
            delay_budget_ms: None,
            timezone: None,
            lock: None,
        })],
        passcodes: BTreeMap::from([(ObjectId::from("v-hall"), "sesame".to_string())]),
    }
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Textbook bubble sort, counting passes including the final
/// swap-free one.
fn oracle_passes(mut v: Vec<i64>) -> (Vec<i64>, usize) {
    let mut passes = 0;
    loop {
        passes += 1;
        let mut swapped = false;
        for i in 0..v.len() - 1 {
            if v[i] > v[i + 1] {
                v.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            return (v, passes);
        }
    }
}

#[test]
fn bubble_sort_obedient_matches_oracle() {
    for seed in 0..5 {
        let v = stdout_json(&telebrain(&["simulate", "bubble-sort", "--n", "4", "--seed", &seed.to_string()], None));
        let initial: Vec<i64> = serde_json::from_value(v["initial"].clone()).unwrap();
        let mut sorted_initial = initial.clone();
        sorted_initial.sort();
        assert_eq!(sorted_initial, vec![1, 2, 3, 4], "a permutation of 1..=4");
        let (expected, passes) = oracle_passes(initial);
        assert_eq!(v["final_order"], serde_json::json!(expected));
        assert_eq!(v["iterations"].as_array().unwrap().len(), passes);
        assert_eq!(v["verdict"]["verdict"], "sorted");
    }
}

#[test]
fn bubble_sort_is_deterministic_and_writes_trace_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let args = [
        "simulate", "bubble-sort", "--values", "5,1,4,2,3", "--policy", "willful", "--p", "0.4", "--seed", "11",
        "--out", out.to_str().unwrap(),
    ];
    let summary = stdout_json(&telebrain(&args, None));
    let first = std::fs::read_to_string(&out).unwrap();
    assert_eq!(stdout_json(&telebrain(&args, None)), summary);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
    let lines: Vec<Value> = first.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len() as u64, summary["iterations"].as_u64().unwrap());
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(line["iteration"], i + 1);
        assert_eq!(line["comparisons"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn bubble_sort_rejects_bad_probability() {
    let err = error_json(&telebrain(&["simulate", "bubble-sort", "--n", "3", "--policy", "willful", "--p", "1.5"], None));
    assert_eq!(err["error"]["code"], "invalid-argument");
}

#[test]
fn tts_over_100_characters_fails_with_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = "x".repeat(101);
    let err = error_json(&telebrain(&["import", "tts", "--text", &text], Some(dir.path())));
    assert_eq!(err["error"]["code"], "text-too-long");
    assert!(err["error"]["message"].as_str().unwrap().contains("101"));
}

#[test]
fn venue_apply_rejects_duplicate_roles() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("venue.json");
    std::fs::write(&file, serde_json::to_string(&venue_file(&["Chorus", "Solo", "Chorus"])).unwrap()).unwrap();
    let store = dir.path().join("store");
    let err = error_json(&telebrain(&["venue", "apply", file.to_str().unwrap()], Some(&store)));
    assert_eq!(err["error"]["code"], "validation");
    let details = err["error"]["details"].as_array().unwrap();
    assert!(details.iter().any(|d| d["field"].as_str().unwrap().starts_with("documents[0].roles")
        && d["message"].as_str().unwrap().contains("Chorus")), "{details:?}");
}

#[test]
fn venue_apply_twice_leaves_store_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("venue.json");
    std::fs::write(&file, serde_json::to_string_pretty(&venue_file(&["Prompter", "Receiver"])).unwrap()).unwrap();
    let store = dir.path().join("store");
    let first = stdout_json(&telebrain(&["venue", "apply", file.to_str().unwrap()], Some(&store)));
    assert_eq!(first["applied"][0]["outcome"], "created");
    let before = tree(&store);
    let second = stdout_json(&telebrain(&["venue", "apply", file.to_str().unwrap()], Some(&store)));
    assert_eq!(second["applied"][0]["outcome"], "unchanged");
    assert_eq!(tree(&store), before);
    let stored = String::from_utf8(before.values().flatten().copied().collect()).unwrap();
    assert!(!stored.contains("sesame"), "passcodes are stored hashed");
}

#[test]
fn data_dir_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("venue.json");
    std::fs::write(&file, serde_json::to_string(&venue_file(&["A"])).unwrap()).unwrap();
    let from_env = dir.path().join("env");
    let from_flag = dir.path().join("flag");
    let run = |flag: Option<&Path>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_telebrain"));
        cmd.args(["venue", "apply", file.to_str().unwrap()]).env("TELEBRAIN_DATA_DIR", &from_env);
        if let Some(f) = flag {
            cmd.arg("--data-dir").arg(f);
        }
        stdout_json(&cmd.output().unwrap())
    };
    run(None);
    assert!(from_env.join("objects/v-hall.json").exists());
    run(Some(&from_flag));
    assert!(from_flag.join("objects/v-hall.json").exists());
}

#[test]
fn import_image_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("Fsharp4.png");
    // 1x1 PNG.
    let bytes: &[u8] = &[
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 0x0d, 0x49, 0x48, 0x44, 0x52, 0, 0, 0, 1, 0, 0, 0, 1,
        8, 6, 0, 0, 0, 0x1f, 0x15, 0xc4, 0x89, 0, 0, 0, 0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0x0f,
        0, 0, 0x01, 0x01, 0x01, 0, 0x18, 0xdd, 0x8d, 0xb0, 0, 0, 0, 0, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
    ];
    std::fs::write(&png, bytes).unwrap();
    let store = dir.path().join("store");
    let v = stdout_json(&telebrain(&["import", "image", "--file", png.to_str().unwrap()], Some(&store)));
    assert_eq!(v["name"], "Fsharp4");
    assert_eq!(v["kind"], "image-upload");

    let not_image = dir.path().join("notes.txt");
    std::fs::write(&not_image, "hello").unwrap();
    let err = error_json(&telebrain(&["import", "image", "--file", not_image.to_str().unwrap()], Some(&store)));
    assert_eq!(err["error"]["code"], "not-image");
}

#[test]
fn copyrighted_audio_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let err = error_json(&telebrain(
        &["import", "audio", "--url", "http://127.0.0.1:9/a.wav", "--copyrighted"],
        Some(dir.path()),
    ));
    assert_eq!(err["error"]["code"], "copyrighted");
}

#[test]
fn perpl_simulation_writes_timelines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    std::fs::write(
        &cfg,
        r#"{"scenario":"stand-sit-switch","performers":[{"name":"a","policy":"obedient"},{"name":"b","policy":"willful","p":0.5,"seed":7}]}"#,
    )
    .unwrap();
    let out = dir.path().join("timelines.jsonl");
    let args = ["simulate", "perpl", "--file", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let summary = stdout_json(&telebrain(&args, None));
    assert_eq!(summary["performers"], 2);
    let text = std::fs::read_to_string(&out).unwrap();
    let names: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["performer"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names, ["a", "b"]);
    let inline = stdout_json(&telebrain(&["simulate", "perpl", "--file", cfg.to_str().unwrap()], None));
    assert_eq!(inline["timelines"].as_array().unwrap().len(), 2);
}

#[test]
fn protocol_golden_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&telebrain(&["protocol", "golden", "--out", dir.path().to_str().unwrap()], None));
    let written = v["written"].as_array().unwrap();
    assert!(!written.is_empty());
    for p in written {
        let text = std::fs::read_to_string(p.as_str().unwrap()).unwrap();
        serde_json::from_str::<Value>(&text).expect("golden frames are JSON");
    }
}

#[test]
fn usage_errors_are_json_and_help_is_not() {
    let err = error_json(&telebrain(&["simulate", "bubble-sort"], None));
    assert_eq!(err["error"]["code"], "usage");
    let err = error_json(&telebrain(&["import", "audio", "--url", "u", "--file", "f"], None));
    assert_eq!(err["error"]["code"], "usage");
    let help = telebrain(&["--help"], None);
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("simulate"));
}

#[test]
fn missing_input_file_is_reported() {
    let err = error_json(&telebrain(&["venue", "apply", "/nonexistent/venue.json"], None));
    assert_eq!(err["error"]["code"], "read-failed");
}
