//  Copyright 2026 The chk Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

use std::path::Path;
use std::process::{Command, Output};

fn chk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chk")).args(args).env_remove("HH_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: [&str; 6] = ["--count", "20000", "--universe", "5000", "--repeats", "2"];

#[test]
fn accuracy_csv_is_deterministic() {
    let run = || stdout(&chk(&[&["accuracy", "--seed", "5"][..], &SMALL].concat()));
    let first = run();
    assert_eq!(first, run());
    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("run_id,algo,variant,threads,phi,memory_bytes,skew,query_rate,metric,value")
    );
    let metrics: Vec<&str> = first.lines().skip(1).map(|l| l.split(',').nth(8).unwrap()).collect();
    for m in ["precision", "recall", "are"] {
        assert_eq!(metrics.iter().filter(|&&x| x == m).count(), 2, "{m}");
    }
}

#[test]
fn generate_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.txt");
    let p = path.to_str().unwrap();
    let gen = |p: &str| stdout(&chk(&["generate", "--count", "1000", "--universe", "100", "--seed", "7", "-o", p]));
    gen(p);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1000);
    let other = dir.path().join("again.txt");
    gen(other.to_str().unwrap());
    assert_eq!(text, std::fs::read_to_string(&other).unwrap());

    let csv = stdout(&chk(&["accuracy", "--algo", "oracle", "--repeats", "1", "-i", p]));
    let precision = csv.lines().find(|l| l.contains(",precision,")).unwrap();
    assert!(precision.ends_with(",1.0"), "{precision}");
    // File input has no skew.
    assert!(precision.contains(",NaN,"), "{precision}");
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = chk(&[&["bench-seq", "--algo", "spacesaving", "--query-rate", "0.01", "-o", path.to_str().unwrap()][..], &SMALL].concat());
    assert!(stdout(&out).is_empty());
    let csv = std::fs::read_to_string(Path::new(&path)).unwrap();
    for m in ["throughput_ops", "hh_latency_mean_us", "hh_latency_p99_us"] {
        assert!(csv.contains(m), "{m} missing");
    }
}

#[test]
fn hh_threads_overrides_the_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_chk"))
        .args([&["bench-par", "--threads", "3", "--variant", "q"][..], &SMALL].concat())
        .env("HH_THREADS", "2")
        .output()
        .unwrap();
    let csv = stdout(&out);
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("0,chk,Q,2,"), "{row}");
}

#[test]
fn invalid_invocations_fail() {
    let bad: [&[&str]; 6] = [
        &["accuracy", "--skew", "1.1", "-i", "x.txt"],
        &["accuracy", "--variant", "q"],
        &["accuracy", "--memory-bytes", "8", "--repeats", "1"],
        &["accuracy", "-i", "/nonexistent/stream.txt"],
        &["bench-seq", "--query-rate", "1.5", "--repeats", "1", "--count", "10"],
        &["accuracy", "--algo", "heavykeeper"],
    ];
    for args in bad {
        let out = chk(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}
