#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::RngExt;
use satd_core::rng::stream_rng;
use serde::Deserialize;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[derive(Debug, Deserialize)]
pub struct GoldenPair {
    pub path: String,
    pub line: usize,
    pub comment: Option<String>,
    pub label: String,
}

#[derive(Debug, Deserialize)]
pub struct GoldenSite {
    pub path: String,
    pub line: usize,
}

#[derive(Debug, Deserialize)]
pub struct Golden {
    pub pairs: Vec<GoldenPair>,
    pub dropped: Vec<GoldenSite>,
    pub diagnostics: Vec<GoldenSite>,
}

pub fn golden() -> Golden {
    let text = std::fs::read_to_string(fixture_dir().join("golden.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// 1-based line of a byte offset.
pub fn line_of(source: &str, offset: usize) -> usize {
    source[..offset].matches('\n').count() + 1
}

const MARKERS: [&str; 4] = ["todo", "hack", "fixme", "workaround"];

fn filler<R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<String> {
    (0..len)
        .map(|_| format!("t{}", rng.random_range(0..40)))
        .collect()
}

/// Sequences of filler tokens; the positive half additionally carries one
/// marker token at a random position. Items come out shuffled.
pub fn planted_corpus(n: usize, seed: u64) -> (Vec<Vec<String>>, Vec<bool>) {
    let mut rng = stream_rng(seed, 0);
    let mut items: Vec<(Vec<String>, bool)> = (0..n)
        .map(|i| {
            let positive = i % 2 == 0;
            let len = rng.random_range(6..16);
            let mut seq = filler(&mut rng, len);
            if positive {
                let at = rng.random_range(0..=seq.len());
                let marker = MARKERS[rng.random_range(0..MARKERS.len())];
                seq.insert(at, marker.to_string());
            }
            (seq, positive)
        })
        .collect();
    items.shuffle(&mut rng);
    items.into_iter().unzip()
}

/// Distinct random sequences with random balanced labels.
pub fn random_label_corpus(n: usize, seed: u64) -> (Vec<Vec<String>>, Vec<bool>) {
    let mut rng = stream_rng(seed, 1);
    let mut labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    labels.shuffle(&mut rng);
    let seqs = (0..n)
        .map(|i| {
            let len = rng.random_range(5..12);
            let mut s = filler(&mut rng, len);
            s.push(format!("id{i}"));
            s.rotate_right(rng.random_range(0..len));
            s
        })
        .collect();
    (seqs, labels)
}

/// SBT-shaped code sequences paired with short comments.
pub fn memorization_pairs(n: usize, seed: u64) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut rng = stream_rng(seed, 2);
    let words = [
        "todo",
        "hack",
        "check",
        "metadata",
        "remov",
        "when",
        "fix",
        "null",
        "handl",
        "case",
        "cach",
        "later",
        "use",
        "api",
        "temporari",
        "workaround",
        "kludg",
        "ugli",
        "refactor",
        "loop",
    ];
    let mut code = Vec::with_capacity(n);
    let mut comments = Vec::with_capacity(n);
    for _ in 0..n {
        let mut sbt = vec!["(".to_string(), "IfStatement".to_string()];
        for _ in 0..rng.random_range(2..6) {
            let name = format!("Name:v{}", rng.random_range(0..25));
            sbt.extend(["(".to_string(), name.clone(), ")".to_string(), name]);
        }
        sbt.extend([")".to_string(), "IfStatement".to_string()]);
        code.push(sbt);
        let len = rng.random_range(3..8);
        comments.push(
            (0..len)
                .map(|_| words[rng.random_range(0..words.len())].to_string())
                .collect(),
        );
    }
    (code, comments)
}
