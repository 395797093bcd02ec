//! Synthetic inputs for the benchmarks.

use rand::RngExt;
use satd_core::rng::stream_rng;

/// A Java class with `methods` methods, each holding a commented `if` chain.
pub fn java_source(methods: usize, seed: u64) -> String {
    let mut rng = stream_rng(seed, 0);
    let mut s = String::from("package bench;\n\nclass Gen {\n");
    for m in 0..methods {
        let v = rng.random_range(0..100);
        s.push_str(&format!(
            "    int m{m}(int a, int b) {{\n        int x = a * {v};\n"
        ));
        s.push_str("        // TODO: replace this chain with a lookup\n");
        s.push_str(&format!(
            "        if (a > b && x != {v}) {{\n            x = helper(a, b);\n        }} else if (b < 0) {{\n            if (a == 0) return -1;\n            x = b;\n        }} else {{\n            x = 0;\n        }}\n"
        ));
        s.push_str("        return x;\n    }\n\n");
    }
    s.push_str("}\n");
    s
}

/// Random token sequences over a vocabulary of `vocab` words.
pub fn token_sequences(n: usize, len: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = stream_rng(seed, 1);
    (0..n)
        .map(|_| {
            (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab)))
                .collect()
        })
        .collect()
}
