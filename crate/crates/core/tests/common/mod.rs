#![allow(dead_code)]

use maiclass::corpus::{parse_corpus, Corpus};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 3] = ["football", "rock", "vegetarianism"];
pub const CLASS_VOCAB: usize = 50;
pub const NOISE_VOCAB: usize = 200;
pub const DOCS_PER_CLASS: usize = 30;

/// Token draws per document from the class vocabulary and the shared noise.
pub const CLASS_DRAWS: usize = 500;
pub const NOISE_DRAWS: usize = 300;

/// JSONL corpus with disjoint per-class vocabularies plus shared noise tokens.
pub fn synthetic_jsonl(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    for class in CLASSES {
        for d in 0..DOCS_PER_CLASS {
            let mut words: Vec<String> = (0..CLASS_DRAWS)
                .map(|_| format!("{class}{:02}", rng.gen_range(0..CLASS_VOCAB)))
                .collect();
            words.extend(
                (0..NOISE_DRAWS).map(|_| format!("noise{:03}", rng.gen_range(0..NOISE_VOCAB))),
            );
            words.shuffle(&mut rng);
            let record = serde_json::json!({
                "id": format!("{class}-{d}"),
                "network": "twitter",
                "language": "en",
                "label": class,
                "text": words.join(" "),
            });
            lines.push(record.to_string());
        }
    }
    lines.join("\n") + "\n"
}

pub fn synthetic_corpus(seed: u64) -> Corpus {
    parse_corpus("synthetic", &synthetic_jsonl(seed)).expect("generated corpus parses")
}
