//! Synthesize a labeled corpus, train the n-gram scorer, evaluate it.
//!
//! ```bash
//! cargo run --example train_classifier
//! ```

use copyfunnel::classifier::{evaluate, generate_synthetic, train, Label, NGramModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn token_pool(rng: &mut ChaCha8Rng, prefix: &str, vocab: usize, len: usize) -> Vec<String> {
    (0..len)
        .map(|_| format!("{prefix}{}", rng.random_range(0..vocab)))
        .collect()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    // Carriers imitate everyday public text; excerpts imitate registered
    // passages with their own phrasing.
    let carriers: Vec<Vec<String>> = (0..120)
        .map(|_| token_pool(&mut rng, "plain", 250, 150))
        .collect();
    let excerpts: Vec<Vec<String>> = (0..20)
        .map(|_| token_pool(&mut rng, "verse", 120, 60))
        .collect();

    let train_set = generate_synthetic(&excerpts, &carriers[..80], 0.5, 42).unwrap();
    let test_set = generate_synthetic(&excerpts, &carriers[80..100], 0.5, 43).unwrap();
    let benign: Vec<Vec<String>> = carriers[100..].to_vec();

    let model = train(&train_set, 3, 0.5).unwrap();
    println!(
        "trained n={} alpha={} over {} examples, {} distinct n-grams",
        model.n,
        model.smoothing_alpha,
        train_set.len(),
        model.log_odds.len()
    );

    let report = evaluate(&model, &test_set, &benign, 0.0);
    println!(
        "eval: tp={} fp={} tn={} fn={}",
        report.tp, report.fp, report.tn, report.fn_
    );
    println!(
        "precision={:.3} recall={:.3} f1={:.3} benign_fp_rate={:.3}",
        report.precision, report.recall, report.f1, report.benign_fp_rate
    );

    // Scores are signed log-odds.
    let spliced = test_set
        .iter()
        .find(|e| e.label == Label::ProtectedLike)
        .unwrap();
    let clean = test_set
        .iter()
        .find(|e| e.label == Label::PublicLike)
        .unwrap();
    println!(
        "\nsample scores: spliced {:+.2}, carrier {:+.2}",
        model.score(&spliced.tokens).unwrap(),
        model.score(&clean.tokens).unwrap()
    );

    // The model serializes to a stable JSON form.
    let json = model.to_json();
    let back = NGramModel::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
    println!("model JSON round trip: {} bytes", json.len());
}
