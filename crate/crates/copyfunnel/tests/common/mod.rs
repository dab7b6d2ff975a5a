//! Shared fixture builders for the integration and acceptance suites.
//!
//! Everything is seeded; the same fixture bytes come out on every run.

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use copyfunnel::classifier::{generate_synthetic, train, NGramModel, TrainingExample};
use copyfunnel::entity::{EntityClass, GazetteerEntry};
use copyfunnel::fingerprint::{pgm, suite};
use copyfunnel::pipeline::{CorpusDoc, Media};
use copyfunnel::registry::{snapshot_from_works, snapshot_to_json, RegisteredWork, RegistrySnapshot};
use copyfunnel::text::normalize_text;

/// Random token sequence over a prefixed vocabulary.
pub fn gen_tokens(rng: &mut ChaCha8Rng, prefix: &str, vocab: usize, len: usize) -> Vec<String> {
    (0..len)
        .map(|_| format!("{prefix}{:03}", rng.random_range(0..vocab)))
        .collect()
}

/// The bundled synthetic classifier task: 200 train / 100 test examples at
/// mix_ratio 0.5, seed 42, plus a disjoint benign carrier corpus.
pub struct BundledTask {
    pub train: Vec<TrainingExample>,
    pub test: Vec<TrainingExample>,
    pub benign: Vec<Vec<String>>,
    pub excerpts: Vec<Vec<String>>,
}

pub fn bundled_task() -> BundledTask {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let carriers: Vec<Vec<String>> = (0..200)
        .map(|_| {
            let len = rng.random_range(120..200);
            gen_tokens(&mut rng, "pub", 300, len)
        })
        .collect();
    let excerpts: Vec<Vec<String>> = (0..25)
        .map(|_| gen_tokens(&mut rng, "reg", 150, 60))
        .collect();
    let train = generate_synthetic(&excerpts, &carriers[..100], 0.5, 42).unwrap();
    let test = generate_synthetic(&excerpts, &carriers[100..150], 0.5, 4242).unwrap();
    let benign = carriers[150..200].to_vec();
    BundledTask {
        train,
        test,
        benign,
        excerpts,
    }
}

pub fn bundled_model() -> NGramModel {
    train(&bundled_task().train, 3, 0.5).unwrap()
}

/// Paths of a fixture corpus written to disk, ready for the CLI.
pub struct E2eFixture {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub registry: PathBuf,
    pub gazetteer: PathBuf,
    pub model: PathBuf,
    pub prices: PathBuf,
    pub out: PathBuf,
    /// doc_ids expected to be admitted as "clean" documents.
    pub clean_doc_ids: Vec<String>,
    pub corpus_docs: Vec<CorpusDoc>,
    pub snapshot_works: Vec<RegisteredWork>,
}

fn text_work_from_tokens(work_id: &str, tokens: &[String]) -> RegisteredWork {
    RegisteredWork {
        work_id: work_id.to_string(),
        title: format!("Title of {work_id}"),
        authors: vec!["Fixture Author".into()],
        exact_digest: copyfunnel::canonical::sha256(
            copyfunnel::text::canonical_text(tokens).as_bytes(),
        ),
        image_hashes: vec![],
        text_simhash: copyfunnel::fingerprint::simhash(tokens, 5).ok(),
        minhash: copyfunnel::fingerprint::minhash_from_tokens(tokens, 5, 128).ok(),
        registered_at: "2026-01-01T00:00:00Z".into(),
    }
}

fn image_work(work_id: &str, img: &pgm::GrayImage) -> RegisteredWork {
    let bytes = pgm::write_pgm(img);
    let grid = pgm::downsample_to_grid(img).unwrap();
    RegisteredWork {
        work_id: work_id.to_string(),
        title: format!("Image {work_id}"),
        authors: vec![],
        exact_digest: copyfunnel::canonical::sha256(&bytes),
        image_hashes: vec![copyfunnel::fingerprint::dhash(&grid)],
        text_simhash: None,
        minhash: None,
        registered_at: "2026-01-01T00:00:00Z".into(),
    }
}

/// Build a full on-disk fixture: corpus + sidecars + prices + gazetteer +
/// trained model + registry snapshot v1.
///
/// The corpus mixes clean documents, gate-rejected documents (robots, TDM,
/// price), exact copies of registered works, perturbed registered images,
/// and entity-flagged documents.
pub fn build_e2e_fixture(
    dir: &Path,
    n_clean_text: usize,
    n_images: usize,
    n_works: usize,
    seed: u64,
) -> E2eFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::fs::create_dir_all(dir.join("media")).unwrap();

    // Registry works: text works plus image works.
    let n_image_works = (n_works / 5).max(1).min(n_works);
    let n_text_works = n_works - n_image_works;
    let mut works = Vec::new();
    let mut work_texts = Vec::new();
    for i in 0..n_text_works {
        let len = rng.random_range(60..140);
        let tokens = gen_tokens(&mut rng, "wrk", 400, len);
        works.push(text_work_from_tokens(&format!("w{i:04}"), &tokens));
        work_texts.push(tokens);
    }
    let mut work_images = Vec::new();
    for i in 0..n_image_works {
        let img = suite::synthetic_image(seed.wrapping_add(1000 + i as u64), 64, 64);
        works.push(image_work(&format!("wimg{i:04}"), &img));
        work_images.push(img);
    }

    // Corpus documents.
    let mut docs: Vec<CorpusDoc> = Vec::new();
    let mut clean_doc_ids = Vec::new();
    let mut doc_no = 0usize;
    let push_text = |docs: &mut Vec<CorpusDoc>, url: String, body: String| {
        let doc_id = format!("doc{:05}", docs.len());
        docs.push(CorpusDoc {
            doc_id: doc_id.clone(),
            source_url: url,
            fetched_at: "2026-03-01T00:00:00Z".into(),
            media: Media::Text {
                text: Some(body),
                path: None,
            },
        });
        doc_id
    };

    // Clean text documents spread over open hosts.
    for _ in 0..n_clean_text {
        let host = format!("open{}.example", rng.random_range(0..4));
        let len = rng.random_range(40..120);
        let body = gen_tokens(&mut rng, "pub", 300, len).join(" ");
        let id = push_text(&mut docs, format!("https://{host}/p{doc_no}"), body);
        clean_doc_ids.push(id);
        doc_no += 1;
    }
    // Gate rejections: robots-blocked, TDM-reserved (header), noai meta,
    // terms file, and a priced host.
    for host in [
        "blocked.example",
        "reserved.example",
        "noai.example",
        "terms.example",
        "paid.example",
    ] {
        for _ in 0..2 {
            let body = gen_tokens(&mut rng, "pub", 300, 60).join(" ");
            let path = if host == "blocked.example" { "private/x" } else { "page" };
            push_text(
                &mut docs,
                format!("https://{host}/{path}{doc_no}"),
                body,
            );
            doc_no += 1;
        }
    }
    // Exact copies of registered text works.
    for i in 0..work_texts.len().min(5) {
        push_text(
            &mut docs,
            format!("https://mirror.example/copy{i}"),
            work_texts[i].join(" "),
        );
    }
    // Entity-flagged documents (mention the gazetteer publication twice).
    for _ in 0..3 {
        let mut body = vec!["the".into(), "daily".into(), "planet".into()];
        body.extend(gen_tokens(&mut rng, "pub", 300, 50));
        body.extend(["the".into(), "daily".into(), "planet".into()]);
        push_text(
            &mut docs,
            format!("https://open0.example/e{doc_no}"),
            body.join(" "),
        );
        doc_no += 1;
    }
    // Excerpt-heavy documents the classifier should reject.
    for _ in 0..3 {
        let body = gen_tokens(&mut rng, "reg", 150, 80).join(" ");
        push_text(
            &mut docs,
            format!("https://open1.example/x{doc_no}"),
            body,
        );
        doc_no += 1;
    }
    // Images: clean synthetic ones plus perturbed copies of registered
    // images (brightness +5 keeps them within the match radius).
    for i in 0..n_images {
        let doc_id = format!("img{i:05}");
        let (img, name) = if i < n_images / 2 || work_images.is_empty() {
            (
                suite::synthetic_image(seed.wrapping_add(50_000 + i as u64), 64, 64),
                format!("clean{i}.pgm"),
            )
        } else {
            let src = &work_images[i % work_images.len()];
            (pgm::adjust_brightness(src, 5), format!("near{i}.pgm"))
        };
        std::fs::write(dir.join("media").join(&name), pgm::write_pgm(&img)).unwrap();
        docs.push(CorpusDoc {
            doc_id,
            source_url: format!("https://open2.example/{name}"),
            fetched_at: "2026-03-01T00:00:00Z".into(),
            media: Media::Image {
                path: format!("media/{name}"),
            },
        });
    }

    // Sidecar files.
    std::fs::write(
        dir.join("blocked.example.robots.txt"),
        "User-agent: *\nDisallow: /private/\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("reserved.example.signals.json"),
        r#"{"headers": [["tdm-reservation", "1"]]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("noai.example.signals.json"),
        r#"{"html_head": "<meta name=\"robots\" content=\"noai\">"}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("terms.example.signals.json"),
        r#"{"terms_reserved": true}"#,
    )
    .unwrap();

    let prices = dir.join("prices.json");
    std::fs::write(&prices, r#"{"paid.example": 7000}"#).unwrap();

    let gazetteer = dir.join("gazetteer.jsonl");
    std::fs::write(
        &gazetteer,
        concat!(
            r#"{"surface": "The Daily Planet", "class": "PUBLICATION", "work_id": "w0000"}"#,
            "\n",
            r#"{"surface": "Jane Q Writer", "class": "AUTHOR"}"#,
            "\n",
        ),
    )
    .unwrap();

    let model_path = dir.join("model.json");
    std::fs::write(&model_path, bundled_model().to_json()).unwrap();

    let registry = dir.join("registry.v1.json");
    let snapshot = snapshot_from_works(1, "2026-02-01T00:00:00Z", works.clone()).unwrap();
    std::fs::write(&registry, snapshot_to_json(&snapshot)).unwrap();

    let corpus = dir.join("corpus.jsonl");
    let mut corpus_text = String::new();
    for doc in &docs {
        corpus_text.push_str(&serde_json::to_string(doc).unwrap());
        corpus_text.push('\n');
    }
    std::fs::write(&corpus, corpus_text).unwrap();

    E2eFixture {
        dir: dir.to_path_buf(),
        corpus,
        registry,
        gazetteer,
        model: model_path,
        prices,
        out: dir.join("out"),
        clean_doc_ids,
        corpus_docs: docs,
        snapshot_works: works,
    }
}

/// Write snapshot v2 = v1 plus one extra work built from the given tokens.
pub fn write_snapshot_v2(
    fixture: &E2eFixture,
    extra_work_id: &str,
    tokens: &[String],
) -> PathBuf {
    let mut works = fixture.snapshot_works.clone();
    works.push(text_work_from_tokens(extra_work_id, tokens));
    let snapshot = snapshot_from_works(2, "2026-04-01T00:00:00Z", works).unwrap();
    let path = fixture.dir.join("registry.v2.json");
    std::fs::write(&path, snapshot_to_json(&snapshot)).unwrap();
    path
}

/// In-memory funnel inputs over the fixture, for library-level runs.
pub struct MemInputs {
    pub sidecar: copyfunnel::pipeline::SidecarStore,
    pub prices: copyfunnel::policy::PriceSchedule,
    pub matcher: copyfunnel::entity::GazetteerMatcher,
    pub model: NGramModel,
    pub snapshot: RegistrySnapshot,
    pub media_root: PathBuf,
}

impl MemInputs {
    pub fn load(fixture: &E2eFixture) -> Self {
        MemInputs {
            sidecar: copyfunnel::pipeline::SidecarStore::load(&fixture.dir).unwrap(),
            prices: copyfunnel::policy::PriceSchedule::load(&fixture.prices).unwrap(),
            matcher: copyfunnel::entity::compile_gazetteer(
                copyfunnel::entity::load_gazetteer(&fixture.gazetteer).unwrap(),
            )
            .unwrap(),
            model: NGramModel::load(&fixture.model).unwrap(),
            snapshot: copyfunnel::registry::load_snapshot(&fixture.registry).unwrap(),
            media_root: fixture.dir.clone(),
        }
    }

    pub fn inputs(&self) -> copyfunnel::pipeline::FunnelInputs<'_> {
        copyfunnel::pipeline::FunnelInputs {
            sidecar: &self.sidecar,
            prices: &self.prices,
            matcher: &self.matcher,
            model: &self.model,
            snapshot: &self.snapshot,
            media_root: self.media_root.clone(),
        }
    }
}

/// Normalized tokens of a corpus doc's inline text.
pub fn doc_tokens(doc: &CorpusDoc) -> Vec<String> {
    match &doc.media {
        Media::Text {
            text: Some(text), ..
        } => normalize_text(text),
        _ => Vec::new(),
    }
}

/// Distinct gazetteer entries for randomized matcher tests.
pub fn random_gazetteer(
    rng: &mut ChaCha8Rng,
    max_entries: usize,
    vocab: usize,
) -> Vec<GazetteerEntry> {
    let count = rng.random_range(1..=max_entries);
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for _ in 0..count {
        let len = rng.random_range(1..=4);
        let surface = gen_tokens(rng, "tok", vocab, len).join(" ");
        if seen.insert(surface.clone()) {
            let work_id = if rng.random_bool(0.3) {
                Some(format!("gw{}", rng.random_range(0..50)))
            } else {
                None
            };
            entries.push(GazetteerEntry::new(&surface, EntityClass::WorkTitle, work_id).unwrap());
        }
    }
    entries
}
