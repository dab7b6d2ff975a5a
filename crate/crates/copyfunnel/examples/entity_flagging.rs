//! Scan text against a gazetteer and route on the flag count.
//!
//! A flag is a routing signal, never a rejection: discussing a publication
//! is not the same as copying it.
//!
//! ```bash
//! cargo run --example entity_flagging
//! ```

use copyfunnel::entity::{compile_gazetteer, flag_verdict, EntityClass, GazetteerEntry};
use copyfunnel::text::normalize_text;

fn main() {
    let entries = vec![
        GazetteerEntry::new("The Daily Bugle", EntityClass::Publication, Some("w-bugle".into()))
            .unwrap(),
        GazetteerEntry::new("Jane Doe", EntityClass::Author, None).unwrap(),
        GazetteerEntry::new("Acme Press", EntityClass::Publisher, None).unwrap(),
        GazetteerEntry::new("A Winter Chronicle", EntityClass::WorkTitle, Some("w-chron".into()))
            .unwrap(),
    ];
    let matcher = compile_gazetteer(entries).unwrap();

    let text = "In her essay for The Daily Bugle, Jane Doe revisits \
                A Winter Chronicle, the debut Acme Press released in 1998; \
                critics at the Daily Bugle praised it at the time.";
    let tokens = normalize_text(text);
    let flags = matcher.scan_text(&tokens);

    println!("{} flags in {} tokens:", flags.len(), tokens.len());
    for flag in &flags {
        println!(
            "  tokens {:>2}..{:<2} {:?} {:?} (work_id: {:?})",
            flag.start_token,
            flag.end_token,
            flag.entry.surface,
            flag.entry.class,
            flag.entry.work_id
        );
    }

    for threshold in [2, 6] {
        let verdict = flag_verdict(&flags, threshold);
        println!(
            "threshold {threshold}: {:?} ({:?}, {})",
            verdict.verdict, verdict.reason, verdict.evidence
        );
    }
}
