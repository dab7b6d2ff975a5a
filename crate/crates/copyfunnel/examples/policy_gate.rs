//! Gate decisions from robots directives, TDM signals, and pricing.
//!
//! ```bash
//! cargo run --example policy_gate
//! ```

use copyfunnel::policy::{
    parse_robots, parse_tdm_signals, resolve_access, FetchRequest, PriceSchedule, Purpose,
    TdmSignal,
};

fn main() {
    let robots = "\
User-agent: copyfunnel
Disallow: /archive/
Allow: /archive/free/

User-agent: *
Disallow: /
";
    let directives = parse_robots(robots, "copyfunnel");
    println!("selected group: {:?}", directives.groups[0].agent_patterns);
    for path in ["/news/today", "/archive/2001", "/archive/free/sample"] {
        println!(
            "  is_allowed({path}) = {}",
            copyfunnel::policy::is_allowed(&directives, path)
        );
    }

    // Signals captured from a response and its head markup.
    let headers = vec![("TDM-Reservation".to_string(), "1".to_string())];
    let head = r#"<meta name="robots" content="index, noai">"#;
    let signals = parse_tdm_signals(&headers, head);
    println!("\nparsed signals: {signals:#?}");

    let mut prices = PriceSchedule::default();
    prices.per_domain.insert("paid.example".into(), 2500);

    let cases = [
        ("https://news.example/news/today", Purpose::Training, vec![]),
        (
            "https://news.example/news/today",
            Purpose::Training,
            signals.clone(),
        ),
        (
            "https://news.example/news/today",
            Purpose::Search,
            vec![TdmSignal {
                source: copyfunnel::policy::TdmSource::MetaTag,
                reserved: true,
                scope: copyfunnel::policy::TdmScope::TrainingOnly,
            }],
        ),
        ("https://paid.example/article", Purpose::Training, vec![]),
    ];
    println!();
    for (url, purpose, signals) in cases {
        let request = FetchRequest {
            url: url.into(),
            agent_id: "copyfunnel".into(),
            purpose,
        };
        let decision = resolve_access(&request, &directives, &signals, &prices);
        println!(
            "{url} purpose={purpose:?} -> {:?} ({:?}, {} micro-units)",
            decision.verdict, decision.reason, decision.price_micro_units
        );
    }
}
