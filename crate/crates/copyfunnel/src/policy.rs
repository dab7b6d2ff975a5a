//! Access gate: robots directives, TDM reservation signals, and pay-per-crawl
//! pricing, combined into one per-request decision.
//!
//! Everything here is total over arbitrary byte strings. The robots dialect
//! is a documented strict subset: exact user-agent token match beats `*`,
//! longest path prefix wins, ties go to ALLOW, and `$`/`*` path wildcards are
//! not interpreted.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// What the crawl is for. A TRAINING_ONLY reservation never blocks SEARCH.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Purpose {
    Training,
    Search,
}

/// One gated fetch: absolute URL, crawler token, declared purpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub url: String,
    pub agent_id: String,
    pub purpose: Purpose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleKind {
    Allow,
    Disallow,
}

/// A single path rule. Patterns are literal prefixes starting with `/`
/// (or empty, which matches nothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRule {
    pub kind: RuleKind,
    pub path_pattern: String,
}

/// One user-agent group of a robots file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DirectiveGroup {
    pub agent_patterns: Vec<String>,
    pub rules: Vec<PathRule>,
}

/// Directives selected for one agent. Contains at most one group after
/// selection; an empty set allows everything.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrawlDirectiveSet {
    pub groups: Vec<DirectiveGroup>,
    pub crawl_delay_seconds: Option<f64>,
}

impl CrawlDirectiveSet {
    pub fn empty() -> Self {
        Self::default()
    }

    fn rules(&self) -> &[PathRule] {
        self.groups.first().map(|g| g.rules.as_slice()).unwrap_or(&[])
    }
}

/// Where a TDM signal was found, in precedence order (header strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TdmSource {
    HttpHeader,
    MetaTag,
    TermsFile,
}

impl TdmSource {
    /// Lower is stronger.
    fn precedence(self) -> u8 {
        match self {
            TdmSource::HttpHeader => 0,
            TdmSource::MetaTag => 1,
            TdmSource::TermsFile => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TdmScope {
    All,
    TrainingOnly,
}

/// A machine-readable reservation (or explicit non-reservation) signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TdmSignal {
    pub source: TdmSource,
    pub reserved: bool,
    pub scope: TdmScope,
}

impl TdmSignal {
    /// Terms-and-conditions signals always carry scope ALL.
    pub fn terms_file(reserved: bool) -> Self {
        TdmSignal {
            source: TdmSource::TermsFile,
            reserved,
            scope: TdmScope::All,
        }
    }
}

/// Flat per-request prices by host, in micro currency units. Absent host
/// means free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceSchedule {
    pub per_domain: BTreeMap<String, u64>,
}

impl PriceSchedule {
    pub fn price_for(&self, host: &str) -> u64 {
        self.per_domain.get(host).copied().unwrap_or(0)
    }

    /// Load the `prices.json` object `{host: micro_units}`.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AccessVerdict {
    Allow,
    Deny,
    Pay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AccessReason {
    RobotsDisallow,
    TdmReserved,
    Priced,
    Open,
    PurposeExcluded,
}

/// The gate's output. PAY carries the price; DENY and ALLOW carry zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessDecision {
    pub verdict: AccessVerdict,
    pub price_micro_units: u64,
    pub reason: AccessReason,
}

// ---------------------------------------------------------------------------
// robots parsing
// ---------------------------------------------------------------------------

/// Parse a robots file and select the group for `agent_id`.
///
/// Parsing is total: unknown and malformed lines are skipped. Group
/// selection: the first group with an agent pattern equal to `agent_id`
/// (ASCII case-insensitive) wins; otherwise the first `*` group; otherwise
/// the empty allow-all set.
pub fn parse_robots(text: &str, agent_id: &str) -> CrawlDirectiveSet {
    struct RawGroup {
        agents: Vec<String>,
        rules: Vec<PathRule>,
        crawl_delay: Option<f64>,
    }

    let mut groups: Vec<RawGroup> = Vec::new();
    // True while consecutive user-agent lines are still extending the
    // current group's agent list.
    let mut collecting_agents = false;

    for raw_line in text.lines() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue; // malformed: no separator
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "user-agent" => {
                if value.is_empty() {
                    continue;
                }
                if collecting_agents {
                    if let Some(g) = groups.last_mut() {
                        g.agents.push(value.to_ascii_lowercase());
                    }
                } else {
                    groups.push(RawGroup {
                        agents: vec![value.to_ascii_lowercase()],
                        rules: Vec::new(),
                        crawl_delay: None,
                    });
                    collecting_agents = true;
                }
            }
            "allow" | "disallow" => {
                collecting_agents = false;
                let Some(g) = groups.last_mut() else {
                    continue; // rule before any user-agent line
                };
                // Valid patterns start with "/" or are empty.
                if !value.is_empty() && !value.starts_with('/') {
                    continue;
                }
                let kind = if key == "allow" {
                    RuleKind::Allow
                } else {
                    RuleKind::Disallow
                };
                g.rules.push(PathRule {
                    kind,
                    path_pattern: value.to_string(),
                });
            }
            "crawl-delay" => {
                collecting_agents = false;
                if let Some(g) = groups.last_mut() {
                    if let Ok(secs) = value.parse::<f64>() {
                        if secs.is_finite() && secs >= 0.0 {
                            g.crawl_delay = Some(secs);
                        }
                    }
                }
            }
            _ => {
                collecting_agents = false;
            }
        }
    }

    let agent_lower = agent_id.to_ascii_lowercase();
    let selected = groups
        .iter()
        .find(|g| g.agents.iter().any(|a| *a == agent_lower))
        .or_else(|| groups.iter().find(|g| g.agents.iter().any(|a| a == "*")));

    match selected {
        Some(g) => CrawlDirectiveSet {
            groups: vec![DirectiveGroup {
                agent_patterns: g.agents.clone(),
                rules: g.rules.clone(),
            }],
            crawl_delay_seconds: g.crawl_delay,
        },
        None => CrawlDirectiveSet::empty(),
    }
}

/// Longest-prefix rule evaluation. Ties between ALLOW and DISALLOW of equal
/// pattern length go to ALLOW; no matching rule means allowed.
pub fn is_allowed(directives: &CrawlDirectiveSet, path: &str) -> bool {
    debug_assert!(path.starts_with('/'), "paths must begin with '/'");
    let mut best_len: Option<usize> = None;
    let mut best_allow = true;
    for rule in directives.rules() {
        let p = &rule.path_pattern;
        if p.is_empty() || !path.starts_with(p.as_str()) {
            continue;
        }
        let len = p.len();
        let allow = rule.kind == RuleKind::Allow;
        match best_len {
            Some(cur) if len < cur => {}
            Some(cur) if len == cur => best_allow = best_allow || allow,
            _ => {
                best_len = Some(len);
                best_allow = allow;
            }
        }
    }
    best_len.is_none() || best_allow
}

// ---------------------------------------------------------------------------
// TDM signals
// ---------------------------------------------------------------------------

/// Recognize reservation signals in captured response headers and the HTML
/// head.
///
/// Recognized forms: a `tdm-reservation` header valued `1`/`0`; a
/// `tdm-reservation` meta tag valued `1`/`0` (scope ALL); a robots-style
/// meta tag containing the token `noai` (reserved, scope TRAINING_ONLY).
/// At most one signal is emitted per source; within a source a reservation
/// beats a non-reservation and ALL beats TRAINING_ONLY.
pub fn parse_tdm_signals(headers: &[(String, String)], html_head: &str) -> Vec<TdmSignal> {
    let mut signals = Vec::new();

    // Header source.
    let mut header_reserved: Option<bool> = None;
    for (name, value) in headers {
        if !name.eq_ignore_ascii_case("tdm-reservation") {
            continue;
        }
        match value.trim() {
            "1" => header_reserved = Some(true),
            // within one source a reservation wins over a non-reservation
            "0" => header_reserved = Some(header_reserved.unwrap_or(false)),
            _ => {} // unrecognizable value: omitted
        }
    }
    if let Some(reserved) = header_reserved {
        signals.push(TdmSignal {
            source: TdmSource::HttpHeader,
            reserved,
            scope: TdmScope::All,
        });
    }

    // Meta source.
    let mut meta_reserved_all = false;
    let mut meta_unreserved = false;
    let mut meta_noai = false;
    for (name, content) in scan_meta_tags(html_head) {
        if name.eq_ignore_ascii_case("tdm-reservation") {
            match content.trim() {
                "1" => meta_reserved_all = true,
                "0" => meta_unreserved = true,
                _ => {}
            }
        } else if name.eq_ignore_ascii_case("robots") {
            let has_noai = content
                .split(|c: char| c == ',' || c.is_whitespace())
                .any(|tok| tok.eq_ignore_ascii_case("noai"));
            if has_noai {
                meta_noai = true;
            }
        }
    }
    if meta_reserved_all {
        signals.push(TdmSignal {
            source: TdmSource::MetaTag,
            reserved: true,
            scope: TdmScope::All,
        });
    } else if meta_noai {
        signals.push(TdmSignal {
            source: TdmSource::MetaTag,
            reserved: true,
            scope: TdmScope::TrainingOnly,
        });
    } else if meta_unreserved {
        signals.push(TdmSignal {
            source: TdmSource::MetaTag,
            reserved: false,
            scope: TdmScope::All,
        });
    }

    signals
}

/// Minimal scan for `<meta ...>` tags, returning (name, content) pairs.
/// Tolerates attribute order, single/double quotes, and mixed case; gives
/// up silently on anything it cannot read.
fn scan_meta_tags(html: &str) -> Vec<(String, String)> {
    let lower = html.to_lowercase();
    let bytes = html.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0usize;
    while let Some(start) = lower[pos..].find("<meta") {
        let tag_start = pos + start;
        let Some(end_rel) = lower[tag_start..].find('>') else {
            break;
        };
        let tag_end = tag_start + end_rel;
        let tag = std::str::from_utf8(&bytes[tag_start..tag_end]).unwrap_or("");
        let name = meta_attribute(tag, "name");
        let content = meta_attribute(tag, "content");
        if let (Some(name), Some(content)) = (name, content) {
            out.push((name, content));
        }
        pos = tag_end + 1;
    }
    out
}

/// Extract a quoted attribute value from a tag slice.
fn meta_attribute(tag: &str, attr: &str) -> Option<String> {
    let lower = tag.to_lowercase();
    let needle = format!("{attr}=");
    let mut search = 0usize;
    while let Some(found) = lower[search..].find(&needle) {
        let at = search + found;
        // Must sit on an attribute boundary, not inside another name.
        if at > 0 {
            let prev = lower.as_bytes()[at - 1];
            if !prev.is_ascii_whitespace() {
                search = at + needle.len();
                continue;
            }
        }
        let value_start = at + needle.len();
        let rest = &tag[value_start..];
        let mut chars = rest.chars();
        return match chars.next() {
            Some(q @ ('"' | '\'')) => {
                let tail = &rest[1..];
                tail.find(q).map(|end| tail[..end].to_string())
            }
            Some(_) => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '>')
                    .unwrap_or(rest.len());
                Some(rest[..end].to_string())
            }
            None => None,
        };
    }
    None
}

// ---------------------------------------------------------------------------
// decision
// ---------------------------------------------------------------------------

/// The reservation that survives source precedence, if any.
///
/// A non-reservation from a stronger source (header over meta over terms)
/// overrides weaker reservations; at equal precedence a reservation wins.
/// Among surviving reservations the scope is the broadest one, so adding a
/// reservation signal can never narrow the effective scope.
fn effective_reservation(signals: &[TdmSignal]) -> Option<(TdmSource, TdmScope)> {
    let strongest_unreserved = signals
        .iter()
        .filter(|s| !s.reserved)
        .map(|s| s.source.precedence())
        .min();
    let surviving: Vec<&TdmSignal> = signals
        .iter()
        .filter(|s| s.reserved)
        .filter(|s| match strongest_unreserved {
            Some(u) => s.source.precedence() <= u,
            None => true,
        })
        .collect();
    if surviving.is_empty() {
        return None;
    }
    let source = surviving
        .iter()
        .min_by_key(|s| s.source.precedence())
        .map(|s| s.source)
        .expect("non-empty");
    let scope = if surviving.iter().any(|s| s.scope == TdmScope::All) {
        TdmScope::All
    } else {
        TdmScope::TrainingOnly
    };
    Some((source, scope))
}

/// Combine robots directives, TDM signals, and the price schedule into one
/// decision. Total over all inputs.
///
/// Precedence: robots disallow, then covering TDM reservation, then
/// pricing, then open. A TRAINING_ONLY reservation does not cover SEARCH;
/// when it is skipped for that reason an otherwise-open ALLOW is reported as
/// PURPOSE_EXCLUDED.
pub fn resolve_access(
    request: &FetchRequest,
    directives: &CrawlDirectiveSet,
    signals: &[TdmSignal],
    prices: &PriceSchedule,
) -> AccessDecision {
    let (host, path) = split_url(&request.url);

    if !is_allowed(directives, &path) {
        return AccessDecision {
            verdict: AccessVerdict::Deny,
            price_micro_units: 0,
            reason: AccessReason::RobotsDisallow,
        };
    }

    let mut purpose_excluded = false;
    if let Some((_, scope)) = effective_reservation(signals) {
        let covers = match scope {
            TdmScope::All => true,
            TdmScope::TrainingOnly => request.purpose == Purpose::Training,
        };
        if covers {
            return AccessDecision {
                verdict: AccessVerdict::Deny,
                price_micro_units: 0,
                reason: AccessReason::TdmReserved,
            };
        }
        purpose_excluded = true;
    }

    let price = prices.price_for(&host);
    if price > 0 {
        return AccessDecision {
            verdict: AccessVerdict::Pay,
            price_micro_units: price,
            reason: AccessReason::Priced,
        };
    }

    AccessDecision {
        verdict: AccessVerdict::Allow,
        price_micro_units: 0,
        reason: if purpose_excluded {
            AccessReason::PurposeExcluded
        } else {
            AccessReason::Open
        },
    }
}

/// Best-effort (host, path) split that never fails; malformed URLs get an
/// empty host and "/" path.
pub fn split_url(url: &str) -> (String, String) {
    match url::Url::parse(url) {
        Ok(u) => {
            let host = u.host_str().unwrap_or("").to_string();
            // cannot-be-a-base URLs (mailto:, data:) have opaque paths
            let path = if u.path().starts_with('/') {
                u.path().to_string()
            } else {
                "/".to_string()
            };
            (host, path)
        }
        Err(_) => (String::new(), "/".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(rules: Vec<(RuleKind, &str)>) -> CrawlDirectiveSet {
        CrawlDirectiveSet {
            groups: vec![DirectiveGroup {
                agent_patterns: vec!["*".into()],
                rules: rules
                    .into_iter()
                    .map(|(kind, p)| PathRule {
                        kind,
                        path_pattern: p.to_string(),
                    })
                    .collect(),
            }],
            crawl_delay_seconds: None,
        }
    }

    #[test]
    fn parse_basic_disallow() {
        let set = parse_robots("User-agent: *\nDisallow: /private/", "botA");
        assert_eq!(set.groups.len(), 1);
        assert_eq!(
            set.groups[0].rules,
            vec![PathRule {
                kind: RuleKind::Disallow,
                path_pattern: "/private/".into()
            }]
        );
        assert!(!is_allowed(&set, "/private/x"));
        assert!(is_allowed(&set, "/public"));
    }

    #[test]
    fn empty_file_allows_everything() {
        let set = parse_robots("", "anybot");
        assert!(set.groups.is_empty());
        assert!(is_allowed(&set, "/anything/at/all"));
    }

    #[test]
    fn exact_agent_match_beats_wildcard() {
        let text = "User-agent: botA\nAllow: /\nUser-agent: *\nDisallow: /";
        let set = parse_robots(text, "botA");
        assert!(is_allowed(&set, "/x"));
        let other = parse_robots(text, "botB");
        assert!(!is_allowed(&other, "/x"));
    }

    #[test]
    fn agent_match_is_case_insensitive() {
        let text = "User-agent: BotA\nDisallow: /";
        let set = parse_robots(text, "bota");
        assert!(!is_allowed(&set, "/x"));
    }

    #[test]
    fn stacked_user_agent_lines_share_a_group() {
        let text = "User-agent: botA\nUser-agent: botB\nDisallow: /x";
        for agent in ["botA", "botB"] {
            let set = parse_robots(text, agent);
            assert!(!is_allowed(&set, "/x/1"), "agent {agent}");
        }
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let text = "\u{0}garbage\nUser-agent *\nUser-agent: bot\nDisallow: /a\nDisallow: no-slash\nNonsense: x\nAllow /b";
        let set = parse_robots(text, "bot");
        assert_eq!(set.groups[0].rules.len(), 1);
        assert!(!is_allowed(&set, "/a"));
    }

    #[test]
    fn longest_match_wins() {
        let set = group(vec![
            (RuleKind::Disallow, "/a/"),
            (RuleKind::Allow, "/a/b/"),
        ]);
        assert!(is_allowed(&set, "/a/b/c"));
        assert!(!is_allowed(&set, "/a/x"));
    }

    #[test]
    fn root_disallow_blocks_all() {
        let set = group(vec![(RuleKind::Disallow, "/")]);
        assert!(!is_allowed(&set, "/anything"));
    }

    #[test]
    fn equal_length_tie_goes_to_allow() {
        let set = group(vec![
            (RuleKind::Disallow, "/dup"),
            (RuleKind::Allow, "/dup"),
        ]);
        assert!(is_allowed(&set, "/dup/page"));
    }

    #[test]
    fn no_rules_allows() {
        let set = group(vec![]);
        assert!(is_allowed(&set, "/x"));
    }

    #[test]
    fn crawl_delay_parsed() {
        let set = parse_robots("User-agent: *\nCrawl-delay: 2.5\nDisallow:", "b");
        assert_eq!(set.crawl_delay_seconds, Some(2.5));
    }

    #[test]
    fn tdm_header_signal() {
        let headers = vec![("TDM-Reservation".to_string(), "1".to_string())];
        let signals = parse_tdm_signals(&headers, "");
        assert_eq!(
            signals,
            vec![TdmSignal {
                source: TdmSource::HttpHeader,
                reserved: true,
                scope: TdmScope::All
            }]
        );
    }

    #[test]
    fn tdm_meta_noai_signal() {
        let head = r#"<head><meta name="robots" content="index, NoAI"></head>"#;
        let signals = parse_tdm_signals(&[], head);
        assert_eq!(
            signals,
            vec![TdmSignal {
                source: TdmSource::MetaTag,
                reserved: true,
                scope: TdmScope::TrainingOnly
            }]
        );
    }

    #[test]
    fn tdm_meta_reservation_tag() {
        let head = r#"<META NAME='tdm-reservation' CONTENT='1'>"#;
        let signals = parse_tdm_signals(&[], head);
        assert_eq!(signals[0].scope, TdmScope::All);
        assert!(signals[0].reserved);
    }

    #[test]
    fn tdm_absent_means_no_signals() {
        assert!(parse_tdm_signals(&[], "<head></head>").is_empty());
    }

    #[test]
    fn tdm_unrecognized_value_omitted() {
        let headers = vec![("tdm-reservation".to_string(), "maybe".to_string())];
        assert!(parse_tdm_signals(&headers, "").is_empty());
    }

    #[test]
    fn noai_requires_whole_token() {
        let head = r#"<meta name="robots" content="noaiether">"#;
        assert!(parse_tdm_signals(&[], head).is_empty());
    }

    fn request(purpose: Purpose) -> FetchRequest {
        FetchRequest {
            url: "https://example.org/story".into(),
            agent_id: "bot".into(),
            purpose,
        }
    }

    #[test]
    fn training_denied_by_training_only_reservation() {
        let signals = vec![TdmSignal {
            source: TdmSource::MetaTag,
            reserved: true,
            scope: TdmScope::TrainingOnly,
        }];
        let d = resolve_access(
            &request(Purpose::Training),
            &CrawlDirectiveSet::empty(),
            &signals,
            &PriceSchedule::default(),
        );
        assert_eq!(d.verdict, AccessVerdict::Deny);
        assert_eq!(d.reason, AccessReason::TdmReserved);
        assert_eq!(d.price_micro_units, 0);
    }

    #[test]
    fn search_passes_training_only_reservation() {
        let signals = vec![TdmSignal {
            source: TdmSource::MetaTag,
            reserved: true,
            scope: TdmScope::TrainingOnly,
        }];
        let d = resolve_access(
            &request(Purpose::Search),
            &CrawlDirectiveSet::empty(),
            &signals,
            &PriceSchedule::default(),
        );
        assert_eq!(d.verdict, AccessVerdict::Allow);
        assert_eq!(d.reason, AccessReason::PurposeExcluded);
    }

    #[test]
    fn priced_host_pays() {
        let mut prices = PriceSchedule::default();
        prices.per_domain.insert("example.org".into(), 5000);
        let d = resolve_access(
            &request(Purpose::Training),
            &CrawlDirectiveSet::empty(),
            &[],
            &prices,
        );
        assert_eq!(d.verdict, AccessVerdict::Pay);
        assert_eq!(d.price_micro_units, 5000);
        assert_eq!(d.reason, AccessReason::Priced);
    }

    #[test]
    fn header_non_reservation_overrides_meta_reservation() {
        let signals = vec![
            TdmSignal {
                source: TdmSource::HttpHeader,
                reserved: false,
                scope: TdmScope::All,
            },
            TdmSignal {
                source: TdmSource::MetaTag,
                reserved: true,
                scope: TdmScope::All,
            },
        ];
        let d = resolve_access(
            &request(Purpose::Training),
            &CrawlDirectiveSet::empty(),
            &signals,
            &PriceSchedule::default(),
        );
        assert_eq!(d.verdict, AccessVerdict::Allow);
        assert_eq!(d.reason, AccessReason::Open);
    }

    #[test]
    fn equal_precedence_reservation_wins() {
        let signals = vec![
            TdmSignal {
                source: TdmSource::MetaTag,
                reserved: false,
                scope: TdmScope::All,
            },
            TdmSignal {
                source: TdmSource::MetaTag,
                reserved: true,
                scope: TdmScope::TrainingOnly,
            },
        ];
        let d = resolve_access(
            &request(Purpose::Training),
            &CrawlDirectiveSet::empty(),
            &signals,
            &PriceSchedule::default(),
        );
        assert_eq!(d.verdict, AccessVerdict::Deny);
    }

    #[test]
    fn decision_is_permutation_independent() {
        let mut signals = vec![
            TdmSignal::terms_file(true),
            TdmSignal {
                source: TdmSource::MetaTag,
                reserved: false,
                scope: TdmScope::All,
            },
            TdmSignal {
                source: TdmSource::HttpHeader,
                reserved: true,
                scope: TdmScope::All,
            },
        ];
        let baseline = resolve_access(
            &request(Purpose::Training),
            &CrawlDirectiveSet::empty(),
            &signals,
            &PriceSchedule::default(),
        );
        // All 6 permutations of 3 elements.
        for _ in 0..3 {
            signals.rotate_left(1);
            for swap in 0..2 {
                let mut s = signals.clone();
                if swap == 1 {
                    s.swap(0, 1);
                }
                let d = resolve_access(
                    &request(Purpose::Training),
                    &CrawlDirectiveSet::empty(),
                    &s,
                    &PriceSchedule::default(),
                );
                assert_eq!(d, baseline);
            }
        }
    }

    #[test]
    fn robots_deny_beats_everything() {
        let set = group(vec![(RuleKind::Disallow, "/")]);
        let mut prices = PriceSchedule::default();
        prices.per_domain.insert("example.org".into(), 9);
        let d = resolve_access(&request(Purpose::Search), &set, &[], &prices);
        assert_eq!(d.verdict, AccessVerdict::Deny);
        assert_eq!(d.reason, AccessReason::RobotsDisallow);
        assert_eq!(d.price_micro_units, 0);
    }

    #[test]
    fn split_url_handles_garbage() {
        assert_eq!(split_url("not a url"), ("".into(), "/".into()));
        assert_eq!(
            split_url("https://example.org/a/b?q=1"),
            ("example.org".into(), "/a/b".into())
        );
    }
}
