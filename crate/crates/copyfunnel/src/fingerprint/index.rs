//! Hamming-radius index over 64-bit fingerprints.
//!
//! A BK-style metric tree with a linear-scan fallback below 1,000 entries.
//! Both paths answer exactly the same queries; the property tests hold them
//! to the linear-scan oracle.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::hamming;

/// Below this entry count queries fall back to a plain linear scan.
pub const LINEAR_SCAN_THRESHOLD: usize = 1000;

#[derive(Debug, Clone)]
struct Node {
    bits: u64,
    /// Indexes into `entries` sharing these exact bits.
    entry_idx: Vec<u32>,
    /// (distance to this node, child node index), unordered.
    children: Vec<(u32, u32)>,
}

/// Set of (bits, work_id) pairs answering `query_within` by Hamming radius.
#[derive(Debug, Clone, Default)]
pub struct FingerprintIndex {
    entries: Vec<(u64, String)>,
    seen: HashSet<(u64, String)>,
    nodes: Vec<Node>,
}

impl FingerprintIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert an entry. Duplicate (bits, work_id) pairs are ignored
    /// (set semantics).
    pub fn insert(&mut self, bits: u64, work_id: &str) {
        let key = (bits, work_id.to_string());
        if !self.seen.insert(key) {
            return;
        }
        self.entries.push((bits, work_id.to_string()));
        let entry_idx = (self.entries.len() - 1) as u32;

        if self.nodes.is_empty() {
            self.nodes.push(Node {
                bits,
                entry_idx: vec![entry_idx],
                children: Vec::new(),
            });
            return;
        }
        let mut cur = 0usize;
        loop {
            let d = hamming(self.nodes[cur].bits, bits);
            if d == 0 {
                self.nodes[cur].entry_idx.push(entry_idx);
                return;
            }
            if let Some(&(_, child)) = self.nodes[cur].children.iter().find(|(cd, _)| *cd == d) {
                cur = child as usize;
                continue;
            }
            let new_node = self.nodes.len() as u32;
            self.nodes.push(Node {
                bits,
                entry_idx: vec![entry_idx],
                children: Vec::new(),
            });
            self.nodes[cur].children.push((d, new_node));
            return;
        }
    }

    /// All entries within `radius` of the probe, ordered by distance then
    /// work_id.
    pub fn query_within(&self, probe: u64, radius: u32) -> Vec<(String, u32)> {
        let mut hits = if self.entries.len() < LINEAR_SCAN_THRESHOLD {
            self.linear_scan(probe, radius)
        } else {
            self.tree_scan(probe, radius)
        };
        hits.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        hits
    }

    fn linear_scan(&self, probe: u64, radius: u32) -> Vec<(String, u32)> {
        self.entries
            .iter()
            .filter_map(|(bits, id)| {
                let d = hamming(*bits, probe);
                (d <= radius).then(|| (id.clone(), d))
            })
            .collect()
    }

    fn tree_scan(&self, probe: u64, radius: u32) -> Vec<(String, u32)> {
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return hits;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let d = hamming(node.bits, probe);
            if d <= radius {
                for &ei in &node.entry_idx {
                    let (_, id) = &self.entries[ei as usize];
                    hits.push((id.clone(), d));
                }
            }
            // Triangle inequality: a child at edge distance cd can hold a
            // match only if |cd - d| <= radius.
            for &(cd, child) in &node.children {
                if cd.abs_diff(d) <= radius {
                    stack.push(child as usize);
                }
            }
        }
        hits
    }
}

/// One line of the fingerprint dump format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FingerprintDumpLine {
    pub kind: String,
    pub bits_hex: String,
    pub work_id: String,
}

/// Serialize index entries as JSONL `{kind, bits_hex, work_id}` lines.
pub fn dump_index(index: &FingerprintIndex, kind: &str) -> String {
    let mut out = String::new();
    for (bits, work_id) in &index.entries {
        let line = FingerprintDumpLine {
            kind: kind.to_string(),
            bits_hex: format!("{bits:016x}"),
            work_id: work_id.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("dump line serializes"));
        out.push('\n');
    }
    out
}

/// Parse a JSONL fingerprint dump back into an index, keeping only lines of
/// the requested kind.
pub fn load_index_dump(dump: &str, kind: &str) -> Result<FingerprintIndex, String> {
    let mut index = FingerprintIndex::new();
    for (lineno, line) in dump.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: FingerprintDumpLine = serde_json::from_str(line)
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if parsed.kind != kind {
            continue;
        }
        let bits = u64::from_str_radix(&parsed.bits_hex, 16)
            .map_err(|e| format!("line {}: bad bits_hex: {e}", lineno + 1))?;
        index.insert(bits, &parsed.work_id);
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_index_returns_nothing() {
        let idx = FingerprintIndex::new();
        assert!(idx.query_within(0xabcd, 64).is_empty());
    }

    #[test]
    fn exact_probe_radius_zero() {
        let mut idx = FingerprintIndex::new();
        idx.insert(0xdead_beef, "work");
        assert_eq!(
            idx.query_within(0xdead_beef, 0),
            vec![("work".to_string(), 0)]
        );
        assert!(idx.query_within(0xdead_beee, 0).is_empty());
    }

    #[test]
    fn duplicate_pairs_collapse() {
        let mut idx = FingerprintIndex::new();
        idx.insert(1, "a");
        idx.insert(1, "a");
        idx.insert(1, "b");
        assert_eq!(idx.len(), 2);
        let hits = idx.query_within(1, 0);
        assert_eq!(
            hits,
            vec![("a".to_string(), 0), ("b".to_string(), 0)]
        );
    }

    #[test]
    fn tree_path_matches_linear_scan() {
        // Push past the linear threshold so the BK traversal is exercised.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut idx = FingerprintIndex::new();
        let mut all: Vec<(u64, String)> = Vec::new();
        for i in 0..2500u32 {
            let bits: u64 = rng.random();
            let id = format!("w{i}");
            idx.insert(bits, &id);
            all.push((bits, id));
        }
        for _ in 0..50 {
            let probe: u64 = rng.random();
            for radius in [0u32, 3, 10, 32] {
                let mut expect: Vec<(String, u32)> = all
                    .iter()
                    .filter_map(|(b, id)| {
                        let d = hamming(*b, probe);
                        (d <= radius).then(|| (id.clone(), d))
                    })
                    .collect();
                expect.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
                assert_eq!(idx.query_within(probe, radius), expect);
            }
        }
    }

    #[test]
    fn dump_round_trips() {
        let mut idx = FingerprintIndex::new();
        idx.insert(0x1234, "a");
        idx.insert(0xffff_ffff_ffff_ffff, "b");
        let dump = dump_index(&idx, "DHASH");
        let back = load_index_dump(&dump, "DHASH").unwrap();
        assert_eq!(back.query_within(0x1234, 0), vec![("a".to_string(), 0)]);
        assert_eq!(back.len(), 2);
        // Other kinds are filtered out.
        let none = load_index_dump(&dump, "SIMHASH").unwrap();
        assert!(none.is_empty());
    }
}
