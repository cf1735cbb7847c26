//! Token and latency accounting, keyed by call site.

use super::CallTag;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Duration;

/// Counters for one call site. All fields are monotonically non-decreasing.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagStats {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Wall-clock time spent in the provider, in microseconds. Kept out of
    /// canonical run reports (it varies run to run); surfaced via telemetry.
    pub latency_micros: u64,
}

impl TagStats {
    fn add(&mut self, other: &TagStats) {
        self.calls += other.calls;
        self.prompt_tokens += other.prompt_tokens;
        self.completion_tokens += other.completion_tokens;
        self.latency_micros += other.latency_micros;
    }
}

/// Thread-safe per-tag counters. Updates are serialized internally, so
/// concurrent sessions never observe torn counters. Unknown tags are
/// unrepresentable: recording is keyed by the [`CallTag`] enum.
#[derive(Debug, Default)]
pub struct TokenLedger {
    per_tag: Mutex<BTreeMap<CallTag, TagStats>>,
}

impl TokenLedger {
    pub fn new() -> Self {
        TokenLedger::default()
    }

    /// Adds one call's counts under `tag`.
    pub fn record(&self, tag: CallTag, prompt_tokens: u64, completion_tokens: u64, latency: Duration) {
        let mut per_tag = self.per_tag.lock().unwrap();
        let stats = per_tag.entry(tag).or_default();
        stats.add(&TagStats {
            calls: 1,
            prompt_tokens,
            completion_tokens,
            latency_micros: latency.as_micros() as u64,
        });
    }

    /// Number of calls recorded under `tag`.
    pub fn calls(&self, tag: CallTag) -> u64 {
        self.per_tag
            .lock()
            .unwrap()
            .get(&tag)
            .map(|s| s.calls)
            .unwrap_or(0)
    }

    /// Copy of the per-tag counters (only tags that have been recorded).
    pub fn snapshot(&self) -> BTreeMap<CallTag, TagStats> {
        self.per_tag.lock().unwrap().clone()
    }

    /// Sum over all tags; equals the per-tag sum after any interleaving.
    pub fn total(&self) -> TagStats {
        let mut total = TagStats::default();
        for stats in self.per_tag.lock().unwrap().values() {
            total.add(stats);
        }
        total
    }

    /// Folds another ledger's snapshot into this one (used to merge
    /// per-session ledgers into a run-level ledger in a deterministic order).
    pub fn merge_snapshot(&self, snapshot: &BTreeMap<CallTag, TagStats>) {
        let mut per_tag = self.per_tag.lock().unwrap();
        for (tag, stats) in snapshot {
            per_tag.entry(*tag).or_default().add(stats);
        }
    }
}

/// `ceil(chars / 4)` — the approximation used when a backend reports no usage.
pub fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}
