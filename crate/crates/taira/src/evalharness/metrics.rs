//! Per-query recommendation metrics over judged verdicts.
//!
//! A slot scores a hit when the simulated user rated it at least 1; the 0.5
//! grade (meets the need but not the preferences) counts as a miss for the
//! hit rate yet still contributes its gain to ranking quality. Multi-list
//! verdicts pool slots for the hit rate and average ranking quality per list.

use super::QueryOutcome;
use crate::error::{Result, TairaError};
use crate::usersim::SimVerdict;

/// Minimum slot score that counts as a hit.
pub const HIT_THRESHOLD: f64 = 1.0;

/// Fraction of recommended slots the user rated a hit (score ≥ 1), pooled
/// across all lists of the verdict.
pub fn hr_at_10(verdict: &SimVerdict) -> f64 {
    let slots: usize = verdict.scores.iter().map(Vec::len).sum();
    if slots == 0 {
        return 0.0;
    }
    let hits = verdict.scores.iter().flatten().filter(|s| **s >= HIT_THRESHOLD).count();
    hits as f64 / slots as f64
}

/// Normalized discounted cumulative gain of the verdict, averaged over its
/// lists. Gains are the raw slot scores; a list with no gain scores 0.
pub fn ndcg_at_10(verdict: &SimVerdict) -> f64 {
    if verdict.scores.is_empty() {
        return 0.0;
    }
    let total: f64 = verdict.scores.iter().map(|row| ndcg_row(row)).sum();
    total / verdict.scores.len() as f64
}

/// NDCG of one score row: DCG over positions 1..=n with discount log2(p+1),
/// normalized by the DCG of the descending-sorted row.
fn ndcg_row(gains: &[f64]) -> f64 {
    let mut ideal = gains.to_vec();
    ideal.sort_by(|a, b| b.partial_cmp(a).expect("scores are finite"));
    let idcg = dcg(&ideal);
    if idcg == 0.0 {
        return 0.0;
    }
    dcg(gains) / idcg
}

fn dcg(gains: &[f64]) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(i, gain)| gain / ((i + 2) as f64).log2())
        .sum()
}

/// Share of outcomes that ended in success: the session produced a response
/// and the simulated user did not fail it.
pub fn success_rate(outcomes: &[QueryOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(TairaError::InvalidInput(
            "success rate over zero outcomes is undefined".into(),
        ));
    }
    let successes = outcomes.iter().filter(|o| o.succeeded).count();
    Ok(successes as f64 / outcomes.len() as f64)
}
