//! The simulated user's verdict on a recommendation response.
//!
//! The simulator model scores every slot of every 10-item list; this module
//! then enforces the scoring rules mechanically: scores snap to the allowed
//! grid (ties round down), the top score is reserved for the target item,
//! and a failed verdict zeroes everything. A reply that never parses is a
//! failure verdict, not an error — only transport problems bubble up.

use super::{render_sample_product, QuerySpec};
use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use crate::executors::{RecommendationResponse, ITEMS_PER_LIST};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts;
use serde::{Deserialize, Serialize};

/// The score grid a judged slot may take.
pub const ALLOWED_SCORES: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// The simulated user's judgment of one recommendation response: an overall
/// pass/fail plus one score per slot of each list, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimVerdict {
    pub failed: bool,
    pub reason: String,
    pub scores: Vec<Vec<f64>>,
}

impl SimVerdict {
    /// A failure verdict with all-zero scores shaped like `response`.
    fn failure(reason: impl Into<String>, lists: usize) -> Self {
        SimVerdict {
            failed: true,
            reason: reason.into(),
            scores: vec![vec![0.0; ITEMS_PER_LIST]; lists],
        }
    }

    /// Sum of all slot scores.
    pub fn total(&self) -> f64 {
        self.scores.iter().flatten().sum()
    }
}

/// Judges `response` against the query's target item. The raw model scores
/// are normalized: snapped to the allowed grid, the top score downgraded
/// wherever the slot is not the target item, and zeroed wholesale when the
/// verdict is a failure.
pub fn judge(
    spec: &QuerySpec,
    response: &RecommendationResponse,
    catalog: &Catalog,
    llm: &LlmClient,
) -> Result<SimVerdict> {
    let target = catalog
        .get(&spec.target_item_id)
        .ok_or_else(|| TairaError::UnknownItem(spec.target_item_id.clone()))?;
    if response.lists.is_empty() {
        return Err(TairaError::InvalidInput("the response holds no recommendation lists".into()));
    }

    let req = ChatRequest::new(
        CallTag::Simulator,
        prompts::SIMULATOR_SYSTEM,
        prompts::simulator_prompt(
            &spec.query_text,
            &render_sample_product(target),
            &spec.scenario_description,
            &render_lists(response),
        ),
    );
    let lists = response.lists.len();
    let value = match llm.complete_json(&req, &|v| verdict_shape(v, lists)) {
        Ok(value) => value,
        Err(TairaError::MalformedOutput { attempts, .. }) => {
            log::warn!("verdict unparseable after {attempts} attempts; recording a failure");
            return Ok(SimVerdict::failure("unparseable", lists));
        }
        Err(other) => return Err(other),
    };

    let failed = value["fail"].as_bool().expect("shape-checked");
    let reason = value["reason"].as_str().unwrap_or("").to_string();
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(lists);
    for (list, raw_list) in response.lists.iter().zip(value["scores"].as_array().unwrap()) {
        let mut row = Vec::with_capacity(ITEMS_PER_LIST);
        for (item, raw) in list.items.iter().zip(raw_list.as_array().unwrap()) {
            let mut score = clamp_score(raw.as_f64().expect("shape-checked"));
            if score == 2.0 && item.id != spec.target_item_id {
                log::debug!("top score on non-target item {}; downgrading to 1", item.id);
                score = 1.0;
            }
            row.push(score);
        }
        scores.push(row);
    }
    if failed {
        return Ok(SimVerdict { failed, reason, scores: vec![vec![0.0; ITEMS_PER_LIST]; lists] });
    }
    Ok(SimVerdict { failed, reason, scores })
}

/// Rendering of the recommendation lists shown to the simulator.
fn render_lists(response: &RecommendationResponse) -> String {
    response
        .lists
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let items = list
                .items
                .iter()
                .enumerate()
                .map(|(j, item)| format!("  {}. {} [id: {}]", j + 1, item.title, item.id))
                .collect::<Vec<_>>()
                .join("\n");
            format!("List {} ({}):\n{items}", i + 1, list.label)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Shape check for the verdict JSON: a `fail` boolean and a numeric `scores`
/// grid matching the response (one 10-number row per list).
fn verdict_shape(value: &serde_json::Value, lists: usize) -> std::result::Result<(), String> {
    if !value["fail"].is_boolean() {
        return Err("`fail` must be a boolean".into());
    }
    let Some(rows) = value["scores"].as_array() else {
        return Err("`scores` must be an array of score lists".into());
    };
    if rows.len() != lists {
        return Err(format!("`scores` must hold {lists} list(s), one per recommendation list"));
    }
    for row in rows {
        let Some(row) = row.as_array() else {
            return Err("each `scores` entry must be an array of numbers".into());
        };
        if row.len() != ITEMS_PER_LIST {
            return Err(format!("each score list must hold exactly {ITEMS_PER_LIST} numbers"));
        }
        if row.iter().any(|n| !n.is_number()) {
            return Err("scores must be pure numbers".into());
        }
    }
    Ok(())
}

/// Snaps a raw score to the allowed grid; ties round toward the lower score.
fn clamp_score(raw: f64) -> f64 {
    let mut best = ALLOWED_SCORES[0];
    let mut best_dist = (raw - best).abs();
    for &allowed in &ALLOWED_SCORES[1..] {
        let dist = (raw - allowed).abs();
        if dist < best_dist {
            best = allowed;
            best_dist = dist;
        }
    }
    if (raw - best).abs() > f64::EPSILON {
        log::debug!("score {raw} is off the grid; clamped to {best}");
    }
    best
}
