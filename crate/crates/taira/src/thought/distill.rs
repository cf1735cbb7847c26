//! Thought-pattern distillation: turning task routes, expert-corrected
//! failures, and direct expert text into new or updated patterns.

use super::{PatternSource, ThoughtPattern, UNTAGGED_SCENARIO};
use crate::error::{Result, TairaError};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::orchestrator::Trajectory;
use crate::prompts;

/// What a distillation run draws on. At least one of `route` (with executed
/// subtasks) or `expert_opinion` must be present.
#[derive(Default)]
pub struct DistillInputs<'a> {
    /// The executed task route; `None` (or an empty history) means the
    /// pattern is written from expert text alone.
    pub route: Option<&'a Trajectory>,
    pub expert_opinion: Option<&'a str>,
    /// The pattern being revised; the result keeps its id (replace in place).
    pub old: Option<&'a ThoughtPattern>,
    /// Scenario tag for the result; falls back to the old pattern's tag, then
    /// to "untagged".
    pub scenario_tag: Option<&'a str>,
    /// Id for a freshly minted pattern; required when `old` is absent.
    pub new_id: Option<&'a str>,
}

/// Determines the provenance of the distilled pattern.
///
/// A present-but-empty route counts as absent. A failed route without expert
/// opinion — and no route with no opinion — is rejected: there is nothing
/// trustworthy to distill from.
fn resolve_source(route: Option<&Trajectory>, opinion: Option<&str>) -> Result<PatternSource> {
    let route_present = route.is_some_and(|t| !t.history.is_empty());
    match (route_present, opinion.is_some()) {
        (false, true) => Ok(PatternSource::ExpertDirect),
        (false, false) => Err(TairaError::InvalidInput(
            "distillation needs an executed route or an expert opinion".into(),
        )),
        (true, _) => {
            let failed = route.expect("route present").failed;
            match (failed, opinion.is_some()) {
                (false, _) => Ok(PatternSource::AgentSuccess),
                (true, true) => Ok(PatternSource::AgentFailedExpertCorrected),
                (true, false) => Err(TairaError::InvalidInput(
                    "a failed route can only be distilled together with an expert opinion".into(),
                )),
            }
        }
    }
}

/// Runs the pattern updater on the given inputs and returns the revised
/// pattern. The caller commits it to a store (`upsert` replaces `old` in
/// place when ids are kept).
pub fn distill(inputs: &DistillInputs, llm: &LlmClient) -> Result<ThoughtPattern> {
    let source = resolve_source(inputs.route, inputs.expert_opinion)?;
    let id = match (inputs.old, inputs.new_id) {
        (Some(old), _) => old.id.clone(),
        (None, Some(new_id)) => new_id.to_string(),
        (None, None) => {
            return Err(TairaError::InvalidInput(
                "distilling a new pattern requires new_id".into(),
            ))
        }
    };

    let old_rendering = match inputs.old {
        Some(old) => format!(
            "task description: {}\nsolution description: {}\nthought template: {}",
            old.task_description, old.solution_description, old.thought_template
        ),
        None => "none".to_string(),
    };
    let route_rendering = match inputs.route {
        Some(route) if !route.history.is_empty() => route.render_route(),
        _ => "none".to_string(),
    };
    let opinion_rendering = inputs.expert_opinion.unwrap_or("none");

    let req = ChatRequest::new(
        CallTag::Distill,
        prompts::DISTILL_SYSTEM,
        prompts::distill_prompt(&old_rendering, &route_rendering, opinion_rendering),
    );
    let value = llm.complete_json(&req, &|v| {
        for field in ["task_description", "solution_description", "thought_template"] {
            match v.get(field).and_then(|f| f.as_str()) {
                Some(text) if !text.trim().is_empty() => {}
                _ => return Err(format!("missing non-empty string field `{field}`")),
            }
        }
        let template = v["thought_template"].as_str().expect("checked above");
        if !template.contains("Step") {
            return Err("thought_template must contain \"Step N:\" lines".to_string());
        }
        Ok(())
    })?;

    let scenario_tag = inputs
        .scenario_tag
        .map(str::to_string)
        .or_else(|| inputs.old.and_then(|old| old.scenario_tag.clone()))
        .unwrap_or_else(|| UNTAGGED_SCENARIO.to_string());

    let pattern = ThoughtPattern {
        id,
        task_description: value["task_description"].as_str().expect("schema checked").to_string(),
        solution_description: value["solution_description"]
            .as_str()
            .expect("schema checked")
            .to_string(),
        thought_template: value["thought_template"].as_str().expect("schema checked").to_string(),
        source,
        scenario_tag: Some(scenario_tag),
        embedding: Vec::new(),
    };
    pattern.validate()?;
    Ok(pattern)
}
