//! Plan and task-history data types: the manager's phased plans, the
//! append-only record of executed subtasks, and full session trajectories.
//!
//! Plan JSON uses the wire shape the manager prompt requests —
//! `{"user_input", "main_task", "sub_tasks": {"task_1": {"content", "agent"}}}`
//! with agent names `SearcherAgent` / `ItemRetrievalAgent` / `InteractorAgent`
//! / `PlannerAgent` — and parsing is separated from validation so invalid
//! plans can be reported back to the model for one corrective re-prompt.

use crate::thought::MatchResult;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

/// The agent roles a subtask can be assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "SearcherAgent")]
    Searcher,
    #[serde(rename = "ItemRetrievalAgent")]
    ItemRetriever,
    #[serde(rename = "InteractorAgent")]
    Interactor,
    #[serde(rename = "PlannerAgent")]
    Planner,
}

impl AgentKind {
    /// The name used in prompts and plan JSON.
    pub fn wire_name(self) -> &'static str {
        match self {
            AgentKind::Searcher => "SearcherAgent",
            AgentKind::ItemRetriever => "ItemRetrievalAgent",
            AgentKind::Interactor => "InteractorAgent",
            AgentKind::Planner => "PlannerAgent",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Self> {
        match name {
            "SearcherAgent" => Some(AgentKind::Searcher),
            "ItemRetrievalAgent" => Some(AgentKind::ItemRetriever),
            "InteractorAgent" => Some(AgentKind::Interactor),
            "PlannerAgent" => Some(AgentKind::Planner),
            _ => None,
        }
    }

    /// Planner and Interactor close a phased plan; nothing may follow them.
    pub fn is_terminal(self) -> bool {
        matches!(self, AgentKind::Planner | AgentKind::Interactor)
    }
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubTaskStatus {
    Pending,
    Done,
    Failed,
}

/// One planned step, dispatched to a single agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubTask {
    /// 1-based position, from the `task_N` key.
    pub index: usize,
    pub content: String,
    pub agent: AgentKind,
    pub status: SubTaskStatus,
    pub attempts: u32,
}

/// A phased plan: the manager's output for phase `phase`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub phase: usize,
    pub user_input: String,
    pub main_task: String,
    pub sub_tasks: Vec<SubTask>,
}

impl Plan {
    pub fn terminal_agent(&self) -> Option<AgentKind> {
        self.sub_tasks.last().map(|task| task.agent)
    }
}

/// Parses and validates plan JSON. `allow_planner` is false for single-shot
/// strategies, whose plans must terminate in `InteractorAgent`.
///
/// Returns the reason string on failure — it is fed back to the model in the
/// corrective re-prompt, so reasons are written for the model, not for logs.
pub fn parse_plan_json(
    value: &serde_json::Value,
    phase: usize,
    allow_planner: bool,
) -> Result<Plan, String> {
    let object = value.as_object().ok_or("the plan must be a JSON object")?;
    let user_input = object.get("user_input").and_then(|v| v.as_str()).unwrap_or("").to_string();
    let main_task = object.get("main_task").and_then(|v| v.as_str()).unwrap_or("").to_string();
    let sub_tasks_value = object
        .get("sub_tasks")
        .ok_or("the plan is missing the \"sub_tasks\" object")?
        .as_object()
        .ok_or("\"sub_tasks\" must be a JSON object of task_N entries")?;

    let mut sub_tasks = Vec::new();
    for (key, entry) in sub_tasks_value {
        let index: usize = key
            .strip_prefix("task_")
            .and_then(|n| n.parse().ok())
            .filter(|n| *n >= 1)
            .ok_or_else(|| format!("sub-task key \"{key}\" is not of the form task_N"))?;
        let entry = entry.as_object().ok_or_else(|| format!("\"{key}\" must be an object"))?;
        let content = entry
            .get("content")
            .and_then(|v| v.as_str())
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| format!("\"{key}\" is missing a non-empty \"content\""))?;
        let agent_name = entry
            .get("agent")
            .and_then(|v| v.as_str())
            .ok_or_else(|| format!("\"{key}\" is missing the \"agent\" field"))?;
        let agent = AgentKind::from_wire_name(agent_name).ok_or_else(|| {
            format!(
                "\"{key}\" names unknown agent \"{agent_name}\"; use SearcherAgent, \
ItemRetrievalAgent, InteractorAgent or PlannerAgent"
            )
        })?;
        if sub_tasks.iter().any(|t: &SubTask| t.index == index) {
            return Err(format!("duplicate sub-task index {index}"));
        }
        sub_tasks.push(SubTask {
            index,
            content: content.to_string(),
            agent,
            status: SubTaskStatus::Pending,
            attempts: 0,
        });
    }
    sub_tasks.sort_by_key(|task| task.index);

    validate_sub_tasks(&sub_tasks, allow_planner)?;
    Ok(Plan { phase, user_input, main_task, sub_tasks })
}

/// The plan contract: non-empty; exactly one Planner/Interactor subtask, in
/// the last position; Planner only where allowed.
fn validate_sub_tasks(sub_tasks: &[SubTask], allow_planner: bool) -> Result<(), String> {
    if sub_tasks.is_empty() {
        return Err("the plan has no sub-tasks".into());
    }
    let terminal_count = sub_tasks.iter().filter(|t| t.agent.is_terminal()).count();
    if terminal_count == 0 {
        return Err("the last sub-task must use PlannerAgent or InteractorAgent".into());
    }
    if terminal_count > 1 {
        return Err("PlannerAgent/InteractorAgent may be used only once, as the last sub-task".into());
    }
    let last = sub_tasks.last().expect("non-empty");
    if !last.agent.is_terminal() {
        return Err(format!(
            "a {} sub-task appears before the end; PlannerAgent/InteractorAgent must come last",
            sub_tasks.iter().find(|t| t.agent.is_terminal()).expect("count=1").agent.wire_name()
        ));
    }
    if !allow_planner && last.agent == AgentKind::Planner {
        return Err("PlannerAgent is not available; the plan must end with InteractorAgent".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Task history
// ---------------------------------------------------------------------------

/// One executed subtask: what was asked, what the executor got, what it said.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub phase: usize,
    pub subtask_index: usize,
    pub agent: AgentKind,
    pub content: String,
    /// The interpreted executor input (the task interpreter's output).
    pub input: String,
    pub output: String,
    /// For ItemRetriever records: the (id, title) pairs retrieved, feeding the
    /// interactor's anti-hallucination check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved: Option<Vec<(String, String)>>,
}

/// The information set accumulated across phases (append-only).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskHistory {
    records: Vec<HistoryRecord>,
}

impl TaskHistory {
    pub fn push(&mut self, record: HistoryRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_output(&self) -> &str {
        self.records.last().map(|r| r.output.as_str()).unwrap_or("")
    }

    /// All (id, title) pairs produced by ItemRetriever records, in order.
    pub fn retrieved_items(&self) -> Vec<(String, String)> {
        self.records
            .iter()
            .filter_map(|r| r.retrieved.as_ref())
            .flatten()
            .cloned()
            .collect()
    }

    /// Prompt rendering: one numbered line per record, or "(none)".
    pub fn render(&self) -> String {
        if self.records.is_empty() {
            return "(none)".to_string();
        }
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    "{}. [{}] task: {} | input: {} | output: {}",
                    i + 1,
                    r.agent.wire_name(),
                    r.content,
                    r.input,
                    r.output
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Why a session ended without a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// Phase count exceeded `max_phases` (or the step loop ran out of steps).
    IterationThreshold,
    /// The model's output could not be parsed/validated within budget.
    MalformedOutput,
    /// An executor failed beyond the retry limit.
    ExecutorFailure,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::IterationThreshold => "iteration_threshold",
            FailureReason::MalformedOutput => "malformed_output",
            FailureReason::ExecutorFailure => "executor_failure",
        }
    }
}

/// Everything a session did: plans per phase, the task history, the match
/// decision, and the outcome. This is the "task route" distillation reads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub query: String,
    pub plans: Vec<Plan>,
    pub history: TaskHistory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_result: Option<MatchResult>,
    /// True when planning ran on the novel path (solution descriptions only).
    pub novel_path: bool,
    /// True when the session failed — or, after judging, when the simulated
    /// user rejected the response (callers update this post-verdict).
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
}

impl Trajectory {
    pub fn new(query: impl Into<String>) -> Self {
        Trajectory { query: query.into(), ..Trajectory::default() }
    }

    /// The rendering handed to the thought-pattern distiller.
    pub fn render_route(&self) -> String {
        let mut route = format!("User query: {}\n", self.query);
        for record in self.history.records() {
            route.push_str(&format!(
                "Phase {}, task {} ({}): {} => {}\n",
                record.phase,
                record.subtask_index,
                record.agent.wire_name(),
                record.content,
                record.output
            ));
        }
        let outcome = match (&self.failure_reason, self.failed) {
            (Some(reason), _) => format!("failed ({})", reason.name()),
            (None, true) => "failed (rejected by the user)".to_string(),
            (None, false) => "succeeded".to_string(),
        };
        route.push_str(&format!("Outcome: the task {outcome}."));
        route
    }
}
