//! The task interpreter: converts a subtask's description plus the task
//! history into the concrete input string for the next executor.

use crate::error::{Result, TairaError};
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::orchestrator::{AgentKind, TaskHistory};
use crate::prompts;

/// Generates the input for `next_agent`'s execution of the subtask
/// `content`. The prompt carries the agent catalog, the rendered history,
/// and the previous subtask's output; the reply is the input string.
pub fn interpret(
    content: &str,
    history: &TaskHistory,
    next_agent: AgentKind,
    llm: &LlmClient,
    agents_instruction: &str,
) -> Result<String> {
    if next_agent == AgentKind::Planner {
        return Err(TairaError::InvalidInput(
            "PlannerAgent takes no interpreted input; replanning is the manager's job".into(),
        ));
    }
    let req = ChatRequest::new(
        CallTag::Interpreter,
        prompts::INTERPRETER_SYSTEM,
        prompts::interpreter_prompt(
            agents_instruction,
            &history.render(),
            content,
            next_agent.wire_name(),
            history.last_output(),
        ),
    );
    let input = llm.complete(&req)?.trim().to_string();
    if input.is_empty() {
        return Err(TairaError::MalformedOutput { attempts: 1, last_output: input });
    }
    Ok(input)
}
