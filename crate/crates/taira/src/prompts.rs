//! Prompt templates for every agent role.
//!
//! These texts are the behavioural contract of the system: the manager's
//! planning instructions, the executor-agent catalog handed to the manager and
//! the task interpreter, the per-executor instructions, the thought-pattern
//! distiller, and the simulated user. Keep edits here deliberate — tests pin
//! key phrases (JSON formats, the last-subtask rule, score semantics).

use crate::thought::ThoughtPattern;

// ---------------------------------------------------------------------------
// Shared agent catalog
// ---------------------------------------------------------------------------

/// System prompt of the manager agent (planning and replanning).
pub const MANAGER_SYSTEM: &str = "You are a manager agent of a conversational recommendation system. \
You are good at analyzing user inquiry intent and planning tasks. In addition, you are good at \
transferring the high-level thinking processes of previous successful experiences to current problems.";

/// The executor-agent catalog ("agents instruction") shown to the manager and
/// the task interpreter. `include_planner` is false for single-shot planning
/// variants, which must finish in one plan and may not schedule a replan.
pub fn agents_instruction(include_planner: bool) -> String {
    let mut text = String::from(
        "Here are the available agents and their functionalities:\n\
- ItemRetrievalAgent: Input a recommendation request containing product attributes (for example: \
'Please recommend me a sugar-free energy drink.' Such requirement needs to be converted into specific \
item attributes through SearcherAgent), and recommend a list containing 10 specific items based on \
keyword similarity. A search by SearcherAgent can only retrieve one target for one requirement. When \
multiple targets need to be recommended, ItemRetrievalAgent needs to be called multiple times.\n\
- SearcherAgent: Input a short query and search for product attributes that meet the needs from a \
knowledge base of product attributes and usage, based on keyword similarity. The query target can only \
be the attributes that meet the target requirements, such as 'what kind of shorts are suitable for \
mountain climbing'. Note that it is the attributes and not other things. You cannot find other \
information through this agent. The attributes returned by SearcherAgent are guaranteed to be \
retrieved in ItemRetrievalAgent. Even if you think they are not appropriate, they are the closest \
answers to the search input.\n\
- InteractorAgent: Generate a final response with one or more recommend result lists (the input does \
not need to include the recommended items)\n",
    );
    if include_planner {
        text.push_str(
            "- PlannerAgent: Input the re-plan goal (for example, The task history provides a list of \
available product types. Select the two most suitable ones and then enter: 'Generate a recommendation \
plan for type A and type B'. The types of products must be specific product names, with one \
recommendation for each type. The number of product types should not exceed 2. And it should not \
include product types that have been recommended before.) and Regenerate subsequent tasks in the same \
way as the initial plan based on the information obtained from the executed subtasks. It marks the end \
of a phased plan. This Agent can **ONLY be placed at the end of a phased plan!!!**\n",
        );
    }
    text
}

// ---------------------------------------------------------------------------
// Manager: planning and replanning
// ---------------------------------------------------------------------------

/// How pattern knowledge enters a planning prompt.
pub enum PatternGuidance<'a> {
    /// A matched pattern: the full template is followed.
    Matched(&'a ThoughtPattern),
    /// No suitable pattern: only the solution descriptions of the nearest
    /// patterns are shown, as inspiration. Thought templates stay out.
    Novel(Vec<&'a str>),
    /// No pattern knowledge at all (ablated or baseline planners).
    None,
}

/// Renders a full pattern for prompt insertion.
fn render_pattern(pattern: &ThoughtPattern) -> String {
    format!(
        "task description: {}\nsolution description: {}\nthought template: {}",
        pattern.task_description, pattern.solution_description, pattern.thought_template
    )
}

fn plan_body(user_input: &str, agents: &str) -> String {
    format!(
        "Here are the available agents and their functionalities: {agents}\n\
The user's input is: \"{user_input}\".\n\
Based on the user's input, create a task plan in JSON format with sub-tasks.\n\
The output should be in JSON format as follows:\n\
{{\n\
  \"user_input\": \"{user_input}\",\n\
  \"main_task\": \"...\",\n\
  \"sub_tasks\": {{\n\
    \"task_1\": {{\"content\": \"...\", \"agent\": \"...\"}},\n\
    \"task_2\": {{\"content\": \"...\", \"agent\": \"...\"}},\n\
    ......\n\
  }}\n\
}}\n\
'Content' is what the agent should do. And 'agent' specifies the agent to execute each sub-task. \
Remember: PlannerAgent and InteractorAgent **must** be the last sub-task in the plan. No sub-tasks \
are allowed after a task is assigned to either PlannerAgent or InteractorAgent. You can only use \
PlannerAgent or InteractorAgent once, and it must be in the final sub-task. There should be no \
sub-tasks after that. If you think the current task can be completed with a single plan, choose an \
InteractorAgent, otherwise, choose a PlannerAgent to update the plan after getting enough information.\n"
    )
}

fn guidance_section(guidance: &PatternGuidance) -> String {
    match guidance {
        PatternGuidance::Matched(pattern) => format!(
            "You need to follow the following thinking template to complete the task.\n\
This template is a high-level thinking process summarized from the successful experience of similar \
tasks: {}\n\
Among them, solution description is the thinking mode at the level of ideas, while thought template \
is the thinking mode at the level of execution.\n\
You need to judge whether this template is suitable for solving this problem.\n\
If it is suitable, you should follow it. If it is not suitable, you can only get inspiration from \
solution description and imitate the mode of thought template to solve the problem.\n",
            render_pattern(pattern)
        ),
        PatternGuidance::Novel(solutions) if !solutions.is_empty() => {
            let mut section = String::from(
                "No thinking template from previous experience matches this task. Below are solution \
descriptions summarized from related tasks. You can only get inspiration from these solution \
descriptions to solve the problem:\n",
            );
            for solution in solutions {
                section.push_str("- ");
                section.push_str(solution);
                section.push('\n');
            }
            section
        }
        _ => String::new(),
    }
}

/// Initial-plan prompt (phase 0).
pub fn plan_prompt(user_input: &str, agents: &str, guidance: &PatternGuidance) -> String {
    format!("{}{}", plan_body(user_input, agents), guidance_section(guidance))
}

/// Replanning prompt: the plan body plus the executed-task history and the
/// same pattern guidance, continued.
pub fn replan_prompt(
    user_input: &str,
    agents: &str,
    history: &str,
    guidance: &PatternGuidance,
) -> String {
    let continuation = match guidance {
        PatternGuidance::Matched(pattern) => format!(
            "You need to continue to follow the following thinking template to complete the task.\n\
This template is a high-level thinking process summarized from the successful experience of similar \
tasks: {}\n\
Among them, solution description is the thinking mode at the level of ideas, while thought template \
is the thinking mode at the level of execution.\n\
You need to judge whether this template is suitable for solving this problem.\n\
If it is suitable, you should follow it. If it is not suitable, you can only get inspiration from \
solution description and imitate the mode of thought template to solve the problem.\n",
            render_pattern(pattern)
        ),
        other => guidance_section(other),
    };
    format!(
        "{}The following is the history of tasks executed so far: {history}\n{continuation}",
        plan_body(user_input, agents)
    )
}

/// Appended once when a proposed plan violates the planning contract.
pub fn plan_correction(reason: &str) -> String {
    format!(
        "\n\nYour previous plan was invalid: {reason}. Produce a corrected plan in the same JSON \
format. Remember: PlannerAgent and InteractorAgent **must** be the last sub-task, used exactly once, \
and every other sub-task must use SearcherAgent or ItemRetrievalAgent."
    )
}

// ---------------------------------------------------------------------------
// Executor agents
// ---------------------------------------------------------------------------

/// System prompt of the item retriever agent.
pub const RETRIEVER_SYSTEM: &str =
    "You're a recommendation assistant and you're good at recognizing user preferences.";

/// Preference-extraction prompt of the item retriever. `domain_noun` names the
/// product domain ("clothing", "beauty product", "music").
pub fn retriever_prefs_prompt(user_input: &str, domain_noun: &str) -> String {
    format!(
        "The user's query is: {user_input}. From this, please extract the user's requirements and \
preferences for {domain_noun}. Please fill in this format and only output the filled content: \
[{domain_noun} type]; [preference]. {domain_noun} type is the basic attribute and gender distinction. \
Other attributes are in preference. The total length must not exceed 15 words. Separate multiple \
attributes with ' '. Include as many of the key points of user requirements as possible, and the \
basic attributes of the product are prioritized, followed by the detailed attributes. You only need \
to reflect the preferences in the user input without making any inferences."
    )
}

/// System prompt of the searcher agent.
pub const SEARCHER_SYSTEM: &str =
    "You are a searcher agent and you excel at acquiring previously unknown knowledge through search results.";

/// Search-summary prompt of the searcher agent.
pub fn searcher_prompt(query: &str, context: &str) -> String {
    format!(
        "Based on the following search results, provide an insight into the target query: {query}.\n\
Search Results: {context}\n\
The output should only contain specific descriptions. The output is a keyword combination of no more \
than 20 words, not a descriptive sentence. You should give a specific answer to the question."
    )
}

/// System prompt of the task interpreter.
pub const INTERPRETER_SYSTEM: &str = "You are a task planning agent of a conversational \
recommendation system.\nYou are good at analyzing user inquiry intent and planning tasks.";

/// Input-translation prompt of the task interpreter.
pub fn interpreter_prompt(
    agents: &str,
    history: &str,
    content: &str,
    next_agent: &str,
    previous_output: &str,
) -> String {
    format!(
        "{agents}\n\
Here is the previous task history: {history}\n\
The current task is \"{content}\".\n\
The next agent to complete this task is: \"{next_agent}\".\n\
The previous task output is: \"{previous_output}\".\n\
Based on this information, generate the query for the next agent to make sure it can complete the \
task and generate the right output. Output only the query."
    )
}

/// System prompt of the interactor agent.
pub const INTERACTOR_SYSTEM: &str = "You are a response agent of a conversational recommendation \
system. You are good at analyzing provided information and generate recommendation response.";

/// JSON shape of the interactor's reply.
pub const INTERACTOR_JSON_FORMAT: &str = "{\"lists\": [{\"recommendation\": \"...\", \
\"items\": [{\"id\": \"...\", \"title\": \"...\"}, ...]}]}";

/// Final-response prompt of the interactor agent.
pub fn interactor_prompt(history: &str, instruction: &str) -> String {
    format!(
        "Here is the previous task history: {history}\n\
Based on the task history, and the instruction from manager: {instruction}\n\
If you've got enough recommend list, generate a response with one or more lists, each list containing \
10 recommended items (id and title).\n\
You need to correctly understand the intent in the **complete** task history and include a list of \
**all** the recommendations needed in the final response. Especially when there are multiple plans \
for the task execution.\n\
Output the lists using the following JSON format: {INTERACTOR_JSON_FORMAT}\n\
In the 'recommendation', you should use no more than 5 words to describe the basic type of product \
you are recommending, especially the product category. Then the 'items' is a list of recommendations \
for this target.\n\
In item information, you must keep as many keywords as possible in the input words when searching for \
these items. You cannot remove these keywords because they will be used to evaluate the quality of \
recommendations.\n\
You must output 10 items for each list."
    )
}

/// Appended once when the interactor cites item ids absent from the history.
pub fn interactor_correction(unknown_ids: &[String]) -> String {
    format!(
        "\n\nYour previous reply listed item ids that do not appear in the task history: {}. \
Only recommend items whose ids appear in the retrieval outputs of the task history. Reply again with \
the same JSON format.",
        unknown_ids.join(", ")
    )
}

// ---------------------------------------------------------------------------
// Thought pattern distillation and matching
// ---------------------------------------------------------------------------

/// System prompt of the thought-pattern distiller.
pub const DISTILL_SYSTEM: &str = "You are a thought pattern updater and specialize in refining \
cognitive processes to enhance performance.";

/// JSON shape of the distiller's reply.
pub const PATTERN_JSON_FORMAT: &str = "{\"task_description\": \"...\", \
\"solution_description\": \"...\", \"thought_template\": \"...\"}";

/// Pattern-update prompt: old pattern, task route, and expert opinion, each
/// rendered or "none".
pub fn distill_prompt(old_pattern: &str, task_route: &str, expert_opinion: &str) -> String {
    format!(
        "The thought pattern is a high-level idea extracted from the task execution path, which \
contains the following three parts:\n\
1. Task Description: Used to characterize a task, it is abstract and general, does not include any \
specific task information, and only describes what type a task belongs to.\n\
2. Solution Description: Used to describe the conceptual-level guidance of solving a problem, it is \
more like the key to solving a class of problems told by a domain expert.\n\
3. Thought Template: A template for a path to complete a task, used to indicate the generation of a \
plan. Its steps are written as 'Step N: ...' lines, optionally grouped under 'Phase N: ...' headings.\n\
Based on the given task route and expert opinion, assess how to adjust the old pattern: {old_pattern}.\n\
Task Route: {task_route}\n\
Expert Opinion: {expert_opinion}\n\
The output should align with the structure and tone of the old pattern, maintaining clarity and \
effectiveness.\n\
Provide the revised thought pattern as a concise, actionable statement that improves upon the old \
approach. Output it in JSON format: {PATTERN_JSON_FORMAT}"
    )
}

/// Selector prompt for thought-pattern matching: pick one candidate or none.
pub fn selector_prompt(query: &str, candidates: &[(String, String)]) -> String {
    let mut listing = String::new();
    for (id, task_description) in candidates {
        listing.push_str(&format!("- {id}: {task_description}\n"));
    }
    format!(
        "The user query is: \"{query}\".\n\
Below are candidate thought patterns from previous tasks, each identified by an id and described by \
its task description:\n{listing}\
Identify the one pattern whose task description matches the type of this query. Reply in JSON format: \
{{\"selected\": \"<id>\"}}. If none of the candidates suits the query, reply {{\"selected\": \"none\"}}."
    )
}

// ---------------------------------------------------------------------------
// User simulation: query generation and judging
// ---------------------------------------------------------------------------

/// System prompt for the query-construction calls.
pub const QUERY_GEN_SYSTEM: &str = "You are constructing realistic shopper queries for testing an \
interactive recommender system.";

/// Profile-summary prompt over a user's interaction history.
pub fn profile_prompt(items_rendering: &str) -> String {
    format!(
        "Below are products a user interacted with, most recent last:\n{items_rendering}\n\
Summarize this user's preferences in two or three sentences. Use only attributes and terms that \
appear in the listed products; do not invent traits."
    )
}

/// Atomic-query prompt: a single direct request for the target item.
pub fn atomic_query_prompt(profile: &str, target_rendering: &str) -> String {
    format!(
        "User profile: {profile}\n\
Target product: {target_rendering}\n\
Write one short, direct request this user could send to a recommender system that the target product \
would satisfy. Mention the product type and its key attributes. Output only the request text."
    )
}

/// Final-query prompt: recast the atomic query for a scenario and opener.
pub fn final_query_prompt(
    atomic_query: &str,
    scenario_description: &str,
    opener: &str,
) -> String {
    format!(
        "Base request: {atomic_query}\n\
Interaction scenario: {scenario_description}\n\
Rewrite the base request as a single natural query following that scenario. The query must begin \
with the phrase \"{opener}\". Output only the query text."
    )
}

/// System prompt of the simulated user.
pub const SIMULATOR_SYSTEM: &str = "You are a shopper who is asking the interactive recommender \
system for a certain need. You need a product that can truly meet your needs.";

/// JSON shape of the simulated user's verdict. `scores` holds one 10-number
/// list per recommendation list, in order.
pub const VERDICT_JSON_FORMAT: &str =
    "{\"reason\": \"...\", \"fail\": false, \"scores\": [[0, 0.5, 1, 2, ...], ...]}";

/// Judging prompt of the simulated user.
pub fn simulator_prompt(
    query: &str,
    sample_product: &str,
    scenario_description: &str,
    recommendation_lists: &str,
) -> String {
    format!(
        "Your query that contains complete requirements is: {query}.\n\
There are such sample products that can meet part of your requirement: {sample_product}.\n\
In particular, your requirements in this scenario have the following characteristics: \
{scenario_description}\n\
Imagine you are in this real-life situation and carefully understand your needs.\n\
You will be given one or more 10-item recommendation lists. The items in each list point to the same \
target.\n\
Each listing has a description of the recommended target.\n\
First, you need to determine whether these targets together can fully meet your requirements. If not, \
then the recommendation will be considered a failure.\n\
Then, you need to judge whether each of these targets meets your requirements.\n\
If the requirements are not met, then this list is considered a failure and all items in it will \
receive 0 points.\n\
Next, you need to determine whether each product meets your needs.\n\
The recommendation list for the recommendation target given by the recommendation system is: \
{recommendation_lists}.\n\
Output a list of 10 ratings to express your judgment.\n\
The order in the rating list should correspond to the order of the items in the recommendation list.\n\
If it meets the requirements, it will correspond to 1 point, if it does not meet the requirements, it \
will correspond to 0 points. In particular, if it is exactly the same as the sample product, it will \
be given 2 points. You also need to decide whether each product meets your preferences in some way. \
Then, among the products that are scored 1, change the score of those that do not meet your \
preferences to 0.5.\n\
You should first output your reason, and then output the fail tag and final score lists in a JSON \
format: '{VERDICT_JSON_FORMAT}', the score is a pure number."
    )
}

// ---------------------------------------------------------------------------
// Baseline planners
// ---------------------------------------------------------------------------

/// System prompt of the step-loop (thought/action/observation) planners.
pub const REACT_SYSTEM: &str = "You are the controller of a conversational recommendation system. \
You solve the user's request through a loop of Thought, Action, and Observation.";

/// One step of the thought/action/observation loop.
pub fn react_step_prompt(query: &str, agents: &str, scratchpad: &str) -> String {
    format!(
        "{agents}\n\
The user's request is: \"{query}\".\n\
Interaction so far:\n{scratchpad}\n\
Decide the next step. Reply in JSON format: {{\"thought\": \"...\", \"action\": \"<agent name>\", \
\"action_input\": \"...\"}}. The action must be one of SearcherAgent, ItemRetrievalAgent, or \
InteractorAgent. Use InteractorAgent when you have gathered enough retrieved items to respond; its \
action_input is the instruction for composing the final recommendation lists."
    )
}

/// Post-failure reflection prompt (the self-correction retry of the step-loop
/// planner).
pub fn reflection_prompt(query: &str, scratchpad: &str) -> String {
    format!(
        "The user's request was: \"{query}\".\n\
The attempt below failed to satisfy the user:\n{scratchpad}\n\
Write a short reflection (two sentences at most) on what went wrong and what to do differently on \
the next attempt. Output only the reflection."
    )
}

/// Single-shot devise-then-execute planning preface.
pub const PLAN_AND_SOLVE_PREFACE: &str = "Let's first understand the user's request and devise a \
complete plan covering every needed recommendation. Then let's carry out the plan step by step in \
one pass, so the final sub-task must produce the response.";
