//! Thought-augmented multi-agent interactive recommendation.
//!
//! A manager agent matches distilled *thought patterns* to a user query,
//! plans phased sub-tasks, and dispatches them to executor agents (searcher,
//! item retriever, task interpreter, interactor). A simulated user generates
//! graded query suites and judges the recommendations, and an evaluation
//! harness aggregates success rate, HR@10, and NDCG@10 with paired t-tests,
//! ablations, and a novel-task mode.
//!
//! Start with the runnable examples (`cargo run --example <name>`):
//!
//! | example            | shows                                              |
//! |--------------------|----------------------------------------------------|
//! | `ingest_catalog`   | catalog ingestion, vocabulary, persisted store     |
//! | `rank_items`       | BM25 / embedding ranking and attribute mapping     |
//! | `scripted_session` | a full two-phase manager session, step by step     |
//! | `match_patterns`   | thought-pattern matching and the novel-task path   |
//! | `distill_pattern`  | distilling a pattern from a failed route + expert  |
//! | `generate_queries` | seeded scenario/semantic query-suite generation    |
//! | `evaluate_suite`   | the evaluation harness end to end, with a report   |
//! | `react_session`    | the step-loop baseline planners                    |
//!
//! The thin `taira` binary wraps the same library behind subcommands
//! (`ingest`, `genqueries`, `ask`, `evaluate`, `patterns`, `distill`,
//! `report`).

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod evalharness;
pub mod executors;
pub mod llm;
pub mod orchestrator;
pub mod prompts;
pub mod retrieval;
pub mod thought;
pub mod usersim;

pub use error::{Result, TairaError};
