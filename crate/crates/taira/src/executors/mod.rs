//! The four executor agents the manager dispatches to: Searcher, Item
//! Retriever, Task Interpreter, and Interactor — plus the search client they
//! share. All executors are stateless given their dependencies, so concurrent
//! sessions can share them freely.

mod interactor;
mod interpreter;
mod retriever;
mod search_client;
mod searcher;

pub use interactor::interactor;
pub use interpreter::interpret;
pub use retriever::{item_retriever, parse_preferences, PreferenceParse};
pub use search_client::{FixtureSearchClient, SearchClient, SearchResult};
pub use searcher::searcher;
pub(crate) use searcher::truncate_words;

use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};

/// Every recommendation list carries exactly this many items.
pub const ITEMS_PER_LIST: usize = 10;

/// Labels are capped at this many words (longer ones are truncated).
pub const MAX_LABEL_WORDS: usize = 5;

/// One recommended item reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRef {
    pub id: String,
    pub title: String,
}

/// One labeled recommendation list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationList {
    /// Short description of what the list recommends (≤ 5 words).
    #[serde(rename = "recommendation")]
    pub label: String,
    pub items: Vec<ItemRef>,
}

/// The final response: one or more labeled 10-item lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub lists: Vec<RecommendationList>,
}

impl RecommendationResponse {
    /// Structural invariants: ≥1 list, non-empty labels, exactly
    /// [`ITEMS_PER_LIST`] items per list.
    pub fn validate(&self) -> Result<()> {
        if self.lists.is_empty() {
            return Err(TairaError::InvalidInput("a response needs at least one list".into()));
        }
        for list in &self.lists {
            if list.label.trim().is_empty() {
                return Err(TairaError::InvalidInput("a list label is empty".into()));
            }
            if list.items.len() != ITEMS_PER_LIST {
                return Err(TairaError::InvalidInput(format!(
                    "list \"{}\" has {} items; exactly {ITEMS_PER_LIST} required",
                    list.label,
                    list.items.len()
                )));
            }
        }
        Ok(())
    }

    /// Every item id across all lists, in order.
    pub fn item_ids(&self) -> Vec<&str> {
        self.lists.iter().flat_map(|l| l.items.iter().map(|i| i.id.as_str())).collect()
    }
}
