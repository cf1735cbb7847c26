//! The simulated user: personalized query-suite generation and response
//! judging.
//!
//! Query generation pipelines per sampled user: profile summary → atomic
//! query for the user's target item → final query recast under a sampled
//! interaction scenario and opener phrase. Scenarios carry fixed difficulty
//! tiers and sampling weights; opener phrases have their own weights. Both
//! samplers are seeded, so suites are reproducible bit for bit.

mod judge;

pub use judge::{judge, SimVerdict, ALLOWED_SCORES};

use crate::catalog::{build_profile, Catalog, Item, UserHistory};
use crate::error::{Result, TairaError};
use crate::executors::truncate_words;
use crate::llm::{CallTag, ChatRequest, LlmClient};
use crate::prompts;
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

/// Words of an item description kept in the "sample product" rendering.
pub const SAMPLE_PRODUCT_WORDS: usize = 40;

// ---------------------------------------------------------------------------
// Scenarios, difficulties, openers
// ---------------------------------------------------------------------------

/// Query difficulty tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}`; use easy, medium or hard")),
        }
    }
}

/// The seven interaction scenarios a query can follow. Each has a fixed
/// difficulty tier and a sampling weight (the observed share, in percent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Describe the product directly.
    DirectReference,
    /// Propose a usage occasion.
    Occasions,
    /// Ask for additional items matching a product.
    Matching,
    /// Require several different product types at once.
    MultiTypes,
    /// Request a bundle of products for one purpose.
    Bundle,
    /// State the requirement ambiguously, without the usage scene.
    Ambiguous,
    /// Cover several occasions in one request.
    MultiOccasions,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::DirectReference,
        Scenario::Occasions,
        Scenario::Matching,
        Scenario::MultiTypes,
        Scenario::Bundle,
        Scenario::Ambiguous,
        Scenario::MultiOccasions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::DirectReference => "direct_reference",
            Scenario::Occasions => "occasions",
            Scenario::Matching => "matching",
            Scenario::MultiTypes => "multi_types",
            Scenario::Bundle => "bundle",
            Scenario::Ambiguous => "ambiguous",
            Scenario::MultiOccasions => "multi_occasions",
        }
    }

    /// Sampling weight, in percent of the full mix.
    pub fn weight(self) -> f64 {
        match self {
            Scenario::DirectReference => 33.2,
            Scenario::Occasions => 13.6,
            Scenario::Matching => 11.2,
            Scenario::MultiTypes => 9.7,
            Scenario::Bundle => 10.7,
            Scenario::Ambiguous => 11.5,
            Scenario::MultiOccasions => 10.1,
        }
    }

    /// The fixed difficulty tier of this scenario.
    pub fn difficulty(self) -> Difficulty {
        match self {
            Scenario::DirectReference => Difficulty::Easy,
            Scenario::Occasions | Scenario::Matching | Scenario::MultiTypes => Difficulty::Medium,
            Scenario::Bundle | Scenario::Ambiguous | Scenario::MultiOccasions => Difficulty::Hard,
        }
    }

    /// The scenario characterization handed to the query writer and the
    /// judging simulator.
    pub fn description(self) -> &'static str {
        match self {
            Scenario::DirectReference => {
                "You describe the product directly: name the product type and the concrete \
attributes you need."
            }
            Scenario::Occasions => {
                "You propose a usage occasion: ask for a product suitable for a specific \
real-life occasion rather than listing attributes."
            }
            Scenario::Matching => {
                "You ask for additional matching products: request one or more further items \
that go well with a product you already have in mind."
            }
            Scenario::MultiTypes => {
                "You need several different types of products in one request, and each type \
should be recommended separately."
            }
            Scenario::Bundle => {
                "You request a bundle: a set of complementary products that together serve one \
purpose or outfit."
            }
            Scenario::Ambiguous => {
                "Your requirement is ambiguous: you want a certain type of product but are not \
clear about the specific using scene or demand, and you say so."
            }
            Scenario::MultiOccasions => {
                "You state requirements for several different occasions at once, and each \
occasion should be covered."
            }
        }
    }
}

/// The opener phrases queries begin with, each with its sampling weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opener {
    CanYouRecommend,
    IAmLookingFor,
    DoYouHaveAnySuggestions,
    CanYouHelpMeChoose,
    WhatsTheBest,
    ShowMe,
    INeedAdviceOnChoosing,
    WhereCanIFind,
}

impl Opener {
    pub const ALL: [Opener; 8] = [
        Opener::CanYouRecommend,
        Opener::IAmLookingFor,
        Opener::DoYouHaveAnySuggestions,
        Opener::CanYouHelpMeChoose,
        Opener::WhatsTheBest,
        Opener::ShowMe,
        Opener::INeedAdviceOnChoosing,
        Opener::WhereCanIFind,
    ];

    /// The literal phrase the query must contain.
    pub fn phrase(self) -> &'static str {
        match self {
            Opener::CanYouRecommend => "Can you recommend",
            Opener::IAmLookingFor => "I am looking for",
            Opener::DoYouHaveAnySuggestions => "Do you have any suggestions",
            Opener::CanYouHelpMeChoose => "Can you help me choose",
            Opener::WhatsTheBest => "What's the best",
            Opener::ShowMe => "Show me",
            Opener::INeedAdviceOnChoosing => "I need advice on choosing",
            Opener::WhereCanIFind => "Where can I find",
        }
    }

    /// Sampling weight, in percent of the full mix.
    pub fn weight(self) -> f64 {
        match self {
            Opener::CanYouRecommend => 18.5,
            Opener::IAmLookingFor => 16.6,
            Opener::DoYouHaveAnySuggestions => 15.5,
            Opener::CanYouHelpMeChoose => 14.2,
            Opener::WhatsTheBest => 10.5,
            Opener::ShowMe => 9.2,
            Opener::INeedAdviceOnChoosing => 8.9,
            Opener::WhereCanIFind => 6.6,
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Samples a scenario. With a difficulty, sampling is restricted to that
/// tier, with the tier's weights renormalized; without one, the full
/// seven-way mix is used.
pub fn sample_scenario(rng: &mut impl Rng, difficulty: Option<Difficulty>) -> Scenario {
    let pool: Vec<Scenario> = match difficulty {
        Some(d) => Scenario::ALL.iter().copied().filter(|s| s.difficulty() == d).collect(),
        None => Scenario::ALL.to_vec(),
    };
    let weights: Vec<f64> = pool.iter().map(|s| s.weight()).collect();
    let dist = WeightedIndex::new(&weights).expect("weights are positive");
    pool[dist.sample(rng)]
}

/// Samples an opener phrase by the full weight mix.
pub fn sample_opener(rng: &mut impl Rng) -> Opener {
    let weights: Vec<f64> = Opener::ALL.iter().map(|o| o.weight()).collect();
    let dist = WeightedIndex::new(&weights).expect("weights are positive");
    Opener::ALL[dist.sample(rng)]
}

// ---------------------------------------------------------------------------
// Query specs and suites
// ---------------------------------------------------------------------------

/// One generated evaluation query. Suites are stored as JSON lines; a spec's
/// position in its suite is its identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_text: String,
    pub user_id: String,
    pub target_item_id: String,
    pub scenario: Scenario,
    pub difficulty: Difficulty,
    pub semantic: Opener,
    pub scenario_description: String,
}

impl QuerySpec {
    /// Consistency of the fixed mappings and the opener-phrase rule.
    pub fn validate(&self) -> Result<()> {
        if self.scenario.difficulty() != self.difficulty {
            return Err(TairaError::InvalidInput(format!(
                "scenario {} is {} but the spec says {}",
                self.scenario.name(),
                self.scenario.difficulty().name(),
                self.difficulty.name()
            )));
        }
        if !self.query_text.contains(self.semantic.phrase()) {
            return Err(TairaError::InvalidInput(format!(
                "query does not contain its opener phrase \"{}\"",
                self.semantic.phrase()
            )));
        }
        Ok(())
    }
}

/// Writes a suite as JSON lines.
pub fn save_suite(path: impl AsRef<Path>, suite: &[QuerySpec]) -> Result<()> {
    let mut file = std::fs::File::create(path.as_ref())?;
    for spec in suite {
        serde_json::to_writer(&mut file, spec)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a JSON-lines suite, validating every spec (with its line number).
pub fn load_suite(path: impl AsRef<Path>) -> Result<Vec<QuerySpec>> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut suite = Vec::new();
    for (line_index, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let spec: QuerySpec =
            serde_json::from_str(&line).map_err(|e| TairaError::MalformedRecord {
                line: line_index + 1,
                message: e.to_string(),
            })?;
        spec.validate().map_err(|e| TairaError::MalformedRecord {
            line: line_index + 1,
            message: e.to_string(),
        })?;
        suite.push(spec);
    }
    Ok(suite)
}

/// The "sample product" rendering of a target item: its title plus the first
/// words of its description.
pub fn render_sample_product(item: &Item) -> String {
    format!("{} — {}", item.title, truncate_words(&item.description, SAMPLE_PRODUCT_WORDS))
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// How many queries to generate per difficulty tier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyCounts {
    pub easy: usize,
    pub medium: usize,
    pub hard: usize,
}

impl DifficultyCounts {
    pub fn total(&self) -> usize {
        self.easy + self.medium + self.hard
    }

    fn of(&self, difficulty: Difficulty) -> usize {
        match difficulty {
            Difficulty::Easy => self.easy,
            Difficulty::Medium => self.medium,
            Difficulty::Hard => self.hard,
        }
    }
}

/// Generates a query suite: per query, one user (sampled without
/// replacement), that user's profile and target item, an atomic request for
/// the target, and a final query recast under a sampled scenario and opener.
///
/// Draw order under the seeded generator: first the user shuffle, then per
/// query a scenario draw and an opener draw. Model calls never touch the
/// generator, so a fixed seed plus a scripted backend reproduces the suite
/// exactly. Easy queries come first, then medium, then hard.
pub fn generate_queries(
    catalog: &Catalog,
    histories: &[UserHistory],
    counts: DifficultyCounts,
    seed: u64,
    llm: &LlmClient,
) -> Result<Vec<QuerySpec>> {
    if counts.total() == 0 {
        return Err(TairaError::InvalidInput("requested zero queries".into()));
    }
    if histories.len() < counts.total() {
        return Err(TairaError::InvalidInput(format!(
            "insufficient histories: {} requested, {} available (each query uses a distinct user)",
            counts.total(),
            histories.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..histories.len()).collect();
    order.shuffle(&mut rng);
    let mut users = order.into_iter();

    let mut suite = Vec::with_capacity(counts.total());
    for difficulty in Difficulty::ALL {
        for _ in 0..counts.of(difficulty) {
            let history = &histories[users.next().expect("count checked against len")];
            let target_id = history.target_item().to_string();
            let target = catalog
                .get(&target_id)
                .ok_or_else(|| TairaError::UnknownItem(target_id.clone()))?;

            let profile = build_profile(history, catalog, llm)?;
            let target_rendering = render_sample_product(target);
            let atomic = complete_text(
                llm,
                prompts::atomic_query_prompt(&profile, &target_rendering),
            )?;

            let scenario = sample_scenario(&mut rng, Some(difficulty));
            let opener = sample_opener(&mut rng);
            let query_text = final_query(llm, &atomic, scenario, opener)?;

            suite.push(QuerySpec {
                query_text,
                user_id: history.user_id.clone(),
                target_item_id: target_id,
                scenario,
                difficulty,
                semantic: opener,
                scenario_description: scenario.description().to_string(),
            });
        }
    }
    Ok(suite)
}

/// One query-generation call; an empty reply is malformed output.
fn complete_text(llm: &LlmClient, user_prompt: String) -> Result<String> {
    let req = ChatRequest::new(CallTag::QueryGen, prompts::QUERY_GEN_SYSTEM, user_prompt);
    let reply = llm.complete(&req)?;
    let reply = reply.trim().to_string();
    if reply.is_empty() {
        return Err(TairaError::MalformedOutput { attempts: 1, last_output: reply });
    }
    Ok(reply)
}

/// Builds the final query and enforces the opener-phrase rule: one corrective
/// re-prompt when the phrase is missing, then a mechanical prefix.
fn final_query(
    llm: &LlmClient,
    atomic: &str,
    scenario: Scenario,
    opener: Opener,
) -> Result<String> {
    let prompt = prompts::final_query_prompt(atomic, scenario.description(), opener.phrase());
    let text = complete_text(llm, prompt.clone())?;
    if text.contains(opener.phrase()) {
        return Ok(text);
    }
    log::warn!("final query lacks its opener \"{}\"; re-prompting once", opener.phrase());
    let corrected = format!(
        "{prompt}\n\nYour previous reply did not begin with the phrase \"{}\". Rewrite the query \
so it does. Output only the query text.",
        opener.phrase()
    );
    let text = complete_text(llm, corrected)?;
    if text.contains(opener.phrase()) {
        return Ok(text);
    }
    log::warn!("re-prompt still lacks the opener; prefixing mechanically");
    Ok(format!("{} {text}", opener.phrase()))
}
