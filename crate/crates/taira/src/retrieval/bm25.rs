//! Lexical BM25 ranking over the catalog.
//!
//! Documents are `title ⊕ description ⊕ joined attributes`. The index is a
//! term → (item id, term frequency) postings map persisted as line-delimited
//! JSON, from which document lengths and collection statistics are fully
//! reconstructible.

use super::{sort_ranked, tokenize, RankedList};
use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

const POSTINGS_FILE: &str = "postings.jsonl";

/// Inverted index with per-document lengths derived from the postings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bm25Index {
    postings: BTreeMap<String, BTreeMap<String, u64>>,
    doc_lengths: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct PostingLine {
    term: String,
    postings: Vec<(String, u64)>,
}

impl Bm25Index {
    pub fn build(catalog: &Catalog) -> Self {
        let mut index = Bm25Index::default();
        for item in catalog.items() {
            for token in tokenize(&item.document_text()) {
                *index
                    .postings
                    .entry(token)
                    .or_default()
                    .entry(item.id.clone())
                    .or_insert(0) += 1;
                *index.doc_lengths.entry(item.id.clone()).or_insert(0) += 1;
            }
        }
        index
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    fn avg_doc_length(&self) -> f64 {
        if self.doc_lengths.is_empty() {
            return 0.0;
        }
        self.doc_lengths.values().sum::<u64>() as f64 / self.doc_lengths.len() as f64
    }

    /// Scores every document containing at least one query term.
    fn score_all(&self, query_terms: &[String]) -> BTreeMap<String, f64> {
        let n = self.doc_count() as f64;
        let avgdl = self.avg_doc_length();
        let mut scores: BTreeMap<String, f64> = BTreeMap::new();
        for term in query_terms {
            let Some(postings) = self.postings.get(term) else { continue };
            let df = postings.len() as f64;
            let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
            for (id, tf) in postings {
                let tf = *tf as f64;
                let dl = self.doc_lengths[id] as f64;
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl);
                *scores.entry(id.clone()).or_insert(0.0) += idf * tf * (BM25_K1 + 1.0) / (tf + norm);
            }
        }
        scores
    }

    /// Writes the postings file into `dir` (one term per line).
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(POSTINGS_FILE))?);
        for (term, postings) in &self.postings {
            let line = PostingLine {
                term: term.clone(),
                postings: postings.iter().map(|(id, tf)| (id.clone(), *tf)).collect(),
            };
            writeln!(out, "{}", serde_json::to_string(&line)?)?;
        }
        Ok(())
    }

    /// Reads an index written by [`Bm25Index::save`].
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(dir.as_ref().join(POSTINGS_FILE))?;
        let mut index = Bm25Index::default();
        for (line_index, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: PostingLine =
                serde_json::from_str(&line).map_err(|e| TairaError::MalformedRecord {
                    line: line_index + 1,
                    message: e.to_string(),
                })?;
            for (id, tf) in &parsed.postings {
                *index.doc_lengths.entry(id.clone()).or_insert(0) += tf;
            }
            index.postings.insert(parsed.term, parsed.postings.into_iter().collect());
        }
        Ok(index)
    }
}

/// Ranks the top-`k` items for `query_terms` by BM25 (`k1`=1.2, `b`=0.75).
/// Zero-scoring documents are excluded; exact ties break by ascending id.
pub fn bm25_rank(query_terms: &[String], index: &Bm25Index, k: usize) -> Result<RankedList> {
    if k == 0 {
        return Err(TairaError::InvalidInput("k must be positive".into()));
    }
    if query_terms.is_empty() {
        return Err(TairaError::InvalidInput("query terms must be non-empty".into()));
    }
    let normalized: Vec<String> = query_terms
        .iter()
        .flat_map(|t| tokenize(t))
        .collect();
    let mut entries: Vec<(String, f64)> = index
        .score_all(&normalized)
        .into_iter()
        .filter(|(_, score)| *score > 0.0)
        .collect();
    sort_ranked(&mut entries);
    entries.truncate(k);
    Ok(RankedList { entries, query_terms: normalized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ingest_catalog;
    use std::io::Cursor;

    fn fixture_index() -> Bm25Index {
        // Documents (after tokenization):
        //   a1: thermal pajama set warm thermal pajama for winter   (8 tokens)
        //   a2: cotton pajama light cotton pajama                   (5 tokens)
        //   a3: leather boot rugged boot                            (4 tokens)
        let lines = [
            r#"{"id":"a1","title":"Thermal Pajama Set","description":"warm thermal pajama for","attributes":"Winter"}"#,
            r#"{"id":"a2","title":"Cotton Pajama","description":"light cotton","attributes":"Pajama"}"#,
            r#"{"id":"a3","title":"Leather Boots","description":"rugged","attributes":"Boots"}"#,
        ];
        let catalog = ingest_catalog(Cursor::new(lines.join("\n"))).unwrap();
        Bm25Index::build(&catalog)
    }

    /// Brute-force BM25 over the same token streams, for oracle equivalence.
    fn brute_force(query: &[&str], docs: &[(&str, &str)]) -> Vec<(String, f64)> {
        let tokenized: Vec<(String, Vec<String>)> = docs
            .iter()
            .map(|(id, text)| (id.to_string(), tokenize(text)))
            .collect();
        let n = tokenized.len() as f64;
        let avgdl =
            tokenized.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / tokenized.len() as f64;
        let mut out = Vec::new();
        for (id, tokens) in &tokenized {
            let mut score = 0.0;
            for term in query {
                let term = tokenize(term).remove(0);
                let df = tokenized.iter().filter(|(_, t)| t.contains(&term)).count() as f64;
                if df == 0.0 {
                    continue;
                }
                let tf = tokens.iter().filter(|t| **t == term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * tokens.len() as f64 / avgdl);
                score += idf * tf * (BM25_K1 + 1.0) / (tf + norm);
            }
            if score > 0.0 {
                out.push((id.clone(), score));
            }
        }
        super::super::sort_ranked(&mut out);
        out
    }

    #[test]
    fn ranks_by_term_coverage_and_excludes_zero_scores() {
        let index = fixture_index();
        let query = vec!["thermal".to_string(), "pajama".to_string()];
        let ranked = bm25_rank(&query, &index, 10).unwrap();
        assert_eq!(ranked.ids(), vec!["a1", "a2"], "a3 matches nothing and must be excluded");
        // Scores pinned against an independently computed oracle
        // (N=3, dl = 8/5/4, avgdl = 17/3, df(thermal)=1, df(pajama)=2).
        assert!((ranked.entries[0].1 - 1.7878467807719634).abs() < 1e-12);
        assert!((ranked.entries[1].1 - 0.6683701799920349).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_oracle() {
        let index = fixture_index();
        let docs = [
            ("a1", "Thermal Pajama Set warm thermal pajama for Winter"),
            ("a2", "Cotton Pajama light cotton Pajama"),
            ("a3", "Leather Boots rugged Boots"),
        ];
        for query in [vec!["pajama"], vec!["thermal", "pajama"], vec!["boots"], vec!["cotton", "winter"]] {
            let owned: Vec<String> = query.iter().map(|s| s.to_string()).collect();
            let ranked = bm25_rank(&owned, &index, 10).unwrap();
            let oracle = brute_force(&query, &docs);
            assert_eq!(ranked.entries.len(), oracle.len(), "query {query:?}");
            for ((id, score), (oid, oscore)) in ranked.entries.iter().zip(&oracle) {
                assert_eq!(id, oid, "query {query:?}");
                assert!((score - oscore).abs() < 1e-12, "query {query:?}");
            }
        }
    }

    #[test]
    fn absent_terms_yield_an_empty_list() {
        let index = fixture_index();
        let ranked = bm25_rank(&["sofa".to_string()], &index, 10).unwrap();
        assert!(ranked.entries.is_empty());
    }

    #[test]
    fn identical_docs_tie_break_ascending() {
        let lines = [
            r#"{"id":"z2","title":"Same","description":"same text","attributes":"Same"}"#,
            r#"{"id":"z1","title":"Same","description":"same text","attributes":"Same"}"#,
        ];
        let catalog = ingest_catalog(Cursor::new(lines.join("\n"))).unwrap();
        let index = Bm25Index::build(&catalog);
        let ranked = bm25_rank(&["same".to_string()], &index, 10).unwrap();
        assert_eq!(ranked.ids(), vec!["z1", "z2"]);
    }

    #[test]
    fn k_zero_is_rejected_and_k_truncates() {
        let index = fixture_index();
        assert!(bm25_rank(&["pajama".to_string()], &index, 0).is_err());
        let ranked = bm25_rank(&["pajama".to_string()], &index, 1).unwrap();
        // Both pajama docs match; a2 is shorter, so length normalization
        // ranks it first, and k=1 keeps only it.
        assert_eq!(ranked.ids(), vec!["a2"]);
    }

    #[test]
    fn save_load_round_trips_and_scores_identically() {
        let index = fixture_index();
        let dir = tempfile::tempdir().unwrap();
        index.save(dir.path()).unwrap();
        let loaded = Bm25Index::load(dir.path()).unwrap();
        assert_eq!(index, loaded);
        let query = vec!["thermal".to_string(), "pajama".to_string()];
        assert_eq!(
            bm25_rank(&query, &index, 10).unwrap(),
            bm25_rank(&query, &loaded, 10).unwrap()
        );
    }

    #[test]
    fn multiword_query_terms_are_tokenized() {
        let index = fixture_index();
        let ranked = bm25_rank(&["thermal pajama".to_string()], &index, 10).unwrap();
        assert_eq!(ranked.query_terms, vec!["thermal", "pajama"]);
        assert_eq!(ranked.ids(), vec!["a1", "a2"]);
    }
}
