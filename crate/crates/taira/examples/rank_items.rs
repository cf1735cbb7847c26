//! Lexical and embedding retrieval: BM25 ranking over the catalog, the
//! hashed bag-of-words alternative, and mapping free text onto the closed
//! attribute vocabulary.
//!
//! ```text
//! cargo run --example rank_items
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;

use taira::catalog::ingest_catalog;
use taira::retrieval::{map_attributes, tokenize, HashedBowEmbedder, Ranker};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = ingest_catalog(BufReader::new(File::open(data("catalog_clothing.jsonl"))?))?;

    let query = "warm thermal pajama sets";
    let terms = tokenize(query);
    println!("query: {query:?}  →  terms {terms:?}");

    let bm25 = Ranker::bm25(&catalog);
    let ranked = bm25.rank(&terms, 5)?;
    println!("\ntop 5 by BM25:");
    for (id, score) in &ranked.entries {
        let title = &catalog.get(id).expect("ranked ids exist").title;
        println!("  {score:7.4}  {id}  {title}");
    }

    let embedding = Ranker::with_embedding(&catalog, Arc::new(HashedBowEmbedder::new(256)));
    let ranked = embedding.rank(&terms, 5)?;
    println!("\ntop 5 by hashed bag-of-words cosine:");
    for (id, score) in &ranked.entries {
        let title = &catalog.get(id).expect("ranked ids exist").title;
        println!("  {score:7.4}  {id}  {title}");
    }

    // Whatever a model or search step produces, attribute mapping projects it
    // onto vocabulary entries the catalog has actually seen.
    let vocab = catalog.vocab();
    for text in ["something cozy for cold nights", "footwear for the seaside"] {
        let mapped = map_attributes(text, vocab, 3, bm25.embedder());
        println!("\n{text:?} maps to attributes {mapped:?}");
        assert!(mapped.iter().all(|attr| vocab.contains(attr)));
    }
    Ok(())
}
