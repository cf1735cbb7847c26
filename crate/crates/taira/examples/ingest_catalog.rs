//! Catalog ingestion: read a JSONL item feed plus user histories, inspect the
//! derived attribute vocabulary, and round-trip the catalog through the
//! on-disk store format.
//!
//! ```text
//! cargo run --example ingest_catalog
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use taira::catalog::{ingest_catalog, load_histories, load_store, save_store};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut catalog = ingest_catalog(BufReader::new(File::open(data("catalog_clothing.jsonl"))?))?;
    let histories = load_histories(BufReader::new(File::open(data("histories_clothing.jsonl"))?))?;
    catalog.set_histories(histories);

    println!("ingested {} items, {} user histories", catalog.len(), catalog.histories().len());

    let vocab = catalog.vocab();
    let entries: Vec<&str> = vocab.entries().collect();
    println!("\nattribute vocabulary ({} entries):", vocab.len());
    println!("  {}", entries.join(", "));

    let item = catalog.get("b001").expect("fixture item");
    println!("\nsample item:");
    println!("  id:          {}", item.id);
    println!("  title:       {}", item.title);
    println!("  description: {}", item.description);
    println!("  attributes:  {}", item.attribute_path.join(" > "));

    let history = &catalog.histories()[0];
    println!("\nsample history: user {} interacted with {:?}", history.user_id, history.interactions);
    println!("  held-out target item: {}", history.target_item());

    // Round-trip: the store directory format preserves the whole catalog.
    let dir = tempfile::tempdir()?;
    save_store(&catalog, dir.path())?;
    let reloaded = load_store(dir.path())?;
    assert_eq!(reloaded.len(), catalog.len());
    assert_eq!(reloaded.histories().len(), catalog.histories().len());
    println!("\nsaved and reloaded the store at {} — {} items intact", dir.path().display(), reloaded.len());
    Ok(())
}
