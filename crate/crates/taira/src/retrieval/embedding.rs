//! Embedding-similarity ranking with a pluggable provider.
//!
//! The built-in [`HashedBowEmbedder`] hashes normalized tokens into a fixed
//! number of buckets (FNV-1a) and L2-normalizes the counts — fully
//! deterministic, no model download. The index persists as a flat
//! little-endian `f32` matrix plus an id manifest.

use super::{sort_ranked, tokenize, RankedList};
use crate::catalog::Catalog;
use crate::error::{Result, TairaError};
use std::io::{Read, Write};
use std::path::Path;

const MATRIX_FILE: &str = "embeddings.f32";
const MANIFEST_FILE: &str = "embeddings.ids";

/// Maps text to a fixed-dimension vector; same text must yield the same
/// vector for the lifetime of the provider instance.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Vec<f32>;
    fn dimension(&self) -> usize;
}

/// Hashed bag-of-words embedder: FNV-1a(64) token buckets, L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBowEmbedder {
    dimension: usize,
}

impl Default for HashedBowEmbedder {
    fn default() -> Self {
        HashedBowEmbedder { dimension: 256 }
    }
}

impl HashedBowEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        HashedBowEmbedder { dimension }
    }
}

fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in bytes {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl EmbeddingProvider for HashedBowEmbedder {
    fn embed(&self, text: &str) -> Vec<f32> {
        let mut vector = vec![0.0f32; self.dimension];
        for token in tokenize(text) {
            let bucket = (fnv1a_64(token.as_bytes()) % self.dimension as u64) as usize;
            vector[bucket] += 1.0;
        }
        let norm = vector.iter().map(|v| v * v).sum::<f32>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        vector
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Cosine similarity; 0.0 when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let norm_a: f64 = a.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        dot / (norm_a * norm_b)
    }
}

/// Prebuilt item embeddings in ascending-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    ids: Vec<String>,
    vectors: Vec<Vec<f32>>,
    dimension: usize,
}

impl EmbeddingIndex {
    pub fn build(catalog: &Catalog, provider: &dyn EmbeddingProvider) -> Self {
        let mut ids = Vec::with_capacity(catalog.len());
        let mut vectors = Vec::with_capacity(catalog.len());
        for item in catalog.items() {
            ids.push(item.id.clone());
            vectors.push(provider.embed(&item.document_text()));
        }
        EmbeddingIndex { ids, vectors, dimension: provider.dimension() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Writes the little-endian `f32` matrix and the id manifest into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut matrix = std::io::BufWriter::new(std::fs::File::create(dir.join(MATRIX_FILE))?);
        for vector in &self.vectors {
            for value in vector {
                matrix.write_all(&value.to_le_bytes())?;
            }
        }
        let manifest: String = self.ids.iter().map(|id| format!("{id}\n")).collect();
        std::fs::write(dir.join(MANIFEST_FILE), manifest)?;
        Ok(())
    }

    /// Reads an index written by [`EmbeddingIndex::save`]. The dimension is
    /// recovered from matrix size ÷ manifest length, which must divide evenly.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let ids: Vec<String> = manifest.lines().map(str::to_string).collect();
        let mut bytes = Vec::new();
        std::fs::File::open(dir.join(MATRIX_FILE))?.read_to_end(&mut bytes)?;
        if ids.is_empty() || bytes.len() % 4 != 0 {
            return Err(TairaError::InvalidInput("corrupt embedding index".into()));
        }
        let floats = bytes.len() / 4;
        if floats % ids.len() != 0 {
            return Err(TairaError::InvalidInput(format!(
                "embedding matrix holds {floats} floats for {} ids",
                ids.len()
            )));
        }
        let dimension = floats / ids.len();
        let mut vectors = Vec::with_capacity(ids.len());
        for row in 0..ids.len() {
            let mut vector = Vec::with_capacity(dimension);
            for col in 0..dimension {
                let offset = (row * dimension + col) * 4;
                vector.push(f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap()));
            }
            vectors.push(vector);
        }
        Ok(EmbeddingIndex { ids, vectors, dimension })
    }
}

/// Ranks the top-`k` items by cosine similarity between the embedded query
/// and each prebuilt item embedding; ties break by ascending id.
pub fn embed_rank(
    query_text: &str,
    index: &EmbeddingIndex,
    k: usize,
    provider: &dyn EmbeddingProvider,
) -> Result<RankedList> {
    if k == 0 {
        return Err(TairaError::InvalidInput("k must be positive".into()));
    }
    if provider.dimension() != index.dimension {
        return Err(TairaError::InvalidInput(format!(
            "provider dimension {} does not match index dimension {}",
            provider.dimension(),
            index.dimension
        )));
    }
    let query = provider.embed(query_text);
    let mut entries: Vec<(String, f64)> = index
        .ids
        .iter()
        .zip(&index.vectors)
        .map(|(id, vector)| (id.clone(), cosine(&query, vector)))
        .collect();
    sort_ranked(&mut entries);
    entries.truncate(k);
    Ok(RankedList { entries, query_terms: tokenize(query_text) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ingest_catalog;
    use std::io::Cursor;

    fn toy_catalog() -> Catalog {
        let lines = [
            r#"{"id":"e1","title":"Red Wool Scarf","description":"a warm scarf","attributes":"Accessories"}"#,
            r#"{"id":"e2","title":"Blue Cotton Scarf","description":"a light scarf","attributes":"Accessories"}"#,
            r#"{"id":"e3","title":"Leather Belt","description":"a sturdy belt","attributes":"Accessories"}"#,
            r#"{"id":"e4","title":"Wool Hat","description":"a warm hat","attributes":"Accessories"}"#,
            r#"{"id":"e5","title":"Rain Jacket","description":"a waterproof jacket","attributes":"Outerwear"}"#,
        ];
        ingest_catalog(Cursor::new(lines.join("\n"))).unwrap()
    }

    #[test]
    fn embedder_is_deterministic_and_normalized() {
        let embedder = HashedBowEmbedder::default();
        let a = embedder.embed("warm wool scarf");
        let b = embedder.embed("warm wool scarf");
        assert_eq!(a, b);
        let norm: f32 = a.iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        assert_eq!(a.len(), 256);
    }

    #[test]
    fn self_similarity_is_one_and_orthogonal_is_zero() {
        assert!((cosine(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn exact_document_text_ranks_its_item_first_with_similarity_one() {
        let catalog = toy_catalog();
        let embedder = HashedBowEmbedder::default();
        let index = EmbeddingIndex::build(&catalog, &embedder);
        let text = catalog.get("e3").unwrap().document_text();
        let ranked = embed_rank(&text, &index, 5, &embedder).unwrap();
        assert_eq!(ranked.entries[0].0, "e3");
        assert!((ranked.entries[0].1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ordering_matches_exhaustive_cosine_oracle() {
        let catalog = toy_catalog();
        let embedder = HashedBowEmbedder::default();
        let index = EmbeddingIndex::build(&catalog, &embedder);
        let query = "warm wool accessories";
        let ranked = embed_rank(query, &index, 5, &embedder).unwrap();

        let qv = embedder.embed(query);
        let mut oracle: Vec<(String, f64)> = catalog
            .items()
            .map(|item| (item.id.clone(), cosine(&qv, &embedder.embed(&item.document_text()))))
            .collect();
        oracle.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        let oracle_ids: Vec<&str> = oracle.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ranked.ids(), oracle_ids);
        for ((_, s), (_, o)) in ranked.entries.iter().zip(&oracle) {
            assert!((s - o).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let catalog = toy_catalog();
        let index = EmbeddingIndex::build(&catalog, &HashedBowEmbedder::default());
        let other = HashedBowEmbedder::new(64);
        assert!(embed_rank("anything", &index, 5, &other).is_err());
    }

    #[test]
    fn index_round_trips_through_disk() {
        let catalog = toy_catalog();
        let embedder = HashedBowEmbedder::default();
        let index = EmbeddingIndex::build(&catalog, &embedder);
        let dir = tempfile::tempdir().unwrap();
        index.save(dir.path()).unwrap();
        let loaded = EmbeddingIndex::load(dir.path()).unwrap();
        assert_eq!(index, loaded);
        assert_eq!(loaded.dimension(), 256);
    }
}
