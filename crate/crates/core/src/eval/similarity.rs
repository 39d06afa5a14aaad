use std::io::BufRead;

use super::stats::{pearson, spearman};
use crate::error::{Error, Result};
use crate::vectors::Embeddings;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    /// `word1<TAB>word2<TAB>score` lines; `#` starts a comment line. Words are
    /// lowercased to match corpus preprocessing.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("similarity line {line_no}"), e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [w1, w2, score] = fields[..] else {
                return Err(Error::parse(line_no, "expected word1<TAB>word2<TAB>score"));
            };
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|e| Error::parse(line_no, format!("score: {e}")))?;
            if !score.is_finite() {
                return Err(Error::parse(line_no, "score must be finite"));
            }
            pairs.push((w1.trim().to_lowercase(), w2.trim().to_lowercase(), score));
        }
        Ok(SimilarityDataset { pairs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityResult {
    pub pearson: f64,
    pub spearman: Option<f64>,
    pub used: usize,
    pub skipped: usize,
}

/// Correlation between human scores and cosine similarities over the pairs
/// whose words both have vectors.
pub fn eval_similarity(dataset: &SimilarityDataset, emb: &Embeddings) -> Result<SimilarityResult> {
    let mut human = Vec::new();
    let mut model = Vec::new();
    for (w1, w2, score) in &dataset.pairs {
        if let (Some(a), Some(b)) = (emb.id(w1), emb.id(w2)) {
            human.push(*score);
            model.push(emb.cosine(a, b));
        }
    }
    let used = human.len();
    let skipped = dataset.pairs.len() - used;
    if used < 2 {
        return Err(Error::TooFewPairs { used, skipped });
    }
    Ok(SimilarityResult {
        pearson: pearson(&human, &model)?,
        spearman: spearman(&human, &model).ok(),
        used,
        skipped,
    })
}
