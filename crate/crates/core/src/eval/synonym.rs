use std::io::BufRead;

use super::Accuracy;
use crate::error::{Error, Result};
use crate::vectors::Embeddings;

#[derive(Clone, Debug, PartialEq)]
pub struct SynonymQuestion {
    pub stem: String,
    pub candidates: Vec<String>,
    pub answer: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynonymDataset {
    pub questions: Vec<SynonymQuestion>,
}

impl SynonymDataset {
    /// `stem | cand1,cand2,... | answer_index` lines with a 0-based index.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut questions = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("synonym line {line_no}"), e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            let [stem, candidates, answer] = fields[..] else {
                return Err(Error::parse(line_no, "expected stem | candidates | answer"));
            };
            let candidates: Vec<String> =
                candidates.split(',').map(|c| c.trim().to_lowercase()).collect();
            let answer = parse_answer(line_no, answer, candidates.len())?;
            questions.push(SynonymQuestion {
                stem: stem.to_lowercase(),
                candidates,
                answer,
            });
        }
        Ok(SynonymDataset { questions })
    }
}

pub(crate) fn parse_answer(line_no: usize, field: &str, n_candidates: usize) -> Result<usize> {
    if n_candidates < 2 {
        return Err(Error::parse(line_no, "need at least two candidates"));
    }
    let answer: usize = field
        .parse()
        .map_err(|e| Error::parse(line_no, format!("answer index: {e}")))?;
    if answer >= n_candidates {
        return Err(Error::parse(
            line_no,
            format!("answer index {answer} out of range for {n_candidates} candidates"),
        ));
    }
    Ok(answer)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SynonymResult {
    pub accuracy: Accuracy,
    pub skipped: usize,
}

/// Index of the candidate closest to the stem by cosine; `None` if the stem
/// or every candidate lacks a vector. Ties go to the earlier candidate.
pub fn choose_synonym(q: &SynonymQuestion, emb: &Embeddings) -> Option<usize> {
    let stem = emb.id(&q.stem)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, cand) in q.candidates.iter().enumerate() {
        let Some(c) = emb.id(cand) else { continue };
        let score = emb.cosine(stem, c);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

pub fn eval_synonym(dataset: &SynonymDataset, emb: &Embeddings) -> SynonymResult {
    let mut result = SynonymResult::default();
    for q in &dataset.questions {
        match choose_synonym(q, emb) {
            Some(choice) => {
                result.accuracy.total += 1;
                if choice == q.answer {
                    result.accuracy.correct += 1;
                }
            }
            None => result.skipped += 1,
        }
    }
    result
}
