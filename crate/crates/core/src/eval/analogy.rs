use std::io::BufRead;

use super::Accuracy;
use crate::error::{Error, Result};
use crate::vectors::{norm64, Embeddings};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionKind {
    Semantic,
    Syntactic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalogySection {
    pub name: String,
    pub kind: SectionKind,
    pub questions: Vec<[String; 4]>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalogyDataset {
    pub sections: Vec<AnalogySection>,
}

impl AnalogyDataset {
    /// Google analogy format: `: section` headers followed by lines of four
    /// words. Sections named `gram*` are syntactic, all others semantic.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut sections: Vec<AnalogySection> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("analogy line {line_no}"), e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix(':') {
                let name = name.trim().to_owned();
                let kind = if name.starts_with("gram") {
                    SectionKind::Syntactic
                } else {
                    SectionKind::Semantic
                };
                sections.push(AnalogySection {
                    name,
                    kind,
                    questions: Vec::new(),
                });
                continue;
            }
            let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            let Ok(q) = <[String; 4]>::try_from(words) else {
                return Err(Error::parse(line_no, "expected four words"));
            };
            if (0..4).any(|a| (a + 1..4).any(|b| q[a] == q[b])) {
                return Err(Error::parse(line_no, "question words must be distinct"));
            }
            if sections.is_empty() {
                sections.push(AnalogySection {
                    name: String::new(),
                    kind: SectionKind::Semantic,
                    questions: Vec::new(),
                });
            }
            sections.last_mut().expect("section exists").questions.push(q);
        }
        Ok(AnalogyDataset { sections })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AnalogyResult {
    pub semantic: Accuracy,
    pub syntactic: Accuracy,
    pub skipped: usize,
}

impl AnalogyResult {
    pub fn total(&self) -> Accuracy {
        Accuracy {
            correct: self.semantic.correct + self.syntactic.correct,
            total: self.semantic.total + self.syntactic.total,
        }
    }
}

/// Answers analogy queries by `argmax_w cos(v_b - v_a + v_c, v_w)` over the
/// whole vocabulary, excluding the three query words.
pub struct AnalogySolver<'a> {
    emb: &'a Embeddings,
    inv_norms: Vec<f64>,
}

impl<'a> AnalogySolver<'a> {
    pub fn new(emb: &'a Embeddings) -> Self {
        let inv_norms = (0..emb.len())
            .map(|i| {
                let n = norm64(emb.row(i));
                if n > 0.0 {
                    1.0 / n
                } else {
                    0.0
                }
            })
            .collect();
        AnalogySolver { emb, inv_norms }
    }

    pub fn answer(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        let emb = self.emb;
        let query: Vec<f64> = emb
            .row(b)
            .iter()
            .zip(emb.row(a))
            .zip(emb.row(c))
            .map(|((&vb, &va), &vc)| vb as f64 - va as f64 + vc as f64)
            .collect();
        // |query| is a positive constant over candidates, so it is left out.
        let mut best: Option<(usize, f64)> = None;
        for w in 0..emb.len() {
            if w == a || w == b || w == c {
                continue;
            }
            let score = dot_mixed(&query, emb.row(w)) * self.inv_norms[w];
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((w, score));
            }
        }
        best.map(|(w, _)| w)
    }
}

#[inline]
fn dot_mixed(q: &[f64], v: &[f32]) -> f64 {
    let mut acc = [0f64; 4];
    let (cq, cv) = (q.chunks_exact(4), v.chunks_exact(4));
    let (rq, rv) = (cq.remainder(), cv.remainder());
    for (x, y) in cq.zip(cv) {
        for i in 0..4 {
            acc[i] += x[i] * y[i] as f64;
        }
    }
    let mut s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (x, y) in rq.iter().zip(rv) {
        s += x * *y as f64;
    }
    s
}

/// Per-section accuracy over questions whose four words all have vectors.
pub fn eval_analogy(dataset: &AnalogyDataset, emb: &Embeddings) -> AnalogyResult {
    let solver = AnalogySolver::new(emb);
    let mut result = AnalogyResult::default();
    for section in &dataset.sections {
        for q in &section.questions {
            let ids: Option<Vec<usize>> = q.iter().map(|w| emb.id(w)).collect();
            let Some(ids) = ids else {
                result.skipped += 1;
                continue;
            };
            let acc = match section.kind {
                SectionKind::Semantic => &mut result.semantic,
                SectionKind::Syntactic => &mut result.syntactic,
            };
            acc.total += 1;
            if solver.answer(ids[0], ids[1], ids[2]) == Some(ids[3]) {
                acc.correct += 1;
            }
        }
    }
    result
}
