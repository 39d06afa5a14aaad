//! Intrinsic evaluation of word vectors: similarity correlation, analogies,
//! synonym selection and sentence completion.

pub mod analogy;
pub mod completion;
pub mod similarity;
pub mod stats;
pub mod synonym;

pub use analogy::{eval_analogy, AnalogyDataset, AnalogyResult, AnalogySolver};
pub use completion::{
    eval_completion, CompletionDataset, CompletionMode, CompletionOptions, CompletionResult,
    CompletionScorer,
};
pub use similarity::{eval_similarity, SimilarityDataset, SimilarityResult};
pub use stats::{pearson, spearman};
pub use synonym::{eval_synonym, SynonymDataset, SynonymResult};

/// Correct answers out of answered questions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    /// Fraction correct, 0 when nothing was answered.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

impl std::ops::Add for Accuracy {
    type Output = Accuracy;

    fn add(self, rhs: Accuracy) -> Accuracy {
        Accuracy {
            correct: self.correct + rhs.correct,
            total: self.total + rhs.total,
        }
    }
}
