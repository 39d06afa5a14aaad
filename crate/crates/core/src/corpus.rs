//! Tokenization, vocabulary construction and frequent-word sub-sampling.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};

/// Split text into lowercase alphanumeric tokens.
///
/// Every maximal run of non-alphanumeric characters acts as a separator.
pub fn preprocess(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    push_tokens(text, &mut current, &mut tokens);
    flush(&mut current, &mut tokens);
    tokens
}

/// Like [`preprocess`], but for raw bytes. Invalid UTF-8 sequences are dropped
/// without acting as separators.
pub fn preprocess_bytes(bytes: &[u8]) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for chunk in bytes.utf8_chunks() {
        push_tokens(chunk.valid(), &mut current, &mut tokens);
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn push_tokens(text: &str, current: &mut String, tokens: &mut Vec<String>) {
    for c in text.chars() {
        if c.is_alphanumeric() {
            // Some lowercase mappings produce combining marks; keep only the
            // alphanumeric part.
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else {
            flush(current, tokens);
        }
    }
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// Call `f` with the tokens of every line of `reader`.
pub fn for_each_line_tokens<R, F>(mut reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(Vec<String>),
{
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        line_no += 1;
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(format!("corpus line {line_no}"), e))?;
        if n == 0 {
            return Ok(());
        }
        f(preprocess_bytes(&buf));
    }
}

/// Token counts accumulated before the `min_count` cut.
#[derive(Clone, Debug, Default)]
pub struct VocabBuilder {
    counts: HashMap<String, u64>,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count<S: AsRef<str>>(&mut self, token: S) {
        let token = token.as_ref();
        match self.counts.get_mut(token) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(token.to_owned(), 1);
            }
        }
    }

    pub fn extend<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for t in tokens {
            self.count(t);
        }
    }

    /// Apply the `min_count` threshold and rank the surviving words.
    pub fn build(self, min_count: u64) -> Result<Vocabulary> {
        if min_count == 0 {
            return Err(Error::Domain {
                name: "min_count",
                value: 0.0,
                expected: ">= 1",
            });
        }
        let entries: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        let total = entries.iter().map(|(_, c)| c).sum();
        Vocabulary::from_entries(entries, total, min_count)
    }
}

/// Build a vocabulary directly from a token sequence.
pub fn build_vocabulary<I, S>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut builder = VocabBuilder::new();
    builder.extend(tokens);
    builder.build(min_count)
}

/// Frequency-ranked vocabulary.
///
/// Entries are sorted by count (descending), ties by word. The rank of a word
/// is its 1-based position.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Construct from arbitrary-order entries; they are sorted into rank order.
    ///
    /// `total_tokens` must be at least the sum of the counts.
    pub fn from_entries(
        mut entries: Vec<(String, u64)>,
        total_tokens: u64,
        min_count: u64,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        if let Some((w, c)) = entries.iter().find(|(_, c)| *c < min_count.max(1)) {
            return Err(Error::InvalidConfig(format!(
                "word {w:?} has count {c} below min_count {min_count}"
            )));
        }
        let sum: u64 = entries.iter().map(|(_, c)| c).sum();
        if total_tokens < sum {
            return Err(Error::InvalidConfig(format!(
                "total_tokens {total_tokens} is smaller than the sum of counts {sum}"
            )));
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (w, c)) in entries.into_iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate word {w:?}")));
            }
            words.push(w);
            counts.push(c);
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
            min_count,
        })
    }

    /// Vocabulary over raw counts in rank order, named `w1`, `w2`, ...
    ///
    /// Convenient for fitting experiments where only the count profile
    /// matters. Counts are re-sorted if needed.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let width = counts.len().to_string().len();
        let entries = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (format!("w{:0width$}", i + 1), c))
            .collect::<Vec<_>>();
        let total = counts.iter().sum();
        let min = counts.iter().copied().min().unwrap_or(1).max(1);
        Self::from_entries(entries, total, min)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    /// 1-based rank of the word at `idx`.
    pub fn rank(&self, idx: usize) -> usize {
        idx + 1
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Normalized frequency f̂ of the word at `idx`.
    pub fn frequency(&self, idx: usize) -> f64 {
        self.counts[idx] as f64 / self.total_tokens as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    /// Write as `#total_tokens\tN` followed by one `word\tcount` line per entry.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "#total_tokens\t{}", self.total_tokens)?;
        for (word, count) in self.iter() {
            writeln!(w, "{word}\t{count}")?;
        }
        w.flush()
    }

    /// Read the format produced by [`Vocabulary::write`]. Other lines starting
    /// with `#` are ignored; a missing total defaults to the sum of counts.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut total = None;
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("vocabulary line {line_no}"), e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.strip_prefix("total_tokens\t") {
                    total = Some(
                        n.trim()
                            .parse::<u64>()
                            .map_err(|e| Error::parse(line_no, format!("total_tokens: {e}")))?,
                    );
                }
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected word<TAB>count"))?;
            let count = count
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::parse(line_no, format!("count: {e}")))?;
            if count == 0 {
                return Err(Error::parse(line_no, "count must be positive"));
            }
            entries.push((word.to_owned(), count));
        }
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary { min_count: 1 });
        }
        let sum = entries.iter().map(|(_, c)| c).sum();
        let min = entries.iter().map(|(_, c)| *c).min().unwrap_or(1);
        Self::from_entries(entries, total.unwrap_or(sum), min)
    }
}

/// Word ids in corpus order, split into sentences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenStream {
    ids: Vec<u32>,
    // Exclusive end offset of every sentence; the last one equals ids.len().
    sentence_ends: Vec<usize>,
}

impl TokenStream {
    /// A stream consisting of a single sentence.
    pub fn from_ids(ids: Vec<u32>) -> Self {
        let mut stream = TokenStream::default();
        stream.push_sentence(&ids);
        stream
    }

    /// Map tokens to ids, dropping out-of-vocabulary tokens.
    pub fn push_tokens<S: AsRef<str>>(&mut self, tokens: &[S], vocab: &Vocabulary) {
        let start = self.ids.len();
        self.ids
            .extend(tokens.iter().filter_map(|t| vocab.id(t.as_ref())).map(|i| i as u32));
        if self.ids.len() > start {
            self.sentence_ends.push(self.ids.len());
        }
    }

    pub fn push_sentence(&mut self, ids: &[u32]) {
        if !ids.is_empty() {
            self.ids.extend_from_slice(ids);
            self.sentence_ends.push(self.ids.len());
        }
    }

    /// Tokenize `reader` line by line against `vocab`.
    pub fn from_reader<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<Self> {
        let mut stream = TokenStream::default();
        for_each_line_tokens(reader, |tokens| stream.push_tokens(&tokens, vocab))?;
        Ok(stream)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn sentence_ends(&self) -> &[usize] {
        &self.sentence_ends
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[u32]> + '_ {
        let mut start = 0;
        self.sentence_ends.iter().map(move |&end| {
            let s = &self.ids[start..end];
            start = end;
            s
        })
    }

    /// Check every id against a vocabulary size.
    pub fn validate(&self, vocab_len: usize) -> Result<()> {
        match self.ids.iter().position(|&id| id as usize >= vocab_len) {
            Some(pos) => Err(Error::InvalidConfig(format!(
                "token {pos} has id {} outside a vocabulary of {vocab_len} words",
                self.ids[pos]
            ))),
            None => Ok(()),
        }
    }
}

/// Probability of keeping an occurrence of a word with normalized frequency
/// `f_hat` under sub-sampling rate `t`: `(sqrt(f_hat / t) + 1) * t / f_hat`.
///
/// The value is not capped; anything at or above 1 means "always kept".
pub fn keep_probability(f_hat: f64, t: f64) -> Result<f64> {
    if !(f_hat > 0.0 && f_hat.is_finite()) {
        return Err(Error::Domain {
            name: "f_hat",
            value: f_hat,
            expected: "> 0",
        });
    }
    check_rate(t)?;
    Ok(keep_probability_unchecked(f_hat, t))
}

#[inline]
pub(crate) fn keep_probability_unchecked(f_hat: f64, t: f64) -> f64 {
    ((f_hat / t).sqrt() + 1.0) * (t / f_hat)
}

pub(crate) fn check_rate(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "t",
            value: t,
            expected: "> 0",
        })
    }
}

/// Per-word keep probabilities capped at 1.
pub fn keep_probabilities(vocab: &Vocabulary, t: f64) -> Result<Vec<f64>> {
    check_rate(t)?;
    Ok((0..vocab.len())
        .map(|i| keep_probability_unchecked(vocab.frequency(i), t).min(1.0))
        .collect())
}

/// Retain `id` with probability `keep[id]`. Words that are always kept do not
/// consume randomness.
#[inline]
pub(crate) fn retain<R: Rng + ?Sized>(keep: f64, rng: &mut R) -> bool {
    keep >= 1.0 || rng.random::<f64>() < keep
}

/// Randomly delete frequent-word occurrences, each independently.
pub fn subsample_tokens<R: Rng + ?Sized>(
    stream: &TokenStream,
    vocab: &Vocabulary,
    t: f64,
    rng: &mut R,
) -> Result<TokenStream> {
    stream.validate(vocab.len())?;
    let keep = keep_probabilities(vocab, t)?;
    let mut out = TokenStream::default();
    let mut buf = Vec::new();
    for sentence in stream.sentences() {
        buf.clear();
        buf.extend(
            sentence
                .iter()
                .copied()
                .filter(|&id| retain(keep[id as usize], rng)),
        );
        out.push_sentence(&buf);
    }
    Ok(out)
}
