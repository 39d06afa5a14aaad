//! Word vectors and the word2vec text/binary file formats.
//!
//! Text: a `vocab_size dim` header, then `word v1 ... vD` per line.
//! Binary: the same header, then per word the word, a space and `dim`
//! little-endian `f32` values, followed by a newline as the reference tool
//! writes it. The reader tolerates the newline being absent.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::trainer::{EmbeddingMatrices, Real};

/// A vocabulary-indexed matrix of `f32` vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f32>,
}

impl Embeddings {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::InvalidConfig(format!(
                "{} values for {} words of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate word {w:?}")));
            }
        }
        Ok(Embeddings {
            words,
            index,
            dim,
            data,
        })
    }

    /// Input vectors of trained matrices.
    pub fn from_input<F: Real>(words: &[String], emb: &EmbeddingMatrices<F>) -> Result<Self> {
        Self::from_rows(words, emb.dim(), emb.input())
    }

    /// Output (context) vectors of trained matrices.
    pub fn from_output<F: Real>(words: &[String], emb: &EmbeddingMatrices<F>) -> Result<Self> {
        Self::from_rows(words, emb.dim(), emb.output())
    }

    fn from_rows<F: Real>(words: &[String], dim: usize, data: &[F]) -> Result<Self> {
        let data = data.iter().map(|x| x.to_f32().unwrap_or(f32::NAN)).collect();
        Self::new(words.to_vec(), dim, data)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, idx: usize) -> &[f32] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.id(word).map(|i| self.row(i))
    }

    /// Cosine similarity accumulated in `f64`; 0 if either vector is zero.
    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        cosine(self.row(a), self.row(b))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for x in self.row(i) {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            w.write_all(b" ")?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (n, dim) = match lines.next() {
            Some((_, line)) => parse_header(&line.map_err(|e| Error::io("vector header", e))?)?,
            None => return Err(Error::parse(1, "missing header")),
        };
        let mut words = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("vector line {line_no}"), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let word = parts.next().expect("non-empty line");
            let start = data.len();
            for p in parts {
                data.push(
                    p.parse::<f32>()
                        .map_err(|e| Error::parse(line_no, format!("value {p:?}: {e}")))?,
                );
            }
            if data.len() - start != dim {
                return Err(Error::parse(
                    line_no,
                    format!("expected {dim} values, found {}", data.len() - start),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != n {
            return Err(Error::parse(
                1,
                format!("header announces {n} words, found {}", words.len()),
            ));
        }
        Self::new(words, dim, data)
    }

    pub fn read_binary<R: BufRead>(mut reader: R) -> Result<Self> {
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::io("vector header", e))?;
        let (n, dim) = parse_header(&header)?;
        let mut words = Vec::with_capacity(n);
        let mut data = vec![0f32; n * dim];
        let mut buf = Vec::new();
        let mut raw = vec![0u8; 4 * dim];
        for i in 0..n {
            buf.clear();
            // Skip the separator left over from the previous record.
            loop {
                let b = reader.fill_buf().map_err(|e| Error::io("vector file", e))?;
                match b.first() {
                    Some(b'\n') | Some(b' ') => reader.consume(1),
                    Some(_) => break,
                    None => return Err(Error::parse(i + 2, "unexpected end of file")),
                }
            }
            reader
                .read_until(b' ', &mut buf)
                .map_err(|e| Error::io(format!("word {i}"), e))?;
            if buf.pop() != Some(b' ') {
                return Err(Error::parse(i + 2, "unterminated word"));
            }
            let word = String::from_utf8(std::mem::take(&mut buf))
                .map_err(|e| Error::parse(i + 2, format!("word is not UTF-8: {e}")))?;
            reader
                .read_exact(&mut raw)
                .map_err(|e| Error::io(format!("vector of {word:?}"), e))?;
            for (x, bytes) in data[i * dim..(i + 1) * dim]
                .iter_mut()
                .zip(raw.chunks_exact(4))
            {
                *x = f32::from_le_bytes(bytes.try_into().expect("4 bytes"));
            }
            words.push(word);
        }
        Self::new(words, dim, data)
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_ascii_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(n)), Some(Ok(d)), None) if d > 0 => Ok((n, d)),
        _ => Err(Error::parse(1, format!("bad header {:?}", line.trim_end()))),
    }
}

pub fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

pub fn norm64(a: &[f32]) -> f64 {
    dot64(a, a).sqrt()
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (na, nb) = (norm64(a), norm64(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot64(a, b) / (na * nb)
    }
}
