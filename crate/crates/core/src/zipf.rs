//! Zipf's-law fitting and the adaptive sub-sampling rate for noise tables.
//!
//! Word frequencies are modelled as `f_r = gamma / r^beta` and fitted in
//! log-log space by least squares with weight `1/r` for rank `r`. Each word
//! carries `I_sem = ln r` and `I_syn = ln f_r`; on the fitted line their sum is
//! the constant `ln gamma`. The critical word is the point where the two are
//! equal, and its frequency fixes the rate `t_c` at which that word has keep
//! probability exactly 1.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{keep_probability_unchecked, Vocabulary};
use crate::error::{Error, Result};
use crate::format::sig10;

/// `4 / (1 + sqrt 5)^2`, i.e. `1 / phi^2`.
pub const CRITICAL_RATE_FACTOR: f64 = 0.381_966_011_250_105_1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FitMethod {
    /// Free slope and intercept.
    Wlse1,
    /// Line constrained through `(ln 1, ln f_1)`.
    Wlse2,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::Wlse1 => "wlse1",
            FitMethod::Wlse2 => "wlse2",
        })
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wlse1" | "wlse-1" => Ok(FitMethod::Wlse1),
            "wlse2" | "wlse-2" => Ok(FitMethod::Wlse2),
            other => Err(Error::InvalidConfig(format!(
                "unknown fit method {other:?} (expected wlse1 or wlse2)"
            ))),
        }
    }
}

/// Estimated Zipf parameters in raw-count units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZipfFit {
    pub beta_hat: f64,
    pub gamma_hat: f64,
    pub method: FitMethod,
}

impl ZipfFit {
    /// Total information `ln gamma_hat`.
    pub fn total_info(&self) -> f64 {
        self.gamma_hat.ln()
    }

    /// Fitted frequency at (possibly fractional) rank `r`.
    pub fn predicted(&self, rank: f64) -> f64 {
        self.gamma_hat / rank.powf(self.beta_hat)
    }
}

/// Fit the raw counts of `vocab`.
pub fn fit(vocab: &Vocabulary, method: FitMethod) -> Result<ZipfFit> {
    let freqs: Vec<f64> = vocab.counts().iter().map(|&c| c as f64).collect();
    fit_frequencies(&freqs, method)
}

pub fn fit_wlse1(vocab: &Vocabulary) -> Result<ZipfFit> {
    fit(vocab, FitMethod::Wlse1)
}

pub fn fit_wlse2(vocab: &Vocabulary) -> Result<ZipfFit> {
    fit(vocab, FitMethod::Wlse2)
}

/// Fit frequencies given in rank order (index 0 is rank 1).
pub fn fit_frequencies(freqs: &[f64], method: FitMethod) -> Result<ZipfFit> {
    if freqs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: freqs.len(),
        });
    }
    if let Some(&bad) = freqs.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::Domain {
            name: "frequency",
            value: bad,
            expected: "finite and > 0",
        });
    }
    if freqs.iter().all(|&f| f == freqs[0]) {
        return Err(Error::DegenerateFit("all frequencies are equal"));
    }

    let mut w_sum = 0.0;
    let mut x_mean = 0.0;
    let mut y_mean = 0.0;
    for (i, &f) in freqs.iter().enumerate() {
        let r = (i + 1) as f64;
        let w = 1.0 / r;
        w_sum += w;
        x_mean += w * r.ln();
        y_mean += w * f.ln();
    }
    x_mean /= w_sum;
    y_mean /= w_sum;

    let log_f1 = freqs[0].ln();
    let (beta_hat, log_gamma) = match method {
        FitMethod::Wlse1 => {
            // Centred form of <xy> - <x><y> over <x^2> - <x>^2.
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, &f) in freqs.iter().enumerate() {
                let r = (i + 1) as f64;
                let dx = r.ln() - x_mean;
                sxy += (dx * (f.ln() - y_mean)) / r;
                sxx += (dx * dx) / r;
            }
            let beta = -sxy / sxx;
            (beta, y_mean + beta * x_mean)
        }
        FitMethod::Wlse2 => {
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, &f) in freqs.iter().enumerate() {
                let r = (i + 1) as f64;
                let x = r.ln();
                sxy += x * (f.ln() - log_f1) / r;
                sxx += x * x / r;
            }
            (-sxy / sxx, log_f1)
        }
    };
    let gamma_hat = match method {
        FitMethod::Wlse1 => log_gamma.exp(),
        FitMethod::Wlse2 => freqs[0],
    };
    if !beta_hat.is_finite() || !gamma_hat.is_finite() {
        return Err(Error::DegenerateFit("non-finite estimate"));
    }
    Ok(ZipfFit {
        beta_hat,
        gamma_hat,
        method,
    })
}

/// Raw-count frequency of the critical word, `exp(ln gamma / (1 + beta))`.
pub fn critical_frequency(fit: &ZipfFit) -> Result<f64> {
    if fit.beta_hat <= -1.0 || !fit.beta_hat.is_finite() {
        return Err(Error::Domain {
            name: "beta_hat",
            value: fit.beta_hat,
            expected: "> -1",
        });
    }
    if !(fit.gamma_hat > 0.0) {
        return Err(Error::Domain {
            name: "gamma_hat",
            value: fit.gamma_hat,
            expected: "> 0",
        });
    }
    Ok((fit.gamma_hat.ln() / (1.0 + fit.beta_hat)).exp())
}

/// Sub-sampling rate that gives keep probability exactly 1 at `f_rc_norm`.
pub fn subsampling_rate(f_rc_norm: f64) -> Result<f64> {
    if !(f_rc_norm > 0.0 && f_rc_norm <= 1.0) {
        return Err(Error::Domain {
            name: "f_rc_norm",
            value: f_rc_norm,
            expected: "in (0, 1]",
        });
    }
    Ok(4.0 * f_rc_norm / (1.0 + 5f64.sqrt()).powi(2))
}

/// Semantic information `ln rank`.
pub fn semantic_weight(rank: usize) -> Result<f64> {
    if rank < 1 {
        return Err(Error::Domain {
            name: "rank",
            value: rank as f64,
            expected: ">= 1",
        });
    }
    Ok((rank as f64).ln())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemanticsInfo {
    pub i_sem: f64,
    pub i_syn: f64,
}

impl SemanticsInfo {
    pub fn total(&self) -> f64 {
        self.i_sem + self.i_syn
    }
}

/// `(ln r, ln f_r)` for every word, in rank order.
pub fn semantics_info(vocab: &Vocabulary) -> Vec<SemanticsInfo> {
    vocab
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| SemanticsInfo {
            i_sem: ((i + 1) as f64).ln(),
            i_syn: (c as f64).ln(),
        })
        .collect()
}

/// Rank whose actual count is closest to the line `ln r = ln f_r`.
///
/// Ties go to the smaller rank.
pub fn critical_word_search(vocab: &Vocabulary) -> usize {
    let mut best = (1usize, f64::INFINITY);
    for (i, &c) in vocab.counts().iter().enumerate() {
        let r = i + 1;
        let gap = ((r as f64).ln() - (c as f64).ln()).abs();
        if gap < best.1 {
            best = (r, gap);
        }
    }
    best.0
}

/// How the critical word is located.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalSource {
    Fit(FitMethod),
    Search,
}

impl fmt::Display for CriticalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalSource::Fit(m) => m.fmt(f),
            CriticalSource::Search => f.write_str("search"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalWord {
    /// Real-valued critical rank. On the fitted line `ln r_c = ln f_rc`, so it
    /// equals the raw critical frequency.
    pub rank: f64,
    pub nearest_rank: usize,
    pub f_rc_raw: f64,
    pub f_rc_norm: f64,
    pub t_c: f64,
}

impl CriticalWord {
    fn from_raw(rank: f64, f_rc_raw: f64, total_tokens: u64) -> Result<Self> {
        let f_rc_norm = f_rc_raw / total_tokens as f64;
        let t_c = subsampling_rate(f_rc_norm)?;
        Ok(CriticalWord {
            rank,
            nearest_rank: rank.round().max(1.0) as usize,
            f_rc_raw,
            f_rc_norm,
            t_c,
        })
    }

    /// Keep probability of the critical word under its own rate; 1 up to
    /// rounding.
    pub fn keep_probability(&self) -> f64 {
        keep_probability_unchecked(self.f_rc_norm, self.t_c)
    }
}

/// Critical word from a Zipf fit.
pub fn critical_word(fit: &ZipfFit, total_tokens: u64) -> Result<CriticalWord> {
    let f_rc = critical_frequency(fit)?;
    CriticalWord::from_raw(f_rc, f_rc, total_tokens)
}

/// Critical word found by scanning the actual counts.
pub fn critical_word_searched(vocab: &Vocabulary) -> Result<CriticalWord> {
    let rank = critical_word_search(vocab);
    CriticalWord::from_raw(
        rank as f64,
        vocab.count(rank - 1) as f64,
        vocab.total_tokens(),
    )
}

/// Full pipeline from vocabulary to `t_c`.
pub fn adaptive_rate(
    vocab: &Vocabulary,
    source: CriticalSource,
) -> Result<(Option<ZipfFit>, CriticalWord)> {
    match source {
        CriticalSource::Fit(method) => {
            let fit = fit(vocab, method)?;
            let crit = critical_word(&fit, vocab.total_tokens())?;
            Ok((Some(fit), crit))
        }
        CriticalSource::Search => Ok((None, critical_word_searched(vocab)?)),
    }
}

/// `key=value` report lines with 10 significant digits.
pub fn fit_report(fit: Option<&ZipfFit>, source: CriticalSource, crit: &CriticalWord) -> String {
    let mut out = format!("method={source}\n");
    if let Some(fit) = fit {
        out += &format!("beta_hat={}\n", sig10(fit.beta_hat));
        out += &format!("gamma_hat={}\n", sig10(fit.gamma_hat));
    }
    out += &format!("r_c={}\n", sig10(crit.rank));
    out += &format!("f_rc_raw={}\n", sig10(crit.f_rc_raw));
    out += &format!("f_rc_norm={}\n", sig10(crit.f_rc_norm));
    out += &format!("t_c={}\n", sig10(crit.t_c));
    out
}
