//! Textual forms of the noise-distribution and sub-sampling settings.

use std::fmt;
use std::str::FromStr;

use subnoise::zipf::{CriticalSource, FitMethod};
use subnoise::RateSource;

/// How the rate of a sub-sampled noise table is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubRate {
    Fit(FitMethod),
    Search,
    Manual(f64),
}

impl SubRate {
    pub fn source(self) -> RateSource {
        match self {
            SubRate::Fit(FitMethod::Wlse1) => RateSource::Wlse1,
            SubRate::Fit(FitMethod::Wlse2) => RateSource::Wlse2,
            SubRate::Search => RateSource::Search,
            SubRate::Manual(_) => RateSource::Manual,
        }
    }

    pub fn critical_source(self) -> Option<CriticalSource> {
        match self {
            SubRate::Fit(m) => Some(CriticalSource::Fit(m)),
            SubRate::Search => Some(CriticalSource::Search),
            SubRate::Manual(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseSpec {
    Uniform,
    Unigram,
    Smoothed(f64),
    Subsampled(SubRate),
}

impl FromStr for NoiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let number = |x: &str, what: &str| {
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| format!("bad {what} {x:?} in noise spec {s:?}"))
        };
        match parts[..] {
            ["uniform"] => Ok(NoiseSpec::Uniform),
            ["unigram"] => Ok(NoiseSpec::Unigram),
            ["smoothed"] => Ok(NoiseSpec::Smoothed(0.75)),
            ["smoothed", p] => Ok(NoiseSpec::Smoothed(number(p, "power")?)),
            ["subsampled"] => Ok(NoiseSpec::Subsampled(SubRate::Fit(FitMethod::Wlse2))),
            ["subsampled", "search"] => Ok(NoiseSpec::Subsampled(SubRate::Search)),
            ["subsampled", "manual", t] => match number(t, "t_c")? {
                t if t > 0.0 => Ok(NoiseSpec::Subsampled(SubRate::Manual(t))),
                _ => Err(format!("t_c must be > 0 in noise spec {s:?}")),
            },
            ["subsampled", "manual"] => Err("subsampled:manual needs a rate, e.g. subsampled:manual:1e-5".into()),
            ["subsampled", m] => m
                .parse::<FitMethod>()
                .map(|m| NoiseSpec::Subsampled(SubRate::Fit(m)))
                .map_err(|e| e.to_string()),
            _ => Err(format!(
                "unknown noise spec {s:?} (expected uniform, unigram, smoothed:<power>, \
                 subsampled:wlse1|wlse2|search|manual:<t_c>)"
            )),
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Uniform => f.write_str("uniform"),
            NoiseSpec::Unigram => f.write_str("unigram"),
            NoiseSpec::Smoothed(p) => write!(f, "smoothed:{p}"),
            NoiseSpec::Subsampled(SubRate::Fit(m)) => write!(f, "subsampled:{m}"),
            NoiseSpec::Subsampled(SubRate::Search) => f.write_str("subsampled:search"),
            NoiseSpec::Subsampled(SubRate::Manual(t)) => write!(f, "subsampled:manual:{t:e}"),
        }
    }
}

/// Corpus sub-sampling rate, or `none`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subsample(pub Option<f64>);

impl FromStr for Subsample {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "none" | "off" | "0" => Ok(Subsample(None)),
            v => match v.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(Subsample(Some(t))),
                _ => Err(format!("bad sub-sampling rate {v:?} (positive number or none)")),
            },
        }
    }
}

impl fmt::Display for Subsample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(t) => write!(f, "{t:e}"),
            None => f.write_str("none"),
        }
    }
}
