//! Word-vector files and label embeddings.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;

use crate::error::{CdamError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordVectors {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn load(path: &Path) -> Result<Self> {
        parse_word_vectors(&std::fs::read_to_string(path)?)
    }

    /// Exact token first, then its lowercase form.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors
            .get(token)
            .or_else(|| self.vectors.get(&token.to_lowercase()))
            .map(Vec::as_slice)
    }
}

/// One token per line followed by its whitespace-separated components.
pub fn parse_word_vectors(text: &str) -> Result<WordVectors> {
    let mut wv = WordVectors::default();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CdamError::Format(format!("line {}: bad float `{f}`", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(CdamError::Format(format!("line {}: token without vector", i + 1)));
        }
        if wv.vectors.is_empty() {
            wv.dim = values.len();
        } else if values.len() != wv.dim {
            return Err(CdamError::Format(format!(
                "line {}: {} components, expected {}",
                i + 1,
                values.len(),
                wv.dim
            )));
        }
        wv.vectors.insert(token.to_string(), values);
    }
    Ok(wv)
}

/// Truncates or cyclically tiles `raw` to `len`, then min-max scales to
/// `[0, 1]`. A constant input maps to 0.5 everywhere.
pub fn fit_to_length(raw: &[f64], len: usize) -> Vec<f64> {
    if raw.is_empty() {
        return vec![0.5; len];
    }
    let fitted: Vec<f64> = raw.iter().cycle().take(len).copied().collect();
    let lo = fitted.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![0.5; len];
    }
    fitted.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Embeds labels for the free neuron slots.
#[derive(Debug, Clone, Default)]
pub struct LabelEmbedder {
    pub vectors: Option<WordVectors>,
    /// Unknown labels get a uniform vector seeded by a hash of the label.
    pub fallback: bool,
}

impl LabelEmbedder {
    pub fn hashed() -> Self {
        Self {
            vectors: None,
            fallback: true,
        }
    }

    pub fn embed(&self, label: &str, len: usize) -> Result<Vec<f64>> {
        if let Some(raw) = self.vectors.as_ref().and_then(|wv| wv.get(label)) {
            return Ok(fit_to_length(raw, len));
        }
        if !self.fallback {
            return Err(CdamError::Lookup(format!("no embedding for label `{label}`")));
        }
        let seed = rng::stable_hash(label.as_bytes());
        let mut r = rng::stream(seed, &[rng::TAG_LABEL, len as u64]);
        Ok((0..len).map(|_| r.random::<f64>()).collect())
    }
}

pub fn embed_label(embedder: &LabelEmbedder, label: &str, len: usize) -> Result<Vec<f64>> {
    embedder.embed(label, len)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "wife 0.5 -1.25 2.0\nhusband 1e-1 0 3\n";

    #[test]
    fn parses_fixture() {
        let wv = parse_word_vectors(FIXTURE).unwrap();
        assert_eq!(wv.dim, 3);
        assert_eq!(wv.get("wife").unwrap(), &[0.5, -1.25, 2.0]);
        assert_eq!(wv.get("Husband").unwrap(), &[0.1, 0.0, 3.0]);
        assert!(matches!(
            parse_word_vectors("a 1 2\nb 1\n"),
            Err(CdamError::Format(_))
        ));
    }

    #[test]
    fn fitting_rules() {
        assert_eq!(fit_to_length(&[1.0, 3.0, 2.0], 5), vec![0.0, 1.0, 0.5, 0.0, 1.0]);
        assert_eq!(fit_to_length(&[4.0, 0.0, 2.0], 2), vec![1.0, 0.0]);
        assert_eq!(fit_to_length(&[7.0, 7.0], 3), vec![0.5; 3]);
    }

    #[test]
    fn embedder_lookup_and_fallback() {
        let strict = LabelEmbedder {
            vectors: Some(parse_word_vectors(FIXTURE).unwrap()),
            fallback: false,
        };
        assert_eq!(strict.embed("wife", 3).unwrap(), vec![1.75 / 3.25, 0.0, 1.0]);
        assert!(matches!(strict.embed("son", 3), Err(CdamError::Lookup(_))));

        let hashed = LabelEmbedder::hashed();
        let a = hashed.embed("brother", 250).unwrap();
        assert_eq!(a, hashed.embed("brother", 250).unwrap());
        assert_ne!(a, hashed.embed("sister", 250).unwrap());
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
