//! Pattern sources: random vectors, IDX archives, image frames, word vectors
//! and composite automaton patterns.

mod automaton;
mod frames;
mod idx;
mod pnm;
mod words;

pub use automaton::{
    compose_automaton_patterns, stimulate_label, AutomatonSpec, ComposedAutomaton,
    ContentSource, SlotMap, StateSpec, TransitionSpec, VertexRole,
};
pub use frames::{ingest_frames, ingest_frames_with, load_frame, FrameSampler, Normalizer};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IdxImages};
pub use pnm::{parse_pnm, read_pnm, PnmImage};
pub use words::{embed_label, fit_to_length, parse_word_vectors, LabelEmbedder, WordVectors};

use ndarray::Array2;
use rand::Rng;

use crate::dynamics::PatternMatrix;
use crate::error::{CdamError, Result};
use crate::rng;

/// `p` patterns of `n` independent uniform `[0, 1]` values.
pub fn random_patterns(n: usize, p: usize, seed: u64) -> Result<PatternMatrix> {
    if n == 0 || p == 0 {
        return Err(CdamError::InvalidSize(format!(
            "random patterns need n, p >= 1, got n={n}, p={p}"
        )));
    }
    let mut r = rng::stream(seed, &[rng::TAG_PATTERNS]);
    let mut values = Array2::zeros((n, p));
    for mu in 0..p {
        for i in 0..n {
            values[[i, mu]] = r.random::<f64>();
        }
    }
    PatternMatrix::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_pattern_contract() {
        let pm = random_patterns(1000, 30, 123).unwrap();
        let mean = pm.values().mean().unwrap();
        assert!((0.49..=0.51).contains(&mean), "{mean}");
        assert_eq!(pm, random_patterns(1000, 30, 123).unwrap());
        let one = random_patterns(1, 1, 0).unwrap();
        assert!((0.0..=1.0).contains(&one.values()[[0, 0]]));
        assert!(random_patterns(0, 3, 0).is_err());
    }
}
