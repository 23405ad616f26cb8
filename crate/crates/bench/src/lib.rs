//! Seeded synthetic inputs shared by the benchmarks.

use baryscore::{DiscreteMeasure, LayeredEmbedding};
use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const VOCAB: [&str; 16] = [
    "the", "a", "of", "model", "text", "score", "layer", "token", "cat", "sat", "on", "mat", "blue", "sky", "ran", "home",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| StandardNormal.sample(rng))
}

pub fn measure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DiscreteMeasure {
    let support = gaussian(rng, (n, d));
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(support, Array1::from_iter(raw.iter().map(|w| w / total))).unwrap()
}

/// An `L x n x d` embedding whose layers drift from a shared base.
pub fn embedding(rng: &mut ChaCha8Rng, id: &str, layers: usize, n: usize, d: usize) -> LayeredEmbedding {
    let base = gaussian(rng, (n, d));
    let tensor = Array3::from_shape_fn((layers, n, d), |(l, i, k)| {
        let z: f64 = StandardNormal.sample(rng);
        base[[i, k]] + 0.3 * l as f64 * z
    });
    let tokens = (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect();
    LayeredEmbedding::new(id, tokens, tensor).unwrap()
}

/// `count` aligned (candidate, reference) pairs with 1..=max_tokens tokens each.
pub fn pairs(seed: u64, count: usize, layers: usize, max_tokens: usize, d: usize) -> (Vec<LayeredEmbedding>, Vec<LayeredEmbedding>) {
    let mut rng = rng(seed);
    let mut cands = Vec::with_capacity(count);
    let mut refs = Vec::with_capacity(count);
    for i in 0..count {
        let n = rng.random_range(1..=max_tokens);
        let m = rng.random_range(1..=max_tokens);
        cands.push(embedding(&mut rng, &format!("cand{i}"), layers, n, d));
        refs.push(embedding(&mut rng, &format!("ref{i}"), layers, m, d));
    }
    (cands, refs)
}
