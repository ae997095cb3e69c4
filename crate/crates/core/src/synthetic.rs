//! Seeded synthetic instances for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ranking::{Label, Sample};

/// Two groups with Gaussian scores; group `b` is shifted down by `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedScores {
    pub n: usize,
    pub share_b: f64,
    pub positive_rate: f64,
    pub mean_positive: f64,
    pub mean_negative: f64,
    pub sd: f64,
    pub shift: f64,
}

impl Default for BiasedScores {
    fn default() -> Self {
        BiasedScores {
            n: 10_000,
            share_b: 0.5,
            positive_rate: 0.5,
            mean_positive: 0.65,
            mean_negative: 0.45,
            sd: 0.12,
            shift: 0.2,
        }
    }
}

impl BiasedScores {
    pub fn generate(&self, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.sd).expect("finite sd");
        (0..self.n)
            .map(|row| {
                let in_b = rng.random_bool(self.share_b);
                let positive = rng.random_bool(self.positive_rate);
                let mean = if positive {
                    self.mean_positive
                } else {
                    self.mean_negative
                };
                let shift = if in_b { self.shift } else { 0.0 };
                let score = (mean - shift + noise.sample(&mut rng)).clamp(0.0, 1.0);
                let group = if in_b { "b" } else { "a" };
                let label = if positive { Label::Positive } else { Label::Negative };
                Sample::new(row, score, label, group).with_id(format!("s{row}"))
            })
            .collect()
    }
}

/// Random labels and uniform scores for groups of the given sizes; each
/// group gets at least one positive and one negative when it has two or
/// more items.
pub fn random_instance(rng: &mut impl Rng, sizes: &[(&str, usize)]) -> Vec<Sample> {
    let mut out = Vec::new();
    for &(name, n) in sizes {
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if n >= 2 {
            labels[0] = true;
            labels[1] = false;
            // keep the forced pair from always sitting at the same ranks
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                labels.swap(i, j);
            }
        }
        for (t, positive) in labels.into_iter().enumerate() {
            let row = out.len();
            let label = if positive { Label::Positive } else { Label::Negative };
            out.push(Sample::new(row, rng.random::<f64>(), label, name).with_id(format!("{name}{}", t + 1)));
        }
    }
    out
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
