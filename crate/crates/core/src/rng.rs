//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by a seed and
//! a [`Stream`] tag, so problem coefficients, start points and component
//! sampling never share state. Component sampling is counter based: the index
//! used at outer iteration `k` depends only on `(seed, k)`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Coefficients = 1,
    Shifts = 2,
    Sampling = 3,
    StartPoint = 4,
    Estimator = 5,
    Selection = 6,
}

pub fn stream(seed: u64, tag: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag as u64);
    rng
}

/// Uniform component index in `0..n` for outer iteration `k`.
#[derive(Debug, Clone)]
pub struct ComponentSampler {
    rng: ChaCha8Rng,
    n: usize,
}

// Each iteration owns a disjoint window of 16 words in the stream.
const WORDS_PER_DRAW: u128 = 16;

impl ComponentSampler {
    pub fn new(seed: u64, n: usize) -> Self {
        assert!(n > 0, "cannot sample from zero components");
        Self { rng: stream(seed, Stream::Sampling), n }
    }

    pub fn component(&mut self, k: u64) -> usize {
        self.rng.set_word_pos(k as u128 * WORDS_PER_DRAW);
        self.rng.random_range(0..self.n)
    }
}

/// Uniformly distributed direction on the unit sphere of `R^d`.
pub fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let nrm = linalg::norm(&v);
        if nrm > 0.0 && nrm.is_finite() {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// `center + radius * u` with `u` a seeded uniform unit direction.
pub fn point_at_distance(center: &[f64], radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Stream::StartPoint);
    let u = unit_vector(&mut rng, center.len());
    center.iter().zip(&u).map(|(c, ui)| c + radius * ui).collect()
}

/// Point drawn uniformly from the ball of the given radius around `center`.
pub fn point_in_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let u = unit_vector(rng, d);
    let scale: f64 = rng.random::<f64>();
    let rho = radius * libm::pow(scale, 1.0 / d as f64);
    center.iter().zip(&u).map(|(c, ui)| c + rho * ui).collect()
}
