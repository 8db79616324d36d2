//! Seeded sampling of algebra, covector and group elements.
//!
//! Coordinates are drawn uniformly from [-1, 1]; group elements are
//! exponentials of such algebra samples.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lie::{AlgebraVector, Covector, GroupElement, LieContext};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct Sampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in [-1, 1].
    pub fn unit(&mut self) -> f64 {
        self.rng.random_range(-1.0..=1.0)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn coords(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.unit())
    }

    pub fn algebra(&mut self, ctx: &LieContext) -> AlgebraVector {
        let c = self.coords(ctx.dim());
        ctx.vector(c.as_slice()).expect("dimension matches")
    }

    pub fn covector(&mut self, ctx: &LieContext) -> Covector {
        Covector::new(self.coords(ctx.dim()))
    }

    pub fn group(&mut self, ctx: &LieContext) -> GroupElement {
        let x = self.algebra(ctx);
        ctx.exp(&x).expect("sample belongs to the context")
    }
}
