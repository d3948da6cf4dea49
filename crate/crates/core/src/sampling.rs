//! Deterministic random sampling helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::contact::{HVec, Point5, Vec5};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_hvec(rng: &mut impl Rng) -> HVec {
    HVec::from_fn(|_, _| normal(rng))
}

pub fn unit_hvec(rng: &mut impl Rng) -> HVec {
    loop {
        let v = normal_hvec(rng);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Uniform point in the closed 5-ball of the given radius.
pub fn ball5(rng: &mut impl Rng, radius: f64) -> Point5 {
    loop {
        let v = Vec5::from_fn(|_, _| normal(rng));
        let n = v.norm();
        if n > 1e-12 {
            let s: f64 = rng.gen::<f64>().powf(0.2);
            return Point5::from_vec(&(v * (radius * s / n)));
        }
    }
}
