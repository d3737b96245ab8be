//! Seeded sampling of test points. All randomness in the crate goes through here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::Region;
use crate::{c64, C64};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) -> C64 {
        c64(self.uniform(x0, x1), self.uniform(y0, y1))
    }

    /// Uniform by area on `inner <= |z - center| < outer`.
    pub fn ring(&mut self, center: C64, inner: f64, outer: f64) -> C64 {
        let u = self.uniform(inner * inner, outer * outer);
        let th = self.uniform(0.0, std::f64::consts::TAU);
        center + C64::from_polar(u.sqrt(), th)
    }

    /// Rejection sampling inside the bounding box; unbounded regions use the
    /// supplied fallback window.
    pub fn in_region(&mut self, region: &Region, window: (f64, f64, f64, f64)) -> C64 {
        let (x0, x1, y0, y1) = region.bounding_box().unwrap_or(window);
        loop {
            let z = self.rect(x0, x1, y0, y1);
            if region.contains(z) {
                return z;
            }
        }
    }

    pub fn points(&mut self, region: &Region, window: (f64, f64, f64, f64), n: usize) -> Vec<C64> {
        (0..n).map(|_| self.in_region(region, window)).collect()
    }
}
