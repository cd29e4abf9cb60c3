//! Seedable noise generation for the simulator. The algorithm name is
//! recorded in bundle provenance so Monte-Carlo runs stay reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub const RNG_ALGORITHM: &str = "chacha12/box-muller";

pub struct NoiseRng {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NoiseRng {
    pub fn new(seed: u64) -> Self {
        NoiseRng { rng: ChaCha12Rng::seed_from_u64(seed), spare: None }
    }

    /// Standard normal deviate (Box-Muller).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1: f64 = self.rng.random::<f64>().max(1e-300);
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Complex Gaussian with total standard deviation `sigma`.
    pub fn complex_noise(&mut self, sigma: f64) -> Complex64 {
        Complex64::new(self.standard_normal(), self.standard_normal())
            * (sigma / std::f64::consts::SQRT_2)
    }
}
