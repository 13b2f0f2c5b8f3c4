//! Seeded probe-point generation.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ball;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn gaussian_vector(&mut self, dim: usize) -> DVector<f64> {
        DVector::from_iterator(dim, (0..dim).map(|_| self.rng.sample::<f64, _>(StandardNormal)))
    }

    /// Uniformly distributed unit vector in ℝ^{dim}.
    pub fn unit_vector(&mut self, dim: usize) -> DVector<f64> {
        loop {
            let v = self.gaussian_vector(dim);
            let n = v.norm();
            if n > 1e-6 {
                return v / n;
            }
        }
    }

    /// Point with `rmin <= |x| <= rmax` whose last complex coordinate has
    /// modulus at least `0.2 |x|`, so that chart-based frames are well defined.
    pub fn point_in_shell(&mut self, n: usize, rmin: f64, rmax: f64) -> DVector<f64> {
        loop {
            let d = self.unit_vector(2 * n);
            if d[2 * n - 2].hypot(d[2 * n - 1]) < 0.2 {
                continue;
            }
            return d * self.uniform(rmin, rmax);
        }
    }

    /// Unit vector tangent to the unit sphere at the unit vector `v`.
    pub fn tangent_to_sphere(&mut self, v: &DVector<f64>) -> DVector<f64> {
        loop {
            let w = self.gaussian_vector(v.len());
            let t = &w - v * w.dot(v);
            let n = t.norm();
            if n > 1e-6 {
                return t / n;
            }
        }
    }

    /// Unit vector in ℋ at `x` (tangent to the sphere and orthogonal to `J_st x`).
    pub fn horizontal_vector(&mut self, x: &DVector<f64>) -> DVector<f64> {
        let basis = ball::distribution_h(x).expect("nonzero point");
        let mut v = DVector::zeros(x.len());
        for b in &basis {
            v += b * self.uniform(-1.0, 1.0);
        }
        let n = v.norm();
        if n < 1e-9 {
            basis[0].clone()
        } else {
            v / n
        }
    }
}
