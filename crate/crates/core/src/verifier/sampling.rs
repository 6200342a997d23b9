use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::space::{derive_seed, Point, SpaceSpec};

/// `count` unit base points: `e_1`, the diagonal, then seeded random points.
pub fn base_points(space: &SpaceSpec, count: usize, seed: u64) -> Vec<Point> {
    let n = space.dim();
    let mut out = Vec::with_capacity(count);
    out.push(space.normalize(&Point::basis(n, 0)).expect("basis vector is nonzero"));
    if count > 1 {
        out.push(space.normalize(&vec![1.0; n]).expect("diagonal is nonzero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        if let Some(p) = space.normalize(&gaussian(&mut rng, n)) {
            out.push(p);
        }
    }
    out.truncate(count);
    out
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Seeded generator of test points.
pub(crate) struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub(crate) fn new(seed: u64, stream: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, stream)),
        }
    }

    pub(crate) fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u: f64 = self.rng.random();
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    }

    /// Random direction of norm one in `space`.
    pub(crate) fn unit(&mut self, space: &SpaceSpec) -> Point {
        loop {
            if let Some(p) = space.normalize(&gaussian(&mut self.rng, space.dim())) {
                return p;
            }
        }
    }

    /// Random point with norm log-uniform in `[lo, hi]`.
    pub(crate) fn point(&mut self, space: &SpaceSpec, lo: f64, hi: f64) -> Point {
        let r = self.log_uniform(lo, hi);
        self.unit(space).scaled(r)
    }

    /// Pairs `(x, y)` with `||x - y|| / ||x||` log-uniform in `[0.01, 100]`,
    /// followed by `y = x, -x, 0, 2x, -3x` for the first base scale.
    pub(crate) fn pairs(&mut self, space: &SpaceSpec, count: usize) -> Vec<(Point, Point)> {
        let mut out = Vec::with_capacity(count + 5);
        for _ in 0..count {
            let x = self.point(space, 0.1, 10.0);
            let nx = space.norm_unchecked(&x);
            let u = self.log_uniform(0.01, 100.0);
            let d = self.unit(space);
            let y = x.add_scaled(&d, u * nx);
            out.push((x, y));
        }
        let x = self.point(space, 0.5, 2.0);
        for c in [1.0, -1.0, 0.0, 2.0, -3.0] {
            out.push((x.clone(), x.scaled(c)));
        }
        out
    }
}
