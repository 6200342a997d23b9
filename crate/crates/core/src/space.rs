//! Weighted finite-dimensional `l_r` spaces.
//!
//! A [`SpaceSpec`] describes `R^n` with the norm `(sum_i w_i |x_i|^r)^(1/r)`.
//! Its dual is again a weighted `l_r'` space with `1/r + 1/r' = 1` and weights
//! `w_i^(1 - r')`, so that the plain bilinear pairing `sum_i x*_i x_i` is the
//! duality pairing. The dual exponent and weights are computed once at
//! construction and swapped by [`SpaceSpec::dual`], which makes
//! `s.dual().dual() == s` hold exactly.
//!
//! For `r = inf` the weights are ignored (the `w_i^(1/r) -> 1` limit), and for
//! `r in {1, inf}` only norm evaluation is supported.

use std::f64::consts::PI;
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `R^n`; dual points are points of the dual [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Point(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Point, factor: f64) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Point) -> Point {
        self.add_scaled(other, -1.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Conjugate exponent `q'` with `1/q + 1/q' = 1` (`1 <-> inf`).
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// The exponent `p > 1` of a norm power `(1/p)||x||^p` together with its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeExponent {
    p: f64,
    p_conj: f64,
}

impl GaugeExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidGaugeExponent(p));
        }
        let p_conj = conjugate_exponent(p);
        if !(p_conj.is_finite() && p_conj > 1.0) {
            return Err(Error::InvalidGaugeExponent(p));
        }
        Ok(GaugeExponent { p, p_conj })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn conj_p(&self) -> f64 {
        self.p_conj
    }

    /// The conjugate exponent as a gauge; `g.conj().conj() == g` exactly.
    pub fn conj(&self) -> GaugeExponent {
        GaugeExponent {
            p: self.p_conj,
            p_conj: self.p,
        }
    }
}

/// A weighted `l_r` norm on `R^n` together with its dual data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    dim: usize,
    r: f64,
    r_conj: f64,
    weights: Vec<f64>,
    dual_weights: Vec<f64>,
}

impl SpaceSpec {
    /// Unweighted `l_r^n`.
    pub fn new(dim: usize, r: f64) -> Result<Self> {
        Self::with_weights(r, vec![1.0; dim])
    }

    pub fn with_weights(r: f64, weights: Vec<f64>) -> Result<Self> {
        let dim = weights.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidNormExponent(r));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidWeights);
        }
        let r_conj = conjugate_exponent(r);
        let dual_weights = if r > 1.0 && r.is_finite() {
            weights.iter().map(|w| w.powf(1.0 - r_conj)).collect()
        } else {
            vec![1.0; dim]
        };
        Ok(SpaceSpec {
            dim,
            r,
            r_conj,
            weights,
            dual_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Exponent of the dual norm.
    pub fn r_conj(&self) -> f64 {
        self.r_conj
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// True when `r in (1, inf)`, i.e. the norm is smooth and strictly convex.
    pub fn is_smooth(&self) -> bool {
        self.r > 1.0 && self.r.is_finite()
    }

    pub fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::UnsupportedNorm(self.r))
        }
    }

    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec {
            dim: self.dim,
            r: self.r_conj,
            r_conj: self.r,
            weights: self.dual_weights.clone(),
            dual_weights: self.weights.clone(),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            })
        }
    }

    /// Short identifier such as `l3^2` or `l1.5^3w` (weighted).
    pub fn label(&self) -> String {
        format!(
            "l{}^{}{}",
            self.r,
            self.dim,
            if self.is_unweighted() { "" } else { "w" }
        )
    }

    /// `||x||` without the dimension check.
    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        weighted_norm(self.r, &self.weights, x)
    }

    /// Dual norm `||x*||_*` without the dimension check.
    pub(crate) fn dual_norm_unchecked(&self, xstar: &[f64]) -> f64 {
        weighted_norm(self.r_conj, &self.dual_weights, xstar)
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub fn dual_norm(&self, xstar: &[f64]) -> Result<f64> {
        self.check_dim(xstar.len())?;
        Ok(self.dual_norm_unchecked(xstar))
    }

    /// `u / ||u||`, or `None` for the zero vector.
    pub fn normalize(&self, u: &[f64]) -> Option<Point> {
        let n = self.norm_unchecked(u);
        if n > 0.0 && n.is_finite() {
            Some(Point(u.iter().map(|c| c / n).collect()))
        } else {
            None
        }
    }

    /// Writes `u / ||u||` into `out`; false when `u` cannot be normalized.
    pub(crate) fn normalize_into(&self, u: &[f64], out: &mut [f64]) -> bool {
        let n = self.norm_unchecked(u);
        if n > 0.0 && n.is_finite() {
            for (o, c) in out.iter_mut().zip(u) {
                *o = c / n;
            }
            true
        } else {
            false
        }
    }

    /// Closed-form selection `j_q(x)` of the duality mapping for any `q >= 1`.
    pub(crate) fn duality_selection(&self, q: f64, x: &[f64]) -> Point {
        let nx = self.norm_unchecked(x);
        if nx == 0.0 {
            return Point::zeros(self.dim);
        }
        let r = self.r;
        let lead = if q == r { 1.0 } else { nx.powf(q - r) };
        Point(
            x.iter()
                .zip(&self.weights)
                .map(|(&xi, &w)| {
                    let mag = if r == 2.0 { xi.abs() } else { xi.abs().powf(r - 1.0) };
                    lead * w * mag.copysign(xi)
                })
                .collect(),
        )
    }
}

fn weighted_norm(r: f64, weights: &[f64], x: &[f64]) -> f64 {
    if r.is_infinite() {
        return x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    }
    if r == 1.0 {
        return x.iter().zip(weights).map(|(c, w)| w * c.abs()).sum();
    }
    if r == 2.0 {
        return x
            .iter()
            .zip(weights)
            .map(|(c, w)| w * c * c)
            .sum::<f64>()
            .sqrt();
    }
    let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = x
        .iter()
        .zip(weights)
        .map(|(c, w)| w * pow_r(c.abs() / m, r))
        .sum();
    m * root_r(s, r)
}

/// `a^r` with exact fast paths for the exponents used most.
#[inline]
fn pow_r(a: f64, r: f64) -> f64 {
    if r == 3.0 {
        a * a * a
    } else if r == 4.0 {
        let b = a * a;
        b * b
    } else if r == 1.5 {
        a * a.sqrt()
    } else {
        a.powf(r)
    }
}

/// `s^(1/r)`, matching [`pow_r`].
#[inline]
fn root_r(s: f64, r: f64) -> f64 {
    if r == 3.0 {
        s.cbrt()
    } else if r == 4.0 {
        s.sqrt().sqrt()
    } else if r == 1.5 {
        (s * s).cbrt()
    } else {
        s.powf(1.0 / r)
    }
}

/// `||x||` in `space`.
pub fn norm(space: &SpaceSpec, x: &Point) -> Result<f64> {
    space.norm(x)
}

/// Plain bilinear pairing `<x*, x> = sum_i x*_i x_i`.
pub fn pairing(xstar: &[f64], x: &[f64]) -> Result<f64> {
    if xstar.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: xstar.len(),
            found: x.len(),
        });
    }
    Ok(dot(xstar, x))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The duality mapping selection `j_p(x)`, a point of `space.dual()`.
///
/// Coordinates are `||x||^(p-r) w_i |x_i|^(r-1) sign(x_i)`, and `j_p(0) = 0`.
pub fn duality_map(space: &SpaceSpec, p: GaugeExponent, x: &Point) -> Result<Point> {
    space.require_smooth()?;
    space.check_dim(x.dim())?;
    Ok(space.duality_selection(p.p(), x))
}

/// SplitMix64 step, used to derive independent seeds for sub-tasks.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Structured points of the unit sphere: `+-e_i` first, then normalized
/// sign patterns of the all-ones diagonal.
pub fn structured_sphere_points(space: &SpaceSpec) -> Vec<Point> {
    let n = space.dim();
    let mut out = Vec::new();
    for i in 0..n {
        let e = Point::basis(n, i);
        let p = space.normalize(&e).expect("basis vector is nonzero");
        out.push(p.clone());
        out.push(p.scaled(-1.0));
    }
    // All sign patterns for small n; only the two main diagonals otherwise.
    let patterns: Vec<u64> = if n <= 6 {
        (0..1u64 << n).collect()
    } else {
        vec![0, (1u64 << n.min(63)) - 1]
    };
    for mask in patterns {
        let v: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        out.push(space.normalize(&v).expect("diagonal is nonzero"));
    }
    out
}

/// Deterministic sample of `count` points of the unit sphere of `space`.
///
/// Structured points (see [`structured_sphere_points`]) come first, followed by
/// seeded random directions: equispaced angles with a random offset for
/// `n = 2`, normalized Gaussian vectors otherwise.
pub fn sphere_sample(space: &SpaceSpec, seed: u64, count: usize) -> Vec<Point> {
    sphere_sample_flat(space, seed, count)
        .chunks(space.dim())
        .map(|c| Point(c.to_vec()))
        .collect()
}

/// [`sphere_sample`] with the points laid end to end.
pub(crate) fn sphere_sample_flat(space: &SpaceSpec, seed: u64, count: usize) -> Vec<f64> {
    let n = space.dim();
    let structured = structured_sphere_points(space);
    let head = structured.len().min(count);
    let mut out = Vec::with_capacity(count * n);
    for p in &structured[..head] {
        out.extend_from_slice(p);
    }
    let remaining = count - head;
    if remaining == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];
    if n == 2 {
        let offset: f64 = rng.random::<f64>() * 2.0 * PI / remaining as f64;
        for k in 0..remaining {
            let theta = offset + 2.0 * PI * k as f64 / remaining as f64;
            let ok = space.normalize_into(&[theta.cos(), theta.sin()], &mut p);
            debug_assert!(ok);
            out.extend_from_slice(&p);
        }
    } else {
        while out.len() < count * n {
            for c in u.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            if space.normalize_into(&u, &mut p) {
                out.extend_from_slice(&p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn norm_examples() {
        let l2 = SpaceSpec::new(2, 2.0).unwrap();
        assert_eq!(l2.norm(&[3.0, 4.0]).unwrap(), 5.0);
        let l4 = SpaceSpec::new(2, 4.0).unwrap();
        assert!(close(l4.norm(&[1.0, 1.0]).unwrap(), 2f64.powf(0.25), 1e-15));
        for r in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let s = SpaceSpec::new(3, r).unwrap();
            assert_eq!(s.norm(&[0.0; 3]).unwrap(), 0.0);
        }
        let linf = SpaceSpec::new(2, f64::INFINITY).unwrap();
        assert_eq!(linf.norm(&[-3.0, 2.0]).unwrap(), 3.0);
        let l1 = SpaceSpec::new(2, 1.0).unwrap();
        assert_eq!(l1.norm(&[-3.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(SpaceSpec::new(1, 2.0), Err(Error::DimensionTooSmall(1))));
        assert!(matches!(SpaceSpec::new(2, 0.5), Err(Error::InvalidNormExponent(_))));
        assert!(matches!(
            SpaceSpec::with_weights(2.0, vec![1.0, 0.0]),
            Err(Error::InvalidWeights)
        ));
        assert!(GaugeExponent::new(1.0).is_err());
        assert!(GaugeExponent::new(f64::INFINITY).is_err());
        let l2 = SpaceSpec::new(2, 2.0).unwrap();
        assert!(matches!(
            l2.norm(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(pairing(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert!(pairing(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn holder_on_random_pairs() {
        for r in [1.5, 2.0, 3.0, 4.0] {
            let s = SpaceSpec::with_weights(r, vec![0.5, 1.0, 2.0]).unwrap();
            let xs = sphere_sample(&s, 7, 110);
            let ds = sphere_sample(&s.dual(), 8, 110);
            for (k, (x, xs_)) in xs.iter().zip(&ds).enumerate().skip(10) {
                let x = x.scaled(1.0 + k as f64 * 0.1);
                let lhs = pairing(xs_, &x).unwrap().abs();
                let rhs = s.dual_norm(xs_).unwrap() * s.norm(&x).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn duality_map_examples() {
        let l2 = SpaceSpec::new(2, 2.0).unwrap();
        let x = Point::new(vec![3.0, 4.0]);
        let j2 = duality_map(&l2, GaugeExponent::new(2.0).unwrap(), &x).unwrap();
        assert_eq!(j2.coords(), &[3.0, 4.0]);
        let j3 = duality_map(&l2, GaugeExponent::new(3.0).unwrap(), &x).unwrap();
        assert!(close(j3[0], 15.0, 1e-15) && close(j3[1], 20.0, 1e-15));

        // l4, p = 2, x = (1,1): check the defining identities independently.
        let l4 = SpaceSpec::new(2, 4.0).unwrap();
        let x = Point::new(vec![1.0, 1.0]);
        let j = duality_map(&l4, GaugeExponent::new(2.0).unwrap(), &x).unwrap();
        let nx = l4.norm(&x).unwrap();
        let dual_norm = (j[0].abs().powf(4.0 / 3.0) + j[1].abs().powf(4.0 / 3.0)).powf(0.75);
        assert!(close(dual_norm, nx, 1e-12));
        assert!(close(j[0] * x[0] + j[1] * x[1], nx * nx, 1e-12));
        assert!(close(j[0], 0.5f64.sqrt(), 1e-12) && close(j[1], 0.5f64.sqrt(), 1e-12));
    }

    #[test]
    fn duality_map_zero_and_nonsmooth() {
        let l3 = SpaceSpec::new(3, 3.0).unwrap();
        let p = GaugeExponent::new(1.5).unwrap();
        assert!(duality_map(&l3, p, &Point::zeros(3)).unwrap().is_zero());
        for r in [1.0, f64::INFINITY] {
            let s = SpaceSpec::new(2, r).unwrap();
            assert!(matches!(
                duality_map(&s, p, &Point::new(vec![1.0, 0.0])),
                Err(Error::UnsupportedNorm(_))
            ));
        }
    }

    #[test]
    fn dual_round_trip_is_exact() {
        for r in [1.5, 2.0, 3.0, 4.0, 7.0 / 3.0] {
            let s = SpaceSpec::with_weights(r, vec![0.3, 1.7, 2.9]).unwrap();
            let dd = s.dual().dual();
            assert_eq!(dd, s);
            let x = [0.7, -1.3, 2.2];
            assert_eq!(dd.norm(&x).unwrap().to_bits(), s.norm(&x).unwrap().to_bits());
        }
        let g = GaugeExponent::new(3.0).unwrap();
        assert_eq!(g.conj().p(), 1.5);
        assert_eq!(g.conj().conj(), g);
    }

    #[test]
    fn sphere_sample_contracts() {
        let l2 = SpaceSpec::new(2, 2.0).unwrap();
        let pts = sphere_sample(&l2, 1, 4);
        for e in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
            assert!(pts.iter().any(|p| p.coords() == e));
        }
        for s in [
            SpaceSpec::new(2, 1.5).unwrap(),
            SpaceSpec::new(5, 3.0).unwrap(),
            SpaceSpec::with_weights(4.0, vec![1.0, 3.0, 0.2]).unwrap(),
        ] {
            let a = sphere_sample(&s, 42, 300);
            assert_eq!(a.len(), 300);
            for p in &a {
                assert!((s.norm(p).unwrap() - 1.0).abs() <= 1e-12);
            }
            assert_eq!(a, sphere_sample(&s, 42, 300));
            assert_ne!(a, sphere_sample(&s, 43, 300));
        }
        assert!(sphere_sample(&l2, 0, 1).len() == 1);
    }
}
