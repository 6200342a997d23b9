//! Discrete one-dimensional Legendre-Fenchel transforms.
//!
//! A [`GridFunction`] tabulates an extended-value function on a strictly
//! increasing grid. `+inf` entries are stored as [`f64::INFINITY`] and never
//! take part in a supremum. The transform first reduces the finite points to
//! their lower convex hull and then sweeps the (sorted) slopes with a single
//! pointer, so a transform costs `O(N + M)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moduli::EstimatorConfig;
use crate::space::SpaceSpec;
use crate::verifier::BoundReport;

/// Values at or above this magnitude are read as the `+inf` marker.
pub const INFINITY_THRESHOLD: f64 = 1e300;

/// A tabulated function `x_k -> y_k`; `y_k` may be `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedGrid);
        }
        if ys.iter().any(|y| y.is_nan() || *y <= -INFINITY_THRESHOLD) {
            return Err(Error::Parse("grid values must be finite or +inf".into()));
        }
        let ys = ys
            .into_iter()
            .map(|y| if y >= INFINITY_THRESHOLD { f64::INFINITY } else { y })
            .collect();
        Ok(GridFunction { xs, ys })
    }

    /// Tabulates `f` on `xs`.
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn finite_count(&self) -> usize {
        self.ys.iter().filter(|y| y.is_finite()).count()
    }

    /// Piecewise-linear interpolation; `+inf` outside the grid or next to an
    /// infinite node.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 || x.is_nan() || x < self.xs[0] || x > self.xs[n - 1] {
            return f64::INFINITY;
        }
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(k) => self.ys[k],
            Err(k) => {
                let (x0, x1) = (self.xs[k - 1], self.xs[k]);
                let (y0, y1) = (self.ys[k - 1], self.ys[k]);
                if !(y0.is_finite() && y1.is_finite()) {
                    return f64::INFINITY;
                }
                let w = (x - x0) / (x1 - x0);
                y0 + w * (y1 - y0)
            }
        }
    }

    /// Slope of the segment to the right of `x` (left segment at the right end).
    pub fn right_slope(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n < 2 {
            return f64::NAN;
        }
        let k = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(k) => k,
            Err(k) => k.saturating_sub(1),
        }
        .min(n - 2);
        (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k])
    }

    /// `min_k` of the discrete second differences, `f[k-1, k, k+1]`, over
    /// consecutive finite triples. Nonnegative for convex data.
    pub fn min_second_difference(&self) -> f64 {
        let mut best = f64::INFINITY;
        for k in 1..self.xs.len().saturating_sub(1) {
            let (a, b, c) = (self.ys[k - 1], self.ys[k], self.ys[k + 1]);
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                continue;
            }
            let left = (b - a) / (self.xs[k] - self.xs[k - 1]);
            let right = (c - b) / (self.xs[k + 1] - self.xs[k]);
            best = best.min(right - left);
        }
        best
    }

    /// Pointwise scaling `c * f` for `c > 0`.
    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| c * y).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "y"])?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let ys = if y.is_infinite() {
                "inf".to_string()
            } else {
                format_float(*y)
            };
            wtr.write_record([format_float(*x), ys])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse("expected columns x,y".into()));
            }
            xs.push(parse_float(&rec[0])?);
            ys.push(parse_float(&rec[1])?);
        }
        Self::new(xs, ys)
    }
}

/// Shortest round-trip representation of a float (`inf` for `+inf`).
pub(crate) fn format_float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

pub(crate) fn parse_float(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{t:?}: {e}"))),
    }
}

/// `n` equispaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Vertices of the lower convex hull of the finite points, left to right.
fn lower_hull(f: &GridFunction) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in f.xs.iter().zip(&f.ys) {
        if !y.is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // Drop the middle vertex unless it lies strictly below the chord.
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    hull
}

/// Discrete conjugate `f*(s) = max_k [s x_k - f(x_k)]` on a strictly
/// increasing slope grid.
pub fn legendre_transform(f: &GridFunction, slopes: &[f64]) -> Result<GridFunction> {
    let found = f.finite_count();
    if found < 2 {
        return Err(Error::DegenerateGrid { needed: 2, found });
    }
    if slopes.is_empty() || slopes.iter().any(|s| !s.is_finite()) || slopes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedGrid);
    }
    let hull = lower_hull(f);
    let edge_slope = |k: usize| (hull[k + 1].1 - hull[k].1) / (hull[k + 1].0 - hull[k].0);
    let mut k = 0;
    let mut values = Vec::with_capacity(slopes.len());
    for &s in slopes {
        while k + 1 < hull.len() && edge_slope(k) < s {
            k += 1;
        }
        let (x, y) = hull[k];
        values.push(s * x - y);
    }
    GridFunction::new(slopes.to_vec(), values)
}

/// `f**` on the grid of `f`: the lower convex envelope of the finite points,
/// `+inf` outside their range.
pub fn biconjugate(f: &GridFunction) -> Result<GridFunction> {
    let found = f.finite_count();
    if found < 2 {
        return Err(Error::DegenerateGrid { needed: 2, found });
    }
    let hull = lower_hull(f);
    let mut slopes: Vec<f64> = hull
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let first = slopes[0];
    let last = slopes[slopes.len() - 1];
    slopes.insert(0, first - 1.0 - first.abs());
    slopes.push(last + 1.0 + last.abs());
    // Rounding can leave nearly collinear hull edges out of order.
    let mut top = f64::NEG_INFINITY;
    slopes.retain(|&s| {
        let keep = s > top;
        top = top.max(s);
        keep
    });
    let conj = legendre_transform(f, &slopes)?;
    let lo = hull[0].0;
    let hi = hull[hull.len() - 1].0;
    let back = legendre_transform(&conj, &f.xs)?;
    let ys = f
        .xs
        .iter()
        .zip(back.ys)
        .map(|(&x, y)| if x < lo || x > hi { f64::INFINITY } else { y })
        .collect();
    GridFunction::new(f.xs.clone(), ys)
}

/// Compares the conjugate of `2 delta_X`, extended by `+inf` off `[0, 2]`,
/// with `2 rho_{X*}` on slopes in `[0, 1]`, using `grid` points per curve.
pub fn check_delta_rho_duality(space: &SpaceSpec, cfg: EstimatorConfig, grid: usize) -> Result<BoundReport> {
    crate::verifier::delta_rho_duality_report(space, grid, cfg)
}
