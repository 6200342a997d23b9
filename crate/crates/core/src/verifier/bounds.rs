//! Global bounds over sampled pairs `(x, y)`, in every regime of
//! `||x - y|| / ||x||`.

use std::collections::BTreeMap;

use serde_json::json;

use super::sampling::Sampler;
use super::{case_label, BoundReport, CheckBuilder, Ctx, IDENTITY_TOL};
use crate::error::Result;
use crate::functional::Functional;
use crate::moduli::{log_grid, ModulusCurve};
use crate::space::{dot, GaugeExponent, Point, SpaceSpec};

const GRID_POINTS: usize = 200;
const GRID_LO: f64 = 1e-3;

/// A nondecreasing modulus read off a grid from one side: `floor` never
/// exceeds the value at the argument, `ceil` never falls below it.
struct Bracket<'a> {
    curve: &'a ModulusCurve,
}

impl Bracket<'_> {
    fn floor(&self, a: f64) -> f64 {
        let k = self.curve.taus.partition_point(|&t| t <= a);
        if k == 0 {
            0.0
        } else {
            self.curve.values[k - 1]
        }
    }

    fn ceil(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let k = self.curve.taus.partition_point(|&t| t < a);
        self.curve.values[k.min(self.curve.len() - 1)]
    }
}

/// One sampled pair with everything the bounds need.
struct PairData {
    x: Point,
    y: Point,
    nx: f64,
    dist: f64,
    max: f64,
    d: f64,
    sym: f64,
    scale: f64,
}

fn pair_data(space: &SpaceSpec, p: GaugeExponent, seed: u64, stream: u64, count: usize) -> Result<Vec<PairData>> {
    let f = Functional::norm_power(space.clone(), p);
    let mut s = Sampler::new(seed, stream);
    s.pairs(space, count)
        .into_iter()
        .map(|(x, y)| {
            let jx = f.subgradient(&x)?;
            let jy = f.subgradient(&y)?;
            let nx = space.norm_unchecked(&x);
            let ny = space.norm_unchecked(&y);
            let d = f.bregman_unchecked(&jx, &y, &x);
            let sym = dot(&jx, &x) - dot(&jx, &y) - dot(&jy, &x) + dot(&jy, &y);
            let scale = f.eval_unchecked(&x).max(f.eval_unchecked(&y)).max(dot(&jx, &y.sub(&x)).abs());
            Ok(PairData { dist: space.norm_unchecked(&y.sub(&x)), max: nx.max(ny), nx, d, sym, scale, x, y })
        })
        .collect()
}

/// Running extremum of `num / den` with its witness.
struct Fit {
    upper: bool,
    value: f64,
    at: Option<(Point, Point)>,
}

impl Fit {
    fn upper() -> Self {
        Fit { upper: true, value: 0.0, at: None }
    }

    fn lower() -> Self {
        Fit { upper: false, value: f64::INFINITY, at: None }
    }

    fn push(&mut self, num: f64, den: f64, pd: &PairData) {
        if num == 0.0 && den == 0.0 {
            return;
        }
        let r = num / den;
        let better = if self.upper { r > self.value } else { r < self.value };
        if better || r.is_nan() {
            self.value = if r.is_nan() { f64::NAN } else { r };
            self.at = Some((pd.x.clone(), pd.y.clone()));
        }
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "constant": if self.value.is_finite() { Some(self.value) } else { None },
            "witness": self.at.as_ref().map(|(x, y)| vec![x.clone(), y.clone()]),
        })
    }

    fn positive_finite(&self) -> bool {
        self.value.is_finite() && self.value > 0.0
    }
}

fn case_stream(check: u64, idx: usize) -> u64 {
    (check << 32) | idx as u64
}

pub(crate) fn sym_implications(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("sym-implications", IDENTITY_TOL, true).run(ctx, |b| {
        let c = ctx.sweep.tau_bar;
        let rho_grid = log_grid(GRID_LO, 4.0, GRID_POINTS);
        let delta_grid = log_grid(GRID_LO, 2.0, GRID_POINTS);
        let mut per_case = BTreeMap::new();
        let mut fitted = 0.0_f64;
        for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
            let label = case_label(&space, p);
            let rho_curve = ctx.cache.space_rho(&space, &rho_grid)?;
            let delta_curve = ctx.cache.space_delta(&space, &delta_grid)?;
            let rho = Bracket { curve: &rho_curve };
            let delta = Bracket { curve: &delta_curve };
            let pairs = pair_data(&space, p, ctx.sweep.seed, case_stream(6, idx), ctx.sweep.pairs)?;
            let q = p.p();
            let (mut a, mut bb, mut cc) = (Fit::upper(), Fit::upper(), Fit::upper());
            let (mut d, mut e, mut ff) = (Fit::lower(), Fit::lower(), Fit::lower());
            for pd in &pairs {
                let mp = pd.max.powf(q);
                let u = pd.dist / pd.nx;
                b.margin((4.0 * mp - pd.sym) / mp, || (format!("{label} sym <= 4 max^p"), None, vec![pd.x.clone(), pd.y.clone()]));
                b.condition("symmetric divergence nonnegative", pd.sym >= -IDENTITY_TOL * (1.0 + pd.scale));
                if pd.dist == 0.0 {
                    b.condition("divergence vanishes at y = x", pd.d.abs() <= IDENTITY_TOL * (1.0 + pd.scale));
                    continue;
                }
                let xp = pd.nx.powf(q);
                if u <= c {
                    a.push(pd.d, xp * rho.floor(u), pd);
                    d.push(pd.d, xp * delta.ceil(u), pd);
                }
                let wide = rho.floor(2.0 * pd.dist / pd.max);
                bb.push(pd.sym, mp * wide, pd);
                cc.push(pd.d, mp * wide, pd);
                let narrow = delta.ceil(pd.dist / pd.max);
                e.push(pd.d, mp * narrow, pd);
                ff.push(pd.sym, mp * narrow, pd);
            }
            for (name, fit) in [("a", &a), ("b", &bb), ("c", &cc), ("d", &d), ("e", &e), ("f", &ff)] {
                b.condition(format!("({name}) constant positive and finite"), fit.positive_finite());
            }
            b.condition("(c) constant within (b) constant", cc.value <= bb.value * (1.0 + 1e-12));
            b.condition("(f) constant above (e) constant", ff.value >= e.value * (1.0 - 1e-12));
            fitted = fitted.max(bb.value);
            per_case.insert(
                label,
                json!({
                    "a": a.json(), "b": bb.json(), "c": cc.json(),
                    "d": d.json(), "e": e.json(), "f": ff.json(),
                    "restriction": c,
                    "proof_constant_b": 4.0 / rho.floor(c),
                    "pairs": pairs.len(),
                }),
            );
        }
        b.set_fitted(Some(fitted));
        b.detail("by_case", per_case);
        b.detail("phi_upper", "rho_X");
        b.detail("phi_lower", "delta_X");
        Ok(())
    })
}

pub(crate) fn uniform_bounds_corollary(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("uniform-bounds-corollary", IDENTITY_TOL, true).run(ctx, |b| {
        let tau_bar = ctx.sweep.tau_bar;
        let rho_grid = log_grid(GRID_LO, 4.0, GRID_POINTS);
        let delta_grid = log_grid(GRID_LO, 2.0, GRID_POINTS);
        let mut per_case = BTreeMap::new();
        for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
            let label = case_label(&space, p);
            let rho_curve = ctx.cache.space_rho(&space, &rho_grid)?;
            let delta_curve = ctx.cache.space_delta(&space, &delta_grid)?;
            let rho = Bracket { curve: &rho_curve };
            let delta = Bracket { curve: &delta_curve };
            let pairs = pair_data(&space, p, ctx.sweep.seed, case_stream(7, idx), ctx.sweep.pairs)?;
            let q = p.p();
            let s = space.r().min(2.0);
            let cv = space.r().max(2.0);
            let (mut c1, mut c2) = (Fit::upper(), Fit::lower());
            let (mut smooth, mut convex) = (Fit::upper(), Fit::lower());
            let mut max_u: f64 = 0.0;
            for pd in &pairs {
                b.margin(pd.d / (1.0 + pd.scale), || (format!("{label} nonnegativity"), None, vec![pd.x.clone(), pd.y.clone()]));
                if pd.dist == 0.0 {
                    continue;
                }
                let u = pd.dist / pd.nx;
                max_u = max_u.max(u);
                let mp = pd.max.powf(q);
                c1.push(pd.d, mp * rho.floor(2.0 * pd.dist / pd.max), pd);
                c2.push(pd.d, mp * delta.ceil(pd.dist / (3.0 * pd.max)), pd);
                if q == s {
                    smooth.push(pd.d, pd.dist.powf(s), pd);
                } else if u <= tau_bar {
                    smooth.push(pd.d, pd.nx.powf(q - s) * pd.dist.powf(s), pd);
                }
                if q == cv {
                    convex.push(pd.d, pd.dist.powf(cv), pd);
                } else if u <= tau_bar {
                    convex.push(pd.d, pd.nx.powf(q - cv) * pd.dist.powf(cv), pd);
                }
            }
            b.condition("C1 finite", c1.value.is_finite());
            b.condition("C2 positive", c2.positive_finite());
            b.condition("power-type smoothness constant finite", smooth.value.is_finite());
            b.condition("power-type convexity constant positive", convex.positive_finite());
            per_case.insert(
                label,
                json!({
                    "c1": c1.json(),
                    "c2": c2.json(),
                    "smoothness": { "exponent": s, "restricted": q != s, "fit": smooth.json() },
                    "convexity": { "exponent": cv, "restricted": q != cv, "fit": convex.json() },
                    "max_ratio": max_u,
                    "pairs": pairs.len(),
                }),
            );
        }
        b.detail("by_case", per_case);
        Ok(())
    })
}
