//! Checks on the moduli of functionals.

use std::collections::BTreeMap;

use super::{case_label, case_points, BoundReport, CheckBuilder, Ctx, CurveCache, SweepSpec, DUALITY_TOL, ESTIMATOR_TOL};
use crate::conjugate::legendre_transform;
use crate::error::{Error, Result};
use crate::functional::{Functional, ScalarFn};
use crate::moduli::{power_type_fit, tau_grid, ModulusCurve};
use crate::space::{Point, SpaceSpec};

const LAMBDAS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];

/// `rho(lambda tau) >= lambda rho(tau)` and the same for `delta`, on grid
/// pairs with `lambda tau <= tau_bar`.
pub(crate) fn monotone_scaling(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("monotone-scaling", ESTIMATOR_TOL, true).run(ctx, |b| {
        let taus = ctx.sweep.taus();
        let n = taus.len();
        for (space, p) in ctx.sweep.cases() {
            let label = case_label(&space, p);
            let f = Functional::norm_power(space.clone(), p);
            for (x, j) in case_points(ctx.sweep, &space, p) {
                let curves = [("rho", ctx.cache.func_rho(&f, &x, &j, &taus)?), ("delta", ctx.cache.func_delta(&f, &x, &j, &taus)?)];
                for (name, c) in &curves {
                    for lambda in LAMBDAS {
                        for k in 1..=n {
                            let m = lambda * k as f64;
                            if m.fract() != 0.0 || m as usize > n {
                                continue;
                            }
                            let big = c.values[m as usize - 1];
                            let small = c.values[k - 1];
                            b.margin(big - lambda * small, || {
                                (format!("{label} {name} lambda={lambda}"), Some(taus[k - 1]), vec![x.clone()])
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// A scalar `phi` composed with the norm of `space`, for the chain rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRuleCase {
    pub phi: ScalarFn,
    pub space: SpaceSpec,
}

/// The identity, `t^2/2` and `t^3/3` on `l3^2`, `l2^2` and `l3^2`.
pub fn chain_rule_cases() -> Vec<ChainRuleCase> {
    let l = |r: f64| SpaceSpec::new(2, r).expect("valid space");
    vec![
        ChainRuleCase { phi: ScalarFn::Power { p: 1.0 }, space: l(3.0) },
        ChainRuleCase { phi: ScalarFn::Power { p: 2.0 }, space: l(2.0) },
        ChainRuleCase { phi: ScalarFn::Power { p: 3.0 }, space: l(3.0) },
    ]
}

fn phi_label(phi: &ScalarFn) -> String {
    match phi {
        ScalarFn::Power { p } => format!("|t|^{p}/{p}"),
        ScalarFn::InversePower { p } => format!("({p}t)^(1/{p})"),
        ScalarFn::Tabulated(_) => "tabulated".to_string(),
    }
}

/// Chain rule margins for `phi o ||.||` at the base points of `space` and at
/// `1.7 e_1`.
pub(crate) fn chain_rule_case(b: &mut CheckBuilder, case: &ChainRuleCase, sweep: &SweepSpec, cache: &CurveCache) -> Result<f64> {
    if !case.phi.is_convex() {
        return Err(Error::NonConvex(phi_label(&case.phi)));
    }
    let space = &case.space;
    let label = format!("{} o ||.|| on {}", phi_label(&case.phi), space.label());
    let taus = sweep.taus();
    let norm = Functional::plain_norm(space.clone());
    let comp = Functional::composed(space.clone(), case.phi.clone())?;
    let mut xs = super::base_points(space, sweep.base_points, sweep.seed);
    xs.push(space.normalize(&Point::basis(space.dim(), 0)).expect("nonzero").scaled(1.7));
    let mut worst = f64::INFINITY;
    for x in &xs {
        let s = space.norm_unchecked(x);
        let t = case.phi.derivative(s);
        let j = norm.subgradient(x)?;
        let jn = space.dual().norm_unchecked(&j);
        let tj = j.scaled(t);
        let lhs = cache.func_rho(&comp, x, &tj, &taus)?;
        let inner = cache.func_rho(&norm, x, &j, &taus)?;
        for (k, &tau) in taus.iter().enumerate() {
            let mut r = inner.values[k];
            if let Some(y) = lhs.witnesses.get(k).and_then(|w| w.first()) {
                r = r.max(norm.bregman_unchecked(&j, &x.add_scaled(y, tau), x).abs());
            }
            let rhs = t.abs() * r + case.phi.rho(s, t, jn * tau + r);
            let m = rhs - lhs.values[k];
            worst = worst.min(m);
            b.margin(m, || (label.clone(), Some(tau), vec![x.clone()]));
        }
    }
    Ok(worst)
}

/// Chain rule check on the given cases. A non-convex `phi` is an error.
pub fn check_chain_rule(cases: &[ChainRuleCase], sweep: &SweepSpec, cache: &CurveCache) -> Result<BoundReport> {
    sweep.validate()?;
    if let Some(c) = cases.iter().find(|c| !c.phi.is_convex()) {
        return Err(Error::NonConvex(phi_label(&c.phi)));
    }
    let ctx = Ctx { sweep, cache };
    Ok(chain_rule_with(&ctx, cases))
}

fn chain_rule_with(ctx: &Ctx, cases: &[ChainRuleCase]) -> BoundReport {
    CheckBuilder::new("chain-rule", ESTIMATOR_TOL, true).run(ctx, |b| {
        let mut per_case = BTreeMap::new();
        for case in cases {
            let label = format!("{} o ||.|| on {}", phi_label(&case.phi), case.space.label());
            let m = chain_rule_case(b, case, ctx.sweep, ctx.cache)?;
            per_case.insert(label, m);
        }
        b.detail("min_margin_by_case", per_case);
        Ok(())
    })
}

pub(crate) fn chain_rule(ctx: &Ctx) -> BoundReport {
    chain_rule_with(ctx, &chain_rule_cases())
}

/// The shared slope grid `(0, s_max]` with `s_max = min_x delta(tau_bar)/tau_bar`.
pub(crate) fn duality_slopes(ctx: &Ctx, f: &Functional, pts: &[(Point, Point)]) -> Result<(Vec<f64>, Vec<std::sync::Arc<ModulusCurve>>)> {
    let taus = ctx.sweep.taus();
    let mut curves = Vec::new();
    let mut s_max = f64::INFINITY;
    for (x, j) in pts {
        let c = ctx.cache.func_delta(f, x, j, &taus)?;
        s_max = s_max.min(c.values[taus.len() - 1] / ctx.sweep.tau_bar);
        curves.push(c);
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::OutOfRange { value: s_max, range: "delta(tau_bar)/tau_bar > 0" });
    }
    Ok((tau_grid(s_max, ctx.sweep.grid), curves))
}

/// Dual curves `rho_{F*, j_p(x)}^{x}` on the shared slope grid.
pub(crate) fn dual_curves(ctx: &Ctx, f: &Functional, pts: &[(Point, Point)], slopes: &[f64]) -> Result<Vec<std::sync::Arc<ModulusCurve>>> {
    let conj = f.conjugate()?;
    pts.iter()
        .map(|(_, j)| {
            let back = conj.subgradient(j)?;
            ctx.cache.func_rho(&conj, j, &back, slopes)
        })
        .collect()
}

pub(crate) fn conv_smoo_duality(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("conv-smoo-duality", DUALITY_TOL, true).run(ctx, |b| {
        let mut per_case = BTreeMap::new();
        let mut fits = BTreeMap::new();
        for (space, p) in ctx.sweep.cases() {
            let label = case_label(&space, p);
            let f = Functional::norm_power(space.clone(), p);
            let pts = case_points(ctx.sweep, &space, p);
            let (slopes, deltas) = duality_slopes(ctx, &f, &pts)?;
            let duals = dual_curves(ctx, &f, &pts, &slopes)?;
            let mut worst: f64 = 0.0;
            for ((x, _), (delta, rho)) in pts.iter().zip(deltas.iter().zip(&duals)) {
                let conj = legendre_transform(&delta.to_grid_function()?, &slopes)?;
                for (k, &s) in slopes.iter().enumerate() {
                    let gap = (conj.ys()[k] - rho.values[k]).abs();
                    worst = worst.max(gap);
                    b.margin(-gap, || (label.clone(), Some(s), vec![x.clone()]));
                }
            }
            per_case.insert(label.clone(), worst);
            let envelope_delta = envelope(&deltas, f64::min);
            let envelope_rho = envelope(&duals, f64::max);
            let tau_fit = ctx.sweep.tau_bar / 10.0;
            let s_fit = slopes[slopes.len() - 1] / 10.0;
            let conv = power_type_fit(&envelope_delta, tau_fit).ok();
            let smoo = power_type_fit(&envelope_rho, s_fit).ok();
            fits.insert(
                label,
                serde_json::json!({
                    "convexity_exponent": conv.map(|f| f.exponent),
                    "convexity_slope": conv.map(|f| f.slope),
                    "dual_smoothness_exponent": smoo.map(|f| f.exponent),
                    "dual_smoothness_slope": smoo.map(|f| f.slope),
                    "inverse_sum": match (conv, smoo) {
                        (Some(c), Some(s)) => Some(1.0 / c.exponent + 1.0 / s.exponent),
                        _ => None,
                    },
                }),
            );
        }
        b.detail("discrepancy_by_case", per_case);
        b.detail("exponent_fits", fits);
        Ok(())
    })
}

/// Pointwise min or max of curves on a shared grid.
pub(crate) fn envelope(curves: &[std::sync::Arc<ModulusCurve>], pick: fn(f64, f64) -> f64) -> ModulusCurve {
    let first = &curves[0];
    let mut out = ModulusCurve {
        witnesses: Vec::new(),
        ..(**first).clone()
    };
    for c in &curves[1..] {
        for (v, w) in out.values.iter_mut().zip(&c.values) {
            *v = pick(*v, *w);
        }
    }
    out
}
