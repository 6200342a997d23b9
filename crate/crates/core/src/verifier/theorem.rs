//! The four claims on norm powers `(1/p)||.||^p`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::functional_checks::{dual_curves, duality_slopes, envelope};
use super::{case_label, case_points, BoundReport, CheckBuilder, Ctx, CurveCache, SweepSpec, Witness, ESTIMATOR_TOL, DUALITY_TOL};
use crate::conjugate::{legendre_transform, GridFunction};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::moduli::{power_type_fit, tau_grid, ModulusCurve};
use crate::space::{GaugeExponent, Point, SpaceSpec};

/// Relative growth of the fitted constant allowed when `tau_bar` shrinks.
const STABILITY_TOL: f64 = 1e-3;
/// Fitted constants below `1 - STABILITY_TOL` point at an under-sampled estimate.
const MIN_UPPER_CONSTANT: f64 = 1.0 - STABILITY_TOL;
const DECADES: usize = 3;
const RATIO_STEPS: i32 = 40;
const RATIO_LIMIT: f64 = 0.01;

/// The function `phi` fed to the transfer claims.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvelopeBound {
    /// The measured envelope over base points: the maximum of the functional
    /// moduli of smoothness, or the minimum of the moduli of convexity.
    Measured,
    Zero,
    /// `phi(tau) = c tau^e`.
    Power { c: f64, e: f64 },
}

impl EnvelopeBound {
    fn values(&self, measured: &ModulusCurve) -> Vec<f64> {
        match *self {
            EnvelopeBound::Measured => measured.values.clone(),
            EnvelopeBound::Zero => vec![0.0; measured.len()],
            EnvelopeBound::Power { c, e } => measured.taus.iter().map(|t| c * t.powf(e)).collect(),
        }
    }
}

fn rho_curves(cache: &CurveCache, f: &Functional, pts: &[(Point, Point)], taus: &[f64]) -> Result<Vec<Arc<ModulusCurve>>> {
    pts.iter().map(|(x, j)| cache.func_rho(f, x, j, taus)).collect()
}

/// `|D_F|` along the extremal pair `(x, y)` of `rho_X` at grid index `k`: a
/// lower bound for `rho_{F,x}^{j_p(x)}(tau_k)` that is at least `rho_X(tau_k)`.
fn witness_value(f: &Functional, rho: &ModulusCurve, k: usize) -> Result<Option<(f64, Point)>> {
    let Some([x, y]) = rho.witnesses.get(k).map(|w| w.as_slice()) else {
        return Ok(None);
    };
    let j = f.subgradient(x)?;
    let t = rho.taus[k];
    let v = [1.0, -1.0]
        .iter()
        .map(|s| f.bregman_unchecked(&j, &x.add_scaled(y, s * t), x).abs())
        .fold(0.0, f64::max);
    Ok(Some((v, x.clone())))
}

/// `max_{x, tau} rho_{F,x}^{j_p(x)}(tau) / rho_X(tau)` over the base points
/// and the extremal points of `rho_X`.
fn upper_constant(cache: &CurveCache, space: &SpaceSpec, f: &Functional, pts: &[(Point, Point)], taus: &[f64]) -> Result<(f64, Witness)> {
    let rho = cache.space_rho(space, taus)?;
    let curves = rho_curves(cache, f, pts, taus)?;
    let mut best = (f64::NEG_INFINITY, Witness { context: String::new(), tau: None, points: Vec::new(), margin: 0.0 });
    for ((x, _), c) in pts.iter().zip(&curves) {
        for (k, &t) in taus.iter().enumerate() {
            if rho.values[k] <= 0.0 {
                continue;
            }
            let ratio = c.values[k] / rho.values[k];
            if ratio > best.0 {
                let mut points = vec![x.clone()];
                points.extend(c.witnesses.get(k).cloned().unwrap_or_default());
                best = (ratio, Witness { context: format!("{} ratio", f.label()), tau: Some(t), points, margin: ratio });
            }
        }
    }
    for (k, &t) in taus.iter().enumerate() {
        if let Some((v, x)) = witness_value(f, &rho, k)? {
            let ratio = v / rho.values[k];
            if rho.values[k] > 0.0 && ratio > best.0 {
                best = (ratio, Witness { context: format!("{} ratio at extremal pair", f.label()), tau: Some(t), points: vec![x], margin: ratio });
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoFit("no positive space modulus on the grid"));
    }
    Ok(best)
}

pub(crate) fn xu_roach_upper(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("xu-roach-upper", STABILITY_TOL, true).run(ctx, |b| {
        let mut per_case = BTreeMap::new();
        let mut fitted = f64::NEG_INFINITY;
        for (space, p) in ctx.sweep.cases() {
            let label = case_label(&space, p);
            let f = Functional::norm_power(space.clone(), p);
            let pts = case_points(ctx.sweep, &space, p);
            let mut cs = Vec::new();
            let mut finest = Vec::new();
            for d in 0..DECADES {
                let tau_bar = ctx.sweep.tau_bar / 10f64.powi(d as i32);
                let taus = tau_grid(tau_bar, ctx.sweep.grid);
                let (c, w) = upper_constant(ctx.cache, &space, &f, &pts, &taus)?;
                if d == 0 {
                    b.witness(w);
                }
                cs.push(c);
                finest = rho_curves(ctx.cache, &f, &pts, &taus)?;
            }
            for d in 1..DECADES {
                let growth = (cs[d] - cs[d - 1]) / cs[d - 1];
                b.margin(-growth, || (format!("{label} tau_bar/{}", 10usize.pow(d as u32)), None, Vec::new()));
            }
            b.condition("finite constants", cs.iter().all(|c| c.is_finite()));
            if space.r() == 2.0 {
                b.condition("hilbert constant within [1, p + 2]", cs[0] >= MIN_UPPER_CONSTANT && cs[0] <= p.p() + 2.0);
            }
            if let Some(c) = cs.iter().find(|&&c| c < MIN_UPPER_CONSTANT) {
                b.inconclusive(format!("{label}: constant {c} below 1"));
            }
            fitted = fitted.max(cs[0]);
            let env = envelope(&finest, f64::max);
            let fit = power_type_fit(&env, env.taus[env.len() - 1]).ok();
            per_case.insert(
                label,
                json!({
                    "constants": cs,
                    "tau_bars": (0..DECADES).map(|d| ctx.sweep.tau_bar / 10f64.powi(d as i32)).collect::<Vec<_>>(),
                    "smoothness_exponent": fit.map(|f| f.exponent),
                    "smoothness_slope": fit.map(|f| f.slope),
                    "small_tau_limit": if space.r() >= 2.0 { 1.0 + p.p() } else { 2.0 },
                }),
            );
        }
        if fitted.is_finite() {
            b.set_fitted(Some(fitted));
        }
        b.detail("by_case", per_case);
        Ok(())
    })
}

pub(crate) fn xu_roach_lower(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("xu-roach-lower", ESTIMATOR_TOL, true).run(ctx, |b| {
        let taus = ctx.sweep.taus();
        let tau_bar = ctx.sweep.tau_bar;
        let mut per_case = BTreeMap::new();
        let mut excluded_total = 0;
        for (space, p) in ctx.sweep.cases() {
            let label = case_label(&space, p);
            let f = Functional::norm_power(space.clone(), p);
            let conj = f.conjugate()?;
            let dual = space.dual();
            let pts = case_points(ctx.sweep, &space, p);
            // The dual problem at j_p(x), with the selection j_{p'}(j_p(x)).
            let dual_pts: Vec<(Point, Point)> = pts
                .iter()
                .map(|(_, j)| conj.subgradient(j).map(|back| (j.clone(), back)))
                .collect::<Result<_>>()?;
            let (c, _) = upper_constant(ctx.cache, &dual, &conj, &dual_pts, &taus)?;
            let rho_dual = ctx.cache.space_rho(&dual, &taus)?;
            let limit = c * rho_dual.values[taus.len() - 1] / tau_bar;
            let kept: Vec<usize> = (0..taus.len()).filter(|&k| taus[k] <= limit).collect();
            let excluded = taus.len() - kept.len();
            excluded_total += excluded;
            let mut worst = f64::INFINITY;
            if !kept.is_empty() {
                let args: Vec<f64> = kept.iter().map(|&k| taus[k] / c).collect();
                let delta_x = ctx.cache.space_delta(&space, &args)?;
                for (x, j) in &pts {
                    let d = ctx.cache.func_delta(&f, x, j, &taus)?;
                    for (i, &k) in kept.iter().enumerate() {
                        let m = d.values[k] - c * delta_x.values[i];
                        worst = worst.min(m);
                        b.margin(m, || (label.clone(), Some(taus[k]), vec![x.clone()]));
                    }
                }
            }
            per_case.insert(
                label,
                json!({
                    "dual_constant": c,
                    "dual_space": dual.label(),
                    "dual_exponent": p.conj_p(),
                    "tau_limit": limit,
                    "excluded": excluded,
                    "min_margin": if worst.is_finite() { Some(worst) } else { None },
                }),
            );
        }
        b.detail("by_case", per_case);
        b.detail("excluded_taus", excluded_total);
        b.detail("dual_selection", "closed-form j_{p'} of the dual space, mapping j_p(x) back to x");
        Ok(())
    })
}

fn transfer_points(ctx: &Ctx, space: &SpaceSpec, p: GaugeExponent) -> Vec<(Point, Point)> {
    case_points(ctx.sweep, space, p)
}

fn smoothness_case(b: &mut CheckBuilder, ctx: &Ctx, space: &SpaceSpec, p: GaugeExponent, bound: EnvelopeBound) -> Result<serde_json::Value> {
    let label = case_label(space, p);
    let f = Functional::norm_power(space.clone(), p);
    let pts = transfer_points(ctx, space, p);
    let literal = p.p().powf(1.0 / p.p() - 1.0);
    let mut fits = Vec::new();
    for tau_bar in [ctx.sweep.tau_bar, ctx.sweep.tau_bar / 2.0] {
        let taus = tau_grid(tau_bar, ctx.sweep.grid);
        let curves = rho_curves(ctx.cache, &f, &pts, &taus)?;
        let rho = ctx.cache.space_rho(space, &taus)?;
        let mut measured = envelope(&curves, f64::max);
        for k in 0..taus.len() {
            if let Some((v, _)) = witness_value(&f, &rho, k)? {
                measured.values[k] = measured.values[k].max(v);
            }
        }
        let phi = bound.values(&measured);
        let mut hyp = f64::INFINITY;
        for (k, &t) in taus.iter().enumerate() {
            let m = phi[k] - measured.values[k];
            hyp = hyp.min(m);
            b.margin(m, || (format!("{label} hypothesis tau_bar={tau_bar}"), Some(t), Vec::new()));
        }
        let fit = |coef: f64| {
            taus.iter()
                .enumerate()
                .map(|(k, &t)| (rho.values[k] - coef * phi[k]) / (t * t))
                .fold(0.0_f64, f64::max)
        };
        fits.push((fit(1.0), fit(literal), hyp));
    }
    let (c, c_lit, _) = fits[0];
    let (c_half, c_lit_half, _) = fits[1];
    let stable = |a: f64, h: f64| a.is_finite() && h.is_finite() && h <= 1.05 * a + 1e-4;
    b.condition(format!("{label}: constant stable under halving"), stable(c, c_half));
    b.fitted(c);
    Ok(json!({
        "constant": c,
        "constant_half": c_half,
        "literal_factor": literal,
        "literal_constant": c_lit,
        "literal_constant_half": c_lit_half,
        "literal_stable": stable(c_lit, c_lit_half),
    }))
}

/// Transfer of smoothness `rho_X(tau) <= phi(tau) + C tau^2` with `phi` an
/// upper envelope of the functional moduli of smoothness.
pub fn check_smoothness_transfer(sweep: &SweepSpec, cache: &CurveCache, bound: EnvelopeBound) -> Result<BoundReport> {
    sweep.validate()?;
    let ctx = Ctx { sweep, cache };
    Ok(smoothness_transfer_with(&ctx, bound))
}

fn smoothness_transfer_with(ctx: &Ctx, bound: EnvelopeBound) -> BoundReport {
    CheckBuilder::new("smoothness-transfer", ESTIMATOR_TOL, true).run(ctx, |b| {
        let mut per_case = BTreeMap::new();
        for (space, p) in ctx.sweep.cases() {
            let v = smoothness_case(b, ctx, &space, p, bound)?;
            per_case.insert(case_label(&space, p), v);
        }
        b.detail("by_case", per_case);
        b.detail("bound", bound);
        b.detail("gated_factor", 1.0);
        Ok(())
    })
}

pub(crate) fn smoothness_transfer(ctx: &Ctx) -> BoundReport {
    smoothness_transfer_with(ctx, EnvelopeBound::Measured)
}

/// `phi` extended linearly past `tau_bar` up to `2 tau_bar`.
fn extended(taus: &[f64], phi: &[f64]) -> Result<GridFunction> {
    let n = taus.len();
    let tau_bar = taus[n - 1];
    let slope = phi[n - 1] / tau_bar;
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    xs.extend_from_slice(taus);
    ys.extend_from_slice(phi);
    for k in 1..=n {
        let t = tau_bar * (1.0 + k as f64 / n as f64);
        xs.push(t);
        ys.push(t * slope);
    }
    GridFunction::new(xs, ys)
}

fn convexity_case(b: &mut CheckBuilder, ctx: &Ctx, space: &SpaceSpec, p: GaugeExponent, bound: EnvelopeBound) -> Result<serde_json::Value> {
    let label = case_label(space, p);
    let f = Functional::norm_power(space.clone(), p);
    let taus = ctx.sweep.taus();
    let pts = transfer_points(ctx, space, p);
    let (slopes, deltas) = duality_slopes(ctx, &f, &pts)?;
    let measured = envelope(&deltas, f64::min);
    let phi = bound.values(&measured);
    let scale = phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(k) = (1..phi.len()).find(|&k| phi[k] < phi[k - 1] - 1e-9 * scale) {
        return Err(Error::NonMonotoneEnvelope(k));
    }
    b.condition(format!("{label}: phi positive"), phi.iter().all(|&v| v > 0.0));
    let hyp = (0..taus.len()).map(|k| measured.values[k] - phi[k]).fold(f64::INFINITY, f64::min);
    b.condition(format!("{label}: delta_F >= phi"), hyp >= -ESTIMATOR_TOL);

    let tilde = extended(&taus, &phi)?;
    let s_max = phi[phi.len() - 1] / ctx.sweep.tau_bar;
    let mut probe: Vec<f64> = (0..=RATIO_STEPS).rev().map(|k| s_max * 2f64.powi(-k)).collect();
    probe.dedup();
    let conj = legendre_transform(&tilde, &probe)?;
    // Ratios from the largest slope down.
    let ratios: Vec<f64> = probe.iter().zip(conj.ys()).rev().map(|(s, v)| v / s).collect();
    let nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last = ratios.last().copied().unwrap_or(f64::INFINITY);
    b.condition(format!("{label}: conjugate ratio nonincreasing"), nonincreasing);
    b.condition(format!("{label}: conjugate ratio below {RATIO_LIMIT}"), last <= RATIO_LIMIT);

    let duals = dual_curves(ctx, &f, &pts, &slopes)?;
    let bound_conj = legendre_transform(&tilde, &slopes)?;
    let mut worst = f64::INFINITY;
    for ((x, _), rho) in pts.iter().zip(&duals) {
        for (k, &s) in slopes.iter().enumerate() {
            let m = bound_conj.ys()[k] - rho.values[k];
            worst = worst.min(m);
            b.margin(m, || (format!("{label} dual rho"), Some(s), vec![x.clone()]));
        }
    }
    Ok(json!({
        "s_max": s_max,
        "hypothesis_margin": hyp,
        "ratio_first": ratios.first(),
        "ratio_last": last,
        "dual_margin": worst,
    }))
}

/// Transfer of convexity through the conjugate of the extended lower
/// envelope `phi~`.
pub fn check_convexity_transfer(sweep: &SweepSpec, cache: &CurveCache, bound: EnvelopeBound) -> Result<BoundReport> {
    sweep.validate()?;
    let ctx = Ctx { sweep, cache };
    Ok(convexity_transfer_with(&ctx, bound))
}

fn convexity_transfer_with(ctx: &Ctx, bound: EnvelopeBound) -> BoundReport {
    CheckBuilder::new("convexity-transfer", DUALITY_TOL, true).run(ctx, |b| {
        let mut per_case = BTreeMap::new();
        for (space, p) in ctx.sweep.cases() {
            let v = convexity_case(b, ctx, &space, p, bound)?;
            per_case.insert(case_label(&space, p), v);
        }
        b.detail("by_case", per_case);
        b.detail("bound", bound);
        Ok(())
    })
}

pub(crate) fn convexity_transfer(ctx: &Ctx) -> BoundReport {
    convexity_transfer_with(ctx, EnvelopeBound::Measured)
}
