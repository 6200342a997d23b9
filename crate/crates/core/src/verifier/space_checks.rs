//! Checks on the moduli of the space.

use std::collections::BTreeMap;

use super::{BoundReport, CheckBuilder, Ctx, DUALITY_TOL, ESTIMATOR_TOL};
use crate::conjugate::{biconjugate, legendre_transform};
use crate::functional::Functional;
use crate::moduli::tau_grid;
use crate::space::Point;

pub(crate) fn rho_ratio(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("lemma-rho-ratio", ESTIMATOR_TOL, true).run(ctx, |b| {
        let taus = ctx.sweep.taus();
        for space in &ctx.sweep.spaces {
            let rho = ctx.cache.space_rho(space, &taus)?;
            let mut best = f64::NEG_INFINITY;
            let mut best_at = 0;
            for (k, (&t, &v)) in rho.taus.iter().zip(&rho.values).enumerate() {
                let ratio = v / t;
                if k > 0 {
                    b.margin(ratio - best, || {
                        (format!("{} tau1={}", space.label(), taus[best_at]), Some(t), rho.witnesses.get(k).cloned().unwrap_or_default())
                    });
                }
                if ratio > best {
                    best = ratio;
                    best_at = k;
                }
            }
        }
        Ok(())
    })
}

pub(crate) fn rho_quadratic_lower(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("lemma-rho-quadratic-lower", ESTIMATOR_TOL, true).run(ctx, |b| {
        let taus = ctx.sweep.taus();
        let classical = |t: f64| t * t / ((1.0 + t * t).sqrt() + 1.0);
        let literal = |t: f64| (1.0 + t).sqrt() - 1.0;
        let mut literal_margin = f64::INFINITY;
        let mut literal_cases = BTreeMap::new();
        for space in &ctx.sweep.spaces {
            let rho = ctx.cache.space_rho(space, &taus)?;
            let mut lit = f64::INFINITY;
            for (k, (&t, &v)) in rho.taus.iter().zip(&rho.values).enumerate() {
                b.margin(v - classical(t), || {
                    (space.label(), Some(t), rho.witnesses.get(k).cloned().unwrap_or_default())
                });
                lit = lit.min(v - literal(t));
            }
            literal_margin = literal_margin.min(lit);
            literal_cases.insert(space.label(), lit);
        }
        let c_classical = taus.iter().map(|&t| classical(t) / (t * t)).fold(f64::INFINITY, f64::min);
        let c_literal = taus.iter().map(|&t| literal(t) / (t * t)).fold(f64::INFINITY, f64::min);
        b.set_fitted(Some(c_classical));
        b.detail("variant", "sqrt(1 + tau^2) - 1");
        b.detail("literal_variant", "(1 + tau)^(1/2) - 1");
        b.detail("literal_min_margin", literal_margin);
        b.detail("literal_holds", literal_margin >= -ESTIMATOR_TOL);
        b.detail("literal_min_margin_by_space", literal_cases);
        b.detail("literal_constant", c_literal);
        Ok(())
    })
}

pub(crate) fn delta_biconjugate(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("delta-biconjugate", ESTIMATOR_TOL, true).run(ctx, |b| {
        let eps = ctx.sweep.eps();
        for space in &ctx.sweep.spaces {
            let delta = ctx.cache.space_delta(space, &eps)?;
            let g = delta.to_grid_function()?;
            let env = biconjugate(&g)?;
            // Index k of the prefixed grid is eps_k = 2k/N, so eps_k/2 sits at k/2.
            for k in 1..g.len() {
                let (e, below) = (g.xs()[k], env.ys()[k]);
                if k % 2 == 0 {
                    b.margin(below - g.ys()[k / 2], || (format!("{} half", space.label()), Some(e), Vec::new()));
                }
                b.margin(g.ys()[k] - below, || (format!("{} envelope", space.label()), Some(e), Vec::new()));
            }
        }
        Ok(())
    })
}

/// Compares the conjugate of `2 delta_X` with `2 rho_{X*}` on slopes in `[0, 1]`.
pub(crate) fn delta_rho_duality(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("delta-rho-duality", DUALITY_TOL, true).run(ctx, |b| {
        let eps = ctx.sweep.eps();
        let taus = tau_grid(1.0, ctx.sweep.grid);
        let mut slopes = vec![0.0];
        slopes.extend_from_slice(&taus);
        let mut per_space = BTreeMap::new();
        for space in &ctx.sweep.spaces {
            let dual = space.dual();
            let two_delta = ctx.cache.space_delta(space, &eps)?.to_grid_function()?.scaled(2.0);
            let conj = legendre_transform(&two_delta, &slopes)?;
            let rho = ctx.cache.space_rho(&dual, &taus)?;
            let mut worst: f64 = conj.ys()[0].abs();
            for (k, &t) in taus.iter().enumerate() {
                let gap = (conj.ys()[k + 1] - 2.0 * rho.values[k]).abs();
                worst = worst.max(gap);
                b.margin(-gap, || {
                    (format!("{} vs {}", space.label(), dual.label()), Some(t), rho.witnesses.get(k).cloned().unwrap_or_default())
                });
            }
            per_space.insert(space.label(), worst);
        }
        b.detail("discrepancy_by_space", per_space);
        Ok(())
    })
}

/// `rho_X <= sup_x rho_{||.||, x} <= 2 rho_X` over base points and the
/// extremal points of the estimated `rho_X`.
pub(crate) fn smoothness_equivalence(ctx: &Ctx) -> BoundReport {
    CheckBuilder::new("smoothness-moduli-equivalence", ESTIMATOR_TOL, true).run(ctx, |b| {
        let taus = ctx.sweep.taus();
        let n = taus.len();
        for space in &ctx.sweep.spaces {
            let f = Functional::plain_norm(space.clone());
            let rho = ctx.cache.space_rho(space, &taus)?;
            let mut xs = super::base_points(space, ctx.sweep.base_points, ctx.sweep.seed);
            for k in [0, n / 2, n - 1] {
                if let Some(w) = rho.witnesses.get(k) {
                    if let Some(x) = w.first() {
                        xs.push(x.clone());
                    }
                }
            }
            let mut sup = vec![0.0_f64; n];
            let mut arg: Vec<Option<Point>> = vec![None; n];
            for x in &xs {
                let j = f.subgradient(x)?;
                let c = ctx.cache.func_rho(&f, x, &j, &taus)?;
                for k in 0..n {
                    if c.values[k] > sup[k] {
                        sup[k] = c.values[k];
                        arg[k] = Some(x.clone());
                    }
                }
            }
            // The extremal pair of rho_X gives a direct lower bound at each tau.
            for (k, &t) in taus.iter().enumerate() {
                if let Some([x, y]) = rho.witnesses.get(k).map(|w| w.as_slice()) {
                    let j = f.subgradient(x)?;
                    for sign in [1.0, -1.0] {
                        let d = f.bregman_unchecked(&j, &x.add_scaled(y, sign * t), x).abs();
                        if d > sup[k] {
                            sup[k] = d;
                            arg[k] = Some(x.clone());
                        }
                    }
                }
                let pts = || arg[k].iter().cloned().collect::<Vec<_>>();
                b.margin(sup[k] - rho.values[k], || (format!("{} lower", space.label()), Some(t), pts()));
                b.margin(2.0 * rho.values[k] - sup[k], || (format!("{} upper", space.label()), Some(t), pts()));
            }
        }
        Ok(())
    })
}
