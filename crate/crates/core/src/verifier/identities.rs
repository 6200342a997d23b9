//! Checks of exact identities, with relative tolerances.

use super::sampling::Sampler;
use super::{case_label, BoundReport, CheckBuilder, Ctx, IDENTITY_TOL};
use crate::functional::Functional;
use crate::space::{dot, GaugeExponent, Point};

const HILBERT_TOL: f64 = 1e-12;
const YOUNG_TOL: f64 = 1e-12;

fn stream(check: u64, case: usize) -> u64 {
    (check << 32) | case as u64
}

fn rel(err: f64, scale: f64) -> f64 {
    err.abs() / (1.0 + scale.abs())
}

pub(crate) fn hilbert_identity(ctx: &Ctx) -> BoundReport {
    let mut b = CheckBuilder::new("hilbert-identity", HILBERT_TOL, false);
    let p2 = GaugeExponent::new(2.0).expect("valid exponent");
    for (idx, space) in ctx.sweep.spaces.iter().enumerate() {
        if space.r() != 2.0 {
            continue;
        }
        let f = Functional::norm_power(space.clone(), p2);
        let mut s = Sampler::new(ctx.sweep.seed, stream(1, idx));
        for _ in 0..ctx.sweep.identity_samples {
            let x = s.point(space, 0.1, 10.0);
            let y = s.point(space, 0.1, 10.0);
            let jx = f.subgradient(&x).expect("smooth space");
            let d = f.bregman_unchecked(&jx, &y, &x);
            let half = 0.5 * space.norm_unchecked(&y.sub(&x)).powi(2);
            let scale = f
                .eval_unchecked(&x)
                .max(f.eval_unchecked(&y))
                .max(dot(&jx, &y.sub(&x)).abs());
            b.margin(-rel(d - half, scale), || (space.label(), None, vec![x.clone(), y.clone()]));
        }
    }
    b.finish(ctx)
}

pub(crate) fn duality_map_identities(ctx: &Ctx) -> BoundReport {
    let mut b = CheckBuilder::new("duality-map-identities", IDENTITY_TOL, false);
    let count = (ctx.sweep.identity_samples / 10).max(1);
    for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
        let label = case_label(&space, p);
        let dual = space.dual();
        let mut s = Sampler::new(ctx.sweep.seed, stream(2, idx));
        for _ in 0..count {
            let x = s.point(&space, 0.1, 10.0);
            let j = space.duality_selection(p.p(), &x);
            let nx = space.norm_unchecked(&x);
            let pair = dot(&j, &x);
            let target = nx.powf(p.p());
            b.margin(-(pair - target).abs() / target, || {
                (format!("{label} pairing"), None, vec![x.clone()])
            });
            let nj = dual.norm_unchecked(&j);
            let target = nx.powf(p.p() - 1.0);
            b.margin(-(nj - target).abs() / target, || {
                (format!("{label} dual norm"), None, vec![x.clone()])
            });
            let lambda = s.log_uniform(0.1, 10.0);
            let jl = space.duality_selection(p.p(), &x.scaled(lambda));
            let expect = j.scaled(lambda.powf(p.p() - 1.0));
            let err = dual.norm_unchecked(&jl.sub(&expect)) / dual.norm_unchecked(&expect);
            b.margin(-err, || (format!("{label} homogeneity lambda={lambda}"), None, vec![x.clone()]));
            if space.r() == 2.0 && p.p() == 2.0 {
                let err = dual.norm_unchecked(&j.sub(&x)) / nx;
                b.condition("hilbert j_2 is the identity", err <= HILBERT_TOL);
            }
        }
        let zero = Point::zeros(space.dim());
        b.condition("j_p(0) = 0", space.duality_selection(p.p(), &zero).is_zero());
    }
    b.finish(ctx)
}

pub(crate) fn young(ctx: &Ctx) -> BoundReport {
    let mut b = CheckBuilder::new("young", YOUNG_TOL, false);
    let mut worst_eq: f64 = 0.0;
    for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
        let label = case_label(&space, p);
        let f = Functional::norm_power(space.clone(), p);
        let conj = f.conjugate().expect("norm power is conjugable");
        let dual = space.dual();
        let mut s = Sampler::new(ctx.sweep.seed, stream(3, idx));
        for _ in 0..ctx.sweep.identity_samples {
            let x = s.point(&space, 0.1, 10.0);
            let xs = s.point(&dual, 0.1, 10.0);
            let (fx, fs, pair) = (f.eval_unchecked(&x), conj.eval_unchecked(&xs), dot(&xs, &x));
            let gap = fx + fs - pair;
            let scale = fx.max(fs).max(pair.abs());
            b.margin(gap / (1.0 + scale), || (label.clone(), None, vec![x.clone(), xs.clone()]));
            let j = f.subgradient(&x).expect("smooth space");
            let (fj, pj) = (conj.eval_unchecked(&j), dot(&j, &x));
            let eq = rel(fx + fj - pj, fx.max(fj).max(pj.abs()));
            worst_eq = worst_eq.max(eq);
        }
    }
    b.condition("gap vanishes at the subgradient", worst_eq <= IDENTITY_TOL);
    b.detail("max_relative_gap_at_subgradient", worst_eq);
    b.finish(ctx)
}

pub(crate) fn sym_bregman(ctx: &Ctx) -> BoundReport {
    let mut b = CheckBuilder::new("sym-bregman", IDENTITY_TOL, false);
    let mut min_sym = f64::INFINITY;
    for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
        let label = case_label(&space, p);
        let f = Functional::norm_power(space.clone(), p);
        let mut s = Sampler::new(ctx.sweep.seed, stream(4, idx));
        for _ in 0..ctx.sweep.identity_samples {
            let x = s.point(&space, 0.1, 10.0);
            let y = s.point(&space, 0.1, 10.0);
            let sym = f.sym_bregman(&x, &y).expect("smooth space");
            let jx = f.subgradient(&x).expect("smooth space");
            let jy = f.subgradient(&y).expect("smooth space");
            let d1 = f.bregman_unchecked(&jx, &y, &x);
            let d2 = f.bregman_unchecked(&jy, &x, &y);
            let scale = f.eval_unchecked(&x).max(f.eval_unchecked(&y)).max(dot(&jx, &y).abs()).max(dot(&jy, &x).abs());
            b.margin(-rel(sym - d1 - d2, scale), || (label.clone(), None, vec![x.clone(), y.clone()]));
            min_sym = min_sym.min(sym / (1.0 + scale));
        }
    }
    b.condition("symmetric divergence is nonnegative", min_sym >= -YOUNG_TOL);
    b.detail("min_relative_sym", min_sym);
    b.finish(ctx)
}

pub(crate) fn homogeneity(ctx: &Ctx) -> BoundReport {
    let mut b = CheckBuilder::new("homogeneity", IDENTITY_TOL, false);
    let count = (ctx.sweep.identity_samples / 10).max(1);
    for (idx, (space, p)) in ctx.sweep.cases().into_iter().enumerate() {
        let label = case_label(&space, p);
        let dual = space.dual();
        let mut s = Sampler::new(ctx.sweep.seed, stream(5, idx));
        let forms = [
            (Functional::norm_power(space.clone(), p), p.p()),
            (Functional::plain_norm(space.clone()), 1.0),
        ];
        for (f, q) in &forms {
            for _ in 0..count {
                let x = s.point(&space, 0.1, 10.0);
                let y = s.point(&space, 0.1, 10.0);
                let xs = s.point(&dual, 0.1, 10.0);
                let nx = space.norm_unchecked(&x);
                let lhs = f.bregman_unchecked(&xs, &y, &x);
                let scaled = f.bregman_unchecked(&xs.scaled(nx.powf(1.0 - q)), &y.scaled(1.0 / nx), &x.scaled(1.0 / nx));
                let rhs = nx.powf(*q) * scaled;
                let scale = f.eval_unchecked(&x).max(f.eval_unchecked(&y)).max(dot(&xs, &y.sub(&x)).abs());
                b.margin(-rel(lhs - rhs, scale), || {
                    (format!("{label} q={q} linearization error"), None, vec![x.clone(), y.clone(), xs.clone()])
                });
                let j = f.subgradient(&x).expect("smooth space");
                let ju = f.subgradient(&x.scaled(1.0 / nx)).expect("smooth space");
                let expect = j.scaled(nx.powf(1.0 - q));
                let err = dual.norm_unchecked(&ju.sub(&expect)) / dual.norm_unchecked(&ju).max(f64::MIN_POSITIVE);
                b.margin(-err, || (format!("{label} q={q} subgradient scaling"), None, vec![x.clone()]));
            }
        }
    }
    b.finish(ctx)
}
