use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{EstimatorConfig, ModulusCurve, ModulusKind, Sense};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::space::{derive_seed, dot, sphere_sample_flat, structured_sphere_points, Point, SpaceSpec};

/// One estimated value with its extremal inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub witness: Vec<Point>,
}

const ANGLE_STEP_MIN: f64 = 1e-9;
const AMBIENT_STEP_MIN: f64 = 1e-8;
/// Each modulus-of-convexity candidate costs a root solve, so fewer are drawn.
const DELTA_THINNING: usize = 8;

/// Compass search maximizing `f`. A successful move is repeated with a
/// doubled step while it keeps improving; a failed sweep halves the step.
fn compass_max(f: &mut dyn FnMut(&[f64]) -> f64, start: &[f64], step0: f64, step_min: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut step = step0;
    let mut evals = 1;
    let mut trial = x.clone();
    while step >= step_min && evals < max_evals {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[j] += sign * step;
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    fx = ft;
                    x.copy_from_slice(&trial);
                    improved = true;
                    let mut h = 2.0 * step;
                    while evals < max_evals {
                        trial[j] = x[j] + sign * h;
                        let ft = f(&trial);
                        evals += 1;
                        if ft > fx {
                            fx = ft;
                            x[j] = trial[j];
                            h *= 2.0;
                        } else {
                            break;
                        }
                    }
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Indices of the `k` largest scores, best first, ties by index.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_finite()).collect();
    let order = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k, order);
        idx.truncate(k);
    }
    idx.sort_by(order);
    idx
}

fn angle_of(p: &[f64]) -> f64 {
    p[1].atan2(p[0])
}

fn unit_at(space: &SpaceSpec, theta: f64) -> Point {
    space
        .normalize(&[theta.cos(), theta.sin()])
        .expect("unit circle point is nonzero")
}

/// Sphere chart: an angle for `n = 2`, an ambient vector otherwise.
fn chart_point(space: &SpaceSpec, params: &[f64]) -> Option<Point> {
    if space.dim() == 2 {
        Some(unit_at(space, params[0]))
    } else {
        space.normalize(params)
    }
}

fn chart_into(space: &SpaceSpec, params: &[f64], out: &mut [f64]) -> bool {
    if space.dim() == 2 {
        space.normalize_into(&[params[0].cos(), params[0].sin()], out)
    } else {
        space.normalize_into(params, out)
    }
}

fn chart_params(space: &SpaceSpec, p: &[f64]) -> Vec<f64> {
    if space.dim() == 2 {
        vec![angle_of(p)]
    } else {
        p.to_vec()
    }
}

fn chart_step(space: &SpaceSpec, samples: usize) -> (f64, f64) {
    let n = space.dim();
    if n == 2 {
        (4.0 * PI / samples.max(1) as f64, ANGLE_STEP_MIN)
    } else {
        let spacing = (samples.max(2) as f64).powf(-1.0 / (n as f64 - 1.0));
        (spacing.min(0.5), AMBIENT_STEP_MIN)
    }
}

fn check_taus(taus: &[f64], hi: Option<f64>) -> Result<()> {
    for &t in taus {
        let ok = t.is_finite() && t >= 0.0 && hi.is_none_or(|h| t <= h);
        if !ok {
            return Err(Error::OutOfRange {
                value: t,
                range: if hi.is_some() { "[0, 2]" } else { "[0, inf)" },
            });
        }
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedGrid);
    }
    Ok(())
}

fn assemble(kind: ModulusKind, taus: &[f64], cfg: &EstimatorConfig, ests: Vec<Estimate>) -> ModulusCurve {
    let (values, witnesses) = ests.into_iter().map(|e| (e.value, e.witness)).unzip();
    ModulusCurve {
        kind,
        taus: taus.to_vec(),
        values,
        witnesses,
        estimator: Some(*cfg),
        sense: Sense::for_kind(kind),
    }
}

fn stream_base(kind: ModulusKind) -> u64 {
    match kind {
        ModulusKind::SpaceDelta => 1 << 40,
        ModulusKind::SpaceRho => 2 << 40,
        ModulusKind::FuncDelta => 3 << 40,
        ModulusKind::FuncRho => 4 << 40,
    }
}

// ---------------------------------------------------------------------------
// Functional moduli

/// Estimates `sup_{y in S_X} |F(x + tau y) - F(x) - tau <x*, y>|` at one `tau`.
pub fn func_rho_at(f: &Functional, x: &Point, xstar: &Point, tau: f64, cfg: &EstimatorConfig) -> Result<Estimate> {
    check_func_args(f, x, xstar)?;
    check_taus(&[tau], None)?;
    Ok(func_extremum(f, x, xstar, tau, cfg, cfg.seed, true))
}

/// Estimates the infimum counterpart of [`func_rho_at`].
pub fn func_delta_at(f: &Functional, x: &Point, xstar: &Point, tau: f64, cfg: &EstimatorConfig) -> Result<Estimate> {
    check_func_args(f, x, xstar)?;
    check_taus(&[tau], None)?;
    Ok(func_extremum(f, x, xstar, tau, cfg, cfg.seed, false))
}

pub fn func_rho(f: &Functional, x: &Point, xstar: &Point, taus: &[f64], cfg: &EstimatorConfig) -> Result<ModulusCurve> {
    func_curve(f, x, xstar, taus, cfg, ModulusKind::FuncRho)
}

pub fn func_delta(f: &Functional, x: &Point, xstar: &Point, taus: &[f64], cfg: &EstimatorConfig) -> Result<ModulusCurve> {
    func_curve(f, x, xstar, taus, cfg, ModulusKind::FuncDelta)
}

fn check_func_args(f: &Functional, x: &Point, xstar: &Point) -> Result<()> {
    f.space().require_smooth()?;
    f.space().check_dim(x.dim())?;
    f.space().check_dim(xstar.dim())?;
    let fx = f.eval_unchecked(x);
    if !fx.is_finite() {
        return Err(Error::OutOfRange {
            value: fx,
            range: "finite F(x)",
        });
    }
    Ok(())
}

fn func_curve(f: &Functional, x: &Point, xstar: &Point, taus: &[f64], cfg: &EstimatorConfig, kind: ModulusKind) -> Result<ModulusCurve> {
    check_func_args(f, x, xstar)?;
    check_taus(taus, None)?;
    let sup = kind == ModulusKind::FuncRho;
    let base = stream_base(kind);
    let ests: Vec<Estimate> = taus
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| func_extremum(f, x, xstar, tau, cfg, derive_seed(cfg.seed, base + k as u64), sup))
        .collect();
    Ok(assemble(kind, taus, cfg, ests))
}

fn func_extremum(f: &Functional, x: &Point, xstar: &Point, tau: f64, cfg: &EstimatorConfig, seed: u64, sup: bool) -> Estimate {
    let space = f.space();
    let n = space.dim();
    if tau == 0.0 {
        return Estimate {
            value: 0.0,
            witness: vec![space.normalize(&Point::basis(n, 0)).expect("basis is nonzero")],
        };
    }
    let fx = f.eval_unchecked(x);
    let sign = if sup { 1.0 } else { -1.0 };
    let mut buf = vec![0.0; n];
    let lin_err = |y: &[f64], buf: &mut [f64]| -> f64 {
        for i in 0..n {
            buf[i] = x[i] + tau * y[i];
        }
        (f.eval_unchecked(buf) - fx - tau * dot(xstar, y)).abs()
    };
    let flat = sphere_sample_flat(space, seed, cfg.samples.max(1));
    let candidates: Vec<&[f64]> = flat.chunks(n).collect();
    let scores: Vec<f64> = candidates.iter().map(|y| sign * lin_err(y, &mut buf)).collect();
    let (step0, step_min) = chart_step(space, cfg.samples);
    let mut y = vec![0.0; n];
    let mut objective = |params: &[f64]| -> f64 {
        if chart_into(space, params, &mut y) {
            sign * lin_err(&y, &mut buf)
        } else {
            f64::NEG_INFINITY
        }
    };
    let starts = top_k(&scores, cfg.starts.max(1));
    let mut best = (scores[starts[0]], Point::new(candidates[starts[0]].to_vec()));
    for i in starts {
        let start = chart_params(space, candidates[i]);
        let (params, v) = compass_max(&mut objective, &start, step0, step_min, cfg.max_evals);
        if v > best.0 {
            if let Some(y) = chart_point(space, &params) {
                best = (v, y);
            }
        }
    }
    Estimate {
        value: sign * best.0,
        witness: vec![best.1],
    }
}

// ---------------------------------------------------------------------------
// Modulus of smoothness of the space

pub fn space_rho_at(space: &SpaceSpec, tau: f64, cfg: &EstimatorConfig) -> Result<Estimate> {
    space.require_smooth()?;
    check_taus(&[tau], None)?;
    Ok(rho_extremum(space, tau, cfg, cfg.seed))
}

pub fn space_rho(space: &SpaceSpec, taus: &[f64], cfg: &EstimatorConfig) -> Result<ModulusCurve> {
    space.require_smooth()?;
    check_taus(taus, None)?;
    let base = stream_base(ModulusKind::SpaceRho);
    let ests: Vec<Estimate> = taus
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| rho_extremum(space, tau, cfg, derive_seed(cfg.seed, base + k as u64)))
        .collect();
    Ok(assemble(ModulusKind::SpaceRho, taus, cfg, ests))
}

fn rho_value(space: &SpaceSpec, x: &[f64], y: &[f64], tau: f64, buf: &mut [f64]) -> f64 {
    for i in 0..x.len() {
        buf[i] = x[i] + tau * y[i];
    }
    let a = space.norm_unchecked(buf);
    for i in 0..x.len() {
        buf[i] = x[i] - tau * y[i];
    }
    let b = space.norm_unchecked(buf);
    (a + b) / 2.0 - 1.0
}

/// Candidate pairs of sphere points: a product grid of angles for `n = 2`,
/// structured pairs plus random pairs otherwise.
fn pair_candidates(space: &SpaceSpec, seed: u64, samples: usize) -> Vec<(Point, Point)> {
    let n = space.dim();
    if n == 2 {
        let m = ((samples as f64).sqrt().ceil() as usize).div_ceil(8).max(1) * 8;
        let angles: Vec<Point> = (0..m).map(|k| unit_at(space, 2.0 * PI * k as f64 / m as f64)).collect();
        let mut out = Vec::with_capacity(m * m);
        for a in &angles {
            for b in &angles {
                out.push((a.clone(), b.clone()));
            }
        }
        return out;
    }
    let structured = structured_sphere_points(space);
    let mut out = Vec::new();
    'outer: for a in &structured {
        for b in &structured {
            if out.len() >= samples {
                break 'outer;
            }
            out.push((a.clone(), b.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < samples.max(1) {
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let (Some(a), Some(b)) = (space.normalize(&u), space.normalize(&v)) {
            out.push((a, b));
        }
    }
    out
}

fn split_pair(space: &SpaceSpec, params: &[f64]) -> Option<(Point, Point)> {
    if space.dim() == 2 {
        Some((unit_at(space, params[0]), unit_at(space, params[1])))
    } else {
        let n = space.dim();
        Some((space.normalize(&params[..n])?, space.normalize(&params[n..])?))
    }
}

fn join_pair(space: &SpaceSpec, a: &Point, b: &Point) -> Vec<f64> {
    let mut v = chart_params(space, a);
    v.extend(chart_params(space, b));
    v
}

fn rho_extremum(space: &SpaceSpec, tau: f64, cfg: &EstimatorConfig, seed: u64) -> Estimate {
    let n = space.dim();
    let e1 = space.normalize(&Point::basis(n, 0)).expect("basis is nonzero");
    if tau == 0.0 {
        return Estimate {
            value: 0.0,
            witness: vec![e1.clone(), e1],
        };
    }
    let mut buf = vec![0.0; n];
    let cands = pair_candidates(space, seed, cfg.samples);
    let scores: Vec<f64> = cands.iter().map(|(a, b)| rho_value(space, a, b, tau, &mut buf)).collect();
    let (step0, step_min) = pair_step(space, cfg.samples);
    let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
    let two = n == 2;
    let mut objective = |params: &[f64]| -> f64 {
        let ok = if two {
            chart_into(space, &params[..1], &mut x) && chart_into(space, &params[1..], &mut y)
        } else {
            chart_into(space, &params[..n], &mut x) && chart_into(space, &params[n..], &mut y)
        };
        if ok {
            rho_value(space, &x, &y, tau, &mut buf)
        } else {
            f64::NEG_INFINITY
        }
    };
    refine_pairs(space, &cands, &scores, cfg, step0, step_min, &mut objective, 1.0)
}

fn pair_step(space: &SpaceSpec, samples: usize) -> (f64, f64) {
    if space.dim() == 2 {
        let m = ((samples as f64).sqrt().ceil()).max(8.0);
        (2.0 * PI / m, ANGLE_STEP_MIN)
    } else {
        chart_step(space, samples)
    }
}

#[allow(clippy::too_many_arguments)]
fn refine_pairs(
    space: &SpaceSpec,
    cands: &[(Point, Point)],
    scores: &[f64],
    cfg: &EstimatorConfig,
    step0: f64,
    step_min: f64,
    objective: &mut dyn FnMut(&[f64]) -> f64,
    sign: f64,
) -> Estimate {
    let starts = top_k(scores, cfg.starts.max(1));
    let mut best = (scores[starts[0]], cands[starts[0]].clone());
    for i in starts {
        let start = join_pair(space, &cands[i].0, &cands[i].1);
        let (params, v) = compass_max(objective, &start, step0, step_min, cfg.max_evals);
        if v > best.0 {
            if let Some(pair) = split_pair(space, &params) {
                best = (v, pair);
            }
        }
    }
    Estimate {
        value: sign * best.0,
        witness: vec![best.1 .0, best.1 .1],
    }
}

// ---------------------------------------------------------------------------
// Modulus of convexity of the space

pub fn space_delta_at(space: &SpaceSpec, eps: f64, cfg: &EstimatorConfig) -> Result<Estimate> {
    space.require_smooth()?;
    check_taus(&[eps], Some(2.0))?;
    Ok(delta_extremum(space, eps, cfg, cfg.seed))
}

pub fn space_delta(space: &SpaceSpec, eps: &[f64], cfg: &EstimatorConfig) -> Result<ModulusCurve> {
    space.require_smooth()?;
    check_taus(eps, Some(2.0))?;
    let base = stream_base(ModulusKind::SpaceDelta);
    let ests: Vec<Estimate> = eps
        .par_iter()
        .enumerate()
        .map(|(k, &e)| delta_extremum(space, e, cfg, derive_seed(cfg.seed, base + k as u64)))
        .collect();
    Ok(assemble(ModulusKind::SpaceDelta, eps, cfg, ests))
}

/// Given `y` on the sphere and a Euclidean-orthonormal frame `(u, d)` with `u`
/// along `y`, finds `y~(theta) = normalize(cos theta u + sin theta d)` with
/// `||y - y~|| = eps`, bracketing `theta in [0, pi]` and refining with the
/// Illinois variant of regula falsi.
fn constrained_partner(space: &SpaceSpec, y: &[f64], u: &[f64], d: &[f64], eps: f64) -> Option<Point> {
    let n = y.len();
    let mut v = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut eval = |theta: f64| -> Option<(f64, Point)> {
        let (s, c) = theta.sin_cos();
        for i in 0..n {
            v[i] = c * u[i] + s * d[i];
        }
        let p = space.normalize(&v)?;
        for i in 0..n {
            diff[i] = y[i] - p[i];
        }
        Some((space.norm_unchecked(&diff) - eps, p))
    };
    let (mut a, mut fa) = (0.0_f64, -eps);
    let (mut b, (mut fb, mut pb)) = (PI, eval(PI)?);
    if fb < 0.0 {
        return None;
    }
    if fb <= 1e-13 {
        return Some(pb);
    }
    let mut side = 0;
    for _ in 0..100 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (fc, pc) = eval(c)?;
        if fc.abs() <= 1e-13 || b - a <= 1e-15 {
            return Some(pc);
        }
        if fc > 0.0 {
            b = c;
            fb = fc;
            pb = pc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    Some(pb)
}

fn orthonormal_frame(y: &[f64], v: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let ny = dot(y, y).sqrt();
    if ny == 0.0 {
        return None;
    }
    let u: Vec<f64> = y.iter().map(|c| c / ny).collect();
    let proj = dot(v, &u);
    let w: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a - proj * b).collect();
    let nw = dot(&w, &w).sqrt();
    if nw < 1e-12 {
        return None;
    }
    Some((u, w.iter().map(|c| c / nw).collect()))
}

/// `-(1 - ||y + y~||/2)` for the pair built from chart parameters, so that
/// maximizing it minimizes the modulus.
fn delta_objective(space: &SpaceSpec, params: &[f64], eps: f64) -> Option<(f64, Point, Point)> {
    let n = space.dim();
    let (y, u, d) = if n == 2 {
        let y = unit_at(space, params[0]);
        let (s, c) = params[0].sin_cos();
        let orient = if params[1] >= 0.0 { 1.0 } else { -1.0 };
        (y, vec![c, s], vec![-s * orient, c * orient])
    } else {
        let y = space.normalize(&params[..n])?;
        let (u, d) = orthonormal_frame(y.coords(), &params[n..])?;
        (y, u, d)
    };
    let yt = constrained_partner(space, &y, &u, &d, eps)?;
    let sum: Vec<f64> = y.iter().zip(yt.iter()).map(|(a, b)| a + b).collect();
    let val = 1.0 - space.norm_unchecked(&sum) / 2.0;
    Some((-val, y, yt))
}

fn delta_extremum(space: &SpaceSpec, eps: f64, cfg: &EstimatorConfig, seed: u64) -> Estimate {
    let n = space.dim();
    let e1 = space.normalize(&Point::basis(n, 0)).expect("basis is nonzero");
    if eps == 0.0 {
        return Estimate {
            value: 0.0,
            witness: vec![e1.clone(), e1],
        };
    }
    // Candidates: base point parameters plus an orientation or a direction.
    let starts: Vec<Vec<f64>> = if n == 2 {
        let m = (cfg.samples / DELTA_THINNING / 2).max(8).div_ceil(8) * 8;
        let offset = ChaCha8Rng::seed_from_u64(seed).random::<f64>() * 2.0 * PI / m as f64;
        let mut v = Vec::with_capacity(2 * m);
        for k in 0..m {
            // Structured angles (multiples of pi/4) stay first and unshifted.
            let theta = 2.0 * PI * k as f64 / m as f64 + if k % (m / 8) == 0 { 0.0 } else { offset };
            v.push(vec![theta, 1.0]);
            v.push(vec![theta, -1.0]);
        }
        v
    } else {
        pair_candidates(space, seed, (cfg.samples / DELTA_THINNING).max(1))
            .into_iter()
            .map(|(a, b)| {
                let mut p = a.into_coords();
                p.extend(b.into_coords());
                p
            })
            .collect()
    };
    let scores: Vec<f64> = starts
        .iter()
        .map(|p| delta_objective(space, p, eps).map_or(f64::NEG_INFINITY, |o| o.0))
        .collect();
    let mut objective = |params: &[f64]| -> f64 {
        delta_objective(space, params, eps).map_or(f64::NEG_INFINITY, |o| o.0)
    };
    let (step0, step_min) = if n == 2 {
        (4.0 * PI / starts.len().max(1) as f64, ANGLE_STEP_MIN)
    } else {
        chart_step(space, cfg.samples)
    };
    let Some(&first) = top_k(&scores, 1).first() else {
        return Estimate {
            value: 1.0,
            witness: vec![e1.clone(), e1.scaled(-1.0)],
        };
    };
    let mut best_params = starts[first].clone();
    let mut best = scores[first];
    for i in top_k(&scores, cfg.starts.max(1)) {
        let start = starts[i].clone();
        let (params, v) = if n == 2 {
            // The orientation is discrete; only the angle is searched.
            let orient = start[1];
            let mut g = |t: &[f64]| objective(&[t[0], orient]);
            let (t, v) = compass_max(&mut g, &start[..1], step0, step_min, cfg.max_evals);
            (vec![t[0], orient], v)
        } else {
            compass_max(&mut objective, &start, step0, step_min, cfg.max_evals)
        };
        if v > best {
            best = v;
            best_params = params;
        }
    }
    let (neg, y, yt) = delta_objective(space, &best_params, eps).expect("best candidate is feasible");
    Estimate {
        value: (-neg).clamp(0.0, 1.0),
        witness: vec![y, yt],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::GaugeExponent;

    fn cfg() -> EstimatorConfig {
        EstimatorConfig {
            samples: 512,
            ..Default::default()
        }
    }

    fn l(n: usize, r: f64) -> SpaceSpec {
        SpaceSpec::new(n, r).unwrap()
    }

    #[test]
    fn hilbert_space_moduli() {
        let s = l(2, 2.0);
        let d = space_delta(&s, &[0.0, 2f64.sqrt(), 2.0], &cfg()).unwrap();
        assert_eq!(d.values[0], 0.0);
        assert!((d.values[1] - (1.0 - 0.5f64.sqrt())).abs() < 1e-4);
        assert!((d.values[2] - 1.0).abs() < 1e-6);
        let r = space_rho(&s, &[0.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.values[0], 0.0);
        assert!((r.values[1] - (2f64.sqrt() - 1.0)).abs() < 1e-4);
    }

    #[test]
    fn delta_witnesses_satisfy_constraint() {
        let s = l(3, 3.0);
        let d = space_delta(&s, &[0.5, 1.3], &cfg()).unwrap();
        for (k, eps) in d.taus.iter().enumerate() {
            let (y, yt) = (&d.witnesses[k][0], &d.witnesses[k][1]);
            assert!((s.norm(y).unwrap() - 1.0).abs() < 1e-12);
            assert!((s.norm(yt).unwrap() - 1.0).abs() < 1e-12);
            assert!((s.norm(&y.sub(yt)).unwrap() - eps).abs() < 1e-11);
        }
    }

    #[test]
    fn eps_out_of_range() {
        let s = l(2, 2.0);
        assert!(matches!(space_delta(&s, &[2.5], &cfg()), Err(Error::OutOfRange { .. })));
        assert!(matches!(space_delta(&s, &[-0.1], &cfg()), Err(Error::OutOfRange { .. })));
        assert!(matches!(space_rho(&l(2, 1.0), &[0.5], &cfg()), Err(Error::UnsupportedNorm(_))));
    }

    #[test]
    fn hilbert_functional_moduli_are_exact() {
        let s = l(3, 2.0);
        let f = Functional::norm_power(s, GaugeExponent::new(2.0).unwrap());
        let x = Point::new(vec![0.3, -1.0, 2.0]);
        let xs = f.subgradient(&x).unwrap();
        let taus = [0.0, 0.2, 1.0, 3.0];
        let up = func_rho(&f, &x, &xs, &taus, &cfg()).unwrap();
        let lo = func_delta(&f, &x, &xs, &taus, &cfg()).unwrap();
        for (k, t) in taus.iter().enumerate() {
            assert!((up.values[k] - t * t / 2.0).abs() < 1e-8);
            assert!((lo.values[k] - t * t / 2.0).abs() < 1e-8);
        }
        assert_eq!(up.sense, Sense::LowerEstimateOfSup);
        assert_eq!(lo.sense, Sense::UpperEstimateOfInf);
    }

    #[test]
    fn rho_bounded_by_tau() {
        for r in [1.5, 3.0] {
            let c = space_rho(&l(2, r), &[0.3, 1.0, 2.0], &cfg()).unwrap();
            for (t, v) in c.taus.iter().zip(&c.values) {
                assert!(*v <= *t + 1e-12 && *v >= 0.0);
            }
        }
    }
}
