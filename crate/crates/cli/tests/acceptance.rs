//! Acceptance criteria 1 to 11, with one line per criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bregman_core::moduli::{func_rho, log_grid, power_type_fit, space_delta, space_rho, tau_grid};
use bregman_core::verifier::{run_check, CurveCache};
use bregman_core::{
    duality_map, BoundReport, EstimatorConfig, Functional, GaugeExponent, ModulusCurve, Point, Report, SpaceSpec, SweepSpec, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lr_norm(r: f64, x: &[f64]) -> f64 {
    x.iter().map(|c| c.abs().powf(r)).sum::<f64>().powf(1.0 / r)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conj(q: f64) -> f64 {
    q / (q - 1.0)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Point {
    let scale = spread.powf(rng.random_range(-1.0..1.0));
    Point::new((0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
}

fn checked<'a>(report: &'a Report, id: &str) -> Result<&'a BoundReport, String> {
    let c = report.check(id).ok_or_else(|| format!("{id} missing from report"))?;
    ensure(c.verdict == Verdict::Pass, || format!("{id} verdict {:?}", c.verdict))?;
    Ok(c)
}

/// Least-squares slope of `log v` against `log t`.
fn log_slope(ts: &[f64], vs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ts.iter().zip(vs).filter(|(_, v)| **v > 0.0).map(|(t, v)| (t.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_1(report: &Report) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let p2 = GaugeExponent::new(2.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let dim = [2, 3, 5][k % 3];
        let f = Functional::norm_power(SpaceSpec::new(dim, 2.0).unwrap(), p2);
        let (x, y) = (random_point(&mut rng, dim, 10.0), random_point(&mut rng, dim, 10.0));
        let d = f.bregman(&f.subgradient(&x).unwrap(), &y, &x).unwrap();
        let oracle = 0.5 * x.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        // Relative to the size of the terms that cancel in D.
        let size = oracle.max(0.5 * dot(&x, &x)).max(0.5 * dot(&y, &y));
        worst = worst.max((d - oracle).abs() / size);
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    checked(report, "hilbert-identity")?;
    Ok(format!("max relative error {worst:.2e} over 10^4 pairs"))
}

fn criterion_2(report: &Report) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for r in [1.5, 2.0, 3.0, 4.0] {
        let space = SpaceSpec::new(3, r).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let g = GaugeExponent::new(p).unwrap();
            for _ in 0..1000 {
                let x = random_point(&mut rng, 3, 10.0);
                let j = duality_map(&space, g, &x).unwrap();
                let nx = lr_norm(r, &x);
                let e1 = (dot(&j, &x) - nx.powf(p)).abs() / nx.powf(p);
                let e2 = (lr_norm(conj(r), &j) - nx.powf(p - 1.0)).abs() / nx.powf(p - 1.0);
                worst = worst.max(e1).max(e2);
            }
        }
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    checked(report, "duality-map-identities")?;
    Ok(format!("max relative error {worst:.2e} over 12 x 10^3 samples"))
}

fn criterion_3(report: &Report) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut min_gap, mut max_tight): (f64, f64) = (f64::INFINITY, 0.0);
    for k in 0..10_000 {
        let r = [1.5, 2.0, 3.0, 4.0][k % 4];
        let p = [1.5, 2.0, 3.0][k % 3];
        let f = Functional::norm_power(SpaceSpec::new(3, r).unwrap(), GaugeExponent::new(p).unwrap());
        let x = random_point(&mut rng, 3, 10.0);
        let xs = random_point(&mut rng, 3, 10.0);
        let oracle = lr_norm(r, &x).powf(p) / p + lr_norm(conj(r), &xs).powf(conj(p)) / conj(p) - dot(&xs, &x);
        let gap = f.young_gap(&x, &xs).unwrap();
        let size = 1.0 + dot(&xs, &x).abs();
        ensure((gap - oracle).abs() <= 1e-10 * size, || format!("gap {gap} vs oracle {oracle}"))?;
        min_gap = min_gap.min(gap / size);
        let j = f.subgradient(&x).unwrap();
        max_tight = max_tight.max(f.young_gap(&x, &j).unwrap().abs() / (1.0 + dot(&j, &x)));
    }
    ensure(min_gap >= -1e-14, || format!("negative gap {min_gap:e}"))?;
    ensure(max_tight <= 1e-10, || format!("gap at j_p(x) {max_tight:e}"))?;
    checked(report, "young")?;
    Ok(format!("min relative gap {min_gap:.2e}, max gap at j_p(x) {max_tight:.2e}"))
}

fn max_dev(curve: &ModulusCurve, oracle: impl Fn(f64) -> f64) -> f64 {
    curve.taus.iter().zip(&curve.values).map(|(t, v)| (v - oracle(*t)).abs()).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let cfg = EstimatorConfig::default();
    let eps = tau_grid(2.0, 100);
    let taus = tau_grid(1.0, 100);
    let mut parts = Vec::new();
    for n in [2, 3] {
        let l2 = SpaceSpec::new(n, 2.0).unwrap();
        let d = max_dev(&space_delta(&l2, &eps, &cfg).unwrap(), |e| 1.0 - (1.0 - e * e / 4.0).sqrt());
        let r = max_dev(&space_rho(&l2, &taus, &cfg).unwrap(), |t| (1.0 + t * t).sqrt() - 1.0);
        ensure(d <= 1e-3 && r <= 1e-3, || format!("l2^{n}: delta {d:e}, rho {r:e}"))?;
        parts.push(format!("l2^{n} delta {d:.1e} rho {r:.1e}"));
    }
    let l4 = SpaceSpec::new(2, 4.0).unwrap();
    let d = max_dev(&space_delta(&l4, &eps, &cfg).unwrap(), |e| 1.0 - (1.0 - (e / 2.0).powi(4)).powf(0.25));
    ensure(d <= 2e-3, || format!("l4^2 delta {d:e}"))?;
    parts.push(format!("l4^2 delta {d:.1e}"));
    Ok(parts.join(", "))
}

fn criterion_5(report: &Report) -> Outcome {
    let a = checked(report, "lemma-rho-ratio")?;
    let b = checked(report, "monotone-scaling")?;
    for c in [a, b] {
        ensure(c.min_margin >= -1e-4, || format!("{} min margin {:e}", c.check_id, c.min_margin))?;
    }
    Ok(format!("min margins {:.2e} and {:.2e}", a.min_margin, b.min_margin))
}

fn criterion_6(report: &Report) -> Outcome {
    let drd = checked(report, "delta-rho-duality")?;
    let mut worst_space: f64 = 0.0;
    for (label, v) in drd.details["discrepancy_by_space"].as_object().unwrap() {
        if label.starts_with("l2^") {
            worst_space = worst_space.max(v.as_f64().unwrap());
        }
    }
    let direct = bregman_core::conjugate::check_delta_rho_duality(&SpaceSpec::new(2, 2.0).unwrap(), EstimatorConfig::default(), 100)
        .map_err(|e| e.to_string())?;
    let d = direct.details["discrepancy_by_space"]["l2^2"].as_f64().unwrap();
    worst_space = worst_space.max(d);
    ensure(worst_space <= 5e-3, || format!("delta-rho discrepancy {worst_space:e}"))?;
    let cs = checked(report, "conv-smoo-duality")?;
    let mut worst_case: f64 = 0.0;
    let mut seen = 0;
    for (label, v) in cs.details["discrepancy_by_case"].as_object().unwrap() {
        if label.starts_with("l2^") && (label.ends_with("p=2") || label.ends_with("p=3")) {
            worst_case = worst_case.max(v.as_f64().unwrap());
            seen += 1;
        }
    }
    ensure(seen > 0, || "no l2 cases".into())?;
    ensure(worst_case <= 1e-2, || format!("conv-smoo discrepancy {worst_case:e}"))?;
    Ok(format!("delta-rho {worst_space:.2e}, conv-smoo {worst_case:.2e} over {seen} cases"))
}

fn criterion_7(report: &Report) -> Outcome {
    let c = checked(report, "chain-rule")?;
    let by_case = c.details["min_margin_by_case"].as_object().unwrap();
    ensure(by_case.len() == 3, || format!("{} configurations", by_case.len()))?;
    let worst = by_case.values().map(|v| v.as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    ensure(worst >= -1e-4, || format!("min margin {worst:e}"))?;
    Ok(format!("min margin {worst:.2e} over 3 configurations"))
}

fn criterion_8(report: &Report) -> Outcome {
    let c = checked(report, "xu-roach-upper")?;
    let by_case = c.details["by_case"].as_object().unwrap();
    let mut hilbert = Vec::new();
    for (label, v) in by_case {
        let cs: Vec<f64> = v["constants"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let taus: Vec<f64> = v["tau_bars"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        ensure(taus == [1.0, 0.1, 0.01], || format!("{label}: tau_bars {taus:?}"))?;
        ensure(cs.iter().all(|c| c.is_finite()), || format!("{label}: {cs:?}"))?;
        ensure(cs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-3)), || format!("{label}: unstable {cs:?}"))?;
        if label.starts_with("l2^") {
            let p: f64 = label.rsplit("p=").next().unwrap().parse().unwrap();
            ensure(cs.iter().all(|&c| c >= 1.0 - 1e-3 && c <= p + 2.0), || format!("{label}: {cs:?} outside [1, {}]", p + 2.0))?;
            // The ratio tends to the largest second derivative of ||.||^p/p on the sphere.
            let limit = (p - 1.0).max(1.0);
            ensure((cs[2] - limit).abs() <= 0.05, || format!("{label}: {} vs limit {limit}", cs[2]))?;
            hilbert.push(cs[0]);
        }
        let r: f64 = label[1..label.find('^').unwrap()].parse().unwrap();
        if r <= 3.0 {
            let slope = v["smoothness_slope"].as_f64().unwrap();
            ensure((slope - r.min(2.0)).abs() <= 0.1, || format!("{label}: smoothness slope {slope}"))?;
        }
    }
    let mut slopes = Vec::new();
    let cfg = EstimatorConfig::default();
    let taus = log_grid(1e-3, 1e-2, 20);
    for r in [1.5, 2.0, 3.0] {
        let space = SpaceSpec::new(2, r).unwrap();
        let f = Functional::norm_power(space, GaugeExponent::new(2.0).unwrap());
        let x = Point::new(vec![1.0, 0.0]);
        let curve = func_rho(&f, &x, &f.subgradient(&x).unwrap(), &taus, &cfg).map_err(|e| e.to_string())?;
        let s = log_slope(&curve.taus, &curve.values);
        let fit = power_type_fit(&curve, 1e-2).map_err(|e| e.to_string())?;
        ensure((s - r.min(2.0)).abs() <= 0.1 && fit.exponent == r.min(2.0), || format!("l{r}: slope {s}, fit {:?}", fit))?;
        slopes.push(format!("{s:.3}"));
    }
    let hmax = hilbert.iter().cloned().fold(0.0, f64::max);
    Ok(format!("{} cases stable, l2 constants up to {hmax:.3}, smoothness slopes {}", by_case.len(), slopes.join("/")))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut parts = Vec::new();
    for r in [2.0, 3.0, 4.0] {
        let sweep = SweepSpec {
            spaces: vec![SpaceSpec::new(2, r).unwrap(), SpaceSpec::new(3, r).unwrap()],
            ps: vec![r],
            ..SweepSpec::default_sweep(42)
        };
        let rep = run_check("uniform-bounds-corollary", &sweep, &CurveCache::new(sweep.estimator())).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Verdict::Pass, || format!("r={r}: verdict {:?}", rep.verdict))?;
        for (label, v) in rep.details["by_case"].as_object().unwrap() {
            let c = v["convexity"]["fit"]["constant"].as_f64().unwrap_or(0.0);
            let max_ratio = v["max_ratio"].as_f64().unwrap();
            ensure(v["convexity"]["restricted"] == Value::Bool(false), || format!("{label}: restricted"))?;
            ensure(c > 0.0, || format!("{label}: constant {c}"))?;
            ensure(max_ratio >= 50.0, || format!("{label}: max ratio {max_ratio}"))?;
            // Independent pairs with ||x - y|| / ||x|| in [0.01, 100].
            let dim = v["pairs"].as_u64().map(|_| if label.contains("^2") { 2 } else { 3 }).unwrap();
            let f = Functional::norm_power(SpaceSpec::new(dim, r).unwrap(), GaugeExponent::new(r).unwrap());
            let mut inf = f64::INFINITY;
            for _ in 0..2000 {
                let x = random_point(&mut rng, dim, 10.0);
                let dir = random_point(&mut rng, dim, 1.0);
                let u = 10f64.powf(rng.random_range(-2.0..2.0));
                let y = x.add_scaled(&dir, u * lr_norm(r, &x) / lr_norm(r, &dir));
                let d = f.bregman(&f.subgradient(&x).unwrap(), &y, &x).unwrap();
                inf = inf.min(d / lr_norm(r, &y.sub(&x)).powf(r));
            }
            ensure(inf > 0.0 && c <= 2.0 * inf && inf <= 2.0 * c, || format!("{label}: report {c} vs sampled {inf}"))?;
            if r == 2.0 {
                ensure((c - 0.5).abs() <= 1e-9, || format!("{label}: Hilbert constant {c}"))?;
            }
            parts.push(format!("{label} {c:.3}"));
        }
    }
    let cfg = EstimatorConfig::default();
    let eps = log_grid(0.02, 0.2, 20);
    let mut slopes = Vec::new();
    for r in [2.0, 3.0, 4.0] {
        let curve = space_delta(&SpaceSpec::new(2, r).unwrap(), &eps, &cfg).map_err(|e| e.to_string())?;
        let s = log_slope(&curve.taus, &curve.values);
        let fit = power_type_fit(&curve, 0.2).map_err(|e| e.to_string())?;
        ensure((s - r).abs() <= 0.1 && fit.exponent == r, || format!("l{r}: delta slope {s}, fit {:?}", fit))?;
        slopes.push(format!("{s:.3}"));
    }
    Ok(format!("C~ {}; convexity slopes {}", parts.join(", "), slopes.join("/")))
}

fn criterion_10(report: &Report) -> Outcome {
    let c = checked(report, "sym-implications")?;
    ensure(c.min_margin >= -1e-10, || format!("sym <= 4 max^p margin {:e}", c.min_margin))?;
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut worst: f64 = f64::INFINITY;
    for k in 0..10_000 {
        let r = [1.5, 2.0, 3.0, 4.0][k % 4];
        let p = [1.5, 2.0, 3.0][k % 3];
        let f = Functional::norm_power(SpaceSpec::new(3, r).unwrap(), GaugeExponent::new(p).unwrap());
        let (x, y) = (random_point(&mut rng, 3, 10.0), random_point(&mut rng, 3, 10.0));
        let m = lr_norm(r, &x).max(lr_norm(r, &y)).powf(p);
        worst = worst.min((4.0 * m - f.sym_bregman(&x, &y).unwrap()) / m);
    }
    ensure(worst >= -1e-10, || format!("sampled margin {worst:e}"))?;
    Ok(format!("report margin {:.2e}, independent margin {worst:.2e}", c.min_margin))
}

fn verify_run(path: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bregman"))
        .args(["verify", "--seed", "42", "--out"])
        .arg(path)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("verify exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    std::fs::read(path).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let first = verify_run(&dir.path().join("a.json"));
    let second = verify_run(&dir.path().join("b.json"));
    let runs_secs = start.elapsed().as_secs_f64();
    let report = first
        .as_ref()
        .ok()
        .and_then(|b| Report::from_json(std::str::from_utf8(b).ok()?).ok());

    let missing = || Err::<String, String>("default verify report unavailable".into());
    let with_report = |f: fn(&Report) -> Outcome| report.as_ref().map_or_else(missing, f);
    let c11 = match (&first, &second) {
        (Ok(a), Ok(b)) if a == b => {
            let n = report.as_ref().map_or(0, |r| r.checks.len());
            if n >= 9 {
                Ok(format!("{} bytes identical, {n} checks, two runs in {runs_secs:.0} s", a.len()))
            } else {
                Err(format!("only {n} checks"))
            }
        }
        (Ok(_), Ok(_)) => Err("reports differ".into()),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };

    let criteria: Vec<Criterion<'_>> = vec![
        ("Hilbert identity", Box::new(|| with_report(criterion_1))),
        ("duality-map identities", Box::new(|| with_report(criterion_2))),
        ("Young gap", Box::new(|| with_report(criterion_3))),
        ("moduli oracles", Box::new(criterion_4)),
        ("ratio and scaling monotonicity", Box::new(|| with_report(criterion_5))),
        ("conjugate duality", Box::new(|| with_report(criterion_6))),
        ("chain rule", Box::new(|| with_report(criterion_7))),
        ("upper constant and smoothness exponent", Box::new(|| with_report(criterion_8))),
        ("lower power bound and convexity exponent", Box::new(criterion_9)),
        ("symmetric implications", Box::new(|| with_report(criterion_10))),
        ("deterministic reports", Box::new(move || c11)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg} ({secs:.1} s)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg} ({secs:.1} s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
