use bregman_core::functional::ScalarFn;
use bregman_core::verifier::{
    check_chain_rule, check_convexity_transfer, check_ids, check_smoothness_transfer, run_check, ChainRuleCase, CurveCache, EnvelopeBound,
};
use bregman_core::{run_all, Error, Report, RunOptions, SpaceSpec, SweepSpec, Verdict};

fn small(r: f64, dim: usize, p: f64) -> SweepSpec {
    SweepSpec {
        spaces: vec![SpaceSpec::new(dim, r).unwrap()],
        ps: vec![p],
        grid: 20,
        directions: 1024,
        pairs: 300,
        identity_samples: 500,
        ..SweepSpec::default_sweep(3)
    }
}

fn run(id: &str, sweep: &SweepSpec) -> bregman_core::BoundReport {
    run_check(id, sweep, &CurveCache::new(sweep.estimator())).unwrap()
}

fn condition(rep: &bregman_core::BoundReport, needle: &str) -> Option<bool> {
    rep.details["conditions"]
        .as_object()?
        .iter()
        .find(|(k, _)| k.contains(needle))
        .and_then(|(_, v)| v.as_bool())
}

#[test]
fn registry_is_sorted_and_complete() {
    let ids = check_ids();
    assert_eq!(ids.len(), 19);
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn empty_sweep_gives_empty_report() {
    let rep = run_all(&SweepSpec::empty(1), RunOptions::default()).unwrap();
    assert!(rep.checks.is_empty());
    assert!(rep.all_pass());
    assert!(rep.success(true));
}

#[test]
fn invalid_sweeps_are_rejected() {
    let mut s = small(2.0, 2, 2.0);
    s.tau_bar = 0.0;
    assert!(run_all(&s, RunOptions::default()).is_err());
    let mut s = small(2.0, 2, 2.0);
    s.grid = 2;
    assert!(matches!(run_all(&s, RunOptions::default()), Err(Error::DegenerateGrid { .. })));
    let mut s = small(2.0, 2, 2.0);
    s.ps = vec![1.0];
    assert!(run_all(&s, RunOptions::default()).is_err());
    assert!(run_check("no-such-check", &small(2.0, 2, 2.0), &CurveCache::new(Default::default())).is_err());
}

#[test]
fn report_round_trips_and_timings_are_opt_in() {
    let s = small(3.0, 2, 1.5);
    let rep = run_all(&s, RunOptions::default()).unwrap();
    assert_eq!(rep.checks.len(), 19);
    assert!(rep.checks.iter().all(|c| c.runtime_ms.is_none()));
    let text = rep.to_json().unwrap();
    let back = Report::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
    assert_eq!(back, rep);
    let timed = run_all(&s, RunOptions { timings: true }).unwrap();
    assert!(timed.checks.iter().all(|c| c.runtime_ms.is_some()));
}

#[test]
fn small_sweeps_pass_everywhere() {
    for (r, dim, p) in [(2.0, 2, 2.0), (4.0, 3, 3.0), (1.5, 2, 3.0)] {
        let rep = run_all(&small(r, dim, p), RunOptions::default()).unwrap();
        let bad: Vec<_> = rep.checks.iter().filter(|c| c.verdict != Verdict::Pass).map(|c| &c.check_id).collect();
        assert!(bad.is_empty(), "l{r}^{dim} p={p}: {bad:?}");
    }
}

#[test]
fn hilbert_identity_is_vacuous_without_hilbert_spaces() {
    let rep = run("hilbert-identity", &small(3.0, 2, 2.0));
    assert_eq!(rep.samples, 0);
    assert_eq!(rep.details["vacuous"], true);
}

#[test]
fn witnesses_point_at_the_worst_margin() {
    let rep = run("young", &small(3.0, 2, 1.5));
    let w = &rep.witnesses[0];
    assert_eq!(w.margin, rep.min_margin);
    assert_eq!(w.points.len(), 2);
}

#[test]
fn zero_envelope_fails_smoothness_transfer() {
    let s = small(3.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let rep = check_smoothness_transfer(&s, &cache, EnvelopeBound::Zero).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    let measured = check_smoothness_transfer(&s, &cache, EnvelopeBound::Measured).unwrap();
    assert_eq!(measured.verdict, Verdict::Pass);
}

#[test]
fn hilbert_smoothness_transfer_with_closed_form_envelope() {
    // phi = tau^2/2 is exact for (1/2)||.||^2 on l2.
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let rep = check_smoothness_transfer(&s, &cache, EnvelopeBound::Power { c: 0.5, e: 2.0 }).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    let c = rep.fitted_constant.unwrap();
    assert!(c.abs() < 1e-3, "{c}");
}

#[test]
fn linear_envelope_fails_convexity_transfer() {
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let rep = check_convexity_transfer(&s, &cache, EnvelopeBound::Power { c: 1.0, e: 1.0 }).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert_eq!(condition(&rep, "delta_F >= phi"), Some(false));
    assert!(rep.min_margin < -rep.tolerance);
}

#[test]
fn quadratic_envelope_passes_convexity_transfer() {
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let rep = check_convexity_transfer(&s, &cache, EnvelopeBound::Power { c: 0.25, e: 2.0 }).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.details);
    assert_eq!(condition(&rep, "ratio below"), Some(true));
}

#[test]
fn decreasing_envelope_is_rejected() {
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let rep = check_convexity_transfer(&s, &cache, EnvelopeBound::Power { c: 1.0, e: -1.0 }).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.details["error"].as_str().unwrap().contains("not nondecreasing"));
}

#[test]
fn chain_rule_rejects_concave_outer_function() {
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let case = ChainRuleCase {
        phi: ScalarFn::InversePower { p: 2.0 },
        space: SpaceSpec::new(2, 3.0).unwrap(),
    };
    assert!(matches!(check_chain_rule(&[case], &s, &cache), Err(Error::NonConvex(_))));
}

#[test]
fn chain_rule_holds_for_a_weighted_space() {
    let s = small(2.0, 2, 2.0);
    let cache = CurveCache::new(s.estimator());
    let case = ChainRuleCase {
        phi: ScalarFn::Power { p: 2.5 },
        space: SpaceSpec::with_weights(2.5, vec![1.0, 3.0]).unwrap(),
    };
    let rep = check_chain_rule(&[case], &s, &cache).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn starved_budget_turns_failures_inconclusive() {
    let mut s = small(3.0, 3, 2.0);
    s.directions = 8;
    let rep = run_all(&s, RunOptions::default()).unwrap();
    assert!(rep.checks.iter().all(|c| c.verdict != Verdict::Fail));
    for id in ["duality-map-identities", "young", "sym-bregman", "homogeneity"] {
        assert_eq!(rep.check(id).unwrap().verdict, Verdict::Pass, "{id}");
    }
    if rep.checks.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        assert!(rep.success(false));
        assert!(!rep.success(true));
    }
}

#[test]
fn xu_roach_lower_reports_the_dual_selection() {
    let rep = run("xu-roach-lower", &small(4.0, 2, 4.0));
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.details.contains_key("dual_selection"));
}

#[test]
fn hilbert_upper_constant_for_quartic_power() {
    let mut s = small(2.0, 2, 4.0);
    s.tau_bar = 0.01;
    let rep = run("xu-roach-upper", &s);
    let c = rep.fitted_constant.unwrap();
    // (1/4)||.||^4 has second derivative 3 along x, so the ratio tends to 3.
    assert!((c - 3.0).abs() < 0.05, "{c}");
}
