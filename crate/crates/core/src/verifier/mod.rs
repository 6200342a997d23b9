//! Numerical checks of the inequalities relating Bregman divergences of norm
//! powers to the moduli of the underlying space, with constant fitting and a
//! machine-readable report.

mod bounds;
mod cache;
mod functional_checks;
mod identities;
mod sampling;
mod space_checks;
mod theorem;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::moduli::{tau_grid, EstimatorConfig};
use crate::space::{GaugeExponent, Point, SpaceSpec};

pub use cache::CurveCache;
pub use sampling::base_points;
pub use functional_checks::{chain_rule_cases, check_chain_rule, ChainRuleCase};
pub use theorem::{check_convexity_transfer, check_smoothness_transfer, EnvelopeBound};

pub const REPORT_VERSION: &str = "1";

/// Relative tolerance of checks that are algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Absolute tolerance of inequality checks on estimated curves.
pub const ESTIMATOR_TOL: f64 = 1e-4;
/// Discrepancy allowed between a discrete conjugate and an estimated modulus.
pub const DUALITY_TOL: f64 = 1e-2;
/// Estimator budgets below this are too small to call a violation a failure.
pub const MIN_TRUSTED_SAMPLES: usize = 256;

/// Parameters shared by all checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub spaces: Vec<SpaceSpec>,
    pub ps: Vec<f64>,
    pub tau_bar: f64,
    /// Number of points of every `tau` grid.
    pub grid: usize,
    /// Base points `x` on the unit sphere.
    pub base_points: usize,
    /// Sampled directions per estimated modulus value.
    pub directions: usize,
    /// Random `(x, y)` pairs of the global Bregman bounds.
    pub pairs: usize,
    /// Random samples of the identity checks.
    pub identity_samples: usize,
    pub seed: u64,
}

impl SweepSpec {
    /// `l_r^n` for `r in {1.5, 2, 3, 4}`, `n in {2, 3, 5}`, `p in {1.5, 2, 3}`.
    pub fn default_sweep(seed: u64) -> Self {
        let mut spaces = Vec::new();
        for r in [1.5, 2.0, 3.0, 4.0] {
            for n in [2, 3, 5] {
                spaces.push(SpaceSpec::new(n, r).expect("valid default space"));
            }
        }
        SweepSpec {
            spaces,
            ps: vec![1.5, 2.0, 3.0],
            tau_bar: 1.0,
            grid: 100,
            base_points: 2,
            directions: 4096,
            pairs: 2000,
            identity_samples: 10_000,
            seed,
        }
    }

    pub fn empty(seed: u64) -> Self {
        SweepSpec {
            spaces: Vec::new(),
            ps: Vec::new(),
            ..SweepSpec::default_sweep(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_bar.is_finite() && self.tau_bar > 0.0) {
            return Err(Error::OutOfRange {
                value: self.tau_bar,
                range: "tau_bar > 0",
            });
        }
        for (name, v) in [
            ("grid", self.grid),
            ("base_points", self.base_points),
            ("directions", self.directions),
            ("pairs", self.pairs),
            ("identity_samples", self.identity_samples),
        ] {
            if v == 0 {
                return Err(Error::Parse(format!("{name} must be at least 1")));
            }
        }
        if self.grid < 4 {
            return Err(Error::DegenerateGrid {
                needed: 4,
                found: self.grid,
            });
        }
        for &p in &self.ps {
            GaugeExponent::new(p)?;
        }
        for s in &self.spaces {
            s.require_smooth()?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty() || self.ps.is_empty()
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            seed: self.seed,
            samples: self.directions,
            ..EstimatorConfig::default()
        }
    }

    /// The `tau` grid on `(0, tau_bar]`.
    pub fn taus(&self) -> Vec<f64> {
        tau_grid(self.tau_bar, self.grid)
    }

    /// The `eps` grid on `(0, 2]`.
    pub fn eps(&self) -> Vec<f64> {
        tau_grid(2.0, self.grid)
    }

    /// Every `(space, p)` combination of the sweep.
    pub fn cases(&self) -> Vec<(SpaceSpec, GaugeExponent)> {
        let mut out = Vec::new();
        for s in &self.spaces {
            for &p in &self.ps {
                out.push((s.clone(), GaugeExponent::new(p).expect("validated exponent")));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Worst-case input of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub context: String,
    #[serde(with = "float_repr::option")]
    pub tau: Option<f64>,
    pub points: Vec<Point>,
    #[serde(with = "float_repr")]
    pub margin: f64,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check_id: String,
    pub params: SweepSpec,
    pub samples: usize,
    /// Most violated slack; negative beyond `tolerance` means violation.
    #[serde(with = "float_repr")]
    pub min_margin: f64,
    #[serde(with = "float_repr")]
    pub tolerance: f64,
    #[serde(with = "float_repr::option")]
    pub fitted_constant: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub verdict: Verdict,
    pub details: BTreeMap<String, Value>,
    pub runtime_ms: Option<u64>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// The aggregated report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub sweep: SweepSpec,
    pub checks: Vec<BoundReport>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    /// Exit policy: failures always count, inconclusive checks only when
    /// `strict`.
    pub fn success(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| match c.verdict {
            Verdict::Pass => true,
            Verdict::Fail => false,
            Verdict::Inconclusive => !strict,
        })
    }

    pub fn check(&self, id: &str) -> Option<&BoundReport> {
        self.checks.iter().find(|c| c.check_id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock time per check. Off by default so that reports are
    /// reproducible byte for byte.
    pub timings: bool,
}

/// Shared state of one run.
pub struct Ctx<'a> {
    pub sweep: &'a SweepSpec,
    pub cache: &'a CurveCache,
}

impl Ctx<'_> {
    pub fn trusted(&self) -> bool {
        self.sweep.directions >= MIN_TRUSTED_SAMPLES
    }
}

/// Accumulates margins, witnesses and side conditions of a check.
pub(crate) struct CheckBuilder {
    id: &'static str,
    tolerance: f64,
    estimator_based: bool,
    min_margin: f64,
    worst: Option<Witness>,
    samples: usize,
    fitted: Option<f64>,
    witnesses: Vec<Witness>,
    details: BTreeMap<String, Value>,
    conditions: BTreeMap<String, bool>,
    inconclusive: Vec<String>,
}

impl CheckBuilder {
    pub(crate) fn new(id: &'static str, tolerance: f64, estimator_based: bool) -> Self {
        CheckBuilder {
            id,
            tolerance,
            estimator_based,
            min_margin: f64::INFINITY,
            worst: None,
            samples: 0,
            fitted: None,
            witnesses: Vec::new(),
            details: BTreeMap::new(),
            conditions: BTreeMap::new(),
            inconclusive: Vec::new(),
        }
    }

    /// Records one margin. NaN counts as an unbounded violation.
    pub(crate) fn margin(&mut self, m: f64, witness: impl FnOnce() -> (String, Option<f64>, Vec<Point>)) {
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        self.samples += 1;
        if m < self.min_margin {
            self.min_margin = m;
            let (context, tau, points) = witness();
            self.worst = Some(Witness {
                context,
                tau,
                points,
                margin: m,
            });
        }
    }

    pub(crate) fn condition(&mut self, name: impl Into<String>, ok: bool) {
        let name = name.into();
        let entry = self.conditions.entry(name).or_insert(true);
        *entry &= ok;
    }

    pub(crate) fn inconclusive(&mut self, reason: impl Into<String>) {
        self.inconclusive.push(reason.into());
    }

    pub(crate) fn fitted(&mut self, c: f64) {
        self.fitted = Some(match self.fitted {
            Some(old) => old.max(c),
            None => c,
        });
    }

    pub(crate) fn set_fitted(&mut self, c: Option<f64>) {
        self.fitted = c;
    }

    pub(crate) fn detail(&mut self, key: impl Into<String>, v: impl Serialize) {
        self.details
            .insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub(crate) fn witness(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    pub(crate) fn finish(mut self, ctx: &Ctx) -> BoundReport {
        let min_margin = if self.min_margin == f64::INFINITY {
            0.0
        } else {
            self.min_margin
        };
        let margin_ok = min_margin >= -self.tolerance;
        let conditions_ok = self.conditions.values().all(|&b| b);
        let verdict = if !self.inconclusive.is_empty() {
            Verdict::Inconclusive
        } else if margin_ok && conditions_ok {
            Verdict::Pass
        } else if self.estimator_based && !ctx.trusted() {
            self.inconclusive
                .push(format!("estimator budget below {MIN_TRUSTED_SAMPLES} directions"));
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        if !self.conditions.is_empty() {
            let c = std::mem::take(&mut self.conditions);
            self.detail("conditions", c);
        }
        if !self.inconclusive.is_empty() {
            let r = std::mem::take(&mut self.inconclusive);
            self.detail("inconclusive", r);
        }
        let mut witnesses = self.witnesses;
        if let Some(w) = self.worst {
            witnesses.insert(0, w);
        }
        if self.samples == 0 {
            self.details
                .insert("vacuous".into(), Value::Bool(true));
        }
        BoundReport {
            check_id: self.id.to_string(),
            params: ctx.sweep.clone(),
            samples: self.samples,
            min_margin,
            tolerance: self.tolerance,
            fitted_constant: self.fitted,
            witnesses,
            verdict,
            details: self.details,
            runtime_ms: None,
        }
    }

    /// Runs `body` and finishes the report, recording an error if it fails.
    pub(crate) fn run(mut self, ctx: &Ctx, body: impl FnOnce(&mut CheckBuilder) -> Result<()>) -> BoundReport {
        match body(&mut self) {
            Ok(()) => self.finish(ctx),
            Err(e) => self.errored(ctx, &e),
        }
    }

    /// Report for a check that could not run.
    pub(crate) fn errored(mut self, ctx: &Ctx, err: &Error) -> BoundReport {
        self.detail("error", err.to_string());
        self.condition("completed", false);
        // Only errors raised by the shape of estimated data can be blamed on the budget.
        self.estimator_based &= matches!(err, Error::NonMonotoneEnvelope(_) | Error::NoFit(_) | Error::OutOfRange { .. });
        self.finish(ctx)
    }
}

pub(crate) fn case_label(space: &SpaceSpec, p: GaugeExponent) -> String {
    format!("{} p={}", space.label(), p.p())
}

/// Base points of `space` paired with their duality map `j_p(x)`.
pub(crate) fn case_points(sweep: &SweepSpec, space: &SpaceSpec, p: GaugeExponent) -> Vec<(Point, Point)> {
    base_points(space, sweep.base_points, sweep.seed)
        .into_iter()
        .map(|x| {
            let j = space.duality_selection(p.p(), &x);
            (x, j)
        })
        .collect()
}

type CheckFn = fn(&Ctx) -> BoundReport;

/// Every check, keyed by id.
pub fn check_ids() -> Vec<&'static str> {
    registry().into_iter().map(|(id, _)| id).collect()
}

fn registry() -> Vec<(&'static str, CheckFn)> {
    let mut v: Vec<(&'static str, CheckFn)> = vec![
        ("chain-rule", functional_checks::chain_rule),
        ("conv-smoo-duality", functional_checks::conv_smoo_duality),
        ("convexity-transfer", theorem::convexity_transfer),
        ("delta-biconjugate", space_checks::delta_biconjugate),
        ("delta-rho-duality", space_checks::delta_rho_duality),
        ("duality-map-identities", identities::duality_map_identities),
        ("hilbert-identity", identities::hilbert_identity),
        ("homogeneity", identities::homogeneity),
        ("lemma-rho-quadratic-lower", space_checks::rho_quadratic_lower),
        ("lemma-rho-ratio", space_checks::rho_ratio),
        ("monotone-scaling", functional_checks::monotone_scaling),
        ("smoothness-moduli-equivalence", space_checks::smoothness_equivalence),
        ("smoothness-transfer", theorem::smoothness_transfer),
        ("sym-bregman", identities::sym_bregman),
        ("sym-implications", bounds::sym_implications),
        ("uniform-bounds-corollary", bounds::uniform_bounds_corollary),
        ("xu-roach-lower", theorem::xu_roach_lower),
        ("xu-roach-upper", theorem::xu_roach_upper),
        ("young", identities::young),
    ];
    v.sort_by_key(|(id, _)| *id);
    v
}

/// Runs one check by id.
pub fn run_check(id: &str, sweep: &SweepSpec, cache: &CurveCache) -> Result<BoundReport> {
    sweep.validate()?;
    let (_, f) = registry()
        .into_iter()
        .find(|(k, _)| *k == id)
        .ok_or_else(|| Error::Parse(format!("unknown check {id:?}")))?;
    let ctx = Ctx { sweep, cache };
    Ok(f(&ctx))
}

/// Runs every check. An empty sweep yields an empty report.
pub fn run_all(sweep: &SweepSpec, opts: RunOptions) -> Result<Report> {
    sweep.validate()?;
    let mut checks = Vec::new();
    if !sweep.is_empty() {
        let cache = CurveCache::new(sweep.estimator());
        let ctx = Ctx {
            sweep,
            cache: &cache,
        };
        for (_, f) in registry() {
            let start = Instant::now();
            let mut rep = f(&ctx);
            if opts.timings {
                rep.runtime_ms = Some(start.elapsed().as_millis() as u64);
            }
            checks.push(rep);
        }
    }
    Ok(Report {
        version: REPORT_VERSION.to_string(),
        seed: sweep.seed,
        sweep: sweep.clone(),
        checks,
    })
}

/// Runs the `(2 delta_X)* = 2 rho_{X*}` comparison for one space.
pub fn delta_rho_duality_report(space: &SpaceSpec, grid: usize, cfg: EstimatorConfig) -> Result<BoundReport> {
    let sweep = SweepSpec {
        spaces: vec![space.clone()],
        ps: vec![2.0],
        grid,
        directions: cfg.samples,
        seed: cfg.seed,
        ..SweepSpec::default_sweep(cfg.seed)
    };
    run_check("delta-rho-duality", &sweep, &CurveCache::new(cfg))
}

/// Serde helpers writing non-finite floats as the strings `inf`, `-inf`, `nan`.
pub mod float_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    fn decode<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom(format!("invalid float {s:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            match Option::<Repr>::deserialize(d)? {
                Some(r) => decode(r).map(Some),
                None => Ok(None),
            }
        }
    }
}
