use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::functional::Functional;
use crate::moduli::{
    closed_form_modulus, func_delta, func_rho, space_delta, space_rho, EstimatorConfig,
    ModulusCurve, ModulusKind,
};
use crate::space::{Point, SpaceSpec};

/// Memoized modulus curves shared by the checks of one run.
///
/// Computation happens outside the lock; two threads racing on the same key
/// compute the same curve, so either result may be kept.
pub struct CurveCache {
    cfg: EstimatorConfig,
    closed_forms: bool,
    curves: Mutex<HashMap<String, Arc<ModulusCurve>>>,
}

impl CurveCache {
    /// Space moduli come from closed forms where available.
    pub fn new(cfg: EstimatorConfig) -> Self {
        CurveCache {
            cfg,
            closed_forms: true,
            curves: Mutex::new(HashMap::new()),
        }
    }

    /// Every curve is estimated, including those with a closed form.
    pub fn estimated_only(cfg: EstimatorConfig) -> Self {
        CurveCache {
            closed_forms: false,
            ..CurveCache::new(cfg)
        }
    }

    pub fn config(&self) -> EstimatorConfig {
        self.cfg
    }

    pub fn len(&self) -> usize {
        self.curves.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or(&self, key: String, f: impl FnOnce() -> Result<ModulusCurve>) -> Result<Arc<ModulusCurve>> {
        if let Some(c) = self.curves.lock().expect("cache lock").get(&key) {
            return Ok(c.clone());
        }
        let curve = Arc::new(f()?);
        let mut map = self.curves.lock().expect("cache lock");
        Ok(map.entry(key).or_insert(curve).clone())
    }

    /// `space-rho` or `space-delta` of `space` on `taus`.
    pub fn space(&self, space: &SpaceSpec, kind: ModulusKind, taus: &[f64]) -> Result<Arc<ModulusCurve>> {
        let mut key = format!("{}|{:?}", kind.name(), space);
        push_bits(&mut key, taus);
        self.get_or(key, || {
            if self.closed_forms {
                if let Some(cf) = closed_form_modulus(space, kind) {
                    return Ok(cf.curve(taus));
                }
            }
            match kind {
                ModulusKind::SpaceRho => space_rho(space, taus, &self.cfg),
                _ => space_delta(space, taus, &self.cfg),
            }
        })
    }

    pub fn space_rho(&self, space: &SpaceSpec, taus: &[f64]) -> Result<Arc<ModulusCurve>> {
        self.space(space, ModulusKind::SpaceRho, taus)
    }

    pub fn space_delta(&self, space: &SpaceSpec, eps: &[f64]) -> Result<Arc<ModulusCurve>> {
        self.space(space, ModulusKind::SpaceDelta, eps)
    }

    /// `func-rho` or `func-delta` of `f` at `x` with respect to `xstar`.
    pub fn functional(&self, f: &Functional, x: &Point, xstar: &Point, kind: ModulusKind, taus: &[f64]) -> Result<Arc<ModulusCurve>> {
        let mut key = format!("{}|{:?}", kind.name(), f);
        push_bits(&mut key, x);
        push_bits(&mut key, xstar);
        push_bits(&mut key, taus);
        self.get_or(key, || match kind {
            ModulusKind::FuncDelta => func_delta(f, x, xstar, taus, &self.cfg),
            _ => func_rho(f, x, xstar, taus, &self.cfg),
        })
    }

    pub fn func_rho(&self, f: &Functional, x: &Point, xstar: &Point, taus: &[f64]) -> Result<Arc<ModulusCurve>> {
        self.functional(f, x, xstar, ModulusKind::FuncRho, taus)
    }

    pub fn func_delta(&self, f: &Functional, x: &Point, xstar: &Point, taus: &[f64]) -> Result<Arc<ModulusCurve>> {
        self.functional(f, x, xstar, ModulusKind::FuncDelta, taus)
    }
}

fn push_bits(key: &mut String, v: &[f64]) {
    key.push('|');
    for x in v {
        let _ = write!(key, "{:x},", x.to_bits());
    }
}
