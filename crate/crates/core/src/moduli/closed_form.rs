use serde::{Deserialize, Serialize};

use super::{ModulusCurve, ModulusKind, Sense};
use crate::space::SpaceSpec;

/// Analytic moduli of `l_r` spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedForm {
    /// `1 - sqrt(1 - eps^2/4)`
    HilbertDelta,
    /// `sqrt(1 + tau^2) - 1`
    HilbertRho,
    /// `1 - (1 - (eps/2)^r)^(1/r)`, valid for `r >= 2`.
    PowerDelta { r: f64 },
}

impl ClosedForm {
    pub fn kind(&self) -> ModulusKind {
        match self {
            ClosedForm::HilbertRho => ModulusKind::SpaceRho,
            _ => ModulusKind::SpaceDelta,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::HilbertDelta => {
                let e = t.clamp(0.0, 2.0);
                let q = e * e / 4.0;
                q / (1.0 + (1.0 - q).sqrt())
            }
            ClosedForm::HilbertRho => {
                let q = t * t;
                q / ((1.0 + q).sqrt() + 1.0)
            }
            ClosedForm::PowerDelta { r } => {
                let u = (t.clamp(0.0, 2.0) / 2.0).powf(r);
                if u >= 1.0 {
                    1.0
                } else {
                    -((-u).ln_1p() / r).exp_m1()
                }
            }
        }
    }

    pub fn curve(&self, taus: &[f64]) -> ModulusCurve {
        ModulusCurve {
            kind: self.kind(),
            taus: taus.to_vec(),
            values: taus.iter().map(|&t| self.eval(t)).collect(),
            witnesses: Vec::new(),
            estimator: None,
            sense: Sense::Exact,
        }
    }
}

/// Analytic modulus of `space`, when one is available: both moduli for
/// `r = 2` and the modulus of convexity for `r >= 2`. Weights do not change
/// the moduli, since a weighted `l_r` is isometric to the unweighted one.
pub fn closed_form_modulus(space: &SpaceSpec, kind: ModulusKind) -> Option<ClosedForm> {
    let r = space.r();
    match kind {
        ModulusKind::SpaceRho if r == 2.0 => Some(ClosedForm::HilbertRho),
        ModulusKind::SpaceDelta if r == 2.0 => Some(ClosedForm::HilbertDelta),
        ModulusKind::SpaceDelta if r > 2.0 && r.is_finite() => Some(ClosedForm::PowerDelta { r }),
        _ => None,
    }
}
