use serde::{Deserialize, Serialize};

use super::ModulusCurve;
use crate::error::{Error, Result};

/// Power-type fit of a modulus near zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// Least-squares slope of `log value` against `log tau`.
    pub slope: f64,
    /// Slope rounded to the nearest multiple of 1/2.
    pub exponent: f64,
    /// Extremal admissible `K`: the smallest with `value <= K tau^exponent`
    /// for smoothness curves, the largest with `value >= K tau^exponent` for
    /// convexity curves, over the fit range.
    pub constant: f64,
    pub points: usize,
}

pub fn power_type_fit(curve: &ModulusCurve, tau_max: f64) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = curve
        .taus
        .iter()
        .zip(&curve.values)
        .filter(|(t, v)| **t > 0.0 && **t <= tau_max && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NoFit("need two positive values in the fit range"));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, v)| (a + t.ln(), b + v.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in &pts {
        let dx = t.ln() - mx;
        sxy += dx * (v.ln() - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::NoFit("fit range has a single abscissa"));
    }
    let slope = sxy / sxx;
    let exponent = (2.0 * slope).round() / 2.0;
    let ratios = pts.iter().map(|(t, v)| v / t.powf(exponent));
    let constant = if curve.kind.is_delta() {
        ratios.fold(f64::INFINITY, f64::min)
    } else {
        ratios.fold(0.0, f64::max)
    };
    Ok(PowerFit {
        slope,
        exponent,
        constant,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{tau_grid, ClosedForm, ModulusKind, Sense};

    fn synthetic(kind: ModulusKind, f: impl Fn(f64) -> f64) -> ModulusCurve {
        let taus = tau_grid(1.0, 100);
        ModulusCurve {
            kind,
            values: taus.iter().map(|&t| f(t)).collect(),
            taus,
            witnesses: vec![],
            estimator: None,
            sense: Sense::Exact,
        }
    }

    #[test]
    fn exact_power_recovers_constant() {
        let c = synthetic(ModulusKind::SpaceRho, |t| 0.37 * t * t);
        let fit = power_type_fit(&c, 1.0).unwrap();
        assert_eq!(fit.exponent, 2.0);
        assert!((fit.constant - 0.37).abs() < 1e-6);
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_exponents() {
        let rho = ClosedForm::HilbertRho.curve(&tau_grid(0.1, 50));
        assert!((power_type_fit(&rho, 0.1).unwrap().slope - 2.0).abs() < 0.05);
        let delta = ClosedForm::PowerDelta { r: 4.0 }.curve(&tau_grid(0.5, 50));
        let fit = power_type_fit(&delta, 0.5).unwrap();
        assert!((fit.slope - 4.0).abs() < 0.1);
        assert_eq!(fit.exponent, 4.0);
        assert!((fit.constant * 64.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn degenerate_curve() {
        let c = synthetic(ModulusKind::SpaceDelta, |_| 0.0);
        assert!(matches!(power_type_fit(&c, 1.0), Err(Error::NoFit(_))));
    }
}
