//! Moduli of convexity and smoothness, of the space and of functionals.
//!
//! The suprema and infima in the definitions are estimated by seeded sampling
//! followed by a compass search on a chart of the unit sphere. A sampled
//! supremum never exceeds the true one and a sampled infimum is never below
//! it; [`Sense`] records which side a curve errs on.

mod closed_form;
mod estimate;
mod fit;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::conjugate::{format_float, parse_float, GridFunction};
use crate::error::{Error, Result};
use crate::space::Point;

pub use closed_form::{closed_form_modulus, ClosedForm};
pub use estimate::{
    func_delta, func_delta_at, func_rho, func_rho_at, space_delta, space_delta_at, space_rho,
    space_rho_at, Estimate,
};
pub use fit::{power_type_fit, PowerFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    SpaceDelta,
    SpaceRho,
    FuncDelta,
    FuncRho,
}

impl ModulusKind {
    pub fn is_delta(self) -> bool {
        matches!(self, ModulusKind::SpaceDelta | ModulusKind::FuncDelta)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModulusKind::SpaceDelta => "space-delta",
            ModulusKind::SpaceRho => "space-rho",
            ModulusKind::FuncDelta => "func-delta",
            ModulusKind::FuncRho => "func-rho",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "space-delta" => Ok(ModulusKind::SpaceDelta),
            "space-rho" => Ok(ModulusKind::SpaceRho),
            "func-delta" => Ok(ModulusKind::FuncDelta),
            "func-rho" => Ok(ModulusKind::FuncRho),
            _ => Err(Error::Parse(format!("unknown modulus kind {s:?}"))),
        }
    }
}

/// Which side of the true value an estimate can err on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    /// Sampled supremum: never above the true modulus.
    LowerEstimateOfSup,
    /// Sampled infimum: never below the true modulus.
    UpperEstimateOfInf,
    /// Analytic formula.
    Exact,
}

impl Sense {
    pub fn for_kind(kind: ModulusKind) -> Sense {
        if kind.is_delta() {
            Sense::UpperEstimateOfInf
        } else {
            Sense::LowerEstimateOfSup
        }
    }
}

/// Sampling budget and seed of the sup/inf estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub seed: u64,
    /// Number of sampled candidates per grid point.
    pub samples: usize,
    /// Number of best candidates refined by local search.
    pub starts: usize,
    /// Evaluation budget of one local search.
    pub max_evals: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            seed: 42,
            samples: 4096,
            starts: 4,
            max_evals: 1500,
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(seed: u64) -> Self {
        EstimatorConfig {
            seed,
            ..Default::default()
        }
    }
}

/// A sampled modulus `tau -> value`, with the extremal inputs found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub kind: ModulusKind,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    /// Per grid point: `[y, y~]` for space-delta, `[x, y]` for space-rho and the
    /// direction `y` for functional moduli.
    pub witnesses: Vec<Vec<Point>>,
    pub estimator: Option<EstimatorConfig>,
    pub sense: Sense,
}

impl ModulusCurve {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// `c * value`, same witnesses.
    pub fn scaled(&self, c: f64) -> ModulusCurve {
        ModulusCurve {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// The curve as a grid function, prefixed by `(0, 0)` when the grid starts
    /// above zero.
    pub fn to_grid_function(&self) -> Result<GridFunction> {
        let mut xs = Vec::with_capacity(self.taus.len() + 1);
        let mut ys = Vec::with_capacity(self.taus.len() + 1);
        if self.taus.first().is_some_and(|&t| t > 0.0) {
            xs.push(0.0);
            ys.push(0.0);
        }
        xs.extend_from_slice(&self.taus);
        ys.extend_from_slice(&self.values);
        GridFunction::new(xs, ys)
    }

    /// Value at the grid point equal to `tau`, if any.
    pub fn value_at(&self, tau: f64) -> Option<f64> {
        self.taus
            .iter()
            .position(|&t| t == tau)
            .map(|k| self.values[k])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let shape: Vec<usize> = self
            .witnesses
            .first()
            .map(|ws| ws.iter().map(|p| p.dim()).collect())
            .unwrap_or_default();
        let mut header = vec!["tau".to_string(), "value".to_string()];
        for (k, d) in shape.iter().enumerate() {
            for i in 0..*d {
                header.push(format!("w{k}_{i}"));
            }
        }
        wtr.write_record(&header)?;
        for (idx, (t, v)) in self.taus.iter().zip(&self.values).enumerate() {
            let mut row = vec![format_float(*t), format_float(*v)];
            if let Some(ws) = self.witnesses.get(idx) {
                for p in ws {
                    row.extend(p.iter().map(|c| format_float(*c)));
                }
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`ModulusCurve::write_csv`]. The kind is
    /// not stored in the file and must be supplied; `dim` splits witness columns.
    pub fn read_csv<R: Read>(r: R, kind: ModulusKind, dim: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut taus = Vec::new();
        let mut values = Vec::new();
        let mut witnesses = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 || (rec.len() - 2) % dim.max(1) != 0 {
                return Err(Error::Parse("malformed modulus curve row".into()));
            }
            taus.push(parse_float(&rec[0])?);
            values.push(parse_float(&rec[1])?);
            let coords: Vec<f64> = rec
                .iter()
                .skip(2)
                .map(parse_float)
                .collect::<Result<_>>()?;
            witnesses.push(
                coords
                    .chunks(dim.max(1))
                    .map(|c| Point::new(c.to_vec()))
                    .collect(),
            );
        }
        Ok(ModulusCurve {
            kind,
            taus,
            values,
            witnesses,
            estimator: None,
            sense: Sense::for_kind(kind),
        })
    }
}

/// `tau_k = tau_max * k / n` for `k = 1..=n`.
pub fn tau_grid(tau_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| tau_max * k as f64 / n as f64).collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = tau_grid(1.0, 100);
        assert_eq!(g.len(), 100);
        assert!((g[0] - 0.01).abs() < 1e-15 && g[99] == 1.0);
        let l = log_grid(1e-3, 2.0, 5);
        assert!((l[0] - 1e-3).abs() < 1e-15 && l[4] == 2.0);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_round_trip() {
        let c = ModulusCurve {
            kind: ModulusKind::SpaceRho,
            taus: vec![0.5, 1.0],
            values: vec![0.1180339887498949, 0.41421356237309515],
            witnesses: vec![
                vec![Point::new(vec![1.0, 0.0]), Point::new(vec![0.0, 1.0])],
                vec![Point::new(vec![0.0, -1.0]), Point::new(vec![1.0, 0.0])],
            ],
            estimator: None,
            sense: Sense::LowerEstimateOfSup,
        };
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tau,value,w0_0,w0_1,w1_0,w1_1\n"));
        let back = ModulusCurve::read_csv(&buf[..], ModulusKind::SpaceRho, 2).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn grid_function_prefixes_origin() {
        let c = ModulusCurve {
            kind: ModulusKind::FuncDelta,
            taus: vec![0.5, 1.0],
            values: vec![0.125, 0.5],
            witnesses: vec![],
            estimator: None,
            sense: Sense::Exact,
        };
        let g = c.to_grid_function().unwrap();
        assert_eq!(g.xs(), &[0.0, 0.5, 1.0]);
        assert_eq!(c.value_at(0.5), Some(0.125));
        assert_eq!(c.value_at(0.7), None);
    }
}
