//! Convex functionals built from the norm, their subgradients, conjugates and
//! Bregman divergences.

use serde::{Deserialize, Serialize};

use crate::conjugate::GridFunction;
use crate::error::{Error, Result};
use crate::space::{dot, GaugeExponent, Point, SpaceSpec};

/// A function of one real variable, composed with the norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFn {
    /// `f(t) = |t|^p / p` for `p >= 1` (the even extension of `t^p/p`).
    Power { p: f64 },
    /// `f^{-1}(t) = (p t)^(1/p)` on `t >= 0`; concave for `p > 1`.
    InversePower { p: f64 },
    /// Piecewise-linear interpolation of tabulated values.
    Tabulated(GridFunction),
}

impl ScalarFn {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidGaugeExponent(p));
        }
        Ok(ScalarFn::Power { p })
    }

    /// Tabulated kind; rejected unless the secant test passes on the grid.
    pub fn tabulated(f: GridFunction) -> Result<Self> {
        let scale = f
            .ys()
            .iter()
            .filter(|y| y.is_finite())
            .fold(1.0_f64, |m, y| m.max(y.abs()));
        let m = f.min_second_difference();
        if m < -1e-9 * scale {
            return Err(Error::NonConvex(format!(
                "second difference {m:.3e} on the probe grid"
            )));
        }
        Ok(ScalarFn::Tabulated(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Power { p } => {
                let a = t.abs();
                if *p == 1.0 {
                    a
                } else if *p == 2.0 {
                    a * a / 2.0
                } else {
                    a.powf(*p) / p
                }
            }
            ScalarFn::InversePower { p } => {
                if t < 0.0 {
                    f64::NAN
                } else {
                    (p * t).powf(1.0 / p)
                }
            }
            ScalarFn::Tabulated(g) => g.interpolate(t),
        }
    }

    /// A (right) derivative, used as the scalar subgradient.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Power { p } => {
                if *p == 1.0 {
                    if t == 0.0 {
                        0.0
                    } else {
                        t.signum()
                    }
                } else {
                    t.abs().powf(p - 1.0).copysign(t)
                }
            }
            ScalarFn::InversePower { p } => (p * t).powf(1.0 / p - 1.0),
            ScalarFn::Tabulated(g) => g.right_slope(t),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            ScalarFn::InversePower { p } => *p == 1.0,
            _ => true,
        }
    }

    /// One-dimensional modulus of smoothness at `s` with slope `t`: the unit
    /// sphere of `R` is `{-1, +1}`, so this is a maximum over two values.
    pub fn rho(&self, s: f64, t: f64, h: f64) -> f64 {
        let base = self.eval(s);
        let up = (self.eval(s + h) - base - t * h).abs();
        let down = (self.eval(s - h) - base + t * h).abs();
        up.max(down)
    }

    pub fn delta(&self, s: f64, t: f64, h: f64) -> f64 {
        let base = self.eval(s);
        let up = (self.eval(s + h) - base - t * h).abs();
        let down = (self.eval(s - h) - base + t * h).abs();
        up.min(down)
    }
}

/// Whether a norm power carries the `1/p` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerScale {
    /// `||x||^p`
    Unit,
    /// `(1/p) ||x||^p`
    InverseP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Form {
    NormPower { p: GaugeExponent, scale: PowerScale },
    PlainNorm,
    /// `phi(||x||)` with a convex scalar `phi`.
    Composed { phi: ScalarFn },
}

/// A convex functional on a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    space: SpaceSpec,
    form: Form,
}

impl Functional {
    /// `(1/p) ||x||^p`.
    pub fn norm_power(space: SpaceSpec, p: GaugeExponent) -> Self {
        Functional {
            space,
            form: Form::NormPower {
                p,
                scale: PowerScale::InverseP,
            },
        }
    }

    /// `||x||^p` without the `1/p` factor.
    pub fn unscaled_norm_power(space: SpaceSpec, p: GaugeExponent) -> Self {
        Functional {
            space,
            form: Form::NormPower {
                p,
                scale: PowerScale::Unit,
            },
        }
    }

    pub fn plain_norm(space: SpaceSpec) -> Self {
        Functional {
            space,
            form: Form::PlainNorm,
        }
    }

    pub fn composed(space: SpaceSpec, phi: ScalarFn) -> Result<Self> {
        if !phi.is_convex() {
            return Err(Error::NonConvex("composition needs a convex scalar".into()));
        }
        Ok(Functional {
            space,
            form: Form::Composed { phi },
        })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    /// Degree `q` of positive homogeneity, when the functional has one.
    pub fn homogeneity_degree(&self) -> Option<f64> {
        match &self.form {
            Form::NormPower { p, .. } => Some(p.p()),
            Form::PlainNorm => Some(1.0),
            Form::Composed {
                phi: ScalarFn::Power { p },
            } => Some(*p),
            Form::Composed { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        let s = self.space.label();
        match &self.form {
            Form::NormPower {
                p,
                scale: PowerScale::InverseP,
            } => format!("(1/{0})||.||^{0} on {s}", p.p()),
            Form::NormPower {
                p,
                scale: PowerScale::Unit,
            } => format!("||.||^{} on {s}", p.p()),
            Form::PlainNorm => format!("||.|| on {s}"),
            Form::Composed { phi } => match phi {
                ScalarFn::Power { p } => format!("|.|^{p}/{p} o ||.|| on {s}"),
                ScalarFn::InversePower { p } => format!("({p} .)^(1/{p}) o ||.|| on {s}"),
                ScalarFn::Tabulated(_) => format!("tabulated o ||.|| on {s}"),
            },
        }
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.space.norm_unchecked(x);
        match &self.form {
            Form::NormPower { p, scale } => {
                let v = if p.p() == 2.0 { n * n } else { n.powf(p.p()) };
                match scale {
                    PowerScale::Unit => v,
                    PowerScale::InverseP => v / p.p(),
                }
            }
            Form::PlainNorm => n,
            Form::Composed { phi } => phi.eval(n),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.space.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// Closed-form subgradient selection, a point of the dual space.
    pub fn subgradient(&self, x: &[f64]) -> Result<Point> {
        self.space.require_smooth()?;
        self.space.check_dim(x.len())?;
        let is_zero = x.iter().all(|&c| c == 0.0);
        match &self.form {
            Form::NormPower { p, scale } => {
                let j = self.space.duality_selection(p.p(), x);
                Ok(match scale {
                    PowerScale::InverseP => j,
                    PowerScale::Unit => j.scaled(p.p()),
                })
            }
            Form::PlainNorm => {
                if is_zero {
                    Err(Error::MultivaluedSubdifferential)
                } else {
                    Ok(self.space.duality_selection(1.0, x))
                }
            }
            Form::Composed { phi } => {
                let n = self.space.norm_unchecked(x);
                let t = phi.derivative(n);
                if is_zero {
                    if t == 0.0 {
                        Ok(Point::zeros(x.len()))
                    } else {
                        Err(Error::MultivaluedSubdifferential)
                    }
                } else {
                    Ok(self.space.duality_selection(1.0, x).scaled(t))
                }
            }
        }
    }

    /// Linearization error `F(y) - F(x) - <x*, y - x>`. It is a Bregman
    /// divergence when `xstar` is a subgradient at `x`; otherwise it may be
    /// negative. No absolute value is taken.
    pub fn bregman(&self, xstar: &[f64], y: &[f64], x: &[f64]) -> Result<f64> {
        self.space.check_dim(xstar.len())?;
        self.space.check_dim(y.len())?;
        self.space.check_dim(x.len())?;
        Ok(self.bregman_unchecked(xstar, y, x))
    }

    pub(crate) fn bregman_unchecked(&self, xstar: &[f64], y: &[f64], x: &[f64]) -> f64 {
        let lin: f64 = xstar
            .iter()
            .zip(y.iter().zip(x))
            .map(|(s, (a, b))| s * (a - b))
            .sum();
        self.eval_unchecked(y) - self.eval_unchecked(x) - lin
    }

    /// Symmetric divergence `<j(x) - j(y), x - y>`.
    pub fn sym_bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let jx = self.subgradient(x)?;
        let jy = self.subgradient(y)?;
        Ok(jx
            .iter()
            .zip(jy.iter())
            .zip(x.iter().zip(y))
            .map(|((a, b), (c, d))| (a - b) * (c - d))
            .sum())
    }

    /// Convex conjugate of `(1/p)||.||^p`: `(1/p')||.||_*^{p'}` on the dual space.
    pub fn conjugate(&self) -> Result<Functional> {
        match &self.form {
            Form::NormPower {
                p,
                scale: PowerScale::InverseP,
            } => Ok(Functional::norm_power(self.space.dual(), p.conj())),
            _ => Err(Error::NotConjugable(
                "only (1/p)||.||^p has a closed-form conjugate here",
            )),
        }
    }

    /// Young gap `F(x) + F*(x*) - <x*, x>`, nonnegative and zero exactly at
    /// subgradients.
    pub fn young_gap(&self, x: &[f64], xstar: &[f64]) -> Result<f64> {
        let conj = self.conjugate()?;
        Ok(self.eval(x)? + conj.eval(xstar)? - dot(xstar, x))
    }
}
