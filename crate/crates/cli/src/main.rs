use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bregman_core::conjugate::uniform_grid;
use bregman_core::moduli::{func_delta, func_rho, space_delta, space_rho, tau_grid};
use bregman_core::verifier::{run_check, CurveCache};
use bregman_core::{
    legendre_transform, run_all, BoundReport, EstimatorConfig, Functional, GaugeExponent, GridFunction, ModulusKind, Point, RunOptions,
    SpaceSpec, SweepSpec, Verdict,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "bregman", version, about = "Bregman divergences and moduli of l_r spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Dimension of the space [default: 2; verify and constants sweep all default spaces]
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Norm exponent r [default: 2; verify and constants sweep all default spaces]
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Comma-separated positive weights; sets the dimension.
    #[arg(long, global = true, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Gauge exponent p of F = ||.||^p / p [default: 2; verify and constants sweep all default p]
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true, default_value_t = 1.0)]
    tau_bar: f64,
    /// Points per grid.
    #[arg(long, global = true, default_value_t = 100)]
    grid: usize,
    /// Sampled directions per estimated value.
    #[arg(long, global = true, default_value_t = 4096)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F(x), F(y), j_p(x), D_F(y, x) and the symmetric divergence.
    Bregman {
        #[arg(short = 'x', allow_hyphen_values = true)]
        x: String,
        #[arg(short = 'y', allow_hyphen_values = true)]
        y: String,
    },
    /// Estimates a modulus curve on the tau grid (the eps grid on (0, 2] for
    /// space-delta).
    Moduli {
        #[arg(long, value_parser = parse_kind)]
        kind: ModulusKind,
        /// Base point of the functional moduli [default: normalized e_1]
        #[arg(short = 'x', allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Discrete Legendre transform of a CSV function with columns x,y.
    Conjugate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Slope range [default: the range of slopes of the input]
        #[arg(long, allow_hyphen_values = true)]
        slope_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        slope_max: Option<f64>,
    },
    /// Runs every check and writes the report.
    Verify {
        /// Inconclusive checks fail the exit code.
        #[arg(long)]
        strict: bool,
        /// Record per-check wall-clock times.
        #[arg(long)]
        timings: bool,
    },
    /// Runs one check and reports its fitted constants.
    Constants {
        /// Check id; xu-upper and xu-lower abbreviate xu-roach-upper and xu-roach-lower.
        #[arg(long)]
        check: String,
        #[arg(long)]
        strict: bool,
    },
}

fn parse_kind(s: &str) -> std::result::Result<ModulusKind, String> {
    ModulusKind::parse(s).map_err(|e| e.to_string())
}

fn parse_coords(s: &str) -> Result<Point> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad coordinate {c:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Point::new(coords))
}

impl Common {
    fn space(&self) -> Result<SpaceSpec> {
        let r = self.r.unwrap_or(2.0);
        let space = match &self.weights {
            Some(w) => {
                if let Some(d) = self.dim {
                    if d != w.len() {
                        bail!("--dim {d} does not match {} weights", w.len());
                    }
                }
                SpaceSpec::with_weights(r, w.clone())?
            }
            None => SpaceSpec::new(self.dim.unwrap_or(2), r)?,
        };
        space.require_smooth()?;
        Ok(space)
    }

    fn gauge(&self) -> Result<GaugeExponent> {
        Ok(GaugeExponent::new(self.p.unwrap_or(2.0))?)
    }

    fn point(&self, space: &SpaceSpec, s: &str) -> Result<Point> {
        let x = parse_coords(s)?;
        space.check_dim(x.dim())?;
        Ok(x)
    }

    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            seed: self.seed,
            samples: self.samples,
            ..EstimatorConfig::default()
        }
    }

    fn restricts_sweep(&self) -> bool {
        self.dim.is_some() || self.r.is_some() || self.weights.is_some() || self.p.is_some()
    }

    /// The default sweep, narrowed to one space or one exponent when any is given.
    fn sweep(&self) -> Result<SweepSpec> {
        let mut sweep = SweepSpec::default_sweep(self.seed);
        sweep.tau_bar = self.tau_bar;
        sweep.grid = self.grid;
        sweep.directions = self.samples;
        if self.dim.is_some() || self.r.is_some() || self.weights.is_some() {
            sweep.spaces = vec![self.space()?];
        }
        if let Some(p) = self.p {
            sweep.ps = vec![p];
        }
        sweep.validate()?;
        Ok(sweep)
    }
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn summary_csv(checks: &[BoundReport]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["check_id", "verdict", "min_margin", "tolerance", "fitted_constant", "samples"])?;
        for c in checks {
            let verdict = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
                Verdict::Inconclusive => "inconclusive",
            };
            w.write_record([
                c.check_id.clone(),
                verdict.to_string(),
                format!("{:?}", c.min_margin),
                format!("{:?}", c.tolerance),
                c.fitted_constant.map(|v| format!("{v:?}")).unwrap_or_default(),
                c.samples.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn bregman(c: &Common, x: &str, y: &str) -> Result<()> {
    let space = c.space()?;
    let p = c.gauge()?;
    let (x, y) = (c.point(&space, x)?, c.point(&space, y)?);
    let f = Functional::norm_power(space.clone(), p);
    let j = f.subgradient(&x)?;
    let (fx, fy) = (f.eval(&x)?, f.eval(&y)?);
    let d = f.bregman(&j, &y, &x)?;
    let sym = f.sym_bregman(&x, &y)?;
    let body = match c.format {
        Format::Json => json_bytes(&json!({
            "space": space.label(),
            "p": p.p(),
            "f_x": fx,
            "f_y": fy,
            "j_p_x": j,
            "bregman": d,
            "sym_bregman": sym,
        }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                let mut header = vec!["f_x".to_string(), "f_y".into(), "bregman".into(), "sym_bregman".into()];
                header.extend((0..j.dim()).map(|i| format!("j_{i}")));
                w.write_record(&header)?;
                let mut row: Vec<String> = [fx, fy, d, sym].iter().map(|v| format!("{v:?}")).collect();
                row.extend(j.iter().map(|v| format!("{v:?}")));
                w.write_record(&row)?;
                w.flush()?;
            }
            buf
        }
    };
    emit(c.out.as_deref(), &body)
}

fn moduli(c: &Common, kind: ModulusKind, x: Option<&str>) -> Result<()> {
    let space = c.space()?;
    if c.grid == 0 {
        bail!("--grid must be at least 1");
    }
    let cfg = c.estimator();
    let taus = tau_grid(c.tau_bar, c.grid);
    let curve = match kind {
        ModulusKind::SpaceRho => space_rho(&space, &taus, &cfg)?,
        ModulusKind::SpaceDelta => space_delta(&space, &tau_grid(2.0, c.grid), &cfg)?,
        ModulusKind::FuncRho | ModulusKind::FuncDelta => {
            let f = Functional::norm_power(space.clone(), c.gauge()?);
            let x = match x {
                Some(s) => c.point(&space, s)?,
                None => space.normalize(&Point::basis(space.dim(), 0)).context("zero base point")?,
            };
            let j = f.subgradient(&x)?;
            if kind == ModulusKind::FuncRho {
                func_rho(&f, &x, &j, &taus, &cfg)?
            } else {
                func_delta(&f, &x, &j, &taus, &cfg)?
            }
        }
    };
    let body = match c.format {
        Format::Json => json_bytes(&curve)?,
        Format::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            buf
        }
    };
    emit(c.out.as_deref(), &body)
}

fn conjugate(c: &Common, input: &Path, lo: Option<f64>, hi: Option<f64>) -> Result<()> {
    let file = std::fs::File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let f = GridFunction::read_csv(file)?;
    let n = f.len();
    if n < 2 {
        bail!("input needs at least two points");
    }
    let slope = |a: usize, b: usize| (f.ys()[b] - f.ys()[a]) / (f.xs()[b] - f.xs()[a]);
    let lo = lo.unwrap_or_else(|| slope(0, 1));
    let hi = hi.unwrap_or_else(|| slope(n - 2, n - 1));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("slope range [{lo}, {hi}] is empty or not finite");
    }
    let conj = legendre_transform(&f, &uniform_grid(lo, hi, c.grid.max(2)))?;
    let body = match c.format {
        Format::Json => json_bytes(&conj)?,
        Format::Csv => {
            let mut buf = Vec::new();
            conj.write_csv(&mut buf)?;
            buf
        }
    };
    emit(c.out.as_deref(), &body)
}

fn verify(c: &Common, strict: bool, timings: bool) -> Result<bool> {
    let sweep = c.sweep()?;
    let report = run_all(&sweep, RunOptions { timings })?;
    let body = match c.format {
        Format::Json => report.to_json()?.into_bytes(),
        Format::Csv => summary_csv(&report.checks)?,
    };
    emit(c.out.as_deref(), &body)?;
    for chk in &report.checks {
        if chk.verdict != Verdict::Pass {
            eprintln!("{}: {:?}", chk.check_id, chk.verdict);
        }
    }
    Ok(report.success(strict))
}

fn constants(c: &Common, check: &str, strict: bool) -> Result<bool> {
    let id = match check {
        "xu-upper" => "xu-roach-upper",
        "xu-lower" => "xu-roach-lower",
        other => other,
    };
    let sweep = if c.restricts_sweep() {
        let mut s = c.sweep()?;
        s.spaces = vec![c.space()?];
        s.ps = vec![c.gauge()?.p()];
        s
    } else {
        c.sweep()?
    };
    let cache = CurveCache::new(sweep.estimator());
    let rep = run_check(id, &sweep, &cache)?;
    let body = match c.format {
        Format::Json => json_bytes(&rep)?,
        Format::Csv => summary_csv(std::slice::from_ref(&rep))?,
    };
    emit(c.out.as_deref(), &body)?;
    Ok(match rep.verdict {
        Verdict::Pass => true,
        Verdict::Fail => false,
        Verdict::Inconclusive => !strict,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Bregman { x, y } => bregman(c, x, y).map(|_| true),
        Command::Moduli { kind, x } => moduli(c, *kind, x.as_deref()).map(|_| true),
        Command::Conjugate { input, slope_min, slope_max } => conjugate(c, input, *slope_min, *slope_max).map(|_| true),
        Command::Verify { strict, timings } => verify(c, *strict, *timings),
        Command::Constants { check, strict } => constants(c, check, *strict),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
