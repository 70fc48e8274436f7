//! Parameter sweeps over (λ, μ) and (m, n), with CSV and JSON output.
//!
//! Rows are always emitted in canonical order (μ then λ for sweeps, m then
//! n for surfaces) no matter how the cells were scheduled.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_channel, ChannelKind, ChannelParams};
use crate::coding::capacity;
use crate::error::{Error, Result};
use crate::protect::{run_protocol, MeasurementStrengths, MAX_SEARCH_STRENGTH};
use crate::state::{bell_like_state, BellLikeParams};

pub const CSV_HEADER: [&str; 10] = [
    "channel",
    "alpha",
    "lambda",
    "mu",
    "m",
    "n",
    "chi",
    "entropy_avg",
    "entropy_state",
    "success_prob",
];

/// Significant digits used for every float written to CSV.
pub const SIG_DIGITS: usize = 10;

pub const DEFAULT_MU_VALUES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Inclusive `start..=stop` range sampled every `step`. When the last step
/// would overshoot, `stop` itself is appended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        g.check(0.0, 1.0)?;
        Ok(g)
    }

    fn check(&self, lo: f64, hi: f64) -> Result<()> {
        let Self { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bound".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if start > stop {
            return Err(Error::InvalidGrid(format!(
                "start {start} exceeds stop {stop}"
            )));
        }
        if start < lo || stop > hi {
            return Err(Error::InvalidGrid(format!(
                "[{start}, {stop}] is outside [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let slack = 1e-9 * self.step;
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        let mut v: Vec<f64> = (0..count)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect();
        let last = *v.last().expect("count >= 1");
        if (self.stop - last).abs() <= slack {
            *v.last_mut().unwrap() = self.stop;
        } else {
            v.push(self.stop);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub channel: ChannelKind,
    pub alpha: f64,
    pub lambda_grid: Grid,
    pub mu_values: Vec<f64>,
    pub strengths: Option<MeasurementStrengths>,
}

impl SweepSpec {
    /// λ over (0, 1] in steps of 0.01 and the five standard memory strengths.
    pub fn new(channel: ChannelKind) -> Self {
        Self {
            channel,
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            lambda_grid: Grid {
                start: 0.01,
                stop: 1.0,
                step: 0.01,
            },
            mu_values: DEFAULT_MU_VALUES.to_vec(),
            strengths: None,
        }
    }

    fn validate(&self) -> Result<()> {
        BellLikeParams::new(self.alpha)?;
        self.lambda_grid.check(0.0, 1.0)?;
        if self.mu_values.is_empty() {
            return Err(Error::InvalidGrid("no mu values".into()));
        }
        for &mu in &self.mu_values {
            ChannelParams::new(0.0, mu)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub channel: ChannelKind,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub m_grid: Grid,
    pub n_grid: Grid,
}

impl SurfaceSpec {
    /// m, n ∈ [0, 0.999] in steps of 0.05.
    pub fn new(channel: ChannelKind, lambda: f64, mu: f64) -> Self {
        let g = Grid {
            start: 0.0,
            stop: MAX_SEARCH_STRENGTH,
            step: 0.05,
        };
        Self {
            channel,
            lambda,
            mu,
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            m_grid: g,
            n_grid: g,
        }
    }

    fn validate(&self) -> Result<()> {
        BellLikeParams::new(self.alpha)?;
        ChannelParams::new(self.lambda, self.mu)?;
        self.m_grid.check(0.0, MAX_SEARCH_STRENGTH)?;
        self.n_grid.check(0.0, MAX_SEARCH_STRENGTH)?;
        Ok(())
    }
}

/// One output record; `m`/`n` are `None` for the unprotected pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub channel: ChannelKind,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub m: Option<f64>,
    pub n: Option<f64>,
    pub chi: f64,
    pub entropy_avg: f64,
    pub entropy_state: f64,
    pub success_prob: f64,
}

/// Evaluates a single parameter point.
pub fn evaluate(
    channel: ChannelKind,
    alpha: f64,
    lambda: f64,
    mu: f64,
    strengths: Option<MeasurementStrengths>,
) -> Result<Row> {
    let params = ChannelParams::new(lambda, mu)?;
    let (chi, entropy_avg, entropy_state, success_prob) = match strengths {
        Some(s) => {
            let r = run_protocol(channel, params, s, alpha)?;
            (r.chi, r.entropy_avg, r.entropy_state, r.success_prob)
        }
        None => {
            let rho0 = bell_like_state(BellLikeParams::new(alpha)?);
            let out = build_channel(channel, params)?.apply(&rho0)?;
            let c = capacity(&out)?;
            (c.chi, c.entropy_avg, c.entropy_state, 1.0)
        }
    };
    Ok(Row {
        channel,
        alpha,
        lambda,
        mu,
        m: strengths.map(|s| s.m()),
        n: strengths.map(|s| s.n()),
        chi,
        entropy_avg,
        entropy_state,
        success_prob,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let lambdas = spec.lambda_grid.values();
    let cells: Vec<(f64, f64)> = spec
        .mu_values
        .iter()
        .flat_map(|&mu| lambdas.iter().map(move |&l| (mu, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(mu, lambda)| evaluate(spec.channel, spec.alpha, lambda, mu, spec.strengths))
        .collect()
}

pub fn run_surface(spec: &SurfaceSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let ms = spec.m_grid.values();
    let ns = spec.n_grid.values();
    let cells: Vec<(f64, f64)> = ms
        .iter()
        .flat_map(|&m| ns.iter().map(move |&n| (m, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(m, n)| {
            let s = MeasurementStrengths::new(m, n)?;
            evaluate(spec.channel, spec.alpha, spec.lambda, spec.mu, Some(s))
        })
        .collect()
}

/// Formats `x` with [`SIG_DIGITS`] significant digits in positional
/// notation, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.channel.tag().to_string(),
            format_sig(r.alpha),
            format_sig(r.lambda),
            format_sig(r.mu),
            opt(r.m),
            opt(r.n),
            format_sig(r.chi),
            format_sig(r.entropy_avg),
            format_sig(r.entropy_state),
            format_sig(r.success_prob),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV produced by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let header = r.headers().map_err(io)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(io)).collect()
}

pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[Row], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}
