//! Bit extraction from photon time tags by interarrival parity.
//!
//! Each interarrival time is reduced to the parity of its least significant
//! digit at a chosen resolution: `bit = floor(value / divisor) mod 2`, so
//! even values give 0 and odd values give 1. Because 10 is even, the parity
//! of the last decimal digit equals the parity of the integer itself.
//!
//! [`parity_bias_estimate`] quantifies the residual bias for a continuous
//! interarrival density sampled on a grid of `2L` equal bins.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitstream::{BitSequence, BitSequenceBuilder};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    S,
    Ms,
    Us,
    Ns,
    #[default]
    Ps,
    Fs,
    /// Dimensionless clock ticks.
    Ticks,
}

impl TimeUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
            TimeUnit::Ns => "ns",
            TimeUnit::Ps => "ps",
            TimeUnit::Fs => "fs",
            TimeUnit::Ticks => "ticks",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "s" => TimeUnit::S,
            "ms" => TimeUnit::Ms,
            "us" | "µs" | "μs" => TimeUnit::Us,
            "ns" => TimeUnit::Ns,
            "ps" => TimeUnit::Ps,
            "fs" => TimeUnit::Fs,
            "ticks" => TimeUnit::Ticks,
            other => return Err(Error::Domain(format!("unknown time unit '{other}'"))),
        })
    }
}

/// Whether a series holds absolute event times or already-differenced values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Timestamps,
    Interarrivals,
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "timestamps" => Ok(SeriesKind::Timestamps),
            "interarrivals" => Ok(SeriesKind::Interarrivals),
            other => Err(Error::Domain(format!("unknown series kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeTagSeries {
    pub values: Vec<u64>,
    pub unit: TimeUnit,
    pub kind: SeriesKind,
}

impl TimeTagSeries {
    /// Absolute event times; must be non-decreasing.
    pub fn timestamps(values: Vec<u64>, unit: TimeUnit) -> Result<Self> {
        check_monotone(&values)?;
        Ok(Self {
            values,
            unit,
            kind: SeriesKind::Timestamps,
        })
    }

    pub fn interarrivals(values: Vec<u64>, unit: TimeUnit) -> Self {
        Self {
            values,
            unit,
            kind: SeriesKind::Interarrivals,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_monotone(values: &[u64]) -> Result<()> {
    if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Data {
            index: k as u64 + 1,
            message: format!(
                "timestamp {} is earlier than its predecessor {}",
                values[k + 1],
                values[k]
            ),
        });
    }
    Ok(())
}

/// Differences of consecutive timestamps.
pub fn interarrivals(series: &TimeTagSeries) -> Result<TimeTagSeries> {
    if series.kind != SeriesKind::Timestamps {
        return Err(Error::Contract("series is already differenced".into()));
    }
    if series.values.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "{} timestamp(s) give no interarrival time",
            series.values.len()
        )));
    }
    check_monotone(&series.values)?;
    Ok(TimeTagSeries::interarrivals(
        series.values.windows(2).map(|w| w[1] - w[0]).collect(),
        series.unit,
    ))
}

/// `bit_k = floor(values[k] / divisor) mod 2`.
pub fn timetags_to_bits(series: &TimeTagSeries, divisor: u64) -> Result<BitSequence> {
    if divisor == 0 {
        return Err(Error::Contract("divisor must be positive".into()));
    }
    if series.kind != SeriesKind::Interarrivals {
        return Err(Error::Contract(
            "parity extraction needs interarrival times; difference the timestamps first".into(),
        ));
    }
    let mut builder = BitSequenceBuilder::with_capacity(series.values.len() as u64);
    for &v in &series.values {
        builder.push((v / divisor) % 2 == 1);
    }
    Ok(builder.finish())
}

/// Parses the text time-tag format: one unsigned integer per line, with
/// optional spaces between digit groups (`592 342`) and an optional trailing
/// unit token (`ps`). Blank lines are skipped. When `expected_unit` is given,
/// unit tokens must match it.
pub fn parse_timetags_text(data: &[u8], expected_unit: Option<TimeUnit>) -> Result<Vec<u64>> {
    let mut values = Vec::new();
    for (idx, raw) in data.split(|&b| b == b'\n').enumerate() {
        let line_no = idx as u64 + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = std::str::from_utf8(raw).map_err(|_| err("line is not valid UTF-8".into()))?;
        let mut tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let last = tokens[tokens.len() - 1];
        if !last.starts_with(|c: char| c.is_ascii_digit()) {
            let unit: TimeUnit = last
                .parse()
                .map_err(|_| err(format!("unrecognised token '{last}'")))?;
            if let Some(expected) = expected_unit {
                if unit != expected {
                    return Err(err(format!(
                        "unit '{unit}' does not match expected '{expected}'"
                    )));
                }
            }
            tokens.pop();
        }
        if tokens.is_empty() {
            return Err(err("unit without a value".into()));
        }
        let mut value: u64 = 0;
        for tok in tokens {
            for c in tok.chars() {
                let d = c
                    .to_digit(10)
                    .ok_or_else(|| err(format!("unexpected character '{c}'")))?;
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(u64::from(d)))
                    .ok_or_else(|| err("value exceeds 64 bits".into()))?;
            }
        }
        values.push(value);
    }
    Ok(values)
}

/// Parses the binary time-tag format: little-endian `u64` values.
pub fn parse_timetags_binary(data: &[u8]) -> Result<Vec<u64>> {
    if data.len() % 8 != 0 {
        return Err(Error::Format {
            offset: (data.len() - data.len() % 8) as u64,
            message: format!(
                "{} trailing bytes do not form a 64-bit value",
                data.len() % 8
            ),
        });
    }
    Ok(data
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_timetags_text<W: Write>(
    w: &mut W,
    values: &[u64],
    unit: Option<TimeUnit>,
) -> std::io::Result<()> {
    for v in values {
        match unit {
            Some(u) => writeln!(w, "{v} {u}")?,
            None => writeln!(w, "{v}")?,
        }
    }
    Ok(())
}

pub fn write_timetags_binary<W: Write>(w: &mut W, values: &[u64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability density on `(a, b)` with an optional derivative.
pub struct DensitySpec {
    a: f64,
    b: f64,
    density: RealFn,
    derivative: Option<RealFn>,
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySpec")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

impl DensitySpec {
    /// Wraps `density` on `(a, b)`; its integral must be 1 within 1e-8.
    pub fn new<F>(a: f64, b: f64, density: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid support ({a}, {b})")));
        }
        let mass = integrate(&density, a, b, 1e-13, 1e-12)?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::Domain(format!(
                "density integrates to {mass}, not 1"
            )));
        }
        Ok(Self {
            a,
            b,
            density: Box::new(density),
            derivative: None,
        })
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Box::new(derivative));
        self
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let height = 1.0 / (b - a);
        Ok(Self::new(a, b, move |_| height)?.with_derivative(|_| 0.0))
    }

    /// `rate * exp(-rate x)` restricted to `(a, b)` and renormalised.
    pub fn truncated_exponential(rate: f64, a: f64, b: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        let z = (-rate * a).exp() - (-rate * b).exp();
        let density = move |x: f64| rate * (-rate * x).exp() / z;
        let derivative = move |x: f64| -rate * rate * (-rate * x).exp() / z;
        Ok(Self::new(a, b, density)?.with_derivative(derivative))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// The supplied derivative, or a central difference with step
    /// `(b - a) 1e-6` (one-sided at the support edges).
    pub fn derivative(&self, x: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(x);
        }
        let h = (self.b - self.a) * 1e-6;
        if x - h < self.a {
            (self.density(x + h) - self.density(x)) / h
        } else if x + h > self.b {
            (self.density(x) - self.density(x - h)) / h
        } else {
            (self.density(x + h) - self.density(x - h)) / (2.0 * h)
        }
    }
}

/// Odd-parity mass for a density split into `2L` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityBias {
    /// `sum_i integral over [x_{2i+1}, x_{2i+2}]` by adaptive quadrature.
    pub exact_odd: f64,
    /// `1/2 + 1/2 sum_i rho'(x_{2i}) ((b - a) / 2L)^2`.
    pub approx_odd: f64,
}

impl ParityBias {
    pub fn exact_even(&self) -> f64 {
        1.0 - self.exact_odd
    }

    pub fn approximation_gap(&self) -> f64 {
        (self.exact_odd - self.approx_odd).abs()
    }
}

/// Grid point `x_i = a + i (b - a) / 2L`.
fn grid(a: f64, b: f64, half_bins: u32, i: u32) -> f64 {
    a + f64::from(i) * (b - a) / (2.0 * f64::from(half_bins))
}

/// Exact and first-order odd-parity probabilities on a grid of `2L` bins.
pub fn parity_bias_estimate(density: &DensitySpec, half_bins: u32) -> Result<ParityBias> {
    if half_bins == 0 {
        return Err(Error::Domain(
            "need at least one pair of bins (L >= 1)".into(),
        ));
    }
    let (a, b) = density.support();
    let width = (b - a) / (2.0 * f64::from(half_bins));
    let mut exact_odd = 0.0;
    let mut slope_sum = 0.0;
    for i in 0..half_bins {
        let lo = grid(a, b, half_bins, 2 * i + 1);
        let hi = grid(a, b, half_bins, 2 * i + 2);
        exact_odd += integrate(|x| density.density(x), lo, hi, 1e-16, 1e-13)?;
        slope_sum += density.derivative(grid(a, b, half_bins, 2 * i));
    }
    Ok(ParityBias {
        exact_odd,
        approx_odd: 0.5 + 0.5 * slope_sum * width * width,
    })
}

/// Mass of the even bins, integrated directly rather than as `1 - odd`.
pub fn even_mass(density: &DensitySpec, half_bins: u32) -> Result<f64> {
    if half_bins == 0 {
        return Err(Error::Domain(
            "need at least one pair of bins (L >= 1)".into(),
        ));
    }
    let (a, b) = density.support();
    (0..half_bins).try_fold(0.0, |acc, i| {
        let lo = grid(a, b, half_bins, 2 * i);
        let hi = grid(a, b, half_bins, 2 * i + 1);
        Ok(acc + integrate(|x| density.density(x), lo, hi, 1e-16, 1e-13)?)
    })
}
