//! Log-gamma and trigamma (polygamma of order 1) for positive reals.
//!
//! Both use the asymptotic Stirling-type series for `x >= 10` and upward
//! recurrence below that, so arguments up to ~1e12 and beyond stay exact to
//! double precision. Raw `Gamma` is never formed.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const ASYMPTOTIC_FROM: f64 = 10.0;

/// `0.5 * ln(2 pi)`.
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// `ln Gamma(1/2) = ln(sqrt(pi))`.
pub const LN_GAMMA_HALF: f64 = 0.572_364_942_924_700_087_071_713_675_677;

/// Stirling correction `sum B_2k / (2k (2k-1) x^(2k-1))` for `k = 1..=7`.
fn stirling_tail(x: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

/// `ln Gamma(x)` for `x > 0`; caller guarantees the domain.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= ASYMPTOTIC_FROM {
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_tail(x);
    }
    // Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1))
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < ASYMPTOTIC_FROM {
        product *= shifted;
        shifted += 1.0;
    }
    ln_gamma(shifted) - product.ln()
}

/// Trigamma `psi_1(x)` for `x > 0`; caller guarantees the domain.
pub(crate) fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shifted = x;
    let mut acc = 0.0;
    while shifted < ASYMPTOTIC_FROM {
        acc += 1.0 / (shifted * shifted);
        shifted += 1.0;
    }
    // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    const B: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let r = 1.0 / shifted;
    let r2 = r * r;
    let mut series = 0.0;
    for b in B.iter().rev() {
        series = series * r2 + b;
    }
    acc + r + 0.5 * r2 + series * r2 * r
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} requires a finite x > 0, got {x}"
        )))
    }
}

/// `ln Gamma(x)` for finite `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    Ok(ln_gamma(x))
}

/// The polygamma function of order 1, `d^2/dx^2 ln Gamma(x)`, for finite `x > 0`.
pub fn polygamma1(x: f64) -> Result<f64> {
    check_positive(x, "polygamma1")?;
    Ok(trigamma(x))
}

/// `psi_1(1/2) = pi^2 / 2`.
pub const TRIGAMMA_HALF: f64 = PI * PI / 2.0;
