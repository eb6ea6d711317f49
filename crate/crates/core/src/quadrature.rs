//! Adaptive Gauss–Kronrod (7/15-point) quadrature on finite intervals.

// Node and weight tables carry their published digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    est: f64,
    err: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let (est, err) = gk15(f, lo, hi);
    if !est.is_finite() {
        return Err(Error::Numeric(format!(
            "integrand not finite on [{lo}, {hi}]"
        )));
    }
    Ok(Panel { lo, hi, est, err })
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Integrates `f` over `[a, b]` to within `max(abs_tol, rel_tol * |I|)`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance. Fails with a numeric error when the
/// integrand is not finite or the panel budget is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite integration limits [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![panel(&f, a, b)?];
    loop {
        let total = neumaier_sum(panels.iter().map(|p| p.est));
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Numeric(format!(
                "quadrature did not converge on [{a}, {b}] (error estimate {err:e})"
            )));
        }
        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(wi, we), (i, p)| {
                    if p.err > we {
                        (i, p.err)
                    } else {
                        (wi, we)
                    }
                });
        let Panel { lo, hi, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(Error::Numeric(format!(
                "interval [{lo}, {hi}] cannot be bisected further"
            )));
        }
        panels.push(panel(&f, lo, mid)?);
        panels.push(panel(&f, mid, hi)?);
    }
}
