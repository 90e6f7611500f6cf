//! One-dimensional adaptive quadrature.
//!
//! Global adaptive bisection: the panel with the largest error estimate is
//! split until the summed estimate meets `max(abs_tol, rel_tol * |I|)`.
//! Integrands are fallible so that nested integrals can propagate failures
//! from inner levels.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Kronrod abscissae on [-1, 1], largest first; odd indices are the
/// 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Hard cap on the number of live panels in one integration.
const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelRule {
    AdaptiveSimpson,
    GaussKronrod15,
}

/// Tolerances and depth limits shared by every numerical integration in the
/// crate. Nested integrals apply `abs_tol` at each nesting level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub rule: PanelRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 0.0,
            max_depth: 40,
            rule: PanelRule::GaussKronrod15,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return domain(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol.is_finite()) {
            return domain(format!("rel_tol must be nonnegative, got {}", self.rel_tol));
        }
        if !(4..=60).contains(&self.max_depth) {
            return domain(format!("max_depth must lie in [4, 60], got {}", self.max_depth));
        }
        Ok(())
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }
}

/// An integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

/// Integrates `f` over `[a, b]`. Returns zero for an empty or reversed range.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from one panel
/// per consecutive pair so that no panel straddles a listed kink.
/// `points` must be nondecreasing; zero-width pieces are skipped.
pub fn integrate_with_breaks<F>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if points.len() < 2 || points[points.len() - 1] <= points[0] {
        return Ok(Estimate::ZERO);
    }
    if points.iter().any(|p| !p.is_finite()) {
        return domain("non-finite integration limit");
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return domain("integration breakpoints must be nondecreasing");
    }

    let mut panels = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(evaluate_panel(&mut f, w[0], w[1], 0, cfg.rule)?);
        }
    }

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }

        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= cfg.max_depth || panels.len() >= MAX_PANELS || mid <= p.a || mid >= p.b {
            return Err(Error::ToleranceNotMet {
                achieved: error,
                requested: target,
            });
        }
        panels[worst] = evaluate_panel(&mut f, p.a, mid, p.depth + 1, cfg.rule)?;
        panels.push(evaluate_panel(&mut f, mid, p.b, p.depth + 1, cfg.rule)?);
    }
}

fn evaluate_panel<F>(f: &mut F, a: f64, b: f64, depth: u32, rule: PanelRule) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (value, error) = match rule {
        PanelRule::GaussKronrod15 => gauss_kronrod15(f, a, b)?,
        PanelRule::AdaptiveSimpson => simpson_pair(f, a, b)?,
    };
    if !value.is_finite() {
        return domain(format!("integrand is not finite on [{a}, {b}]"));
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        depth,
    })
}

/// QUADPACK's 15-point Kronrod rule with the embedded 7-point Gauss rule as
/// error estimate, rescaled as in `qk15`.
fn gauss_kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Simpson on the whole panel against Simpson on its halves, with the
/// Richardson-corrected value.
fn simpson_pair<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = b - a;
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let fl = f(0.5 * (a + m))?;
    let fr = f(0.5 * (m + b))?;
    let whole = h / 6.0 * (fa + 4.0 * fm + fb);
    let halves = h / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
    let diff = halves - whole;
    let floor = 50.0 * f64::EPSILON * h.abs() * (fa.abs() + fm.abs() + fb.abs()) / 3.0;
    Ok((halves + diff / 15.0, (diff.abs() / 15.0).max(floor)))
}
