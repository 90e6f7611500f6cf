//! Limiting (n → ∞) distribution of the number of cycles with normalized
//! length in [γ, δ].
//!
//! The r-th limiting falling moment is the sliced-cube integral
//!
//! ```text
//! q_r(γ, δ) = ∫_{[γ,δ]^r ∩ {z₁+…+z_r ≤ 1}} dz / (z₁⋯z_r),
//! ```
//!
//! and the limiting pmf on {0, …, ⌊1/γ⌋} follows by inverting the moments.
//! The integral is evaluated level by level: with `I_m(s)` the m-fold
//! integral over `Σ z_i ≤ s`,
//!
//! ```text
//! I_m(s) = ∫_γ^{min(δ, s−(m−1)γ)} I_{m−1}(s − z) dz / z,   I_1(s) = ln(min(δ, s)/γ).
//! ```
//!
//! Each `I_m` is smooth between the kinks `s = jγ + (m−j)δ`, so it is
//! tabulated once per call as a piecewise Chebyshev interpolant and the next
//! level integrates that interpolant with panels split at the kinks.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::chebyshev::PiecewiseCheb;
use crate::error::{domain, Result};
use crate::exact_finite::{normalized_window, IntWindow};
use crate::quadrature::{integrate, integrate_with_breaks, Estimate, QuadratureConfig};
use crate::quasi_poisson::{pmf_from_falling_moments, MomentVector, Pmf};
use crate::special_fn::dilog;

/// Normalized cycle-length window with `0 < γ < δ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    gamma: f64,
    delta: f64,
}

impl Interval {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < delta && delta <= 1.0) {
            return domain(format!("interval needs 0 < γ < δ ≤ 1, got ({gamma}, {delta})"));
        }
        Ok(Self { gamma, delta })
    }

    /// The window `(α, 1)`: cycles of normalized length at least α.
    pub fn tail(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ln(δ/γ)`, the limiting mean.
    pub fn log_ratio(&self) -> f64 {
        (self.delta / self.gamma).ln()
    }

    /// Support bound ⌊1/γ⌋ of the limiting distribution.
    pub fn support_bound(&self) -> usize {
        let inv = 1.0 / self.gamma;
        let r = inv.round();
        if (inv - r).abs() <= 1e-12 * inv {
            r as usize
        } else {
            inv.floor() as usize
        }
    }

    /// Integer window `[⌈γn⌉, ⌊δn⌋]`, `None` if empty.
    pub fn window(&self, n: u64) -> Option<IntWindow> {
        normalized_window(n, self.gamma, self.delta)
    }
}

/// One tabulated level `I_m` of the nested reduction.
struct Level {
    /// Below `m·γ` the region is empty.
    start: f64,
    /// From `m·δ` on the half-space constraint is inactive.
    full_from: f64,
    full_value: f64,
    table: PiecewiseCheb,
    /// Accumulated error bound of this level and everything below it.
    error: f64,
}

/// Per-call evaluator for `I_m(s)` with `s ≤ c − γ` for all `m < top`.
struct SlicedCube {
    gamma: f64,
    delta: f64,
    log_ratio: f64,
    cfg: QuadratureConfig,
    levels: Vec<Level>,
}

impl SlicedCube {
    /// Tabulates levels `2..=max_level` on `[mγ, min(mδ, c − γ)]`.
    fn build(iv: &Interval, c: f64, max_level: usize, cfg: &QuadratureConfig) -> Result<Self> {
        let mut engine = SlicedCube {
            gamma: iv.gamma,
            delta: iv.delta,
            log_ratio: iv.log_ratio(),
            cfg: *cfg,
            levels: Vec::new(),
        };
        let node_cfg = cfg.with_abs_tol(0.1 * cfg.abs_tol);
        for m in 2..=max_level {
            let mf = m as f64;
            let start = mf * engine.gamma;
            let full_from = mf * engine.delta;
            let end = full_from.min(c - engine.gamma);
            let breaks: Vec<f64> = if end > start {
                let mut b = vec![start];
                b.extend(
                    kinks(m, engine.gamma, engine.delta)
                        .into_iter()
                        .filter(|&k| k > start && k < end),
                );
                b.push(end);
                b
            } else {
                Vec::new()
            };
            let table = PiecewiseCheb::fit(
                |s| Ok(engine.integrate_level(m, s, &node_cfg)?.value),
                &breaks,
                cfg.abs_tol,
            )?;
            let below = engine.levels.last().map_or(0.0, |l| l.error);
            let error = table.tail() + node_cfg.abs_tol + below * engine.log_ratio;
            engine.levels.push(Level {
                start,
                full_from,
                full_value: engine.log_ratio.powi(m as i32),
                table,
                error,
            });
        }
        Ok(engine)
    }

    fn value(&self, m: usize, s: f64) -> f64 {
        match m {
            0 => {
                if s >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            1 => {
                if s <= self.gamma {
                    0.0
                } else {
                    (s.min(self.delta) / self.gamma).ln()
                }
            }
            _ => {
                let level = &self.levels[m - 2];
                if s <= level.start {
                    0.0
                } else if s >= level.full_from {
                    level.full_value
                } else {
                    level.table.eval(s)
                }
            }
        }
    }

    fn level_error(&self, m: usize) -> f64 {
        if m < 2 {
            0.0
        } else {
            self.levels[m - 2].error
        }
    }

    /// `I_m(s)` by one quadrature over the tabulated `I_{m−1}`.
    fn integrate_level(&self, m: usize, s: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let lo = self.gamma;
        let hi = self.delta.min(s - (m - 1) as f64 * self.gamma);
        if hi <= lo {
            return Ok(Estimate::ZERO);
        }
        let mut points = vec![lo];
        let mut inner: Vec<f64> = kinks(m - 1, self.gamma, self.delta)
            .into_iter()
            .map(|k| s - k)
            .filter(|&z| z > lo && z < hi)
            .collect();
        inner.sort_by(f64::total_cmp);
        points.extend(inner);
        points.push(hi);
        integrate_with_breaks(|z| Ok(self.value(m - 1, s - z) / z), &points, cfg)
    }

    fn top(&self, r: usize, c: f64) -> Result<Estimate> {
        match r {
            0 => Ok(Estimate::exact(1.0)),
            1 => Ok(Estimate::exact(self.value(1, c))),
            _ => {
                let est = self.integrate_level(r, c, &self.cfg)?;
                Ok(Estimate {
                    value: est.value,
                    error: est.error + self.level_error(r - 1) * self.log_ratio,
                })
            }
        }
    }
}

/// Kinks of `I_m`: the sums `jγ + (m−j)δ`, `j = 0..=m`.
fn kinks(m: usize, gamma: f64, delta: f64) -> Vec<f64> {
    (0..=m).map(|j| j as f64 * gamma + (m - j) as f64 * delta).collect()
}

/// `∫_{[γ,δ]^r ∩ {Σ z_i ≤ c}} dz / (z₁⋯z_r)`.
///
/// Exactly 1 for `r = 0`, exactly 0 once `r·γ ≥ c` (empty or null region).
/// The error estimate sums the outer quadrature estimate and the
/// interpolation and quadrature budgets of the tabulated inner levels.
pub fn sliced_cube_integral(r: usize, iv: &Interval, c: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    cfg.validate()?;
    if !(c >= 0.0 && c.is_finite()) {
        return domain(format!("slice level c must be finite and ≥ 0, got {c}"));
    }
    if r == 0 {
        return Ok(Estimate::exact(1.0));
    }
    if r as f64 * iv.gamma >= c {
        return Ok(Estimate::ZERO);
    }
    SlicedCube::build(iv, c, r - 1, cfg)?.top(r, c)
}

/// Limiting falling moment `lim E((X^{(n)})_r)`.
pub fn q_limit(r: usize, iv: &Interval, cfg: &QuadratureConfig) -> Result<Estimate> {
    sliced_cube_integral(r, iv, 1.0, cfg)
}

/// All limiting falling moments `q_0, …, q_r`, sharing one set of tables.
pub fn limit_moments(r: usize, iv: &Interval, cfg: &QuadratureConfig) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    let max_level = (1..=r).filter(|&k| (k as f64) * iv.gamma < 1.0).max().unwrap_or(0);
    let engine = SlicedCube::build(iv, 1.0, max_level.saturating_sub(1), cfg)?;
    (0..=r)
        .map(|k| {
            if k > 0 && k as f64 * iv.gamma >= 1.0 {
                Ok(Estimate::ZERO)
            } else {
                engine.top(k, 1.0)
            }
        })
        .collect()
}

/// Closed form of `q₂(γ, δ)` for `1/3 ≤ γ ≤ 1/2 ≤ δ ≤ 1`, with the standard
/// dilogarithm.
///
/// Triangle case (`γ + δ ≥ 1`):
/// `q₂ = Li₂(γ) − Li₂(1−γ) − ln γ · ln(1−γ) + (ln γ)²`.
///
/// Otherwise the strip `x ∈ [γ, 1−δ]` contributes the full product
/// `ln((1−δ)/γ) · ln(δ/γ)` and `x ∈ [1−δ, δ]` contributes
/// `Li₂(1−δ) − Li₂(δ) − ln γ · ln(δ/(1−δ))`.
pub fn q2_closed_form(iv: &Interval) -> Result<f64> {
    let (g, d) = (iv.gamma, iv.delta);
    if !((1.0 / 3.0..=0.5).contains(&g) && 0.5 <= d) {
        return domain(format!("q2 closed form needs 1/3 ≤ γ ≤ 1/2 ≤ δ ≤ 1, got ({g}, {d})"));
    }
    if g + d >= 1.0 {
        let lg = g.ln();
        Ok(dilog(g)? - dilog(1.0 - g)? - lg * (1.0 - g).ln() + lg * lg)
    } else {
        let e = 1.0 - d;
        let strip = (e / g).ln() * (d / g).ln();
        let band = dilog(e)? - dilog(d)? - g.ln() * (d / e).ln();
        Ok(strip + band)
    }
}

/// `Q_k(γ) = q_k(γ, 1)` from the one-dimensional recurrence
///
/// ```text
/// Q_{k+1}(γ) = ∫_γ^{1−kγ} Q_k(γ/(1−z)) dz / z   for γ < 1/(k+1), else 0,
/// ```
///
/// with `Q₀ = 1` and `Q₁ = −ln γ`. Lower-level values are memoized per call.
pub fn q_recurrence(k: usize, gamma: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    cfg.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("Q recurrence needs 0 < γ < 1, got {gamma}"));
    }
    let memo = RefCell::new(HashMap::new());
    recurrence_level(k, gamma, cfg, &memo)
}

type Memo = RefCell<HashMap<(usize, u64), f64>>;

fn recurrence_level(k: usize, x: f64, cfg: &QuadratureConfig, memo: &Memo) -> Result<Estimate> {
    if k == 0 {
        return Ok(Estimate::exact(1.0));
    }
    if k as f64 * x >= 1.0 {
        return Ok(Estimate::ZERO);
    }
    if k == 1 {
        return Ok(Estimate::exact(-x.ln()));
    }
    if let Some(&v) = memo.borrow().get(&(k, x.to_bits())) {
        return Ok(Estimate::exact(v));
    }
    let upper = 1.0 - (k - 1) as f64 * x;
    let est = integrate(
        |z| Ok(recurrence_level(k - 1, x / (1.0 - z), cfg, memo)?.value / z),
        x,
        upper,
        cfg,
    )?;
    memo.borrow_mut().insert((k, x.to_bits()), est.value);
    Ok(est)
}

/// Limiting pmf of the number of cycles with normalized length in `iv`,
/// supported on {0, …, ⌊1/γ⌋}.
pub fn p_limit(iv: &Interval, cfg: &QuadratureConfig) -> Result<Pmf> {
    let moments = limit_moments(iv.support_bound(), iv, cfg)?;
    let q = MomentVector::new(moments.iter().map(|e| e.value).collect())?;
    pmf_from_falling_moments(&q)
}

fn open_interval_check(gamma: f64, lo: f64, hi: f64, what: &str) -> Result<()> {
    if !(gamma > lo && gamma < hi) {
        return domain(format!("{what} needs {lo} < γ < {hi}, got {gamma}"));
    }
    Ok(())
}

/// `P₁′(γ) = −1/γ + 2 ln(1−γ)/γ − 2 ln γ/γ` on (1/3, 1/2), where
/// `P₁ = Q₁ − Q₂` with both moments from the sliced-cube integral.
pub fn p1_derivative(gamma: f64) -> Result<f64> {
    open_interval_check(gamma, 1.0 / 3.0, 0.5, "P1 derivative")?;
    Ok((-1.0 + 2.0 * (1.0 - gamma).ln() - 2.0 * gamma.ln()) / gamma)
}

fn p1_second_derivative(gamma: f64) -> f64 {
    let g = gamma;
    let numerator = -1.0 + 2.0 * (1.0 - g).ln() - 2.0 * g.ln();
    let d_numerator = -2.0 / (1.0 - g) - 2.0 / g;
    (d_numerator * g - numerator) / (g * g)
}

/// The maximizer γ₀ of `P₁(γ)`: root of [`p1_derivative`] on (1/3, 1/2) by
/// Newton's method safeguarded with bisection.
pub fn gamma_star() -> f64 {
    // P₁′ > 0 at 1/3 and < 0 at 1/2.
    let (mut lo, mut hi) = (1.0 / 3.0, 0.5);
    let f = |g: f64| (-1.0 + 2.0 * (1.0 - g).ln() - 2.0 * g.ln()) / g;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / p1_second_derivative(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// Abscissa tolerance of [`argmax_p`].
pub const ARGMAX_TOL: f64 = 1e-7;

/// Golden-section search for the γ in `[lo, hi]` maximizing the limiting
/// probability `P_i(γ) = p_limit((γ, 1))[i]`.
///
/// Assumes `P_i` is unimodal on the bracket; this is not checked, so the
/// answer is a numerical exploration rather than a certified maximum.
pub fn argmax_p(i: usize, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(lo > 0.0 && lo < hi && hi <= 1.0) {
        return domain(format!("argmax bracket needs 0 < lo < hi ≤ 1, got [{lo}, {hi}]"));
    }
    if i > Interval::tail(lo)?.support_bound() {
        return domain(format!("P_{i} vanishes identically on [{lo}, {hi}]"));
    }
    let objective = |g: f64| -> Result<f64> { Ok(p_limit(&Interval::tail(g)?, cfg)?.prob(i)) };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > ARGMAX_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Smallest absolute tolerance [`small_simplex_ratio`] asks of the quadrature.
pub const SIMPLEX_ABS_FLOOR: f64 = 5e-14;

/// `Q_k(γ) / (1 − kγ)^k` for `0 < γ < 1/k`.
///
/// The region of `Q_k` is a right simplex of volume `(1−kγ)^k / k!` on
/// which the integrand ranges between `k^k` (face centre) and `γ^{−k}`
/// (vertex), so the ratio lies in `[k^k/k!, γ^{−k}/k!]` and tends to
/// `k^k/k!` as γ → 1/k. The absolute tolerance is scaled by `(1−kγ)^k` so
/// the ratio keeps its accuracy near the vertex, but never below
/// [`SIMPLEX_ABS_FLOOR`]: the inner tables span values of order one and
/// cannot be made more accurate than a few ulps of that. Close to the vertex
/// the ratio is therefore only good to about `SIMPLEX_ABS_FLOOR / (1−kγ)^k`.
pub fn small_simplex_ratio(k: usize, gamma: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if k < 1 {
        return domain("small-simplex ratio needs k ≥ 1");
    }
    let kf = k as f64;
    open_interval_check(gamma, 0.0, 1.0 / kf, "small-simplex ratio")?;
    let volume = (1.0 - kf * gamma).powi(k as i32);
    let scaled = cfg.with_abs_tol((cfg.abs_tol * volume).max(SIMPLEX_ABS_FLOOR).min(cfg.abs_tol));
    let q = q_limit(k, &Interval::tail(gamma)?, &scaled)?;
    Ok(q.value / volume)
}

/// Conjectured limiting mean under the Ewens(σ) measure,
/// `∫_γ^δ x^{−1} (1−x)^{σ−1} dx`.
///
/// For σ < 1 the factor `(1−x)^{σ−1}` blows up at x = 1; the substitution
/// `u = (1−x)^σ` turns the integral into `(1/σ) ∫ du / (1 − u^{1/σ})`, which
/// is bounded.
pub fn ewens_lambda(iv: &Interval, sigma: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Ewens parameter σ must be positive, got {sigma}"));
    }
    let (g, d) = (iv.gamma, iv.delta);
    if sigma >= 1.0 {
        return integrate(|x| Ok((1.0 - x).powf(sigma - 1.0) / x), g, d, cfg);
    }
    let inv = 1.0 / sigma;
    integrate(
        |u| Ok(inv / (1.0 - u.powf(inv))),
        (1.0 - d).powf(sigma),
        (1.0 - g).powf(sigma),
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(0.0, 0.5).is_err());
        assert!(Interval::new(0.5, 0.5).is_err());
        assert!(Interval::new(0.5, 1.1).is_err());
        let iv = Interval::new(1.0 / 3.0, 0.5).unwrap();
        assert_eq!(iv.support_bound(), 3);
        assert_eq!(Interval::new(0.25, 1.0 / 3.0).unwrap().support_bound(), 4);
        assert_eq!(Interval::new(0.3775, 1.0).unwrap().support_bound(), 2);
    }

    #[test]
    fn sliced_cube_examples() {
        let box_iv = Interval::new(0.25, 1.0 / 3.0).unwrap();
        let v = sliced_cube_integral(2, &box_iv, 1.0, &cfg()).unwrap().value;
        assert!((v - (4.0f64 / 3.0).ln().powi(2)).abs() < 1e-12);
        let tri = Interval::new(0.4, 1.0).unwrap();
        assert_eq!(sliced_cube_integral(3, &tri, 1.0, &cfg()).unwrap().value, 0.0);
        // Frozen from a 2-D reference quadrature (mpmath, 30 digits).
        let v = sliced_cube_integral(2, &tri, 1.0, &cfg()).unwrap().value;
        assert!((v - 0.093_220_587_412_811_62).abs() < 1e-11);
        assert_eq!(sliced_cube_integral(0, &tri, 0.0, &cfg()).unwrap().value, 1.0);
        assert!(sliced_cube_integral(2, &tri, -1.0, &cfg()).is_err());
    }

    #[test]
    fn q_limit_examples() {
        let iv = Interval::new(0.3, 0.8).unwrap();
        assert!((q_limit(1, &iv, &cfg()).unwrap().value - (0.8f64 / 0.3).ln()).abs() < 1e-15);
        assert_eq!(q_limit(0, &iv, &cfg()).unwrap().value, 1.0);
        // [1/3, 1/2]² lies inside x + y ≤ 1: the integral factors.
        let iv = Interval::new(1.0 / 3.0, 0.5).unwrap();
        let v = q_limit(2, &iv, &cfg()).unwrap().value;
        assert!((v - 0.164_401_953_893_165_43).abs() < 1e-11);
    }

    #[test]
    fn q2_closed_form_examples() {
        let v = q2_closed_form(&Interval::new(0.4, 1.0).unwrap()).unwrap();
        assert!((v - 0.093_220_587_412_811_62).abs() < 1e-13);
        let v = q2_closed_form(&Interval::new(0.5, 1.0).unwrap()).unwrap();
        assert!(v.abs() < 1e-15);
        let g0 = 1.0 / (1.0 + 0.5f64.exp());
        let v = q2_closed_form(&Interval::new(g0, 1.0).unwrap()).unwrap();
        assert!((v - 0.145_577_477_321_642_75).abs() < 1e-13);
        assert!((v / 2.0 - 0.0728).abs() < 1e-4);
        assert!(q2_closed_form(&Interval::new(0.3, 1.0).unwrap()).is_err());
        assert!(q2_closed_form(&Interval::new(0.35, 0.45).unwrap()).is_err());
    }

    #[test]
    fn recurrence_examples() {
        assert!((q_recurrence(1, 0.5, &cfg()).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(q_recurrence(3, 0.4, &cfg()).unwrap().value, 0.0);
        let v = q_recurrence(2, 0.4, &cfg()).unwrap().value;
        assert!((v - 0.093_220_587_412_811_62).abs() < 1e-11);
        assert!(q_recurrence(2, 1.0, &cfg()).is_err());
    }

    #[test]
    fn p_limit_examples() {
        let lambda = (4.0f64 / 3.0).ln();
        let p = p_limit(&Interval::new(0.25, 1.0 / 3.0).unwrap(), &cfg()).unwrap();
        let qp = crate::quasi_poisson::qp_pmf(3, lambda).unwrap();
        for i in 0..4 {
            assert!((p.prob(i) - qp.prob(i)).abs() < 1e-10, "i = {i}");
        }
        assert!(p.prob(4) < 1e-12);

        let p = p_limit(&Interval::tail(0.6).unwrap(), &cfg()).unwrap();
        assert_eq!(p.support_bound(), 1);
        assert!((p.prob(1) + 0.6f64.ln()).abs() < 1e-15);
        assert!((p.prob(0) - (1.0 + 0.6f64.ln())).abs() < 1e-15);

        let p = p_limit(&Interval::tail(gamma_star()).unwrap(), &cfg()).unwrap();
        assert!((p.prob(0) - 0.0987).abs() < 1e-4);
        assert!((p.prob(1) - 0.8285).abs() < 1e-4);
        assert!((p.prob(2) - 0.0728).abs() < 1e-4);
    }

    #[test]
    fn derivative_and_gamma_star() {
        let g0 = 1.0 / (1.0 + 0.5f64.exp());
        assert!(p1_derivative(g0).unwrap().abs() < 1e-12);
        assert!((p1_derivative(0.4).unwrap() - 2.5 * (-1.0 + 2.0 * 1.5f64.ln())).abs() < 1e-14);
        assert!((p1_derivative(0.4).unwrap() + 0.4727).abs() < 1e-4);
        assert!(p1_derivative(0.3).is_err());
        assert!(p1_derivative(0.5).is_err());

        let gs = gamma_star();
        assert!((gs - g0).abs() < 1e-12);
        assert!((gs - 0.377_540_669).abs() < 1e-9);
        assert!(gs > (-1.0f64).exp());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        let p1 = |g: f64| {
            let iv = Interval::tail(g).unwrap();
            q_limit(1, &iv, &cfg()).unwrap().value - q_limit(2, &iv, &cfg()).unwrap().value
        };
        let fd = (p1(0.45 + h) - p1(0.45 - h)) / (2.0 * h);
        assert!((fd - p1_derivative(0.45).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn small_simplex_examples() {
        for &g in &[0.1, 0.3, 0.7] {
            let r = small_simplex_ratio(1, g, &cfg()).unwrap();
            assert!((r - (-g.ln() / (1.0 - g))).abs() < 1e-14);
            assert!((1.0..=1.0 / g).contains(&r));
        }
        let r = small_simplex_ratio(2, 0.4999, &cfg()).unwrap();
        assert!((r - 2.0).abs() < 1e-3);
        let r = small_simplex_ratio(2, 0.35, &cfg()).unwrap();
        assert!((r - 2.560_047_872_887_373).abs() < 1e-8);
        assert!((2.0..=0.35f64.powi(-2) / 2.0).contains(&r));
        assert!(small_simplex_ratio(2, 0.5, &cfg()).is_err());
    }

    #[test]
    fn ewens_examples() {
        let iv = Interval::new(0.2, 0.7).unwrap();
        let v = ewens_lambda(&iv, 1.0, &cfg()).unwrap().value;
        assert!((v - iv.log_ratio()).abs() < 1e-13);
        let v = ewens_lambda(&Interval::new(0.25, 0.5).unwrap(), 2.0, &cfg())
            .unwrap()
            .value;
        assert!((v - (2f64.ln() - 0.25)).abs() < 1e-13);
        let v = ewens_lambda(&Interval::tail(0.5).unwrap(), 0.5, &cfg()).unwrap().value;
        assert!((v - 1.762_747_174_039_086).abs() < 1e-10);
        assert!(ewens_lambda(&iv, 0.0, &cfg()).is_err());
    }

    #[test]
    fn argmax_examples() {
        let g = argmax_p(1, 1.0 / 3.0, 0.5, &cfg()).unwrap();
        assert!((g - 0.377_540_7).abs() < 5e-7, "{g}");
        let g = argmax_p(0, 0.5, 1.0, &cfg()).unwrap();
        assert!((g - 1.0).abs() < 1e-6);
        assert!(argmax_p(3, 0.4, 0.5, &cfg()).is_err());
        assert!(argmax_p(0, 0.5, 0.4, &cfg()).is_err());
    }
}
