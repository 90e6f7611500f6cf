//! Dilogarithm on [0, 1] and the Buchstab function.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebyshev::PiecewiseCheb;
use crate::error::{domain, Result};

/// Closed real interval used to describe argument domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RealInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return domain(format!("invalid real interval [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

pub const DILOG_DOMAIN: RealInterval = RealInterval { lo: 0.0, hi: 1.0 };

const PI2_6: f64 = PI * PI / 6.0;

/// `Li₂(x) = Σ_{k≥1} x^k / k²` for `0 ≤ x ≤ 1`.
///
/// The power series is summed directly for `x ≤ 1/2`; larger arguments go
/// through the reflection `Li₂(x) = π²/6 − ln x · ln(1−x) − Li₂(1−x)`.
pub fn dilog(x: f64) -> Result<f64> {
    if !DILOG_DOMAIN.contains(x) {
        return domain(format!("dilog argument {x} outside [0, 1]"));
    }
    if x == 1.0 {
        return Ok(PI2_6);
    }
    if x <= 0.5 {
        return Ok(dilog_series(x));
    }
    let y = 1.0 - x;
    Ok(PI2_6 - x.ln() * y.ln() - dilog_series(y))
}

fn dilog_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    // For x ≤ 1/2 the terms fall below 2^-k / k², so 60 terms exhaust f64.
    for k in 1..=60u32 {
        power *= x;
        let term = power / f64::from(k * k);
        if term < 1e-18 * sum {
            break;
        }
        sum += term;
    }
    sum
}

/// Tabulated Buchstab function.
///
/// `ω(u) = 1/u` on [1, 2] and `u·ω(u) = 1 + ∫₁^{u−1} ω(t) dt` beyond, which
/// is continuous at `u = 2`. The table holds one Chebyshev interpolant per
/// unit interval (ω has derivative jumps at the integers) and is extended
/// lazily: building `[k, k+1]` only needs integrals over `[1, k]`.
#[derive(Debug, Clone)]
pub struct Buchstab {
    table: PiecewiseCheb,
    upper: u32,
}

const BUCHSTAB_TOL: f64 = 1e-15;

impl Default for Buchstab {
    fn default() -> Self {
        Self::new()
    }
}

impl Buchstab {
    pub fn new() -> Self {
        let table = PiecewiseCheb::fit(|u| Ok(1.0 / u), &[1.0, 2.0], BUCHSTAB_TOL).expect("1/u on [1, 2] is entire");
        Self { table, upper: 2 }
    }

    /// Largest `u` currently tabulated.
    pub fn tabulated_to(&self) -> u32 {
        self.upper
    }

    fn extend_to(&mut self, u: f64) -> Result<()> {
        while f64::from(self.upper) < u {
            let k = self.upper;
            let table = &self.table;
            let next = PiecewiseCheb::fit(
                |v| Ok((1.0 + table.integral(1.0, v - 1.0)) / v),
                &[f64::from(k), f64::from(k + 1)],
                BUCHSTAB_TOL,
            )?;
            self.table.append(next);
            self.upper = k + 1;
        }
        Ok(())
    }

    pub fn eval(&mut self, u: f64) -> Result<f64> {
        if !u.is_finite() || u < 1.0 {
            return domain(format!("Buchstab argument {u} must be a finite value ≥ 1"));
        }
        if u <= 2.0 {
            return Ok(1.0 / u);
        }
        self.extend_to(u)?;
        Ok(self.table.eval(u))
    }

    /// `∫₁^x ω(t) dt`.
    pub fn integral(&mut self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 1.0 {
            return domain(format!("Buchstab integral limit {x} must be ≥ 1"));
        }
        self.extend_to(x)?;
        Ok(self.table.integral(1.0, x))
    }
}

thread_local! {
    static BUCHSTAB: RefCell<Buchstab> = RefCell::new(Buchstab::new());
}

/// Buchstab's ω(u) for `u ≥ 1`, using a per-thread lazily grown table.
pub fn buchstab(u: f64) -> Result<f64> {
    BUCHSTAB.with(|b| b.borrow_mut().eval(u))
}
