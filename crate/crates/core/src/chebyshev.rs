//! Piecewise Chebyshev interpolants used to tabulate smooth-between-kinks
//! functions (Buchstab's ω, lower-dimensional sliced-cube integrals) so that
//! nested evaluations cost a Clenshaw sum instead of another quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MIN_DEGREE: usize = 16;
const MAX_DEGREE: usize = 128;
const MAX_SPLIT_DEPTH: u32 = 12;

/// Chebyshev series `Σ c_k T_k(t)` on `[a, b]` with `t` the affine image of
/// `x` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ChebSeries {
    pub a: f64,
    pub b: f64,
    coeffs: Vec<f64>,
    /// Magnitude of the discarded tail when the series was truncated.
    pub tail: f64,
}

impl ChebSeries {
    fn to_unit(&self, x: f64) -> f64 {
        ((2.0 * x - self.a - self.b) / (self.b - self.a)).clamp(-1.0, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    /// Integral over `[lo, hi] ⊆ [a, b]` from the antiderivative series.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let c = &self.coeffs;
        let n = c.len();
        let coef = |k: usize| if k < n { c[k] } else { 0.0 };
        let mut anti = vec![0.0; n + 1];
        if n > 0 {
            anti[1] = coef(0) - 0.5 * coef(2);
        }
        for (k, slot) in anti.iter_mut().enumerate().skip(2) {
            *slot = (coef(k - 1) - coef(k + 1)) / (2.0 * k as f64);
        }
        let scale = 0.5 * (self.b - self.a);
        scale * (clenshaw(&anti, self.to_unit(hi)) - clenshaw(&anti, self.to_unit(lo)))
    }
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Coefficients from values at the Lobatto points `cos(πj/N)`, j = 0..=N.
fn lobatto_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut s = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * v * (PI * (j * k) as f64 / nf).cos();
            }
            let c = 2.0 / nf * s;
            if k == 0 || k == n {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Fits `f` on `[a, b]`, doubling the degree until the trailing coefficients
/// drop below `tol`. Returns the last tail instead if `MAX_DEGREE` does not
/// suffice.
fn fit_single<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<std::result::Result<ChebSeries, f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let node = |j: usize, n: usize| {
        let t = (PI * j as f64 / n as f64).cos();
        0.5 * (a + b) + 0.5 * (b - a) * t
    };
    let mut n = MIN_DEGREE;
    let mut values: Vec<f64> = (0..=n).map(|j| f(node(j, n))).collect::<Result<_>>()?;
    loop {
        let coeffs = lobatto_coefficients(&values);
        let tail = coeffs[n - 2..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if tail <= tol {
            let mut keep = coeffs.len();
            while keep > 1 && coeffs[keep - 1].abs() <= 0.1 * tol {
                keep -= 1;
            }
            let dropped: f64 = coeffs[keep..].iter().map(|c| c.abs()).sum();
            return Ok(Ok(ChebSeries {
                a,
                b,
                coeffs: coeffs[..keep].to_vec(),
                tail: tail.max(dropped),
            }));
        }
        if n >= MAX_DEGREE {
            return Ok(Err(tail));
        }
        // Lobatto grids nest: the old points are the even points of the new grid.
        let m = 2 * n;
        let mut next = Vec::with_capacity(m + 1);
        for j in 0..=m {
            if j % 2 == 0 {
                next.push(values[j / 2]);
            } else {
                next.push(f(node(j, m))?);
            }
        }
        values = next;
        n = m;
    }
}

/// Contiguous Chebyshev pieces covering `[pieces[0].a, pieces[last].b]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PiecewiseCheb {
    pieces: Vec<ChebSeries>,
}

impl PiecewiseCheb {
    /// Fits `f` separately on each interval between consecutive `breaks`,
    /// bisecting any interval that does not converge at `MAX_DEGREE`.
    pub fn fit<F>(mut f: F, breaks: &[f64], tol: f64) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut pieces = Vec::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                fit_into(&mut f, w[0], w[1], tol, 0, &mut pieces)?;
            }
        }
        Ok(Self { pieces })
    }

    /// Appends pieces that start where this table ends.
    pub fn append(&mut self, other: PiecewiseCheb) {
        self.pieces.extend(other.pieces);
    }

    pub fn lo(&self) -> f64 {
        self.pieces.first().map_or(0.0, |p| p.a)
    }

    pub fn hi(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.b)
    }

    /// Largest truncation tail over all pieces.
    pub fn tail(&self) -> f64 {
        self.pieces.iter().fold(0.0, |m, p| m.max(p.tail))
    }

    fn locate(&self, x: f64) -> usize {
        self.pieces.partition_point(|p| p.b < x).min(self.pieces.len() - 1)
    }

    /// Evaluates at `x`, clamped into the covered range.
    pub fn eval(&self, x: f64) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        self.pieces[self.locate(x)].eval(x)
    }

    /// Integral over `[lo, hi]`, both clamped into the covered range.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        let lo = lo.max(self.lo());
        let hi = hi.min(self.hi());
        if hi <= lo {
            return 0.0;
        }
        let mut total = 0.0;
        for p in &self.pieces[self.locate(lo)..] {
            if p.a >= hi {
                break;
            }
            total += p.integral(lo.max(p.a), hi.min(p.b));
        }
        total
    }
}

fn fit_into<F>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32, out: &mut Vec<ChebSeries>) -> Result<()>
where
    F: FnMut(f64) -> Result<f64>,
{
    let tail = match fit_single(f, a, b, tol)? {
        Ok(series) => {
            out.push(series);
            return Ok(());
        }
        Err(tail) => tail,
    };
    if depth >= MAX_SPLIT_DEPTH {
        return Err(Error::ToleranceNotMet {
            achieved: tail,
            requested: tol,
        });
    }
    let mid = 0.5 * (a + b);
    fit_into(f, a, mid, tol, depth + 1, out)?;
    fit_into(f, mid, b, tol, depth + 1, out)
}
