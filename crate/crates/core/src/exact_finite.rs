//! Exact finite-n distributions of cycle counts.
//!
//! For a uniform permutation of [m], the cycle through a fixed element has
//! length uniform on {1, …, m} and the rest is a uniform permutation of the
//! remaining m − k elements. With `X_m` the number of cycles whose length
//! lies in the integer window [a, b], that gives
//!
//! ```text
//! P_m(i) = (1/m) Σ_{k=1}^{m} P_{m−k}(i − [a ≤ k ≤ b]),   P_0 = δ_0.
//! ```

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quasi_poisson::Pmf;

/// Largest n accepted by [`brute_force_pmf`] (9! = 362 880 permutations).
pub const BRUTE_FORCE_MAX_N: u64 = 9;

/// Integer cycle-length window [a, b] with 1 ≤ a ≤ b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntWindow {
    a: u64,
    b: u64,
}

impl IntWindow {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a < 1 {
            return domain(format!("window lower bound must be ≥ 1, got {a}"));
        }
        if a > b {
            return domain(format!("empty window [{a}, {b}]"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn contains(&self, k: u64) -> bool {
        self.a <= k && k <= self.b
    }

    /// Largest possible number of qualifying cycles in a permutation of [n].
    pub fn support_bound(&self, n: u64) -> usize {
        (n / self.a) as usize
    }
}

/// Snaps products within 1e−9 (relative) of an integer onto it, so that
/// e.g. `(1/3) · 3000` rounds as the exact 1000.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// The integer window `[⌈γn⌉, ⌊δn⌋]` for a normalized window, or `None` if
/// it contains no integer ≥ 1. Products within 1e−9 of an integer are
/// treated as that integer.
pub fn normalized_window(n: u64, gamma: f64, delta: f64) -> Option<IntWindow> {
    let nf = n as f64;
    let a = snap(gamma * nf).ceil().max(1.0);
    let b = snap(delta * nf).floor();
    if !(a.is_finite() && b.is_finite()) || a > b {
        return None;
    }
    IntWindow::new(a as u64, b as u64).ok()
}

/// Exact form of [`normalized_window`] for rational endpoints `num/den`.
pub fn normalized_window_exact(n: u64, gamma: (i64, i64), delta: (i64, i64)) -> Result<Option<IntWindow>> {
    let ceil_div = |num: i128, den: i128| -> i128 { num.div_euclid(den) + i128::from(num.rem_euclid(den) != 0) };
    for (num, den) in [gamma, delta] {
        if den <= 0 || num < 0 {
            return domain(format!("normalized bound {num}/{den} must be a nonnegative fraction"));
        }
    }
    let n = i128::from(n);
    let a = ceil_div(i128::from(gamma.0) * n, i128::from(gamma.1)).max(1);
    let b = (i128::from(delta.0) * n).div_euclid(i128::from(delta.1));
    if a > b {
        return Ok(None);
    }
    let to_u64 = |v: i128| u64::try_from(v).map_err(|_| Error::TooLarge(format!("window bound {v}")));
    Ok(Some(IntWindow::new(to_u64(a)?, to_u64(b)?)?))
}

/// Pairs `(k, r)`: cycle length `k` with falling-power exponent `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSpec {
    entries: Vec<(u64, u64)>,
}

impl CycleSpec {
    pub fn new(entries: Vec<(u64, u64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(k, r) in &entries {
            if k < 1 || r < 1 {
                return domain(format!("cycle spec entry ({k}, {r}) needs k ≥ 1 and r ≥ 1"));
            }
            if !seen.insert(k) {
                return Err(Error::DuplicateCycleLength(k));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }
}

/// `E(∏ (X_{k_i})_{r_i})` for a uniform permutation of [n], where `X_k`
/// counts k-cycles: `∏ k_i^{−r_i}` if `Σ k_i r_i ≤ n`, else 0.
pub fn joint_falling_moment(n: u64, spec: &CycleSpec) -> Result<BigRational> {
    if let Some(&(k, _)) = spec.entries.iter().find(|(k, _)| *k > n) {
        return domain(format!("cycle length {k} exceeds n = {n}"));
    }
    let used: u128 = spec.entries.iter().map(|&(k, r)| u128::from(k) * u128::from(r)).sum();
    if used > u128::from(n) {
        return Ok(BigRational::zero());
    }
    let mut denom = BigInt::one();
    for &(k, r) in &spec.entries {
        denom *= BigInt::from(k).pow(r as u32);
    }
    Ok(BigRational::new(BigInt::one(), denom))
}

/// Exact pmf with rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPmf {
    probs: Vec<BigRational>,
}

impl RationalPmf {
    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> BigRational {
        self.probs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support_bound(&self) -> usize {
        self.probs.len() - 1
    }

    /// `Σ_i (i)_k p_i`, exactly.
    pub fn falling_moment(&self, k: usize) -> BigRational {
        let mut total = BigRational::zero();
        for (i, p) in self.probs.iter().enumerate().skip(k) {
            let falling: BigInt = (0..k).map(|j| BigInt::from(i - j)).product();
            total += p * BigRational::from_integer(falling);
        }
        total
    }

    pub fn to_pmf(&self) -> Pmf {
        let probs = self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        Pmf::new(probs).expect("exact pmf converts to a valid pmf")
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 1 {
        return domain("n must be ≥ 1");
    }
    Ok(())
}

/// Exact distribution of the number of cycles with length in `w` for a
/// uniform permutation of [n], in rational arithmetic.
///
/// Works with the integer counts `C_m(i) = m!·P_m(i)`, which satisfy
/// `C_m(i) = Σ_k (m−1)!/(m−k)! · C_{m−k}(i − [k ∈ w])`.
pub fn exact_pmf_rational(n: u64, w: IntWindow) -> Result<RationalPmf> {
    check_n(n)?;
    let r = w.support_bound(n);
    let n_us = n as usize;
    let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(n_us + 1);
    let mut first = vec![BigUint::zero(); r + 1];
    first[0] = BigUint::one();
    counts.push(first);

    for m in 1..=n_us {
        let mut row = vec![BigUint::zero(); r + 1];
        let mut ff = BigUint::one();
        for k in 1..=m {
            if k > 1 {
                ff *= (m - k + 1) as u64;
            }
            let prev = &counts[m - k];
            let shift = usize::from(w.contains(k as u64));
            for i in shift..=r {
                let c = &prev[i - shift];
                if !c.is_zero() {
                    row[i] += &ff * c;
                }
            }
        }
        counts.push(row);
    }

    let total: BigUint = (1..=n).map(BigUint::from).product();
    let total = BigInt::from(total);
    let probs = counts[n_us]
        .iter()
        .map(|c| BigRational::new(BigInt::from(c.clone()), total.clone()))
        .collect();
    Ok(RationalPmf { probs })
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Same distribution as [`exact_pmf_rational`] in double precision with
/// compensated summation; each of the n recursion levels contributes
/// O(ε) relative error, so entries are accurate to O(n·ε). O(n²·r) time.
pub fn exact_pmf(n: u64, w: IntWindow) -> Result<Pmf> {
    check_n(n)?;
    let r = w.support_bound(n);
    let n_us = n as usize;
    let mut table = vec![vec![0.0f64; r + 1]; n_us + 1];
    table[0][0] = 1.0;
    for m in 1..=n_us {
        let mut acc = vec![CompensatedSum::default(); r + 1];
        for k in 1..=m {
            let prev = &table[m - k];
            let shift = usize::from(w.contains(k as u64));
            for i in shift..=r {
                let v = prev[i - shift];
                if v != 0.0 {
                    acc[i].add(v);
                }
            }
        }
        let inv = 1.0 / m as f64;
        for (dst, s) in table[m].iter_mut().zip(&acc) {
            *dst = s.value() * inv;
        }
    }
    let mut probs = table.swap_remove(n_us);
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Pmf::new(probs)
}

/// Cycle lengths of a permutation given in one-line notation.
pub fn cycle_lengths_of(perm: &[usize]) -> Vec<u64> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        lengths.push(len);
    }
    lengths
}

/// Distribution by enumerating all n! permutations of [n]; `n ≤ 9`.
pub fn brute_force_pmf(n: u64, w: IntWindow) -> Result<RationalPmf> {
    check_n(n)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge(format!(
            "brute-force enumeration limited to n ≤ {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let r = w.support_bound(n);
    let mut tally = vec![0u64; r + 1];
    let mut total = 0u64;
    for perm in (0..n as usize).permutations(n as usize) {
        let hits = cycle_lengths_of(&perm).into_iter().filter(|&l| w.contains(l)).count();
        tally[hits] += 1;
        total += 1;
    }
    let probs = tally
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), BigInt::from(total)))
        .collect();
    Ok(RationalPmf { probs })
}

/// `E((X)_r)` from the restricted multinomial expansion
///
/// ```text
/// Σ_{Σ l_k = r, Σ k·l_k ≤ n}  r! / ∏ l_k!  ·  ∏ k^{−l_k},   k ∈ [a, b],
/// ```
///
/// enumerating only the lengths with `l_k > 0`.
pub fn exact_falling_moment(n: u64, w: IntWindow, r: u32) -> BigRational {
    let hi = w.b.min(n);
    if r == 0 {
        return BigRational::one();
    }
    let r_fact: BigInt = (1..=r).map(BigInt::from).product();
    let mut total = BigRational::zero();
    // Denominator ∏ l_k! · k^{l_k} accumulated along the recursion.
    fn recurse(
        k_min: u64,
        hi: u64,
        remaining: u32,
        budget: u64,
        denom: BigInt,
        r_fact: &BigInt,
        total: &mut BigRational,
    ) {
        if remaining == 0 {
            *total += BigRational::new(r_fact.clone(), denom);
            return;
        }
        let mut k = k_min;
        while k <= hi && k <= budget {
            let mut d = denom.clone();
            let mut l = 1u32;
            while l <= remaining && u64::from(l) * k <= budget {
                d *= BigInt::from(k) * BigInt::from(l);
                recurse(
                    k + 1,
                    hi,
                    remaining - l,
                    budget - u64::from(l) * k,
                    d.clone(),
                    r_fact,
                    total,
                );
                l += 1;
            }
            k += 1;
        }
    }
    recurse(w.a, hi, r, n, BigInt::one(), &r_fact, &mut total);
    total
}
