//! Quasi-Poisson distributions and the conversion between falling factorial
//! moments and probability mass functions on {0, …, r}.
//!
//! A quasi-Poisson(r, λ) variable is supported on {0, …, r} and has falling
//! moments `E((X)_k) = λ^k` for `k ≤ r`. It exists exactly for `λ ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Entries of a moment-inverted pmf in `[-NEG_TOL, 0)` are rounding noise and
/// get clamped; anything below is reported as an invalid moment vector.
pub const NEG_TOL: f64 = 1e-9;

/// Tolerance on `Σ p_i = 1` accepted by [`Pmf::new`].
pub const SUM_TOL: f64 = 1e-9;

/// Probability mass function on {0, …, len − 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return domain("pmf must have at least one entry");
        }
        if let Some((i, &p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return domain(format!("pmf entry {i} is {p}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return domain(format!("pmf sums to {total}"));
        }
        Ok(Self { probs })
    }

    /// Point mass at `value`, stored with support bound `value`.
    pub fn point_mass(value: usize) -> Self {
        let mut probs = vec![0.0; value + 1];
        probs[value] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Support bound r (the pmf lives on {0, …, r}).
    pub fn support_bound(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of `i`; zero beyond the support bound.
    pub fn prob(&self, i: usize) -> f64 {
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        falling_moment(self, 1)
    }

    /// Total variation distance, padding the shorter support with zeros.
    pub fn total_variation(&self, other: &Pmf) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        0.5 * (0..len).map(|i| (self.prob(i) - other.prob(i)).abs()).sum::<f64>()
    }
}

/// Falling factorial moments `q_k = E((X)_k)` for `k = 0..=r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    moments: Vec<f64>,
}

impl MomentVector {
    /// Validates `q₀ = 1` and nonnegativity; entries within 1e−12 below zero
    /// are taken as quadrature noise and set to zero.
    pub fn new(mut moments: Vec<f64>) -> Result<Self> {
        match moments.first() {
            Some(&q0) if (q0 - 1.0).abs() <= 1e-12 => {}
            Some(&q0) => return domain(format!("zeroth falling moment must be 1, got {q0}")),
            None => return domain("moment vector must contain q0"),
        }
        for (k, q) in moments.iter_mut().enumerate() {
            if !q.is_finite() || *q < -1e-12 {
                return domain(format!("falling moment {k} is {q}"));
            }
            *q = q.max(0.0);
        }
        Ok(Self { moments })
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The quasi-Poisson(r, λ) pmf
/// `π_i = Σ_{j=i}^{r} C(j,i) (−1)^{j−i} λ^j / j!`.
///
/// Uses `π_i = (λ^i / i!) Σ_{m=0}^{r−i} (−λ)^m / m!`, summed from the
/// smallest term up.
pub fn qp_pmf(r: usize, lambda: f64) -> Result<Pmf> {
    if r < 1 {
        return domain("quasi-Poisson support bound r must be ≥ 1");
    }
    if !(0.0..=1.0).contains(&lambda) {
        return domain(format!(
            "no quasi-Poisson distribution exists for λ = {lambda} outside [0, 1]"
        ));
    }
    let probs = (0..=r)
        .map(|i| {
            let mut tail = 0.0;
            for m in (0..=r - i).rev() {
                tail += (-lambda).powi(m as i32) / factorial(m);
            }
            lambda.powi(i as i32) / factorial(i) * tail
        })
        .collect();
    Ok(Pmf { probs })
}

/// `E((X)_k) = Σ_i (i)_k p_i`.
pub fn falling_moment(pmf: &Pmf, k: usize) -> f64 {
    pmf.probs
        .iter()
        .enumerate()
        .skip(k)
        .map(|(i, &p)| {
            let falling: f64 = (0..k).map(|j| (i - j) as f64).product();
            falling * p
        })
        .sum()
}

/// Inverts falling moments `q₀…q_r` to the pmf on {0, …, r}:
/// `p_i = Σ_{j=i}^{r} C(j,i) (−1)^{j+i} q_j / j!`.
///
/// Entries in `[−NEG_TOL, 0)` are clamped to zero and the result
/// renormalized; anything more negative means no distribution on {0, …, r}
/// has these moments.
pub fn pmf_from_falling_moments(q: &MomentVector) -> Result<Pmf> {
    let qs = &q.moments;
    let r = qs.len() - 1;
    let mut probs: Vec<f64> = (0..=r)
        .map(|i| {
            let mut s = 0.0;
            for m in (0..=r - i).rev() {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * qs[i + m] / factorial(m);
            }
            s / factorial(i)
        })
        .collect();

    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, p)| **p < -NEG_TOL) {
        return Err(Error::InvalidMoments { index, value });
    }
    let mut clamped = false;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
            clamped = true;
        }
    }
    if clamped {
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Pmf::new(probs)
}

/// Square integer matrix, row-major.
pub type IntMatrix = Vec<Vec<i64>>;

const MAX_MATRIX_ORDER: usize = 20;

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: i64 = 1;
    for i in 0..k {
        c = c * (n - i) as i64 / (i + 1) as i64;
    }
    c
}

/// The `(n+1)×(n+1)` matrices `M[i][j] = C(j,i)` and
/// `N[i][j] = C(j,i)(−1)^{i+j}`, which are mutually inverse.
pub fn binomial_matrices(n: usize) -> Result<(IntMatrix, IntMatrix)> {
    if n > MAX_MATRIX_ORDER {
        return Err(Error::TooLarge(format!(
            "binomial matrices limited to n ≤ {MAX_MATRIX_ORDER}, got {n}"
        )));
    }
    let m = (0..=n).map(|i| (0..=n).map(|j| binomial(j, i)).collect()).collect();
    let sgn = |i: usize, j: usize| if (i + j).is_multiple_of(2) { 1 } else { -1 };
    let nm = (0..=n)
        .map(|i| (0..=n).map(|j| sgn(i, j) * binomial(j, i)).collect())
        .collect();
    Ok((m, nm))
}

/// Exact integer product; `None` on overflow or shape mismatch.
pub fn int_mat_mul(a: &IntMatrix, b: &IntMatrix) -> Option<IntMatrix> {
    let inner = b.len();
    if a.iter().any(|row| row.len() != inner) {
        return None;
    }
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .try_fold(0i64, |acc, (&x, brow)| acc.checked_add(x.checked_mul(brow[j])?))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let lambda = (4.0f64 / 3.0).ln();
        let p = qp_pmf(3, lambda).unwrap();
        let expected = [
            0.749_730_273_494_709_3,
            0.216_825_522_017_386_2,
            0.029_476_063_029_318_8,
            0.003_968_141_458_585_7,
        ];
        for (a, b) in p.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_lambda_is_point_mass_at_zero() {
        for r in 1..6 {
            let p = qp_pmf(r, 0.0).unwrap();
            assert_eq!(p.prob(0), 1.0);
            assert!(p.probs()[1..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn unit_lambda_r2() {
        let p = qp_pmf(2, 1.0).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-15);
        assert!(p.prob(1).abs() < 1e-15);
        assert!((p.prob(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qp_domain_errors() {
        assert!(qp_pmf(0, 0.5).is_err());
        assert!(qp_pmf(3, 1.01).is_err());
        assert!(qp_pmf(3, -0.1).is_err());
    }

    #[test]
    fn falling_moment_examples() {
        let p = qp_pmf(3, 0.2).unwrap();
        assert!((falling_moment(&p, 2) - 0.04).abs() < 1e-15);
        assert_eq!(falling_moment(&Pmf::point_mass(5), 1), 5.0);
        assert_eq!(falling_moment(&Pmf::point_mass(5), 0), 1.0);
        let s4 = Pmf::new(vec![1.0 / 24.0, 20.0 / 24.0, 3.0 / 24.0]).unwrap();
        assert!((falling_moment(&s4, 1) - 13.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        let lambda = (4.0f64 / 3.0).ln();
        let q = MomentVector::new(vec![1.0, lambda, lambda.powi(2), lambda.powi(3)]).unwrap();
        let p = pmf_from_falling_moments(&q).unwrap();
        let qp = qp_pmf(3, lambda).unwrap();
        for (a, b) in p.probs().iter().zip(qp.probs()) {
            assert!((a - b).abs() < 1e-15);
        }

        let q = MomentVector::new(vec![1.0, 2.0, 2.0, 0.0]).unwrap();
        let p = pmf_from_falling_moments(&q).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.0, 1.0, 0.0]);

        // Limiting moments at the P₁ maximizer: q₁ = −ln γ₀, q₂ from quadrature.
        let q = MomentVector::new(vec![1.0, 0.974_076_984_180_106_7, 0.145_577_477_321_642_7]).unwrap();
        let p = pmf_from_falling_moments(&q).unwrap();
        assert!((p.prob(0) - 0.0987).abs() < 1e-4);
        assert!((p.prob(1) - 0.8285).abs() < 1e-4);
        assert!((p.prob(2) - 0.0728).abs() < 1e-4);
    }

    #[test]
    fn invalid_and_noisy_moments() {
        // Poisson(2) moments truncated at r = 2 are not realizable on {0,1,2}.
        let q = MomentVector::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert!(matches!(
            pmf_from_falling_moments(&q),
            Err(Error::InvalidMoments { .. })
        ));

        let q = MomentVector::new(vec![1.0, 1.0, -1e-13]).unwrap();
        let p = pmf_from_falling_moments(&q).unwrap();
        assert_eq!(p.prob(2), 0.0);
        // Point mass at 1 with q₁ nudged up: p₀ = −5e−10 is noise and gets clamped.
        let q = MomentVector::new(vec![1.0, 1.0 + 5e-10, 0.0]).unwrap();
        let p = pmf_from_falling_moments(&q).unwrap();
        assert_eq!(p.prob(0), 0.0);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        assert!(MomentVector::new(vec![0.9, 0.1]).is_err());
        assert!(MomentVector::new(vec![]).is_err());
        assert!(MomentVector::new(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn binomial_matrices_small() {
        let (m, n) = binomial_matrices(0).unwrap();
        assert_eq!(m, vec![vec![1]]);
        assert_eq!(n, vec![vec![1]]);
        let (m, n) = binomial_matrices(2).unwrap();
        assert_eq!(m, vec![vec![1, 1, 1], vec![0, 1, 2], vec![0, 0, 1]]);
        assert_eq!(n, vec![vec![1, -1, 1], vec![0, 1, -2], vec![0, 0, 1]]);
        assert!(binomial_matrices(21).is_err());
        assert!(binomial_matrices(20).is_ok());
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![1.5, -0.5]).is_err());
        let a = Pmf::new(vec![0.5, 0.5]).unwrap();
        let b = Pmf::point_mass(2);
        assert!((a.total_variation(&b) - 1.0).abs() < 1e-15);
        assert_eq!(b.support_bound(), 2);
    }
}
