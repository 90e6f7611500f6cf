//! Seeded Monte Carlo over cycle types.
//!
//! Only cycle-length multisets are generated, never whole permutations.
//! Uniform permutations (σ = 1) use stick-breaking: with m elements left, the
//! cycle through the smallest of them has length uniform on {1, …, m}.
//! Ewens(σ) permutations use the Chinese restaurant construction: element
//! j + 1 opens a new cycle with probability σ/(σ + j) and otherwise joins an
//! existing cycle with probability proportional to its length.
//!
//! # Reproducibility
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`). Worker `w` of `W`
//! uses `ChaCha8Rng::seed_from_u64(seed)` switched to stream `w`, and draws
//! a contiguous block of `samples / W` draws (the first `samples % W`
//! workers take one extra). Tallies are merged in worker order, so a result
//! is a pure function of `(n, window, σ, samples, seed, W)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exact_finite::IntWindow;
use crate::limit::Interval;

/// Cycle lengths of one sampled permutation of [n].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLengths {
    lengths: Vec<u64>,
    n: u64,
}

impl CycleLengths {
    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn cycle_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn count_in(&self, w: &IntWindow) -> usize {
        self.lengths.iter().filter(|&&l| w.contains(l)).count()
    }
}

/// Binary indexed tree over cycle lengths for O(log t) proportional picks.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(capacity: usize) -> Self {
        Self {
            tree: vec![0; capacity + 1],
        }
    }

    fn add(&mut self, index: usize, delta: u64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

fn stick_breaking<R: Rng + ?Sized>(n: u64, rng: &mut R) -> Vec<u64> {
    let mut lengths = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let len = rng.random_range(1..=remaining);
        lengths.push(len);
        remaining -= len;
    }
    lengths
}

fn chinese_restaurant<R: Rng + ?Sized>(n: u64, sigma: f64, rng: &mut R) -> Vec<u64> {
    let mut sizes: Vec<u64> = Vec::new();
    let mut fenwick = Fenwick::new(n as usize);
    for seated in 0..n {
        let new_table = seated == 0 || rng.random::<f64>() * (sigma + seated as f64) < sigma;
        let table = if new_table {
            sizes.push(0);
            sizes.len() - 1
        } else {
            fenwick.find(rng.random_range(0..seated))
        };
        sizes[table] += 1;
        fenwick.add(table, 1);
    }
    sizes
}

/// Cycle lengths of a permutation of [n] drawn from the Ewens(σ) measure
/// (uniform for σ = 1).
pub fn sample_cycle_lengths<R: Rng + ?Sized>(n: u64, sigma: f64, rng: &mut R) -> Result<CycleLengths> {
    if n < 1 {
        return domain("n must be ≥ 1");
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Ewens parameter σ must be positive, got {sigma}"));
    }
    let lengths = if sigma == 1.0 {
        stick_breaking(n, rng)
    } else {
        chinese_restaurant(n, sigma, rng)
    };
    debug_assert_eq!(lengths.iter().sum::<u64>(), n);
    Ok(CycleLengths { lengths, n })
}

/// Empirical distribution of the cycle count in a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub counts: Vec<u64>,
    pub samples: u64,
    pub pmf_hat: Vec<f64>,
    /// `√(p̂(1−p̂)/samples)` per entry.
    pub stderr: Vec<f64>,
    pub mean: f64,
    /// Standard error of `mean` from the sample variance.
    pub mean_stderr: f64,
    pub seed: u64,
    pub workers: usize,
    pub window: Option<IntWindow>,
}

/// ChaCha8 substream for worker `worker`.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Samples `samples` permutations of [n] and tallies how many cycles fall in
/// the normalized window `iv` (integer window `[⌈γn⌉, ⌊δn⌋]`).
pub fn estimate_pmf(
    n: u64,
    iv: &Interval,
    sigma: f64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EstimateResult> {
    estimate_window_pmf(n, iv.window(n), sigma, samples, seed, workers)
}

/// As [`estimate_pmf`] for an explicit integer window; `None` is the empty
/// window, for which every draw counts zero.
pub fn estimate_window_pmf(
    n: u64,
    window: Option<IntWindow>,
    sigma: f64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EstimateResult> {
    if samples == 0 {
        return domain("samples must be ≥ 1");
    }
    if workers == 0 {
        return domain("workers must be ≥ 1");
    }
    if n < 1 {
        return domain("n must be ≥ 1");
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Ewens parameter σ must be positive, got {sigma}"));
    }
    let bound = window.map_or(0, |w| w.support_bound(n));
    let per_worker = |w: usize| samples / workers as u64 + u64::from((w as u64) < samples % workers as u64);

    let run = |worker: usize| -> Result<Vec<u64>> {
        let mut rng = worker_rng(seed, worker);
        let mut tally = vec![0u64; bound + 1];
        for _ in 0..per_worker(worker) {
            let draw = sample_cycle_lengths(n, sigma, &mut rng)?;
            let hits = window.map_or(0, |w| draw.count_in(&w));
            tally[hits] += 1;
        }
        Ok(tally)
    };

    let tallies: Vec<Result<Vec<u64>>> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || run(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler worker panicked"))
                .collect()
        })
    };

    let mut counts = vec![0u64; bound + 1];
    for tally in tallies {
        for (c, t) in counts.iter_mut().zip(tally?) {
            *c += t;
        }
    }

    let total = samples as f64;
    let pmf_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let stderr = pmf_hat.iter().map(|&p| (p * (1.0 - p) / total).sqrt()).collect();
    let mean: f64 = pmf_hat.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
    let second: f64 = pmf_hat.iter().enumerate().map(|(i, p)| (i * i) as f64 * p).sum();
    let variance = if samples > 1 {
        (second - mean * mean).max(0.0) * total / (total - 1.0)
    } else {
        0.0
    };
    Ok(EstimateResult {
        counts,
        samples,
        pmf_hat,
        stderr,
        mean,
        mean_stderr: (variance / total).sqrt(),
        seed,
        workers,
        window,
    })
}
