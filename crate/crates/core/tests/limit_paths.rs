use permcycles::{
    exact_pmf, gamma_star, p_limit, q2_closed_form, q_limit, q_recurrence, small_simplex_ratio, Buchstab, Interval,
    QuadratureConfig,
};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    // Interior points only.
    (1..=points).map(move |i| lo + (hi - lo) * i as f64 / (points + 1) as f64)
}

#[test]
fn box_factorization() {
    for r in 1..=5usize {
        for gamma in grid(0.02, 1.0 / r as f64, 6) {
            for delta in grid(gamma, 1.0 / r as f64, 4) {
                let iv = Interval::new(gamma, delta).unwrap();
                let q = q_limit(r, &iv, &cfg()).unwrap().value;
                let expected = iv.log_ratio().powi(r as i32);
                assert!(
                    (q - expected).abs() < 1e-9,
                    "r={r} ({gamma},{delta}): {q} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn recurrence_matches_direct_integral() {
    for k in 1..=4usize {
        let kf = k as f64;
        let upper = grid(1.0 / (kf + 1.0), 1.0 / kf, 10);
        let lower = grid(0.1, 1.0 / (kf + 1.0), 10);
        for gamma in upper.chain(lower) {
            let rec = q_recurrence(k, gamma, &cfg()).unwrap().value;
            let direct = q_limit(k, &Interval::tail(gamma).unwrap(), &cfg()).unwrap().value;
            assert!((rec - direct).abs() < 1e-7, "k={k} γ={gamma}: {rec} vs {direct}");
        }
    }
}

#[test]
fn closed_form_both_branches() {
    // γ + δ ≥ 1: sweep γ ∈ (1/3, 1/2) with δ = 1 and with δ between 1 − γ and 1.
    for gamma in grid(1.0 / 3.0, 0.5, 25) {
        for delta in [1.0, (1.0 - gamma + 0.5 * gamma).min(1.0)] {
            let iv = Interval::new(gamma, delta).unwrap();
            let closed = q2_closed_form(&iv).unwrap();
            let quad = q_limit(2, &iv, &cfg()).unwrap().value;
            assert!((closed - quad).abs() < 1e-9, "({gamma},{delta}): {closed} vs {quad}");
        }
    }
    // γ + δ < 1: the corner of the square is cut only partially.
    for delta in grid(0.5, 0.65, 50) {
        let gamma = 0.34;
        let iv = Interval::new(gamma, delta).unwrap();
        let closed = q2_closed_form(&iv).unwrap();
        let quad = q_limit(2, &iv, &cfg()).unwrap().value;
        assert!((closed - quad).abs() < 1e-9, "({gamma},{delta}): {closed} vs {quad}");
    }
}

#[test]
fn monotone_in_endpoints() {
    for r in 1..=4usize {
        let mut prev = f64::INFINITY;
        for gamma in grid(0.05, 1.0 / r as f64, 30) {
            let q = q_limit(r, &Interval::tail(gamma).unwrap(), &cfg()).unwrap().value;
            assert!(q <= prev + 1e-12, "r={r} γ={gamma}");
            prev = q;
        }
        let gamma = 0.12;
        let mut prev = -1.0;
        for delta in grid(gamma, 1.0, 30) {
            let q = q_limit(r, &Interval::new(gamma, delta).unwrap(), &cfg()).unwrap().value;
            assert!(q >= prev - 1e-12, "r={r} δ={delta}");
            prev = q;
        }
    }
}

#[test]
fn vanishes_beyond_support() {
    for r in 1..=6usize {
        for gamma in grid(0.05, 1.0, 40) {
            let q = q_limit(r, &Interval::tail(gamma).unwrap(), &cfg()).unwrap().value;
            if r as f64 * gamma > 1.0 {
                assert_eq!(q, 0.0, "r={r} γ={gamma}");
            } else {
                assert!(q > 0.0, "r={r} γ={gamma}");
            }
        }
    }
}

#[test]
fn finite_n_converges_to_limit() {
    let windows = [(0.25, 1.0 / 3.0), (0.4, 1.0), (gamma_star(), 1.0)];
    for (gamma, delta) in windows {
        let iv = Interval::new(gamma, delta).unwrap();
        let limit = p_limit(&iv, &cfg()).unwrap();
        let tv: Vec<f64> = [500u64, 1000, 2000]
            .iter()
            .map(|&n| exact_pmf(n, iv.window(n).unwrap()).unwrap().total_variation(&limit))
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2], "({gamma},{delta}): {tv:?}");
        assert!(tv[2] <= 0.01, "({gamma},{delta}): {tv:?}");
    }
}

#[test]
fn simplex_corner_asymptotics() {
    for k in 1..=4usize {
        let kf = k as f64;
        let corner = kf.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
        let deviation = |eps: f64| (small_simplex_ratio(k, 1.0 / kf - eps, &cfg()).unwrap() / corner - 1.0).abs();
        let coarse = deviation(1e-2);
        let fine = deviation(1e-3);
        assert!(fine < coarse, "k={k}: {coarse} then {fine}");
        assert!(fine < 0.02, "k={k}: {fine}");
    }
}

#[test]
fn buchstab_recurrence_residual() {
    // Residual of uω(u) = 1 + ∫₁^{u−1} ω, with the integral taken by a
    // composite Simpson rule on the evaluator itself, split at integers.
    let mut b = Buchstab::new();
    let mut simpson = |lo: f64, hi: f64| {
        let steps = 2000;
        let h = (hi - lo) / steps as f64;
        let mut s = b.eval(lo).unwrap() + b.eval(hi).unwrap();
        for i in 1..steps {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * b.eval(lo + i as f64 * h).unwrap();
        }
        s * h / 3.0
    };
    for i in 0..=80 {
        let u = 2.0 + 4.0 * i as f64 / 80.0;
        let top = u - 1.0;
        let mut integral = 0.0;
        let mut t = 1.0;
        while t < top {
            let next = (t.floor() + 1.0).min(top);
            integral += simpson(t, next);
            t = next;
        }
        let lhs = u * Buchstab::new().eval(u).unwrap();
        assert!((lhs - 1.0 - integral).abs() <= 1e-8, "u={u}");
    }
}
