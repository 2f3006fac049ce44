//! Deterministic aggregation of Monte Carlo samples.
//!
//! Floating-point addition is not associative, so a parallel reduction
//! whose shape depends on work stealing returns different bits on every
//! run. Everything here reduces in a shape fixed by the sample count
//! alone: samples are evaluated in parallel into position `i` of a
//! vector (or into fixed-size blocks), then combined by a sequential
//! pairwise tree. Results are identical for any thread count.

use rayon::prelude::*;
use serde::Serialize;

/// Sequential pairwise summation. Error grows like `log n` rather than
/// `n`, and the reduction shape depends only on the slice length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Evaluate `f(0), ..., f(n-1)` in parallel into an ordered vector.
/// Each element lands at its own index, so the result does not depend
/// on scheduling.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Streaming parallel accumulation of `(sum, sum of squares)` for huge
/// sample counts where materializing every value would not fit in
/// memory. Samples are grouped into fixed blocks of 4096; each block is
/// summed sequentially, block results are combined pairwise.
pub fn par_moment_sums<F: Fn(usize) -> f64 + Sync + Send>(n: usize, f: F) -> (f64, f64) {
    const BLOCK: usize = 4096;
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(n);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for i in lo..hi {
                let x = f(i);
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let sums: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let sq: Vec<f64> = partials.iter().map(|p| p.1).collect();
    (pairwise_sum(&sums), pairwise_sum(&sq))
}

/// `log(sum_i e^{x_i})`, stable against overflow. `-inf` entries drop
/// out; an all `-inf` input returns `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m.is_infinite() {
        return f64::INFINITY;
    }
    let shifted: Vec<f64> = xs.iter().map(|&x| (x - m).exp()).collect();
    m + pairwise_sum(&shifted).ln()
}

/// Fraction of the total carried by the largest `frac` of the samples
/// (by absolute value). A share above one half at `frac` = 1% is the
/// classic signature of an estimator dominated by rare huge samples.
pub fn top_share(xs: &[f64], frac: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut mags: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = ((frac * xs.len() as f64).ceil() as usize).clamp(1, xs.len());
    let total = pairwise_sum(&mags);
    if total == 0.0 {
        return 0.0;
    }
    pairwise_sum(&mags[..k]) / total
}

/// Mean and standard error of a finished sample set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl SampleSummary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n > 0, "summary of an empty sample set");
        let sum = pairwise_sum(xs);
        let mean = sum / n as f64;
        let devs: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&devs) / (n as f64 - 1.0)
        } else {
            0.0
        };
        SampleSummary {
            n,
            mean,
            std_error: (var / n as f64).sqrt(),
        }
    }

    pub fn from_moment_sums(n: usize, sum: f64, sum_sq: f64) -> Self {
        assert!(n > 0, "summary of an empty sample set");
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        SampleSummary {
            n,
            mean,
            std_error: (var / nf).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 55.0);
    }

    #[test]
    fn pairwise_beats_naive_on_ill_conditioned_sum() {
        // 1 followed by a million tiny values: naive left-to-right loses
        // every one of them against the big head; pairwise only loses the
        // few sharing a leaf with it.
        let mut xs = vec![1.0_f64];
        xs.extend(std::iter::repeat_n(1e-16, 1_000_000));
        let exact = 1.0 + 1e-10;
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        let pw = pairwise_sum(&xs);
        assert!((pw - exact).abs() < 1e-13, "pairwise off by {}", pw - exact);
    }

    #[test]
    fn par_map_is_ordered() {
        let v = par_map(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn streaming_sums_match_materialized() {
        let f = |i: usize| ((i as f64) * 0.7).sin();
        let xs: Vec<f64> = (0..10_000).map(f).collect();
        let (s, s2) = par_moment_sums(10_000, f);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((s - pairwise_sum(&xs)).abs() < 1e-11);
        assert!((s2 - pairwise_sum(&sq)).abs() < 1e-11);
    }

    #[test]
    fn reductions_do_not_depend_on_thread_count() {
        let f = |i: usize| (1.0 + i as f64).ln().sin() * 1e3;
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| par_moment_sums(100_000, f))
        };
        let single = run(1);
        assert_eq!(single, run(3));
        assert_eq!(single, run(8));
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert!((log_sum_exp(&[0.0, 0.0]) - std::f64::consts::LN_2).abs() < 1e-15);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 3.0]), 3.0);
    }

    #[test]
    fn top_share_flags_concentration() {
        let mut xs = vec![1.0; 1000];
        assert!(top_share(&xs, 0.01) < 0.02);
        xs[17] = 1e6;
        assert!(top_share(&xs, 0.01) > 0.99);
    }

    #[test]
    fn summary_agrees_between_routes() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let a = SampleSummary::from_samples(&xs);
        let (s, s2) = par_moment_sums(xs.len(), |i| xs[i]);
        let b = SampleSummary::from_moment_sums(xs.len(), s, s2);
        assert_eq!(a.n, b.n);
        assert!((a.mean - b.mean).abs() < 1e-15);
        assert!((a.std_error - b.std_error).abs() < 1e-10 * a.std_error.max(1e-30));
    }
}
