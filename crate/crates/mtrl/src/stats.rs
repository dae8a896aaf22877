//! Small statistics toolbox: means, normal-approximation confidence
//! intervals, and the one-sided paired t-test the acceptance comparisons
//! use.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (ddof = 1); zero for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Half-width of the normal-approximation 95% CI: `1.96·s/√n`.
/// Zero by convention for a single run.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    1.96 * sample_std(xs) / (xs.len() as f64).sqrt()
}

/// True when `[a ± ha]` and `[b ± hb]` do not overlap.
pub fn intervals_disjoint(a: f64, ha: f64, b: f64, hb: f64) -> bool {
    (a - b).abs() > ha + hb
}

/// One-sided paired t-test of H1: mean(a − b) > 0.
/// Returns `(t, p)`; degenerate inputs give p = 1 (never significant),
/// except a strictly positive constant difference, which gives p = 0.
pub fn paired_t_one_sided(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired test needs paired samples");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    if n < 2 {
        return (0.0, 1.0);
    }
    let m = mean(&diffs);
    let s = sample_std(&diffs);
    if s == 0.0 {
        return if m > 0.0 { (f64::INFINITY, 0.0) } else { (f64::NEG_INFINITY, 1.0) };
    }
    let t = m / (s / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    (t, 1.0 - dist.cdf(t))
}
