//! Log-space numerics shared by the sampler and the grading rules.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

/// `ln Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Normalized probabilities from log weights, via max subtraction.
pub fn softmax(log_w: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_w);
    log_w.iter().map(|x| (x - lse).exp()).collect()
}

/// Index drawn with probability proportional to `exp(log_w[i])`.
pub fn sample_log_categorical<R: Rng + ?Sized>(log_w: &[f64], rng: &mut R) -> usize {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|x| (x - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, wi) in w.iter().enumerate() {
        if u < *wi {
            return i;
        }
        u -= wi;
    }
    w.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// `ln G` for `G ~ Gamma(shape, 1)`.
///
/// Shapes below one use `G = G' · U^{1/a}` with `G' ~ Gamma(a+1, 1)`, so
/// tiny shapes yield very negative logs instead of underflowing to zero.
pub fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = Open01.sample(rng);
        g.ln() + u.ln() / shape
    }
}

/// Log of a `Dirichlet(shape)` draw.
pub fn log_dirichlet_draw<R: Rng + ?Sized>(shape: &[f64], rng: &mut R) -> Vec<f64> {
    let mut g: Vec<f64> = shape.iter().map(|&a| log_gamma_draw(a, rng)).collect();
    let lse = log_sum_exp(&g);
    g.iter_mut().for_each(|x| *x -= lse);
    g
}

/// `ψ(x + n) − ψ(x)` for integer `n ≥ 0`, as the finite sum `Σ_{m<n} 1/(x+m)`.
pub fn digamma_diff(x: f64, n: u64) -> f64 {
    (0..n).map(|m| 1.0 / (x + m as f64)).sum()
}

/// `ln Γ(x + n) − ln Γ(x)` for integer `n ≥ 0`, accurate for large `x`.
pub fn ln_gamma_diff(x: f64, n: u64) -> f64 {
    if n < 64 {
        (0..n).map(|m| (x + m as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(x + n as f64) - statrs::function::gamma::ln_gamma(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::function::gamma::{digamma, ln_gamma};

    #[test]
    fn lse_matches_naive() {
        let xs = [0.1, -2.0, 3.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn digamma_identity() {
        for &(x, n) in &[(0.5, 3u64), (2.0, 10), (1e-3, 1), (7.25, 0)] {
            let direct = digamma(x + n as f64) - digamma(x);
            assert!((digamma_diff(x, n) - direct).abs() < 1e-9, "{x} {n}");
            let lg = ln_gamma(x + n as f64) - ln_gamma(x);
            assert!((ln_gamma_diff(x, n) - lg).abs() < 1e-9 * lg.abs().max(1.0));
        }
    }

    #[test]
    fn dirichlet_draws_are_normalized_and_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &a in &[1e-4, 0.3, 1.0, 50.0] {
            let d = log_dirichlet_draw(&[a; 6], &mut rng);
            assert!(d.iter().all(|x| x.is_finite()));
            let s: f64 = d.iter().map(|x| x.exp()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_shape_gamma_mean() {
        // E[G] = a
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = 0.4;
        let n = 200_000;
        let mean = (0..n).map(|_| log_gamma_draw(a, &mut rng).exp()).sum::<f64>() / n as f64;
        // sd of the mean is sqrt(a/n) ≈ 0.0014
        assert!((mean - a).abs() < 0.006, "{mean}");
    }
}
