//! Auxiliary-variable update for the CRP concentration under a
//! `Gamma(shape, rate)` prior.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

/// Draws `α | K, N` given the previous value.
///
/// `η ~ Beta(α_old + 1, N)`, then `α` from the mixture of
/// `Gamma(a + K, b − ln η)` and `Gamma(a + K − 1, b − ln η)` (rate form)
/// with odds `(a + K − 1) : N (b − ln η)`.
pub fn sample_alpha<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    alpha_old: f64,
    shape: f64,
    rate: f64,
    rng: &mut R,
) -> f64 {
    assert!(k >= 1 && n >= 1, "need K ≥ 1 and N ≥ 1");
    let eta = Beta::new(alpha_old + 1.0, n as f64).expect("valid beta").sample(rng);
    // η can round to 0 for huge α_old; clamp so the rate stays finite.
    let rate_post = rate - eta.max(f64::MIN_POSITIVE).ln();
    let a1 = shape + k as f64 - 1.0;
    let first = if a1 <= 0.0 {
        true
    } else {
        let odds = a1 / (n as f64 * rate_post);
        rng.random::<f64>() < odds / (1.0 + odds)
    };
    let a = if first { shape + k as f64 } else { a1 };
    let draw = Gamma::new(a, 1.0 / rate_post).expect("valid gamma").sample(rng);
    draw.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn always_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = 1.0;
        for i in 0..100_000 {
            a = sample_alpha(1 + i % 7, 50, a, 1.0, 1.0, &mut rng);
            assert!(a > 0.0 && a.is_finite());
        }
    }
}
