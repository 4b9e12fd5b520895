//! Inputs shared by the benchmarks.

use mlp_core::eval::{synth_generate, SyntheticSpec};
use mlp_core::{prepare, Prepared};

/// Featurized planted corpus of `n` solutions over `v` features.
pub fn planted(n: usize, v: usize, seed: u64) -> Prepared {
    let spec = SyntheticSpec { n, v, seed, ..SyntheticSpec::default() };
    prepare(&synth_generate(&spec).expect("valid spec").dataset).expect("featurizes")
}

/// Multi-step solution texts mixing prose and math.
pub fn solution_texts(count: usize) -> Vec<String> {
    (0..count)
        .map(|i| {
            let a = i % 7 + 1;
            format!(
                "We expand ({a}x^2 + x + sin^2 x + cos^2 x)(2x - {a}) = ({a}x^2 + x + 1)(2x - {a}) \
                 = {b}x^3 - {c}x^2 + 2x^2 - {a}x + 2x - {a}, so the answer is {b}x^3 + {d}x^2 + {e}x - {a}.",
                b = 2 * a,
                c = a * a,
                d = 2 - a * a,
                e = 2 - a as i64,
            )
        })
        .collect()
}
