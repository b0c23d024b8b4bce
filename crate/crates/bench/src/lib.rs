//! Deterministic inputs shared by the benchmarks.

use dyson_dd::C64;

/// `q + 1` real nodes spread over `[-width, width]` alternating from
/// the two ends.
pub fn spread_nodes(q: usize, width: f64) -> Vec<C64> {
    let n = q + 1;
    (0..n)
        .map(|j| {
            let k = if j % 2 == 0 { j / 2 } else { n - 1 - j / 2 };
            let x = if n == 1 { 0.0 } else { -width + 2.0 * width * k as f64 / (n - 1) as f64 };
            C64::new(x, 0.0)
        })
        .collect()
}

/// Like [`spread_nodes`], with imaginary parts in `[-width / 10, 0]`.
pub fn complex_nodes(q: usize, width: f64) -> Vec<C64> {
    spread_nodes(q, width)
        .into_iter()
        .enumerate()
        .map(|(j, z)| C64::new(z.re, -0.1 * width * ((j % 5) as f64) / 4.0))
        .collect()
}
