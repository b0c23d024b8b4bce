//! Test-only reference implementations, independent of the crate's kernel.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rug::{Complex, Float};

/// Working precision of the multiprecision oracle, in bits (~150 decimal digits).
pub const ORACLE_BITS: u32 = 500;

/// `exp(-i t [x_0..x_q])` by the classical recursion, carried out in
/// `ORACLE_BITS`-bit arithmetic. Nodes must be pairwise distinct.
pub fn exp_dd_multiprecision(t: f64, nodes: &[C64]) -> C64 {
    let prec = ORACLE_BITS;
    let x: Vec<Complex> = nodes.iter().map(|z| Complex::with_val(prec, (z.re, z.im))).collect();
    let minus_it = Complex::with_val(prec, (Float::with_val(prec, 0), Float::with_val(prec, -t)));
    let n = x.len();
    let mut row: Vec<Complex> = x.iter().map(|xj| Complex::with_val(prec, &minus_it * xj).exp()).collect();
    for width in 1..n {
        let mut next = Vec::with_capacity(n - width);
        for i in 0..n - width {
            let num = Complex::with_val(prec, &row[i + 1] - &row[i]);
            let den = Complex::with_val(prec, &x[i + width] - &x[i]);
            next.push(num / den);
        }
        row = next;
    }
    let (re, im) = row[0].clone().into_real_imag();
    C64::new(re.to_f64(), im.to_f64())
}

/// Direct evaluation of `sum_j f(x_j) / prod_{k != j} (x_j - x_k)` in f64.
pub fn explicit_sum(values: &[C64], nodes: &[C64]) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for (j, &xj) in nodes.iter().enumerate() {
        let mut den = C64::new(1.0, 0.0);
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                den *= xj - xk;
            }
        }
        total += values[j] / den;
    }
    total
}

pub fn rel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}
