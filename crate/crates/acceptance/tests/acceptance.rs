//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{exp_dd_multiprecision, rel_err};
use dyson_dd::dd::{exp_dd, exp_dd_with_stats, shift_inputs, DdInputs};
use dyson_dd::dyson::{amplitude_by_order, coefficients, evolve, evolve_ti, expand};
use dyson_dd::models::{
    build_anharmonic, build_fermi, build_single_spin, AnharmonicParams, FermiParams, SingleSpinParams,
};
use dyson_dd::oracles::{infidelity, mat_exp_evolve, ode_evolve, simplex_integral, QuadratureSpec};
use dyson_dd::{Execution, ExpSumFactor, FreeSpectrum, HamiltonianModel, PermutationMap, Picture, Term};
use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dd(t: f64, nodes: &[f64]) -> C64 {
    exp_dd(t, &DdInputs::from_real(nodes).unwrap()).unwrap()
}

/// Nodes `x_j = gamma_{j+1} + .. + gamma_q`, followed by the trailing zero.
fn cumulative_nodes(gammas: &[C64]) -> Vec<C64> {
    let q = gammas.len();
    let mut nodes = vec![c(0.0, 0.0); q + 1];
    for j in (0..q).rev() {
        nodes[j] = nodes[j + 1] + gammas[j];
    }
    nodes
}

fn simplex_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..125 {
        let q = rng.gen_range(1..=4);
        let complex = case >= 100;
        let gammas: Vec<C64> = (0..q)
            .map(|_| {
                let im = if complex { rng.gen_range(-1.0..=1.0) } else { 0.0 };
                c(rng.gen_range(-2.0..=2.0), im)
            })
            .collect();
        let t = rng.gen_range(0.0..=1.0);
        let quad = simplex_integral(t, &gammas, QuadratureSpec::default()).unwrap().value;
        let value = exp_dd(t, &DdInputs::new(cumulative_nodes(&gammas)).unwrap()).unwrap();
        worst = worst.max((quad - value).norm());
    }
    check(worst <= 1e-8, format!("125 cases, worst |exp_dd - quadrature| = {worst:.2e} (limit 1e-8)"))
}

fn shift_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let q = rng.gen_range(0..=10);
        let nodes: Vec<C64> = (0..=q).map(|_| c(rng.gen_range(-10.0..=10.0), rng.gen_range(-2.0..=2.0))).collect();
        let shift = c(rng.gen_range(-10.0..=10.0), rng.gen_range(-2.0..=2.0));
        let t = rng.gen_range(0.0..=2.0);
        let inputs = DdInputs::new(nodes).unwrap();
        let direct = exp_dd(t, &inputs).unwrap();
        let shifted = exp_dd(t, &shift_inputs(&inputs, shift).unwrap()).unwrap();
        worst = worst.max(rel_err((c(0.0, -t) * shift).exp() * shifted, direct));
    }
    check(worst <= 1e-10, format!("200 sets, worst relative error = {worst:.2e} (limit 1e-10)"))
}

/// `gamma (exp(-i t a) - exp(-i t b)) / (a - b)`, written without cancellation.
fn first_order_closed_form(gamma: f64, a: f64, b: f64, t: f64) -> C64 {
    let delta = a - b;
    let mean = 0.5 * (a + b);
    gamma * (c(0.0, -t * mean)).exp() * c(0.0, -2.0 * (0.5 * t * delta).sin()) / delta
}

fn fermi_golden_rule() -> Outcome {
    let (e_in, e_fin, drive, gamma, t) = (0.3, 1.1, 0.5, 0.1, 0.7);
    let model = build_fermi(FermiParams { e_in, e_fin, drive, gamma }).unwrap();
    let a1 = amplitude_by_order(&model, FermiParams::Z_IN, FermiParams::Z_FIN, t, 1).unwrap()[1];
    let (a, b) = (e_in + drive, e_fin);
    let textbook = gamma * ((c(0.0, -t * a)).exp() - (c(0.0, -t * b)).exp()) / (a - b);
    let err = rel_err(a1, textbook);
    let mut ok = err <= 1e-12;
    let mut detail = format!("first order rel err {err:.2e}");

    let limit = c(0.0, -t * gamma) * (c(0.0, -t * e_fin)).exp();
    for gap in [1e-3, 1e-6, 1e-9] {
        let near = build_fermi(FermiParams { e_in, e_fin, drive: e_fin - e_in + gap, gamma }).unwrap();
        let amp = amplitude_by_order(&near, FermiParams::Z_IN, FermiParams::Z_FIN, t, 1).unwrap()[1];
        let a = e_in + (e_fin - e_in + gap);
        let closed = first_order_closed_form(gamma, a, e_fin, t);
        let to_limit = (amp - limit).norm();
        let to_closed = rel_err(amp, closed);
        ok &= amp.is_finite() && to_limit <= gamma * t * t * gap && to_closed <= 1e-12;
        detail += &format!("; gap {gap:.0e}: |A - limit| {to_limit:.2e}, rel err {to_closed:.2e}");
    }
    check(ok, detail)
}

fn fermi_higher_orders() -> Outcome {
    let (e_in, e_fin, drive, gamma, t) = (0.3, 1.1, 0.5, 0.1, 0.7);
    let model = build_fermi(FermiParams { e_in, e_fin, drive, gamma }).unwrap();
    let by_order = amplitude_by_order(&model, FermiParams::Z_IN, FermiParams::Z_FIN, t, 5).unwrap();
    let (a, b, e) = (e_in, e_fin, drive);
    let displayed = [
        (1, vec![a + e, b]),
        (3, vec![a + 3.0 * e, b + 2.0 * e, a + e, b]),
        (5, vec![a + 5.0 * e, b + 4.0 * e, a + 3.0 * e, b + 2.0 * e, a + e, b]),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, nodes) in displayed {
        let want = gamma.powi(q) * dd(t, &nodes);
        let err = rel_err(by_order[q as usize], want);
        ok &= err <= 1e-12;
        detail.push(format!("order {q} rel err {err:.2e}"));
    }
    check(ok, detail.join(", "))
}

fn single_spin_convergence() -> Outcome {
    let model = build_single_spin(SingleSpinParams { a: 1.0, b: 0.5, gamma: 0.2 }).unwrap();
    let t = 0.5;
    let exact = ode_evolve(&model, 0, t, 1e-12).unwrap().state;
    let expansion = expand(&model, 0, t, 6, Picture::Schrodinger, Execution::Sequential).unwrap();
    let curve: Vec<f64> = (0..=6).map(|q| infidelity(&exact, &expansion.partial_state(q)).unwrap()).collect();
    let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
    let last = curve[6];
    let shown: Vec<String> = curve.iter().map(|x| format!("{x:.2e}")).collect();
    check(
        monotone && last <= 1e-8,
        format!("infidelity Q=0..6 [{}]; monotone {monotone}, Q=6 {last:.2e} (limit 1e-8)", shown.join(", ")),
    )
}

fn oscillator_populations() -> Outcome {
    let (n0, max_order, t) = (4, 5, 0.04);
    let n_max = AnharmonicParams::default_truncation(n0, max_order);
    let model = build_anharmonic(AnharmonicParams { omega: 1.0, drive: 2.0, gamma: 0.02, n_max }).unwrap();
    let exact = ode_evolve(&model, n0, t, 1e-12).unwrap().state.populations();
    let approx = evolve(&model, n0, t, max_order, Picture::Schrodinger, Execution::Parallel).unwrap().populations();
    let (worst_n, worst) = exact
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0f64), |acc, (n, d)| if d > acc.1 { (n, d) } else { acc });
    check(
        worst <= 1e-4,
        format!(
            "worst population difference {worst:.2e} at n={worst_n} (ODE {:.6}, series {:.6}; limit 1e-4)",
            exact[worst_n], approx[worst_n]
        ),
    )
}

fn oscillator_infidelity_ordering() -> Outcome {
    let (n0, max_order) = (4, 3);
    let n_max = AnharmonicParams::default_truncation(n0, max_order);
    let model = build_anharmonic(AnharmonicParams { omega: 1.0, drive: 2.0, gamma: 0.02, n_max }).unwrap();
    let mut violations = Vec::new();
    for step in 0..=16 {
        let t = 0.08 * step as f64 / 16.0;
        let exact = ode_evolve(&model, n0, t, 1e-12).unwrap().state;
        let expansion = expand(&model, n0, t, max_order, Picture::Schrodinger, Execution::Parallel).unwrap();
        let curve: Vec<f64> =
            (0..=max_order).map(|q| infidelity(&exact, &expansion.partial_state(q)).unwrap()).collect();
        for q in 1..=max_order {
            if curve[q] > curve[q - 1] + 1e-12 {
                violations.push(format!("t={t:.3} Q={q}: {:.3e} > {:.3e}", curve[q], curve[q - 1]));
            }
        }
    }
    let total = violations.len();
    violations.truncate(3);
    check(
        total == 0,
        format!(
            "17 times x Q=0..3, {total} ordering violations{}",
            if total > 0 { format!(" (first: {})", violations.join("; ")) } else { String::new() }
        ),
    )
}

/// `exp(-i t [E_n + (k1 + k2) W, E_{n+i1} + k2 W, E_{n+i1+i2}])` summed over
/// `k1, k2 = +-1`.
fn second_order_sum(energy: impl Fn(i64) -> f64, drive: f64, t: f64, n: i64, i1: i64, i2: i64) -> C64 {
    let mut total = c(0.0, 0.0);
    for k1 in [1.0, -1.0] {
        for k2 in [1.0, -1.0] {
            total += dd(t, &[energy(n) + (k1 + k2) * drive, energy(n + i1) + k2 * drive, energy(n + i1 + i2)]);
        }
    }
    total
}

fn table_coefficients() -> Outcome {
    let (omega, drive, gamma, t) = (1.0, 2.0, 0.02, 0.3);
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    let mut rows_checked = 0;
    for n in 4..=8usize {
        let model = build_anharmonic(AnharmonicParams { omega, drive, gamma, n_max: n + 12 }).unwrap();
        let energy = |m: i64| omega * (m as f64 + 0.5);
        let nf = n as f64;
        let ni = n as i64;
        let falling = |k: usize| (0..k).map(|j| nf - j as f64).product::<f64>().sqrt();

        let mut expected: Vec<(Vec<usize>, C64)> = vec![(vec![], (c(0.0, -t * energy(ni))).exp())];
        let first = [
            (0usize, -4i64, falling(4)),
            (1, -2, (nf * (nf - 1.0)).sqrt() * (4.0 * nf - 2.0)),
            (2, 0, 3.0 * (2.0 * nf * nf + 2.0 * nf + 1.0)),
            (3, 2, ((nf + 2.0) * (nf + 1.0)).sqrt() * (4.0 * nf + 6.0)),
            (4, 4, ((nf + 1.0) * (nf + 2.0) * (nf + 3.0) * (nf + 4.0)).sqrt()),
        ];
        for (term, shift, weight) in first {
            let sum =
                dd(t, &[energy(ni) + drive, energy(ni + shift)]) + dd(t, &[energy(ni) - drive, energy(ni + shift)]);
            expected.push((vec![term], gamma * weight * sum));
        }
        let second = [
            (vec![0usize, 0], -4i64, -4i64, 8usize, falling(8)),
            (vec![0, 1], -4, -2, 6, falling(6) * (4.0 * nf - 18.0)),
            (vec![0, 2], -4, 0, 4, 3.0 * falling(4) * (2.0 * nf * nf - 14.0 * nf + 25.0)),
        ];
        let produced = coefficients(&model, n, t, 2, Picture::Schrodinger).unwrap();
        for (terms, i1, i2, needs, weight) in second {
            let row = produced.iter().find(|coeff| coeff.terms == terms);
            if n < needs {
                if row.is_some() {
                    problems.push(format!("n={n} row {terms:?} should vanish"));
                }
                continue;
            }
            expected.push((terms, gamma * gamma * weight * second_order_sum(energy, drive, t, ni, i1, i2)));
        }
        for (terms, want) in expected {
            match produced.iter().find(|coeff| coeff.terms == terms) {
                Some(coeff) => {
                    let err = rel_err(coeff.value, want);
                    worst = worst.max(err);
                    rows_checked += 1;
                    if err > 1e-12 {
                        problems.push(format!(
                            "n={n} row {terms:?}: {} vs {want} (ratio {:.4})",
                            coeff.value,
                            (coeff.value / want).re
                        ));
                    }
                }
                None => problems.push(format!("n={n} row {terms:?} missing")),
            }
        }
    }
    let total = problems.len();
    problems.truncate(3);
    check(
        total == 0,
        format!(
            "{rows_checked} rows, worst rel err {worst:.2e} (limit 1e-12){}",
            if total > 0 { format!("; {}", problems.join("; ")) } else { String::new() }
        ),
    )
}

fn random_ti_model(rng: &mut ChaCha8Rng) -> HamiltonianModel {
    let dimension = 4;
    let energies: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut order: Vec<usize> = (0..dimension).collect();
    order.shuffle(rng);
    // a single 4-cycle through the shuffled states
    let mut forward = vec![None; dimension];
    let mut backward = vec![None; dimension];
    for (k, &z) in order.iter().enumerate() {
        let next = order[(k + 1) % dimension];
        forward[z] = Some(next);
        backward[next] = Some(z);
    }
    let d: Vec<C64> = (0..dimension).map(|_| c(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
    let mut d_back = vec![c(0.0, 0.0); dimension];
    for z in 0..dimension {
        d_back[forward[z].unwrap()] = d[z].conj();
    }
    let zeros = vec![c(0.0, 0.0); dimension];
    let terms = vec![
        Term::new(PermutationMap::from_mapping(forward).unwrap(), vec![ExpSumFactor::new(zeros.clone(), d).unwrap()]),
        Term::new(PermutationMap::from_mapping(backward).unwrap(), vec![ExpSumFactor::new(zeros, d_back).unwrap()]),
    ];
    HamiltonianModel::new(FreeSpectrum::new(energies).unwrap(), terms).unwrap()
}

fn ti_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_exp, mut worst_general): (f64, f64) = (0.0, 0.0);
    for _ in 0..3 {
        let model = random_ti_model(&mut rng);
        let v = model.eval_v(0.0);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let hermitian = (&v - v.adjoint()).iter().all(|z| z.norm() < 1e-15);
        if !hermitian {
            return Err("random model is not Hermitian".into());
        }
        let t = 0.5 / norm;
        for z0 in 0..model.dimension() {
            let exact = mat_exp_evolve(&model, z0, t).unwrap();
            let ti = evolve_ti(&model, z0, t, 20, Execution::Parallel).unwrap();
            worst_exp = worst_exp.max(ti.max_abs_diff(&exact));
            let ti12 = evolve_ti(&model, z0, t, 12, Execution::Sequential).unwrap();
            let general = evolve(&model, z0, t, 12, Picture::Schrodinger, Execution::Sequential).unwrap();
            worst_general = worst_general.max(ti12.max_abs_diff(&general));
        }
    }
    check(
        worst_exp <= 1e-8 && worst_general <= 1e-12,
        format!(
            "3 models x 4 initial states: Q=20 vs expm {worst_exp:.2e} (limit 1e-8), Q=12 vs general engine {worst_general:.2e} (limit 1e-12)"
        ),
    )
}

fn kernel_stress() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.gen_range(0.0..=1.0);
        let nodes: Vec<C64> = (0..21).map(|_| c(rng.gen_range(-50.0..=50.0), 0.0)).collect();
        let want = exp_dd_multiprecision(t, &nodes);
        let got = exp_dd(t, &DdInputs::new(nodes).unwrap()).unwrap();
        worst = worst.max(rel_err(got, want));
    }

    let mut per_slice = Vec::new();
    for q in [10usize, 20, 40, 80] {
        let nodes: Vec<C64> = (0..=q).map(|_| c(rng.gen_range(-50.0..=50.0), 0.0)).collect();
        let (_, stats) = exp_dd_with_stats(1.0, &DdInputs::new(nodes).unwrap()).unwrap();
        let ops = (stats.table_ops + stats.propagation_ops) as f64;
        per_slice.push((q, ops / (stats.slices as f64 * ((q + 1) * (q + 1)) as f64)));
    }
    let base = per_slice[0].1;
    let bounded = per_slice.iter().all(|&(_, r)| r <= 1.25 * base);
    let ratios: Vec<String> = per_slice.iter().map(|(q, r)| format!("q={q}: {r:.2}")).collect();
    check(
        worst <= 1e-10 && bounded,
        format!(
            "100 cases at q=20, worst rel err {worst:.2e} (limit 1e-10); ops per slice / (q+1)^2: {}",
            ratios.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("simplex integral equivalence", simplex_equivalence),
        ("shift identity", shift_identity),
        ("first-order transition amplitude", fermi_golden_rule),
        ("odd-order transition amplitudes", fermi_higher_orders),
        ("single-spin convergence", single_spin_convergence),
        ("oscillator populations at t=0.04", oscillator_populations),
        ("oscillator infidelity ordering", oscillator_infidelity_ordering),
        ("oscillator low-order coefficients", table_coefficients),
        ("time-independent reduction", ti_reduction),
        ("kernel stress", kernel_stress),
    ];
    let mut failures = 0;
    for (number, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        let elapsed = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failures += 1;
                ("FAIL", detail)
            }
        };
        println!("criterion {:>2} {name}: {status} [{elapsed:.2}s] {detail}", number + 1);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
