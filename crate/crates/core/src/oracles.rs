//! Reference computations that share no code with the divided-difference
//! expansion: nested quadrature over the time-ordered simplex, direct
//! integration of the Schrodinger equation, and a dense matrix exponential.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BasisIndex, HamiltonianModel};
use crate::state::StateVector;

/// Largest dimension the dense oracles accept.
pub const MAX_DENSE_DIMENSION: usize = 512;

/// Largest simplex dimension for [`simplex_integral`].
pub const MAX_SIMPLEX_ORDER: usize = 5;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let p_prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per nesting level, at least 16.
    pub nodes_per_dimension: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_dimension: 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: C64,
    /// Difference between this rule and one with half again as many nodes.
    pub error_estimate: f64,
}

/// `(-i)^q` times the time-ordered integral
/// `int_0^t dt_q .. int_0^{t_2} dt_1 exp(-i (gamma_q t_q + .. + gamma_1 t_1))`,
/// evaluated on the unit simplex (`t_j = t s_j`) by nested Gauss-Legendre.
pub fn simplex_integral(t: f64, gammas: &[C64], spec: QuadratureSpec) -> Result<QuadratureResult> {
    if !t.is_finite() || gammas.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("simplex integral needs finite inputs".into()));
    }
    if gammas.len() > MAX_SIMPLEX_ORDER {
        return Err(Error::Capacity(format!(
            "simplex integral of order {} exceeds the limit {MAX_SIMPLEX_ORDER}",
            gammas.len()
        )));
    }
    if spec.nodes_per_dimension < 16 {
        return Err(Error::InvalidArgument(format!(
            "{} quadrature nodes per dimension; at least 16 required",
            spec.nodes_per_dimension
        )));
    }
    let coarse_n = spec.nodes_per_dimension;
    let fine_n = coarse_n + coarse_n / 2;
    let coarse = nested_rule(t, gammas, &gauss_legendre(coarse_n));
    let fine = nested_rule(t, gammas, &gauss_legendre(fine_n));
    Ok(QuadratureResult { value: fine, error_estimate: (fine - coarse).norm() })
}

fn nested_rule(t: f64, gammas: &[C64], rule: &(Vec<f64>, Vec<f64>)) -> C64 {
    fn level(t: f64, gammas: &[C64], rule: &(Vec<f64>, Vec<f64>), upper: f64, phase: C64) -> C64 {
        let Some((gamma, rest)) = gammas.split_last() else {
            return (C64::new(0.0, -t) * phase).exp();
        };
        let (nodes, weights) = rule;
        let mut sum = C64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            let s = upper * x;
            sum += w * level(t, rest, rule, s, phase + gamma * s);
        }
        sum * upper
    }
    let q = gammas.len() as i32;
    C64::new(0.0, -t).powi(q) * level(t, gammas, rule, 1.0, C64::new(0.0, 0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub state: StateVector,
    pub steps: usize,
    pub rejected_steps: usize,
}

/// Default local error tolerance for [`ode_evolve`].
pub const DEFAULT_ODE_TOLERANCE: f64 = 1e-10;

const MAX_ODE_STEPS: usize = 10_000_000;

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Solve `i d psi/dt = H(t) psi` from `|z0>` up to time `t` with adaptive
/// Dormand-Prince 5(4) steps; `tol` bounds the local error per step (mixed
/// absolute/relative).
pub fn ode_evolve(model: &HamiltonianModel, z0: BasisIndex, t: f64, tol: f64) -> Result<OdeSolution> {
    let n = model.dimension();
    check_dense(n)?;
    model.check_state(z0)?;
    if !t.is_finite() || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("ode_evolve needs finite t and tol > 0 (t = {t}, tol = {tol})")));
    }
    let mut psi = StateVector::basis(0.0, n, z0).amplitudes;
    if t == 0.0 {
        return Ok(OdeSolution { state: StateVector::new(0.0, psi), steps: 0, rejected_steps: 0 });
    }

    let rhs = |tau: f64, y: &[C64], out: &mut [C64]| {
        model.apply_h(tau, y, out);
        for o in out.iter_mut() {
            *o = C64::new(o.im, -o.re); // -i * o
        }
    };

    let direction = t.signum();
    let span = t.abs();
    let scale = model
        .eval_h(0.0)
        .row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut h = (0.01 / scale).min(span);
    let mut tau = 0.0;
    let (mut steps, mut rejected) = (0, 0);

    let zero = vec![C64::new(0.0, 0.0); n];
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone());
    let mut stage = zero.clone();
    let mut next = zero;
    rhs(0.0, &psi, &mut k1);

    while tau < span {
        if steps + rejected > MAX_ODE_STEPS {
            return Err(Error::Stiffness { t: direction * tau, reason: "step budget exhausted".into() });
        }
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Stiffness { t: direction * tau, reason: format!("step size {h:e} underflowed") });
        }
        let h_step = h.min(span - tau);
        let hs = direction * h_step;
        let t0 = direction * tau;

        let combine = |out: &mut [C64], terms: &[(f64, &[C64])]| {
            for z in 0..out.len() {
                let mut acc = psi[z];
                for (c, k) in terms {
                    acc += k[z] * (hs * c);
                }
                out[z] = acc;
            }
        };
        combine(&mut stage, &[(A21, &k1)]);
        rhs(t0 + C2 * hs, &stage, &mut k2);
        combine(&mut stage, &[(A31, &k1), (A32, &k2)]);
        rhs(t0 + C3 * hs, &stage, &mut k3);
        combine(&mut stage, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t0 + C4 * hs, &stage, &mut k4);
        combine(&mut stage, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t0 + C5 * hs, &stage, &mut k5);
        combine(&mut stage, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(t0 + hs, &stage, &mut k6);
        combine(&mut next, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        rhs(t0 + hs, &next, &mut k7);

        let mut err: f64 = 0.0;
        for z in 0..n {
            let e = (k1[z] * E1 + k3[z] * E3 + k4[z] * E4 + k5[z] * E5 + k6[z] * E6 + k7[z] * E7) * hs;
            let sc = tol + tol * psi[z].norm().max(next[z].norm());
            err = err.max(e.norm() / sc);
        }

        if err <= 1.0 {
            tau = if h_step == span - tau { span } else { tau + h_step };
            std::mem::swap(&mut psi, &mut next);
            std::mem::swap(&mut k1, &mut k7);
            steps += 1;
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_step * factor;
    }

    Ok(OdeSolution { state: StateVector::new(t, psi), steps, rejected_steps: rejected })
}

/// `exp(-i H t)|z0>` for a time-independent model, by dense matrix exponential.
pub fn mat_exp_evolve(model: &HamiltonianModel, z0: BasisIndex, t: f64) -> Result<StateVector> {
    if !model.is_time_independent() {
        return Err(Error::InvalidArgument("matrix exponential needs a time-independent model".into()));
    }
    check_dense(model.dimension())?;
    model.check_state(z0)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time {t} is not finite")));
    }
    let generator = model.eval_h(0.0) * C64::new(0.0, -t);
    let propagator = generator.exp();
    let column: DVector<C64> = propagator.column(z0).into_owned();
    Ok(StateVector::new(t, column.iter().copied().collect()))
}

/// `1 - |<psi|psi_q>|^2` with `psi` normalized first and `psi_q` taken as is.
pub fn infidelity(psi: &StateVector, psi_q: &StateVector) -> Result<f64> {
    if psi.dimension() != psi_q.dimension() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            psi.dimension(),
            psi_q.dimension()
        )));
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("reference state is zero".into()));
    }
    Ok(1.0 - (psi.inner(psi_q) / norm).norm_sqr())
}

fn check_dense(n: usize) -> Result<()> {
    if n > MAX_DENSE_DIMENSION {
        Err(Error::Capacity(format!("dimension {n} exceeds the dense oracle limit {MAX_DENSE_DIMENSION}")))
    } else {
        Ok(())
    }
}
