//! Seeded validation battery: identities of the kernel, the alpha/beta
//! bridge, and the time-independent reduction.

use dyson_dd::dd::{exp_dd, shift_inputs, DdInputs};
use dyson_dd::dyson::{alpha, beta, enumerate_paths, evolve, evolve_ti};
use dyson_dd::models::{
    build_anharmonic, build_fermi, build_single_spin, AnharmonicParams, FermiParams, SingleSpinParams,
};
use dyson_dd::oracles::{mat_exp_evolve, simplex_integral, QuadratureSpec};
use dyson_dd::{Execution, ExpSumFactor, FreeSpectrum, HamiltonianModel, PermutationMap, Picture, Term, C64};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::ValidateArgs;
use crate::commands::load;
use crate::error::CliError;
use crate::table::{Cell, Table};

pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn rel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}

/// Nodes `x_j = gamma_{j+1} + .. + gamma_q`, followed by the trailing zero.
fn cumulative_nodes(gammas: &[C64]) -> Vec<C64> {
    let q = gammas.len();
    let mut nodes = vec![C64::new(0.0, 0.0); q + 1];
    for j in (0..q).rev() {
        nodes[j] = nodes[j + 1] + gammas[j];
    }
    nodes
}

/// Simplex quadrature against the divided difference, `q` in 1..=4.
pub fn simplex_suite(rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let mut max_error: f64 = 0.0;
    let cases = 125;
    for case in 0..cases {
        let q = 1 + case % 4;
        let complex = case >= 100;
        let gammas: Vec<C64> = (0..q)
            .map(|_| {
                let im = if complex { rng.gen_range(-1.0..=1.0) } else { 0.0 };
                C64::new(rng.gen_range(-2.0..=2.0), im)
            })
            .collect();
        let t = rng.gen_range(0.0..=1.0);
        let quad = simplex_integral(t, &gammas, QuadratureSpec::default())?.value;
        let value = exp_dd(t, &DdInputs::new(cumulative_nodes(&gammas))?)?;
        max_error = max_error.max((quad - value).norm());
    }
    Ok(SuiteResult { name: "simplex-integral", cases, max_error, tolerance: 1e-8 })
}

/// `exp(-i t [x]) = exp(-i t s) exp(-i t [x - s])`.
pub fn shift_suite(rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let mut max_error: f64 = 0.0;
    let cases = 200;
    for _ in 0..cases {
        let q = rng.gen_range(0..=10);
        let nodes: Vec<C64> =
            (0..=q).map(|_| C64::new(rng.gen_range(-10.0..=10.0), rng.gen_range(-2.0..=2.0))).collect();
        let shift = C64::new(rng.gen_range(-10.0..=10.0), rng.gen_range(-2.0..=2.0));
        let t = rng.gen_range(0.0..=2.0);
        let inputs = DdInputs::new(nodes)?;
        let direct = exp_dd(t, &inputs)?;
        let shifted = exp_dd(t, &shift_inputs(&inputs, shift)?)?;
        max_error = max_error.max(rel_err((C64::new(0.0, -t) * shift).exp() * shifted, direct));
    }
    Ok(SuiteResult { name: "shift-identity", cases, max_error, tolerance: 1e-10 })
}

/// `beta = alpha exp(-i t E_end)` on every path up to `max_order`.
pub fn bridge_suite(models: &[(HamiltonianModel, usize)], t: f64) -> Result<SuiteResult, CliError> {
    let mut max_error: f64 = 0.0;
    let mut cases = 0;
    for (model, max_order) in models {
        for z in 0..model.dimension().min(8) {
            for path in enumerate_paths(model, z, *max_order)? {
                let a = alpha(model, &path, t)?;
                let b = beta(model, &path, t)?;
                if a == C64::new(0.0, 0.0) && b == C64::new(0.0, 0.0) {
                    continue;
                }
                let want = a * (C64::new(0.0, -t) * model.energy(path.endpoint())).exp();
                max_error = max_error.max(rel_err(b, want));
                cases += 1;
            }
        }
    }
    Ok(SuiteResult { name: "alpha-beta-bridge", cases, max_error, tolerance: 1e-10 })
}

/// Four-level model `H0 + D P + (D P)^dag` with a random 4-cycle `P`.
pub fn random_hermitian_ti_model(rng: &mut ChaCha8Rng) -> Result<HamiltonianModel, CliError> {
    let dimension = 4;
    let energies: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut order: Vec<usize> = (0..dimension).collect();
    order.shuffle(rng);
    let mut forward = vec![None; dimension];
    let mut backward = vec![None; dimension];
    for (k, &z) in order.iter().enumerate() {
        let next = order[(k + 1) % dimension];
        forward[z] = Some(next);
        backward[next] = Some(z);
    }
    let d: Vec<C64> = (0..dimension).map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
    let mut d_back = vec![C64::new(0.0, 0.0); dimension];
    for (z, target) in forward.iter().enumerate() {
        d_back[target.expect("a cycle maps every state")] = d[z].conj();
    }
    let zeros = vec![C64::new(0.0, 0.0); dimension];
    let terms = vec![
        Term::new(PermutationMap::from_mapping(forward)?, vec![ExpSumFactor::new(zeros.clone(), d)?]),
        Term::new(PermutationMap::from_mapping(backward)?, vec![ExpSumFactor::new(zeros, d_back)?]),
    ];
    Ok(HamiltonianModel::new(FreeSpectrum::new(energies)?, terms)?)
}

/// The compact time-independent walk against the dense exponential and the
/// general engine, at `|V| t = 0.5`.
pub fn ti_suites(rng: &mut ChaCha8Rng) -> Result<[SuiteResult; 2], CliError> {
    let (mut to_exact, mut to_general): (f64, f64) = (0.0, 0.0);
    let models = 3;
    for _ in 0..models {
        let model = random_hermitian_ti_model(rng)?;
        let norm = model.eval_v(0.0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let t = 0.5 / norm;
        let z0 = rng.gen_range(0..model.dimension());
        let exact = mat_exp_evolve(&model, z0, t)?;
        let compact = evolve_ti(&model, z0, t, 16, Execution::Sequential)?;
        to_exact = to_exact.max(compact.max_abs_diff(&exact));
        let compact = evolve_ti(&model, z0, t, 10, Execution::Sequential)?;
        let general = evolve(&model, z0, t, 10, Picture::Schrodinger, Execution::Sequential)?;
        to_general = to_general.max(compact.max_abs_diff(&general));
    }
    Ok([
        SuiteResult { name: "ti-vs-dense-exponential", cases: models, max_error: to_exact, tolerance: 1e-8 },
        SuiteResult { name: "ti-vs-general-engine", cases: models, max_error: to_general, tolerance: 1e-12 },
    ])
}

pub fn run(args: &ValidateArgs) -> Result<(Table, bool), CliError> {
    let mut bridge_models = vec![
        (build_single_spin(SingleSpinParams { a: 1.0, b: 0.5, gamma: 0.2 })?, 6),
        (build_anharmonic(AnharmonicParams { omega: 1.0, drive: 2.0, gamma: 0.02, n_max: 20 })?, 3),
        (build_fermi(FermiParams { e_in: 0.3, e_fin: 1.1, drive: 0.5, gamma: 0.1 })?, 5),
    ];
    if let Some(name) = &args.model {
        bridge_models.push((load(name, &args.params, 0, 3)?.model, 3));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut suites = vec![simplex_suite(&mut rng)?, shift_suite(&mut rng)?, bridge_suite(&bridge_models, 0.7)?];
    suites.extend(ti_suites(&mut rng)?);

    let mut table = Table::new(vec!["suite", "cases", "max_error", "tolerance", "status"]);
    let mut all_passed = true;
    for suite in &suites {
        all_passed &= suite.passed();
        table.push(vec![
            Cell::from(suite.name),
            Cell::from(suite.cases),
            suite.max_error.into(),
            suite.tolerance.into(),
            Cell::from(if suite.passed() { "pass" } else { "fail" }),
        ]);
    }
    Ok((table, all_passed))
}
