//! The evolve, infidelity-sweep and amplitude commands.

use std::fs;

use dyson_dd::dd::{exp_dd, DdInputs};
use dyson_dd::dyson::{amplitude_by_order, expand};
use dyson_dd::models::{
    build_anharmonic, build_fermi, build_single_spin, load_model, AnharmonicParams, FermiParams, SingleSpinParams,
};
use dyson_dd::oracles::{infidelity, ode_evolve};
use dyson_dd::{Execution, HamiltonianModel, Picture, C64};

use crate::args::{
    parse_orders, parse_params, parse_times, AmplitudeArgs, EvolveArgs, ModelArgs, OutputArgs, SweepArgs,
};
use crate::error::CliError;
use crate::table::{Cell, Table};

/// Tolerance of every ODE reference solution the CLI computes.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// Probabilities above this are flagged on standard error.
const PROBABILITY_LIMIT: f64 = 1.0 + 1e-6;

pub struct LoadedModel {
    pub model: HamiltonianModel,
    /// Set for the built-in two-level transition model.
    pub fermi: Option<FermiParams>,
}

/// Parameters with their defaults; unknown keys are a configuration error.
struct Params {
    given: Vec<(String, f64)>,
}

impl Params {
    fn new(given: Vec<(String, f64)>, known: &[&str], model: &str) -> Result<Self, CliError> {
        if let Some((key, _)) = given.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(CliError::Config(format!(
                "unknown parameter '{key}' for model '{model}' (known: {})",
                known.join(", ")
            )));
        }
        Ok(Self { given })
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.given.iter().rev().find(|(k, _)| k == key).map_or(default, |(_, v)| *v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        let value = self.get(key, default as f64);
        if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(CliError::Config(format!("parameter '{key}' = {value} must be a non-negative integer")))
        }
    }
}

/// Resolve `--model`: a built-in name or a JSON file. `reach` is the highest
/// basis state and `max_order` the highest order the command will use; they
/// size the default oscillator truncation.
pub fn load(name: &str, params: &[String], reach: usize, max_order: usize) -> Result<LoadedModel, CliError> {
    let given = parse_params(params)?;
    match name {
        "single-spin" => {
            let p = Params::new(given, &["a", "b", "gamma"], name)?;
            let model = build_single_spin(SingleSpinParams {
                a: p.get("a", 1.0),
                b: p.get("b", 0.5),
                gamma: p.get("gamma", 0.2),
            })?;
            Ok(LoadedModel { model, fermi: None })
        }
        "anharmonic" => {
            let p = Params::new(given, &["omega", "drive", "gamma", "n_max"], name)?;
            let model = build_anharmonic(AnharmonicParams {
                omega: p.get("omega", 1.0),
                drive: p.get("drive", 2.0),
                gamma: p.get("gamma", 0.02),
                n_max: p.count("n_max", AnharmonicParams::default_truncation(reach, max_order))?,
            })?;
            Ok(LoadedModel { model, fermi: None })
        }
        "fermi" => {
            let p = Params::new(given, &["e_in", "e_fin", "drive", "gamma"], name)?;
            let params = FermiParams {
                e_in: p.get("e_in", 0.3),
                e_fin: p.get("e_fin", 1.1),
                drive: p.get("drive", 0.5),
                gamma: p.get("gamma", 0.1),
            };
            Ok(LoadedModel { model: build_fermi(params)?, fermi: Some(params) })
        }
        path => {
            if !given.is_empty() {
                return Err(CliError::Config("--param only applies to built-in models".into()));
            }
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!(
                    "'{path}' is neither a built-in model (single-spin, anharmonic, fermi) nor a readable file: {e}"
                ))
            })?;
            Ok(LoadedModel { model: load_model(&text)?, fermi: None })
        }
    }
}

fn load_for(args: &ModelArgs, reach: usize, max_order: usize) -> Result<LoadedModel, CliError> {
    load(&args.model, &args.params, reach, max_order)
}

fn execution(output: &OutputArgs) -> Execution {
    if output.parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn check_state(model: &HamiltonianModel, z: usize, flag: &str) -> Result<(), CliError> {
    if z < model.dimension() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{flag} {z} is outside the basis of dimension {}", model.dimension())))
    }
}

/// Columns `t, Q, z, re, im, prob`, plus `ode_re, ode_im, ode_prob` with
/// `--oracle`. Only states with a nonzero amplitude are listed.
pub fn evolve(args: &EvolveArgs) -> Result<Table, CliError> {
    let times = parse_times(&args.t)?;
    let orders = parse_orders(&args.q)?;
    let max_order = *orders.last().expect("order list is never empty");
    let loaded = load_for(&args.model, args.z0, max_order)?;
    let model = &loaded.model;
    check_state(model, args.z0, "--z0")?;

    let mut headers = vec!["t", "Q", "z", "re", "im", "prob"];
    if args.oracle {
        headers.extend(["ode_re", "ode_im", "ode_prob"]);
    }
    let mut table = Table::new(headers);
    for &t in &times {
        let expansion = expand(model, args.z0, t, max_order, Picture::Schrodinger, execution(&args.output))?;
        let reference = if args.oracle { Some(ode_evolve(model, args.z0, t, ORACLE_TOLERANCE)?.state) } else { None };
        for &q in &orders {
            let state = expansion.partial_state(q);
            for z in 0..model.dimension() {
                let a = state.amplitude(z);
                let exact = reference.as_ref().map(|r| r.amplitude(z));
                let zero = C64::new(0.0, 0.0);
                if a == zero && exact.is_none_or(|e| e == zero) {
                    continue;
                }
                let prob = a.norm_sqr();
                if prob > PROBABILITY_LIMIT {
                    eprintln!("warning: probability {prob} at t={t}, Q={q}, z={z} exceeds 1 + 1e-6");
                }
                let mut row = vec![Cell::from(t), Cell::from(q), Cell::from(z), a.re.into(), a.im.into(), prob.into()];
                if let Some(e) = exact {
                    row.extend([e.re.into(), e.im.into(), e.norm_sqr().into()]);
                }
                table.push(row);
            }
        }
    }
    Ok(table)
}

/// Columns `t, Q, infidelity` against the ODE oracle.
pub fn infidelity_sweep(args: &SweepArgs) -> Result<Table, CliError> {
    let times = parse_times(&args.t)?;
    let orders = parse_orders(&args.q)?;
    let max_order = *orders.last().expect("order list is never empty");
    let loaded = load_for(&args.model, args.z0, max_order)?;
    let model = &loaded.model;
    check_state(model, args.z0, "--z0")?;

    let mut table = Table::new(vec!["t", "Q", "infidelity"]);
    for &t in &times {
        let exact = ode_evolve(model, args.z0, t, ORACLE_TOLERANCE)?.state;
        let expansion = expand(model, args.z0, t, max_order, Picture::Schrodinger, execution(&args.output))?;
        for &q in &orders {
            let value = infidelity(&exact, &expansion.partial_state(q))?;
            table.push(vec![Cell::from(t), Cell::from(q), value.into()]);
        }
    }
    Ok(table)
}

/// `gamma^q exp(-i t [E_in + qE, E_fin + (q-1)E, .., E_in + E, E_fin])` for
/// odd `q`, the closed form of the transition model's order-`q` amplitude.
pub fn fermi_closed_form(params: &FermiParams, t: f64, q: usize) -> Option<C64> {
    if q.is_multiple_of(2) {
        return None;
    }
    let nodes: Vec<f64> = (0..=q)
        .map(|j| {
            let base = if j % 2 == 0 { params.e_in } else { params.e_fin };
            base + (q - j) as f64 * params.drive
        })
        .collect();
    let value = exp_dd(t, &DdInputs::from_real(&nodes).ok()?).ok()?;
    Some(params.gamma.powi(q as i32) * value)
}

/// Columns `t, order, re, im, cum_re, cum_im, closed_re, closed_im`; the
/// closed form is filled for the built-in transition model only.
pub fn amplitude(args: &AmplitudeArgs) -> Result<Table, CliError> {
    let times = parse_times(&args.t)?;
    let max_order = *parse_orders(&args.q)?.last().expect("order list is never empty");
    let loaded = load_for(&args.model, args.zin.max(args.zfin), max_order)?;
    let model = &loaded.model;
    check_state(model, args.zin, "--zin")?;
    check_state(model, args.zfin, "--zfin")?;
    let closed_params = loaded.fermi.filter(|_| args.zin == FermiParams::Z_IN && args.zfin == FermiParams::Z_FIN);

    let mut table = Table::new(vec!["t", "order", "re", "im", "cum_re", "cum_im", "closed_re", "closed_im"]);
    for &t in &times {
        let by_order = amplitude_by_order(model, args.zin, args.zfin, t, max_order)?;
        let mut total = C64::new(0.0, 0.0);
        for (q, a) in by_order.iter().enumerate() {
            total += a;
            let closed = closed_params.as_ref().and_then(|p| fermi_closed_form(p, t, q));
            table.push(vec![
                Cell::from(t),
                Cell::from(q),
                a.re.into(),
                a.im.into(),
                total.re.into(),
                total.im.into(),
                closed.map(|c| c.re).into(),
                closed.map(|c| c.im).into(),
            ]);
        }
    }
    Ok(table)
}
