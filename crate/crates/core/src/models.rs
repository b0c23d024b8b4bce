//! Built-in Hamiltonians and the config-driven loader.

use num_complex::Complex64 as C64;

use crate::config;
use crate::error::{Error, Result};
use crate::model::{ExpSumFactor, FreeSpectrum, HamiltonianModel, PermutationMap, Term};

/// `H(t) = a Z + b exp(-gamma t) X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleSpinParams {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

/// `H(t) = omega (a^dag a + 1/2) + gamma sum_{k=+-1} exp(-i k Omega t) (a^dag + a)^4`
/// on the Fock states `0..n_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnharmonicParams {
    pub omega: f64,
    /// Drive frequency `Omega`.
    pub drive: f64,
    /// Weight of each of the two drive phases.
    pub gamma: f64,
    /// Number of Fock states kept.
    pub n_max: usize,
}

impl AnharmonicParams {
    /// Fock states needed so that no path of order `<= max_order` from `n0`
    /// is clipped (each step moves at most four levels).
    pub fn default_truncation(n0: usize, max_order: usize) -> usize {
        n0 + 4 * max_order + 4
    }
}

/// `H = diag(E_in, E_fin) + gamma X exp(-i E t)` on the two states
/// `z_in = 0`, `z_fin = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermiParams {
    pub e_in: f64,
    pub e_fin: f64,
    /// Drive energy `E`.
    pub drive: f64,
    pub gamma: f64,
}

impl FermiParams {
    pub const Z_IN: usize = 0;
    pub const Z_FIN: usize = 1;
}

fn finite(values: &[(&str, f64)]) -> Result<()> {
    match values.iter().find(|(_, v)| !v.is_finite()) {
        Some((name, v)) => Err(Error::InvalidArgument(format!("{name} = {v} is not finite"))),
        None => Ok(()),
    }
}

pub fn build_single_spin(params: SingleSpinParams) -> Result<HamiltonianModel> {
    let SingleSpinParams { a, b, gamma } = params;
    finite(&[("a", a), ("b", b), ("gamma", gamma)])?;
    if gamma < 0.0 {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be >= 0")));
    }
    let spectrum = FreeSpectrum::new(vec![a, -a])?;
    // exp(i lambda t) = exp(-gamma t)
    let factor = ExpSumFactor::uniform(2, C64::new(0.0, gamma), C64::new(b, 0.0))?;
    let flip = PermutationMap::swap(2, 0, 1)?;
    HamiltonianModel::new(spectrum, vec![Term::new(flip, vec![factor]).with_label("X")])
}

/// Diagonal of `D_i`, where `(a^dag + a)^4 = sum_i D_i P_i`, at source state `n`.
pub fn quartic_weight(shift: i64, n: usize) -> f64 {
    let n = n as f64;
    match shift {
        -4 => (n * (n - 1.0) * (n - 2.0) * (n - 3.0)).max(0.0).sqrt(),
        -2 => (n * (n - 1.0)).max(0.0).sqrt() * (4.0 * n - 2.0),
        0 => 3.0 * (2.0 * n * n + 2.0 * n + 1.0),
        2 => ((n + 1.0) * (n + 2.0)).sqrt() * (4.0 * n + 6.0),
        4 => ((n + 1.0) * (n + 2.0) * (n + 3.0) * (n + 4.0)).sqrt(),
        _ => 0.0,
    }
}

/// Term order of the oscillator model.
pub const ANHARMONIC_SHIFTS: [i64; 5] = [-4, -2, 0, 2, 4];

pub fn build_anharmonic(params: AnharmonicParams) -> Result<HamiltonianModel> {
    let AnharmonicParams { omega, drive, gamma, n_max } = params;
    finite(&[("omega", omega), ("drive", drive), ("gamma", gamma)])?;
    if omega <= 0.0 {
        return Err(Error::InvalidArgument(format!("omega = {omega} must be > 0")));
    }
    if n_max < 5 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} is too small; the shift-4 term needs at least 5 states"
        )));
    }
    let energies = (0..n_max).map(|n| omega * (n as f64 + 0.5)).collect();
    let spectrum = FreeSpectrum::new(energies)?;

    let terms = ANHARMONIC_SHIFTS
        .iter()
        .map(|&shift| {
            let permutation = PermutationMap::shift(n_max, shift);
            let d: Vec<C64> = (0..n_max)
                .map(|n| match permutation.apply(n) {
                    Some(_) => C64::new(gamma * quartic_weight(shift, n), 0.0),
                    None => C64::new(0.0, 0.0),
                })
                .collect();
            // exp(-i k Omega t) for k = +1, -1, i.e. lambda = -k Omega
            let factors = [1.0, -1.0]
                .iter()
                .map(|k| ExpSumFactor::new(vec![C64::new(-k * drive, 0.0); n_max], d.clone()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Term::new(permutation, factors).with_label(shift.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    HamiltonianModel::new(spectrum, terms)
}

pub fn build_fermi(params: FermiParams) -> Result<HamiltonianModel> {
    let FermiParams { e_in, e_fin, drive, gamma } = params;
    finite(&[("e_in", e_in), ("e_fin", e_fin), ("drive", drive), ("gamma", gamma)])?;
    let spectrum = FreeSpectrum::new(vec![e_in, e_fin])?;
    // exp(i lambda t) = exp(-i E t)
    let factor = ExpSumFactor::uniform(2, C64::new(-drive, 0.0), C64::new(gamma, 0.0))?;
    let flip = PermutationMap::swap(2, FermiParams::Z_IN, FermiParams::Z_FIN)?;
    HamiltonianModel::new(spectrum, vec![Term::new(flip, vec![factor]).with_label("F")])
}

/// Parse and validate a JSON model description (see [`crate::config`]).
pub fn load_model(text: &str) -> Result<HamiltonianModel> {
    config::parse_model(text)
}
