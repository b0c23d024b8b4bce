//! Hamiltonians `H(t) = H_0 + V(t)` on a truncated computational basis.
//!
//! `H_0` is diagonal with energies `E_z`. The perturbation is a sum of
//! generalized permutation terms, each with `K` exponential-sum factors:
//!
//! ```text
//! V(t) = sum_i sum_k sum_z exp(i lambda_ik(z) t) d_ik(z) |P_i(z)><z|
//! ```
//!
//! Factor entries are indexed by the state a term acts on (the column `z`),
//! not by its image. A permutation may be partial: states whose image falls
//! outside the truncation have no image and their column is zero.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Computational basis label, `0 <= z < dimension`.
pub type BasisIndex = usize;

/// Diagonal of `H_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSpectrum {
    energies: Vec<f64>,
}

impl FreeSpectrum {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Model("free spectrum is empty".into()));
        }
        if let Some(z) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::Model(format!("energy of state {z} is not finite")));
        }
        Ok(Self { energies })
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn energy(&self, z: BasisIndex) -> f64 {
        self.energies[z]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// Injective, possibly partial, map of basis states onto basis states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationMap {
    mapping: Vec<Option<BasisIndex>>,
}

impl PermutationMap {
    pub fn identity(dimension: usize) -> Self {
        Self { mapping: (0..dimension).map(Some).collect() }
    }

    /// `|z> -> |z + offset>`, undefined where `z + offset` leaves `[0, dimension)`.
    pub fn shift(dimension: usize, offset: i64) -> Self {
        let mapping = (0..dimension)
            .map(|z| {
                let image = z as i64 + offset;
                (0..dimension as i64).contains(&image).then_some(image as usize)
            })
            .collect();
        Self { mapping }
    }

    /// Full swap of two states, identity elsewhere.
    pub fn swap(dimension: usize, a: BasisIndex, b: BasisIndex) -> Result<Self> {
        if a >= dimension || b >= dimension {
            return Err(Error::Model(format!("swap ({a}, {b}) outside dimension {dimension}")));
        }
        let mut mapping: Vec<_> = (0..dimension).map(Some).collect();
        mapping.swap(a, b);
        Ok(Self { mapping })
    }

    pub fn from_mapping(mapping: Vec<Option<BasisIndex>>) -> Result<Self> {
        let dimension = mapping.len();
        let mut seen = vec![None; dimension];
        for (z, image) in mapping.iter().enumerate() {
            let Some(image) = *image else { continue };
            if image >= dimension {
                return Err(Error::Model(format!("state {z} maps to {image}, outside dimension {dimension}")));
            }
            if let Some(other) = seen[image] {
                return Err(Error::Model(format!(
                    "mapping is not injective: states {other} and {z} both map to {image}"
                )));
            }
            seen[image] = Some(z);
        }
        Ok(Self { mapping })
    }

    pub fn dimension(&self) -> usize {
        self.mapping.len()
    }

    pub fn apply(&self, z: BasisIndex) -> Option<BasisIndex> {
        self.mapping.get(z).copied().flatten()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(z, &m)| m == Some(z))
    }

    pub fn mapping(&self) -> &[Option<BasisIndex>] {
        &self.mapping
    }
}

/// One term `exp(i Lambda t) D` of an exponential-sum decomposition, stored
/// as the diagonals `lambda(z)` and `d(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumFactor {
    lambda: Vec<C64>,
    d: Vec<C64>,
}

impl ExpSumFactor {
    pub fn new(lambda: Vec<C64>, d: Vec<C64>) -> Result<Self> {
        if lambda.len() != d.len() {
            return Err(Error::Model(format!("lambda has {} entries but d has {}", lambda.len(), d.len())));
        }
        if lambda.iter().chain(&d).any(|v| !v.is_finite()) {
            return Err(Error::Model("exponential-sum factor has non-finite entries".into()));
        }
        Ok(Self { lambda, d })
    }

    /// Same `lambda` and `d` for every state.
    pub fn uniform(dimension: usize, lambda: C64, d: C64) -> Result<Self> {
        Self::new(vec![lambda; dimension], vec![d; dimension])
    }

    pub fn lambda(&self, z: BasisIndex) -> C64 {
        self.lambda[z]
    }

    pub fn d(&self, z: BasisIndex) -> C64 {
        self.d[z]
    }

    pub fn lambdas(&self) -> &[C64] {
        &self.lambda
    }

    pub fn ds(&self) -> &[C64] {
        &self.d
    }

    pub fn dimension(&self) -> usize {
        self.d.len()
    }

    /// `exp(i lambda(z) t) d(z)`.
    pub fn weight(&self, z: BasisIndex, t: f64) -> C64 {
        (C64::new(0.0, t) * self.lambda[z]).exp() * self.d[z]
    }
}

/// Generalized permutation term `sum_k exp(i Lambda_k t) D_k P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub permutation: PermutationMap,
    pub factors: Vec<ExpSumFactor>,
    /// Display name, e.g. the shift of an oscillator term.
    pub label: Option<String>,
}

impl Term {
    pub fn new(permutation: PermutationMap, factors: Vec<ExpSumFactor>) -> Self {
        Self { permutation, factors, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// `H(t) = H_0 + V(t)`; immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianModel {
    spectrum: FreeSpectrum,
    terms: Vec<Term>,
}

impl HamiltonianModel {
    /// Validates that there is at least one term, every term has the same
    /// number `K >= 1` of factors, and all dimensions agree.
    pub fn new(spectrum: FreeSpectrum, terms: Vec<Term>) -> Result<Self> {
        let dimension = spectrum.dimension();
        let Some(first) = terms.first() else {
            return Err(Error::Model("model needs at least one perturbation term".into()));
        };
        let k = first.factors.len();
        if k == 0 {
            return Err(Error::Model("term 0 has no exponential-sum factors".into()));
        }
        for (i, term) in terms.iter().enumerate() {
            if term.permutation.dimension() != dimension {
                return Err(Error::Model(format!(
                    "term {i} permutation has dimension {}, spectrum has {dimension}",
                    term.permutation.dimension()
                )));
            }
            if term.factors.len() != k {
                return Err(Error::Model(format!(
                    "term {i} has {} factors; all terms must have {k}",
                    term.factors.len()
                )));
            }
            if let Some(f) = term.factors.iter().position(|f| f.dimension() != dimension) {
                return Err(Error::Model(format!(
                    "factor {f} of term {i} has dimension {}, spectrum has {dimension}",
                    term.factors[f].dimension()
                )));
            }
        }
        Ok(Self { spectrum, terms })
    }

    pub fn dimension(&self) -> usize {
        self.spectrum.dimension()
    }

    pub fn spectrum(&self) -> &FreeSpectrum {
        &self.spectrum
    }

    pub fn energy(&self, z: BasisIndex) -> f64 {
        self.spectrum.energy(z)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &Term {
        &self.terms[i]
    }

    /// `M`.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `K`.
    pub fn factors_per_term(&self) -> usize {
        self.terms[0].factors.len()
    }

    /// `K == 1` and every `lambda` vanishes.
    pub fn is_time_independent(&self) -> bool {
        self.factors_per_term() == 1
            && self.terms.iter().all(|term| term.factors[0].lambdas().iter().all(|l| *l == C64::new(0.0, 0.0)))
    }

    /// Dense `V(t)`.
    pub fn eval_v(&self, t: f64) -> DMatrix<C64> {
        let n = self.dimension();
        let mut v = DMatrix::zeros(n, n);
        for term in &self.terms {
            for z in 0..n {
                let Some(image) = term.permutation.apply(z) else { continue };
                for factor in &term.factors {
                    v[(image, z)] += factor.weight(z, t);
                }
            }
        }
        v
    }

    /// Dense `H(t) = diag(E) + V(t)`.
    pub fn eval_h(&self, t: f64) -> DMatrix<C64> {
        let mut h = self.eval_v(t);
        for (z, &e) in self.spectrum.energies().iter().enumerate() {
            h[(z, z)] += e;
        }
        h
    }

    /// `out = H(t) psi` without forming the matrix.
    pub fn apply_h(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        for (z, o) in out.iter_mut().enumerate() {
            *o = psi[z] * self.spectrum.energy(z);
        }
        for term in &self.terms {
            for (z, &amp) in psi.iter().enumerate() {
                let Some(image) = term.permutation.apply(z) else { continue };
                for factor in &term.factors {
                    out[image] += factor.weight(z, t) * amp;
                }
            }
        }
    }

    /// Basis trajectory `z, P_{i_1} z, P_{i_2} P_{i_1} z, ...` of a sequence of
    /// term indices (0-based into [`terms`](Self::terms)). `Ok(None)` when a
    /// step leaves the truncated basis.
    pub fn walk_path(&self, z: BasisIndex, path: &[usize]) -> Result<Option<Vec<BasisIndex>>> {
        self.check_state(z)?;
        let mut trajectory = Vec::with_capacity(path.len() + 1);
        trajectory.push(z);
        let mut current = z;
        for &i in path {
            let term = self.terms.get(i).ok_or_else(|| {
                Error::InvalidArgument(format!("term index {i} out of range (model has {} terms)", self.terms.len()))
            })?;
            match term.permutation.apply(current) {
                Some(next) => {
                    trajectory.push(next);
                    current = next;
                }
                None => return Ok(None),
            }
        }
        Ok(Some(trajectory))
    }

    /// Free energies `E_{z_j}` along a trajectory.
    pub fn path_energies(&self, trajectory: &[BasisIndex]) -> Vec<f64> {
        trajectory.iter().map(|&z| self.spectrum.energy(z)).collect()
    }

    pub(crate) fn check_state(&self, z: BasisIndex) -> Result<()> {
        if z < self.dimension() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("basis state {z} outside dimension {}", self.dimension())))
        }
    }
}
