//! Integral-free Dyson expansion.
//!
//! A path of order `q` picks a term `i_j` and a factor `k_j` for each step
//! `j = 1..q`, starting from a basis state `z`. Its contribution to
//! `U(t)|z>` is
//!
//! ```text
//! beta  = d * exp(-i t [y_0, .., y_q]),     y_j = E_j - sum_{l>j} lambda_l
//! alpha = d * exp(-i t [x_0, .., x_{q-1}, 0]), x_j = y_j - E_q
//! ```
//!
//! where `E_j` is the free energy of the `j`-th state on the trajectory,
//! `lambda_l`, `d_l` are the factor entries of step `l` at the state it acts
//! on, and `d` is the product of the `d_l`. `alpha` builds the
//! interaction-picture operator, `beta = alpha * exp(-i t E_q)` the
//! Schrodinger-picture one.
//!
//! Paths are enumerated depth first; steps that leave the truncated basis or
//! carry a zero weight are pruned together with everything below them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dd::{exp_dd, DdInputs, PrefixKernel};
use crate::error::{Error, Result};
use crate::model::{BasisIndex, HamiltonianModel};
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Picture {
    Interaction,
    Schrodinger,
}

/// Sequential evaluation is deterministic; parallel evaluation splits the
/// path tree below the first step and may reorder floating-point sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// A multi-index `(i_1, k_1), .., (i_q, k_q)` together with its trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    terms: Vec<usize>,
    factors: Vec<usize>,
    trajectory: Vec<BasisIndex>,
}

impl Path {
    /// Order-zero path at `z`.
    pub fn empty(z: BasisIndex) -> Self {
        Self { terms: Vec::new(), factors: Vec::new(), trajectory: vec![z] }
    }

    /// Validates indices and walks the trajectory; `Ok(None)` when the path
    /// leaves the truncated basis.
    pub fn new(
        model: &HamiltonianModel,
        z: BasisIndex,
        terms: Vec<usize>,
        factors: Vec<usize>,
    ) -> Result<Option<Self>> {
        if terms.len() != factors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} term indices but {} factor indices",
                terms.len(),
                factors.len()
            )));
        }
        let k = model.factors_per_term();
        if let Some(&bad) = factors.iter().find(|&&f| f >= k) {
            return Err(Error::InvalidArgument(format!("factor index {bad} out of range (K = {k})")));
        }
        Ok(model.walk_path(z, &terms)?.map(|trajectory| Self { terms, factors, trajectory }))
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[usize] {
        &self.terms
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn trajectory(&self) -> &[BasisIndex] {
        &self.trajectory
    }

    pub fn origin(&self) -> BasisIndex {
        self.trajectory[0]
    }

    pub fn endpoint(&self) -> BasisIndex {
        *self.trajectory.last().expect("trajectory is never empty")
    }

    fn push(&mut self, term: usize, factor: usize, next: BasisIndex) {
        self.terms.push(term);
        self.factors.push(factor);
        self.trajectory.push(next);
    }

    fn pop(&mut self) {
        self.terms.pop();
        self.factors.pop();
        self.trajectory.pop();
    }

    /// `lambda` of each step, taken at the state the step acts on.
    fn step_lambdas<'a>(&'a self, model: &'a HamiltonianModel) -> impl Iterator<Item = C64> + 'a {
        (0..self.order()).map(move |j| model.term(self.terms[j]).factors[self.factors[j]].lambda(self.trajectory[j]))
    }
}

/// Coefficient of `P_{i_q}|z><z|`, summed over the factor choices `k_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCoefficient {
    pub value: C64,
    pub order: usize,
    pub terms: Vec<usize>,
    pub origin: BasisIndex,
    pub endpoint: BasisIndex,
    pub picture: Picture,
}

/// `x_0, .., x_{q-1}, 0` of an order `q >= 1` path.
pub fn x_inputs(model: &HamiltonianModel, path: &Path) -> Result<DdInputs> {
    if path.order() == 0 {
        return Err(Error::InvalidArgument("x inputs need a path of order >= 1".into()));
    }
    let e_last = model.energy(path.endpoint());
    let mut nodes = y_nodes(model, path);
    for x in nodes.iter_mut() {
        *x -= e_last;
    }
    let q = path.order();
    nodes[q] = C64::new(0.0, 0.0);
    DdInputs::new(nodes)
}

/// `y_0, .., y_q` of a path (just `[E_z]` at order zero).
pub fn y_inputs(model: &HamiltonianModel, path: &Path) -> Result<DdInputs> {
    DdInputs::new(y_nodes(model, path))
}

fn y_nodes(model: &HamiltonianModel, path: &Path) -> Vec<C64> {
    let q = path.order();
    let lambdas: Vec<C64> = path.step_lambdas(model).collect();
    let mut nodes = vec![C64::new(0.0, 0.0); q + 1];
    let mut tail = C64::new(0.0, 0.0);
    for j in (0..=q).rev() {
        nodes[j] = model.energy(path.trajectory()[j]) - tail;
        if j > 0 {
            tail += lambdas[j - 1];
        }
    }
    nodes
}

/// Product of the step weights `d`.
pub fn d_product(model: &HamiltonianModel, path: &Path) -> C64 {
    (0..path.order()).map(|j| model.term(path.terms[j]).factors[path.factors[j]].d(path.trajectory[j])).product()
}

/// Interaction-picture coefficient of a single `(i_q, k_q)`.
pub fn alpha(model: &HamiltonianModel, path: &Path, t: f64) -> Result<C64> {
    if path.order() == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(d_product(model, path) * exp_dd(t, &x_inputs(model, path)?)?)
}

/// Schrodinger-picture coefficient of a single `(i_q, k_q)`.
pub fn beta(model: &HamiltonianModel, path: &Path, t: f64) -> Result<C64> {
    if path.order() == 0 {
        return Ok((C64::new(0.0, -t) * model.energy(path.origin())).exp());
    }
    Ok(d_product(model, path) * exp_dd(t, &y_inputs(model, path)?)?)
}

pub fn coefficient(model: &HamiltonianModel, path: &Path, t: f64, picture: Picture) -> Result<C64> {
    match picture {
        Picture::Interaction => alpha(model, path, t),
        Picture::Schrodinger => beta(model, path, t),
    }
}

/// `sum_{q=0}^{Q} (M K)^q`, the number of paths before pruning.
pub fn path_count_bound(model: &HamiltonianModel, max_order: usize) -> Result<u64> {
    let branching = (model.num_terms() * model.factors_per_term()) as u64;
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for q in 0..=max_order {
        total = total.checked_add(level).ok_or_else(|| capacity(model, max_order))?;
        if q < max_order {
            level = level.checked_mul(branching).ok_or_else(|| capacity(model, max_order))?;
        }
    }
    Ok(total)
}

fn capacity(model: &HamiltonianModel, max_order: usize) -> Error {
    Error::Capacity(format!(
        "(M K)^Q = ({} * {})^{max_order} paths overflow a 64-bit counter",
        model.num_terms(),
        model.factors_per_term()
    ))
}

/// Depth-first stream of every non-vanishing path of order `<= max_order`
/// starting at `z`, in lexicographic `(i, k)` order.
pub fn enumerate_paths(model: &HamiltonianModel, z: BasisIndex, max_order: usize) -> Result<PathIter<'_>> {
    model.check_state(z)?;
    path_count_bound(model, max_order)?;
    Ok(PathIter::subtree(model, Path::empty(z), max_order))
}

pub struct PathIter<'a> {
    model: &'a HamiltonianModel,
    max_order: usize,
    floor: usize,
    path: Path,
    /// next flat choice `term * K + factor` to try at each depth
    cursor: Vec<usize>,
    root_pending: bool,
}

impl<'a> PathIter<'a> {
    /// `root` itself followed by all its extensions.
    fn subtree(model: &'a HamiltonianModel, root: Path, max_order: usize) -> Self {
        let floor = root.order();
        Self { model, max_order, floor, path: root, cursor: vec![0], root_pending: true }
    }
}

impl Iterator for PathIter<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        if self.root_pending {
            self.root_pending = false;
            return Some(self.path.clone());
        }
        let k = self.model.factors_per_term();
        let choices = self.model.num_terms() * k;
        loop {
            let depth = self.cursor.len() - 1;
            let order = self.floor + depth;
            let next_choice = self.cursor[depth];
            if order >= self.max_order || next_choice >= choices {
                if depth == 0 {
                    return None;
                }
                self.cursor.pop();
                self.path.pop();
                continue;
            }
            self.cursor[depth] += 1;
            let (term, factor) = (next_choice / k, next_choice % k);
            let current = self.path.endpoint();
            let t = self.model.term(term);
            let Some(next) = t.permutation.apply(current) else { continue };
            if t.factors[factor].d(current) == C64::new(0.0, 0.0) {
                continue;
            }
            self.path.push(term, factor, next);
            self.cursor.push(0);
            return Some(self.path.clone());
        }
    }
}

/// Per-order amplitudes of `U(t)|z0>` (or `U_I(t)|z0>`).
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub t: f64,
    pub picture: Picture,
    /// `orders[q][z]`: summed contribution of all order-`q` paths ending at `z`
    pub orders: Vec<Vec<C64>>,
    pub paths_per_order: Vec<u64>,
}

impl Expansion {
    fn zeros(t: f64, picture: Picture, dimension: usize, max_order: usize) -> Self {
        Self {
            t,
            picture,
            orders: vec![vec![C64::new(0.0, 0.0); dimension]; max_order + 1],
            paths_per_order: vec![0; max_order + 1],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (mine, theirs) in self.orders.iter_mut().zip(other.orders) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        for (a, b) in self.paths_per_order.iter_mut().zip(other.paths_per_order) {
            *a += b;
        }
        self
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn total_paths(&self) -> u64 {
        self.paths_per_order.iter().sum()
    }

    /// State truncated at order `upto`.
    pub fn partial_state(&self, upto: usize) -> StateVector {
        let dimension = self.orders[0].len();
        let mut amplitudes = vec![C64::new(0.0, 0.0); dimension];
        for order in self.orders.iter().take(upto + 1) {
            for (a, b) in amplitudes.iter_mut().zip(order) {
                *a += b;
            }
        }
        StateVector::new(self.t, amplitudes)
    }

    pub fn state(&self) -> StateVector {
        self.partial_state(self.max_order())
    }
}

/// Contributions of every path up to `max_order`, grouped by order.
pub fn expand(
    model: &HamiltonianModel,
    z0: BasisIndex,
    t: f64,
    max_order: usize,
    picture: Picture,
    execution: Execution,
) -> Result<Expansion> {
    check_time(t)?;
    let paths = enumerate_paths(model, z0, max_order)?;
    let dimension = model.dimension();
    let accumulate = |mut acc: Expansion, path: Path| -> Result<Expansion> {
        let value = coefficient(model, &path, t, picture)?;
        acc.orders[path.order()][path.endpoint()] += value;
        acc.paths_per_order[path.order()] += 1;
        Ok(acc)
    };

    match execution {
        Execution::Sequential => {
            paths.into_iter().try_fold(Expansion::zeros(t, picture, dimension, max_order), accumulate)
        }
        Execution::Parallel => {
            let root = Path::empty(z0);
            let first_steps: Vec<Path> =
                if max_order == 0 { Vec::new() } else { enumerate_paths(model, z0, 1)?.skip(1).collect() };
            let head = accumulate(Expansion::zeros(t, picture, dimension, max_order), root)?;
            first_steps
                .into_par_iter()
                .map(|step| {
                    PathIter::subtree(model, step, max_order)
                        .try_fold(Expansion::zeros(t, picture, dimension, max_order), accumulate)
                })
                .try_reduce(|| Expansion::zeros(t, picture, dimension, max_order), |a, b| Ok(a.merge(b)))
                .map(|tail| head.merge(tail))
        }
    }
}

/// `U_Q(t)|z0>` in the Schrodinger picture or `U_{I,Q}(t)|z0>` in the
/// interaction picture.
pub fn evolve(
    model: &HamiltonianModel,
    z0: BasisIndex,
    t: f64,
    max_order: usize,
    picture: Picture,
    execution: Execution,
) -> Result<StateVector> {
    expand(model, z0, t, max_order, picture, execution).map(|e| e.state())
}

/// Coefficients `alpha` or `beta` of each `i_q` (summed over `k_q`), ordered
/// by order and then by term sequence.
pub fn coefficients(
    model: &HamiltonianModel,
    z: BasisIndex,
    t: f64,
    max_order: usize,
    picture: Picture,
) -> Result<Vec<ExpansionCoefficient>> {
    check_time(t)?;
    let mut grouped: BTreeMap<(usize, Vec<usize>), ExpansionCoefficient> = BTreeMap::new();
    for path in enumerate_paths(model, z, max_order)? {
        let value = coefficient(model, &path, t, picture)?;
        grouped
            .entry((path.order(), path.terms().to_vec()))
            .or_insert_with(|| ExpansionCoefficient {
                value: C64::new(0.0, 0.0),
                order: path.order(),
                terms: path.terms().to_vec(),
                origin: path.origin(),
                endpoint: path.endpoint(),
                picture,
            })
            .value += value;
    }
    Ok(grouped.into_values().collect())
}

/// Order-by-order contributions to `<z_fin|U(t)|z_in>`.
pub fn amplitude_by_order(
    model: &HamiltonianModel,
    z_in: BasisIndex,
    z_fin: BasisIndex,
    t: f64,
    max_order: usize,
) -> Result<Vec<C64>> {
    model.check_state(z_fin)?;
    let expansion = expand(model, z_in, t, max_order, Picture::Schrodinger, Execution::Sequential)?;
    Ok(expansion.orders.iter().map(|order| order[z_fin]).collect())
}

/// `<z_fin|U_Q(t)|z_in>`.
pub fn transition_amplitude(
    model: &HamiltonianModel,
    z_in: BasisIndex,
    z_fin: BasisIndex,
    t: f64,
    max_order: usize,
) -> Result<C64> {
    Ok(amplitude_by_order(model, z_in, z_fin, t, max_order)?.into_iter().sum())
}

/// Schrodinger-picture `U_Q(t)|z0>` for a time-independent model, with
/// coefficients `D exp(-i t [E_0, .., E_q])` and no factor choices.
pub fn evolve_ti(
    model: &HamiltonianModel,
    z0: BasisIndex,
    t: f64,
    max_order: usize,
    execution: Execution,
) -> Result<StateVector> {
    if !model.is_time_independent() {
        return Err(Error::InvalidArgument("time-independent evolution needs K = 1 and lambda = 0".into()));
    }
    check_time(t)?;
    model.check_state(z0)?;
    path_count_bound(model, max_order)?;

    let dimension = model.dimension();
    let root = TiWalk::new(model, z0, t, max_order);
    let amplitudes = match execution {
        Execution::Sequential => {
            let mut walk = root;
            walk.descend()?;
            walk.amplitudes
        }
        Execution::Parallel => {
            let mut head = vec![C64::new(0.0, 0.0); dimension];
            head[z0] = (C64::new(0.0, -t) * model.energy(z0)).exp();
            let branches: Vec<usize> = if max_order == 0 { Vec::new() } else { (0..model.num_terms()).collect() };
            let tails = branches
                .into_par_iter()
                .map(|term| {
                    let mut walk = TiWalk::new(model, z0, t, max_order);
                    walk.step(term)?;
                    Ok(walk.amplitudes)
                })
                .collect::<Result<Vec<_>>>()?;
            for tail in tails {
                for (a, b) in head.iter_mut().zip(tail) {
                    *a += b;
                }
            }
            head
        }
    };
    Ok(StateVector::new(t, amplitudes))
}

/// Divided differences along the walk: incremental when the spectrum fits in
/// one time slice, fresh evaluations otherwise.
enum TiNodes {
    Prefix(PrefixKernel),
    Fresh(Vec<C64>),
}

impl TiNodes {
    fn new(model: &HamiltonianModel, t: f64, max_order: usize) -> Self {
        let energies = model.spectrum().energies();
        let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match PrefixKernel::new(t, lo, hi, max_order + 1) {
            Some(kernel) => TiNodes::Prefix(kernel),
            None => TiNodes::Fresh(Vec::with_capacity(max_order + 1)),
        }
    }

    fn push(&mut self, energy: f64) {
        match self {
            TiNodes::Prefix(kernel) => kernel.push(energy),
            TiNodes::Fresh(nodes) => nodes.push(C64::new(energy, 0.0)),
        }
    }

    fn pop(&mut self) {
        match self {
            TiNodes::Prefix(kernel) => kernel.pop(),
            TiNodes::Fresh(nodes) => {
                nodes.pop();
            }
        }
    }

    fn value(&self, t: f64) -> Result<C64> {
        match self {
            TiNodes::Prefix(kernel) => Ok(kernel.value()),
            TiNodes::Fresh(nodes) => exp_dd(t, &DdInputs::new(nodes.clone())?),
        }
    }
}

struct TiWalk<'a> {
    model: &'a HamiltonianModel,
    t: f64,
    max_order: usize,
    nodes: TiNodes,
    weights: Vec<C64>,
    states: Vec<BasisIndex>,
    amplitudes: Vec<C64>,
}

impl<'a> TiWalk<'a> {
    fn new(model: &'a HamiltonianModel, z0: BasisIndex, t: f64, max_order: usize) -> Self {
        let mut nodes = TiNodes::new(model, t, max_order);
        nodes.push(model.energy(z0));
        Self {
            model,
            t,
            max_order,
            nodes,
            weights: vec![C64::new(1.0, 0.0)],
            states: vec![z0],
            amplitudes: vec![C64::new(0.0, 0.0); model.dimension()],
        }
    }

    /// Record the current node and recurse into every child.
    fn descend(&mut self) -> Result<()> {
        let z = *self.states.last().expect("walk is never empty");
        let weight = *self.weights.last().expect("walk is never empty");
        self.amplitudes[z] += weight * self.nodes.value(self.t)?;
        if self.states.len() <= self.max_order {
            for term in 0..self.model.num_terms() {
                self.step(term)?;
            }
        }
        Ok(())
    }

    fn step(&mut self, term: usize) -> Result<()> {
        let z = *self.states.last().expect("walk is never empty");
        let t = self.model.term(term);
        let Some(next) = t.permutation.apply(z) else { return Ok(()) };
        let d = t.factors[0].d(z);
        if d == C64::new(0.0, 0.0) {
            return Ok(());
        }
        let weight = *self.weights.last().expect("walk is never empty") * d;
        self.nodes.push(self.model.energy(next));
        self.weights.push(weight);
        self.states.push(next);
        let result = self.descend();
        self.nodes.pop();
        self.weights.pop();
        self.states.pop();
        result
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time {t} is not finite")))
    }
}
