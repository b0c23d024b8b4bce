//! Divided differences of the exponential `x -> exp(-i t x)`.
//!
//! The production path ([`exp_dd`]) never divides by node differences. For
//! a short time slice `h` the divided differences of `exp(-i h x)` are a
//! Taylor series whose terms `(x^k)[x_i..x_j]` are complete homogeneous
//! symmetric polynomials of the nodes, built by a two-term recurrence. When
//! one slice covers `t` only the top entry is formed, at `O(q)` cost per
//! Taylor term; otherwise the whole slice table is built and the first row is
//! advanced slice by slice with the Leibniz product rule
//!
//! ```text
//! (f g)[x_0..x_j] = sum_k f[x_0..x_k] g[x_k..x_j]
//! ```
//!
//! Nodes are first centred (the exponential factors out of a uniform shift),
//! and the slice count is the smallest power of two with
//! `|h| * max_j |x_j - c| <= SLICE_RADIUS`. Coincident and clustered nodes
//! need no special casing.
//!
//! The rounding error of any forward propagation is of order
//! `eps * |t|^q / q!`, while oscillating nodes can make the result many
//! orders of magnitude smaller than that. The table and the propagation are
//! therefore carried in double-double arithmetic and rounded once at the end.
//!
//! [`dd_recursive`] is the textbook recursion, kept as a cross-check.

mod twofold;

use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use twofold::{CTwofold, Twofold};

/// Bound on `|h| * max|x_j - c|` for a single time slice.
const SLICE_RADIUS: f64 = 4.0;

/// Relative threshold below which two nodes count as coincident for
/// [`dd_recursive`].
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Multiset of (complex) nodes for a divided difference.
///
/// Always nonempty with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DdInputs {
    nodes: Vec<C64>,
}

impl DdInputs {
    pub fn new(nodes: Vec<C64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("divided difference needs at least one node".into()));
        }
        if let Some(j) = nodes.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(format!("node {j} is not finite ({})", nodes[j])));
        }
        Ok(Self { nodes })
    }

    pub fn from_real(nodes: &[f64]) -> Result<Self> {
        Self::new(nodes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Divided-difference order `q`, i.e. the number of nodes minus one.
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn into_nodes(self) -> Vec<C64> {
        self.nodes
    }
}

/// Function whose divided differences a [`DdTable`] holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DdFunction {
    /// `exp(-i t x)`.
    Exp { t: f64 },
    /// Arbitrary function given by its samples at the nodes.
    Sampled,
}

/// Triangular table with `get(i, j) = f[x_i, ..., x_j]` for `i <= j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DdTable {
    n: usize,
    entries: Vec<C64>,
    function: DdFunction,
}

impl DdTable {
    fn zeros(n: usize, function: DdFunction) -> Self {
        Self { n, entries: vec![C64::new(0.0, 0.0); n * n], function }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn function(&self) -> DdFunction {
        self.function
    }

    /// `f[x_i, ..., x_j]`. Panics unless `i <= j < size()`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        assert!(i <= j && j < self.n, "table index ({i}, {j}) out of range");
        self.entries[i * self.n + j]
    }

    /// The full-order entry `f[x_0, ..., x_q]`.
    pub fn top(&self) -> C64 {
        self.get(0, self.n - 1)
    }

    fn set(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.n + j] = value;
    }
}

/// Operation counts of one [`exp_dd`] evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KernelStats {
    /// Number of time slices `2^s`.
    pub slices: u64,
    /// Taylor terms used for the slice table.
    pub taylor_terms: usize,
    /// Complex multiply-adds spent building the slice table.
    pub table_ops: u64,
    /// Complex multiply-adds spent propagating across slices.
    pub propagation_ops: u64,
}

/// `exp(-i t [x_0, ..., x_q])`.
///
/// The value does not depend on the order of the nodes; they are sorted
/// internally, so any permutation gives a bitwise identical result.
pub fn exp_dd(t: f64, inputs: &DdInputs) -> Result<C64> {
    exp_dd_with_stats(t, inputs).map(|(value, _)| value)
}

/// [`exp_dd`] together with its operation counts.
pub fn exp_dd_with_stats(t: f64, inputs: &DdInputs) -> Result<(C64, KernelStats)> {
    check_time(t)?;
    let mut nodes = inputs.nodes().to_vec();
    nodes.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let q = nodes.len() - 1;
    if t == 0.0 {
        let value = if q == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        return Ok((value, KernelStats::default()));
    }

    let (centre, slice) = SliceTable::new(t, &nodes, Fill::Top);
    let mut stats = slice.stats;

    // first row after one slice, then one product-rule step per extra slice
    let mut row: Vec<CTwofold> = (0..=q).map(|j| slice.get(0, j)).collect();
    let mut next = vec![CTwofold::ZERO; q + 1];
    for _ in 1..stats.slices {
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = CTwofold::ZERO;
            for (k, &r) in row.iter().enumerate().take(j + 1) {
                acc += r * slice.get(k, j);
            }
            *slot = acc;
        }
        std::mem::swap(&mut row, &mut next);
        stats.propagation_ops += ((q + 1) * (q + 2) / 2) as u64;
    }

    Ok((phase(t, centre) * row[q].to_c64(), stats))
}

/// Full divided-difference table of `exp(-i t x)` over `inputs`, in the
/// given node order. Costs `O(q^3)` per slice; use [`exp_dd`] when only the
/// top entry is needed.
pub fn exp_dd_table(t: f64, inputs: &DdInputs) -> Result<DdTable> {
    check_time(t)?;
    let nodes = inputs.nodes();
    let n = nodes.len();
    let function = DdFunction::Exp { t };
    if t == 0.0 {
        let mut table = DdTable::zeros(n, function);
        for i in 0..n {
            table.set(i, i, C64::new(1.0, 0.0));
        }
        return Ok(table);
    }

    let (centre, slice) = SliceTable::new(t, nodes, Fill::All);
    let mut acc = slice.entries.clone();
    let mut next = vec![CTwofold::ZERO; n * n];
    for _ in 1..slice.stats.slices {
        for i in 0..n {
            for j in i..n {
                let mut sum = CTwofold::ZERO;
                for k in i..=j {
                    sum += acc[i * n + k] * slice.get(k, j);
                }
                next[i * n + j] = sum;
            }
        }
        std::mem::swap(&mut acc, &mut next);
    }

    let shift = phase(t, centre);
    let mut table = DdTable::zeros(n, function);
    for i in 0..n {
        for j in i..n {
            table.set(i, j, shift * acc[i * n + j].to_c64());
        }
    }
    Ok(table)
}

/// `f[x_0, ..., x_q]` by the classical recursion
/// `f[x_i..x_j] = (f[x_{i+1}..x_j] - f[x_i..x_{j-1}]) / (x_j - x_i)`.
///
/// Only valid for pairwise distinct nodes; coincident or nearly coincident
/// nodes (relative separation at most [`DEGENERACY_TOLERANCE`]) are rejected.
pub fn dd_recursive(f_values: &[C64], inputs: &DdInputs) -> Result<C64> {
    dd_recursive_table(f_values, inputs).map(|table| table.top())
}

/// The full table behind [`dd_recursive`].
pub fn dd_recursive_table(f_values: &[C64], inputs: &DdInputs) -> Result<DdTable> {
    let nodes = inputs.nodes();
    let n = nodes.len();
    if f_values.len() != n {
        return Err(Error::InvalidArgument(format!("{} function values for {} nodes", f_values.len(), n)));
    }
    for i in 0..n {
        for j in i + 1..n {
            let separation = (nodes[i] - nodes[j]).norm();
            let scale = nodes[i].norm().max(nodes[j].norm());
            if separation <= DEGENERACY_TOLERANCE * scale {
                return Err(Error::DegenerateNodes { first: i, second: j, separation });
            }
        }
    }

    let mut table = DdTable::zeros(n, DdFunction::Sampled);
    for (i, &f) in f_values.iter().enumerate() {
        table.set(i, i, f);
    }
    for width in 1..n {
        for i in 0..n - width {
            let j = i + width;
            let value = (table.get(i + 1, j) - table.get(i, j - 1)) / (nodes[j] - nodes[i]);
            table.set(i, j, value);
        }
    }
    Ok(table)
}

/// Shifted nodes `x_j - x`, so that
/// `exp(-i t [x_0..x_q]) = exp(-i t x) * exp(-i t [x_0 - x, .., x_q - x])`.
pub fn shift_inputs(inputs: &DdInputs, x: C64) -> Result<DdInputs> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("shift {x} is not finite")));
    }
    DdInputs::new(inputs.nodes().iter().map(|&z| z - x).collect())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time {t} is not finite")))
    }
}

/// `exp(-i t x)`.
fn phase(t: f64, x: C64) -> C64 {
    (C64::new(0.0, -t) * x).exp()
}

/// Divided-difference table of `exp(-i h x)` over centred nodes, for one
/// time slice `h = t / 2^s`. Entry `(i, j)` is stored at `i * n + j`.
struct SliceTable {
    n: usize,
    entries: Vec<CTwofold>,
    stats: KernelStats,
}

/// Which entries of the slice table to fill.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Fill {
    /// Only `(0, n - 1)`, enough when a single slice covers `t`.
    Top,
    All,
}

impl SliceTable {
    /// Returns the centre that was subtracted from the nodes and the table.
    fn new(t: f64, nodes: &[C64], fill: Fill) -> (C64, Self) {
        let n = nodes.len();
        let centre = bounding_centre(nodes);
        // exact differences, so the table sees the caller's nodes unrounded
        let shifted: Vec<CTwofold> = nodes
            .iter()
            .map(|z| CTwofold::new(Twofold::diff(z.re, centre.re), Twofold::diff(z.im, centre.im)))
            .collect();
        let radius = shifted.iter().map(|z| z.norm_f64()).fold(0.0, f64::max);

        let mut s = 0i32;
        while t.abs() * radius / 2f64.powi(s) > SLICE_RADIUS && s < 1023 {
            s += 1;
        }
        let slices = if s >= 63 { u64::MAX } else { 1u64 << s };
        let h = t / 2f64.powi(s);
        let fill = if slices > 1 { Fill::All } else { fill };

        // (x^k)[x_i..x_j] is the complete homogeneous polynomial of degree
        // k - (j - i) in x_i..x_j, bounded by C(k, j - i) r^(k - j + i); the
        // Taylor tail relative to |h|^(j-i)/(j-i)! then falls like (|h| r)^m / m!.
        let tail = taylor_tail(h.abs() * radius);
        let coeffs = taylor_coefficients(h, n + tail);

        let mut entries = vec![CTwofold::ZERO; n * n];
        let real = shifted.iter().all(|z| z.im == Twofold::ZERO);
        let mut ops = 0u64;
        let rows = if fill == Fill::Top { 0..1 } else { 0..n };
        for i in rows {
            let out = &mut entries[i * n + i..(i + 1) * n];
            ops += if real {
                let xs: Vec<Twofold> = shifted[i..].iter().map(|z| z.re).collect();
                table_row(&xs, &coeffs, tail, out, fill)
            } else {
                table_row(&shifted[i..], &coeffs, tail, out, fill)
            };
        }

        let stats = KernelStats { slices, taylor_terms: n - 1 + tail, table_ops: ops, propagation_ops: 0 };
        (centre, Self { n, entries, stats })
    }

    fn get(&self, i: usize, j: usize) -> CTwofold {
        self.entries[i * self.n + j]
    }
}

/// Node arithmetic: real nodes keep the symmetric polynomials real.
trait Node: Copy + Add<Output = Self> + Mul<Output = Self> {
    const ONE: Self;
    fn times(self, c: CTwofold) -> CTwofold;
}

impl Node for Twofold {
    const ONE: Self = Twofold::ONE;
    #[inline]
    fn times(self, c: CTwofold) -> CTwofold {
        c.scale(self)
    }
}

impl Node for CTwofold {
    const ONE: Self = CTwofold::ONE;
    #[inline]
    fn times(self, c: CTwofold) -> CTwofold {
        c * self
    }
}

/// Entries `(i, i..n)` of a slice table, where `xs = x_i..x_{n-1}`, using
/// `h_m(x_i..x_j) = h_m(x_i..x_{j-1}) + x_j h_{m-1}(x_i..x_j)`.
/// Returns the number of multiply-adds.
fn table_row<P: Node>(xs: &[P], coeffs: &[CTwofold], tail: usize, out: &mut [CTwofold], fill: Fill) -> u64 {
    let mut hs = vec![P::ONE; tail + 1];
    for m in 1..=tail {
        hs[m] = hs[m - 1] * xs[0];
    }
    let mut ops = tail as u64;
    let last = xs.len() - 1;
    for (offset, &x) in xs.iter().enumerate() {
        if offset > 0 {
            for m in 1..=tail {
                hs[m] = hs[m] + x * hs[m - 1];
            }
            ops += tail as u64;
        }
        if fill == Fill::All || offset == last {
            // smallest terms first
            let mut sum = CTwofold::ZERO;
            for m in (0..=tail).rev() {
                sum += hs[m].times(coeffs[offset + m]);
            }
            out[offset] = sum;
            ops += tail as u64 + 1;
        }
    }
    ops
}

/// Taylor terms beyond the order needed when `|h| * radius = hr`, so that the
/// tail falls below double-double resolution.
fn taylor_tail(hr: f64) -> usize {
    let mut tail = 1;
    let mut bound = hr;
    while bound >= 1e-34 {
        tail += 1;
        bound *= hr / tail as f64;
    }
    tail
}

/// `(-i h)^k / k!` for `k < len`.
fn taylor_coefficients(h: f64, len: usize) -> Vec<CTwofold> {
    let mut coeffs = vec![CTwofold::ONE; len];
    for k in 1..len {
        coeffs[k] = coeffs[k - 1].mul_imag(-h).div_f64(k as f64);
    }
    coeffs
}

/// `exp(-i t [x_0, ..., x_q])` for a stack of real nodes that grows and
/// shrinks one node at a time, as in a depth-first walk. Each push costs
/// `O(M)` for `M` Taylor terms instead of a fresh `O(q M)` evaluation.
///
/// All nodes must lie in the window given at construction, and the window
/// must fit in a single time slice.
pub(crate) struct PrefixKernel {
    t: f64,
    centre: f64,
    lo: f64,
    hi: f64,
    tail: usize,
    coeffs: Vec<CTwofold>,
    /// `h_m` of the current prefix, one block of `tail + 1` per node
    levels: Vec<Twofold>,
    depth: usize,
}

impl PrefixKernel {
    /// `None` when the window is too wide for one slice at time `t`.
    pub(crate) fn new(t: f64, lo: f64, hi: f64, max_nodes: usize) -> Option<Self> {
        if !(t.is_finite() && lo.is_finite() && hi.is_finite()) || lo > hi {
            return None;
        }
        let centre = 0.5 * lo + 0.5 * hi;
        let radius = (hi - centre).max(centre - lo);
        if t.abs() * radius > SLICE_RADIUS {
            return None;
        }
        // exact shifted nodes can exceed the rounded radius by an ulp
        let tail = taylor_tail(t.abs() * radius * (1.0 + 1e-15));
        Some(Self {
            t,
            centre,
            lo,
            hi,
            tail,
            coeffs: taylor_coefficients(t, max_nodes + tail),
            levels: Vec::with_capacity((tail + 1) * max_nodes),
            depth: 0,
        })
    }

    pub(crate) fn push(&mut self, x: f64) {
        assert!(x >= self.lo && x <= self.hi, "node {x} outside the kernel window");
        let x = Twofold::diff(x, self.centre);
        let width = self.tail + 1;
        if self.depth == 0 {
            let mut power = Twofold::ONE;
            for _ in 0..width {
                self.levels.push(power);
                power = power * x;
            }
        } else {
            let base = (self.depth - 1) * width;
            let mut previous = Twofold::ONE;
            self.levels.push(previous);
            for m in 1..width {
                let value = self.levels[base + m] + x * previous;
                self.levels.push(value);
                previous = value;
            }
        }
        self.depth += 1;
    }

    pub(crate) fn pop(&mut self) {
        assert!(self.depth > 0, "pop from an empty kernel");
        self.depth -= 1;
        self.levels.truncate(self.depth * (self.tail + 1));
    }

    /// Divided difference over the current stack.
    pub(crate) fn value(&self) -> C64 {
        assert!(self.depth > 0, "no nodes pushed");
        let q = self.depth - 1;
        let width = self.tail + 1;
        let hs = &self.levels[q * width..];
        let mut sum = CTwofold::ZERO;
        for m in (0..width).rev() {
            sum += hs[m].times(self.coeffs[q + m]);
        }
        phase(self.t, C64::new(self.centre, 0.0)) * sum.to_c64()
    }
}

/// Centre of the bounding box of the nodes in the complex plane.
fn bounding_centre(nodes: &[C64]) -> C64 {
    let (mut re_lo, mut re_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_lo, mut im_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in nodes {
        re_lo = re_lo.min(z.re);
        re_hi = re_hi.max(z.re);
        im_lo = im_lo.min(z.im);
        im_hi = im_hi.max(z.im);
    }
    C64::new(0.5 * re_lo + 0.5 * re_hi, 0.5 * im_lo + 0.5 * im_hi)
}
