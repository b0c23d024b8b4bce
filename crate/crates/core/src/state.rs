use num_complex::Complex64 as C64;

use crate::model::BasisIndex;

/// Amplitudes over the truncated basis at time `t`.
///
/// Not normalized in general: a truncated series is not exactly unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(t: f64, amplitudes: Vec<C64>) -> Self {
        Self { t, amplitudes }
    }

    pub fn basis(t: f64, dimension: usize, z: BasisIndex) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dimension];
        amplitudes[z] = C64::new(1.0, 0.0);
        Self { t, amplitudes }
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, z: BasisIndex) -> C64 {
        self.amplitudes[z]
    }

    /// `|psi_z|^2` for every state.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest componentwise `|a_z - b_z|`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
