//! Independent reference routines shared by the integration tests.
#![allow(dead_code)]

use nnilc::linalg::Matrix;
use nnilc::plant::DiscreteStateSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod fd;

pub const DT: f64 = 0.004;

/// Lower-triangular Toeplitz matrix of the delayed system, entries built from
/// explicit matrix powers `C Ad^(k-d-1) Bd`.
pub fn lifted_matrix(sys: &DiscreteStateSpace<f64>, delay: usize, n: usize) -> Vec<Vec<f64>> {
    let mut h = vec![0.0; n];
    let mut p = Matrix::identity(sys.order());
    for hk in h.iter_mut().skip(delay + 1) {
        let pb = p.mul_vec(&sys.bd);
        *hk = sys.c.iter().zip(&pb).map(|(a, b)| a * b).sum();
        p = p.matmul(&sys.ad);
    }
    (0..n)
        .map(|i| (0..n).map(|j| if i >= j { h[i - j] } else { 0.0 }).collect())
        .collect()
}

pub fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn matvec_t(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let n = m.first().map_or(0, Vec::len);
    (0..n).map(|j| m.iter().zip(v).map(|(row, vi)| row[j] * vi).sum()).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b)) / norm(b).max(1e-300)
}

pub fn random_vec(seed: u64, n: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn sine(n: usize, amp: f64, w: f64, phase: f64, offset: f64) -> Vec<f64> {
    (0..n)
        .map(|k| offset + amp * (w * k as f64 * DT + phase).sin())
        .collect()
}
