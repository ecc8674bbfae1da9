//! Dense reference operators built from closed-form formulas, independent of
//! the transform-based code under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// First-derivative matrix on `n` equispaced periodic nodes of `[0, L)`:
/// `(π/L) (-1)^k csc(πk/n)` for odd `n`, `(π/L) (-1)^k cot(πk/n)` for even `n`.
pub fn fourier_d1(n: usize, length: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let k = i as i64 - j as i64;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = PI * k as f64 / n as f64;
        let f = if n % 2 == 1 { 1.0 / a.sin() } else { a.cos() / a.sin() };
        PI / length * sign * f
    })
}

/// Second-derivative matrix by explicit summation over the retained modes
/// `|κ| ≤ ⌊(n-1)/2⌋` (odd `n`).
pub fn fourier_d2(n: usize, length: f64) -> DMatrix<f64> {
    assert!(n % 2 == 1, "oracle covers odd point counts");
    let kmax = (n - 1) / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let dx = (i as f64 - j as f64) * length / n as f64;
        let mut s = 0.0;
        for k in 1..=kmax {
            let kappa = 2.0 * PI * k as f64 / length;
            s -= 2.0 * kappa * kappa * (kappa * dx).cos();
        }
        s / n as f64
    })
}

/// Chebyshev Gauss–Lobatto differentiation in `ξ` on `ξ_m = cos(mπ/M)`,
/// off-diagonal closed form with negative-sum diagonal.
pub fn cheb_d1_xi(order: usize) -> DMatrix<f64> {
    let n = order + 1;
    let x: Vec<f64> = (0..n).map(|m| (PI * m as f64 / order as f64).cos()).collect();
    let c = |m: usize| if m == 0 || m == order { 2.0 } else { 1.0 };
    let mut d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c(i) / c(j) * sign / (x[i] - x[j])
        }
    });
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// `d/dσ = 2 d/dξ` for `σ = (ξ + 1)/2`.
pub fn cheb_d1_sigma(order: usize) -> DMatrix<f64> {
    cheb_d1_xi(order) * 2.0
}

/// `T_k(ξ)` and its first two ξ-derivatives.
pub fn chebyshev_t(k: usize, x: f64) -> (f64, f64, f64) {
    let kf = k as f64;
    if (x - 1.0).abs() < 1e-15 {
        return (1.0, kf * kf, kf * kf * (kf * kf - 1.0) / 3.0);
    }
    if (x + 1.0).abs() < 1e-15 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        return (s, -s * kf * kf, s * kf * kf * (kf * kf - 1.0) / 3.0);
    }
    let th = x.acos();
    let t = (kf * th).cos();
    let d1 = kf * (kf * th).sin() / th.sin();
    let d2 = (x * d1 - kf * kf * t) / (1.0 - x * x);
    (t, d1, d2)
}

/// Kronecker product of dense matrices.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}
