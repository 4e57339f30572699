//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pulsetrain::basis::{Basis, BlockDecomposition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CM = DMatrix<Complex64>;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Unnormalized associated Legendre functions P_j^m(x) for j = m..=j_top.
fn legendre_column(m: u32, j_top: u32, x: f64) -> Vec<f64> {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).sqrt();
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    let mut out = vec![pmm];
    if j_top > m {
        out.push(x * (2 * m + 1) as f64 * pmm);
    }
    for j in (m + 2)..=j_top {
        let k = out.len();
        let next = ((2 * j - 1) as f64 * x * out[k - 1] - (j + m - 1) as f64 * out[k - 2]) / (j - m) as f64;
        out.push(next);
    }
    out
}

/// Polar parts of Y_j^m sampled on quadrature nodes, normalized numerically
/// so that `Σ w Θ² = 1`.
pub struct ThetaTable {
    pub nodes: Vec<(f64, f64)>,
    m: u32,
    values: Vec<Vec<f64>>,
}

impl ThetaTable {
    pub fn new(m: u32, j_top: u32, order: usize) -> Self {
        let nodes = gauss_legendre(order);
        let mut values: Vec<Vec<f64>> = nodes.iter().map(|&(x, _)| legendre_column(m, j_top, x)).collect();
        for j in 0..=(j_top - m) as usize {
            let norm: f64 = nodes.iter().zip(&values).map(|(&(_, w), v)| w * v[j] * v[j]).sum::<f64>().sqrt();
            for v in values.iter_mut() {
                v[j] /= norm;
            }
        }
        Self { nodes, m, values }
    }

    /// `∫ Θ_{j1} f(cos θ) Θ_{j2} d(cos θ)`.
    pub fn element(&self, j1: u32, j2: u32, f: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = ((j1 - self.m) as usize, (j2 - self.m) as usize);
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&(x, w), v)| w * v[a] * f(x) * v[b])
            .sum()
    }
}

/// Best value of `Σ w_i χ_π(i)` over all permutations.
pub fn brute_force_pairing(w: &[f64], chi: &[f64]) -> f64 {
    fn go(w: &[f64], chi: &mut Vec<f64>, k: usize, best: &mut f64) {
        if k == chi.len() {
            let v: f64 = w.iter().zip(chi.iter()).map(|(a, b)| a * b).sum();
            *best = best.max(v);
            return;
        }
        for i in k..chi.len() {
            chi.swap(k, i);
            go(w, chi, k + 1, best);
            chi.swap(k, i);
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(w, &mut chi.to_vec(), 0, &mut best);
    best
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal removed.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CM {
    let g = CM::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Independent random unitary in every invariant block, identity elsewhere.
pub fn random_block_unitary(blocks: &BlockDecomposition, basis: &Basis, rng: &mut ChaCha8Rng) -> CM {
    let mut u = CM::zeros(basis.dim(), basis.dim());
    for b in &blocks.blocks {
        let ub = random_unitary(b.members.len(), rng);
        for (r, &i) in b.members.iter().enumerate() {
            for (c, &j) in b.members.iter().enumerate() {
                u[(i, j)] = ub[(r, c)];
            }
        }
    }
    u
}

/// Random density matrix with a prescribed random spectrum.
pub fn random_density(n: usize, rng: &mut ChaCha8Rng) -> CM {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let u = random_unitary(n, rng);
    let d = CM::from_diagonal(&nalgebra::DVector::from_iterator(n, w.iter().map(|&x| Complex64::new(x, 0.0))));
    &u * d * u.adjoint()
}

pub fn max_abs(m: &CM) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}
