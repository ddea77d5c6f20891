//! Independent oracles shared by the integration tests. None of these call
//! into the code they check beyond constructing inputs.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use heatreg::datasets::{LabeledDataset, Point};
use heatreg::diffusion::{gaussian_kernel_matrix, transition_matrix, KernelMatrix};
use heatreg::metricspace::{floyd_warshall, knn_graph, pairwise_distances};
use heatreg::solvers::{nhk_penalty_matrix, ModelParams, PenaltyMatrix};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest paths by running Dijkstra from every source over an
/// adjacency matrix whose non-edges are `+∞`.
pub fn dijkstra_all_pairs(adj: &DMatrix<f64>) -> DMatrix<f64> {
    let n = adj.nrows();
    let mut out = DMatrix::from_element(n, n, f64::INFINITY);
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(0.0, s));
        while let Some(Entry(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for v in 0..n {
                let w = adj[(u, v)];
                if v != u && w.is_finite() && d + w < dist[v] {
                    dist[v] = d + w;
                    heap.push(Entry(dist[v], v));
                }
            }
        }
        for (t, d) in dist.into_iter().enumerate() {
            out[(s, t)] = d;
        }
    }
    out
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Pieces of the regularized least squares loss for a labelled dataset.
pub struct LossProblem {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub gamma_a: f64,
    pub gamma_i: f64,
}

impl LossProblem {
    fn l(&self) -> f64 {
        self.labels.iter().filter(|&&y| y != 0.0).count() as f64
    }

    /// `(1/l)|Y - JKa|^2 + gamma_A a'Ka + gamma_I/n^2 a'KMKa`.
    pub fn loss(&self, a: &DVector<f64>) -> f64 {
        let n = self.labels.len() as f64;
        let ka = &self.k * a;
        let fit: f64 = self
            .labels
            .iter()
            .zip(ka.iter())
            .filter(|(y, _)| **y != 0.0)
            .map(|(y, f)| (y - f).powi(2))
            .sum();
        fit / self.l()
            + self.gamma_a * a.dot(&ka)
            + self.gamma_i / (n * n) * ka.dot(&(&self.m * &ka))
    }

    /// Central finite-difference gradient with step `h`.
    pub fn fd_gradient(&self, a: &DVector<f64>, h: f64) -> DVector<f64> {
        DVector::from_fn(a.len(), |i, _| {
            let mut p = a.clone();
            let mut q = a.clone();
            p[i] += h;
            q[i] -= h;
            (self.loss(&p) - self.loss(&q)) / (2.0 * h)
        })
    }

    /// Analytic gradient derived by hand from [`LossProblem::loss`].
    pub fn gradient(&self, a: &DVector<f64>) -> DVector<f64> {
        let n = self.labels.len() as f64;
        let ka = &self.k * a;
        let resid = DVector::from_fn(a.len(), |i, _| {
            if self.labels[i] != 0.0 {
                ka[i] - self.labels[i]
            } else {
                0.0
            }
        });
        let inner = resid * (2.0 / self.l())
            + a * (2.0 * self.gamma_a)
            + &self.m * &ka * (2.0 * self.gamma_i / (n * n));
        &self.k * inner
    }

    /// Minimizes the loss by conjugate gradients on its (constant) Hessian,
    /// applied matrix-free through the analytic gradient. The true gradient
    /// is recomputed every 25 iterations and the iterate with the smallest
    /// one is returned, so running past attainable precision is harmless.
    pub fn cg_minimize(&self, tol: f64, max_iter: usize) -> DVector<f64> {
        let n = self.labels.len();
        let zero = DVector::zeros(n);
        let g0 = self.gradient(&zero);
        let hess = |v: &DVector<f64>| self.gradient(v) - &g0;
        let mut x = DVector::zeros(n);
        let mut r = -&g0;
        let mut p = r.clone();
        let mut rr = r.dot(&r);
        let stop = tol * rr.sqrt();
        let mut best = (rr.sqrt(), x.clone());
        for it in 1..=max_iter {
            let hp = hess(&p);
            let curvature = p.dot(&hp);
            if !(curvature > 0.0 && curvature.is_finite()) {
                break;
            }
            let step = rr / curvature;
            x += &p * step;
            if it % 25 == 0 {
                r = -self.gradient(&x);
                let g = r.norm();
                if g < best.0 {
                    best = (g, x.clone());
                }
                if g <= stop {
                    break;
                }
            } else {
                r -= &hp * step;
            }
            let rr_new = r.dot(&r);
            p = &r + &p * (rr_new / rr);
            rr = rr_new;
        }
        let g = self.gradient(&x).norm();
        if g < best.0 {
            best = (g, x);
        }
        best.1
    }
}

/// A random small problem: points in the unit square scaled by `spread`,
/// a few labels of each sign, Gaussian kernel and a geodesic NHK penalty.
pub struct RandomProblem {
    pub ds: LabeledDataset,
    pub k: KernelMatrix,
    pub m: PenaltyMatrix,
    pub params: ModelParams,
}

pub fn random_problem(seed: u64, n: usize) -> RandomProblem {
    let mut r = rng(seed);
    let points: Vec<Point> = (0..n)
        .map(|_| Point::new(vec![r.random_range(0.0..3.0), r.random_range(0.0..3.0)]))
        .collect();
    let mut labels = vec![0.0; n];
    let l = r.random_range(1..=(n / 3).max(1));
    for (j, idx) in rand::seq::index::sample(&mut r, n, l)
        .into_iter()
        .enumerate()
    {
        labels[idx] = if j % 2 == 0 { 1.0 } else { -1.0 };
    }
    let ds = LabeledDataset::new(points, labels, vec![0; n]).unwrap();
    let d = pairwise_distances(ds.points()).unwrap();
    let eps = r.random_range(0.2..1.0);
    let k = gaussian_kernel_matrix(&d, eps).unwrap();
    let g = floyd_warshall(&knn_graph(&d, 4.min(n - 1)).unwrap());
    let p = transition_matrix(&gaussian_kernel_matrix(&g, eps).unwrap()).unwrap();
    let t = r.random_range(1..=3);
    let m = nhk_penalty_matrix(&p, t).unwrap();
    let params = ModelParams {
        gamma_a: r.random_range(0.01..0.5),
        gamma_i: r.random_range(0.0..2.0),
        epsilon: Some(eps),
        diffusion_steps: t,
        ..ModelParams::default()
    };
    RandomProblem { ds, k, m, params }
}

impl RandomProblem {
    pub fn loss(&self) -> LossProblem {
        LossProblem {
            k: self.k.matrix().clone(),
            m: self.m.matrix().clone(),
            labels: self.ds.labels().to_vec(),
            gamma_a: self.params.gamma_a,
            gamma_i: self.params.gamma_i,
        }
    }
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}
