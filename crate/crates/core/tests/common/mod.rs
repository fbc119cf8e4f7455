#![allow(dead_code)]

use lsqflow_core::{Graph, NetworkLinearEquation};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> NetworkLinearEquation {
    loop {
        let h = gaussian_matrix(rng, n, m);
        let z = gaussian_vector(rng, n);
        if let Ok(p) = NetworkLinearEquation::new(h, z) {
            return p;
        }
    }
}

/// Random spanning tree plus a few extra edges.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for j in 2..=n {
        edges.push((rng.random_range(1..j), j));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Graph::new(n, &edges).unwrap()
}
