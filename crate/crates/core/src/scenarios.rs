//! The worked examples: problems, graphs and initial states.

use nalgebra::DVector;

use crate::graph::{Family, Graph};
use crate::problem::NetworkLinearEquation;

/// Four nodes, `m = 2`, least-squares solution `[−1/7, −1]`.
pub fn four_node_problem() -> NetworkLinearEquation {
    NetworkLinearEquation::from_rows(
        &[vec![0.0, 1.0], vec![3.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.0]],
        &[-1.0, 0.0, -2.0, 2.0],
    )
    .expect("valid example")
}

/// Four-node path visited in the order 2–1–3–4.
pub fn labelled_path4() -> Graph {
    Graph::new(4, &[(1, 2), (1, 3), (3, 4)]).expect("valid example")
}

/// Star on four nodes with hub 1.
pub fn star4() -> Graph {
    Graph::family(Family::Star, 4).expect("valid example")
}

pub fn example1_x0() -> DVector<f64> {
    DVector::from_vec(vec![-2.0, -0.5, -1.8, -1.5, 1.8, -0.6, 1.9, -1.4])
}

pub fn example2_x0() -> DVector<f64> {
    DVector::from_vec(vec![4.0, 1.0, 2.0, -2.0, -1.0, 1.0, -2.0, -1.0])
}

/// Five nodes, `m = 2`.
pub fn planar_five_node_problem() -> NetworkLinearEquation {
    NetworkLinearEquation::from_rows(
        &[
            vec![3.0, 2.0],
            vec![1.0, -3.0],
            vec![1.0, 1.0],
            vec![-1.5, 4.0],
            vec![2.5, 4.0],
        ],
        &[2.0, 1.0, 5.0, -2.5, 0.25],
    )
    .expect("valid example")
}

/// Five nodes, `m = 3`.
pub fn spatial_five_node_problem() -> NetworkLinearEquation {
    NetworkLinearEquation::from_rows(
        &[
            vec![3.0, 2.0, 0.0],
            vec![1.0, -3.0, -1.0],
            vec![2.0, 1.0, 1.5],
            vec![-7.0, -2.0, 3.0],
            vec![2.0, -0.5, 1.0],
        ],
        &[1.0, 5.0, 3.0, -1.0, 0.0],
    )
    .expect("valid example")
}

/// The two five-node trees the switching examples alternate between.
pub fn switching_pair() -> (Graph, Graph) {
    (
        Graph::new(5, &[(1, 4), (2, 4), (3, 5), (4, 5)]).expect("valid example"),
        Graph::new(5, &[(1, 5), (2, 4), (3, 5), (4, 5)]).expect("valid example"),
    )
}

/// Laplacian eigenvector supports each switching graph must show.
pub fn switching_fingerprints() -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    (vec![vec![1, 2, 3, 4, 5], vec![1, 2]], vec![vec![1, 2, 3, 4, 5], vec![1, 3]])
}

pub fn planar_x0() -> DVector<f64> {
    DVector::from_vec(vec![1.0, -0.5, 1.3, -0.8, 0.7, 0.6, 0.7, -1.4, -0.5, 1.0])
}

pub fn spatial_x0() -> DVector<f64> {
    DVector::from_vec(vec![
        -1.0, -0.5, 1.0, 0.8, -0.75, 0.5, 0.7, -0.6, -0.3, -0.8, -1.6, 0.25, 0.5, -1.0, 0.7,
    ])
}
