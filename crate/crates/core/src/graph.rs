//! Weighted graph Laplacians `L = D - W` with `D_ii = sum_j |W_ij|`.

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;

/// Undirected weighted edge between zero-based nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

const fn edge(a: usize, b: usize, weight: f64) -> Edge {
    Edge { a, b, weight }
}

/// Petersen graph with the spoke weights 1..5; every other edge has
/// weight 1. Nodes 0..5 form the outer cycle, 5..10 the inner pentagram,
/// and spoke `i` joins node `i` to node `i + 5`.
pub const WEIGHTED_PETERSEN_EDGES: [Edge; 15] = [
    // outer cycle 1-2-3-4-5-1
    edge(0, 1, 1.0),
    edge(1, 2, 1.0),
    edge(2, 3, 1.0),
    edge(3, 4, 1.0),
    edge(4, 0, 1.0),
    // inner pentagram 6-8-10-7-9-6
    edge(5, 7, 1.0),
    edge(7, 9, 1.0),
    edge(9, 6, 1.0),
    edge(6, 8, 1.0),
    edge(8, 5, 1.0),
    // spokes
    edge(0, 5, 1.0),
    edge(1, 6, 2.0),
    edge(2, 7, 3.0),
    edge(3, 8, 4.0),
    edge(4, 9, 5.0),
];

pub fn laplacian(nodes: usize, edges: &[Edge]) -> Result<DenseMatrix> {
    let mut l = DenseMatrix::zeros(nodes, nodes);
    for e in edges {
        if e.a >= nodes || e.b >= nodes {
            return Err(invalid(format!("edge ({}, {}) references a node outside 0..{nodes}", e.a, e.b)));
        }
        if e.a == e.b {
            return Err(invalid(format!("self loop at node {}", e.a)));
        }
        if !e.weight.is_finite() {
            return Err(invalid("edge weight must be finite"));
        }
        l[(e.a, e.b)] -= e.weight;
        l[(e.b, e.a)] -= e.weight;
        l[(e.a, e.a)] += e.weight.abs();
        l[(e.b, e.b)] += e.weight.abs();
    }
    Ok(l)
}

/// 10x10 Laplacian of the weighted Petersen graph.
pub fn weighted_petersen_laplacian() -> DenseMatrix {
    laplacian(10, &WEIGHTED_PETERSEN_EDGES).expect("static edge list is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_symmetric, symmetric_eigendecomposition, Vector};
    use crate::system::CLUSTER_TOLERANCE;

    #[test]
    fn rows_sum_to_zero_exactly() {
        let l = weighted_petersen_laplacian();
        let ones = Vector::from_element(10, 1.0);
        assert_eq!(&l * ones, Vector::zeros(10));
        assert!(is_symmetric(&l, 0.0));
    }

    #[test]
    fn degrees_follow_edge_weights() {
        let l = weighted_petersen_laplacian();
        assert_eq!(l[(0, 0)], 3.0);
        // node 5 (one-based): two cycle edges plus the weight-5 spoke
        assert_eq!(l[(4, 4)], 7.0);
        assert_eq!(l[(4, 9)], -5.0);
        // every node has degree three in the unweighted graph
        for i in 0..10 {
            let neighbours = (0..10).filter(|&j| j != i && l[(i, j)] != 0.0).count();
            assert_eq!(neighbours, 3);
        }
    }

    #[test]
    fn spectrum_is_simple_and_psd() {
        let dec = symmetric_eigendecomposition(&weighted_petersen_laplacian()).unwrap();
        assert!(dec.eigenvalues[0].abs() < 1e-12);
        assert!(dec.eigenvalues.iter().all(|&v| v > -1e-12));
        for w in dec.eigenvalues.windows(2) {
            assert!(w[1] - w[0] > CLUSTER_TOLERANCE * w[1].abs().max(1.0), "{:?}", dec.eigenvalues);
        }
    }

    #[test]
    fn bad_edges_are_rejected() {
        assert!(laplacian(2, &[edge(0, 2, 1.0)]).is_err());
        assert!(laplacian(2, &[edge(1, 1, 1.0)]).is_err());
    }
}
