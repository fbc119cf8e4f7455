//! The network linear equation `z = H y`, where node `i` holds the row
//! `hᵢᵀ y = zᵢ`, together with its centralized least-squares solution and the
//! state-expansion system whose exact solution stacks `y*` and the residual.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative factor in the rank test `σ > σ_max · max(N, m) · RANK_REL`.
pub const RANK_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLinearEquation {
    h: DMatrix<f64>,
    z: DVector<f64>,
}

impl NetworkLinearEquation {
    /// Validates `N > m`, finite entries and full column rank.
    pub fn new(h: DMatrix<f64>, z: DVector<f64>) -> Result<Self> {
        let (n, m) = h.shape();
        if m == 0 {
            return Err(Error::InvalidProblem("H has no columns".into()));
        }
        if z.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "H has {n} rows but z has {} entries",
                z.len()
            )));
        }
        if n <= m {
            return Err(Error::InvalidProblem(format!(
                "need more equations than unknowns (N = {n}, m = {m})"
            )));
        }
        if h.iter().chain(z.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidProblem("non-finite entry in H or z".into()));
        }
        let rank = linalg::numerical_rank(&h, RANK_REL);
        if rank < m {
            return Err(Error::RankDeficient { rank, expected: m });
        }
        Ok(Self { h, z })
    }

    /// Builds the problem from per-node rows `hᵢ` and observations `zᵢ`.
    pub fn from_rows(rows: &[Vec<f64>], obs: &[f64]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidProblem("no rows".into()));
        };
        let m = first.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} entries, expected {m}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let h = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
        Self::new(h, DVector::from_column_slice(obs))
    }

    pub fn n_nodes(&self) -> usize {
        self.h.nrows()
    }

    pub fn dim(&self) -> usize {
        self.h.ncols()
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    /// Row `hᵢ` for a 0-based node index.
    pub fn row(&self, i: usize) -> DVector<f64> {
        self.h.row(i).transpose()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.h.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution {
    pub y_star: DVector<f64>,
    /// `e* = H y* − z`
    pub residual: DVector<f64>,
    /// `‖z − H y*‖²`
    pub objective: f64,
}

/// Least-squares solution by Householder QR (`R y = Qᵀ z`).
pub fn solve_least_squares(problem: &NetworkLinearEquation) -> Result<LeastSquaresSolution> {
    let h = problem.h();
    let m = problem.dim();
    let qr = h.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let tol = rmax * problem.n_nodes().max(m) as f64 * RANK_REL;
    let rank = r.diagonal().iter().filter(|x| x.abs() > tol).count();
    if rank < m {
        return Err(Error::RankDeficient { rank, expected: m });
    }
    let qtz = qr.q().transpose() * problem.z();
    let y_star = r
        .solve_upper_triangular(&qtz)
        .ok_or_else(|| Error::NumericalFailure("singular triangular factor".into()))?;
    Ok(finish(problem, y_star))
}

/// Independent route through the normal equations `HᵀH y = Hᵀz`
/// (Cholesky). Kept for cross-checking the QR path.
pub fn solve_normal_equations(problem: &NetworkLinearEquation) -> Result<LeastSquaresSolution> {
    let h = problem.h();
    let gram = h.transpose() * h;
    let rhs = h.transpose() * problem.z();
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        rank: linalg::numerical_rank(h, RANK_REL),
        expected: problem.dim(),
    })?;
    Ok(finish(problem, chol.solve(&rhs)))
}

fn finish(problem: &NetworkLinearEquation, y_star: DVector<f64>) -> LeastSquaresSolution {
    let residual = problem.h() * &y_star - problem.z();
    let objective = residual.norm_squared();
    LeastSquaresSolution {
        y_star,
        residual,
        objective,
    }
}

/// `hᵢᵀ y* − zᵢ` for the 1-based node index `i`: the part of the residual node
/// `i` can evaluate from its own equation once its state has converged.
pub fn residual_component(problem: &NetworkLinearEquation, y_star: &DVector<f64>, i: usize) -> Result<f64> {
    let n = problem.n_nodes();
    if i == 0 || i > n {
        return Err(Error::InvalidNode { index: i, n_nodes: n });
    }
    if y_star.len() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "y has {} entries, expected {}",
            y_star.len(),
            problem.dim()
        )));
    }
    Ok(problem.row(i - 1).dot(y_star) - problem.z()[i - 1])
}

/// `H̄ ȳ = z̄` with `H̄ = [[H, −I_N], [0, Hᵀ]]` and `z̄ = [z; 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub h_bar: DMatrix<f64>,
    pub z_bar: DVector<f64>,
    n_nodes: usize,
    dim: usize,
}

impl AugmentedSystem {
    /// Solves the square system with partial-pivoting LU and splits the
    /// solution into `(y, e)`.
    pub fn solve(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let sol = self
            .h_bar
            .clone()
            .lu()
            .solve(&self.z_bar)
            .ok_or_else(|| Error::NumericalFailure("augmented system is singular".into()))?;
        let y = sol.rows(0, self.dim).into_owned();
        let e = sol.rows(self.dim, self.n_nodes).into_owned();
        Ok((y, e))
    }
}

pub fn build_state_expansion(problem: &NetworkLinearEquation) -> AugmentedSystem {
    let (n, m) = (problem.n_nodes(), problem.dim());
    let size = n + m;
    let mut h_bar = DMatrix::zeros(size, size);
    h_bar.view_mut((0, 0), (n, m)).copy_from(problem.h());
    h_bar.view_mut((0, m), (n, n)).copy_from(&(-DMatrix::<f64>::identity(n, n)));
    h_bar.view_mut((n, m), (m, n)).copy_from(&problem.h().transpose());
    let mut z_bar = DVector::zeros(size);
    z_bar.rows_mut(0, n).copy_from(problem.z());
    AugmentedSystem {
        h_bar,
        z_bar,
        n_nodes: n,
        dim: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn four_node_solution_matches_reported_value() {
        let sol = solve_least_squares(&scenarios::four_node_problem()).unwrap();
        assert!((sol.y_star[0] + 1.0 / 7.0).abs() < 1e-12);
        assert!((sol.y_star[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_node_residual_from_normal_equations() {
        // e* = [0, -3/7, 12/7, -15/7], checked by hand via HᵀH = diag(14, 1)
        let p = scenarios::four_node_problem();
        let oracle = solve_normal_equations(&p).unwrap();
        let want = [0.0, -3.0 / 7.0, 12.0 / 7.0, -15.0 / 7.0];
        for (got, w) in oracle.residual.iter().zip(want) {
            assert!((got - w).abs() < 1e-12);
        }
        let qr = solve_least_squares(&p).unwrap();
        assert!((&qr.residual - &oracle.residual).amax() < 1e-12);
        assert!((p.h().transpose() * &qr.residual).amax() < 1e-12);
        assert_eq!(qr.objective, qr.residual.norm_squared());
    }

    #[test]
    fn consistent_system_has_zero_residual() {
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let z = &h * DVector::from_vec(vec![2.0, 3.0]);
        let p = NetworkLinearEquation::new(h, z).unwrap();
        let sol = solve_least_squares(&p).unwrap();
        assert!((sol.y_star[0] - 2.0).abs() < 1e-12 && (sol.y_star[1] - 3.0).abs() < 1e-12);
        assert!(sol.residual.amax() < 1e-12);
        for i in 1..=3 {
            assert!(residual_component(&p, &sol.y_star, i).unwrap().abs() < 1e-12);
        }
        let (y, e) = build_state_expansion(&p).solve().unwrap();
        assert!((y - DVector::from_vec(vec![2.0, 3.0])).amax() < 1e-12);
        assert!(e.amax() < 1e-12);
    }

    #[test]
    fn residual_components_by_node() {
        let p = scenarios::four_node_problem();
        let y = solve_least_squares(&p).unwrap().y_star;
        assert!(residual_component(&p, &y, 1).unwrap().abs() < 1e-12);
        assert!((residual_component(&p, &y, 4).unwrap() + 15.0 / 7.0).abs() < 1e-12);
        assert!(matches!(
            residual_component(&p, &y, 0),
            Err(Error::InvalidNode { index: 0, n_nodes: 4 })
        ));
        assert!(matches!(residual_component(&p, &y, 5), Err(Error::InvalidNode { .. })));
    }

    #[test]
    fn augmented_block_layout() {
        let p = scenarios::four_node_problem();
        let aug = build_state_expansion(&p);
        assert_eq!(aug.h_bar.shape(), (6, 6));
        assert_eq!(aug.h_bar.view((0, 0), (4, 2)), p.h().view((0, 0), (4, 2)));
        assert_eq!(aug.h_bar.view((0, 2), (4, 4)), -DMatrix::<f64>::identity(4, 4));
        assert!(aug.h_bar.view((4, 0), (2, 2)).iter().all(|&x| x == 0.0));
        assert_eq!(aug.h_bar.view((4, 2), (2, 4)), p.h().transpose());
        assert_eq!(aug.z_bar.rows(4, 2).amax(), 0.0);
        let (y, e) = aug.solve().unwrap();
        let sol = solve_least_squares(&p).unwrap();
        assert!((y - sol.y_star).amax() < 1e-12);
        assert!((e - sol.residual).amax() < 1e-12);
    }

    #[test]
    fn constructor_rejections() {
        let dup = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0]);
        assert!(matches!(
            NetworkLinearEquation::new(dup, DVector::zeros(3)),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
        let square = DMatrix::identity(2, 2);
        assert!(matches!(
            NetworkLinearEquation::new(square, DVector::zeros(2)),
            Err(Error::InvalidProblem(_))
        ));
        let h = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            NetworkLinearEquation::new(h, DVector::zeros(2)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            NetworkLinearEquation::from_rows(&[vec![1.0, 0.0], vec![0.0]], &[0.0, 0.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
