//! Undirected graphs, their Laplacians `L = D − A`, the Laplacian
//! eigen-decomposition and eigenvector support sets.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Entries with `|α[i]| ≤ SUPPORT_TOL · ‖α‖` count as zero.
pub const SUPPORT_TOL: f64 = 1e-9;
/// Random in-eigenspace combinations tried per repeated eigenvalue.
pub const EIGENSPACE_SAMPLES: usize = 1000;
/// Upper bound on subsets enumerated per repeated eigenspace when searching
/// for minimal-support vectors exactly.
const CIRCUIT_BUDGET: usize = 20_000;
pub const DEFAULT_SAMPLE_SEED: u64 = 0x6c73_7166_6c6f_77;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Path,
    Ring,
    Star,
    Complete,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Path, Family::Ring, Family::Star, Family::Complete];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Path => "path",
            Family::Ring => "ring",
            Family::Star => "star",
            Family::Complete => "complete",
        };
        f.write_str(s)
    }
}

/// Simple undirected graph on nodes `1..=n`. Edges are stored 0-based with
/// `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from 1-based edge pairs.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) outside nodes 1..={n}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            let e = (a.min(b) - 1, a.max(b) - 1);
            if !set.insert(e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    /// One of the fundamental families; the star's hub is node 1.
    pub fn family(family: Family, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooSmall(n));
        }
        let edges: Vec<(usize, usize)> = match family {
            Family::Path => (1..n).map(|i| (i, i + 1)).collect(),
            Family::Ring => (1..n).map(|i| (i, i + 1)).chain([(1, n)]).collect(),
            Family::Star => (2..=n).map(|i| (1, i)).collect(),
            Family::Complete => (1..=n)
                .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
                .collect(),
        };
        Self::new(n, &edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges_one_based(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(i, j)| (i + 1, j + 1)).collect()
    }

    /// Degrees indexed 0-based.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        laplacian(self)
    }
}

/// `L = D − A`, assembled from integer degrees so rows sum to exactly zero.
pub fn laplacian(graph: &Graph) -> DMatrix<f64> {
    let n = graph.n;
    let mut l = DMatrix::zeros(n, n);
    for (i, d) in graph.degrees().into_iter().enumerate() {
        l[(i, i)] = d as f64;
    }
    for &(i, j) in &graph.edges {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
    }
    l
}

#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Index groups of numerically equal eigenvalues, ascending.
    pub groups: Vec<Vec<usize>>,
    /// Grouping tolerance `1e-8 · max(1, λ_max)`.
    pub tolerance: f64,
}

impl LaplacianSpectrum {
    pub fn is_simple(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    /// Columns spanning the eigenspace of group `g`.
    pub fn eigenspace(&self, g: usize) -> DMatrix<f64> {
        let idx = &self.groups[g];
        DMatrix::from_fn(self.eigenvectors.nrows(), idx.len(), |r, c| self.eigenvectors[(r, idx[c])])
    }

    pub fn group_value(&self, g: usize) -> f64 {
        let idx = &self.groups[g];
        idx.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / idx.len() as f64
    }

    pub fn algebraic_connectivity(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }
}

/// Symmetric eigen-decomposition of a Laplacian-like matrix.
pub fn spectrum(l: &DMatrix<f64>) -> Result<LaplacianSpectrum> {
    let n = l.nrows();
    if n == 0 || n != l.ncols() {
        return Err(Error::DimensionMismatch(format!("spectrum of a {}x{} matrix", l.nrows(), l.ncols())));
    }
    if (l - l.transpose()).amax() > 0.0 {
        return Err(Error::InvalidGraph("matrix is not symmetric".into()));
    }
    let eig = SymmetricEigen::try_new(l.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigen-solver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        eigenvectors.set_column(c, &eig.eigenvectors.column(k));
    }

    let lnorm = linalg::inf_norm(l).max(f64::MIN_POSITIVE);
    for (k, &lam) in eigenvalues.iter().enumerate() {
        let v = eigenvectors.column(k);
        let res = (l * v - v * lam).amax();
        if res > 1e-9 * lnorm {
            return Err(Error::NumericalFailure(format!(
                "eigenpair {k} residual {res:.3e} exceeds tolerance"
            )));
        }
    }

    let lmax = eigenvalues.last().copied().unwrap_or(0.0);
    let tolerance = 1e-8 * lmax.max(1.0);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if (eigenvalues[k] - eigenvalues[*g.last().unwrap()]).abs() <= tolerance => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    Ok(LaplacianSpectrum {
        eigenvalues,
        eigenvectors,
        groups,
        tolerance,
    })
}

/// 1-based indices of the entries of `v` above `SUPPORT_TOL · ‖v‖`.
pub fn support(v: &DVector<f64>) -> Vec<usize> {
    let norm = v.norm();
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > SUPPORT_TOL * norm)
        .map(|(i, _)| i + 1)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportReport {
    /// Support of each computed basis eigenvector (1-based node indices).
    pub supports: Vec<Vec<usize>>,
    /// Smallest support found over the basis, structured vectors and
    /// eigenspace samples.
    pub min_support: usize,
    pub simple_spectrum: bool,
}

/// Support sets of the eigenvectors and the smallest support over all
/// eigenvectors. For simple eigenvalues the basis vector is the eigenvector
/// up to scale. Repeated eigenspaces are searched with
/// * vectors vanishing on `dim − 1` chosen coordinates (exhaustive when the
///   number of subsets fits the budget; this finds every minimal support),
/// * structured candidates that lie in the eigenspace: differences
///   `e_i − e_j` and the discrete Fourier vectors `cos/sin(2πkj/N)`,
/// * `EIGENSPACE_SAMPLES` random unit combinations.
pub fn support_report(spec: &LaplacianSpectrum) -> SupportReport {
    support_report_seeded(spec, DEFAULT_SAMPLE_SEED)
}

/// `support_report` with an explicit seed for the eigenspace samples.
pub fn support_report_seeded(spec: &LaplacianSpectrum, seed: u64) -> SupportReport {
    let n = spec.eigenvectors.nrows();
    let supports: Vec<Vec<usize>> = (0..n)
        .map(|k| support(&spec.eigenvectors.column(k).into_owned()))
        .collect();
    let mut min_support = supports.iter().map(Vec::len).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in 0..spec.groups.len() {
        if spec.groups[g].len() > 1 {
            let found = min_support_in_eigenspace(spec, g, &mut rng);
            min_support = min_support.min(found);
        }
    }
    SupportReport {
        supports,
        min_support,
        simple_spectrum: spec.is_simple(),
    }
}

fn min_support_in_eigenspace(spec: &LaplacianSpectrum, g: usize, rng: &mut ChaCha8Rng) -> usize {
    let q = spec.eigenspace(g);
    let (n, k) = q.shape();
    let mut best = n;
    let mut consider = |v: &DVector<f64>| {
        if v.norm() > 1e-6 {
            let s = support(v).len();
            if s > 0 {
                best = best.min(s);
            }
        }
    };

    // vectors forced to vanish on k-1 coordinates
    if binomial(n, k - 1) <= CIRCUIT_BUDGET {
        for zeros in combinations(n, k - 1) {
            let rows = DMatrix::from_fn(zeros.len(), k, |r, c| q[(zeros[r], c)]);
            let ns = linalg::null_space(&rows, 1e-10);
            for c in 0..ns.ncols() {
                consider(&(&q * ns.column(c)));
            }
        }
    }

    let proj = &q * q.transpose();
    let in_space = |v: &DVector<f64>| (&proj * v - v).amax() <= 1e-9 * v.amax();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v[j] = -1.0;
            if in_space(&v) {
                consider(&v);
            }
        }
    }
    for freq in 1..n {
        let w = 2.0 * std::f64::consts::PI * freq as f64 / n as f64;
        let c = DVector::from_fn(n, |j, _| (w * j as f64).cos());
        let s = DVector::from_fn(n, |j, _| (w * j as f64).sin());
        for v in [c, s] {
            if v.amax() > 1e-6 && in_space(&v) {
                consider(&v);
            }
        }
    }

    for _ in 0..EIGENSPACE_SAMPLES {
        let coeff = DVector::from_fn(k, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        consider(&(&q * coeff));
    }
    best
}

fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: usize = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Closed-form `min |I_α|` for the cases with a known formula.
pub fn family_min_support(family: Family, n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::TooSmall(n));
    }
    let pow2 = n.is_power_of_two();
    let value = match family {
        Family::Path if pow2 && n >= 4 => Some(n),
        Family::Path if n % 3 == 0 => Some(2 * n / 3),
        Family::Ring if is_prime(n) => Some(n - 1),
        Family::Ring if n % 3 == 0 => Some(2 * n / 3),
        Family::Ring if pow2 && n >= 8 => Some(n / 2),
        Family::Star | Family::Complete => Some(2),
        _ => None,
    };
    value.ok_or(Error::NotCharacterized {
        family: family.to_string(),
        n,
    })
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_eigs(g: &Graph) -> Vec<f64> {
        spectrum(&g.laplacian()).unwrap().eigenvalues
    }

    #[test]
    fn family_edges() {
        let p = Graph::family(Family::Path, 4).unwrap();
        assert_eq!(p.edges_one_based(), vec![(1, 2), (2, 3), (3, 4)]);
        assert_eq!(Graph::family(Family::Complete, 4).unwrap().edge_count(), 6);
        let s = Graph::family(Family::Star, 5).unwrap();
        assert_eq!(s.edges_one_based(), vec![(1, 2), (1, 3), (1, 4), (1, 5)]);
        assert_eq!(Graph::family(Family::Ring, 7).unwrap().edge_count(), 7);
        assert!(matches!(Graph::family(Family::Ring, 2), Err(Error::TooSmall(2))));
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(Graph::new(3, &[(1, 1)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, &[(1, 2), (2, 1)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, &[(1, 4)]), Err(Error::InvalidGraph(_))));
        assert!(!Graph::new(4, &[(1, 2), (3, 4)]).unwrap().is_connected());
        assert!(Graph::new(4, &[(1, 2), (2, 3), (3, 4)]).unwrap().is_connected());
    }

    #[test]
    fn single_edge_laplacian() {
        let l = laplacian(&Graph::new(2, &[(1, 2)]).unwrap());
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn path_and_star_spectra() {
        let s2 = std::f64::consts::SQRT_2;
        let p = sorted_eigs(&Graph::family(Family::Path, 4).unwrap());
        for (got, want) in p.iter().zip([0.0, 2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = sorted_eigs(&Graph::family(Family::Star, 4).unwrap());
        for (got, want) in s.iter().zip([0.0, 1.0, 1.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn path_fiedler_vector() {
        let sp = spectrum(&Graph::family(Family::Path, 4).unwrap().laplacian()).unwrap();
        let v = sp.eigenvectors.column(1);
        let sign = v[0].signum();
        let want = [0.65328, 0.27060, -0.27060, -0.65328];
        for (x, w) in v.iter().zip(want) {
            assert!((x * sign - w).abs() < 1e-4);
        }
    }

    #[test]
    fn complete_and_ring_multiplicities() {
        let sp = spectrum(&Graph::family(Family::Complete, 6).unwrap().laplacian()).unwrap();
        assert_eq!(sp.groups.len(), 2);
        assert_eq!(sp.groups[1].len(), 5);
        assert!((sp.group_value(1) - 6.0).abs() < 1e-10);
        let sp = spectrum(&Graph::family(Family::Ring, 5).unwrap().laplacian()).unwrap();
        let sizes: Vec<usize> = sp.groups.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![1, 2, 2]);
    }

    #[test]
    fn support_examples() {
        let rep = |f, n| support_report(&spectrum(&Graph::family(f, n).unwrap().laplacian()).unwrap());
        assert_eq!(rep(Family::Path, 8).min_support, 8);
        assert!(rep(Family::Path, 8).simple_spectrum);
        assert_eq!(rep(Family::Ring, 5).min_support, 4);
        assert_eq!(rep(Family::Star, 6).min_support, 2);
        assert!(!rep(Family::Star, 6).simple_spectrum);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(family_min_support(Family::Path, 6).unwrap(), 4);
        assert_eq!(family_min_support(Family::Path, 16).unwrap(), 16);
        assert_eq!(family_min_support(Family::Ring, 8).unwrap(), 4);
        assert_eq!(family_min_support(Family::Ring, 11).unwrap(), 10);
        assert_eq!(family_min_support(Family::Complete, 10).unwrap(), 2);
        assert!(matches!(
            family_min_support(Family::Path, 5),
            Err(Error::NotCharacterized { .. })
        ));
        assert!(matches!(
            family_min_support(Family::Ring, 4),
            Err(Error::NotCharacterized { .. })
        ));
    }

    #[test]
    fn support_threshold_is_relative() {
        let v = DVector::from_vec(vec![1e6, 1e-4, 0.0, -3.0]);
        assert_eq!(support(&v), vec![1, 4]);
    }
}
