//! The system matrix `M = [[−H̃, −L⊗I], [L⊗I, 0]]` of the shifted flow, its
//! spectrum, the convergence condition, the Euler step threshold `ε*` and the
//! zero-eigenspace projector that fixes the limit of the dual variable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::graph::{self, Graph, LaplacianSpectrum};
use crate::linalg;
use crate::problem::{self, NetworkLinearEquation};

/// `λ` counts as purely imaginary when `|Re λ| ≤ TAU_IM · |λ|`, and as zero
/// when `|λ| ≤ TAU_IM`.
pub const TAU_IM: f64 = 1e-7;
/// Singular values `≤ TAU_KER · σ_max` span the kernels of `M` and `Mᵀ`.
pub const TAU_KER: f64 = 1e-9;
/// `hᵢᵀη` must vanish to this level on the witness support.
pub const WITNESS_TOL: f64 = 1e-8;
const EQUILIBRIUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AssembledFlow {
    pub n: usize,
    pub m: usize,
    pub h: DMatrix<f64>,
    pub z: DVector<f64>,
    pub laplacian: DMatrix<f64>,
    pub h_tilde: DMatrix<f64>,
    pub z_h: DVector<f64>,
    pub l_kron: DMatrix<f64>,
    pub system: DMatrix<f64>,
    pub y_star: DVector<f64>,
    /// `1 ⊗ y*`
    pub x_star: DVector<f64>,
}

impl AssembledFlow {
    /// `∇U(x) = H̃x − z_H`
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h_tilde * x - &self.z_h
    }

    /// `U(x) = ½ Σᵢ (hᵢᵀxᵢ − zᵢ)²`
    pub fn cost(&self, x: &DVector<f64>) -> f64 {
        (0..self.n)
            .map(|i| {
                let r = self.h.row(i).transpose().dot(&x.rows(i * self.m, self.m)) - self.z[i];
                0.5 * r * r
            })
            .sum()
    }

    /// `‖x − 1⊗y*‖²`
    pub fn error(&self, x: &DVector<f64>) -> f64 {
        (x - &self.x_star).norm_squared()
    }

    /// Same network with every observation removed (`H = 0`, `z = 0`): the
    /// lossless oscillator `ẋ = −(L⊗I)v, v̇ = (L⊗I)x`.
    pub fn without_gradient(&self) -> Self {
        let nm = self.n * self.m;
        let mut out = self.clone();
        out.h = DMatrix::zeros(self.n, self.m);
        out.z = DVector::zeros(self.n);
        out.h_tilde = DMatrix::zeros(nm, nm);
        out.z_h = DVector::zeros(nm);
        out.system = system_matrix(&out.h_tilde, &out.l_kron);
        out
    }
}

fn system_matrix(h_tilde: &DMatrix<f64>, l_kron: &DMatrix<f64>) -> DMatrix<f64> {
    let nm = h_tilde.nrows();
    let mut sys = DMatrix::zeros(2 * nm, 2 * nm);
    sys.view_mut((0, 0), (nm, nm)).copy_from(&(-h_tilde));
    sys.view_mut((0, nm), (nm, nm)).copy_from(&(-l_kron));
    sys.view_mut((nm, 0), (nm, nm)).copy_from(l_kron);
    sys
}

pub fn assemble(problem: &NetworkLinearEquation, graph: &Graph) -> Result<AssembledFlow> {
    let (n, m) = (problem.n_nodes(), problem.dim());
    if graph.n_nodes() != n {
        return Err(Error::DimensionMismatch(format!(
            "problem has {n} nodes but graph has {}",
            graph.n_nodes()
        )));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let nm = n * m;
    let mut h_tilde = DMatrix::zeros(nm, nm);
    let mut z_h = DVector::zeros(nm);
    for i in 0..n {
        let hi = problem.row(i);
        h_tilde
            .view_mut((i * m, i * m), (m, m))
            .copy_from(&(&hi * hi.transpose()));
        z_h.rows_mut(i * m, m).copy_from(&(&hi * problem.z()[i]));
    }
    let laplacian = graph.laplacian();
    let l_kron = linalg::kron(&laplacian, &DMatrix::identity(m, m));
    let system = system_matrix(&h_tilde, &l_kron);
    let y_star = problem::solve_least_squares(problem)?.y_star;
    let x_star = linalg::replicate(&y_star, n);
    Ok(AssembledFlow {
        n,
        m,
        h: problem.h().clone(),
        z: problem.z().clone(),
        laplacian,
        h_tilde,
        z_h,
        l_kron,
        system,
        y_star,
        x_star,
    })
}

/// The `2Nm` eigenvalues of `M`, sorted by real then imaginary part.
pub fn m_spectrum(flow: &AssembledFlow) -> Result<Vec<Complex64>> {
    let mut ev = eigen::eigenvalues(&flow.system)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

pub fn is_zero(l: Complex64) -> bool {
    l.norm() <= TAU_IM
}

/// Nonzero and on the imaginary axis up to `TAU_IM`.
pub fn is_imaginary(l: Complex64) -> bool {
    !is_zero(l) && l.re.abs() <= TAU_IM * l.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    SimpleSpectrum,
    MSpectrum,
    Both,
}

impl ConditionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionMethod::SimpleSpectrum => "simple_spectrum",
            ConditionMethod::MSpectrum => "m_spectrum",
            ConditionMethod::Both => "both",
        }
    }
}

/// Certificate that the condition fails: an eigenvalue `r` of `L` with an
/// eigenvector `α` and a unit `η` orthogonal to every `hᵢ`, `i ∈ I_α`. Then
/// `±ir` are eigenvalues of `M` with eigenvector built from `α ⊗ η`. Near the
/// boundary the orthogonality only holds up to `damping`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub eigenvalue: f64,
    pub alpha: DVector<f64>,
    /// 1-based support of `α`.
    pub support: Vec<usize>,
    pub eta: DVector<f64>,
    /// `dim span{hᵢ : i ∈ I_α}`
    pub span_dim: usize,
    /// `|Re λ|` of the mode: `½ Σᵢ αᵢ² (hᵢᵀη)²` for unit `α`, `η` to first
    /// order, or the value found on `M` when that estimate was too close to call.
    /// Zero for an exact certificate.
    pub damping: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub method: ConditionMethod,
}

pub fn check_condition(
    problem: &NetworkLinearEquation,
    graph: &Graph,
    method: ConditionMethod,
) -> Result<ConditionVerdict> {
    let flow = assemble(problem, graph)?;
    let spec = graph::spectrum(&flow.laplacian)?;
    check_assembled(&flow, &spec, method)
}

pub fn check_assembled(
    flow: &AssembledFlow,
    spec: &LaplacianSpectrum,
    method: ConditionMethod,
) -> Result<ConditionVerdict> {
    match method {
        ConditionMethod::SimpleSpectrum => by_supports(flow, spec),
        ConditionMethod::MSpectrum => by_m_spectrum(flow, spec, &m_spectrum(flow)?),
        ConditionMethod::Both => {
            let spectral = by_m_spectrum(flow, spec, &m_spectrum(flow)?)?;
            if !spec.is_simple() {
                return Ok(spectral);
            }
            let supports = by_supports(flow, spec)?;
            if supports.holds != spectral.holds {
                return Err(Error::InternalInconsistency(format!(
                    "support test says {} but spectrum of M says {}",
                    supports.holds, spectral.holds
                )));
            }
            Ok(ConditionVerdict {
                holds: supports.holds,
                witness: supports.witness,
                method: ConditionMethod::Both,
            })
        }
    }
}

/// Same decision from an already computed spectrum of `M`.
pub fn check_with_eigenvalues(
    flow: &AssembledFlow,
    spec: &LaplacianSpectrum,
    eigenvalues: &[Complex64],
) -> Result<ConditionVerdict> {
    by_m_spectrum(flow, spec, eigenvalues)
}

fn by_supports(flow: &AssembledFlow, spec: &LaplacianSpectrum) -> Result<ConditionVerdict> {
    if !spec.is_simple() {
        return Err(Error::NotApplicable(
            "support test needs a Laplacian with distinct eigenvalues".into(),
        ));
    }
    for k in 0..flow.n {
        let r = spec.eigenvalues[k];
        if r <= spec.tolerance {
            continue;
        }
        let mut w = witness_for(flow, r, spec.eigenvectors.column(k).into_owned());
        if settle(flow, &mut w) {
            return Ok(ConditionVerdict {
                holds: false,
                witness: Some(w),
                method: ConditionMethod::SimpleSpectrum,
            });
        }
    }
    Ok(ConditionVerdict {
        holds: true,
        witness: None,
        method: ConditionMethod::SimpleSpectrum,
    })
}

fn by_m_spectrum(
    flow: &AssembledFlow,
    spec: &LaplacianSpectrum,
    eigenvalues: &[Complex64],
) -> Result<ConditionVerdict> {
    let holds = !eigenvalues.iter().any(|&l| is_imaginary(l));
    let witness = if holds { None } else { find_witness(flow, spec) };
    Ok(ConditionVerdict {
        holds,
        witness,
        method: ConditionMethod::MSpectrum,
    })
}

/// The modes of `M` near `±ir` are damped by `Re λ ≈ −μ/2`, with `μ` the
/// smallest eigenvalue of `(Q⊗I)ᵀ H̃ (Q⊗I)`; this is the same `TAU_IM` cut the
/// spectrum of `M` is classified with.
fn undamped(damping: f64, r: f64) -> bool {
    damping <= TAU_IM * r
}

/// First-order estimates within this factor of the cut are settled against `M`.
const AMBIGUOUS: f64 = 1e3;

/// Whether the mode certified by `w` is undamped. Exact certificates are; clear
/// first-order margins decide the rest, and near the cut the mode itself is
/// found by inverse iteration on `M` and classified like the spectrum of `M`.
fn settle(flow: &AssembledFlow, w: &mut Witness) -> bool {
    if w.span_dim < flow.m {
        return true;
    }
    if w.damping > AMBIGUOUS * TAU_IM * w.eigenvalue {
        return false;
    }
    match mode_near(flow, w.eigenvalue, &w.alpha, &w.eta) {
        Some(l) => {
            w.damping = l.re.abs();
            is_imaginary(l)
        }
        None => undamped(w.damping, w.eigenvalue),
    }
}

/// Eigenvalue of `M` nearest `ir`, by inverse iteration started from the
/// lossless mode `(α⊗η, −i α⊗η)`.
fn mode_near(flow: &AssembledFlow, r: f64, alpha: &DVector<f64>, eta: &DVector<f64>) -> Option<Complex64> {
    let nm = flow.n * flow.m;
    let shift = Complex64::new(0.0, r);
    let a = DMatrix::from_fn(2 * nm, 2 * nm, |i, j| {
        Complex64::from(flow.system[(i, j)]) - if i == j { shift } else { Complex64::from(0.0) }
    });
    let lu = a.lu();
    let mut w = DVector::from_fn(2 * nm, |k, _| {
        let x = Complex64::from(alpha[(k % nm) / flow.m] * eta[k % flow.m]);
        if k < nm {
            x
        } else {
            x * Complex64::new(0.0, -1.0)
        }
    });
    w /= Complex64::from(w.norm());
    let mut lambda = shift;
    for _ in 0..20 {
        let Some(y) = lu.solve(&w) else { return Some(shift) };
        let next = shift + w.dotc(&w) / w.dotc(&y);
        if !next.is_finite() {
            return Some(shift);
        }
        w = &y / Complex64::from(y.norm());
        let done = (next - lambda).norm() <= 1e-14 * next.norm();
        lambda = next;
        if done {
            break;
        }
    }
    Some(lambda)
}

fn weakest_mode(flow: &AssembledFlow, basis: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let c = basis.transpose() * &flow.h_tilde * basis;
    let eig = c.symmetric_eigen();
    let j = eig.eigenvalues.imin();
    (eig.eigenvalues[j], eig.eigenvectors.column(j).into_owned())
}

fn witness_for(flow: &AssembledFlow, r: f64, alpha: DVector<f64>) -> Witness {
    let support = graph::support(&alpha);
    let rows = DMatrix::from_fn(support.len(), flow.m, |a, c| flow.h[(support[a] - 1, c)]);
    let span_dim = linalg::numerical_rank(&rows, problem::RANK_REL);
    let weighted = DMatrix::from_fn(support.len(), flow.m, |a, c| alpha[support[a] - 1] * rows[(a, c)]);
    let (eta, _) = linalg::smallest_right_singular_vector(&weighted);
    let damping = 0.5 * (&weighted * &eta).norm_squared() / alpha.norm_squared();
    Witness {
        eigenvalue: r,
        alpha,
        support,
        eta,
        span_dim,
        damping,
    }
}

/// Searches every nonzero Laplacian eigenspace `Q` for `x ∈ range(Q⊗I)` with
/// `xᵀH̃x ≈ 0`, which is what an imaginary eigenvalue of `M` needs, and turns
/// it into a rank-one certificate `α ⊗ η`.
pub fn find_witness(flow: &AssembledFlow, spec: &LaplacianSpectrum) -> Option<Witness> {
    let (n, m) = (flow.n, flow.m);
    for g in 0..spec.groups.len() {
        let r = spec.group_value(g);
        if r <= spec.tolerance {
            continue;
        }
        let q = spec.eigenspace(g);
        let k = q.ncols();
        let basis = linalg::kron(&q, &DMatrix::identity(m, m));
        let (mu, c) = weakest_mode(flow, &basis);
        if 0.5 * mu > AMBIGUOUS * TAU_IM * r {
            continue;
        }
        if k == 1 {
            let mut w = witness_for(flow, r, q.column(0).into_owned());
            if settle(flow, &mut w) {
                return Some(w);
            }
            continue;
        }
        // x = (Q⊗I)c reshaped to an N×m matrix whose rows are the node blocks;
        // its column space lies in range(Q)
        let x = &basis * c;
        let b = DMatrix::from_fn(n, m, |i, j| x[i * m + j]);
        let svd = b.svd(true, true);
        let top = svd.singular_values.imax();
        let eta0 = svd.v_t.as_ref()?.row(top).transpose();
        let u0 = svd.u.as_ref()?.column(top).into_owned();

        // every eigenvector vanishing where hᵢᵀη₀ ≠ 0 works with η₀
        let hn = linalg::max_abs_entry(&flow.h).max(1.0);
        let blocked: Vec<usize> = (0..n)
            .filter(|&i| flow.h.row(i).transpose().dot(&eta0).abs() > WITNESS_TOL * hn)
            .collect();
        let coeffs = if blocked.is_empty() {
            DMatrix::identity(k, k)
        } else {
            let rows = DMatrix::from_fn(blocked.len(), k, |a, c| q[(blocked[a], c)]);
            linalg::null_space(&rows, 1e-9)
        };
        if coeffs.ncols() > 0 {
            // generic combination so the support is as large as possible
            let golden = 0.5 * (1.0 + 5.0_f64.sqrt());
            let weights = DVector::from_fn(coeffs.ncols(), |j, _| golden.powi(j as i32));
            let mut alpha = &q * (&coeffs * weights);
            alpha /= alpha.norm();
            let mut w = witness_for(flow, r, alpha);
            if settle(flow, &mut w) {
                return Some(w);
            }
        }
        let mut w = witness_for(flow, r, u0.normalize());
        if settle(flow, &mut w) {
            return Some(w);
        }
    }
    None
}

/// `min over σ*(M) of −2 Re λ / |λ|²`, where `σ*(M)` holds the eigenvalues
/// that are neither zero nor imaginary.
pub fn epsilon_star_from_eigenvalues(eigenvalues: &[Complex64]) -> Result<f64> {
    eigenvalues
        .iter()
        .filter(|&&l| !is_zero(l) && !is_imaginary(l))
        .map(|l| -2.0 * l.re / l.norm_sqr())
        .min_by(f64::total_cmp)
        .ok_or(Error::NoStableModes)
}

pub fn epsilon_star(flow: &AssembledFlow) -> Result<f64> {
    epsilon_star_from_eigenvalues(&m_spectrum(flow)?)
}

#[derive(Debug, Clone)]
pub struct ZeroSpace {
    pub dim: usize,
    /// `W` restricted to the dual block, `Nm × Nm`.
    pub projector: DMatrix<f64>,
    /// Orthonormal basis of `range(W)`.
    pub range_basis: DMatrix<f64>,
}

/// Kernel dimension of `M` from its singular values.
pub fn kernel_dim(flow: &AssembledFlow) -> usize {
    let s = linalg::singular_values(&flow.system);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x <= TAU_KER * smax).count()
}

pub fn zero_space_projector(flow: &AssembledFlow) -> Result<ZeroSpace> {
    let ev = m_spectrum(flow)?;
    if ev.iter().any(|&l| is_imaginary(l)) {
        return Err(Error::ConditionViolated);
    }
    projector_unchecked(flow)
}

fn projector_unchecked(flow: &AssembledFlow) -> Result<ZeroSpace> {
    let nm = flow.n * flow.m;
    let svd = flow.system.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= TAU_KER * smax)
        .collect();
    let dim = idx.len();
    if dim != flow.m {
        return Err(Error::InternalInconsistency(format!(
            "zero eigenspace of M has dimension {dim}, expected {}",
            flow.m
        )));
    }
    let right = DMatrix::from_fn(2 * nm, dim, |r, c| vt[(idx[c], r)]);
    let left = DMatrix::from_fn(2 * nm, dim, |r, c| u[(r, idx[c])]);
    let gram = left.transpose() * &right;
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("zero eigenvalue of M is defective".into()))?;
    let full = &right * gram_inv * left.transpose();
    let projector = full.view((nm, nm), (nm, nm)).into_owned();
    let range_basis = right.rows(nm, nm).into_owned().qr().q();
    Ok(ZeroSpace {
        dim,
        projector,
        range_basis,
    })
}

/// Minimum-norm `v*` with `(L⊗I)v* = z_H − H̃x*`.
pub fn equilibrium_dual(flow: &AssembledFlow) -> Result<DVector<f64>> {
    let rhs = &flow.z_h - &flow.h_tilde * &flow.x_star;
    let v = linalg::min_norm_solve(&flow.l_kron, &rhs, 1e-12);
    check_equilibrium(flow, &v)?;
    Ok(v)
}

fn check_equilibrium(flow: &AssembledFlow, v: &DVector<f64>) -> Result<()> {
    let rhs = &flow.z_h - &flow.h_tilde * &flow.x_star;
    let residual = (&flow.l_kron * v - &rhs).amax();
    if residual > EQUILIBRIUM_TOL * (1.0 + rhs.amax()) {
        return Err(Error::EquilibriumInfeasible { residual });
    }
    Ok(())
}

/// `(I − W)v* + W v₀`
pub fn predict_v_limit(flow: &AssembledFlow, v_star: &DVector<f64>, v0: &DVector<f64>) -> Result<DVector<f64>> {
    let nm = flow.n * flow.m;
    if v_star.len() != nm || v0.len() != nm {
        return Err(Error::DimensionMismatch(format!("dual vectors must have {nm} entries")));
    }
    check_equilibrium(flow, v_star)?;
    let w = zero_space_projector(flow)?.projector;
    Ok(v_star - &w * v_star + &w * v0)
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub m_eigenvalues: Vec<Complex64>,
    pub epsilon_star: Option<f64>,
    pub zero_space_dim: usize,
    /// Present when the condition holds.
    pub projector_w: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub flow: AssembledFlow,
    pub laplacian: LaplacianSpectrum,
    pub verdict: ConditionVerdict,
    pub report: SpectralReport,
}

/// Everything the spectral side can say about one problem on one graph.
pub fn analyze(problem: &NetworkLinearEquation, graph: &Graph) -> Result<Analysis> {
    let flow = assemble(problem, graph)?;
    let laplacian = graph::spectrum(&flow.laplacian)?;
    let m_eigenvalues = m_spectrum(&flow)?;
    let mut verdict = by_m_spectrum(&flow, &laplacian, &m_eigenvalues)?;
    if laplacian.is_simple() {
        let supports = by_supports(&flow, &laplacian)?;
        if supports.holds != verdict.holds {
            return Err(Error::InternalInconsistency(format!(
                "support test says {} but spectrum of M says {}",
                supports.holds, verdict.holds
            )));
        }
        verdict = ConditionVerdict {
            method: ConditionMethod::Both,
            witness: supports.witness.or(verdict.witness),
            holds: verdict.holds,
        };
    }
    let epsilon_star = match epsilon_star_from_eigenvalues(&m_eigenvalues) {
        Ok(e) => Some(e),
        Err(Error::NoStableModes) => None,
        Err(e) => return Err(e),
    };
    let (zero_space_dim, projector_w) = if verdict.holds {
        let z = projector_unchecked(&flow)?;
        (z.dim, Some(z.projector))
    } else {
        (kernel_dim(&flow), None)
    };
    Ok(Analysis {
        flow,
        laplacian,
        verdict,
        report: SpectralReport {
            m_eigenvalues,
            epsilon_star,
            zero_space_dim,
            projector_w,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::scenarios;

    #[test]
    fn weakly_damped_mode_counts_as_imaginary() {
        // rows 3 and 5 carry the λ = 1 eigenvector and are nearly parallel:
        // M has a pair at −5.46e-8 ± i, inside the TAU_IM band
        let p = NetworkLinearEquation::from_rows(
            &[
                vec![0.5598439768951907, -1.2368473980264842],
                vec![0.6474694304818714, -0.47862251142107975],
                vec![0.012691082098359148, 0.02867416283787239],
                vec![-0.7865694293503865, 1.6457031084598177],
                vec![0.6303562885632656, 1.3687209114124674],
            ],
            &[0.0; 5],
        )
        .unwrap();
        let g = Graph::new(5, &[(1, 2), (1, 3), (1, 5), (2, 4)]).unwrap();
        let supports = check_condition(&p, &g, ConditionMethod::SimpleSpectrum).unwrap();
        let spectral = check_condition(&p, &g, ConditionMethod::MSpectrum).unwrap();
        assert!(!supports.holds && !spectral.holds);
        let w = supports.witness.unwrap();
        assert_eq!(w.support, vec![3, 5]);
        assert_eq!(w.span_dim, 2);
        assert!((w.damping - 5.46e-8).abs() < 1e-10);
        assert!(check_condition(&p, &g, ConditionMethod::Both).is_ok());
    }

    #[test]
    fn block_layout() {
        let p = scenarios::four_node_problem();
        let f = assemble(&p, &scenarios::labelled_path4()).unwrap();
        assert_eq!(f.system.shape(), (16, 16));
        assert_eq!(f.h_tilde.view((2, 2), (2, 2)), DMatrix::from_row_slice(2, 2, &[9.0, 0.0, 0.0, 0.0]));
        assert_eq!(f.z_h.rows(4, 2), DVector::from_vec(vec![-4.0, 0.0]));
        assert_eq!(f.system.view((8, 0), (8, 8)), f.l_kron);
        assert!(f.system.view((8, 8), (8, 8)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mismatched_or_disconnected_graph() {
        let p = scenarios::four_node_problem();
        let g5 = Graph::family(Family::Path, 5).unwrap();
        assert!(matches!(assemble(&p, &g5), Err(Error::DimensionMismatch(_))));
        let split = Graph::new(4, &[(1, 2), (3, 4)]).unwrap();
        assert!(matches!(assemble(&p, &split), Err(Error::Disconnected)));
    }

    #[test]
    fn diagnostic_threshold() {
        let e = epsilon_star_from_eigenvalues(&[Complex64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(e, 2.0);
        let e = epsilon_star_from_eigenvalues(&[Complex64::new(0.0, 0.0), Complex64::new(-1.0, 2.0)]).unwrap();
        assert!((e - 0.4).abs() < 1e-15);
        assert!(matches!(
            epsilon_star_from_eigenvalues(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]),
            Err(Error::NoStableModes)
        ));
    }

    #[test]
    fn consensus_projector_is_averaging() {
        let p = scenarios::four_node_problem();
        let f = assemble(&p, &scenarios::labelled_path4()).unwrap();
        let z = zero_space_projector(&f).unwrap();
        assert_eq!(z.dim, 2);
        let ones = DMatrix::from_element(4, 4, 0.25);
        let want = linalg::kron(&ones, &DMatrix::identity(2, 2));
        assert!((&z.projector - want).amax() < 1e-9);
        assert!((&z.projector * &z.projector - &z.projector).amax() < 1e-9);
    }

    #[test]
    fn dual_equilibrium_zeroes_the_rhs() {
        let p = scenarios::four_node_problem();
        let f = assemble(&p, &scenarios::labelled_path4()).unwrap();
        let v = equilibrium_dual(&f).unwrap();
        let lhs = -(&f.l_kron * &v) - f.gradient(&f.x_star);
        assert!(lhs.amax() < 1e-10);
        let lim = predict_v_limit(&f, &v, &v).unwrap();
        assert!((lim - &v).amax() < 1e-9);
        let bad = DVector::from_element(8, 1.0);
        assert!(matches!(
            predict_v_limit(&f, &bad, &bad),
            Err(Error::EquilibriumInfeasible { .. })
        ));
    }

    #[test]
    fn star_support_method_not_applicable() {
        let p = scenarios::four_node_problem();
        let star = Graph::family(Family::Star, 4).unwrap();
        assert!(matches!(
            check_condition(&p, &star, ConditionMethod::SimpleSpectrum),
            Err(Error::NotApplicable(_))
        ));
        let v = check_condition(&p, &star, ConditionMethod::Both).unwrap();
        assert!(!v.holds);
        assert_eq!(v.method, ConditionMethod::MSpectrum);
    }

    #[test]
    fn violated_condition_blocks_projector() {
        let p = scenarios::four_node_problem();
        let f = assemble(&p, &Graph::family(Family::Star, 4).unwrap()).unwrap();
        assert!(matches!(zero_space_projector(&f), Err(Error::ConditionViolated)));
    }

    #[test]
    fn spectrum_is_conjugate_closed() {
        let p = scenarios::planar_five_node_problem();
        let (g1, _) = scenarios::switching_pair();
        let ev = m_spectrum(&assemble(&p, &g1).unwrap()).unwrap();
        assert_eq!(ev.len(), 20);
        let mut conj: Vec<Complex64> = ev.iter().map(|l| l.conj()).collect();
        conj.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (a, b) in ev.iter().zip(&conj) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}
