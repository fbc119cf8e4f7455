mod common;

use lsqflow_core::graph::{self, family_min_support, support_report, Family};
use lsqflow_core::spectral::{self, ConditionMethod};
use lsqflow_core::{eigen, Graph, NetworkLinearEquation};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn sort_c(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Greedy nearest matching of two eigenvalue lists; returns the worst gap.
fn worst_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0_f64;
    for x in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}

/// Rows with a single nonzero entry, so that eigenvector supports often see
/// too few directions.
fn sparse_problem(rng: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize) -> NetworkLinearEquation {
    loop {
        let h = DMatrix::from_fn(n, m, |_, _| 0.0);
        let mut h = h;
        for i in 0..n {
            let c = rng.random_range(0..m);
            h[(i, c)] = rng.random_range(0.5..3.0);
        }
        let z = common::gaussian_vector(rng, n);
        if let Ok(p) = NetworkLinearEquation::new(h, z) {
            return p;
        }
    }
}

fn simple_graph(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Graph {
    loop {
        let g = common::connected_graph(rng, n);
        if graph::spectrum(&g.laplacian()).unwrap().is_simple() {
            return g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigenvalues_match_schur_oracle(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = common::rng(seed);
        let a = common::gaussian_matrix(&mut rng, n, n);
        let mut ours = eigen::eigenvalues(&a).unwrap();
        let oracle: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
        prop_assert_eq!(ours.len(), n);
        let scale = 1.0 + a.norm();
        prop_assert!(worst_gap(&ours, &oracle) <= 1e-8 * scale);
        let trace: f64 = ours.iter().map(|l| l.re).sum();
        prop_assert!((trace - a.trace()).abs() <= 1e-9 * scale);
        sort_c(&mut ours);
        let mut conj: Vec<Complex64> = ours.iter().map(|l| l.conj()).collect();
        sort_c(&mut conj);
        prop_assert!(worst_gap(&ours, &conj) <= 1e-8 * scale);
    }

    #[test]
    fn checker_methods_agree(seed in any::<u64>(), n in 4usize..=10, m in 2usize..=4) {
        let mut rng = common::rng(seed);
        let g = simple_graph(&mut rng, n);
        let p = if seed % 2 == 0 {
            common::gaussian_problem(&mut rng, n, m.min(n - 1))
        } else {
            sparse_problem(&mut rng, n, m.min(n - 1))
        };
        let both = spectral::check_condition(&p, &g, ConditionMethod::Both);
        prop_assert!(both.is_ok(), "{:?}", both.err());
        let supports = spectral::check_condition(&p, &g, ConditionMethod::SimpleSpectrum).unwrap();
        let m_spec = spectral::check_condition(&p, &g, ConditionMethod::MSpectrum).unwrap();
        prop_assert_eq!(supports.holds, m_spec.holds);
        if let Some(w) = supports.witness {
            prop_assert!(w.damping <= spectral::TAU_IM * w.eigenvalue * (1.0 + 1e-6));
            if w.span_dim < p.dim() {
                for &i in &w.support {
                    prop_assert!(p.row(i - 1).dot(&w.eta).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn stability_dichotomy(seed in any::<u64>(), n in 4usize..=8) {
        let mut rng = common::rng(seed);
        let g = simple_graph(&mut rng, n);
        let p = sparse_problem(&mut rng, n, 2);
        let a = spectral::analyze(&p, &g).unwrap();
        let ev = &a.report.m_eigenvalues;
        if a.verdict.holds {
            let worst = ev.iter().filter(|l| !spectral::is_zero(**l)).map(|l| l.re).fold(f64::MIN, f64::max);
            prop_assert!(worst < 0.0);
            let zeros = ev.iter().filter(|l| spectral::is_zero(**l)).count();
            prop_assert_eq!(zeros, 2);
            prop_assert_eq!(a.report.zero_space_dim, 2);
        } else {
            let w = a.verdict.witness.expect("failure comes with a witness");
            let target = Complex64::new(0.0, w.eigenvalue);
            // exact certificates give exactly imaginary modes, near ones only up to TAU_IM
            let tol = if w.span_dim < 2 { 1e-8 } else { spectral::TAU_IM };
            let hit = ev.iter().any(|l| l.re.abs() <= tol * l.norm() && (l - target).norm() <= 1e-6);
            prop_assert!(hit, "no eigenvalue near i·{}", w.eigenvalue);
        }
    }

    #[test]
    fn projector_is_consensus_average(seed in any::<u64>(), n in 4usize..=8, m in 2usize..=3) {
        let mut rng = common::rng(seed);
        let g = common::connected_graph(&mut rng, n);
        let p = common::gaussian_problem(&mut rng, n, m);
        let flow = spectral::assemble(&p, &g).unwrap();
        if let Ok(z) = spectral::zero_space_projector(&flow) {
            let avg = DMatrix::from_element(n, n, 1.0 / n as f64);
            let want = lsqflow_core::linalg::kron(&avg, &DMatrix::identity(m, m));
            prop_assert!((&z.projector - want).amax() <= 1e-8);
            prop_assert!(lsqflow_core::linalg::inf_norm(&(&z.projector * &z.projector - &z.projector)) <= 1e-8);
            let v = common::gaussian_vector(&mut rng, n * m);
            let wv = &z.projector * &v;
            prop_assert!((&z.projector * &wv - &wv).norm() <= 1e-8 * v.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let p = common::gaussian_problem(&mut rng, 6, 3);
        let g = common::connected_graph(&mut rng, 6);
        let flow = spectral::assemble(&p, &g).unwrap();
        let x = common::gaussian_vector(&mut rng, 18);
        let grad = flow.gradient(&x);
        let step = 1e-5;
        let fd = DVector::from_fn(18, |k, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            (flow.cost(&xp) - flow.cost(&xm)) / (2.0 * step)
        });
        prop_assert!((grad - fd).amax() <= 1e-5);
    }
}

#[test]
fn generic_rows_pass_on_path8() {
    let g = Graph::family(Family::Path, 8).unwrap();
    let mut rng = common::rng(0x5eed);
    let mut passed = 0;
    for _ in 0..200 {
        let p = common::gaussian_problem(&mut rng, 8, 3);
        let v = spectral::check_condition(&p, &g, ConditionMethod::Both).unwrap();
        passed += usize::from(v.holds);
    }
    assert_eq!(passed, 200);
}

#[test]
fn laplacian_invariants_for_families() {
    for f in Family::ALL {
        for n in 3..=64 {
            let g = Graph::family(f, n).unwrap();
            let l = g.laplacian();
            for r in l.row_iter() {
                assert!(r.sum().abs() <= 1e-12);
            }
            let sp = graph::spectrum(&l).unwrap();
            assert!(sp.eigenvalues[0].abs() <= sp.tolerance);
            assert!(sp.eigenvalues[1] > sp.tolerance, "{f} {n}");
            let ones = sp.eigenvectors.column(0);
            assert!((ones.amax() - ones.amin()).abs() < 1e-9);
        }
    }
}

#[test]
fn support_search_agrees_with_closed_forms() {
    for f in Family::ALL {
        for n in 3..=24 {
            let Ok(closed) = family_min_support(f, n) else { continue };
            let rep = support_report(&graph::spectrum(&Graph::family(f, n).unwrap().laplacian()).unwrap());
            if f == Family::Ring && n % 4 == 0 && n % 3 == 0 {
                // cos(πj/2) lies in the eigenspace of λ = 2 and vanishes on every other node
                let v = DVector::from_fn(n, |j, _| (std::f64::consts::FRAC_PI_2 * j as f64).cos());
                let l = Graph::family(f, n).unwrap().laplacian();
                assert!((&l * &v - &v * 2.0).amax() < 1e-12);
                assert_eq!(graph::support(&v).len(), n / 2);
                assert_eq!(rep.min_support, n / 2, "{f} {n}");
                assert!(rep.min_support < closed);
            } else {
                assert_eq!(rep.min_support, closed, "{f} {n}");
            }
        }
    }
}
