//! Property tests over randomly generated graphs, states and permutations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qllab_core::expander::{boundary_size, isoperimetric_exact};
use qllab_core::graph::{check_regular, d_regular_random, delete_random_edges, permute_vertices, two_lift};
use qllab_core::kuramoto::{order_parameter, phase_transform, step, Integrator, OscillatorState};
use qllab_core::product::{cartesian_product, verify_spectrum_composition};
use qllab_core::spectral::eigendecompose;
use qllab_core::state::symmetric::{permutation_operator, Permutation};
use qllab_core::state::{concurrence, convex_sum, density_from_state, tensor_distance, tensor_inner};
use qllab_core::{BiasedGraph, Complex64, GraphBuilder};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Graph on `2..=max_n` vertices; each pair is an edge with probability 1/2,
/// carrying a random magnitude and phase. Diagonal disorder is optional.
fn arb_graph(max_n: usize) -> impl Strategy<Value = BiasedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(prop::option::of((0.2f64..2.0, 0.0f64..TAU)), pairs),
            prop::collection::vec(-1.0f64..1.0, n),
            any::<bool>(),
        )
            .prop_map(move |(edges, diag, with_diag)| {
                let mut b = GraphBuilder::new(n);
                let mut k = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        if let Some((r, phi)) = edges[k] {
                            b.add_edge(u, v, Complex64::from_polar(r, phi)).unwrap();
                        }
                        k += 1;
                    }
                }
                if with_diag {
                    for (v, &x) in diag.iter().enumerate() {
                        b.set_diagonal(v, x);
                    }
                }
                b.build().unwrap()
            })
    })
}

fn arb_unit_vector(dim: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            v.into_iter().map(|(a, b)| c(a / norm, b / norm)).collect()
        })
}

fn arb_permutation(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_n).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
}

/// Random 2x2 unitary from an angle and three phases.
fn unitary2(theta: f64, a: f64, b: f64, g: f64) -> DMatrix<Complex64> {
    let (s, co) = theta.sin_cos();
    let e = |x: f64| Complex64::from_polar(1.0, x);
    DMatrix::from_row_slice(2, 2, &[e(a) * co, e(b) * s, -e(g - b) * s, e(g - a) * co])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjacency_is_exactly_hermitian(g in arb_graph(9)) {
        let a = g.adjacency();
        prop_assert_eq!(a.clone(), a.adjoint());
    }

    #[test]
    fn spectrum_sorted_with_small_residuals(g in arb_graph(9)) {
        let spec = eigendecompose(&g).unwrap();
        let a = g.adjacency();
        let vals = spec.eigenvalues();
        prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let trace: f64 = g.diagonal().iter().sum();
        prop_assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-8);
        let scale = a.norm().max(1.0);
        for (i, &lambda) in vals.iter().enumerate() {
            let v = spec.eigenvector(i);
            let r = &a * &v - &v * c(lambda, 0.0);
            prop_assert!(r.norm() <= 1e-8 * scale, "residual {} at {}", r.norm(), i);
        }
        let vecs = spec.eigenvectors();
        let gram = vecs.adjoint() * vecs;
        prop_assert!((gram - DMatrix::identity(spec.len(), spec.len())).norm() < 1e-9);
    }

    #[test]
    fn relabeling_keeps_spectrum(g in arb_graph(8), seed in any::<u64>()) {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        perm.swap(0, n - 1);
        let h = permute_vertices(&g, &perm).unwrap();
        let (a, b) = (eigendecompose(&g).unwrap(), eigendecompose(&h).unwrap());
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip_is_exact(g in arb_graph(7)) {
        let back = BiasedGraph::from_json(&g.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn cartesian_spectrum_composes(g in arb_graph(5), h in arb_graph(5), seed in any::<u64>()) {
        let report = verify_spectrum_composition(&g, &h, 1e-8, seed).unwrap();
        prop_assert!(report.holds, "{:?}", report);
        let p = cartesian_product(&g, &h);
        prop_assert_eq!(p.n(), g.n() * h.n());
        prop_assert_eq!(p.edge_count(), g.edge_count() * h.n() + h.edge_count() * g.n());
    }

    #[test]
    fn phase_transform_is_a_similarity(
        g in arb_graph(8),
        theta in prop::collection::vec(-10.0f64..10.0, 8),
    ) {
        let h = phase_transform(&g, &theta[..g.n()]).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count());
        let (a, b) = (eigendecompose(&g).unwrap(), eigendecompose(&h).unwrap());
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn two_lift_keeps_degrees_and_old_spectrum(g in arb_graph(7), seed in any::<u64>()) {
        let lift = two_lift(&g, seed).unwrap();
        let mut base = g.degrees();
        base.extend(g.degrees());
        base.sort_unstable();
        let mut lifted = lift.degrees();
        lifted.sort_unstable();
        prop_assert_eq!(lifted, base);
        let big = eigendecompose(&lift).unwrap();
        for &l in eigendecompose(&g).unwrap().eigenvalues() {
            prop_assert!(big.eigenvalues().iter().any(|x| (x - l).abs() < 1e-8), "missing {}", l);
        }
    }

    #[test]
    fn complement_has_same_boundary(g in arb_graph(9), mask in any::<u16>()) {
        let n = g.n();
        let inside: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let outside: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 0).collect();
        prop_assert_eq!(boundary_size(&g, &inside), boundary_size(&g, &outside));
    }

    #[test]
    fn deletion_removes_exact_count(n in 6usize..30, seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let g = d_regular_random(n, 4, seed).unwrap();
        let h = delete_random_edges(&g, frac, seed ^ 1).unwrap();
        let expected = g.edge_count() - (frac * g.edge_count() as f64).round() as usize;
        prop_assert_eq!(h.edge_count(), expected);
        prop_assert!(h.edges().all(|e| g.has_edge(e.u, e.v)));
    }

    #[test]
    fn mixing_never_raises_purity(
        states in prop::collection::vec(arb_unit_vector(4), 1..5),
        raw in prop::collection::vec(0.05f64..1.0, 4),
    ) {
        let rhos: Vec<_> = states.iter().map(|s| density_from_state(s).unwrap()).collect();
        let total: f64 = raw[..rhos.len()].iter().sum();
        let weights: Vec<f64> = raw[..rhos.len()].iter().map(|w| w / total).collect();
        let mix = convex_sum(&rhos, &weights).unwrap();
        let p = mix.purity();
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        prop_assert!(p <= rhos.iter().map(|r| r.purity()).fold(0.0, f64::max) + 1e-12);
    }

    #[test]
    fn concurrence_bounds_and_product_states(
        psi in arb_unit_vector(4),
        x in arb_unit_vector(2),
        y in arb_unit_vector(2),
    ) {
        let cpsi = concurrence(&density_from_state(&psi).unwrap()).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&cpsi));
        // Pure-state closed form 2|c00 c11 - c01 c10|.
        let closed = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm();
        prop_assert!((cpsi - closed).abs() < 1e-6, "{} vs {}", cpsi, closed);
        // Letter a fastest: index = a + 2b.
        let prod: Vec<Complex64> = (0..4).map(|k| x[k & 1] * y[k >> 1]).collect();
        prop_assert!(concurrence(&density_from_state(&prod).unwrap()).unwrap() < 1e-6);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(
        psi in arb_unit_vector(4),
        phi in arb_unit_vector(4),
        w in 0.0f64..1.0,
        ang in prop::collection::vec(0.0f64..TAU, 8),
    ) {
        let rho = convex_sum(
            &[density_from_state(&psi).unwrap(), density_from_state(&phi).unwrap()],
            &[w, 1.0 - w],
        ).unwrap();
        let ua = unitary2(ang[0], ang[1], ang[2], ang[3]);
        let ub = unitary2(ang[4], ang[5], ang[6], ang[7]);
        // Basis index a + 2b, so the joint operator is U_B ⊗ U_A in kron order.
        let u = ub.kronecker(&ua);
        let rotated = &u * rho.matrix() * u.adjoint();
        let rotated = qllab_core::DensityMatrix::new(rotated).unwrap();
        let (c0, c1) = (concurrence(&rho).unwrap(), concurrence(&rotated).unwrap());
        prop_assert!((c0 - c1).abs() < 1e-7, "{} vs {}", c0, c1);
    }

    #[test]
    fn tensor_distance_identity(
        u in arb_unit_vector(3), x in arb_unit_vector(2),
        v in arb_unit_vector(3), y in arb_unit_vector(2),
    ) {
        let ip = tensor_inner(&u, &x, &v, &y).unwrap();
        let uv: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let xy: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        prop_assert!((ip - uv * xy).norm() < 1e-12);
        let d = tensor_distance(&u, &x, &v, &y).unwrap();
        prop_assert!((d * d - (2.0 - 2.0 * (uv * xy).re)).abs() < 1e-10);
    }

    #[test]
    fn permutation_operators_compose(s in arb_permutation(5), t_seed in any::<u64>()) {
        let n = s.len();
        let mut t: Vec<usize> = (0..n).collect();
        t.rotate_left((t_seed % n as u64) as usize);
        if n > 1 && t_seed & 1 == 1 {
            t.swap(0, 1);
        }
        let (s, t) = (Permutation::new(s).unwrap(), Permutation::new(t).unwrap());
        let ps = permutation_operator(&s).unwrap().matrix;
        let pt = permutation_operator(&t).unwrap().matrix;
        let pst = permutation_operator(&s.compose(&t)).unwrap().matrix;
        prop_assert_eq!(&ps * &pt, pst);
        prop_assert_eq!(s.compose(&s.inverse()), Permutation::identity(n));
        prop_assert_eq!(s.compose(&t).sign(), s.sign() * t.sign());
    }

    #[test]
    fn order_parameter_in_unit_interval(theta in prop::collection::vec(-20.0f64..20.0, 1..40), shift in -5.0f64..5.0) {
        let r = order_parameter(&theta);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
        let shifted: Vec<f64> = theta.iter().map(|t| t + shift).collect();
        prop_assert!((order_parameter(&shifted) - r).abs() < 1e-9);
    }

    #[test]
    fn coupling_conserves_mean_phase(
        g in arb_graph(8),
        theta in prop::collection::vec(0.0f64..TAU, 8),
        k in 0.0f64..20.0,
        rk4 in any::<bool>(),
    ) {
        let n = g.n();
        let mut s = OscillatorState::new(theta[..n].to_vec(), vec![0.0; n]).unwrap();
        let before: f64 = s.theta.iter().sum();
        let integ = if rk4 { Integrator::Rk4 } else { Integrator::Euler };
        for _ in 0..50 {
            s = step(&s, &g, k, 1e-3, integ);
        }
        let after: f64 = s.theta.iter().sum();
        prop_assert!((after - before).abs() < 1e-9, "{} -> {}", before, after);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regular_sampler_is_regular_and_deterministic(n in 5usize..40, d in 2usize..5, seed in any::<u64>()) {
        prop_assume!(n * d % 2 == 0 && d < n);
        let g = d_regular_random(n, d, seed).unwrap();
        check_regular(&g, d).unwrap();
        prop_assert_eq!(g.edge_count(), n * d / 2);
        prop_assert_eq!(d_regular_random(n, d, seed).unwrap(), g);
    }

    #[test]
    fn cheeger_sandwich_on_small_regular_graphs(n in 6usize..15, d in 3usize..5, seed in any::<u64>()) {
        prop_assume!(n * d % 2 == 0 && d < n);
        let g = d_regular_random(n, d, seed).unwrap();
        let spec = eigendecompose(&g).unwrap();
        // Connected iff the top eigenvalue is simple.
        prop_assume!(spec.eigenvalue(0) - spec.eigenvalue(1) > 1e-9);
        let r = isoperimetric_exact(&g).unwrap();
        prop_assert_eq!(r.sandwich_holds(), Some(true), "{:?}", r);
        prop_assert!(r.subset.len() * 2 <= n);
        prop_assert_eq!(boundary_size(&g, &r.subset), r.boundary);
    }

    #[test]
    fn projection_weights_sum_for_uniform_vector(n in 2usize..20) {
        let bit = qllab_core::qlbit::build_regular_qlbit(n.max(4), 3, 1, n as u64);
        prop_assume!(bit.is_ok());
        let g = bit.unwrap();
        let ones = DVector::from_element(g.n(), c(1.0 / (g.n() as f64).sqrt(), 0.0));
        let p = qllab_core::qlbit::project_two_state(&g, &ones).unwrap();
        prop_assert!((p.alpha.norm_sqr() + p.beta.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(p.residual < 1e-6);
    }
}
