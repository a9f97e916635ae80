mod common;

use circuit_geometry::bounds::{check_decomposition, estimate_distortion, estimate_distortion_with, SamplingMeasure};
use circuit_geometry::linalg::phase_aligned_distance;
use circuit_geometry::metric::{half_square_hessian, Euclidean};
use circuit_geometry::pauli::{basis, CMatrix};
use circuit_geometry::simulation::{slice_mean, synthesize_gates, SliceMean};
use circuit_geometry::*;
use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

fn coeffs(n: usize, y: Vec<f64>) -> CoeffVector {
    CoeffVector::new(n, y).unwrap()
}

fn random_unitary(rng: &mut impl Rng, n: usize, radius: f64) -> Unitary {
    let h = random_traceless_hermitian(rng, n);
    let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Unitary::new(n, evolve_oracle(&h, radius / norm)).unwrap()
}

#[test]
fn pauli_matrices_match_kronecker_products() {
    for n in 1..=3 {
        for s in basis(n).unwrap().strings() {
            let word = s.to_string();
            assert_eq!(s.matrix(), pauli_oracle(&word), "{word}");
        }
    }
}

#[test]
fn basis_order_is_weight_then_index() {
    for n in 1..=4 {
        let mut expected: Vec<String> = all_words(n).into_iter().skip(1).collect();
        expected.sort_by_key(|w| weight(w));
        let got: Vec<String> = enumerate_basis(n).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn basis_is_orthogonal_and_involutory() {
    for n in 1..=3 {
        let dim = 1usize << n;
        let mats: Vec<CMatrix> = basis(n).unwrap().strings().iter().map(|s| s.matrix()).collect();
        for (i, a) in mats.iter().enumerate() {
            assert_eq!(a * a, CMatrix::identity(dim, dim));
            for (j, b) in mats.iter().enumerate() {
                let tr = (a * b).trace();
                let expected = if i == j { dim as f64 } else { 0.0 };
                assert!((tr - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn decompose_matches_hilbert_schmidt_oracle() {
    let mut rng = rng(11);
    for n in 1..=3 {
        let words: Vec<String> = basis(n).unwrap().strings().iter().map(|s| s.to_string()).collect();
        for _ in 0..20 {
            let h = random_traceless_hermitian(&mut rng, n);
            let y = decompose(&h, n).unwrap();
            for (w, v) in words.iter().zip(y.as_slice()) {
                let oracle = (pauli_oracle(w) * &h).trace().re / (1usize << n) as f64;
                assert!((oracle - v).abs() < 1e-12);
            }
            assert!(max_diff(&hamiltonian_oracle(&words, y.as_slice()), &h) < 1e-12);
            assert!(max_diff(&reconstruct(&y), &h) < 1e-12);
        }
    }
}

#[test]
fn exp_coords_matches_taylor_oracle() {
    let mut rng = rng(12);
    for n in 1..=3 {
        let words: Vec<String> = basis(n).unwrap().strings().iter().map(|s| s.to_string()).collect();
        for _ in 0..10 {
            let base = random_unitary(&mut rng, n, 2.0);
            let y = random_vector(&mut rng, words.len(), 1.3);
            let x = exp_coords(&coeffs(n, y.clone()), &base).unwrap();
            let oracle = evolve_oracle(&hamiltonian_oracle(&words, &y), 1.0) * base.matrix();
            assert!(max_diff(x.matrix(), &oracle) < 1e-10);
        }
    }
}

#[test]
fn chart_examples() {
    let id = Unitary::identity(1).unwrap();
    let x = exp_coords(&coeffs(1, vec![0.3, 0.0, 0.0]), &id).unwrap();
    let expected = pauli_oracle("I") * c(0.3f64.cos(), 0.0) - pauli_oracle("X") * c(0.0, 0.3f64.sin());
    assert!(max_diff(x.matrix(), &expected) < 1e-15);
    let y = log_coords(&x, &id).unwrap();
    assert!((y.as_slice()[0] - 0.3).abs() < 1e-15 && y.as_slice()[1].abs() < 1e-15);

    let minus = exp_coords(&coeffs(1, vec![std::f64::consts::PI, 0.0, 0.0]), &id).unwrap();
    assert!(max_diff(minus.matrix(), &(pauli_oracle("I") * c(-1.0, 0.0))) < 1e-15);
    assert!(matches!(log_coords(&minus, &id), Err(Error::BranchCut { .. })));

    let z = Unitary::new(1, evolve_oracle(&pauli_oracle("Z"), 0.4)).unwrap();
    assert!((chart_segment_rho(&id, &z).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(chart_segment_rho(&z, &z).unwrap(), 0.0);
}

#[test]
fn small_step_rho_equals_generator_norm() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let x = random_unitary(&mut rng, 2, 2.5);
        let r = rng.random_range(0.01..1.0);
        let step = random_vector(&mut rng, 15, r);
        let next = exp_coords(&coeffs(2, step.clone()), &x).unwrap();
        let norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((chart_segment_rho(&x, &next).unwrap() - norm).abs() < 1e-9);
    }
}

#[test]
fn penalty_hessian_is_the_weight_diagonal() {
    let cfg = MetricConfig::new(3, 3.0).unwrap();
    let metric = cfg.penalty_metric();
    let words = basis(3).unwrap().strings().to_vec();
    let mut rng = rng(14);
    for _ in 0..20 {
        let r = rng.random_range(0.2..3.0);
        let y = random_vector(&mut rng, 63, r);
        let hess = half_square_hessian(&metric, &y).unwrap();
        let analytic = DMatrix::from_fn(63, 63, |i, j| match (i == j, words[i].weight()) {
            (false, _) => 0.0,
            (true, w) if w <= 2 => 1.0,
            (true, _) => 9.0,
        });
        assert!((&hess - &analytic).amax() < 1e-4);
        let eig = SymmetricEigen::new(hess).eigenvalues;
        assert!(eig.iter().all(|e| (e - 1.0).abs() < 1e-4 || (e - 9.0).abs() < 1e-4));
    }
    let y = random_vector(&mut rng, 15, 1.0);
    let hess = half_square_hessian(&Euclidean, &y).unwrap();
    assert!((hess - DMatrix::<f64>::identity(15, 15)).amax() < 5e-6);
}

#[test]
fn quadratic_norm_extrema_match_spectrum() {
    // A = Q diag(l) Q^T with a random orthogonal Q
    let mut rng = rng(15);
    let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let spectrum = [0.25, 1.0, 6.25];
    let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&spectrum)) * q.transpose();
    let norm = move |y: &[f64]| {
        let v = nalgebra::DVector::from_row_slice(y);
        (v.transpose() * &a * &v)[(0, 0)].sqrt()
    };
    for measure in [SamplingMeasure::Isotropic, SamplingMeasure::RandomSupport] {
        let est = estimate_distortion_with(&norm, 1, 100_000, 4, measure).unwrap();
        assert!(est.min >= 0.5 * (1.0 - 1e-12) && est.min < 0.5 * 1.02, "{measure:?} {est:?}");
        assert!(est.max <= 2.5 * (1.0 + 1e-12) && est.max > 2.5 * 0.98, "{measure:?} {est:?}");
    }
}

#[test]
fn distortion_constants_match_monte_carlo() {
    for (n, p) in [(1, 3.0), (2, 2.0), (3, 4.0), (3, 1.5)] {
        let cfg = MetricConfig::new(n, p).unwrap();
        let (m_small, m_big) = distortion_constants(&cfg);
        let est = estimate_distortion(&cfg.penalty_metric(), n, 100_000, 5).unwrap();
        assert!((est.min - m_small).abs() <= 0.01 * m_small, "{n} {p} {est:?}");
        assert!((est.max - m_big).abs() <= 0.01 * m_big, "{n} {p} {est:?}");
    }
}

fn one_slice_product(mean: &CoeffVector, delta: f64, cfg: &MetricConfig) -> CMatrix {
    let slices = [SliceMean {
        mean: mean.clone(),
        width: delta,
    }];
    let seq = synthesize_gates(&slices, delta, cfg, Default::default()).unwrap();
    seq.product().into_matrix()
}

#[test]
fn trotter_slice_error_order() {
    let cfg = MetricConfig::new(2, 4.0).unwrap();
    let mean = CoeffVector::from_terms(2, [("XI", 0.8), ("ZZ", 0.6)]).unwrap();
    let h = pauli_oracle("XI") * c(0.8, 0.0) + pauli_oracle("ZZ") * c(0.6, 0.0);
    let deltas = [0.2, 0.1, 0.05];
    let errors: Vec<f64> = deltas
        .iter()
        .map(|d| {
            let exact = evolve_oracle(&h, *d);
            phase_aligned_distance(&one_slice_product(&mean, *d, &cfg), &exact)
        })
        .collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    assert!(slope(&xs, &ys) >= 1.8, "errors {errors:?}");
}

#[test]
fn commuting_and_single_term_slices_are_exact() {
    let cfg = MetricConfig::new(2, 4.0).unwrap();
    let mean = CoeffVector::from_terms(2, [("ZI", 0.7), ("IZ", -0.3)]).unwrap();
    let h = pauli_oracle("ZI") * c(0.7, 0.0) + pauli_oracle("IZ") * c(-0.3, 0.0);
    for d in [0.5, 0.3, 0.1] {
        assert!(max_diff(&one_slice_product(&mean, d, &cfg), &evolve_oracle(&h, d)) < 1e-12);
    }
    let single = CoeffVector::from_terms(2, [("ZI", 0.9)]).unwrap();
    let slices = [SliceMean {
        mean: single,
        width: 0.5,
    }];
    let seq = synthesize_gates(&slices, 0.5, &cfg, Default::default()).unwrap();
    assert_eq!(seq.gates.len(), 2);
    assert!(max_diff(seq.product().matrix(), &evolve_oracle(&(pauli_oracle("ZI") * c(0.9, 0.0)), 0.5)) < 1e-14);
}

#[test]
fn simulation_error_shrinks_with_delta() {
    let cfg = MetricConfig::new(2, 4.0).unwrap();
    let s = Schedule::constant(CoeffVector::from_terms(2, [("XI", 0.8), ("ZZ", 0.6)]).unwrap(), 1.0).unwrap();
    let exact = evolve_oracle(&(pauli_oracle("XI") * c(0.8, 0.0) + pauli_oracle("ZZ") * c(0.6, 0.0)), 1.0);
    let mut last = f64::INFINITY;
    for d in [0.2, 0.1, 0.05] {
        let r = simulate(&s, &cfg, &SimulationOptions::fixed(d)).unwrap();
        let oracle_err = phase_aligned_distance(r.approx.matrix(), &exact) / 2.0;
        assert!((oracle_err - r.approx_error).abs() < 1e-12);
        assert!(r.approx_error < last + 1e-13);
        last = r.approx_error;
    }

    let single = Schedule::constant(CoeffVector::from_terms(2, [("XI", 0.5)]).unwrap(), 1.0).unwrap();
    let r = simulate(&single, &cfg, &SimulationOptions::fixed(0.25)).unwrap();
    assert!(r.approx_error < 1e-12);
    assert!((r.exact_path_length - 0.5).abs() < 1e-12);
}

#[test]
fn gate_waypoints_lie_on_the_broken_path() {
    let cfg = MetricConfig::new(3, 4.0).unwrap();
    let s = Schedule::constant(
        CoeffVector::from_terms(3, [("XII", 0.8), ("IZZ", -0.6), ("YIY", 0.3), ("XXX", 0.9)]).unwrap(),
        0.6,
    )
    .unwrap();
    let r = simulate(&s, &cfg, &SimulationOptions::fixed(0.2)).unwrap();
    let points = r.gate_sequence.waypoints();
    assert_eq!(points.len(), r.gate_count + 1);
    for (pair, g) in points.windows(2).zip(&r.gate_sequence.gates) {
        assert!(g.pauli.weight() <= 2);
        assert!((chart_segment_rho(&pair[0], &pair[1]).unwrap() - g.angle.abs()).abs() < 1e-12);
    }
    assert_eq!(points.last().unwrap(), &r.approx);
}

#[test]
fn gate_count_closed_form() {
    let cfg = MetricConfig::new(2, 4.0).unwrap();
    let s = Schedule::constant(CoeffVector::from_terms(2, [("XI", 0.8), ("ZZ", 0.6), ("YX", 0.1)]).unwrap(), 0.7)
        .unwrap();
    for d in [0.3, 0.2, 0.1, 0.05] {
        let r = simulate(&s, &cfg, &SimulationOptions::fixed(d)).unwrap();
        let slices = slice_mean(&s, d).unwrap();
        let full = (0.7f64 / d - 1e-9).ceil() as usize;
        assert_eq!(slices.len(), full);
        let per_slice = (1.0f64 / d - 1e-9).ceil() as usize;
        let expected: usize = slices
            .iter()
            .map(|sl| 3 * ((sl.width * per_slice as f64 / d) - 1e-9).ceil() as usize)
            .sum();
        assert_eq!(r.gate_count, expected);
    }
}

#[test]
fn witness_concatenation_is_feasible_for_the_product() {
    let cfg = MetricConfig::new(2, 4.0).unwrap();
    let opt = OptimizerSettings {
        restarts: 4,
        ..Default::default()
    };
    let mut rng = rng(16);
    for _ in 0..3 {
        let u = random_unitary(&mut rng, 2, 1.0);
        let v = random_unitary(&mut rng, 2, 1.0);
        let eu = distance_upper(&u, &cfg, &opt).unwrap();
        let ev = distance_upper(&v, &cfg, &opt).unwrap();
        let joined = ev.witness_path.concat(&eu.witness_path).unwrap();
        let uv = u.compose(&v).unwrap();
        let err = phase_aligned_distance(path_endpoint(&joined).matrix(), uv.matrix());
        assert!(err <= 2.0 * opt.tolerance + 1e-12, "endpoint error {err}");
        let joined_len = path_length(&joined, &cfg).unwrap();
        assert!((joined_len - (eu.upper + ev.upper)).abs() < 1e-12);
        assert!(distance_lower(&uv, &cfg).unwrap() <= joined_len + 1e-9);
    }
}

#[test]
fn witness_length_is_monotone_in_p() {
    let cfg = MetricConfig::new(3, 2.0).unwrap();
    let opt = OptimizerSettings {
        restarts: 2,
        max_evals: 1500,
        ..Default::default()
    };
    let mut rng = rng(17);
    let u = random_unitary(&mut rng, 3, 0.8);
    let est = distance_upper(&u, &cfg, &opt).unwrap();
    let mut last = 0.0;
    for p in [1.0, 2.0, 4.0, 8.0] {
        let cfg_p = MetricConfig::new(3, p).unwrap();
        let len = path_length(&est.witness_path, &cfg_p).unwrap();
        assert!(len >= last);
        last = len;
        assert_eq!(distance_lower(&u, &cfg_p).unwrap(), est.lower);
        assert!(est.lower <= len + 1e-9);
    }
}

#[test]
fn heavy_subgroup_target_is_bounded_by_its_subgroup_length() {
    let theta = 0.7;
    let p = 8.0;
    let cfg = MetricConfig::new(3, p).unwrap();
    let u = Unitary::new(3, evolve_oracle(&pauli_oracle("XXX"), theta)).unwrap();
    let opt = OptimizerSettings {
        restarts: 4,
        ..Default::default()
    };
    let est = distance_upper(&u, &cfg, &opt).unwrap();
    assert!(est.upper <= p * theta + 1e-3, "{}", est.upper);
    assert!((est.lower - theta).abs() < 1e-9);
}

#[test]
fn constructed_decompositions_satisfy_the_length_sandwich() {
    // uneven steps along single-axis subgroups, where the length is known
    let steps = [0.05, 0.2, 0.1, 0.15, 0.3];
    let total: f64 = steps.iter().sum();
    for (n, word, p) in [(1, "X", 2.0), (3, "XXX", 4.0), (3, "ZZI", 4.0)] {
        let cfg = MetricConfig::new(n, p).unwrap();
        let s = word.parse::<PauliString>().unwrap();
        let mut points = vec![Unitary::identity(n).unwrap()];
        let mut t = 0.0;
        for step in steps {
            t += step;
            points.push(exp_coords(&CoeffVector::single(s, t).unwrap(), &Unitary::identity(n).unwrap()).unwrap());
        }
        let length = if s.weight() <= 2 { total } else { p * total };
        let check = check_decomposition(&points, length, &cfg).unwrap();
        let (m_small, m_big) = distortion_constants(&cfg);
        let m = steps.len() as f64;
        assert!((check.length - length).abs() < 1e-12);
        assert!(m * m_small * check.rho_inf <= length + 1e-12);
        assert!(length <= m * m_big * check.rho_sup + 1e-12);
        assert!(check.reports.iter().all(|r| r.passed), "{:?}", check.reports);
    }
}
