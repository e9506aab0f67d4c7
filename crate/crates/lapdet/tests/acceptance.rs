//! Acceptance suite. Each test exercises one release criterion end to end
//! at its stated tolerance and prints a single PASS/FAIL line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use lapdet::{
    certify_detectability, check_inf_norm_uniqueness, check_positivity, check_right_stochastic,
    expm, expm_taylor_oracle, generate_graph, is_irreducible_bruteforce, lpv_transition,
    numeric_detectability, run_estimator, DenseMatrix, DiscreteSystem, Edge, GraphKind,
    KalmanConfig, LpvSchedule, LpvSegment, OutputSpec, WeightedGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(number: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {verdict} — {detail}");
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}

fn pattern_graph(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
    let edges = edges.iter().map(|&(i, j)| Edge::new(i, j, 1.0)).collect();
    WeightedGraph::new(n, true, edges).unwrap()
}

/// Disjoint union of two strongly connected digraphs; only the first
/// component will be measured.
fn two_component_graph(seed: u64, n1: usize, n2: usize) -> WeightedGraph {
    let a = generate_graph(&GraphKind::Random, n1, seed, (0.5, 5.0)).unwrap();
    let b = generate_graph(&GraphKind::Random, n2, seed + 1_000_000, (0.5, 5.0)).unwrap();
    let mut edges: Vec<Edge> = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|e| Edge::new(e.from + n1, e.to + n1, e.weight)));
    WeightedGraph::new(n1 + n2, true, edges).unwrap()
}

struct DetectCase {
    graph: WeightedGraph,
    measured: Vec<usize>,
    dt: f64,
}

/// The 200 positive cross-validation cases shared by criteria 4 and 7.
fn detectable_cases() -> Vec<DetectCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c41_5044);
    (0..200)
        .map(|case| {
            let n = 2 + case % 9;
            let graph =
                generate_graph(&GraphKind::Random, n, 40_000 + case as u64, (0.5, 5.0)).unwrap();
            let mut measured: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            if measured.is_empty() {
                measured.push(rng.gen_range(0..n));
            }
            let dt = [0.01, 0.1, 1.0][case % 3];
            DetectCase { graph, measured, dt }
        })
        .collect()
}

/// The 50 negative controls shared by criteria 4 and 7: two strongly
/// connected components, measurement confined to the first.
fn negative_controls() -> Vec<DetectCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e45_4741);
    (0..50)
        .map(|case| {
            let n1 = rng.gen_range(2..=5);
            let n2 = rng.gen_range(2..=5);
            let graph = two_component_graph(50_000 + case as u64, n1, n2);
            let mut measured: Vec<usize> = (0..n1).filter(|_| rng.gen_bool(0.5)).collect();
            if measured.is_empty() {
                measured.push(rng.gen_range(0..n1));
            }
            DetectCase { graph, measured, dt: 0.5 }
        })
        .collect()
}

fn discretized(case: &DetectCase) -> (DenseMatrix, DenseMatrix) {
    let a = expm(&case.graph.laplacian().scale(-case.dt)).unwrap().value;
    let c = OutputSpec::MeasuredNodes(case.measured.clone())
        .output_matrix(case.graph.node_count())
        .unwrap();
    (a, c)
}

#[test]
fn acceptance_1_irreducibility_oracle_equivalence() {
    let start = Instant::now();
    let mut checked = 0usize;

    // Exhaustive sweep over every sparsity pattern on 3 nodes.
    for bits in 0u32..(1 << 6) {
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    if bits & (1 << k) != 0 {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
        }
        let g = pattern_graph(3, &edges);
        assert_eq!(
            g.is_strongly_connected(),
            is_irreducible_bruteforce(&g.adjacency_matrix()).unwrap(),
            "disagreement on n=3 pattern {bits:06b}"
        );
        checked += 1;
    }

    // 500 random patterns for each n in 4..=7, densities spread over
    // [0.1, 0.9] so both verdicts occur.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 4..=7 {
        for _ in 0..500 {
            let p = rng.gen_range(0.1..=0.9);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
            let g = pattern_graph(n, &edges);
            assert_eq!(
                g.is_strongly_connected(),
                is_irreducible_bruteforce(&g.adjacency_matrix()).unwrap(),
                "disagreement on a random n={n} pattern"
            );
            checked += 1;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        "irreducibility oracle equivalence",
        elapsed < 60.0,
        &format!("{checked} patterns agreed in {elapsed:.2}s (limit 60s)"),
    );
}

#[test]
fn acceptance_2_perron_frobenius_positivity() {
    let mut worst: f64 = f64::INFINITY;
    for case in 0..100u64 {
        let n = 2 + (case as usize) % 6;
        let g = generate_graph(&GraphKind::Random, n, 2_000 + case, (0.2, 5.0)).unwrap();
        assert!(g.is_strongly_connected());
        let a = g.adjacency_matrix();
        let powered = (&DenseMatrix::identity(n) + &a).pow(n as u32 - 1);
        let min = powered.data().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "case {case}: (I+A)^{} has a non-positive entry {min}", n - 1);
        worst = worst.min(min);
    }
    criterion(
        2,
        "Perron-Frobenius power positivity",
        true,
        &format!("100/100 matrices strictly positive; smallest entry {worst:.3e}"),
    );
}

#[test]
fn acceptance_3_heat_kernel_certificates() {
    let start = Instant::now();
    let mut min_margin = f64::INFINITY;
    for case in 0..200u64 {
        let n = 2 + (case as usize) % 9;
        let dt = [0.01, 0.1, 1.0][(case as usize) % 3];
        let g = generate_graph(&GraphKind::Random, n, 3_000 + case, (1e-3, 5.0)).unwrap();
        let m = expm(&g.laplacian().scale(-dt)).unwrap().value;

        assert!(check_positivity(&m, None), "case {case}: positivity failed (n={n}, dt={dt})");
        let evidence = check_right_stochastic(&m, None);
        assert!(evidence.passed, "case {case}: stochasticity failed: {evidence:?}");
        assert!(
            check_inf_norm_uniqueness(&m, 1000, 7_000 + case).unwrap(),
            "case {case}: norm uniqueness failed (n={n}, dt={dt})"
        );

        let tol = 1e-12 * m.max_abs();
        min_margin = min_margin.min(evidence.min_entry / tol);
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        3,
        "positivity / stochasticity / norm uniqueness",
        elapsed < 120.0,
        &format!(
            "200/200 kernels certified in {elapsed:.2}s (limit 120s); min entry {min_margin:.1e}x its tolerance"
        ),
    );
}

#[test]
fn acceptance_4_detectability_cross_validation() {
    // Positive cases: certificate and numeric path must both say detectable.
    let mut max_restricted_radius: f64 = 0.0;
    for (k, case) in detectable_cases().iter().enumerate() {
        let out = OutputSpec::MeasuredNodes(case.measured.clone());
        let (applicable, cert) = certify_detectability(&case.graph, &out, case.dt).unwrap();
        assert!(applicable && cert, "case {k}: certificate failed");
        let (a, c) = discretized(case);
        let numeric = numeric_detectability(&a, &c, None).unwrap();
        assert!(
            numeric.detectable,
            "case {k}: numeric check disagrees (dim {}, modulus {})",
            numeric.unobservable_dim, numeric.max_unobservable_modulus
        );
        max_restricted_radius = max_restricted_radius.max(numeric.max_unobservable_modulus);
    }

    // Negative controls: unmeasured strongly connected component leaves a
    // marginally stable consensus mode unobserved.
    for (k, case) in negative_controls().iter().enumerate() {
        let out = OutputSpec::MeasuredNodes(case.measured.clone());
        let (applicable, cert) = certify_detectability(&case.graph, &out, case.dt).unwrap();
        assert!(!applicable && !cert, "control {k}: certificate should be inapplicable");
        let (a, c) = discretized(case);
        let numeric = numeric_detectability(&a, &c, None).unwrap();
        assert!(!numeric.detectable, "control {k}: numeric check should fail");
        assert!(
            (numeric.max_unobservable_modulus - 1.0).abs() <= 1e-9,
            "control {k}: modulus {} not 1±1e-9",
            numeric.max_unobservable_modulus
        );
    }

    // Zero-row-sum outputs: difference measurements leave the consensus
    // mode invisible, so the certificate cannot conclude and the numeric
    // path must reject.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a45_524f);
    for k in 0..20u64 {
        let n = 3 + (k as usize) % 6;
        let g = generate_graph(&GraphKind::Random, n, 60_000 + k, (0.5, 5.0)).unwrap();
        let rows = rng.gen_range(1..=2);
        let mut c = DenseMatrix::zeros(rows, n);
        for r in 0..rows {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            c[(r, i)] = 1.0;
            c[(r, j)] = -1.0;
        }
        let out = OutputSpec::Matrix(c.clone());
        let (applicable, cert) = certify_detectability(&g, &out, 0.1).unwrap();
        assert!(applicable, "zero-row-sum case {k}: graph is strongly connected");
        assert!(!cert, "zero-row-sum case {k}: certificate must be inconclusive");
        let a = expm(&g.laplacian().scale(-0.1)).unwrap().value;
        let numeric = numeric_detectability(&a, &c, None).unwrap();
        assert!(!numeric.detectable, "zero-row-sum case {k}: numeric check should fail");
    }

    criterion(
        4,
        "detectability cross-validation",
        true,
        &format!(
            "200 positive + 50 component + 20 zero-row-sum cases agreed; max restricted radius {max_restricted_radius:.6}"
        ),
    );
}

#[test]
fn acceptance_5_expm_against_series_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_rel: f64 = 0.0;
    for case in 0..100 {
        let n = rng.gen_range(1..=10);
        let target = rng.gen_range(0.05..=5.0);
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            data.push(rng.gen_range(-1.0..=1.0));
        }
        let raw = DenseMatrix::from_row_major(n, n, data).unwrap();
        let norm = raw.one_norm();
        let a = if norm > 0.0 { raw.scale(target / norm) } else { raw };
        let fast = expm(&a).unwrap().value;
        let slow = expm_taylor_oracle(&a, 100);
        let rel = (&fast - &slow).frobenius_norm() / slow.frobenius_norm();
        assert!(rel <= 1e-10, "case {case}: series disagreement {rel:.2e}");
        worst_rel = worst_rel.max(rel);
    }

    let mut worst_shift: f64 = 0.0;
    for case in 0..100 {
        let n = rng.gen_range(1..=10);
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            data.push(rng.gen_range(-1.0..=1.0));
        }
        let a = DenseMatrix::from_row_major(n, n, data).unwrap();
        let gamma: f64 = rng.gen_range(-3.0..=3.0);
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] += gamma;
        }
        let lhs = expm(&shifted).unwrap().value;
        let rhs = expm(&a).unwrap().value.scale(gamma.exp());
        let rel = (&lhs - &rhs).frobenius_norm() / rhs.frobenius_norm();
        assert!(rel <= 1e-10, "case {case}: shift identity off by {rel:.2e}");
        worst_shift = worst_shift.max(rel);
    }

    criterion(
        5,
        "matrix exponential correctness",
        true,
        &format!(
            "100 series comparisons (worst {worst_rel:.1e}) and 100 shift identities (worst {worst_shift:.1e}) within 1e-10"
        ),
    );
}

#[test]
fn acceptance_6_lpv_transition_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_split: f64 = 0.0;
    for case in 0..100u64 {
        let n = rng.gen_range(2..=8);
        let segments: Vec<LpvSegment> = (0..rng.gen_range(1..=10))
            .map(|s| LpvSegment {
                graph: generate_graph(&GraphKind::Random, n, 80_000 + case * 16 + s, (0.2, 2.0))
                    .unwrap(),
                dt: rng.gen_range(0.1..=1.0),
            })
            .collect();
        let schedule = LpvSchedule::new(segments.clone()).unwrap();
        let product = lpv_transition(&schedule).unwrap();

        assert!(check_positivity(&product, None), "case {case}: product not positive");
        let evidence = check_right_stochastic(&product, None);
        assert!(evidence.passed, "case {case}: product not right stochastic: {evidence:?}");

        // Split one segment in two; the product must not move.
        let split_at = rng.gen_range(0..segments.len());
        let theta = rng.gen_range(0.2..=0.8);
        let mut split_segments = Vec::new();
        for (i, seg) in segments.iter().enumerate() {
            if i == split_at {
                split_segments.push(LpvSegment {
                    graph: seg.graph.clone(),
                    dt: seg.dt * theta,
                });
                split_segments.push(LpvSegment {
                    graph: seg.graph.clone(),
                    dt: seg.dt * (1.0 - theta),
                });
            } else {
                split_segments.push(seg.clone());
            }
        }
        let split_schedule = LpvSchedule::new(split_segments).unwrap();
        let diff =
            (&product - &lpv_transition(&split_schedule).unwrap()).frobenius_norm();
        assert!(diff <= 1e-10, "case {case}: splitting moved the product by {diff:.2e}");
        worst_split = worst_split.max(diff);
    }
    criterion(
        6,
        "schedule transition products",
        true,
        &format!("100 schedules positive right-stochastic; worst splitting drift {worst_split:.1e}"),
    );
}

#[test]
fn acceptance_7_kalman_boundedness_witness() {
    let start = Instant::now();

    // Every detectable case keeps its covariance trace bounded.
    let mut worst_ratio: f64 = 0.0;
    for (k, case) in detectable_cases().iter().enumerate() {
        let (a, c) = discretized(case);
        let n = case.graph.node_count();
        let sys = DiscreteSystem {
            a_d: a,
            b_d: DenseMatrix::zeros(n, 0),
            c,
            dt: case.dt,
        };
        let cfg = KalmanConfig::diagonal(n, case.measured.len(), 0.01, 0.01, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(90_000 + k as u64);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let trace =
            run_estimator(&sys, &cfg, &x0, &vec![0.0; n], 1000, 91_000 + k as u64).unwrap();
        let reference = trace.covariance_traces[50];
        let bound = 100.0 * reference;
        let max_after: f64 =
            trace.covariance_traces[50..].iter().cloned().fold(0.0, f64::max);
        assert!(
            max_after <= bound,
            "case {k}: trace reached {max_after} > 100 x trace(P_50) = {bound}"
        );
        worst_ratio = worst_ratio.max(max_after / reference);
    }

    // Negative controls diverge: process noise accumulates on the
    // unmeasured component's consensus mode.
    let mut min_growth = f64::INFINITY;
    for (k, case) in negative_controls().iter().enumerate() {
        let (a, c) = discretized(case);
        let n = case.graph.node_count();
        let sys = DiscreteSystem {
            a_d: a,
            b_d: DenseMatrix::zeros(n, 0),
            c,
            dt: case.dt,
        };
        let cfg = KalmanConfig::diagonal(n, case.measured.len(), 0.01, 0.01, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(92_000 + k as u64);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let trace =
            run_estimator(&sys, &cfg, &x0, &vec![0.0; n], 1000, 93_000 + k as u64).unwrap();
        let growth = trace.covariance_traces[1000] / trace.covariance_traces[50];
        assert!(
            growth >= 2.0,
            "control {k}: trace grew only {growth:.2}x between steps 50 and 1000"
        );
        min_growth = min_growth.min(growth);
    }

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        7,
        "Kalman boundedness witness",
        elapsed < 600.0,
        &format!(
            "200 bounded runs (worst max/ref ratio {worst_ratio:.2}) and 50 divergence witnesses (min growth {min_growth:.1}x) in {elapsed:.1}s (limit 600s)"
        ),
    );
}
