use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pushsaga_core::analysis::{
    build_g, build_h_scale, certify, empirical_error_vector, forcing_term, gamma, gamma_working,
    spectral_radius, stepsize_inequalities, NetworkParams,
};
use pushsaga_core::digraph::{build_cycle_plus_edges, make_column_stochastic, spectral_profile, MixingWeights};
use pushsaga_core::objective::{FiniteSumProblem, QuadraticProblem};
use pushsaga_core::solvers::{network_params, step, Algorithm, NetworkState, Parallelism};
use pushsaga_core::Rational;

fn random_params(rng: &mut ChaCha8Rng) -> NetworkParams<f64> {
    let n = rng.random_range(2..30);
    let m_min = rng.random_range(1..50);
    let pi_min = 1.0 / (n as f64 * rng.random_range(1.0..3.0));
    let l: f64 = rng.random_range(0.5..20.0);
    NetworkParams {
        lambda: rng.random_range(0.0..0.99),
        smoothness: l,
        strong_convexity: l / rng.random_range(1.0..200.0),
        n,
        m_min,
        m_max: m_min + rng.random_range(0..100),
        psi: rng.random_range(1.0..50.0),
        pi_max: pi_min * rng.random_range(1.0..2.0),
        pi_min,
        t: rng.random_range(0.0..5.0),
    }
}

#[test]
fn spectral_radius_stays_below_working_rate_up_to_alpha_bar() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let p = random_params(&mut rng);
        let ab = p.alpha_bar();
        for frac in [1e-3, 0.1, 0.37, 0.8, 1.0] {
            let a = frac * ab;
            let rho = spectral_radius(&build_g(&a, &p).unwrap()).unwrap();
            let gw = gamma_working(&a, &p);
            assert!(rho <= gw + 1e-9, "{p:?} at {frac} alpha_bar: rho {rho} > {gw}");
            assert!(rho < 1.0);
        }
        // Small stepsizes leave the optimality block barely contracting.
        let tiny = 1e-6 * ab;
        let rho = spectral_radius(&build_g(&tiny, &p).unwrap()).unwrap();
        assert!(rho > p.gamma(), "rho {rho} gamma {}", p.gamma());
    }
}

#[test]
fn exact_inequalities_hold_throughout_the_stepsize_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..15 {
        let q = random_params(&mut rng).map(|&x| Rational::from_float(x).unwrap());
        let ab = q.alpha_bar();
        for denom in [1i64, 2, 7, 1000] {
            let a = ab.clone() / Rational::from_integer(denom.into());
            let rep = stepsize_inequalities(&a, &q, &Rational::zero()).unwrap();
            assert!(rep.all_hold(), "alpha_bar / {denom}: {rep:?}");
        }
    }
}

#[test]
fn gamma_moves_toward_one_with_harder_instances() {
    let g = |big_m: usize, m: usize, kappa: f64, lambda: f64, psi: f64| gamma(big_m, m, kappa, lambda, psi);
    let base = g(40, 10, 5.0, 0.5, 2.0);
    assert!(g(40, 10, 8.0, 0.5, 2.0) >= base);
    assert!(g(40, 10, 5.0, 0.5, 6.0) >= base);
    assert!(g(40, 10, 5.0, 0.9, 2.0) >= base);
    assert!(g(80, 10, 5.0, 0.5, 2.0) >= base);
    assert!(g(40, 20, 5.0, 0.5, 2.0) <= base);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let gm = p.gamma();
        assert!(gm > 0.0 && gm < 1.0);
        let harder = NetworkParams { psi: p.psi * 1.5, strong_convexity: p.strong_convexity / 1.5, ..p.clone() };
        assert!(harder.gamma() >= gm);
    }
}

#[test]
fn certificate_marks_only_the_open_range_as_guaranteed() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = random_params(&mut rng);
    let ab = p.alpha_bar();
    assert!(certify(0.5 * ab, &p).unwrap().guaranteed);
    assert!(!certify(ab, &p).unwrap().guaranteed);
    assert!(!certify(0.0, &p).unwrap().guaranteed);
    assert!(certify(-ab, &p).is_err());
    let far = certify(1e4 * ab, &p).unwrap();
    assert!(!far.passes() && far.rho > 1.0);
}

struct Setup {
    problem: QuadraticProblem<f64>,
    weights: MixingWeights<f64>,
    params: NetworkParams<f64>,
    profile: pushsaga_core::digraph::SpectralProfile<f64>,
    z_star: Vec<f64>,
}

fn directed_setup() -> Setup {
    let g = build_cycle_plus_edges(4, 3, 8).unwrap();
    let profile = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-13).unwrap();
    assert!(profile.t > 0.0, "graph should not be weight balanced");
    let problem = QuadraticProblem::<f64>::random(&[4, 4, 4, 4], 2, 3.0, 21).unwrap();
    let z_star = problem.known_minimizer().unwrap().to_vec();
    let params = network_params(&profile, &problem);
    let weights = MixingWeights::from_matrix(&profile.weights);
    Setup { problem, weights, params, profile, z_star }
}

#[test]
fn error_vector_vanishes_at_the_fixed_point() {
    let s = directed_setup();
    let mut state = NetworkState::init(&s.problem, Some(&vec![s.z_star.clone(); 4]), 0, true, true).unwrap();
    for (node, &pi) in state.nodes.iter_mut().zip(&s.profile.pi) {
        node.y = 4.0 * pi;
        node.x = s.z_star.iter().map(|v| v * node.y).collect();
        node.w.iter_mut().for_each(|v| *v = 0.0);
    }
    let u = empirical_error_vector(&state, &s.z_star, &s.profile, s.params.smoothness)
        .unwrap()
        .to_array()
        .unwrap();
    assert!(u.iter().all(|v| v.abs() < 1e-24), "{u:?}");
}

#[test]
fn error_vector_requires_reference_points_for_the_auxiliary_entry() {
    let s = directed_setup();
    let state = NetworkState::init(&s.problem, None, 0, true, false).unwrap();
    let e = empirical_error_vector(&state, &s.z_star, &s.profile, s.params.smoothness).unwrap();
    assert!(e.auxiliary.is_none() && e.to_array().is_none());
    assert!(empirical_error_vector(&state, &[0.0], &s.profile, 1.0).is_err());
}

/// Averages `u^{k+1} - G u^k - lambda^k h s^k` over independent sampling
/// sequences. The one-step bound holds conditionally, so by linearity it
/// also holds for the unconditional means.
#[test]
fn one_step_error_bound_holds_on_average() {
    let s = directed_setup();
    let alpha = s.params.alpha_bar();
    let g = build_g(&alpha, &s.params).unwrap();
    let h = build_h_scale(&alpha, &s.params).unwrap();
    let lambda = s.params.lambda;
    let rounds = 6;
    let trials = 2000;
    let x0: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        (0..4).map(|_| (0..2).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
    };
    // sums[k][i] and squared sums of the slack d for round k, entry i.
    let mut sums = vec![[0.0f64; 4]; rounds];
    let mut sq = vec![[0.0f64; 4]; rounds];
    for trial in 0..trials {
        let mut state = NetworkState::init(&s.problem, Some(&x0), trial as u64, true, true).unwrap();
        let measure = |st: &NetworkState<f64>| {
            empirical_error_vector(st, &s.z_star, &s.profile, s.params.smoothness).unwrap().to_array().unwrap()
        };
        let mut u = measure(&state);
        for k in 0..rounds {
            let forcing = lambda.powi(k as i32) * forcing_term(&state);
            step(Algorithm::PushSaga, &mut state, &s.weights, &s.problem, alpha, Parallelism::Sequential).unwrap();
            let next = measure(&state);
            for i in 0..4 {
                let bound: f64 = (0..4).map(|j| g[i][j] * u[j]).sum::<f64>() + h[i] * forcing;
                let d = next[i] - bound;
                sums[k][i] += d;
                sq[k][i] += d * d;
            }
            u = next;
        }
    }
    let t = trials as f64;
    for k in 0..rounds {
        for i in 0..4 {
            let mean = sums[k][i] / t;
            let var = (sq[k][i] / t - mean * mean).max(0.0);
            let se = (var / t).sqrt();
            assert!(mean <= 3.0 * se + 1e-15, "round {k}, entry {i}: mean slack {mean} with standard error {se}");
        }
    }
}

#[test]
fn rational_certificate_agrees_with_float() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_params(&mut rng);
    let q = p.map(|&x| Rational::from_float(x).unwrap());
    let ab_q = q.alpha_bar();
    let gf = p.gamma();
    let gq = q.gamma().to_f64().unwrap();
    assert!((gf - gq).abs() < 1e-14);
    assert!((gamma_working(&ab_q, &q).to_f64().unwrap() - gq).abs() < 1e-15);
}
