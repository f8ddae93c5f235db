use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use recondiag::distinguish::{
    distinguishability_batch, p_opt, p_opt_analytic_equal_cov, p_opt_monte_carlo, BatchConfig, Method,
};
use recondiag::{Gaussian, Gaussian32};

const PHI_1: f64 = 0.841_344_746_068_543;
const PHI_2: f64 = 0.977_249_868_051_820_8;

fn g(mean: Vec<f64>, var: Vec<f64>) -> Gaussian {
    Gaussian::new(mean, var).unwrap()
}

/// Independent TV estimate, `E_p[max(0, 1 - q(x)/p(x))]`, with its own
/// Box-Muller sampler and density code.
fn tv_oracle(pm: &[f64], pv: &[f64], qm: &[f64], qv: &[f64], n: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let log_ratio = |x: &[f64]| -> f64 {
        // log q(x) - log p(x)
        let mut s = 0.0;
        for i in 0..x.len() {
            s += -0.5 * (qv[i].ln() + (x[i] - qm[i]).powi(2) / qv[i]);
            s -= -0.5 * (pv[i].ln() + (x[i] - pm[i]).powi(2) / pv[i]);
        }
        s
    };
    let mut x = vec![0.0; pm.len()];
    let mut acc = 0.0;
    for _ in 0..n {
        for i in 0..x.len() {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            x[i] = pm[i] + pv[i].sqrt() * z;
        }
        acc += (1.0 - log_ratio(&x).exp()).max(0.0);
    }
    acc / n as f64
}

/// Pair with means and variances scaled so P_opt spreads over (0.5, 1).
fn random_pair(rng: &mut StdRng, dim: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let scale = 2.5 / (dim as f64).sqrt();
    let spread = rng.random::<f64>();
    let pm: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let qm: Vec<f64> = pm.iter().map(|m| m + spread * scale * rng.random_range(-1.0..1.0)).collect();
    let pv: Vec<f64> = (0..dim).map(|_| rng.random_range(0.3..2.0)).collect();
    let qv: Vec<f64> = pv
        .iter()
        .map(|v| v * (spread * scale * rng.random_range(-0.5..0.5)).exp())
        .collect();
    (pm, pv, qm, qv)
}

#[test]
fn monte_carlo_matches_phi_one() {
    let p = g(vec![0.0], vec![1.0]);
    let q = g(vec![2.0], vec![1.0]);
    let r = p_opt_monte_carlo(&p, &q, 1_000_000, 0, 0).unwrap();
    assert!((r.p_opt - PHI_1).abs() <= 0.003, "{}", r.p_opt);
    assert!(r.std_error > 0.0 && r.std_error < 0.001);
}

#[test]
fn shifted_coordinate_factorizes() {
    let mut qm = vec![0.0; 24];
    qm[5] = 4.0;
    let p = g(vec![0.0; 24], vec![1.0; 24]);
    let q = g(qm, vec![1.0; 24]);
    let r = p_opt_monte_carlo(&p, &q, 200_000, 11, 0).unwrap();
    assert!((r.p_opt - PHI_2).abs() <= 3.0 * r.std_error, "{} vs {PHI_2}", r.p_opt);
    assert!((p_opt_analytic_equal_cov(&p, &q).unwrap().p_opt - PHI_2).abs() < 1e-12);
}

#[test]
fn tv_identity_small_sample() {
    let mut rng = StdRng::seed_from_u64(99);
    for dim in [1, 24, 512] {
        for k in 0..5 {
            let (pm, pv, qm, qv) = random_pair(&mut rng, dim);
            let r = p_opt_monte_carlo(&g(pm.clone(), pv.clone()), &g(qm.clone(), qv.clone()), 20_000, 1, k).unwrap();
            let tv = tv_oracle(&pm, &pv, &qm, &qv, 20_000, 1000 + k);
            assert!((r.p_opt - (1.0 + tv) / 2.0).abs() <= 0.01, "dim {dim}: {} vs tv {tv}", r.p_opt);
        }
    }
}

#[test]
fn symmetric_within_noise() {
    let mut rng = StdRng::seed_from_u64(5);
    for k in 0..10 {
        let (pm, pv, qm, qv) = random_pair(&mut rng, 8);
        let (p, q) = (g(pm, pv), g(qm, qv));
        let a = p_opt_monte_carlo(&p, &q, 50_000, 21, k).unwrap();
        let b = p_opt_monte_carlo(&q, &p, 50_000, 22, k).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.p_opt - b.p_opt).abs() <= 3.0 * se, "{} vs {}", a.p_opt, b.p_opt);
    }
    let (p, q) = (g(vec![0.0, 1.0], vec![2.0, 0.5]), g(vec![1.0, -1.0], vec![2.0, 0.5]));
    assert_eq!(
        p_opt_analytic_equal_cov(&p, &q).unwrap().p_opt,
        p_opt_analytic_equal_cov(&q, &p).unwrap().p_opt
    );
}

#[test]
fn monotone_in_separation() {
    let p = g(vec![0.0], vec![1.5]);
    let mut last_analytic = 0.0;
    let mut last_mc = 0.0;
    for step in 0..=30 {
        let q = g(vec![0.2 * step as f64], vec![1.5]);
        let a = p_opt_analytic_equal_cov(&p, &q).unwrap().p_opt;
        // common random numbers keep the estimator monotone as well
        let m = p_opt_monte_carlo(&p, &q, 5_000, 3, 0).unwrap().p_opt;
        assert!(a >= last_analytic && m >= last_mc);
        last_analytic = a;
        last_mc = m;
    }
}

#[test]
fn batch_is_deterministic_across_pools() {
    let mut rng = StdRng::seed_from_u64(8);
    let pairs: Vec<(Gaussian, Gaussian)> = (0..12)
        .map(|_| {
            let (pm, pv, qm, qv) = random_pair(&mut rng, 4);
            (g(pm, pv), g(qm, qv))
        })
        .collect();
    let cfg = BatchConfig {
        mc_samples: 5_000,
        ..BatchConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| distinguishability_batch(&pairs, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a, b);
    assert!(a.results.iter().all(|r| r.method == Method::MonteCarlo));
    for (i, (p, q)) in pairs.iter().enumerate() {
        assert_eq!(a.results[i], p_opt(p, q, 5_000, 0, i as u64).unwrap());
    }
}

#[test]
fn single_precision_agrees() {
    let p = Gaussian32::new(vec![0.0; 3], vec![1.0, 2.0, 0.5]).unwrap();
    let q = Gaussian32::new(vec![0.5, -0.5, 0.2], vec![1.5, 2.0, 0.7]).unwrap();
    let r32 = p_opt_monte_carlo(&p, &q, 100_000, 4, 0).unwrap();
    let p64 = g(vec![0.0; 3], vec![1.0, 2.0, 0.5]);
    let q64 = g(vec![0.5, -0.5, 0.2], vec![1.5, 2.0, 0.7]);
    let r64 = p_opt_monte_carlo(&p64, &q64, 100_000, 4, 0).unwrap();
    assert!((f64::from(r32.p_opt) - r64.p_opt).abs() <= 4.0 * r64.std_error);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-3.0..3.0f64, dim),
            prop::collection::vec(0.1..4.0f64, dim),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn analytic_bounds_and_symmetry(((pm, v), (qm, _)) in (1usize..16).prop_flat_map(|d| (gaussian(d), gaussian(d)))) {
            let p = g(pm, v.clone());
            let q = g(qm, v);
            let a = p_opt_analytic_equal_cov(&p, &q).unwrap().p_opt;
            prop_assert!((0.5..=1.0).contains(&a));
            prop_assert_eq!(a, p_opt_analytic_equal_cov(&q, &p).unwrap().p_opt);
        }

        #[test]
        fn monte_carlo_bounds((pg, qg, seed) in (1usize..8).prop_flat_map(|d| (gaussian(d), gaussian(d), any::<u64>()))) {
            let r = p_opt_monte_carlo(&g(pg.0, pg.1), &g(qg.0, qg.1), 1_000, seed, 0).unwrap();
            prop_assert!((0.5..=1.0).contains(&r.p_opt));
            prop_assert!(r.std_error >= 0.0);
        }

        #[test]
        fn seed_determinism((pg, qg, seed) in (1usize..6).prop_flat_map(|d| (gaussian(d), gaussian(d), any::<u64>()))) {
            let (p, q) = (g(pg.0, pg.1), g(qg.0, qg.1));
            prop_assert_eq!(
                p_opt_monte_carlo(&p, &q, 1_000, seed, 3).unwrap(),
                p_opt_monte_carlo(&p, &q, 1_000, seed, 3).unwrap()
            );
        }
    }
}
