use curvnet_core::forecaster::*;
use curvnet_core::wavelet::{dwt_multilevel, WaveletSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn small_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        hidden_size: 6,
        max_iterations: 40,
        learning_rate: 0.02,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn step_matches_scalar_hand_evaluation() {
    let mut p = LstmParams::zeros(2);
    let vals = |k: usize| 0.1 * (k as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -1.0 };
    for (g, gate) in Gate::ALL.into_iter().enumerate() {
        p.w_mut(gate).iter_mut().enumerate().for_each(|(k, w)| *w = vals(g * 4 + k));
        p.u_mut(gate).iter_mut().enumerate().for_each(|(k, u)| *u = vals(16 + g * 2 + k) * 2.0);
        p.b_mut(gate).iter_mut().enumerate().for_each(|(k, b)| *b = vals(24 + g * 2 + k) / 3.0);
    }
    p.head_w_mut().copy_from_slice(&[0.7, -0.4]);
    p.set_head_b(0.05);
    let (x, h0, c0) = (0.8, [0.3, -0.2], [0.5, 1.1]);

    let mut h = [0.0; 2];
    let mut c = [0.0; 2];
    for k in 0..2 {
        let pre = |gate: Gate| {
            let w = p.w(gate);
            w[2 * k] * h0[0] + w[2 * k + 1] * h0[1] + p.u(gate)[k] * x + p.b(gate)[k]
        };
        let f = sig(pre(Gate::Forget));
        let i = sig(pre(Gate::Input));
        let a = pre(Gate::Candidate).tanh();
        let o = sig(pre(Gate::Output));
        c[k] = c0[k] * f + a * i;
        h[k] = o * c[k].tanh();
    }
    let (h1, c1) = lstm_step(&p, x, &h0, &c0).unwrap();
    for k in 0..2 {
        assert!((h1[k] - h[k]).abs() < 1e-12);
        assert!((c1[k] - c[k]).abs() < 1e-12);
    }
    let y = sig(0.7 * h[0] - 0.4 * h[1] + 0.05);
    assert!((forecast_head(&p, &h1) - y).abs() < 1e-12);
}

#[test]
fn gradient_check_five_seeds() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = 1 + seed as usize % 4;
        let p = LstmParams::init(hidden, &mut rng);
        let xs: Vec<f64> = (0..8).map(|t| ((t as f64 + seed as f64) * 0.9).sin() * 0.5 + 0.5).collect();
        let ys: Vec<f64> = xs.iter().skip(1).chain([0.3].iter()).copied().collect();
        let err = gradient_check(&p, &xs, &ys).unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn single_weight_perturbation_is_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = LstmParams::init(3, &mut rng);
    let xs = [0.2, 0.6, 0.4, 0.9, 0.1];
    let ys = [0.6, 0.4, 0.9, 0.1, 0.5];
    let (l0, g) = loss_and_gradient(&p, &xs, &ys).unwrap();
    let k = 7;
    let eps = 1e-6;
    let mut q = p.clone();
    q.as_flat_mut()[k] += eps;
    let l1 = sequence_loss(&q, &xs, &ys).unwrap();
    assert!(((l1 - l0) - g[k] * eps).abs() < 1e-10);
}

#[test]
fn sinusoid_training_loss_drops() {
    let series: Vec<f64> = (0..500).map(|t| (t as f64 * 2.0 * std::f64::consts::PI / 40.0).sin()).collect();
    let m = train(&series, &TrainConfig { seed: 3, ..TrainConfig::default() }).unwrap();
    assert_eq!(m.loss_history.len(), 250);
    assert!(m.loss_history[249] < 0.2 * m.loss_history[0], "{} vs {}", m.loss_history[249], m.loss_history[0]);
    assert!(m.final_loss < m.loss_history[0]);
}

#[test]
fn forecasts_are_bitwise_deterministic() {
    let series: Vec<f64> = (0..80).map(|t| (t as f64 * 0.3).sin() + 0.01 * t as f64).collect();
    let spec = WaveletSpec { levels: 2, ..WaveletSpec::default() };
    let a = wd_lstm_forecast(&series, &spec, &small_cfg(5)).unwrap();
    let b = wd_lstm_forecast(&series, &spec, &small_cfg(5)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = lstm_forecast(&series, &small_cfg(5)).unwrap();
    assert_eq!(c, lstm_forecast(&series, &small_cfg(5)).unwrap());
    assert_eq!(a.predicted.len(), 80 - 64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_stay_in_range(seed in any::<u64>(), hidden in 1usize..8, x in -10.0..10.0f64, scale in 0.1..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LstmParams::init(hidden, &mut rng);
        p.as_flat_mut().iter_mut().for_each(|v| *v *= scale);
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        for t in 0..10 {
            let xt = x * (t as f64 * 0.7).cos();
            let g = gate_values(&p, xt, &h).unwrap();
            for v in g.forget.iter().chain(&g.input).chain(&g.output) {
                prop_assert!(*v > 0.0 && *v < 1.0);
            }
            prop_assert!(g.candidate.iter().all(|v| *v > -1.0 && *v < 1.0));
            (h, c) = lstm_step(&p, xt, &h, &c).unwrap();
            prop_assert!(h.iter().all(|v| *v > -1.0 && *v < 1.0));
        }
    }

    #[test]
    fn clipping_bounds_global_norm(g in proptest::collection::vec(-100.0..100.0f64, 1..50), clip in 0.01..10.0f64) {
        let mut g2 = g.clone();
        let before = clip_global_norm(&mut g2, clip);
        let after = g2.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(after <= clip + 1e-9);
        if before <= clip {
            prop_assert_eq!(g, g2);
        }
    }

    #[test]
    fn bands_sum_to_series_on_test_split(x in proptest::collection::vec(-3.0..3.0f64, 40..200), split in 0.5..0.95f64) {
        let dec = dwt_multilevel(&x, &WaveletSpec::default()).unwrap();
        let start = TrainConfig { train_fraction: split, ..TrainConfig::default() }.split_index(x.len());
        for t in start..x.len() {
            let total: f64 = dec.sub_series().iter().map(|(_, s)| s[t]).sum();
            prop_assert!((total - x[t]).abs() < 1e-8);
        }
    }

    #[test]
    fn metric_relations(actual in proptest::collection::vec(-5.0..5.0f64, 2..40), noise in proptest::collection::vec(-1.0..1.0f64, 40)) {
        let pred: Vec<f64> = actual.iter().zip(&noise).map(|(a, n)| a + n).collect();
        let m = metrics(&pred, &actual).unwrap();
        prop_assert!(m.mae >= 0.0 && m.mse >= 0.0);
        if let Some(r2) = m.r2 {
            prop_assert!(r2 <= 1.0);
            prop_assert_eq!(r2 == 1.0, m.mse == 0.0);
        }
        let exact = metrics(&actual, &actual).unwrap();
        if let Some(r2) = exact.r2 {
            prop_assert_eq!(r2, 1.0);
        }
    }
}
