use proptest::prelude::*;
use spiking_ft::encoding::{decode, encode_values, EncoderConfig, TimeGrid};
use spiking_ft::neuron::{compute_bias, compute_threshold, run_silent, run_spiking, LayerParams, ThresholdMode, Weights};
use spiking_ft::oracle::{matvec, Matrix};

fn layer(rows: usize, cols: usize, w: &[f64], cfg: &EncoderConfig) -> (LayerParams, Matrix, f64) {
    let m = Matrix::from_fn(rows, cols, |i, j| w[i * cols + j]);
    let weights = Weights::Dense(m.clone());
    let th = compute_threshold(&weights, cfg.gamma(), cfg.x_max, ThresholdMode::General).unwrap();
    let bias = compute_bias(&weights, cfg.t_max(), cfg.gamma(), cfg.x_max);
    let scale = th / (cfg.gamma() * cfg.x_max);
    (LayerParams::for_code(weights, &bias, th, cfg.t_max()).unwrap(), m, scale)
}

fn run(params: &LayerParams, x: &[f64], cfg: &EncoderConfig, grid: TimeGrid, scale: f64) -> Vec<f64> {
    let input = encode_values(x, cfg, grid).unwrap();
    let mut states = run_silent(params, &input).unwrap();
    let out = run_spiking(&mut states, params, grid, 1);
    let d = decode(&out, scale, cfg).unwrap();
    assert!(d.missing.is_empty());
    d.values
}

fn case() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, u32)> {
    (1usize..8, 1usize..8, 9u32..300).prop_flat_map(|(r, c, s)| {
        (
            Just(r),
            Just(c),
            prop::collection::vec(-2.0f64..2.0, r * c),
            prop::collection::vec(-1.0f64..=1.0, c),
            Just(s),
        )
    })
}

proptest! {
    #[test]
    fn continuous_times_compute_the_product((r, c, w, x, s) in case()) {
        let cfg = EncoderConfig::new(1.0, s).unwrap();
        let (params, m, scale) = layer(r, c, &w, &cfg);
        let got = run(&params, &x, &cfg, TimeGrid::Continuous, scale);
        let want = matvec(&m, &x);
        let norm = want.iter().fold(1e-12f64, |a, v| a.max(v.abs())).max(scale);
        for (g, e) in got.iter().zip(&want) {
            prop_assert!((g - e).abs() <= 1e-9 * norm, "{g} vs {e}");
        }
    }

    #[test]
    fn stepped_error_is_a_few_steps((r, c, w, x, s) in case()) {
        let cfg = EncoderConfig::new(1.0, s).unwrap();
        let (params, m, scale) = layer(r, c, &w, &cfg);
        let got = run(&params, &x, &cfg, TimeGrid::Stepped, scale);
        let bound = 4.0 * scale * cfg.x_max / cfg.t_max() as f64;
        for (g, e) in got.iter().zip(matvec(&m, &x)) {
            prop_assert!((g - e).abs() <= bound, "{g} vs {e}, bound {bound}");
        }
    }

    #[test]
    fn extreme_inputs_never_spike_early((r, c, w, _x, s) in case(), signs in prop::collection::vec(any::<bool>(), 8)) {
        let cfg = EncoderConfig::new(1.0, s).unwrap();
        let (params, _, _) = layer(r, c, &w, &cfg);
        let x: Vec<f64> = (0..c).map(|j| if signs[j] { 1.0 } else { -1.0 }).collect();
        let input = encode_values(&x, &cfg, TimeGrid::Stepped).unwrap();
        prop_assert!(run_silent(&params, &input).is_ok());
    }
}
