//! One neuron computing a weighted sum from spike times.
//!
//! The silent stage integrates the inputs, then a constant drive pushes the
//! membrane to threshold; the later it fires, the larger the sum.

use spiking_ft::encoding::{encode_values, EncoderConfig, TimeGrid};
use spiking_ft::neuron::{compute_bias, compute_threshold, run_silent, run_spiking, LayerParams, ThresholdMode, Weights};
use spiking_ft::oracle::Matrix;

fn main() -> spiking_ft::Result<()> {
    let cfg = EncoderConfig::new(1.0, 65)?;
    let w = [0.5, -0.25, 0.25];
    let weights = Weights::Dense(Matrix::from_fn(1, 3, |_, j| w[j]));
    let th = compute_threshold(&weights, cfg.gamma(), cfg.x_max, ThresholdMode::General)?;
    let bias = compute_bias(&weights, cfg.t_max(), cfg.gamma(), cfg.x_max);
    let layer = LayerParams::for_code(weights, &bias, th, cfg.t_max())?;
    println!("u_th = {th:.4}, I_ext = {:.4}, t_s = {}", layer.drive_current, layer.silent_steps);

    let x = [0.8, -0.4, 0.3];
    let input = encode_values(&x, &cfg, TimeGrid::Stepped)?;
    println!("input spike steps: {:?}", input.times);

    let mut states = run_silent(&layer, &input)?;
    println!("membrane after silent stage: {:.4}", states[0].membrane);
    let out = run_spiking(&mut states, &layer, TimeGrid::Stepped, 1);
    let t = out.times[0].expect("neuron fired");

    // layer output encodes W x / scale with scale = u_th / (γ x_max)
    let scale = th / (cfg.gamma() * cfg.x_max);
    let exact: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
    println!("fires {t} steps into the spiking stage");
    println!("decoded {:.4}, exact {exact:.4}", cfg.value_at(t) * scale);
    Ok(())
}
