//! Fixed-point weights and voltages, and what they cost in accuracy.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::evaluate::{evaluate_signal, scenario_signal, EvalOptions};
use spiking_ft::network::build_sfft;
use spiking_ft::quantize::{quantize_plan, QuantSpec};
use spiking_ft::signal::Scenario;

fn main() -> spiking_ft::Result<()> {
    let n = 64;
    let cfg = EncoderConfig::new(1.0, 129)?;
    let plan = build_sfft(n, &cfg)?;
    let (_, report) = quantize_plan(&plan, &QuantSpec::default())?;
    println!("global voltage scale V = {}", report.voltage_scale);
    for (i, l) in report.layers.iter().enumerate() {
        println!(
            "layer {i}: exp {:>3} even rule {:<5} threshold {:>8} drive {:>6} max |w - w_q| {:.2e}",
            l.exponent, l.even_rule_applied, l.threshold, l.drive_current, l.max_weight_error
        );
    }

    for quantized in [false, true] {
        let opts = EvalOptions { quantized, ..EvalOptions::default() };
        let x = scenario_signal(Scenario::S3, n, &opts)?;
        let (r, _, _) = evaluate_signal(&plan, &x, "S3", &opts)?;
        println!("quantized={quantized:<5} rmse {:.5} clamps {}", r.rmse, r.clamp_events);
    }
    Ok(())
}
