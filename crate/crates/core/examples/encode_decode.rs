//! Time-to-first-spike coding of a short signal and back.

use spiking_ft::encoding::{decode, encode, EncoderConfig};
use spiking_ft::signal::Signal;
use spiking_ft::Complex64;

fn main() -> spiking_ft::Result<()> {
    let cfg = EncoderConfig::new(1.0, 33)?;
    let x = Signal::new(
        vec![Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.25), Complex64::new(0.1, -1.0)],
        1.0,
    )?;
    let frame = encode(&x, &cfg)?;
    println!("t_max = {}, real block of {} neurons", cfg.t_max(), frame.len());
    for (i, t) in frame.times.iter().enumerate() {
        println!("neuron {i}: spike at step {}", t.unwrap());
    }

    // a single layer of identity weights has scale 1
    let back = decode(&frame, 1.0, &cfg)?.to_complex();
    for (a, b) in x.samples().iter().zip(&back) {
        println!("{a:>12.4} -> {b:>12.4}  (|err| {:.4})", (a - b).norm());
    }
    println!("worst case half-step error: {:.4}", cfg.x_max / cfg.t_max() as f64);
    Ok(())
}
