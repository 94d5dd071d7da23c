//! The radix-4 S-FFT layers multiply back to the real DFT matrix.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::network::{build_sfft, butterfly_block};
use spiking_ft::oracle::{matmul, real_dft_matrix};

fn main() -> spiking_ft::Result<()> {
    let b = butterfly_block(1, 16);
    println!("butterfly block k=1, N=16, second row:");
    println!("{:?}", b.entries[1].map(|v| (v * 1e4).round() / 1e4));

    for n in [4, 16, 64, 256] {
        let cfg = EncoderConfig::new(1.0, 65)?;
        let plan = build_sfft(n, &cfg)?;
        let mut product = plan.output_permutation();
        for layer in plan.dense_layers().iter().rev() {
            product = matmul(&product, layer);
        }
        let err = product.max_abs_diff(&real_dft_matrix(n));
        let inbound: Vec<usize> = plan.layers.iter().map(|l| l.weights.max_inbound()).collect();
        println!(
            "n={n:<4} layers={} max inbound per layer {inbound:?} max |P∏W - F| = {err:.2e}",
            plan.layers.len()
        );
    }
    Ok(())
}
