//! Dense spiking DFT of a radar chirp next to the exact DFT.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::network::{build_sdft, run_plan, RunMode};
use spiking_ft::oracle::{dft, Spectrum};
use spiking_ft::signal::{scenario, synthesize_chirp, RadarConfig};

fn main() -> spiking_ft::Result<()> {
    let n = 256;
    let radar = RadarConfig::automotive().with_samples(n)?;
    let x = synthesize_chirp(&radar, &scenario("S1", &radar)?, 0.01, 7)?;

    let cfg = EncoderConfig::new(1.0, 257)?;
    let plan = build_sdft(n, &cfg)?;
    let out = run_plan(&plan, &x, RunMode::Stepped, &cfg)?;
    let snn = Spectrum::new(out.spectrum);
    let oracle = dft(&x);

    println!("{} neurons, {} silent", plan.total_neurons(), out.silent_neurons);
    let peak = oracle.argmax_in(1..n / 2);
    println!("oracle peak bin {peak}, spiking peak bin {}", snn.argmax_in(1..n / 2));
    println!("{:>4} {:>10} {:>10}", "bin", "|oracle|", "|spiking|");
    for k in peak.saturating_sub(3)..=peak + 3 {
        println!("{k:>4} {:>10.3} {:>10.3}", oracle.bins[k].norm(), snn.bins[k].norm());
    }
    Ok(())
}
