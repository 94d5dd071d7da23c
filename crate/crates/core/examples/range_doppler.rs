//! Range-Doppler map of a target at 10 m moving at 1 m/s.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::evaluate::{oracle_range_doppler, range_doppler};
use spiking_ft::network::{build_any, RunMode};
use spiking_ft::signal::{synthesize_frame, RadarConfig, Target};

fn main() -> spiking_ft::Result<()> {
    let radar = RadarConfig::automotive().with_samples(256)?.with_chirps(64)?;
    let frame = synthesize_frame(&radar, &[Target::new(10.0, 1.0, 1.0)?], 0.01, 7)?;
    let cfg = EncoderConfig::new(1.0, 129)?;

    let map = range_doppler(&frame, &build_any, &cfg, RunMode::Stepped)?;
    let oracle = oracle_range_doppler(&frame)?;
    for (name, m) in [("spiking", &map), ("oracle", &oracle)] {
        let d = m.signed_doppler(m.peak.1);
        println!(
            "{name:<8} peak at range bin {} ({:.2} m), doppler bin {d} ({:.3} m/s)",
            m.peak.0,
            m.peak.0 as f64 * radar.range_resolution(),
            d as f64 * radar.velocity_resolution()
        );
    }
    Ok(())
}
