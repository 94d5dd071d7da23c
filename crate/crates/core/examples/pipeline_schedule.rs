//! How frames overlap while streaming through a layered network.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::network::{build_sfft, pipeline_schedule};

fn main() -> spiking_ft::Result<()> {
    let cfg = EncoderConfig::new(1.0, 75)?;
    let plan = build_sfft(1024, &cfg)?;
    let s = pipeline_schedule(&plan, 4)?;
    println!(
        "{} layers, frame period {} steps, latency {} steps, up to {} frames in flight",
        s.layers, s.frame_period_steps, s.latency_steps, s.max_frames_in_flight
    );
    for st in &s.stages {
        println!("stage {:>2}: silent {:?} spiking {:?} occupancy {:.2}", st.stage, st.silent, st.spiking, st.occupancy);
    }
    Ok(())
}
