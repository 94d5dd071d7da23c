//! Stage overlap and frame pipelining.
//!
//! A layer spends one stage silent and the next one spiking, and its
//! spiking stage is the silent stage of the layer after it. A frame
//! therefore crosses `L` layers in `L + 1` stages, and a new frame can
//! enter every second stage once the first layer is free again.

use serde::{Deserialize, Serialize};

use super::NetworkPlan;
use crate::error::{Error, Result};

/// Which layers work on which frame during one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOccupancy {
    pub stage: usize,
    /// `(layer, frame)` pairs integrating inputs; layers count from 1.
    pub silent: Vec<(usize, usize)>,
    /// `(layer, frame)` pairs emitting output spikes.
    pub spiking: Vec<(usize, usize)>,
    /// Fraction of the network's neurons in their silent stage.
    pub occupancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub layers: usize,
    pub frames: usize,
    /// `τ_l`, steps per stage.
    pub stage_steps: u32,
    /// `T_f = 2 τ_l`.
    pub frame_period_steps: u32,
    /// `τ_f = (L + 1) τ_l`.
    pub latency_steps: u32,
    pub stages: Vec<StageOccupancy>,
    pub max_frames_in_flight: usize,
}

pub fn pipeline_schedule(plan: &NetworkPlan, n_frames: usize) -> Result<ScheduleReport> {
    if n_frames == 0 {
        return Err(Error::Usage("need at least one frame to schedule".into()));
    }
    let layers = plan.layers.len();
    let tau = plan.encoder.steps_per_stage;
    let total_stages = 2 * (n_frames - 1) + layers + 1;
    let mut stages = Vec::with_capacity(total_stages);
    let mut max_in_flight = 0;
    for s in 0..total_stages {
        let mut silent = Vec::new();
        let mut spiking = Vec::new();
        let mut in_flight = 0;
        for f in 0..n_frames {
            let start = 2 * f;
            if s < start || s > start + layers {
                continue;
            }
            in_flight += 1;
            let offset = s - start;
            if offset < layers {
                silent.push((offset + 1, f));
            }
            if offset >= 1 {
                spiking.push((offset, f));
            }
        }
        max_in_flight = max_in_flight.max(in_flight);
        let occupancy = silent.len() as f64 / layers as f64;
        stages.push(StageOccupancy { stage: s, silent, spiking, occupancy });
    }
    Ok(ScheduleReport {
        layers,
        frames: n_frames,
        stage_steps: tau,
        frame_period_steps: 2 * tau,
        latency_steps: (layers as u32 + 1) * tau,
        stages,
        max_frames_in_flight: max_in_flight,
    })
}
