//! Time-to-first-spike code.
//!
//! A value `x` in `[-x_max, x_max]` becomes one spike at
//! `t = γ (x_max − x)` with `γ = t_max / (2 x_max)`, so larger values fire
//! earlier. Complex vectors use the real-block layout: neuron `j` carries
//! `Re x_j` and neuron `n + j` carries `Im x_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Encoder range and time resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Symmetric input bound; `x_min = −x_max`.
    pub x_max: f64,
    /// Steps per stage `n_T`; spike steps live in `[0, n_T − 1]`.
    pub steps_per_stage: u32,
}

impl EncoderConfig {
    pub fn new(x_max: f64, steps_per_stage: u32) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::Domain(format!("x_max must be positive, got {x_max}")));
        }
        if steps_per_stage < 2 {
            return Err(Error::Domain(format!("steps_per_stage must be at least 2, got {steps_per_stage}")));
        }
        Ok(Self { x_max, steps_per_stage })
    }

    pub fn t_max(&self) -> u32 {
        self.steps_per_stage - 1
    }

    pub fn gamma(&self) -> f64 {
        self.t_max() as f64 / (2.0 * self.x_max)
    }

    /// Unrounded spike time of `x`.
    pub fn spike_time(&self, x: f64) -> f64 {
        self.gamma() * (self.x_max - x)
    }

    /// Value represented by a spike at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.x_max * (1.0 - 2.0 * t / self.t_max() as f64)
    }
}

/// The unsimplified map from `[x_min, x_max]` onto `[t_min, t_max]`.
pub fn spike_time_general(x: f64, x_min: f64, x_max: f64, t_min: f64, t_max: f64) -> f64 {
    t_min + (t_max - t_min) / (x_max - x_min) * (x_max - x)
}

/// Whether spike times sit on the integer step grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeGrid {
    Stepped,
    Continuous,
}

/// Single spike per neuron, times relative to the start of `stage_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeFrame {
    pub times: Vec<Option<f64>>,
    pub stage_index: usize,
    pub grid: TimeGrid,
}

impl SpikeFrame {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Integer step of neuron `i`, when it fired.
    pub fn step(&self, i: usize) -> Option<u32> {
        self.times[i].map(|t| t.round() as u32)
    }

    pub fn spike_count(&self) -> usize {
        self.times.iter().filter(|t| t.is_some()).count()
    }

    /// Neurons that never fired.
    pub fn silent_neurons(&self) -> Vec<usize> {
        self.times.iter().enumerate().filter(|(_, t)| t.is_none()).map(|(i, _)| i).collect()
    }
}

/// Encodes `x` in real-block layout (2n neurons).
pub fn encode(x: &Signal, cfg: &EncoderConfig) -> Result<SpikeFrame> {
    encode_values(&real_block(x.samples()), cfg, TimeGrid::Stepped)
}

/// Like [`encode`] but keeps real-valued spike times.
pub fn encode_continuous(x: &Signal, cfg: &EncoderConfig) -> Result<SpikeFrame> {
    encode_values(&real_block(x.samples()), cfg, TimeGrid::Continuous)
}

pub fn encode_values(values: &[f64], cfg: &EncoderConfig, grid: TimeGrid) -> Result<SpikeFrame> {
    let t_max = cfg.t_max() as f64;
    let times = values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() || value.abs() > cfg.x_max {
                return Err(Error::Range { index, value, x_max: cfg.x_max });
            }
            let t = cfg.spike_time(value);
            let t = match grid {
                // f64::round rounds half away from zero
                TimeGrid::Stepped => t.round(),
                TimeGrid::Continuous => t,
            };
            Ok(Some(t.clamp(0.0, t_max)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpikeFrame { times, stage_index: 0, grid })
}

/// Decoded values plus the neurons that never fired.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub values: Vec<f64>,
    pub missing: Vec<usize>,
}

impl Decoded {
    /// Recombines the real-block halves into complex samples.
    pub fn to_complex(&self) -> Vec<Complex64> {
        let n = self.values.len() / 2;
        (0..n).map(|k| Complex64::new(self.values[k], self.values[n + k])).collect()
    }

    pub fn to_signal(&self) -> Result<Signal> {
        Signal::new(self.to_complex(), 1.0)
    }
}

/// Inverts the spike-time map: `scale · x_max · (1 − 2 t / t_max)`.
///
/// `scale` is the cumulative layer normalizer. A neuron that never fired
/// decodes to `−scale · x_max` and is listed in [`Decoded::missing`].
pub fn decode(frame: &SpikeFrame, scale: f64, cfg: &EncoderConfig) -> Result<Decoded> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Domain(format!("layer scale must be positive, got {scale}")));
    }
    let t_max = cfg.t_max() as f64;
    let mut missing = Vec::new();
    let mut values = Vec::with_capacity(frame.len());
    for (i, t) in frame.times.iter().enumerate() {
        match *t {
            Some(t) if !(0.0..=t_max).contains(&t) => {
                return Err(Error::Consistency(format!(
                    "spike of neuron {i} at {t} lies outside stage window [0, {t_max}]"
                )))
            }
            Some(t) => values.push(scale * cfg.value_at(t)),
            None => {
                missing.push(i);
                values.push(-scale * cfg.x_max);
            }
        }
    }
    Ok(Decoded { values, missing })
}

fn real_block(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg257() -> EncoderConfig {
        EncoderConfig::new(1.0, 257).unwrap()
    }

    #[test]
    fn boundary_values() {
        let cfg = cfg257();
        let f = encode_values(&[1.0, 0.0, -1.0], &cfg, TimeGrid::Stepped).unwrap();
        assert_eq!(f.step(0), Some(0));
        assert_eq!(f.step(1), Some(128));
        assert_eq!(f.step(2), Some(256));
    }

    #[test]
    fn out_of_range_names_index() {
        match encode_values(&[0.0, 1.5], &cfg257(), TimeGrid::Stepped) {
            Err(Error::Range { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_degenerate_config() {
        assert!(EncoderConfig::new(0.0, 10).is_err());
        assert!(EncoderConfig::new(1.0, 1).is_err());
    }

    #[test]
    fn general_form_reduces_to_symmetric() {
        let cfg = EncoderConfig::new(2.0, 101).unwrap();
        for x in [-2.0, -0.7, 0.0, 1.3, 2.0] {
            let g = spike_time_general(x, -2.0, 2.0, 0.0, 100.0);
            assert!((g - cfg.spike_time(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn mid_window_is_zero_and_missing_is_flagged() {
        let cfg = cfg257();
        let frame = SpikeFrame { times: vec![Some(128.0), None], stage_index: 1, grid: TimeGrid::Stepped };
        let d = decode(&frame, 3.0, &cfg).unwrap();
        assert_eq!(d.values[0], 0.0);
        assert_eq!(d.values[1], -3.0);
        assert_eq!(d.missing, vec![1]);
    }

    #[test]
    fn spike_outside_window_is_inconsistent() {
        let frame = SpikeFrame { times: vec![Some(300.0)], stage_index: 1, grid: TimeGrid::Stepped };
        assert!(matches!(decode(&frame, 1.0, &cfg257()), Err(Error::Consistency(_))));
    }

    proptest! {
        #[test]
        fn monotone(a in -1.0..=1.0f64, b in -1.0..=1.0f64) {
            let cfg = cfg257();
            let f = encode_values(&[a, b], &cfg, TimeGrid::Stepped).unwrap();
            if a > b {
                prop_assert!(f.step(0) <= f.step(1));
            }
        }

        #[test]
        fn round_trip_within_one_step(xs in prop::collection::vec(-1.0..=1.0f64, 1..64), n_t in 2u32..600) {
            let cfg = EncoderConfig::new(1.0, n_t).unwrap();
            let f = encode_values(&xs, &cfg, TimeGrid::Stepped).unwrap();
            prop_assert_eq!(f.spike_count(), xs.len());
            let d = decode(&f, 1.0, &cfg).unwrap();
            let bound = 2.0 * cfg.x_max / cfg.t_max() as f64 + 1e-12;
            for (x, y) in xs.iter().zip(&d.values) {
                prop_assert!((x - y).abs() <= bound);
            }
        }
    }
}
