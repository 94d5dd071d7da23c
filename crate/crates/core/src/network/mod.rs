//! S-DFT and radix-4 S-FFT construction and execution.
//!
//! The dense S-DFT is one layer holding the real block form of the DFT
//! matrix. The S-FFT splits the same matrix into `log4(n)` sparse
//! decimation-in-frequency stages whose rows have at most 8 non-zeros;
//! its outputs come out in base-4 digit-reversed order, which is undone
//! as an index map when decoding.

mod butterfly;
mod schedule;

pub use butterfly::{butterfly_block, coefficient, digit_reverse, twiddle, ButterflyBlock, B4};
pub use schedule::{pipeline_schedule, ScheduleReport, StageOccupancy};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode, encode_values, EncoderConfig, SpikeFrame, TimeGrid};
use crate::error::{Error, Result};
use crate::neuron::{compute_bias, compute_threshold, run_silent, run_spiking, LayerParams, ThresholdMode, Weights};
use crate::oracle::{is_power_of_four, real_dft_matrix, to_real_block, Matrix};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Sdft,
    Sfft,
}

impl NetworkKind {
    /// Builds a plan of this kind for real-valued input.
    pub fn build(self, n: usize, cfg: &EncoderConfig) -> Result<NetworkPlan> {
        match self {
            NetworkKind::Sdft => build_sdft(n, cfg),
            NetworkKind::Sfft => build_sfft(n, cfg),
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetworkKind::Sdft => "sdft",
            NetworkKind::Sfft => "sfft",
        })
    }
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "sdft" => Ok(NetworkKind::Sdft),
            "sfft" => Ok(NetworkKind::Sfft),
            other => Err(Error::Usage(format!("unknown architecture '{other}', expected sdft or sfft"))),
        }
    }
}

/// A compiled spiking transform.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPlan {
    pub kind: NetworkKind,
    pub n: usize,
    pub encoder: EncoderConfig,
    pub layers: Vec<LayerParams>,
    pub threshold_modes: Vec<ThresholdMode>,
    /// Per-layer normalizer `u_th / (γ x_max)`: a layer's spikes encode
    /// `W x / scale`.
    pub scales: Vec<f64>,
    /// `spectrum[k]` is read from complex output `output_index[k]`.
    pub output_index: Vec<usize>,
}

impl NetworkPlan {
    pub fn neurons_per_layer(&self) -> usize {
        2 * self.n
    }

    pub fn total_neurons(&self) -> usize {
        self.layers.iter().map(|l| l.neurons()).sum()
    }

    pub fn stage_count(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn cumulative_scale(&self) -> f64 {
        self.scales.iter().product()
    }

    /// Dense copies of the layer matrices, first layer first.
    pub fn dense_layers(&self) -> Vec<Matrix> {
        self.layers.iter().map(|l| l.weights.to_dense()).collect()
    }

    /// Permutation matrix mapping the last layer's outputs to natural order.
    pub fn output_permutation(&self) -> Matrix {
        let n = self.n;
        let mut p = Matrix::zeros(2 * n, 2 * n);
        for (k, &src) in self.output_index.iter().enumerate() {
            p[(k, src)] = 1.0;
            p[(n + k, n + src)] = 1.0;
        }
        p
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            kind: self.kind,
            n: self.n,
            steps_per_stage: self.encoder.steps_per_stage,
            x_max: self.encoder.x_max,
            stage_count: self.stage_count(),
            total_neurons: self.total_neurons(),
            cumulative_scale: self.cumulative_scale(),
            layers: self
                .layers
                .iter()
                .zip(&self.scales)
                .zip(&self.threshold_modes)
                .map(|((l, &scale), &mode)| LayerSummary {
                    rows: l.weights.rows(),
                    cols: l.weights.cols(),
                    non_zeros: l.weights.nnz(),
                    max_inbound: l.weights.max_inbound(),
                    threshold: l.threshold,
                    drive_current: l.drive_current,
                    threshold_mode: mode,
                    scale,
                })
                .collect(),
        }
    }
}

/// Human-readable plan description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub kind: NetworkKind,
    pub n: usize,
    pub steps_per_stage: u32,
    pub x_max: f64,
    pub stage_count: usize,
    pub total_neurons: usize,
    pub cumulative_scale: f64,
    pub layers: Vec<LayerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub rows: usize,
    pub cols: usize,
    pub non_zeros: usize,
    pub max_inbound: usize,
    pub threshold: f64,
    pub drive_current: f64,
    pub threshold_mode: ThresholdMode,
    pub scale: f64,
}

fn make_layer(weights: Weights, mode: ThresholdMode, cfg: &EncoderConfig) -> Result<(LayerParams, f64)> {
    let gamma = cfg.gamma();
    let threshold = compute_threshold(&weights, gamma, cfg.x_max, mode)?;
    let bias = compute_bias(&weights, cfg.t_max(), gamma, cfg.x_max);
    let scale = threshold / (gamma * cfg.x_max);
    Ok((LayerParams::for_code(weights, &bias, threshold, cfg.t_max())?, scale))
}

/// Dense S-DFT for real input, using the halved zero-bin threshold.
pub fn build_sdft(n: usize, cfg: &EncoderConfig) -> Result<NetworkPlan> {
    build_sdft_with(n, cfg, ThresholdMode::DftHalf)
}

/// Dense S-DFT with an explicit threshold rule; complex input needs
/// [`ThresholdMode::General`].
pub fn build_sdft_with(n: usize, cfg: &EncoderConfig, mode: ThresholdMode) -> Result<NetworkPlan> {
    if n < 2 {
        return Err(Error::Size(format!("S-DFT needs n >= 2, got {n}")));
    }
    let (layer, scale) = make_layer(Weights::Dense(real_dft_matrix(n)), mode, cfg)?;
    Ok(NetworkPlan {
        kind: NetworkKind::Sdft,
        n,
        encoder: *cfg,
        layers: vec![layer],
        threshold_modes: vec![mode],
        scales: vec![scale],
        output_index: (0..n).collect(),
    })
}

/// Weights of DIF stage `s`: independent `n/4^s`-point butterflies.
fn sfft_stage(n: usize, s: u32) -> Weights {
    let size = n >> (2 * s);
    let quarter = size / 4;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(8); 2 * n];
    for base in (0..n).step_by(size) {
        for m in 0..quarter {
            let block = butterfly_block(m, size);
            let idx = |p: usize| base + m + p * quarter;
            for q in 0..4 {
                for p in 0..4 {
                    let (re_row, im_row) = (idx(q), n + idx(q));
                    let (re_col, im_col) = (idx(p), n + idx(p));
                    rows[re_row].push((re_col, block.entries[q][p]));
                    rows[re_row].push((im_col, block.entries[q][4 + p]));
                    rows[im_row].push((re_col, block.entries[4 + q][p]));
                    rows[im_row].push((im_col, block.entries[4 + q][4 + p]));
                }
            }
        }
    }
    for r in rows.iter_mut() {
        r.retain(|&(_, w)| w != 0.0);
        r.sort_by_key(|&(j, _)| j);
    }
    Weights::Sparse { rows, cols: 2 * n }
}

/// Radix-4 S-FFT with `log4(n)` sparse layers.
pub fn build_sfft(n: usize, cfg: &EncoderConfig) -> Result<NetworkPlan> {
    if n < 4 || !is_power_of_four(n) {
        return Err(Error::Size(format!("S-FFT needs a power of 4 of at least 4, got {n}")));
    }
    let digits = n.trailing_zeros() / 2;
    let mut layers = Vec::with_capacity(digits as usize);
    let mut scales = Vec::with_capacity(digits as usize);
    for s in 0..digits {
        let (layer, scale) = make_layer(sfft_stage(n, s), ThresholdMode::General, cfg)?;
        layers.push(layer);
        scales.push(scale);
    }
    Ok(NetworkPlan {
        kind: NetworkKind::Sfft,
        n,
        encoder: *cfg,
        threshold_modes: vec![ThresholdMode::General; layers.len()],
        layers,
        scales,
        output_index: (0..n).map(|k| digit_reverse(k, digits)).collect(),
    })
}

/// S-FFT when `n` is a power of 4, otherwise a general-threshold S-DFT;
/// both accept complex input.
pub fn build_any(n: usize, cfg: &EncoderConfig) -> Result<NetworkPlan> {
    if n >= 4 && is_power_of_four(n) {
        build_sfft(n, cfg)
    } else {
        build_sdft_with(n, cfg, ThresholdMode::General)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Real-valued spike times; reproduces the linear transform exactly.
    Continuous,
    /// Integer time steps, as on hardware.
    Stepped,
}

impl RunMode {
    fn grid(self) -> TimeGrid {
        match self {
            RunMode::Continuous => TimeGrid::Continuous,
            RunMode::Stepped => TimeGrid::Stepped,
        }
    }
}

/// Result of pushing one frame through a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Decoded spectrum in natural bin order.
    pub spectrum: Vec<Complex64>,
    /// Input encoding followed by every layer's output spikes.
    pub trace: Vec<SpikeFrame>,
    /// Output neurons (real-block index, pre-permutation) that never fired.
    pub missing: Vec<usize>,
    /// Neurons across all layers that never fired.
    pub silent_neurons: usize,
    /// Membrane saturation events across all layers.
    pub clamp_events: u64,
}

pub fn run_plan(plan: &NetworkPlan, input: &Signal, mode: RunMode, cfg: &EncoderConfig) -> Result<RunOutput> {
    if *cfg != plan.encoder {
        return Err(Error::Consistency("encoder config differs from the one the plan was built for".into()));
    }
    if input.len() != plan.n {
        return Err(Error::Usage(format!("input has {} samples, plan expects {}", input.len(), plan.n)));
    }
    if plan.threshold_modes.first() == Some(&ThresholdMode::DftHalf) && !input.is_real() {
        return Err(Error::Mode("halved threshold is only valid for real input".into()));
    }
    let grid = mode.grid();
    let mut frame = encode_values(&to_real_block(input.samples()), cfg, grid)?;
    let mut trace = vec![frame.clone()];
    let mut silent_neurons = 0;
    let mut clamp_events = 0u64;
    for (l, layer) in plan.layers.iter().enumerate() {
        let mut states = run_silent(layer, &frame)?;
        frame = run_spiking(&mut states, layer, grid, l + 1);
        silent_neurons += frame.times.len() - frame.spike_count();
        clamp_events += states.iter().map(|s| s.clamp_events as u64).sum::<u64>();
        trace.push(frame.clone());
    }
    let decoded = decode(&frame, plan.cumulative_scale(), cfg)?;
    let raw = decoded.to_complex();
    let spectrum = plan.output_index.iter().map(|&i| raw[i]).collect();
    Ok(RunOutput { spectrum, trace, missing: decoded.missing, silent_neurons, clamp_events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dft_slice, matmul};

    fn cfg() -> EncoderConfig {
        EncoderConfig::new(1.0, 257).unwrap()
    }

    fn composed(plan: &NetworkPlan) -> Matrix {
        let mut m = Matrix::identity(2 * plan.n);
        for layer in plan.dense_layers() {
            m = matmul(&layer, &m);
        }
        matmul(&plan.output_permutation(), &m)
    }

    #[test]
    fn sdft_rows_for_n4() {
        let plan = build_sdft(4, &cfg()).unwrap();
        let w = &plan.dense_layers()[0];
        assert_eq!(&w.row(0)[..4], &[1.0, 1.0, 1.0, 1.0]);
        let re1: Vec<f64> = w.row(1)[..4].iter().map(|v| v.round()).collect();
        assert_eq!(re1, vec![1.0, 0.0, -1.0, 0.0]);
        let im1: Vec<f64> = w.row(5)[..4].iter().map(|v| v.round() + 0.0).collect();
        assert_eq!(im1, vec![0.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn factorization_matches_dense_dft() {
        for n in [4, 16, 64] {
            let plan = build_sfft(n, &cfg()).unwrap();
            let err = composed(&plan).max_abs_diff(&real_dft_matrix(n));
            assert!(err <= 1e-9, "n = {n}: {err}");
        }
    }

    #[test]
    fn sfft_layers_are_sparse() {
        let plan = build_sfft(256, &cfg()).unwrap();
        assert_eq!(plan.layers.len(), 4);
        for l in &plan.layers {
            assert!(l.weights.max_inbound() <= 8);
            assert!(l.weights.nnz() <= 8 * 2 * 256);
        }
        let big = build_sfft(1024, &cfg()).unwrap();
        assert_eq!(big.layers.len(), 5);
        assert_eq!(big.neurons_per_layer(), 2048);
        assert_eq!(big.total_neurons(), 10240);
    }

    #[test]
    fn sfft_rejects_other_sizes() {
        assert!(matches!(build_sfft(32, &cfg()), Err(Error::Size(_))));
        assert!(matches!(build_sfft(1, &cfg()), Err(Error::Size(_))));
        assert!(matches!(build_sdft(1, &cfg()), Err(Error::Size(_))));
    }

    #[test]
    fn continuous_run_is_exact() {
        let n = 16;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 / 11.0) - 0.5).collect();
        let signal = Signal::from_real(&x, 1.0).unwrap();
        let exact = dft_slice(signal.samples());
        for plan in [build_sdft(n, &cfg()).unwrap(), build_sfft(n, &cfg()).unwrap()] {
            let out = run_plan(&plan, &signal, RunMode::Continuous, &cfg()).unwrap();
            for (a, b) in out.spectrum.iter().zip(&exact.bins) {
                assert!((a - b).norm() < 1e-9 * n as f64, "{:?}: {a} vs {b}", plan.kind);
            }
        }
    }

    #[test]
    fn zero_input_decodes_near_zero() {
        let n = 64;
        let signal = Signal::from_real(&vec![0.0; n], 1.0).unwrap();
        for plan in [build_sdft(n, &cfg()).unwrap(), build_sfft(n, &cfg()).unwrap()] {
            let out = run_plan(&plan, &signal, RunMode::Stepped, &cfg()).unwrap();
            let bound = 2.0 * plan.cumulative_scale() / cfg().t_max() as f64 * plan.layers.len() as f64;
            assert!(out.missing.is_empty());
            for c in &out.spectrum {
                assert!(c.re.abs() <= bound && c.im.abs() <= bound, "{:?}: {c}", plan.kind);
            }
        }
    }

    #[test]
    fn halved_threshold_refuses_complex_input() {
        let x = Signal::new(vec![Complex64::new(0.1, 0.2); 4], 1.0).unwrap();
        let plan = build_sdft(4, &cfg()).unwrap();
        assert!(matches!(run_plan(&plan, &x, RunMode::Continuous, &cfg()), Err(Error::Mode(_))));
        let general = build_any(8, &cfg()).unwrap();
        assert_eq!(general.threshold_modes, vec![ThresholdMode::General]);
    }

    #[test]
    fn wrong_length_is_usage_error() {
        let plan = build_sfft(16, &cfg()).unwrap();
        let x = Signal::from_real(&[0.0; 8], 1.0).unwrap();
        assert!(matches!(run_plan(&plan, &x, RunMode::Stepped, &cfg()), Err(Error::Usage(_))));
    }

    #[test]
    fn summary_serializes() {
        let plan = build_sfft(64, &cfg()).unwrap();
        let json = serde_json::to_string_pretty(&plan.summary()).unwrap();
        assert!(json.contains("\"kind\": \"sfft\""));
        let back: PlanSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.layers.len(), 3);
    }
}
