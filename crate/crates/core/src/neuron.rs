//! Two-stage non-leaky integrate-and-fire dynamics.
//!
//! During the silent stage a neuron integrates `Δu = Σ_causal w_ij + β_i`
//! per step, where `β_i = b_i / t_s` is a constant bias current, so that
//! at `t_s`
//!
//! ```text
//! u_i(t_s) = Σ_j w_ij (t_s − t_j) + b_i = γ Σ_j w_ij x_j
//! ```
//!
//! During the spiking stage a constant drive `I_ext` ramps the membrane
//! and the neuron fires once, at the first step with `u ≥ u_th`. The
//! relative firing step is the time code of `u_i(t_s) / u_th` for the next
//! layer.
//!
//! Step `t_s` is shared: it is the last integration step and also the
//! first step at which the threshold is checked for spiking, so a neuron
//! charged exactly to `u_th` fires at relative time 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{SpikeFrame, TimeGrid};
use crate::error::{Error, Result};
use crate::oracle::Matrix;

/// Relative slack when comparing against the threshold at the end of the
/// silent stage.
const THRESHOLD_TOL: f64 = 1e-9;

/// Synaptic weights of one layer; rows are post-synaptic neurons.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Dense(Matrix),
    /// Per-row `(column, weight)` lists.
    Sparse { rows: Vec<Vec<(usize, f64)>>, cols: usize },
}

impl Weights {
    pub fn rows(&self) -> usize {
        match self {
            Weights::Dense(m) => m.rows(),
            Weights::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Weights::Dense(m) => m.cols(),
            Weights::Sparse { cols, .. } => *cols,
        }
    }

    /// Non-zero entries of row `i`.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, f64)> {
        match self {
            Weights::Dense(m) => m.row(i).iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect(),
            Weights::Sparse { rows, .. } => rows[i].iter().copied().filter(|(_, w)| *w != 0.0).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        (0..self.rows()).map(|i| self.row_entries(i).len()).sum()
    }

    pub fn max_inbound(&self) -> usize {
        (0..self.rows()).map(|i| self.row_entries(i).len()).max().unwrap_or(0)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_entries(i).iter().map(|(_, w)| w).sum()
    }

    pub fn row_abs_sum(&self, i: usize) -> f64 {
        self.row_entries(i).iter().map(|(_, w)| w.abs()).sum()
    }

    /// `max_i Σ_j |w_ij|`, the per-layer normalizer.
    pub fn max_row_abs_sum(&self) -> f64 {
        (0..self.rows()).map(|i| self.row_abs_sum(i)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.rows()).flat_map(|i| self.row_entries(i)).fold(0.0_f64, |m, (_, w)| m.max(w.abs()))
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Weights::Dense(m) => m.clone(),
            Weights::Sparse { rows, cols } => {
                let mut m = Matrix::zeros(rows.len(), *cols);
                for (i, row) in rows.iter().enumerate() {
                    for &(j, w) in row {
                        m[(i, j)] += w;
                    }
                }
                m
            }
        }
    }

    /// Applies `f` to every stored weight, keeping the sparsity pattern.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Weights {
        match self {
            Weights::Dense(m) => Weights::Dense(Matrix::from_fn(m.rows(), m.cols(), |i, j| f(m[(i, j)]))),
            Weights::Sparse { rows, cols } => Weights::Sparse {
                rows: rows.iter().map(|r| r.iter().map(|&(j, w)| (j, f(w))).collect()).collect(),
                cols: *cols,
            },
        }
    }

    /// Row `i`'s inbound `(spike time, weight)` pairs in firing order.
    /// Inputs that never fired contribute nothing and are skipped.
    fn inbound_by_time(&self, i: usize, times: &[Option<f64>], order: &[usize]) -> Vec<(f64, f64)> {
        match self {
            Weights::Dense(m) => {
                let row = m.row(i);
                order
                    .iter()
                    .filter_map(|&j| times[j].map(|t| (t, row[j])))
                    .filter(|(_, w)| *w != 0.0)
                    .collect()
            }
            Weights::Sparse { rows, .. } => {
                let mut v: Vec<(f64, f64)> = rows[i]
                    .iter()
                    .filter(|(_, w)| *w != 0.0)
                    .filter_map(|&(j, w)| times[j].map(|t| (t, w)))
                    .collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                v
            }
        }
    }
}

/// Parameters of one layer of neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Weights,
    /// Constant bias current per silent step, `b_i / t_s`.
    pub bias_current: Vec<f64>,
    /// Threshold voltage `u_th`.
    pub threshold: f64,
    /// Drive current `I_ext` per spiking step.
    pub drive_current: f64,
    /// Silent stage length `t_s`.
    pub silent_steps: u32,
    /// End of the spiking stage `t_T`.
    pub total_steps: u32,
    /// Symmetric membrane saturation, when modeling fixed-range hardware.
    pub voltage_limit: Option<f64>,
}

impl LayerParams {
    /// Validates and assembles a layer; `bias` holds the total per-neuron
    /// offset `b_i` delivered over the silent stage.
    pub fn new(
        weights: Weights,
        bias: &[f64],
        threshold: f64,
        drive_current: f64,
        silent_steps: u32,
        total_steps: u32,
    ) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Size(format!("{} biases for {} neurons", bias.len(), weights.rows())));
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
        }
        if !(drive_current.is_finite() && drive_current > 0.0) {
            return Err(Error::Domain(format!("drive current must be positive, got {drive_current}")));
        }
        if silent_steps < 1 || total_steps <= silent_steps {
            return Err(Error::Domain(format!(
                "need t_T > t_s >= 1, got t_s = {silent_steps}, t_T = {total_steps}"
            )));
        }
        let min_drive = 2.0 * threshold / (total_steps - silent_steps) as f64;
        if drive_current < min_drive * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "drive current {drive_current} cannot reach threshold from −u_th (needs {min_drive})"
            )));
        }
        let ts = silent_steps as f64;
        Ok(Self {
            weights,
            bias_current: bias.iter().map(|b| b / ts).collect(),
            threshold,
            drive_current,
            silent_steps,
            total_steps,
            voltage_limit: None,
        })
    }

    /// Layer timed for a `t_max`-step code: `t_s = t_max`, `t_T = 2 t_max`
    /// and the minimal drive `I_ext = 2 u_th / t_max`.
    pub fn for_code(weights: Weights, bias: &[f64], threshold: f64, t_max: u32) -> Result<Self> {
        let drive = 2.0 * threshold / t_max as f64;
        Self::new(weights, bias, threshold, drive, t_max, 2 * t_max)
    }

    pub fn neurons(&self) -> usize {
        self.weights.rows()
    }

    /// Total bias `b_i` per neuron.
    pub fn bias(&self) -> Vec<f64> {
        self.bias_current.iter().map(|c| c * self.silent_steps as f64).collect()
    }

    pub fn spiking_window(&self) -> u32 {
        self.total_steps - self.silent_steps
    }
}

/// Membrane state of one neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub membrane: f64,
    /// Sum of the weights of inputs that have already fired.
    pub accumulated_weight: f64,
    pub fired: bool,
    /// Absolute firing step (or time on a continuous grid).
    pub fire_step: Option<f64>,
    /// Times the membrane hit the voltage limit.
    pub clamp_events: u32,
}

fn saturate(u: f64, limit: Option<f64>, clamps: &mut u32) -> f64 {
    match limit {
        Some(l) if u.abs() > l => {
            *clamps += 1;
            u.clamp(-l, l)
        }
        _ => u,
    }
}

/// Integrates the silent stage for every neuron.
///
/// On a stepped grid the recurrence runs step by step for `t = 1..=t_s`;
/// on a continuous grid the closed form `Σ w (t_s − t_j) + b` is used.
pub fn run_silent(params: &LayerParams, input: &SpikeFrame) -> Result<Vec<NeuronState>> {
    let cols = params.weights.cols();
    if input.len() != cols {
        return Err(Error::Size(format!("{} input spikes for {cols} synapse columns", input.len())));
    }
    let ts = params.silent_steps;
    if let Some((j, t)) = input
        .times
        .iter()
        .enumerate()
        .find_map(|(j, t)| t.filter(|&t| !(0.0..=ts as f64).contains(&t)).map(|t| (j, t)))
    {
        return Err(Error::Consistency(format!("input {j} spikes at {t}, outside the silent stage [0, {ts}]")));
    }

    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        let ta = input.times[a].unwrap_or(f64::INFINITY);
        let tb = input.times[b].unwrap_or(f64::INFINITY);
        ta.total_cmp(&tb)
    });

    (0..params.neurons())
        .into_par_iter()
        .map(|i| {
            let inbound = params.weights.inbound_by_time(i, &input.times, &order);
            match input.grid {
                TimeGrid::Stepped => integrate_stepped(params, i, &inbound),
                TimeGrid::Continuous => integrate_closed_form(params, i, &inbound),
            }
        })
        .collect()
}

fn integrate_stepped(params: &LayerParams, i: usize, inbound: &[(f64, f64)]) -> Result<NeuronState> {
    let ts = params.silent_steps;
    let bias = params.bias_current[i];
    let tol = THRESHOLD_TOL * params.threshold;
    let (mut u, mut acc, mut k, mut clamps) = (0.0, 0.0, 0usize, 0u32);
    for t in 1..=ts {
        // inputs that fired at step t−1 or earlier are causal from now on
        while k < inbound.len() && inbound[k].0 < t as f64 {
            acc += inbound[k].1;
            k += 1;
        }
        u = saturate(u + acc + bias, params.voltage_limit, &mut clamps);
        if t < ts && u >= params.threshold {
            return Err(Error::PrematureSpike { neuron: i, step: t });
        }
    }
    if u > params.threshold + tol {
        return Err(Error::PrematureSpike { neuron: i, step: ts });
    }
    Ok(NeuronState {
        membrane: u.min(params.threshold),
        accumulated_weight: acc,
        fired: false,
        fire_step: None,
        clamp_events: clamps,
    })
}

fn integrate_closed_form(params: &LayerParams, i: usize, inbound: &[(f64, f64)]) -> Result<NeuronState> {
    let ts = params.silent_steps as f64;
    let charge: f64 = inbound.iter().map(|&(t, w)| w * (ts - t)).sum();
    let acc: f64 = inbound.iter().map(|&(_, w)| w).sum();
    let u = charge + params.bias_current[i] * ts;
    if u > params.threshold * (1.0 + THRESHOLD_TOL) {
        return Err(Error::PrematureSpike { neuron: i, step: params.silent_steps });
    }
    Ok(NeuronState {
        membrane: u.min(params.threshold),
        accumulated_weight: acc,
        fired: false,
        fire_step: None,
        clamp_events: 0,
    })
}

/// First step `r >= 0` with `u + r I >= u_th`, i.e. `ceil((u_th − u) / I)`.
///
/// Quotients within rounding noise of an integer count as that integer, so
/// a membrane sitting exactly on `−u_th` still fires at the window end.
pub fn ramp_steps(threshold: f64, membrane: f64, drive_current: f64) -> f64 {
    let q = (threshold - membrane) / drive_current;
    let near = q.round();
    let r = if (q - near).abs() <= THRESHOLD_TOL * near.abs().max(1.0) { near } else { q.ceil() };
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Ramps every neuron with `I_ext` and records its single spike.
///
/// The returned frame holds firing times relative to `t_s`, i.e. the
/// input code of the next layer. Neurons that do not reach threshold by
/// `t_T` stay `None`. Membranes are reset afterwards.
pub fn run_spiking(states: &mut [NeuronState], params: &LayerParams, grid: TimeGrid, stage_index: usize) -> SpikeFrame {
    let window = params.spiking_window();
    let ts = params.silent_steps as f64;
    let times: Vec<Option<f64>> = states
        .par_iter_mut()
        .map(|s| {
            let rel = match grid {
                TimeGrid::Stepped => {
                    let r = ramp_steps(params.threshold, s.membrane, params.drive_current);
                    (r <= window as f64).then(|| {
                        saturate(s.membrane + r * params.drive_current, params.voltage_limit, &mut s.clamp_events);
                        r
                    })
                }
                TimeGrid::Continuous => {
                    let r = ((params.threshold - s.membrane) / params.drive_current).max(0.0);
                    (r <= window as f64 * (1.0 + THRESHOLD_TOL)).then(|| r.min(window as f64))
                }
            };
            s.fired = rel.is_some();
            s.fire_step = rel.map(|r| ts + r);
            s.membrane = 0.0;
            rel
        })
        .collect();
    SpikeFrame { times, stage_index, grid }
}

/// How the layer threshold is derived from its weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// `max_i γ Σ_j |w_ij| x_max`: no input in range can cross early.
    General,
    /// `(γ/2) Σ_j w_0j x_max`: half the zero-frequency maximum, valid for
    /// Fourier layers fed with real signals.
    DftHalf,
}

pub fn compute_threshold(weights: &Weights, gamma: f64, x_max: f64, mode: ThresholdMode) -> Result<f64> {
    if weights.rows() == 0 || weights.cols() == 0 {
        return Err(Error::Size("empty weight matrix".into()));
    }
    match mode {
        ThresholdMode::General => Ok(gamma * weights.max_row_abs_sum() * x_max),
        ThresholdMode::DftHalf => {
            let row0 = weights.row_entries(0);
            if row0.is_empty() || row0.iter().any(|&(_, w)| w < 0.0) {
                return Err(Error::Mode("halved threshold needs an all-positive zero-frequency row".into()));
            }
            Ok(gamma / 2.0 * weights.row_sum(0) * x_max)
        }
    }
}

/// `b_i = −Σ_j w_ij (t_s − γ x_max)`; exactly zero for zero-sum rows.
pub fn compute_bias(weights: &Weights, silent_steps: u32, gamma: f64, x_max: f64) -> Vec<f64> {
    let offset = silent_steps as f64 - gamma * x_max;
    (0..weights.rows())
        .map(|i| {
            let sum = weights.row_sum(i);
            if sum.abs() <= 1e-12 * weights.row_abs_sum(i) {
                0.0
            } else {
                -offset * sum
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode_values, EncoderConfig};
    use crate::oracle::real_dft_matrix;

    fn frame(times: Vec<f64>) -> SpikeFrame {
        SpikeFrame { times: times.into_iter().map(Some).collect(), stage_index: 0, grid: TimeGrid::Stepped }
    }

    #[test]
    fn all_inputs_at_zero_charge_linearly() {
        let n = 5;
        let w = Weights::Dense(Matrix::from_fn(3, n, |_, _| 1.0));
        let p = LayerParams::new(w, &[0.0; 3], 1e9, 1e9, 16, 32).unwrap();
        let states = run_silent(&p, &frame(vec![0.0; n])).unwrap();
        for s in states {
            assert_eq!(s.membrane, (n * 16) as f64);
            assert_eq!(s.accumulated_weight, n as f64);
        }
    }

    #[test]
    fn zero_input_leaves_fourier_bins_uncharged() {
        let cfg = EncoderConfig::new(1.0, 65).unwrap();
        let w = Weights::Dense(real_dft_matrix(8));
        let th = compute_threshold(&w, cfg.gamma(), 1.0, ThresholdMode::General).unwrap();
        let bias = compute_bias(&w, cfg.t_max(), cfg.gamma(), 1.0);
        let p = LayerParams::for_code(w, &bias, th, cfg.t_max()).unwrap();
        let input = encode_values(&[0.0; 16], &cfg, TimeGrid::Stepped).unwrap();
        let states = run_silent(&p, &input).unwrap();
        for (i, s) in states.iter().enumerate() {
            if i % 8 != 0 {
                assert!(s.membrane.abs() < 1e-9, "row {i}: {}", s.membrane);
            }
        }
    }

    fn single_neuron(threshold: f64) -> LayerParams {
        let w = Weights::Dense(Matrix::from_fn(1, 1, |_, _| 1.0));
        LayerParams::for_code(w, &[0.0], threshold, 100).unwrap()
    }

    #[test]
    fn ramp_boundaries() {
        let p = single_neuron(50.0);
        let mk = |u: f64| NeuronState { membrane: u, accumulated_weight: 0.0, fired: false, fire_step: None, clamp_events: 0 };

        let mut s = [mk(50.0), mk(-50.0), mk(0.0)];
        let out = run_spiking(&mut s, &p, TimeGrid::Stepped, 1);
        assert_eq!(out.times[0], Some(0.0));
        assert_eq!(s[0].fire_step, Some(100.0));
        assert_eq!(out.times[1], Some(100.0));
        assert_eq!(s[1].fire_step, Some(p.total_steps as f64));
        assert_eq!(out.times[2], Some(50.0));
        assert!(s.iter().all(|n| n.fired && n.membrane == 0.0));
    }

    #[test]
    fn under_driven_neuron_reports_no_spike() {
        let mut p = single_neuron(50.0);
        let mut s = [NeuronState { membrane: -60.0, accumulated_weight: 0.0, fired: false, fire_step: None, clamp_events: 0 }];
        let out = run_spiking(&mut s, &p, TimeGrid::Stepped, 1);
        assert_eq!(out.times[0], None);
        assert!(!s[0].fired);
        p.drive_current = 0.5;
        assert!(LayerParams::new(p.weights.clone(), &[0.0], 50.0, 0.5, 100, 200).is_err());
    }

    #[test]
    fn mis_set_threshold_is_premature() {
        let w = Weights::Dense(Matrix::from_fn(1, 2, |_, _| 1.0));
        let p = LayerParams::for_code(w, &[0.0], 10.0, 100).unwrap();
        match run_silent(&p, &frame(vec![0.0, 0.0])) {
            Err(Error::PrematureSpike { neuron: 0, step }) => assert_eq!(step, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn threshold_rules() {
        let id = Weights::Dense(Matrix::identity(4));
        assert_eq!(compute_threshold(&id, 1.0, 1.0, ThresholdMode::General).unwrap(), 1.0);
        let dft = Weights::Dense(real_dft_matrix(16));
        let half = compute_threshold(&dft, 2.0, 1.5, ThresholdMode::DftHalf).unwrap();
        assert!((half - 2.0 / 2.0 * 16.0 * 1.5).abs() < 1e-12);
        let neg = Weights::Dense(Matrix::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 1.0 }));
        assert!(matches!(compute_threshold(&neg, 1.0, 1.0, ThresholdMode::DftHalf), Err(Error::Mode(_))));
    }

    #[test]
    fn threshold_random_sign_matrix() {
        // brute-force row sums for a fixed ±1 pattern
        let m = Matrix::from_fn(8, 8, |i, j| if (i * 13 + j * 7 + i * j) % 3 == 0 { -1.0 } else { 1.0 });
        let expected = (0..8).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let th = compute_threshold(&Weights::Dense(m), 0.75, 2.0, ThresholdMode::General).unwrap();
        assert!((th - expected * 0.75 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn bias_rules() {
        let dft = Weights::Dense(real_dft_matrix(8));
        let b = compute_bias(&dft, 64, 32.0, 1.0);
        for (i, v) in b.iter().enumerate() {
            if i % 8 != 0 {
                assert_eq!(*v, 0.0);
            }
        }
        let ones = Weights::Dense(Matrix::from_fn(1, 6, |_, _| 1.0));
        let gamma = 10.0;
        let b = compute_bias(&ones, 20, gamma, 1.0);
        assert!((b[0] + gamma * 6.0).abs() < 1e-12);
        let row = [0.3, -1.2, 0.7, 2.5];
        let w = Weights::Dense(Matrix::from_fn(1, 4, |_, j| row[j]));
        let direct: f64 = -row.iter().map(|w| w * (50.0 - 12.5)).sum::<f64>();
        assert!((compute_bias(&w, 50, 12.5, 1.0)[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn silent_voltage_matches_closed_form() {
        let row = [0.5, -1.0, 0.25, 2.0];
        let w = Weights::Dense(Matrix::from_fn(1, 4, |_, j| row[j]));
        let times = [3.0, 0.0, 17.0, 9.0];
        let p = LayerParams::new(w, &[4.0], 1e6, 1e6, 20, 40).unwrap();
        let s = run_silent(&p, &frame(times.to_vec())).unwrap();
        let expected: f64 = row.iter().zip(&times).map(|(w, t)| w * (20.0 - t)).sum::<f64>() + 4.0;
        assert!((s[0].membrane - expected).abs() < 1e-9);
    }
}
