//! Fixed-point hardware constraints.
//!
//! Weights become `m · 2^exp` with a per-layer shared exponent, and the
//! whole network moves into an integer voltage domain: every voltage and
//! current is multiplied by one power-of-two scale `V` chosen so the
//! largest threshold still fits below the hardware limit. The drive
//! current and bias current are multiples of the minimum current quantum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkPlan;
use crate::neuron::{compute_bias, compute_threshold, LayerParams, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantSpec {
    pub mantissa_min: i32,
    pub mantissa_max: i32,
    pub exponent_min: i32,
    pub exponent_max: i32,
    /// Mantissas beyond ±127 may only be even.
    pub even_mantissa_at_full_range: bool,
    /// Membrane voltages saturate at `±voltage_limit`.
    pub voltage_limit: f64,
    pub max_threshold: f64,
    pub current_quantum: f64,
}

impl Default for QuantSpec {
    fn default() -> Self {
        Self {
            mantissa_min: -256,
            mantissa_max: 255,
            exponent_min: -8,
            exponent_max: 7,
            even_mantissa_at_full_range: true,
            voltage_limit: (1u64 << 23) as f64,
            max_threshold: ((1u64 << 23) - (1 << 6)) as f64,
            current_quantum: 64.0,
        }
    }
}

impl QuantSpec {
    /// Whether `w` equals some `m · 2^exp` with `m` and `exp` in range.
    pub fn is_representable(&self, w: f64, exp: i32) -> bool {
        if !(self.exponent_min..=self.exponent_max).contains(&exp) {
            return false;
        }
        let m = w / 2f64.powi(exp);
        m.fract() == 0.0 && m >= self.mantissa_min as f64 && m <= self.mantissa_max as f64
    }

    /// Smallest exponent with `max_abs / 2^exp` inside the mantissa range,
    /// saturating at the largest exponent.
    pub fn shared_exponent(&self, max_abs: f64) -> i32 {
        let limit = self.mantissa_max as f64;
        (self.exponent_min..=self.exponent_max)
            .find(|&e| max_abs / 2f64.powi(e) <= limit)
            .unwrap_or(self.exponent_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizedWeight {
    pub value: f64,
    pub mantissa: i32,
    pub exponent: i32,
}

/// Quantizes one weight against a shared exponent, saturating at the
/// mantissa range. The even rule applies when this weight's own mantissa
/// exceeds ±127.
pub fn quantize_weight(w: f64, spec: &QuantSpec, shared_exp: i32) -> Result<QuantizedWeight> {
    let raw = quantize_mantissa(w, spec, shared_exp, false)?;
    if spec.even_mantissa_at_full_range && raw.abs() > 127 {
        return weight_from(quantize_mantissa(w, spec, shared_exp, true)?, shared_exp);
    }
    weight_from(raw, shared_exp)
}

fn weight_from(m: i32, exp: i32) -> Result<QuantizedWeight> {
    Ok(QuantizedWeight { value: m as f64 * 2f64.powi(exp), mantissa: m, exponent: exp })
}

fn quantize_mantissa(w: f64, spec: &QuantSpec, exp: i32, even: bool) -> Result<i32> {
    if !(spec.exponent_min..=spec.exponent_max).contains(&exp) {
        return Err(Error::Domain(format!(
            "exponent {exp} outside [{}, {}]",
            spec.exponent_min, spec.exponent_max
        )));
    }
    if !w.is_finite() {
        return Err(Error::Domain(format!("cannot quantize weight {w}")));
    }
    let x = w / 2f64.powi(exp);
    let m = if even { 2.0 * (x / 2.0).round() } else { x.round() };
    let (lo, hi) = if even {
        // largest even values inside the range
        (spec.mantissa_min + spec.mantissa_min.rem_euclid(2), spec.mantissa_max - spec.mantissa_max.rem_euclid(2))
    } else {
        (spec.mantissa_min, spec.mantissa_max)
    };
    Ok((m as i32).clamp(lo, hi))
}

/// What happened to one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerQuantReport {
    pub exponent: i32,
    pub even_rule_applied: bool,
    /// Worst `|w − ŵ|` before voltage scaling.
    pub max_weight_error: f64,
    pub threshold: f64,
    pub drive_current: f64,
    /// Integer synaptic currents that had to be rounded after scaling.
    pub rounded_weights: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub spec: QuantSpec,
    /// Global voltage scale `V` (a power of two).
    pub voltage_scale: f64,
    pub layers: Vec<LayerQuantReport>,
}

impl QuantReport {
    pub fn max_weight_error(&self) -> f64 {
        self.layers.iter().map(|l| l.max_weight_error).fold(0.0, f64::max)
    }
}

struct Staged {
    weights: Weights,
    threshold: f64,
    bias: Vec<f64>,
    scale: f64,
    exponent: i32,
    even: bool,
    max_err: f64,
}

/// Maps a floating-point plan onto the integer hardware domain.
pub fn quantize_plan(plan: &NetworkPlan, spec: &QuantSpec) -> Result<(NetworkPlan, QuantReport)> {
    let cfg = plan.encoder;
    let gamma = cfg.gamma();
    let t_s = cfg.t_max();

    let mut staged = Vec::with_capacity(plan.layers.len());
    for (layer, &mode) in plan.layers.iter().zip(&plan.threshold_modes) {
        let w = &layer.weights;
        let exponent = spec.shared_exponent(w.max_abs());
        let even = spec.even_mantissa_at_full_range
            && (0..w.rows())
                .flat_map(|i| w.row_entries(i))
                .any(|(_, v)| quantize_mantissa(v, spec, exponent, false).is_ok_and(|m| m.abs() > 127));
        // Weights::map takes an infallible closure; the exponent is in range here
        let q = w.map(|v| quantize_mantissa(v, spec, exponent, even).unwrap_or(0) as f64 * 2f64.powi(exponent));
        let max_err = w.to_dense().max_abs_diff(&q.to_dense());
        let threshold = compute_threshold(&q, gamma, cfg.x_max, mode)?;
        let bias = compute_bias(&q, t_s, gamma, cfg.x_max);
        staged.push(Staged { scale: threshold / (gamma * cfg.x_max), weights: q, threshold, bias, exponent, even, max_err });
    }

    let largest = staged.iter().map(|s| s.threshold).fold(0.0, f64::max);
    let v_exp = (spec.max_threshold / largest).log2().floor();
    if v_exp < 0.0 {
        return Err(Error::Capacity(format!(
            "threshold {largest} exceeds the hardware maximum {}",
            spec.max_threshold
        )));
    }
    let v = 2f64.powi(v_exp as i32);
    let quantum = spec.current_quantum;

    let mut layers = Vec::with_capacity(staged.len());
    let mut reports = Vec::with_capacity(staged.len());
    for s in staged {
        let mut rounded = 0;
        let weights = s.weights.map(|w| (w * v).round());
        for i in 0..s.weights.rows() {
            rounded += s.weights.row_entries(i).iter().filter(|(_, w)| (w * v).fract() != 0.0).count();
        }
        let threshold = (v * s.threshold).floor();
        let drive = (v * 2.0 * s.threshold / t_s as f64 / quantum).ceil() * quantum;
        let bias_total: Vec<f64> = s
            .bias
            .iter()
            .map(|b| (v * b / t_s as f64 / quantum).round() * quantum * t_s as f64)
            .collect();
        let mut params = LayerParams::new(weights, &bias_total, threshold, drive, t_s, 2 * t_s)?;
        params.voltage_limit = Some(spec.voltage_limit);
        reports.push(LayerQuantReport {
            exponent: s.exponent,
            even_rule_applied: s.even,
            max_weight_error: s.max_err,
            threshold,
            drive_current: drive,
            rounded_weights: rounded,
            scale: s.scale,
        });
        layers.push(params);
    }

    let quantized = NetworkPlan {
        layers,
        scales: reports.iter().map(|r| r.scale).collect(),
        ..plan.clone()
    };
    Ok((quantized, QuantReport { spec: *spec, voltage_scale: v, layers: reports }))
}
