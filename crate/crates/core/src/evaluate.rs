//! Accuracy protocol: normalization, RMSE, step sweeps and 2-D maps.
//!
//! Spectra are compared after dropping the offset bin, keeping the
//! positive half for real input, subtracting the mean of each part and
//! scaling the real and imaginary parts of each spectrum independently to
//! `[-1, 1]`. The mean removal cancels the constant shift that ceiling
//! spike timing adds to every output bin.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::EncoderConfig;
use crate::error::{Error, Result};
use crate::network::{run_plan, NetworkKind, NetworkPlan, RunMode};
use crate::oracle::{dft_slice, Spectrum};
use crate::quantize::{quantize_plan, QuantSpec};
use crate::signal::{synthesize_chirp, RadarConfig, Scenario, Signal, DEFAULT_NOISE_STD};

/// Builds a plan for a transform size and encoder.
pub type PlanBuilder<'a> = &'a (dyn Fn(usize, &EncoderConfig) -> Result<NetworkPlan> + Sync);

/// How a pair of spectra was brought to a common range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMeta {
    /// Bins kept, `[first, last)`.
    pub first_bin: usize,
    pub last_bin: usize,
    /// `(re, im)` means subtracted from each spectrum.
    pub offset_a: (f64, f64),
    pub offset_b: (f64, f64),
    /// `(re, im)` divisors of each spectrum.
    pub scale_a: (f64, f64),
    pub scale_b: (f64, f64),
    /// Some part was all zero and left unscaled.
    pub zero_part: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPair {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub meta: NormalizationMeta,
}

/// Scales real and imaginary parts independently by their largest
/// magnitude. Returns the divisors and whether a part was all zero.
pub fn scale_parts(x: &[Complex64]) -> (Vec<Complex64>, (f64, f64), bool) {
    let re = x.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
    let im = x.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    let zero = re == 0.0 || im == 0.0;
    let (re, im) = (if re > 0.0 { re } else { 1.0 }, if im > 0.0 { im } else { 1.0 });
    (x.iter().map(|c| Complex64::new(c.re / re, c.im / im)).collect(), (re, im), zero)
}

/// Subtracts the mean of the real and imaginary parts.
pub fn remove_offset(x: &[Complex64]) -> (Vec<Complex64>, (f64, f64)) {
    let len = x.len().max(1) as f64;
    let mean = x.iter().sum::<Complex64>() / len;
    (x.iter().map(|c| c - mean).collect(), (mean.re, mean.im))
}

/// Applies the comparison protocol to two spectra of equal size.
pub fn normalize_pair(a: &Spectrum, b: &Spectrum, real_input: bool) -> Result<NormalizedPair> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!("spectra differ in size: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Usage("need at least two bins to drop the offset".into()));
    }
    let last = if real_input { (n / 2).max(2) } else { n };
    let (ca, offset_a) = remove_offset(&a.bins[1..last]);
    let (cb, offset_b) = remove_offset(&b.bins[1..last]);
    let (na, scale_a, za) = scale_parts(&ca);
    let (nb, scale_b, zb) = scale_parts(&cb);
    Ok(NormalizedPair {
        a: na,
        b: nb,
        meta: NormalizationMeta { first_bin: 1, last_bin: last, offset_a, offset_b, scale_a, scale_b, zero_part: za || zb },
    })
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Usage(format!("rmse needs equal non-empty inputs, got {} and {}", a.len(), b.len())));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// RMSE over the concatenated real and imaginary parts.
pub fn rmse_complex(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let flat = |v: &[Complex64]| v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect::<Vec<_>>();
    rmse(&flat(a), &flat(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario: String,
    pub architecture: NetworkKind,
    pub n_bins: usize,
    pub steps_per_stage: u32,
    pub mode: RunMode,
    pub quantized: bool,
    pub rmse: f64,
    /// `|Δ|` per kept bin; `rmse² · 2 · len = Σ e²`.
    pub per_bin_error: Vec<f64>,
    pub normalization: NormalizationMeta,
    pub argmax_oracle: usize,
    pub argmax_snn: usize,
    pub silent_neurons: usize,
    pub clamp_events: u64,
}

impl EvalReport {
    pub fn peak_matches(&self) -> bool {
        self.argmax_oracle == self.argmax_snn
    }
}

/// Run settings shared by scenario evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub mode: RunMode,
    pub quantized: bool,
    pub seed: u64,
    pub noise_std: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { mode: RunMode::Stepped, quantized: false, seed: 7, noise_std: DEFAULT_NOISE_STD }
    }
}

/// Runs `plan` (quantizing it when asked) and compares with the oracle.
pub fn evaluate_signal(plan: &NetworkPlan, signal: &Signal, label: &str, opts: &EvalOptions) -> Result<(EvalReport, Spectrum, Spectrum)> {
    let quantized;
    let plan = if opts.quantized {
        quantized = quantize_plan(plan, &QuantSpec::default())?.0;
        &quantized
    } else {
        plan
    };
    let out = run_plan(plan, signal, opts.mode, &plan.encoder)?;
    let oracle = dft_slice(signal.samples());
    let snn = Spectrum::new(out.spectrum);
    let real = signal.is_real();
    let pair = normalize_pair(&oracle, &snn, real)?;
    let per_bin_error = pair.a.iter().zip(&pair.b).map(|(x, y)| (x - y).norm()).collect();
    let half = if real { (plan.n / 2).max(2) } else { plan.n };
    let report = EvalReport {
        scenario: label.to_string(),
        architecture: plan.kind,
        n_bins: pair.a.len(),
        steps_per_stage: plan.encoder.steps_per_stage,
        mode: opts.mode,
        quantized: opts.quantized,
        rmse: rmse_complex(&pair.a, &pair.b)?,
        per_bin_error,
        normalization: pair.meta,
        argmax_oracle: oracle.argmax_in(1..half),
        argmax_snn: snn.argmax_in(1..half),
        silent_neurons: out.silent_neurons,
        clamp_events: out.clamp_events,
    };
    Ok((report, oracle, snn))
}

/// One synthetic chirp of `scenario` with `n` samples.
pub fn scenario_signal(scenario: Scenario, n: usize, opts: &EvalOptions) -> Result<Signal> {
    let config = RadarConfig::automotive().with_samples(n)?;
    synthesize_chirp(&config, &scenario.targets(), opts.noise_std, opts.seed)
}

pub fn evaluate_scenario(
    builder: PlanBuilder,
    n: usize,
    steps_per_stage: u32,
    scenario: Scenario,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let cfg = EncoderConfig::new(1.0, steps_per_stage)?;
    let plan = builder(n, &cfg)?;
    let signal = scenario_signal(scenario, n, opts)?;
    Ok(evaluate_signal(&plan, &signal, &scenario.to_string(), opts)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub steps_per_stage: u32,
    /// Mean over the four static scenarios.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Adjacent step counts compared per size.
    pub pairs: usize,
    /// Pairs where more steps gave a lower error.
    pub improved: usize,
}

impl SweepTable {
    pub fn monotone_fraction(&self) -> f64 {
        if self.pairs == 0 {
            1.0
        } else {
            self.improved as f64 / self.pairs as f64
        }
    }
}

/// Evaluates every `(n, n_T)` pair, averaging over the static scenarios.
pub fn sweep_steps(builder: PlanBuilder, steps: &[u32], sizes: &[usize], opts: &EvalOptions) -> Result<SweepTable> {
    if steps.is_empty() || sizes.is_empty() {
        return Err(Error::Usage("sweep needs at least one size and one step count".into()));
    }
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let grid: Vec<(usize, u32)> = sizes.iter().flat_map(|&n| steps.iter().map(move |&s| (n, s))).collect();
    let rows = grid
        .par_iter()
        .map(|&(n, s)| {
            let total = Scenario::ALL
                .iter()
                .map(|&sc| evaluate_scenario(builder, n, s, sc, opts).map(|r| r.rmse))
                .sum::<Result<f64>>()?;
            Ok(SweepRow { n, steps_per_stage: s, rmse: total / Scenario::ALL.len() as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = 0;
    let mut improved = 0;
    for w in rows.windows(2) {
        if w[0].n == w[1].n {
            pairs += 1;
            if w[1].rmse < w[0].rmse {
                improved += 1;
            }
        }
    }
    Ok(SweepTable { rows, pairs, improved })
}

/// Range-Doppler magnitude map of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDopplerMap {
    pub range_bins: usize,
    pub doppler_bins: usize,
    /// Complex map indexed `[range][doppler]`.
    pub values: Vec<Vec<Complex64>>,
    /// Log magnitude scaled to `[0, 1]`.
    pub log_magnitude: Vec<Vec<f64>>,
    /// `|range spectrum|` of the first chirp.
    pub range_cut: Vec<f64>,
    /// `|Doppler spectrum|` at the peak range bin.
    pub doppler_cut: Vec<f64>,
    /// `(range bin, Doppler bin)` of the largest magnitude, offset bin excluded.
    pub peak: (usize, usize),
}

impl RangeDopplerMap {
    /// Signed Doppler bin of index `d`; negative bins approach.
    pub fn signed_doppler(&self, d: usize) -> i64 {
        if d < self.doppler_bins / 2 {
            d as i64
        } else {
            d as i64 - self.doppler_bins as i64
        }
    }

    fn from_values(values: Vec<Vec<Complex64>>, first_chirp: Vec<f64>) -> Self {
        let range_bins = values.len();
        let doppler_bins = values.first().map_or(0, Vec::len);
        let mut peak = (1.min(range_bins.saturating_sub(1)), 0);
        let mut best = f64::NEG_INFINITY;
        for (r, row) in values.iter().enumerate().skip(1) {
            for (d, v) in row.iter().enumerate() {
                if v.norm() > best {
                    best = v.norm();
                    peak = (r, d);
                }
            }
        }
        let top = values.iter().flatten().fold(0.0_f64, |m, v| m.max(v.norm()));
        let floor = top * 1e-6;
        let logs: Vec<Vec<f64>> = values.iter().map(|row| row.iter().map(|v| v.norm().max(floor).max(f64::MIN_POSITIVE).log10()).collect()).collect();
        let (lo, hi) = logs.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let log_magnitude = logs.iter().map(|row| row.iter().map(|v| (v - lo) / span).collect()).collect();
        let doppler_cut = values.get(peak.0).map(|row| row.iter().map(|v| v.norm()).collect()).unwrap_or_default();
        Self { range_bins, doppler_bins, values, log_magnitude, range_cut: first_chirp, doppler_cut, peak }
    }
}

fn check_frame(frame: &[Signal]) -> Result<usize> {
    let n = frame.first().map(Signal::len).ok_or_else(|| Error::Usage("empty frame".into()))?;
    if let Some(i) = frame.iter().position(|c| c.len() != n) {
        return Err(Error::Usage(format!("chirp {i} has {} samples, chirp 0 has {n}", frame[i].len())));
    }
    Ok(n)
}

/// Spiking 2-D transform: range per chirp, then Doppler per range bin.
///
/// The decoded range spectra are rescaled by one global factor so the
/// largest part equals `x_max`, then re-encoded for the Doppler pass.
pub fn range_doppler(frame: &[Signal], builder: PlanBuilder, cfg: &EncoderConfig, mode: RunMode) -> Result<RangeDopplerMap> {
    let n = check_frame(frame)?;
    let chirps = frame.len();
    let range_plan = builder(n, cfg)?;
    let half = (n / 2).max(1);
    let range: Vec<Vec<Complex64>> = frame
        .par_iter()
        .map(|c| run_plan(&range_plan, c, mode, cfg).map(|o| o.spectrum[..half].to_vec()))
        .collect::<Result<_>>()?;

    let peak = range.iter().flatten().fold(0.0_f64, |m, v| m.max(v.re.abs()).max(v.im.abs()));
    let gain = if peak > 0.0 { cfg.x_max / peak } else { 1.0 };
    let doppler_plan = builder(chirps, cfg)?;
    let values: Vec<Vec<Complex64>> = (0..half)
        .into_par_iter()
        .map(|r| {
            let column: Vec<Complex64> = range.iter().map(|row| row[r] * gain).collect();
            let out = run_plan(&doppler_plan, &Signal::new(column, 1.0)?, mode, cfg)?;
            Ok(out.spectrum.iter().map(|v| v / gain).collect())
        })
        .collect::<Result<_>>()?;
    let first = range[0].iter().map(|v| v.norm()).collect();
    Ok(RangeDopplerMap::from_values(values, first))
}

/// Exact floating-point counterpart of [`range_doppler`].
pub fn oracle_range_doppler(frame: &[Signal]) -> Result<RangeDopplerMap> {
    let n = check_frame(frame)?;
    let half = (n / 2).max(1);
    let range: Vec<Vec<Complex64>> = frame.iter().map(|c| dft_slice(c.samples()).bins[..half].to_vec()).collect();
    let values = (0..half)
        .map(|r| dft_slice(&range.iter().map(|row| row[r]).collect::<Vec<_>>()).bins)
        .collect();
    let first = range[0].iter().map(|v| v.norm()).collect();
    Ok(RangeDopplerMap::from_values(values, first))
}

pub fn write_sweep_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready normalized spectra: bin, oracle and spiking parts, magnitudes.
pub fn write_spectrum_csv<W: Write>(oracle: &Spectrum, snn: &Spectrum, real_input: bool, out: W) -> Result<()> {
    let pair = normalize_pair(oracle, snn, real_input)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin", "oracle_re", "oracle_im", "snn_re", "snn_im", "oracle_mag", "snn_mag"])?;
    for (i, (a, b)) in pair.a.iter().zip(&pair.b).enumerate() {
        let bin = pair.meta.first_bin + i;
        w.write_record([
            bin.to_string(),
            a.re.to_string(),
            a.im.to_string(),
            b.re.to_string(),
            b.im.to_string(),
            a.norm().to_string(),
            b.norm().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-form map: range bin, signed Doppler bin, normalized log magnitude.
pub fn write_map_csv<W: Write>(map: &RangeDopplerMap, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["range_bin", "doppler_bin", "log_magnitude"])?;
    for (r, row) in map.log_magnitude.iter().enumerate() {
        for (d, v) in row.iter().enumerate() {
            w.write_record([r.to_string(), map.signed_doppler(d).to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}
