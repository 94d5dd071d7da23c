//! FMCW beat-signal synthesis and sample storage.
//!
//! A static target at range `R` produces a beat tone at
//!
//! ```text
//! f_beat = 2 * B * R / (c * T_chirp)
//! ```
//!
//! and a moving target advances its phase by `4π v T_chirp / λ` from one
//! chirp to the next, which is what the Doppler transform picks up.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radar carrier frequency (Hz).
pub const CARRIER_FREQUENCY: f64 = 77.0e9;

/// Default standard deviation of the additive Gaussian noise.
pub const DEFAULT_NOISE_STD: f64 = 0.01;

/// A finite sequence of complex samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("signal must hold at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::Domain(format!("invalid sample rate {sample_rate}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn from_real(values: &[f64], sample_rate: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), sample_rate)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|s| s.im == 0.0)
    }

    /// Largest absolute value over all real and imaginary parts.
    pub fn max_abs_part(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.re.abs()).max(s.im.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.norm()))
    }
}

/// FMCW radar parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Sweep bandwidth (Hz).
    pub bandwidth: f64,
    /// ADC sampling frequency (Hz).
    pub sampling_frequency: f64,
    pub chirps_per_frame: usize,
    /// Duration of one chirp (s).
    pub chirp_time: f64,
    /// Samples kept per chirp.
    pub samples_per_chirp: usize,
}

impl RadarConfig {
    /// Builds a configuration; the sample count is the largest power of 4
    /// that fits in one chirp.
    pub fn new(
        bandwidth: f64,
        sampling_frequency: f64,
        chirps_per_frame: usize,
        chirp_time: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("bandwidth", bandwidth),
            ("sampling_frequency", sampling_frequency),
            ("chirp_time", chirp_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if chirps_per_frame == 0 {
            return Err(Error::Domain("chirps_per_frame must be positive".into()));
        }
        let available = (sampling_frequency * chirp_time).floor() as usize;
        if available < 4 {
            return Err(Error::Domain(format!("only {available} samples fit in one chirp")));
        }
        let mut samples = 4;
        while samples * 4 <= available {
            samples *= 4;
        }
        Ok(Self { bandwidth, sampling_frequency, chirps_per_frame, chirp_time, samples_per_chirp: samples })
    }

    /// The automotive configuration used throughout the evaluation:
    /// 1535 MHz sweep, 5 MHz sampling, 128 chirps of 230 µs.
    pub fn automotive() -> Self {
        Self::new(1535.0e6, 5.0e6, 128, 230.0e-6).expect("static configuration is valid")
    }

    /// Keeps only the first `n` samples of each chirp.
    pub fn with_samples(mut self, n: usize) -> Result<Self> {
        let available = (self.sampling_frequency * self.chirp_time).floor() as usize;
        if n < 4 || n > available {
            return Err(Error::Domain(format!("samples_per_chirp must be in [4, {available}], got {n}")));
        }
        self.samples_per_chirp = n;
        Ok(self)
    }

    pub fn with_chirps(mut self, chirps: usize) -> Result<Self> {
        if chirps == 0 {
            return Err(Error::Domain("chirps_per_frame must be positive".into()));
        }
        self.chirps_per_frame = chirps;
        Ok(self)
    }

    /// Maximum unambiguous range of a real-sampled beat signal (m).
    pub fn max_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.sampling_frequency * self.chirp_time / (4.0 * self.bandwidth)
    }

    /// Range covered by one DFT bin for the configured sample count (m).
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT * self.sampling_frequency * self.chirp_time
            / (2.0 * self.bandwidth * self.samples_per_chirp as f64)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / CARRIER_FREQUENCY
    }

    /// Velocity covered by one Doppler bin (m/s).
    pub fn velocity_resolution(&self) -> f64 {
        self.wavelength() / (2.0 * self.chirps_per_frame as f64 * self.chirp_time)
    }

    /// Largest radial speed that still lands below the Doppler Nyquist bin.
    pub fn velocity_max(&self) -> f64 {
        let half = (self.chirps_per_frame / 2).max(1) as f64;
        (half - 1.0).max(0.0) * self.velocity_resolution()
    }

    pub fn beat_frequency(&self, range: f64) -> f64 {
        2.0 * self.bandwidth * range / (SPEED_OF_LIGHT * self.chirp_time)
    }
}

/// A point reflector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// Distance to the sensor (m).
    pub range: f64,
    /// Radial velocity (m/s), positive when receding.
    pub radial_velocity: f64,
    /// Relative reflection strength in (0, 1].
    pub amplitude: f64,
}

impl Target {
    pub fn new(range: f64, radial_velocity: f64, amplitude: f64) -> Result<Self> {
        if !(range.is_finite() && radial_velocity.is_finite() && amplitude.is_finite()) {
            return Err(Error::Domain("target parameters must be finite".into()));
        }
        if !(amplitude > 0.0 && amplitude <= 1.0) {
            return Err(Error::Domain(format!("amplitude must be in (0, 1], got {amplitude}")));
        }
        Ok(Self { range, radial_velocity, amplitude })
    }

    pub fn stationary(range: f64, amplitude: f64) -> Result<Self> {
        Self::new(range, 0.0, amplitude)
    }

    pub fn validate(&self, config: &RadarConfig) -> Result<()> {
        let max = config.max_range();
        if !(self.range > 0.0 && self.range <= max) {
            return Err(Error::Domain(format!(
                "target range {} m outside unambiguous range (0, {max:.2}] m",
                self.range
            )));
        }
        let vmax = config.velocity_max();
        if self.radial_velocity.abs() > vmax + 1e-12 {
            return Err(Error::Domain(format!(
                "radial velocity {} m/s exceeds ±{vmax:.3} m/s",
                self.radial_velocity
            )));
        }
        Ok(())
    }
}

fn synthesize(
    config: &RadarConfig,
    targets: &[Target],
    noise_std: f64,
    seed: u64,
    chirps: usize,
) -> Result<Vec<Signal>> {
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::Domain(format!("noise_std must be finite and non-negative, got {noise_std}")));
    }
    for t in targets {
        t.validate(config)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = targets.iter().map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let noise = Normal::new(0.0, noise_std).map_err(|e| Error::Domain(e.to_string()))?;
    let n = config.samples_per_chirp;
    let dt = 1.0 / config.sampling_frequency;
    let lambda = config.wavelength();

    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(chirps);
    for m in 0..chirps {
        let mut chirp = vec![0.0; n];
        for (target, phase0) in targets.iter().zip(&phases) {
            let f = config.beat_frequency(target.range);
            let phase = phase0 + 4.0 * PI * target.radial_velocity * config.chirp_time * m as f64 / lambda;
            for (i, s) in chirp.iter_mut().enumerate() {
                *s += target.amplitude * (2.0 * PI * f * i as f64 * dt + phase).cos();
            }
        }
        if noise_std > 0.0 {
            for s in chirp.iter_mut() {
                *s += noise.sample(&mut rng);
            }
        }
        frame.push(chirp);
    }

    // One common gain for the whole frame keeps Doppler phases intact.
    let peak = frame.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    frame
        .into_iter()
        .map(|c| Signal::from_real(&c.iter().map(|v| v * gain).collect::<Vec<_>>(), config.sampling_frequency))
        .collect()
}

/// One chirp's beat signal, scaled so that the largest sample magnitude is 1.
pub fn synthesize_chirp(config: &RadarConfig, targets: &[Target], noise_std: f64, seed: u64) -> Result<Signal> {
    Ok(synthesize(config, targets, noise_std, seed, 1)?.remove(0))
}

/// A full frame of `chirps_per_frame` chirps sharing one gain.
pub fn synthesize_frame(config: &RadarConfig, targets: &[Target], noise_std: f64, seed: u64) -> Result<Vec<Signal>> {
    synthesize(config, targets, noise_std, seed, config.chirps_per_frame)
}

/// The static evaluation scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Strong reflection close by plus a weak one far away.
    S1,
    /// A single weak reflection far away.
    S2,
    /// Two reflections 0.3 m apart.
    S3,
    /// Five reflections of mixed strength.
    S4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4];

    pub fn targets(self) -> Vec<Target> {
        let specs: &[(f64, f64)] = match self {
            Scenario::S1 => &[(5.0, 1.0), (45.0, 0.05)],
            Scenario::S2 => &[(45.0, 0.05)],
            Scenario::S3 => &[(20.0, 0.5), (20.3, 0.5)],
            Scenario::S4 => &[(5.0, 1.0), (12.5, 0.3), (23.0, 0.6), (34.5, 0.1), (50.0, 0.05)],
        };
        specs.iter().map(|&(r, a)| Target { range: r, radial_velocity: 0.0, amplitude: a }).collect()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
            Scenario::S4 => "S4",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scenario::S1),
            "S2" => Ok(Scenario::S2),
            "S3" => Ok(Scenario::S3),
            "S4" => Ok(Scenario::S4),
            other => Err(Error::Usage(format!("unknown scenario {other:?} (expected S1|S2|S3|S4)"))),
        }
    }
}

/// Targets of a named scene, checked against `config`.
pub fn scenario(name: &str, config: &RadarConfig) -> Result<Vec<Target>> {
    let targets = name.parse::<Scenario>()?.targets();
    for t in &targets {
        t.validate(config)?;
    }
    Ok(targets)
}

/// On-disk sample layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalFormat {
    /// One `re,im` pair per LF-terminated line.
    Csv,
    /// Little-endian f32, interleaved re/im.
    F32Binary,
}

impl FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SignalFormat::Csv),
            "f32" | "bin" | "f32-binary" => Ok(SignalFormat::F32Binary),
            other => Err(Error::Usage(format!("unknown signal format {other:?}"))),
        }
    }
}

impl SignalFormat {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("f32") => SignalFormat::F32Binary,
            _ => SignalFormat::Csv,
        }
    }
}

pub fn save_signal(signal: &Signal, path: &Path, format: SignalFormat) -> Result<()> {
    match format {
        SignalFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(path)?;
            for s in signal.samples() {
                w.write_record([s.re.to_string(), s.im.to_string()])?;
            }
            w.flush()?;
        }
        SignalFormat::F32Binary => {
            let mut w = BufWriter::new(File::create(path)?);
            for s in signal.samples() {
                w.write_all(&(s.re as f32).to_le_bytes())?;
                w.write_all(&(s.im as f32).to_le_bytes())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn load_signal(path: &Path, format: SignalFormat, sample_rate: f64) -> Result<Signal> {
    let samples = match format {
        SignalFormat::Csv => parse_csv(File::open(path)?)?,
        SignalFormat::F32Binary => {
            let mut bytes = Vec::new();
            BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
            if bytes.is_empty() || bytes.len() % 8 != 0 {
                return Err(Error::Format(format!(
                    "binary length {} is not a positive multiple of 8 bytes",
                    bytes.len()
                )));
            }
            bytes
                .chunks_exact(8)
                .map(|c| {
                    let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                    let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                    Complex64::new(re as f64, im as f64)
                })
                .collect()
        }
    };
    Signal::new(samples, sample_rate)
}

/// Parses `re,im` lines.
pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<Complex64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected `re,im`, found {} field(s)", record.len()) });
        }
        let field = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, msg: format!("{:?}: {e}", &record[i]) })
        };
        out.push(Complex64::new(field(0)?, field(1)?));
    }
    Ok(out)
}
