//! Experiment runner behind the `sft` binary.
//!
//! Every flag can also come from a JSON file passed with `--config`; a
//! flag given on the command line wins over the file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::costmodel::{compare_accelerators, estimate, write_cost_csv, Accelerator, HardwareProfile};
use crate::encoding::EncoderConfig;
use crate::error::{Error, Result};
use crate::evaluate::{
    evaluate_signal, oracle_range_doppler, range_doppler, sweep_steps, write_json, write_map_csv, write_spectrum_csv,
    write_sweep_csv, EvalOptions,
};
use crate::network::{build_any, NetworkKind, RunMode};
use crate::signal::{
    load_signal, save_signal, scenario, synthesize_chirp, synthesize_frame, RadarConfig, Signal, SignalFormat, Target,
    DEFAULT_NOISE_STD,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SFT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sft", version, about = "Time-coded spiking Fourier transform experiments")]
pub struct Cli {
    /// JSON file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a chirp (or a whole frame) of a radar scene.
    Synth(Flags),
    /// Run a spiking transform on a chirp and compare with the exact DFT.
    Run(Flags),
    /// Sweep steps per stage and transform sizes.
    Sweep(Flags),
    /// Estimate energy, latency and power on neuromorphic hardware.
    Cost(Flags),
    /// Build a range-Doppler map of a moving target.
    Rdmap(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Cost(_) => "cost",
            Command::Rdmap(_) => "rdmap",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Synth(f) | Command::Run(f) | Command::Sweep(f) | Command::Cost(f) | Command::Rdmap(f) => f,
        }
    }
}

/// Flags shared by all subcommands; each uses the ones it needs.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// sdft or sfft.
    #[arg(long)]
    pub arch: Option<String>,
    /// Transform size, or a comma-separated list for `sweep`.
    #[arg(long)]
    pub n: Option<String>,
    /// Steps per stage n_T, or a comma-separated list for `sweep`.
    #[arg(long)]
    pub steps: Option<String>,
    /// S1..S4, or `dynamic` for a single moving target.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Apply fixed-point hardware constraints.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantized: Option<bool>,
    /// Use real-valued spike times instead of integer steps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuous: Option<bool>,
    /// Write a whole frame of chirps instead of one.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Target range of the dynamic scene (m).
    #[arg(long)]
    pub range: Option<f64>,
    /// Radial velocity of the dynamic scene (m/s).
    #[arg(long)]
    pub velocity: Option<f64>,
    /// Chirps per frame for `synth --frame` and `rdmap`.
    #[arg(long)]
    pub chirps: Option<usize>,
    /// csv or f32.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Hardware profile name for `cost`.
    #[arg(long)]
    pub profile: Option<String>,
    /// Override the per-spike energy of the profile (pJ).
    #[arg(long)]
    pub spike_energy_pj: Option<f64>,
    /// Print JSON instead of a table.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<bool>,
}

macro_rules! merge_fields {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Flags { $($f: $a.$f.clone().or_else(|| $b.$f.clone())),* }
    };
}

impl Flags {
    /// Fields set here win; the rest come from `base`.
    pub fn over(&self, base: &Flags) -> Flags {
        merge_fields!(
            self, base, arch, n, steps, scenario, quantized, continuous, frame, seed, noise, range, velocity, chirps,
            format, input, out, report, profile, spike_energy_pj, json
        )
    }
}

/// Fully merged settings of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub out_dir: Option<PathBuf>,
    pub flags: Flags,
}

impl PartialEq for Flags {
    fn eq(&self, other: &Self) -> bool {
        serde_json::to_value(self).ok() == serde_json::to_value(other).ok()
    }
}

impl RunConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn arch(&self) -> Result<NetworkKind> {
        self.flags.arch.as_deref().unwrap_or("sfft").parse()
    }

    fn list<T: std::str::FromStr>(value: Option<&str>, default: &str, what: &str) -> Result<Vec<T>> {
        value
            .unwrap_or(default)
            .split(',')
            .map(|s| s.trim().parse::<T>().map_err(|_| Error::Usage(format!("invalid {what} '{s}'"))))
            .collect()
    }

    fn single<T: std::str::FromStr + Copy>(value: Option<&str>, default: &str, what: &str) -> Result<T> {
        match Self::list::<T>(value, default, what)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Usage(format!("expected a single {what}"))),
        }
    }

    fn n(&self, default: &str) -> Result<usize> {
        Self::single(self.flags.n.as_deref(), default, "size")
    }

    fn steps(&self, default: &str) -> Result<u32> {
        let s = Self::single(self.flags.steps.as_deref(), default, "step count")?;
        check_steps(s)?;
        Ok(s)
    }

    fn mode(&self) -> RunMode {
        if self.flags.continuous.unwrap_or(false) {
            RunMode::Continuous
        } else {
            RunMode::Stepped
        }
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            mode: self.mode(),
            quantized: self.flags.quantized.unwrap_or(false),
            seed: self.flags.seed.unwrap_or(7),
            noise_std: self.flags.noise.unwrap_or(DEFAULT_NOISE_STD),
        }
    }

    fn output(&self, default_name: &str) -> PathBuf {
        match (&self.flags.out, &self.out_dir) {
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => dir.join(default_name),
            (None, None) => PathBuf::from(default_name),
        }
    }

    fn format_for(&self, path: &Path) -> Result<SignalFormat> {
        match &self.flags.format {
            Some(f) => f.parse(),
            None => Ok(SignalFormat::from_path(path)),
        }
    }

    fn targets(&self, config: &RadarConfig) -> Result<Vec<Target>> {
        let name = self.flags.scenario.as_deref().unwrap_or("S1");
        if name.eq_ignore_ascii_case("dynamic") {
            let t = Target::new(self.flags.range.unwrap_or(10.0), self.flags.velocity.unwrap_or(1.0), 1.0)?;
            t.validate(config)?;
            Ok(vec![t])
        } else {
            scenario(name, config)
        }
    }
}

fn check_steps(s: u32) -> Result<()> {
    if s < 2 {
        return Err(Error::Usage(format!("steps per stage must be at least 2, got {s}")));
    }
    Ok(())
}

fn radar(n: usize, chirps: Option<usize>) -> Result<RadarConfig> {
    let mut c = RadarConfig::automotive().with_samples(n).map_err(|e| Error::Usage(e.to_string()))?;
    if let Some(m) = chirps {
        c = c.with_chirps(m)?;
    }
    Ok(c)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Merges flags with an optional JSON file into one configuration.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<Flags>(&text).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?
        }
        None => Flags::default(),
    };
    Ok(RunConfig { command: cli.command.name().into(), out_dir: cli.out_dir.clone(), flags: cli.command.flags().over(&file) })
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, S, W>(args: I, out: &mut W) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    execute(&resolve(&cli)?, out)
}

pub fn execute<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    match cfg.command.as_str() {
        "synth" => cmd_synth(cfg, out),
        "run" => cmd_run(cfg, out),
        "sweep" => cmd_sweep(cfg, out),
        "cost" => cmd_cost(cfg, out),
        "rdmap" => cmd_rdmap(cfg, out),
        other => Err(Error::Usage(format!("unknown command '{other}'"))),
    }
}

pub fn cmd_synth<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let n = cfg.n("1024")?;
    let frame = cfg.flags.frame.unwrap_or(false);
    let config = radar(n, cfg.flags.chirps)?;
    let targets = cfg.targets(&config)?;
    let seed = cfg.flags.seed.unwrap_or(7);
    let noise = cfg.flags.noise.unwrap_or(DEFAULT_NOISE_STD);
    let path = cfg.output(if frame { "frame.csv" } else { "chirp.csv" });
    let format = cfg.format_for(&path)?;

    writeln!(out, "{:>10} {:>12} {:>10} {:>8}", "range_m", "velocity_ms", "amplitude", "bin")?;
    for t in &targets {
        writeln!(
            out,
            "{:>10.3} {:>12.3} {:>10.3} {:>8.1}",
            t.range,
            t.radial_velocity,
            t.amplitude,
            t.range / config.range_resolution()
        )?;
    }
    let signal = if frame {
        // chirps are stored back to back
        let chirps = synthesize_frame(&config, &targets, noise, seed)?;
        let samples = chirps.into_iter().flat_map(Signal::into_samples).collect();
        Signal::new(samples, config.sampling_frequency)?
    } else {
        synthesize_chirp(&config, &targets, noise, seed)?
    };
    save_signal(&signal, &path, format)?;
    writeln!(out, "wrote {} samples to {}", signal.len(), path.display())?;
    Ok(())
}

pub fn cmd_run<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let kind = cfg.arch()?;
    let n = cfg.n("1024")?;
    let steps = cfg.steps("257")?;
    let opts = cfg.eval_options();
    let signal = match &cfg.flags.input {
        Some(path) => load_signal(path, cfg.format_for(path)?, RadarConfig::automotive().sampling_frequency)?,
        None => {
            let config = radar(n, None)?;
            synthesize_chirp(&config, &cfg.targets(&config)?, opts.noise_std, opts.seed)?
        }
    };
    if signal.len() != n {
        return Err(Error::Usage(format!("input has {} samples but --n is {n}", signal.len())));
    }
    let enc = EncoderConfig::new(1.0, steps)?;
    let plan = kind.build(n, &enc)?;
    let label = cfg.flags.scenario.clone().unwrap_or_else(|| "input".into());
    let (report, oracle, snn) = evaluate_signal(&plan, &signal, &label, &opts)?;

    let path = cfg.output("spectrum.csv");
    write_spectrum_csv(&oracle, &snn, signal.is_real(), create(&path)?)?;
    if let Some(r) = &cfg.flags.report {
        write_json(&report, r)?;
    }
    writeln!(
        out,
        "{kind} n={n} steps={steps} mode={:?} quantized={} rmse={:.6} peak oracle={} snn={} -> {}",
        opts.mode,
        opts.quantized,
        report.rmse,
        report.argmax_oracle,
        report.argmax_snn,
        path.display()
    )?;
    Ok(())
}

pub fn cmd_sweep<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let kind = cfg.arch()?;
    let sizes: Vec<usize> = RunConfig::list(cfg.flags.n.as_deref(), "64,256,1024", "size")?;
    let steps: Vec<u32> = RunConfig::list(cfg.flags.steps.as_deref(), "65,129,257,513", "step count")?;
    for &s in &steps {
        check_steps(s)?;
    }
    let builder = move |n: usize, c: &EncoderConfig| kind.build(n, c);
    let table = sweep_steps(&builder, &steps, &sizes, &cfg.eval_options())?;
    let path = cfg.output("sweep.csv");
    write_sweep_csv(&table, create(&path)?)?;
    for row in &table.rows {
        writeln!(out, "n={:<5} steps={:<4} rmse={:.6}", row.n, row.steps_per_stage, row.rmse)?;
    }
    writeln!(
        out,
        "error fell on {}/{} step increases ({:.0}%) -> {}",
        table.improved,
        table.pairs,
        100.0 * table.monotone_fraction(),
        path.display()
    )?;
    Ok(())
}

pub fn cmd_cost<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let kind = cfg.arch()?;
    let n = cfg.n("1024")?;
    let steps = cost_steps(cfg)?;
    let mut profile = HardwareProfile::named(cfg.flags.profile.as_deref().unwrap_or("loihi"))?;
    if let Some(pj) = cfg.flags.spike_energy_pj {
        profile.energy_per_spike_pj = pj;
    }
    let report = estimate(kind, n, steps, &profile)?;
    let ratios = compare_accelerators(&report, &Accelerator::published());
    if cfg.flags.json.unwrap_or(false) {
        let v = serde_json::json!({ "report": report, "accelerators": ratios });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "{report}")?;
        for r in &ratios {
            writeln!(out, "vs {:<15} energy x{:<8.1} time x{:.1}", r.accelerator, r.energy_ratio, r.time_ratio)?;
        }
    }
    if let Some(path) = &cfg.flags.out {
        write_cost_csv(std::slice::from_ref(&report), create(path)?)?;
    }
    Ok(())
}

// cost estimates are valid for any positive step count, unlike simulations
fn cost_steps(cfg: &RunConfig) -> Result<u32> {
    let s: u32 = RunConfig::single(cfg.flags.steps.as_deref(), "75", "step count")?;
    if s == 0 {
        return Err(Error::Usage("steps per stage must be at least 1".into()));
    }
    Ok(s)
}

pub fn cmd_rdmap<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let n = cfg.n("1024")?;
    let steps = cfg.steps("257")?;
    let opts = cfg.eval_options();
    let config = radar(n, cfg.flags.chirps)?;
    let frame = match &cfg.flags.input {
        Some(path) => {
            let all = load_signal(path, cfg.format_for(path)?, config.sampling_frequency)?;
            if all.len() % n != 0 {
                return Err(Error::Usage(format!("frame of {} samples is not a whole number of {n}-sample chirps", all.len())));
            }
            all.samples()
                .chunks(n)
                .map(|c| Signal::new(c.to_vec(), config.sampling_frequency))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let mut c = cfg.clone();
            c.flags.scenario.get_or_insert_with(|| "dynamic".into());
            synthesize_frame(&config, &c.targets(&config)?, opts.noise_std, opts.seed)?
        }
    };
    let enc = EncoderConfig::new(1.0, steps)?;
    let map = range_doppler(&frame, &build_any, &enc, opts.mode)?;
    let oracle = oracle_range_doppler(&frame)?;
    let path = cfg.output("rdmap.csv");
    write_map_csv(&map, create(&path)?)?;
    if let Some(r) = &cfg.flags.report {
        write_json(&map, r)?;
    }
    let show = |m: &crate::evaluate::RangeDopplerMap| {
        let d = m.signed_doppler(m.peak.1);
        format!(
            "range bin {} ({:.2} m), doppler bin {d} ({:.3} m/s)",
            m.peak.0,
            m.peak.0 as f64 * config.range_resolution(),
            d as f64 * config.velocity_resolution()
        )
    };
    writeln!(out, "spiking peak: {}", show(&map))?;
    writeln!(out, "oracle  peak: {}", show(&oracle))?;
    writeln!(out, "wrote {}x{} map to {}", map.range_bins, map.doppler_bins, path.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
        resolve(&cli)
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = parse(&["sft", "run", "--arch", "sfft", "--n", "256", "--quantized", "--seed", "3"]).unwrap();
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.flags.quantized, Some(true));
    }

    #[test]
    fn flag_wins_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": "64", "steps": "129", "arch": "sdft"}"#).unwrap();
        let cfg = parse(&["sft", "--config", path.to_str().unwrap(), "run", "--n", "16"]).unwrap();
        assert_eq!(cfg.flags.n.as_deref(), Some("16"));
        assert_eq!(cfg.flags.steps.as_deref(), Some("129"));
        assert_eq!(cfg.arch().unwrap(), NetworkKind::Sdft);
    }

    #[test]
    fn one_step_is_rejected() {
        let mut sink = Vec::new();
        let r = run_cli(["sft", "run", "--n", "16", "--steps", "1"], &mut sink);
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn unknown_scenario_is_usage_error() {
        let mut sink = Vec::new();
        let r = run_cli(["sft", "synth", "--scenario", "S9", "--out", "/nonexistent/x.csv"], &mut sink);
        assert!(matches!(r, Err(Error::Usage(_))));
    }
}
