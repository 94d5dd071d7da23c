//! Event-count cost model for neuromorphic execution.
//!
//! Energy counts every spike op and every neuron update. Time is taken
//! per core: work is spread evenly over the chip's cores, so one core
//! handles `1/cores` of the spike ops and of the neurons.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkKind;
use crate::oracle::is_power_of_four;

/// Per-event energy and time of a chip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub name: String,
    pub energy_per_spike_pj: f64,
    pub energy_per_neuron_step_pj: f64,
    pub time_per_spike_ns: f64,
    pub time_per_neuron_step_ns: f64,
    pub cores: u32,
}

impl Default for HardwareProfile {
    fn default() -> Self {
        Self::loihi()
    }
}

impl HardwareProfile {
    pub fn loihi() -> Self {
        Self {
            name: "loihi".into(),
            energy_per_spike_pj: 23.6,
            energy_per_neuron_step_pj: 52.0,
            time_per_spike_ns: 3.5,
            time_per_neuron_step_ns: 8.4,
            cores: 128,
        }
    }

    /// Loihi timing with another chip's energy per synaptic event.
    pub fn with_spike_energy(name: &str, pj: f64) -> Self {
        Self { name: name.into(), energy_per_spike_pj: pj, ..Self::loihi() }
    }

    /// Lower per-spike energies reported for other neuromorphic chips.
    pub fn alternatives() -> Vec<Self> {
        vec![
            Self::with_spike_energy("braindrop", 0.381),
            Self::with_spike_energy("cxquad", 0.134),
            Self::with_spike_energy("rolls", 0.077),
        ]
    }

    /// Looks up a profile by name.
    pub fn named(name: &str) -> Result<Self> {
        std::iter::once(Self::loihi())
            .chain(Self::alternatives())
            .find(|p| p.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Usage(format!("unknown hardware profile '{name}'")))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.energy_per_spike_pj,
            self.energy_per_neuron_step_pj,
            self.time_per_spike_ns,
            self.time_per_neuron_step_ns,
        ];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.cores == 0 {
            return Err(Error::Domain(format!("hardware profile '{}' has non-positive constants", self.name)));
        }
        Ok(())
    }
}

fn layers(kind: NetworkKind, n: usize) -> Result<u32> {
    match kind {
        NetworkKind::Sdft if n >= 1 => Ok(1),
        NetworkKind::Sfft if n >= 4 && is_power_of_four(n) => Ok(n.trailing_zeros() / 2),
        _ => Err(Error::Size(format!("{kind} does not support n = {n}"))),
    }
}

/// Synaptic events per frame: `n · 2n + 2n` dense, `8 · 2n · L + 2n` sparse.
pub fn spike_ops(kind: NetworkKind, n: usize) -> Result<u64> {
    let l = layers(kind, n)? as u64;
    let n = n as u64;
    Ok(match kind {
        NetworkKind::Sdft => n * 2 * n + 2 * n,
        NetworkKind::Sfft => 8 * 2 * n * l + 2 * n,
    })
}

/// Symbolic network parameters, with times in units of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkParameters {
    pub layers: u32,
    pub neurons: u64,
    pub spike_ops: u64,
    pub frame_period_stages: u32,
    pub latency_stages: u32,
}

pub fn network_parameters(kind: NetworkKind, n: usize) -> Result<NetworkParameters> {
    let l = layers(kind, n)?;
    Ok(NetworkParameters {
        layers: l,
        neurons: 2 * n as u64 * l as u64,
        spike_ops: spike_ops(kind, n)?,
        frame_period_stages: 2,
        latency_stages: l + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kind: NetworkKind,
    pub n: usize,
    pub steps_per_stage: u32,
    pub profile: String,
    pub n_neurons: u64,
    pub n_spike_ops: u64,
    /// Neuron updates charged per frame.
    pub neuron_steps: f64,
    pub spike_energy_uj: f64,
    pub neuron_energy_uj: f64,
    pub energy_uj: f64,
    /// `T_f`, time between accepted frames.
    pub frame_period_us: f64,
    /// `τ_f`, time for one frame to cross the network.
    pub latency_us: f64,
    pub power_mw: f64,
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "architecture       {}", self.kind)?;
        writeln!(f, "n / steps          {} / {}", self.n, self.steps_per_stage)?;
        writeln!(f, "neurons            {}", self.n_neurons)?;
        writeln!(f, "spike ops          {}", self.n_spike_ops)?;
        writeln!(f, "energy (uJ)        {:.2}", self.energy_uj)?;
        writeln!(f, "T_f (us)           {:.2}", self.frame_period_us)?;
        writeln!(f, "tau_f (us)         {:.2}", self.latency_us)?;
        write!(f, "power (mW)         {:.1}", self.power_mw)
    }
}

/// Energy, timing and power of one frame.
///
/// The sparse network keeps only `1/L` of its neurons busy per frame
/// once pipelined, so its neuron-update count is divided by `L`.
pub fn estimate(kind: NetworkKind, n: usize, steps_per_stage: u32, profile: &HardwareProfile) -> Result<CostReport> {
    if steps_per_stage == 0 {
        return Err(Error::Domain("steps_per_stage must be at least 1".into()));
    }
    profile.validate()?;
    let p = network_parameters(kind, n)?;
    let steps = steps_per_stage as f64;
    let neurons = p.neurons as f64;
    let l = p.layers as f64;

    let neuron_steps = match kind {
        NetworkKind::Sdft => 2.0 * steps * neurons,
        NetworkKind::Sfft => (l + 1.0) * steps * neurons / l,
    };
    let spike_energy_uj = p.spike_ops as f64 * profile.energy_per_spike_pj * 1e-6;
    let neuron_energy_uj = neuron_steps * profile.energy_per_neuron_step_pj * 1e-6;
    let energy_uj = spike_energy_uj + neuron_energy_uj;

    let cores = profile.cores as f64;
    let spike_time_us = p.spike_ops as f64 / cores * profile.time_per_spike_ns * 1e-3;
    let per_core = neurons / cores;
    let stage_time = |stages: f64| spike_time_us + stages * steps * per_core * profile.time_per_neuron_step_ns * 1e-3;
    let frame_period_us = stage_time(p.frame_period_stages as f64);
    let latency_us = stage_time(p.latency_stages as f64);

    Ok(CostReport {
        kind,
        n,
        steps_per_stage,
        profile: profile.name.clone(),
        n_neurons: p.neurons,
        n_spike_ops: p.spike_ops,
        neuron_steps,
        spike_energy_uj,
        neuron_energy_uj,
        energy_uj,
        frame_period_us,
        latency_us,
        power_mw: energy_uj / latency_us * 1e3,
    })
}

/// A published conventional FFT accelerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accelerator {
    pub name: String,
    pub energy_nj: f64,
    pub time_us: f64,
}

impl Accelerator {
    /// The three memory-based and matrix FFT chips used for comparison.
    pub fn published() -> Vec<Self> {
        [("dsp-memory", 484.0, 2.81), ("mimo-radar-dsp", 56.3, 8.8), ("lte-matrix", 126.0, 1.38)]
            .into_iter()
            .map(|(name, energy_nj, time_us)| Self { name: name.into(), energy_nj, time_us })
            .collect()
    }

    /// Treats a spiking cost report as a comparison baseline.
    pub fn from_report(r: &CostReport) -> Self {
        Self { name: format!("{}-{}", r.kind, r.n), energy_nj: r.energy_uj * 1e3, time_us: r.frame_period_us }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorRatio {
    pub accelerator: String,
    /// Spiking energy over accelerator energy.
    pub energy_ratio: f64,
    /// Spiking frame period over accelerator time.
    pub time_ratio: f64,
}

/// How many times more energy and time the spiking network spends per
/// frame. Time uses the frame period, the throughput-relevant figure.
pub fn compare_accelerators(report: &CostReport, accelerators: &[Accelerator]) -> Vec<AcceleratorRatio> {
    accelerators
        .iter()
        .map(|a| AcceleratorRatio {
            accelerator: a.name.clone(),
            energy_ratio: report.energy_uj * 1e3 / a.energy_nj,
            time_ratio: report.frame_period_us / a.time_us,
        })
        .collect()
}

pub fn write_cost_csv<W: Write>(reports: &[CostReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spike_op_counts() {
        assert_eq!(spike_ops(NetworkKind::Sdft, 1024).unwrap(), 2_099_200);
        assert_eq!(spike_ops(NetworkKind::Sfft, 1024).unwrap(), 83_968);
        assert_eq!(spike_ops(NetworkKind::Sfft, 4).unwrap(), 72);
        assert!(matches!(spike_ops(NetworkKind::Sfft, 512), Err(Error::Size(_))));
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(estimate(NetworkKind::Sdft, 1024, 0, &HardwareProfile::loihi()).is_err());
    }

    #[test]
    fn dense_power_is_consistent() {
        let r = estimate(NetworkKind::Sdft, 1024, 75, &HardwareProfile::loihi()).unwrap();
        assert_eq!(r.frame_period_us, r.latency_us);
        assert!((r.power_mw - r.energy_uj / r.frame_period_us * 1e3).abs() < 1e-9);
        assert_eq!(r.n_neurons, 2048);
    }

    #[test]
    fn self_comparison_is_unity() {
        let r = estimate(NetworkKind::Sfft, 256, 100, &HardwareProfile::loihi()).unwrap();
        let ratios = compare_accelerators(&r, &[Accelerator::from_report(&r)]);
        assert!((ratios[0].energy_ratio - 1.0).abs() < 1e-12);
        assert!((ratios[0].time_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profiles_by_name() {
        assert_eq!(HardwareProfile::named("ROLLS").unwrap().energy_per_spike_pj, 0.077);
        assert!(HardwareProfile::named("tpu").is_err());
    }

    proptest! {
        #[test]
        fn symbolic_rows_and_energy_split(d in 1u32..7, steps in 1u32..600) {
            let n = 4usize.pow(d);
            let s = network_parameters(NetworkKind::Sfft, n).unwrap();
            prop_assert_eq!(s.layers, d);
            prop_assert_eq!(s.neurons, 2 * n as u64 * d as u64);
            prop_assert_eq!(s.spike_ops, 16 * n as u64 * d as u64 + 2 * n as u64);
            prop_assert_eq!(s.latency_stages, d + 1);
            let dense = network_parameters(NetworkKind::Sdft, n).unwrap();
            prop_assert_eq!((dense.neurons, dense.frame_period_stages, dense.latency_stages), (2 * n as u64, 2, 2));
            for kind in [NetworkKind::Sdft, NetworkKind::Sfft] {
                let r = estimate(kind, n, steps, &HardwareProfile::loihi()).unwrap();
                prop_assert!((r.spike_energy_uj + r.neuron_energy_uj - r.energy_uj).abs() <= 1e-12 * r.energy_uj);
            }
        }
    }
}
