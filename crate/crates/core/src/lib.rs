//! Time-coded spiking Fourier transform.
//!
//! Every real value travels through the network as a single spike whose
//! latency encodes it. Neurons integrate their inputs during a *silent*
//! stage and convert the accumulated membrane voltage back into one spike
//! during a *spiking* stage driven by a constant current. Chaining layers
//! gives either a dense one-layer S-DFT or a sparse radix-4 S-FFT with
//! `log4(n)` layers.
//!
//! Module map:
//!
//! - [`signal`]: FMCW beat-signal synthesis, test scenes, sample file IO
//! - [`encoding`]: time-to-first-spike encode / decode
//! - [`neuron`]: two-stage membrane dynamics, threshold and bias rules
//! - [`network`]: S-DFT / S-FFT construction, execution and scheduling
//! - [`quantize`]: mantissa/exponent weights and integer voltage domain
//! - [`oracle`]: exact O(N²) DFT, radix-4 FFT, dense products
//! - [`evaluate`]: normalization, RMSE, step sweeps, range-Doppler maps
//! - [`costmodel`]: spike-op, energy, latency and power estimates
//! - [`cli`]: experiment runner behind the `sft` binary
//!
//! ```
//! use spiking_ft::encoding::EncoderConfig;
//! use spiking_ft::network::{build_sfft, run_plan, RunMode};
//! use spiking_ft::signal::Signal;
//!
//! let cfg = EncoderConfig::new(1.0, 257).unwrap();
//! let plan = build_sfft(16, &cfg).unwrap();
//! let x = Signal::from_real(&[0.5; 16], 1.0).unwrap();
//! let out = run_plan(&plan, &x, RunMode::Continuous, &cfg).unwrap();
//! assert!((out.spectrum[0].re - 8.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod costmodel;
pub mod encoding;
pub mod error;
pub mod evaluate;
pub mod network;
pub mod neuron;
pub mod oracle;
pub mod quantize;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
