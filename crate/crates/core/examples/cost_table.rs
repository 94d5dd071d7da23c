//! Energy, latency and power per frame on several neuromorphic chips.

use spiking_ft::costmodel::{compare_accelerators, estimate, Accelerator, HardwareProfile};
use spiking_ft::network::NetworkKind;

fn main() -> spiking_ft::Result<()> {
    let mut profiles = vec![HardwareProfile::loihi()];
    profiles.extend(HardwareProfile::alternatives());
    println!("{:<10} {:<5} {:>10} {:>10} {:>10} {:>10}", "chip", "arch", "E (uJ)", "T_f (us)", "tau_f (us)", "P (mW)");
    for p in &profiles {
        for kind in [NetworkKind::Sdft, NetworkKind::Sfft] {
            let r = estimate(kind, 1024, 75, p)?;
            println!(
                "{:<10} {:<5} {:>10.2} {:>10.2} {:>10.2} {:>10.1}",
                p.name, kind, r.energy_uj, r.frame_period_us, r.latency_us, r.power_mw
            );
        }
    }

    let r = estimate(NetworkKind::Sfft, 1024, 75, &HardwareProfile::loihi())?;
    println!("\nS-FFT on the default chip against fixed-function accelerators:");
    for c in compare_accelerators(&r, &Accelerator::published()) {
        println!("  {:<15} energy x{:<7.1} time x{:.1}", c.accelerator, c.energy_ratio, c.time_ratio);
    }
    Ok(())
}
