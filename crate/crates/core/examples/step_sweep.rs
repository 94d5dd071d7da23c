//! Error against steps per stage for both architectures.

use spiking_ft::encoding::EncoderConfig;
use spiking_ft::evaluate::{sweep_steps, EvalOptions};
use spiking_ft::network::NetworkKind;

fn main() -> spiking_ft::Result<()> {
    let steps = [17, 33, 65, 129];
    for kind in [NetworkKind::Sdft, NetworkKind::Sfft] {
        let build = move |n: usize, c: &EncoderConfig| kind.build(n, c);
        let table = sweep_steps(&build, &steps, &[16, 64], &EvalOptions::default())?;
        println!("{kind}");
        for r in &table.rows {
            println!("  n={:<3} steps={:<4} rmse {:.4}", r.n, r.steps_per_stage, r.rmse);
        }
        println!("  improved on {}/{} step increases", table.improved, table.pairs);
    }
    Ok(())
}
