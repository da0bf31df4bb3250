//! The coupling matrix: closed form against the chain oracle, and its
//! strongest entries.

use mixnum::ini::{w_block_closed_form, w_block_oracle};
use mixnum::ofdm::Stream;
use mixnum::{IniModel, MixedConfig};

fn main() -> mixnum::Result<()> {
    let cfg = MixedConfig::nr_reference();
    for q in 0..cfg.q_ratio() {
        for (victim, interferer) in [(Stream::High(q), Stream::Low), (Stream::Low, Stream::High(q))] {
            let closed = w_block_closed_form(victim, interferer, &cfg)?;
            let oracle = w_block_oracle(victim, interferer, &cfg)?;
            let (r, c) = closed.matrix.map(|z| z.norm()).iamax_full();
            println!(
                "{victim} <- {interferer}: {}x{}, largest |w| {:.4} at ({r}, {c}), |closed - oracle| {:.1e}",
                closed.matrix.nrows(),
                closed.matrix.ncols(),
                closed.matrix[(r, c)].norm(),
                closed.max_abs_diff(&oracle)
            );
        }
    }
    let model = IniModel::assemble(&cfg)?;
    println!("assembled {}x{}, condition {:.3}, |W W^-1 - I| {:.1e}", model.matrix().nrows(), model.matrix().ncols(), model.condition(), model.inversion_residual());
    Ok(())
}
