//! Pre-inverting the coupling at the transmitter removes it at both receivers.

use mixnum::metrics::evm_db;
use mixnum::{residual_ini, IniModel, MixedConfig, Purpose, QamOrder, RngStream, SymbolGrid};
use num_complex::Complex64;

fn main() -> mixnum::Result<()> {
    let cfg = MixedConfig::nr_reference();
    let model = IniModel::assemble(&cfg)?;
    println!("{:>5} {:>12} {:>12} {:>12}", "frame", "EVM plain", "EVM pre-eq", "max |r|");
    for frame in 0..5 {
        let mut rng = RngStream::new(42, 0, frame, Purpose::Bits);
        let (x, _) = SymbolGrid::random_qam(&cfg, QamOrder::QAM256, &mut rng);
        let xs = x.stacked();
        let plain = residual_ini(&x, &cfg, None)?;
        let pre = residual_ini(&x, &cfg, Some(&model))?;
        let received = |r: &[Complex64]| -> Vec<Complex64> { xs.iter().zip(r).map(|(a, b)| a + b).collect() };
        println!(
            "{frame:>5} {:>9.2} dB {:>9.1} dB {:>12.2e}",
            evm_db(&received(&plain), &xs)?,
            evm_db(&received(&pre), &xs)?,
            pre.iter().map(|z| z.norm()).fold(0.0, f64::max)
        );
    }
    Ok(())
}
