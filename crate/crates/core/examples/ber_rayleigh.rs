//! BER over block Rayleigh fading with and without pre-equalization, against
//! the closed-form curve. A short sweep; `mixnum ber` runs the full one.

use mixnum::experiment::run_ber_sweep;
use mixnum::{theoretical_ber, ExperimentSpec, QamOrder, Session};

fn main() -> mixnum::Result<()> {
    let spec = ExperimentSpec {
        qam_order: 64,
        ebn0_db: vec![10.0, 20.0, 30.0, 40.0],
        min_bits: 200_000,
        bit_budget: 2_000_000,
        ..ExperimentSpec::nr_reference()
    };
    let channel = spec.channel;
    let session = Session::new(spec, None)?;
    println!("{:<10} {:<4} {:>6} {:>11} {:>11}", "arm", "num", "Eb/N0", "BER", "theory");
    run_ber_sweep(&session, &[true, false], |row| {
        let theory = theoretical_ber(QamOrder::QAM64, row.ebn0_db, channel);
        println!("{:<10} {:<4} {:>6.1} {:>11.3e} {:>11.3e}", row.experiment, row.numerology, row.ebn0_db, row.ber, theory);
        Ok(())
    })?;
    Ok(())
}
