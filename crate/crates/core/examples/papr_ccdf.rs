//! Paired PAPR statistics: the same symbols sent with and without pre-equalization.

use mixnum::experiment::{papr_samples, papr_thresholds};
use mixnum::metrics::ccdf;
use mixnum::{ExperimentSpec, Session};

fn main() -> mixnum::Result<()> {
    let session = Session::new(ExperimentSpec::nr_reference(), None)?;
    let samples = papr_samples(&session, 5_000)?;
    let thresholds = papr_thresholds();
    let pre = ccdf(&samples.preeq_db, &thresholds)?;
    let plain = ccdf(&samples.plain_db, &thresholds)?;
    println!("{:>8} {:>10} {:>10}", "PAPR dB", "pre-eq", "plain");
    for (i, t) in thresholds.iter().enumerate().filter(|(i, _)| i % 10 == 0 && *i >= 50) {
        println!("{t:>8.1} {:>10.4} {:>10.4}", pre.ccdf[i], plain.ccdf[i]);
    }
    for p in [1e-1, 1e-2] {
        let (a, b) = samples.levels_at(p)?;
        println!("CCDF {p:e}: pre-eq {a:.2} dB, plain {b:.2} dB, delta {:+.2} dB", a - b);
    }
    Ok(())
}
