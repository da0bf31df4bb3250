//! Gray-mapped square QAM: labels, unit energy and hard decisions.

use mixnum::{qam_demodulate_hard, qam_modulate, Constellation, QamOrder};
use num_complex::Complex64;

fn main() -> mixnum::Result<()> {
    let qam16 = Constellation::new(QamOrder::QAM16);
    println!("16-QAM, label (I bits | Q bits) -> point");
    for label in 0..16 {
        let p = qam16.point(label);
        println!("  {:02b}|{:02b}  {:+.4} {:+.4}j", label >> 2, label & 3, p.re, p.im);
    }

    for order in [QamOrder::QPSK, QamOrder::QAM16, QamOrder::QAM64, QamOrder::QAM256] {
        let c = Constellation::new(order);
        let energy = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / f64::from(order.order());
        println!("{:>3}-QAM mean energy {energy:.12}", order.order());
    }

    let bits = [1, 0, 1, 1, 0, 0, 1, 0];
    let symbols = qam_modulate(&bits, QamOrder::QAM16)?;
    let noisy: Vec<Complex64> = symbols.iter().map(|s| s + Complex64::new(0.08, -0.05)).collect();
    assert_eq!(qam_demodulate_hard(&noisy, QamOrder::QAM16), bits);
    println!("bits {bits:?} survive a small offset");
    Ok(())
}
