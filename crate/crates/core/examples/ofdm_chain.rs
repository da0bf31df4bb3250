//! One composite frame through the transmit and receive chain, showing the
//! interference each numerology picks up from the other.

use mixnum::ofdm::{build_frame, demod_active, Stream};
use mixnum::{MixedConfig, Purpose, QamOrder, RngStream, SymbolGrid};

fn main() -> mixnum::Result<()> {
    let cfg = MixedConfig::nr_reference();
    let mut rng = RngStream::new(1, 0, 0, Purpose::Bits);
    let (x, bits) = SymbolGrid::random_qam(&cfg, QamOrder::QAM64, &mut rng);
    let frame = build_frame(&x, &cfg, None)?;
    println!("{} symbols ({} bits) -> {} samples, energy {:.4}", x.len(), bits.len(), frame.len(), frame.energy());

    let rx = demod_active(&frame, &cfg)?;
    let tx = x.stacked();
    for stream in Stream::all(&cfg) {
        let range = stream.offset(&cfg)..stream.offset(&cfg) + stream.width(&cfg);
        let worst = range.clone().map(|i| (rx[i] - tx[i]).norm()).fold(0.0, f64::max);
        let power = range.clone().map(|i| (rx[i] - tx[i]).norm_sqr()).sum::<f64>() / range.len() as f64;
        println!("{stream:<8} max |INI| {worst:.4}, mean INI power {:.2} dB", 10.0 * power.log10());
    }
    Ok(())
}
