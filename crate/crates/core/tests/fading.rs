use mixnum::channel::{one_tap_equalize, rayleigh_block};
use mixnum::ofdm::{build_frame, demod_active};
use mixnum::{IniModel, MixedConfig, Purpose, QamOrder, RngStream, SymbolGrid};

#[test]
fn flat_fade_commutes_with_demodulation() {
    let cfg = MixedConfig::nr_reference();
    for frame in 0..50 {
        let mut rng = RngStream::new(3, 0, frame, Purpose::Bits);
        let (x, _) = SymbolGrid::random_qam(&cfg, QamOrder::QAM64, &mut rng);
        let tx = build_frame(&x, &cfg, None).unwrap();
        let (faded, fade) = rayleigh_block(&tx, &mut RngStream::new(3, 0, frame, Purpose::Fade));
        let lhs = demod_active(&faded, &cfg).unwrap();
        let rhs = demod_active(&tx, &cfg).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - fade.gain * b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }
}

#[test]
fn pre_equalization_survives_flat_fading() {
    let cfg = MixedConfig::nr_reference();
    let model = IniModel::assemble(&cfg).unwrap();
    let mut worst = 0.0f64;
    for frame in 0..50 {
        let mut rng = RngStream::new(4, 0, frame, Purpose::Bits);
        let (x, _) = SymbolGrid::random_qam(&cfg, QamOrder::QAM256, &mut rng);
        let tx = build_frame(&x, &cfg, Some(&model)).unwrap();
        let (faded, fade) = rayleigh_block(&tx, &mut RngStream::new(4, 0, frame, Purpose::Fade));
        let rx = one_tap_equalize(&demod_active(&faded, &cfg).unwrap(), fade).unwrap();
        for (a, b) in rx.iter().zip(x.stacked()) {
            worst = worst.max((a - b).norm());
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}
