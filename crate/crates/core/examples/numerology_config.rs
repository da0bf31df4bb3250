//! Derived frame parameters of a mixed-numerology configuration.
//!
//! Run with `cargo run --example numerology_config [settings.json]`.

use mixnum::config::{scs_hz, FrameSettings};
use mixnum::MixedConfig;

fn main() -> mixnum::Result<()> {
    let (cfg, order) = match std::env::args().nth(1) {
        Some(path) => FrameSettings::from_json(&std::fs::read_to_string(path)?)?.resolve()?,
        None => (MixedConfig::nr_reference(), mixnum::QamOrder::QAM256),
    };
    println!("spacings      {} kHz / {} kHz", scs_hz(cfg.mu_low()) / 1e3, scs_hz(cfg.mu_high()) / 1e3);
    println!("transforms    N = {}, M = {}, Q = {}", cfg.n_fft(), cfg.m_fft(), cfg.q_ratio());
    println!("prefixes      N_cp = {}, M_cp = {}", cfg.n_cp(), cfg.m_cp());
    println!("frame         {} samples at {} MHz", cfg.frame_len(), cfg.sample_rate_hz() / 1e6);
    println!(
        "edge bins     low {}..={}, high {}..={} in each of {} slots",
        cfg.low_bin(0),
        cfg.low_bin(cfg.p_edge() - 1),
        cfg.high_bin(0),
        cfg.high_bin(cfg.k_edge() - 1),
        cfg.q_ratio()
    );
    for q in 0..cfg.q_ratio() {
        println!("slot {q}        starts at {}, DFT window at {}", cfg.slot_start(q), cfg.high_window_start(q));
    }
    println!("coupling size {0} x {0}, {1}-QAM", cfg.stacked_len(), order.order());

    match MixedConfig::new(0, 1, 256, 17, 96, 48) {
        Err(e) => println!("odd low prefix rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
