//! BER, EVM, PAPR/CCDF measurement and the closed-form QAM BER references.
//!
//! # Theoretical BER
//!
//! For Gray-mapped square M-QAM with `L = sqrt(M)` levels per axis and
//! `g = Eb/N0`, the exact bit error probability in AWGN is
//!
//! ```text
//! Pb = 1/log2(L) * sum_{k=1}^{log2 L} Pb(k)
//! Pb(k) = 1/L * sum_{i=0}^{(1-2^-k) L - 1} (-1)^floor(i 2^(k-1) / L)
//!         * (2^(k-1) - floor(i 2^(k-1) / L + 1/2))
//!         * erfc((2i+1) sqrt(3 log2(M) g / (2 (M-1))))
//! ```
//!
//! (Cho and Yoon, IEEE Trans. Commun. 2002). Over flat Rayleigh fading with
//! average `g`, every `erfc(sqrt(a g))` term averages in closed form to
//! `1 - sqrt(a g / (1 + a g))`, giving the exact faded curve.
//!
//! # SNR accounting
//!
//! Synthesis scales by `1/size` and demodulation is unnormalized, so a unit
//! energy symbol comes back with gain 1 while time-domain noise of variance
//! `s2` per sample comes back with variance `size * s2`. Each numerology's
//! `Eb/N0` is defined at its own demodulator output.

use num_complex::Complex64;

use crate::channel::ChannelModel;
use crate::config::MixedConfig;
use crate::error::{Error, Result};
use crate::ofdm::{Stream, TimeFrame};
use crate::qam::QamOrder;

/// Fraction of differing bits.
pub fn ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::dim("received bits", tx_bits.len(), rx_bits.len()));
    }
    if tx_bits.is_empty() {
        return Err(Error::InvalidArgument("BER of an empty bit vector".into()));
    }
    let errors = tx_bits
        .iter()
        .zip(rx_bits)
        .filter(|(a, b)| (*a & 1) != (*b & 1))
        .count();
    Ok(errors as f64 / tx_bits.len() as f64)
}

/// RMS error vector magnitude in dB; `-inf` for an exact match.
pub fn evm_db(received: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if received.len() != reference.len() {
        return Err(Error::dim("received symbols", reference.len(), received.len()));
    }
    let ref_energy: f64 = reference.iter().map(Complex64::norm_sqr).sum();
    if ref_energy.is_nan() || ref_energy <= 0.0 {
        return Err(Error::InvalidArgument("EVM reference has zero energy".into()));
    }
    let err: f64 = received
        .iter()
        .zip(reference)
        .map(|(r, x)| (r - x).norm_sqr())
        .sum();
    if err == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (err / ref_energy).log10())
}

/// Peak-to-average power ratio over every sample of the frame, in dB.
pub fn papr_db(frame: &TimeFrame) -> Result<f64> {
    papr_db_samples(&frame.samples)
}

pub fn papr_db_samples(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("PAPR of an empty frame".into()));
    }
    let (peak, sum) = samples.iter().fold((0.0f64, 0.0f64), |(p, s), z| {
        let e = z.norm_sqr();
        (p.max(e), s + e)
    });
    if sum.is_nan() || sum <= 0.0 {
        return Err(Error::InvalidArgument("PAPR of an all-zero frame".into()));
    }
    Ok(10.0 * (peak * samples.len() as f64 / sum).log10())
}

/// Empirical complementary CDF sampled on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PaprCurve {
    pub thresholds_db: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub frames: usize,
}

/// `CCDF(t)` = fraction of `values` strictly greater than `t`.
pub fn ccdf(values: &[f64], thresholds_db: &[f64]) -> Result<PaprCurve> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("CCDF of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let ccdf = thresholds_db
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&v| v <= t);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect();
    Ok(PaprCurve {
        thresholds_db: thresholds_db.to_vec(),
        ccdf,
        frames: values.len(),
    })
}

/// Smallest sample value `t` such that at most `prob * n` values exceed it.
pub fn level_at_ccdf(values: &[f64], prob: f64) -> Result<f64> {
    if values.is_empty() || !(0.0..1.0).contains(&prob) {
        return Err(Error::InvalidArgument(format!(
            "need a nonempty sample and 0 <= p < 1, got {} values and p = {prob}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idx = ((prob * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    Ok(sorted[idx])
}

fn transform_size(cfg: &MixedConfig, stream: Stream) -> usize {
    match stream {
        Stream::Low => cfg.n_fft(),
        Stream::High(_) => cfg.m_fft(),
    }
}

/// Linear per-symbol SNR at the demodulator output for time-domain noise `noise_variance`.
pub fn post_dft_snr(cfg: &MixedConfig, noise_variance: f64, stream: Stream) -> Result<f64> {
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    Ok(1.0 / (transform_size(cfg, stream) as f64 * noise_variance))
}

/// Time-domain noise variance that puts `stream` at `ebn0_db` after demodulation.
pub fn noise_variance_for_ebn0(cfg: &MixedConfig, stream: Stream, order: QamOrder, ebn0_db: f64) -> f64 {
    let es_n0 = order.bits_per_symbol() as f64 * db_to_linear(ebn0_db);
    1.0 / (transform_size(cfg, stream) as f64 * es_n0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Exact Gray square-QAM bit error probability at `ebn0_db`.
pub fn theoretical_ber(order: QamOrder, ebn0_db: f64, channel: ChannelModel) -> f64 {
    let m = f64::from(order.order());
    let log2m = order.bits_per_symbol();
    let side = order.side();
    let log2l = log2m / 2;
    let gamma = db_to_linear(ebn0_db);
    let unit = 3.0 * log2m as f64 * gamma / (2.0 * (m - 1.0));
    // averaged erfc(sqrt(a)) for the channel
    let tail = |a: f64| match channel {
        ChannelModel::Awgn => libm::erfc(a.sqrt()),
        ChannelModel::RayleighBlock => 1.0 - (a / (1.0 + a)).sqrt(),
    };
    let mut total = 0.0;
    for k in 1..=log2l {
        let half = 1usize << (k - 1);
        let upper = side - (side >> k);
        let mut pk = 0.0;
        for i in 0..upper {
            let sign = if (i * half / side).is_multiple_of(2) { 1.0 } else { -1.0 };
            let weight = half as f64 - ((i * half) as f64 / side as f64 + 0.5).floor();
            let odd = (2 * i + 1) as f64;
            pk += sign * weight * tail(odd * odd * unit);
        }
        total += pk / side as f64;
    }
    total / log2l as f64
}

/// One simulated BER measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub stream: Stream,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    /// Normal-approximation binomial 95% half-width around the estimate.
    pub fn ci95(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        let p = self.ber();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }

    /// Binomial standard deviation of the estimator if the true rate were `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.bits.max(1) as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Purpose, RngStream};
    use crate::qam::{qam_demodulate_hard, qam_modulate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ber_basic_cases() {
        let a = [0u8, 1, 1, 0, 1, 0];
        let flipped: Vec<u8> = a.iter().map(|b| 1 - b).collect();
        assert_eq!(ber(&a, &a).unwrap(), 0.0);
        assert_eq!(ber(&a, &flipped).unwrap(), 1.0);
        let half: Vec<u8> = a.iter().enumerate().map(|(i, b)| if i % 2 == 0 { 1 - b } else { *b }).collect();
        assert_eq!(ber(&a, &half).unwrap(), 0.5);
        assert!(ber(&a, &a[..3]).is_err());
        assert!(ber(&[], &[]).is_err());
    }

    #[test]
    fn ber_matches_packed_xor_popcount() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let n = 64 * rng.random_range(1..40);
            let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let pack = |v: &[u8]| -> Vec<u64> {
                v.chunks(64)
                    .map(|ch| ch.iter().fold(0u64, |acc, &x| (acc << 1) | u64::from(x)))
                    .collect()
            };
            let errors: u32 = pack(&a)
                .iter()
                .zip(pack(&b))
                .map(|(x, y)| (x ^ y).count_ones())
                .sum();
            assert_eq!(ber(&a, &b).unwrap(), f64::from(errors) / n as f64);
        }
    }

    #[test]
    fn evm_cases() {
        let x = vec![c(1.0, 0.0), c(0.0, -1.0), c(0.5, 0.5)];
        assert_eq!(evm_db(&x, &x).unwrap(), f64::NEG_INFINITY);
        let doubled: Vec<_> = x.iter().map(|z| z * 2.0).collect();
        assert!(evm_db(&doubled, &x).unwrap().abs() < 1e-12);
        assert!(evm_db(&x, &[c(0.0, 0.0); 3]).is_err());
        assert!(evm_db(&x, &x[..2]).is_err());
    }

    #[test]
    fn papr_cases() {
        let cfg = MixedConfig::nr_reference();
        let constant = TimeFrame::new(
            (0..cfg.frame_len())
                .map(|i| Complex64::from_polar(2.0, i as f64))
                .collect(),
            &cfg,
        )
        .unwrap();
        assert!(papr_db(&constant).unwrap().abs() < 1e-12);
        let mut spike = TimeFrame::zeros(&cfg);
        spike.samples[17] = c(0.0, 3.0);
        let expected = 10.0 * (cfg.frame_len() as f64).log10();
        assert!((papr_db(&spike).unwrap() - expected).abs() < 1e-12);
        assert!(papr_db(&TimeFrame::zeros(&cfg)).is_err());
    }

    #[test]
    fn ccdf_bounds_and_sort_count_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let values: Vec<f64> = (0..500).map(|_| rng.random_range(3.0..12.0)).collect();
        let grid: Vec<f64> = (0..=150).map(|i| i as f64 * 0.1).collect();
        let curve = ccdf(&values, &grid).unwrap();
        assert_eq!(curve.ccdf[0], 1.0);
        assert_eq!(*curve.ccdf.last().unwrap(), 0.0);
        for w in curve.ccdf.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for (t, p) in grid.iter().zip(&curve.ccdf) {
            let count = values.iter().filter(|&&v| v > *t).count();
            assert_eq!(*p, count as f64 / values.len() as f64);
        }
        assert!(ccdf(&[], &grid).is_err());
    }

    #[test]
    fn level_at_ccdf_leaves_expected_tail() {
        let values: Vec<f64> = (0..1000).map(f64::from).collect();
        let t = level_at_ccdf(&values, 0.01).unwrap();
        assert_eq!(values.iter().filter(|&&v| v > t).count(), 10);
        assert!(level_at_ccdf(&[], 0.01).is_err());
    }

    #[test]
    fn snr_accounting() {
        let cfg = MixedConfig::nr_reference();
        let n = cfg.n_fft() as f64;
        assert!((post_dft_snr(&cfg, 1.0 / n, Stream::Low).unwrap() - 1.0).abs() < 1e-15);
        let low = post_dft_snr(&cfg, 0.01, Stream::Low).unwrap();
        let high = post_dft_snr(&cfg, 0.01, Stream::High(0)).unwrap();
        assert!((high / low - 2.0).abs() < 1e-15);
        assert!(post_dft_snr(&cfg, 0.0, Stream::Low).is_err());
        let s2 = noise_variance_for_ebn0(&cfg, Stream::High(1), QamOrder::QAM64, 10.0);
        let snr = post_dft_snr(&cfg, s2, Stream::High(1)).unwrap();
        assert!((snr / 6.0 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn post_dft_noise_variance_empirical() {
        use crate::channel::awgn;
        use crate::ofdm::{demod_high, demod_low};
        let cfg = MixedConfig::nr_reference();
        let s2 = 0.003;
        let zero = TimeFrame::zeros(&cfg);
        let (mut low, mut high, mut nl, mut nh) = (0.0, 0.0, 0usize, 0usize);
        // 10^5 demodulated bins per numerology is plenty for a 1% check
        for frame in 0..400u64 {
            let mut rng = RngStream::new(5, 0, frame, Purpose::Noise);
            let f = awgn(&zero, s2, &mut rng).unwrap();
            let dl = demod_low(&f, &cfg).unwrap();
            low += dl.iter().map(Complex64::norm_sqr).sum::<f64>();
            nl += dl.len();
            for q in 0..2 {
                let dh = demod_high(&f, q, &cfg).unwrap();
                high += dh.iter().map(Complex64::norm_sqr).sum::<f64>();
                nh += dh.len();
            }
        }
        let vl = low / nl as f64 / (cfg.n_fft() as f64 * s2);
        let vh = high / nh as f64 / (cfg.m_fft() as f64 * s2);
        assert!((vl - 1.0).abs() < 0.01, "{vl}");
        assert!((vh - 1.0).abs() < 0.01, "{vh}");
    }

    #[test]
    fn theoretical_limits_and_monotonicity() {
        for order in [QamOrder::QPSK, QamOrder::QAM16, QamOrder::QAM64, QamOrder::QAM256] {
            for ch in [ChannelModel::Awgn, ChannelModel::RayleighBlock] {
                let p0 = theoretical_ber(order, -200.0, ch);
                assert!((p0 - 0.5).abs() < 1e-9, "{} {ch}: {p0}", order.order());
                let mut prev = 1.0;
                for i in 0..=500 {
                    let p = theoretical_ber(order, -10.0 + i as f64 * 0.1, ch);
                    // strictly decreasing until the tail underflows
                    assert!(p < prev || (p == 0.0 && prev == 0.0), "{} {ch} at step {i}", order.order());
                    assert!(p >= 0.0);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn theoretical_qpsk_closed_forms() {
        // QPSK Gray: Pb = Q(sqrt(2 g)) = erfc(sqrt(g))/2 and Rayleigh (1 - sqrt(g/(1+g)))/2
        for db in [0.0, 5.0, 12.0] {
            let g = db_to_linear(db);
            let awgn = 0.5 * libm::erfc(g.sqrt());
            let ray = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
            assert!((theoretical_ber(QamOrder::QPSK, db, ChannelModel::Awgn) - awgn).abs() < 1e-15);
            assert!((theoretical_ber(QamOrder::QPSK, db, ChannelModel::RayleighBlock) - ray).abs() < 1e-15);
        }
    }

    /// Symbol-level AWGN Monte Carlo; one bit position per symbol (cycled)
    /// keeps every counted bit an independent trial.
    fn awgn_monte_carlo(order: QamOrder, ebn0_db: f64, symbols: usize, seed: u64) -> (u64, u64) {
        let bps = order.bits_per_symbol();
        let n0 = 1.0 / (bps as f64 * db_to_linear(ebn0_db));
        let mut rng = RngStream::new(seed, 0, 0, Purpose::Other(1));
        let mut errors = 0;
        for s in 0..symbols {
            let bits: Vec<u8> = (0..bps).map(|_| rng.random_range(0..2u8)).collect();
            let x = qam_modulate(&bits, order).unwrap()[0];
            let y = x + rng.complex_gaussian(n0);
            let rx = qam_demodulate_hard(&[y], order);
            let pos = s % bps;
            errors += u64::from(rx[pos] != bits[pos]);
        }
        (symbols as u64, errors)
    }

    #[test]
    fn awgn_curve_matches_monte_carlo() {
        for (order, db) in [(QamOrder::QAM16, 6.0), (QamOrder::QAM64, 10.0), (QamOrder::QAM256, 14.0)] {
            let (bits, errors) = awgn_monte_carlo(order, db, 400_000, 17);
            let p = theoretical_ber(order, db, ChannelModel::Awgn);
            let est = errors as f64 / bits as f64;
            let sigma = (p * (1.0 - p) / bits as f64).sqrt();
            assert!((est - p).abs() <= 3.0 * sigma, "{} @ {db}: {est} vs {p}", order.order());
        }
    }

    #[test]
    fn noise_free_limit_has_no_errors() {
        let (_, errors) = awgn_monte_carlo(QamOrder::QAM256, 40.0, 50_000, 3);
        assert_eq!(errors, 0);
    }

    #[test]
    fn ber_point_statistics() {
        let p = BerPoint {
            stream: Stream::Low,
            ebn0_db: 10.0,
            bits: 10_000,
            errors: 100,
        };
        assert_eq!(p.ber(), 0.01);
        assert!((p.ci95() - 1.96 * (0.01f64 * 0.99 / 10_000.0).sqrt()).abs() < 1e-15);
    }
}
