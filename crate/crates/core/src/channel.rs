//! Reproducible channel impairments: AWGN and flat block Rayleigh fading.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::TimeFrame;

/// What a random substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Bits,
    Noise,
    Fade,
    Other(u32),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Bits => 1,
            Purpose::Noise => 2,
            Purpose::Fade => 3,
            Purpose::Other(t) => 0x1_0000_0000 | u64::from(t),
        }
    }
}

/// A ChaCha12 stream keyed by `(seed, purpose, experiment)` and positioned
/// on stream `frame`.
///
/// Identical identifiers give identical draws on every platform, independent
/// of how frames are scheduled across threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, experiment: u64, frame: u64, purpose: Purpose) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
        key[16..24].copy_from_slice(&experiment.to_le_bytes());
        key[24..].copy_from_slice(b"mixnumrs");
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(frame);
        RngStream { rng }
    }

    /// Circularly-symmetric complex Gaussian with total variance `variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let s = (variance / 2.0).sqrt();
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Channel model selector as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Awgn,
    RayleighBlock,
}

impl ChannelModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelModel::Awgn => "awgn",
            ChannelModel::RayleighBlock => "rayleigh_block",
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(ChannelModel::Awgn),
            "rayleigh_block" => Ok(ChannelModel::RayleighBlock),
            other => Err(Error::Config(format!("unknown channel model {other:?}"))),
        }
    }
}

/// Complex gain applied to a whole composite frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeRealization {
    pub gain: Complex64,
}

impl FadeRealization {
    pub const UNIT: FadeRealization = FadeRealization {
        gain: Complex64::new(1.0, 0.0),
    };
}

/// Adds complex Gaussian noise of total variance `noise_variance` per sample.
pub fn awgn(frame: &TimeFrame, noise_variance: f64, rng: &mut RngStream) -> Result<TimeFrame> {
    if noise_variance.is_nan() || noise_variance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be non-negative, got {noise_variance}"
        )));
    }
    if noise_variance == 0.0 {
        return Ok(frame.clone());
    }
    Ok(TimeFrame {
        samples: frame
            .samples
            .iter()
            .map(|s| s + rng.complex_gaussian(noise_variance))
            .collect(),
        sample_rate_hz: frame.sample_rate_hz,
    })
}

/// Draws one unit-power Rayleigh gain and applies it to the whole frame.
pub fn rayleigh_block(frame: &TimeFrame, rng: &mut RngStream) -> (TimeFrame, FadeRealization) {
    let fade = FadeRealization {
        gain: rng.complex_gaussian(1.0),
    };
    (frame.scaled(fade.gain), fade)
}

/// Divides every bin by the frame gain (perfect channel knowledge).
pub fn one_tap_equalize(demodulated: &[Complex64], fade: FadeRealization) -> Result<Vec<Complex64>> {
    if fade.gain.norm_sqr() == 0.0 {
        return Err(Error::InvalidArgument("cannot equalize a zero channel gain".into()));
    }
    let inv = fade.gain.inv();
    Ok(demodulated.iter().map(|z| z * inv).collect())
}
