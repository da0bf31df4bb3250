//! Frame-structure configuration for two multiplexed numerologies.
//!
//! A composite frame holds one symbol of the low numerology `mu_low`
//! (N-point transform, `n_cp` prefix) time-aligned with `Q` symbols of the
//! high numerology `mu_high` (M-point transform, `m_cp` prefix), where
//! `Q = 2^(mu_high - mu_low) = N / M`.
//!
//! Only the subcarriers next to the shared band edge are active: the last
//! `P` low-numerology bins `N/2-P .. N/2-1` and the first `K` high-numerology
//! bins `M/2 .. M/2+K-1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qam::QamOrder;

/// Subcarrier spacing of numerology 0.
pub const BASE_SCS_HZ: f64 = 15_000.0;

/// Largest numerology index accepted by [`MixedConfig::new`] (FR1 allows 0, 1, 2).
pub const MAX_FR1_MU: u32 = 2;

/// Validated parameters of a two-numerology composite frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MixedConfig {
    mu_low: u32,
    mu_high: u32,
    n_fft: usize,
    m_fft: usize,
    q_ratio: usize,
    n_cp: usize,
    m_cp: usize,
    p_edge: usize,
    k_edge: usize,
}

impl MixedConfig {
    /// Derives `M`, `Q` and `M_cp` from the low-numerology parameters and
    /// checks every frame-structure invariant.
    pub fn new(
        mu_low: u32,
        mu_high: u32,
        n_fft: usize,
        n_cp: usize,
        p_edge: usize,
        k_edge: usize,
    ) -> Result<Self> {
        if mu_high > MAX_FR1_MU {
            return Err(Error::Config(format!(
                "unsupported numerology mu = {mu_high} (allowed 0..={MAX_FR1_MU})"
            )));
        }
        if mu_high <= mu_low {
            return Err(Error::Config(format!(
                "mu_high ({mu_high}) must exceed mu_low ({mu_low})"
            )));
        }
        let q_ratio = 1usize << (mu_high - mu_low);
        if n_fft == 0 || !n_fft.is_multiple_of(q_ratio) {
            return Err(Error::Config(format!(
                "n_fft = {n_fft} is not divisible by Q = {q_ratio}"
            )));
        }
        if !n_cp.is_multiple_of(q_ratio) {
            return Err(Error::Config(format!(
                "n_cp = {n_cp} is not divisible by Q = {q_ratio}"
            )));
        }
        let m_fft = n_fft / q_ratio;
        let m_cp = n_cp / q_ratio;
        if m_fft < 2 || !m_fft.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "high-numerology transform size M = {m_fft} must be even"
            )));
        }
        if m_cp >= m_fft {
            return Err(Error::Config(format!(
                "cyclic prefix M_cp = {m_cp} must be shorter than M = {m_fft}"
            )));
        }
        if p_edge == 0 || p_edge > n_fft / 2 {
            return Err(Error::Config(format!(
                "band overflow: P = {p_edge} must lie in 1..={}",
                n_fft / 2
            )));
        }
        if k_edge == 0 || k_edge > m_fft / 2 {
            return Err(Error::Config(format!(
                "band overflow: K = {k_edge} must lie in 1..={}",
                m_fft / 2
            )));
        }
        let cfg = MixedConfig {
            mu_low,
            mu_high,
            n_fft,
            m_fft,
            q_ratio,
            n_cp,
            m_cp,
            p_edge,
            k_edge,
        };
        debug_assert_eq!(cfg.q_ratio * cfg.slot_len(), cfg.frame_len());
        if cfg.q_ratio * cfg.slot_len() != cfg.frame_len() {
            return Err(Error::Config("frame-length identity violated".into()));
        }
        Ok(cfg)
    }

    /// The 0/1 pairing with N = 256, N_cp = 18, P = 96 and K = 48.
    pub fn nr_reference() -> Self {
        MixedConfig::new(0, 1, 256, 18, 96, 48).expect("reference configuration is valid")
    }

    pub fn mu_low(&self) -> u32 {
        self.mu_low
    }

    pub fn mu_high(&self) -> u32 {
        self.mu_high
    }

    /// Transform size N of the low numerology.
    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    /// Transform size M of the high numerology.
    pub fn m_fft(&self) -> usize {
        self.m_fft
    }

    /// Number Q of high-numerology symbols per composite frame.
    pub fn q_ratio(&self) -> usize {
        self.q_ratio
    }

    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    pub fn m_cp(&self) -> usize {
        self.m_cp
    }

    /// Active low-numerology subcarriers P.
    pub fn p_edge(&self) -> usize {
        self.p_edge
    }

    /// Active high-numerology subcarriers K per slot.
    pub fn k_edge(&self) -> usize {
        self.k_edge
    }

    /// Samples per composite frame, `N + N_cp`.
    pub fn frame_len(&self) -> usize {
        self.n_fft + self.n_cp
    }

    /// Samples per high-numerology symbol, `M + M_cp`.
    pub fn slot_len(&self) -> usize {
        self.m_fft + self.m_cp
    }

    /// Length of the stacked symbol vector, `P + Q K`.
    pub fn stacked_len(&self) -> usize {
        self.p_edge + self.q_ratio * self.k_edge
    }

    /// Transform bin carrying active low-numerology symbol `c`.
    pub fn low_bin(&self, c: usize) -> usize {
        self.n_fft / 2 - self.p_edge + c
    }

    /// Transform bin carrying active high-numerology symbol `r`.
    pub fn high_bin(&self, r: usize) -> usize {
        self.m_fft / 2 + r
    }

    /// First sample of slot `q` within the composite frame.
    pub fn slot_start(&self, q: usize) -> usize {
        q * self.slot_len()
    }

    /// First sample of the DFT window for high-numerology slot `q`.
    pub fn high_window_start(&self, q: usize) -> usize {
        self.slot_start(q) + self.m_cp
    }

    /// First sample of the low-numerology DFT window.
    pub fn low_window_start(&self) -> usize {
        self.n_cp
    }

    /// Sample rate of the composite frame, `N * scs(mu_low)`.
    pub fn sample_rate_hz(&self) -> f64 {
        self.n_fft as f64 * scs_hz(self.mu_low)
    }
}

/// Subcarrier spacing `2^mu * 15 kHz`.
pub fn scs_hz(mu: u32) -> f64 {
    BASE_SCS_HZ * f64::from(1u32 << mu)
}

/// Key-value frame settings as read from a JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSettings {
    pub mu_low: u32,
    pub mu_high: u32,
    pub n_fft: usize,
    pub n_cp: usize,
    pub p_edge: usize,
    pub k_edge: usize,
    pub qam_order: u32,
}

impl FrameSettings {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("settings serialize")
    }

    /// Validates the settings into a configuration and modulation order.
    pub fn resolve(&self) -> Result<(MixedConfig, QamOrder)> {
        let cfg = MixedConfig::new(
            self.mu_low,
            self.mu_high,
            self.n_fft,
            self.n_cp,
            self.p_edge,
            self.k_edge,
        )?;
        Ok((cfg, QamOrder::new(self.qam_order)?))
    }
}
