use num_complex::Complex64;
use rand::Rng;

use crate::config::MixedConfig;
use crate::error::{Error, Result};
use crate::qam::{qam_modulate, QamOrder};

/// Frequency-domain symbols on the active edge subcarriers of one composite frame.
///
/// `low` holds the `P` symbols for bins `N/2-P .. N/2-1`; `high[q]` holds the
/// `K` symbols for bins `M/2 .. M/2+K-1` of slot `q`. The stacked form is
/// `[low; high[0]; ...; high[Q-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub low: Vec<Complex64>,
    pub high: Vec<Vec<Complex64>>,
}

impl SymbolGrid {
    pub fn zeros(cfg: &MixedConfig) -> Self {
        SymbolGrid {
            low: vec![Complex64::default(); cfg.p_edge()],
            high: vec![vec![Complex64::default(); cfg.k_edge()]; cfg.q_ratio()],
        }
    }

    /// Splits a stacked `(P + Q K)`-vector back into its blocks.
    pub fn from_stacked(stacked: &[Complex64], cfg: &MixedConfig) -> Result<Self> {
        if stacked.len() != cfg.stacked_len() {
            return Err(Error::dim("stacked symbol vector", cfg.stacked_len(), stacked.len()));
        }
        let (low, rest) = stacked.split_at(cfg.p_edge());
        Ok(SymbolGrid {
            low: low.to_vec(),
            high: rest.chunks_exact(cfg.k_edge()).map(<[_]>::to_vec).collect(),
        })
    }

    pub fn stacked(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.low);
        for slot in &self.high {
            out.extend_from_slice(slot);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.low.len() + self.high.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, cfg: &MixedConfig) -> Result<()> {
        if self.low.len() != cfg.p_edge() {
            return Err(Error::dim("low-numerology symbols", cfg.p_edge(), self.low.len()));
        }
        if self.high.len() != cfg.q_ratio() {
            return Err(Error::dim("high-numerology slots", cfg.q_ratio(), self.high.len()));
        }
        for slot in &self.high {
            if slot.len() != cfg.k_edge() {
                return Err(Error::dim("high-numerology symbols", cfg.k_edge(), slot.len()));
            }
        }
        Ok(())
    }

    /// Unit symbol at stacked position `index`, zeros elsewhere.
    pub fn unit(cfg: &MixedConfig, index: usize) -> Result<Self> {
        let mut stacked = vec![Complex64::default(); cfg.stacked_len()];
        let slot = stacked
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("stacked index {index} out of range")))?;
        *slot = Complex64::new(1.0, 0.0);
        SymbolGrid::from_stacked(&stacked, cfg)
    }

    /// Random QAM grid; returns the grid and the bits it carries (stacked order).
    pub fn random_qam<R: Rng + ?Sized>(
        cfg: &MixedConfig,
        order: QamOrder,
        rng: &mut R,
    ) -> (Self, Vec<u8>) {
        let bits: Vec<u8> = (0..cfg.stacked_len() * order.bits_per_symbol())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        let symbols = qam_modulate(&bits, order).expect("bit count is a whole number of symbols");
        let grid = SymbolGrid::from_stacked(&symbols, cfg).expect("stacked length matches");
        (grid, bits)
    }
}
