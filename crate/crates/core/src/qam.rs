//! Gray-mapped square QAM with unit average symbol energy.
//!
//! A label of `b = log2(order)` bits is split in two halves. The first
//! (most significant) half selects the in-phase level and the second half
//! the quadrature level. On each axis with `L = sqrt(order)` levels the half
//! label `g` is the binary-reflected Gray code of the level index
//! `i = gray_inverse(g)`, and the amplitude is `(L - 1 - 2 i) * scale`.
//! Level index 0 is therefore the most positive amplitude, so the all-zero
//! label sits in the first quadrant: for QPSK, `00 -> (+1, +1) / sqrt(2)`.
//!
//! Hard decisions slice each axis independently, which is exactly the
//! minimum-distance rule for a square grid. A point equidistant from two
//! levels resolves to the smaller level index (the more positive amplitude),
//! which is also the smaller row-major index in [`Constellation::points`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A square QAM order: 4, 16, 64 or 256.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QamOrder(u32);

impl QamOrder {
    pub const QPSK: QamOrder = QamOrder(4);
    pub const QAM16: QamOrder = QamOrder(16);
    pub const QAM64: QamOrder = QamOrder(64);
    pub const QAM256: QamOrder = QamOrder(256);

    pub fn new(order: u32) -> Result<Self> {
        match order {
            4 | 16 | 64 | 256 => Ok(QamOrder(order)),
            _ => Err(Error::Config(format!(
                "unsupported QAM order {order} (expected 4, 16, 64 or 256)"
            ))),
        }
    }

    pub fn order(self) -> u32 {
        self.0
    }

    pub fn bits_per_symbol(self) -> usize {
        self.0.trailing_zeros() as usize
    }

    /// Levels per axis, `sqrt(order)`.
    pub fn side(self) -> usize {
        1 << (self.bits_per_symbol() / 2)
    }

    /// Amplitude step that gives unit average energy: `sqrt(3 / (2 (order - 1)))`.
    pub fn scale(self) -> f64 {
        (3.0 / (2.0 * (f64::from(self.0) - 1.0))).sqrt()
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// Axis level index to amplitude.
fn level(i: usize, side: usize, scale: f64) -> f64 {
    (side as f64 - 1.0 - 2.0 * i as f64) * scale
}

/// Nearest level index on one axis, ties toward the smaller index.
fn slice(a: f64, side: usize, scale: f64) -> usize {
    let t = ((side as f64 - 1.0) - a / scale) / 2.0;
    let i = (t - 0.5).ceil();
    if i <= 0.0 || i.is_nan() {
        0
    } else {
        (i as usize).min(side - 1)
    }
}

/// The full point table for one order, indexed by label.
#[derive(Debug, Clone)]
pub struct Constellation {
    order: QamOrder,
    by_label: Vec<Complex64>,
}

impl Constellation {
    pub fn new(order: QamOrder) -> Self {
        let n = order.order() as usize;
        let by_label = (0..n).map(|label| map_label(label, order)).collect();
        Constellation { order, by_label }
    }

    pub fn order(&self) -> QamOrder {
        self.order
    }

    /// Point carrying `label` (bits read MSB first).
    pub fn point(&self, label: usize) -> Complex64 {
        self.by_label[label]
    }

    /// Points in row-major level order (in-phase level major).
    pub fn points(&self) -> Vec<Complex64> {
        let side = self.order.side();
        let scale = self.order.scale();
        let mut out = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                out.push(Complex64::new(level(i, side, scale), level(j, side, scale)));
            }
        }
        out
    }

    pub fn labels(&self) -> &[Complex64] {
        &self.by_label
    }
}

fn map_label(label: usize, order: QamOrder) -> Complex64 {
    let half = order.bits_per_symbol() / 2;
    let side = order.side();
    let scale = order.scale();
    let gi = label >> half;
    let gq = label & (side - 1);
    Complex64::new(
        level(gray_inverse(gi), side, scale),
        level(gray_inverse(gq), side, scale),
    )
}

fn demap_point(z: Complex64, order: QamOrder) -> usize {
    let half = order.bits_per_symbol() / 2;
    let side = order.side();
    let scale = order.scale();
    (gray(slice(z.re, side, scale)) << half) | gray(slice(z.im, side, scale))
}

/// Maps bits (one `0`/`1` per element, MSB first per symbol) to symbols.
pub fn qam_modulate(bits: &[u8], order: QamOrder) -> Result<Vec<Complex64>> {
    let bps = order.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::InvalidArgument(format!(
            "{} bits is not a multiple of {bps} bits per symbol",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
            map_label(label, order)
        })
        .collect())
}

/// Minimum-distance hard decisions, inverse of [`qam_modulate`].
pub fn qam_demodulate_hard(symbols: &[Complex64], order: QamOrder) -> Vec<u8> {
    let bps = order.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    for &z in symbols {
        let label = demap_point(z, order);
        bits.extend((0..bps).rev().map(|k| ((label >> k) & 1) as u8));
    }
    bits
}

/// Number of bit errors between a symbol decision and a transmitted label.
pub(crate) fn label_errors(z: Complex64, label: usize, order: QamOrder) -> u32 {
    (demap_point(z, order) ^ label).count_ones()
}
