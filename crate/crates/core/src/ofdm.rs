//! Transmit and receive chains for the composite frame.
//!
//! Conventions:
//!
//! * synthesis with prefix `cp`: `y[n] = (1/size) sum_k X[k] e^{+j 2 pi k <n - cp>_size / size}`
//!   for `0 <= n < size + cp`, so the first `cp` samples repeat the last `cp`;
//! * demodulation is an unnormalized DFT over a window starting at `start`:
//!   `X[k] = sum_m y[start + m] e^{-j 2 pi k m / size}`.
//!
//! The low numerology window starts at `N_cp`; slot `q` of the high numerology
//! at `q (M + M_cp) + M_cp`. A spectrum synthesized and demodulated alone is
//! recovered with gain 1.
//!
//! All transforms here are direct sums; transform sizes are small and
//! the matrix view is what the interference model is built on.

use std::fmt;

use num_complex::Complex64;

use crate::config::MixedConfig;
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::ini::IniModel;

/// Which transmitted stream a symbol or window belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// The wide-symbol numerology `mu_low`.
    Low,
    /// Slot `q` of the narrow-symbol numerology `mu_high`.
    High(usize),
}

impl Stream {
    pub fn is_low(self) -> bool {
        matches!(self, Stream::Low)
    }

    /// Every stream of a configuration, in stacked-vector order.
    pub fn all(cfg: &MixedConfig) -> Vec<Stream> {
        std::iter::once(Stream::Low)
            .chain((0..cfg.q_ratio()).map(Stream::High))
            .collect()
    }

    /// Active subcarrier count.
    pub fn width(self, cfg: &MixedConfig) -> usize {
        match self {
            Stream::Low => cfg.p_edge(),
            Stream::High(_) => cfg.k_edge(),
        }
    }

    /// Offset of this stream's block in the stacked vector.
    pub fn offset(self, cfg: &MixedConfig) -> usize {
        match self {
            Stream::Low => 0,
            Stream::High(q) => cfg.p_edge() + q * cfg.k_edge(),
        }
    }

    /// Transform bin of active subcarrier `i`.
    pub fn bin(self, cfg: &MixedConfig, i: usize) -> usize {
        match self {
            Stream::Low => cfg.low_bin(i),
            Stream::High(_) => cfg.high_bin(i),
        }
    }

    pub(crate) fn check(self, cfg: &MixedConfig) -> Result<()> {
        match self {
            Stream::High(q) if q >= cfg.q_ratio() => Err(Error::Slot {
                slot: q,
                q: cfg.q_ratio(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stream::Low => write!(f, "low"),
            Stream::High(q) => write!(f, "high[{q}]"),
        }
    }
}

/// Powers of the transform roots for one size.
///
/// `forward(e) = exp(-j 2 pi e / size)` and `inverse(e) = exp(+j 2 pi e / size)`
/// for any integer exponent; exponents are reduced modulo `size` before lookup.
#[derive(Debug, Clone)]
pub struct Twiddles {
    size: usize,
    table: Vec<Complex64>,
}

impl Twiddles {
    pub fn new(size: usize) -> Self {
        let table = (0..size)
            .map(|i| Complex64::cis(2.0 * std::f64::consts::PI * i as f64 / size as f64))
            .collect();
        Twiddles { size, table }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn inverse(&self, exponent: i64) -> Complex64 {
        self.table[exponent.rem_euclid(self.size as i64) as usize]
    }

    pub fn forward(&self, exponent: i64) -> Complex64 {
        self.inverse(exponent).conj()
    }
}

/// Transform-domain bins of one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub stream: Stream,
}

/// One composite frame of `N + N_cp` baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl TimeFrame {
    pub fn new(samples: Vec<Complex64>, cfg: &MixedConfig) -> Result<Self> {
        if samples.len() != cfg.frame_len() {
            return Err(Error::dim("frame samples", cfg.frame_len(), samples.len()));
        }
        Ok(TimeFrame {
            samples,
            sample_rate_hz: cfg.sample_rate_hz(),
        })
    }

    pub fn zeros(cfg: &MixedConfig) -> Self {
        TimeFrame {
            samples: vec![Complex64::default(); cfg.frame_len()],
            sample_rate_hz: cfg.sample_rate_hz(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn scaled(&self, gain: Complex64) -> TimeFrame {
        TimeFrame {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Places grid symbols on their transform bins; every other bin is zero.
pub fn map_edge_symbols(grid: &SymbolGrid, cfg: &MixedConfig) -> Result<(Spectrum, Vec<Spectrum>)> {
    grid.check(cfg)?;
    let mut low = vec![Complex64::default(); cfg.n_fft()];
    for (c, &x) in grid.low.iter().enumerate() {
        low[cfg.low_bin(c)] = x;
    }
    let high = grid
        .high
        .iter()
        .enumerate()
        .map(|(q, slot)| {
            let mut bins = vec![Complex64::default(); cfg.m_fft()];
            for (r, &x) in slot.iter().enumerate() {
                bins[cfg.high_bin(r)] = x;
            }
            Spectrum {
                bins,
                stream: Stream::High(q),
            }
        })
        .collect();
    Ok((
        Spectrum {
            bins: low,
            stream: Stream::Low,
        },
        high,
    ))
}

/// Inverse DFT of `bins` with a `cp`-sample cyclic prefix.
pub fn idft_with_cp(bins: &[Complex64], cp: usize) -> Result<Vec<Complex64>> {
    let size = bins.len();
    if cp >= size {
        return Err(Error::CyclicPrefix { cp, size });
    }
    let tw = Twiddles::new(size);
    let scale = 1.0 / size as f64;
    let active: Vec<(i64, Complex64)> = bins
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != Complex64::default())
        .map(|(k, &x)| (k as i64, x))
        .collect();
    Ok((0..size + cp)
        .map(|n| {
            let t = n as i64 - cp as i64;
            active
                .iter()
                .map(|&(k, x)| x * tw.inverse(k * t))
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

/// Unnormalized DFT of `samples[start .. start + size]`.
pub fn dft_window(samples: &[Complex64], start: usize, size: usize) -> Result<Vec<Complex64>> {
    let window = samples
        .get(start..start + size)
        .ok_or_else(|| Error::dim("samples for DFT window", start + size, samples.len()))?;
    let tw = Twiddles::new(size);
    Ok((0..size as i64)
        .map(|k| {
            window
                .iter()
                .enumerate()
                .map(|(m, &y)| y * tw.forward(k * m as i64))
                .sum()
        })
        .collect())
}

/// Places `Q` high-numerology symbols back to back.
pub fn concat_high_numerology(symbols: &[Vec<Complex64>], cfg: &MixedConfig) -> Result<Vec<Complex64>> {
    if symbols.len() != cfg.q_ratio() {
        return Err(Error::dim("high-numerology symbols", cfg.q_ratio(), symbols.len()));
    }
    let mut out = Vec::with_capacity(cfg.frame_len());
    for sym in symbols {
        if sym.len() != cfg.slot_len() {
            return Err(Error::dim("high-numerology symbol length", cfg.slot_len(), sym.len()));
        }
        out.extend_from_slice(sym);
    }
    Ok(out)
}

/// Sums the two numerologies' sample streams into a composite frame.
pub fn compose(y0: &[Complex64], y1: &[Complex64], cfg: &MixedConfig) -> Result<TimeFrame> {
    if y0.len() != cfg.frame_len() {
        return Err(Error::dim("low-numerology samples", cfg.frame_len(), y0.len()));
    }
    if y1.len() != cfg.frame_len() {
        return Err(Error::dim("high-numerology samples", cfg.frame_len(), y1.len()));
    }
    TimeFrame::new(y0.iter().zip(y1).map(|(a, b)| a + b).collect(), cfg)
}

/// N-point demodulation of the low numerology window.
pub fn demod_low(frame: &TimeFrame, cfg: &MixedConfig) -> Result<Vec<Complex64>> {
    if frame.len() != cfg.frame_len() {
        return Err(Error::dim("frame samples", cfg.frame_len(), frame.len()));
    }
    dft_window(&frame.samples, cfg.low_window_start(), cfg.n_fft())
}

/// M-point demodulation of high-numerology slot `q`.
pub fn demod_high(frame: &TimeFrame, q: usize, cfg: &MixedConfig) -> Result<Vec<Complex64>> {
    Stream::High(q).check(cfg)?;
    if frame.len() != cfg.frame_len() {
        return Err(Error::dim("frame samples", cfg.frame_len(), frame.len()));
    }
    dft_window(&frame.samples, cfg.high_window_start(q), cfg.m_fft())
}

/// Demodulates every stream and gathers the active bins in stacked order.
pub fn demod_active(frame: &TimeFrame, cfg: &MixedConfig) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(cfg.stacked_len());
    let low = demod_low(frame, cfg)?;
    out.extend((0..cfg.p_edge()).map(|c| low[cfg.low_bin(c)]));
    for q in 0..cfg.q_ratio() {
        let high = demod_high(frame, q, cfg)?;
        out.extend((0..cfg.k_edge()).map(|r| high[cfg.high_bin(r)]));
    }
    Ok(out)
}

/// Synthesizes the composite frame for `grid`, pre-equalizing first if a model is given.
pub fn build_frame(
    grid: &SymbolGrid,
    cfg: &MixedConfig,
    pre_equalizer: Option<&IniModel>,
) -> Result<TimeFrame> {
    let pre;
    let grid = match pre_equalizer {
        Some(model) => {
            pre = model.pre_equalize(grid)?;
            &pre
        }
        None => grid,
    };
    let (low, high) = map_edge_symbols(grid, cfg)?;
    let y0 = idft_with_cp(&low.bins, cfg.n_cp())?;
    let slots = high
        .iter()
        .map(|s| idft_with_cp(&s.bins, cfg.m_cp()))
        .collect::<Result<Vec<_>>>()?;
    let y1 = concat_high_numerology(&slots, cfg)?;
    compose(&y0, &y1, cfg)
}

/// Precomputed synthesis and analysis matrices restricted to the active bins.
///
/// Produces the same frames and decisions as [`build_frame`] and
/// [`demod_active`] at a fraction of the cost; used by the Monte Carlo runs.
#[derive(Debug, Clone)]
pub struct EdgeTransceiver {
    cfg: MixedConfig,
    // (N + N_cp) x P, row-major
    low_synth: Vec<Complex64>,
    // (M + M_cp) x K, row-major
    high_synth: Vec<Complex64>,
    // P x N
    low_analysis: Vec<Complex64>,
    // K x M
    high_analysis: Vec<Complex64>,
}

impl EdgeTransceiver {
    pub fn new(cfg: &MixedConfig) -> Self {
        let (n, m, p, k) = (cfg.n_fft(), cfg.m_fft(), cfg.p_edge(), cfg.k_edge());
        let tn = Twiddles::new(n);
        let tm = Twiddles::new(m);
        let mut low_synth = Vec::with_capacity(cfg.frame_len() * p);
        for t in 0..cfg.frame_len() as i64 {
            let rel = t - cfg.n_cp() as i64;
            for c in 0..p {
                low_synth.push(tn.inverse(cfg.low_bin(c) as i64 * rel) / n as f64);
            }
        }
        let mut high_synth = Vec::with_capacity(cfg.slot_len() * k);
        for t in 0..cfg.slot_len() as i64 {
            let rel = t - cfg.m_cp() as i64;
            for r in 0..k {
                high_synth.push(tm.inverse(cfg.high_bin(r) as i64 * rel) / m as f64);
            }
        }
        let mut low_analysis = Vec::with_capacity(p * n);
        for c in 0..p {
            let bin = cfg.low_bin(c) as i64;
            low_analysis.extend((0..n as i64).map(|t| tn.forward(bin * t)));
        }
        let mut high_analysis = Vec::with_capacity(k * m);
        for r in 0..k {
            let bin = cfg.high_bin(r) as i64;
            high_analysis.extend((0..m as i64).map(|t| tm.forward(bin * t)));
        }
        EdgeTransceiver {
            cfg: *cfg,
            low_synth,
            high_synth,
            low_analysis,
            high_analysis,
        }
    }

    pub fn config(&self) -> &MixedConfig {
        &self.cfg
    }

    /// Composite frame for a stacked symbol vector (already pre-equalized if desired).
    pub fn synthesize(&self, stacked: &[Complex64]) -> Result<TimeFrame> {
        let cfg = &self.cfg;
        if stacked.len() != cfg.stacked_len() {
            return Err(Error::dim("stacked symbol vector", cfg.stacked_len(), stacked.len()));
        }
        let (p, k) = (cfg.p_edge(), cfg.k_edge());
        let low = &stacked[..p];
        let mut samples: Vec<Complex64> = self
            .low_synth
            .chunks_exact(p)
            .map(|row| dot(row, low))
            .collect();
        for q in 0..cfg.q_ratio() {
            let x = &stacked[p + q * k..p + (q + 1) * k];
            let base = cfg.slot_start(q);
            for (t, row) in self.high_synth.chunks_exact(k).enumerate() {
                samples[base + t] += dot(row, x);
            }
        }
        TimeFrame::new(samples, cfg)
    }

    /// Demodulated active bins in stacked order.
    pub fn analyze(&self, frame: &TimeFrame) -> Result<Vec<Complex64>> {
        let cfg = &self.cfg;
        if frame.len() != cfg.frame_len() {
            return Err(Error::dim("frame samples", cfg.frame_len(), frame.len()));
        }
        let (n, m) = (cfg.n_fft(), cfg.m_fft());
        let window = &frame.samples[cfg.low_window_start()..cfg.low_window_start() + n];
        let mut out: Vec<Complex64> = self
            .low_analysis
            .chunks_exact(n)
            .map(|row| dot(row, window))
            .collect();
        for q in 0..cfg.q_ratio() {
            let start = cfg.high_window_start(q);
            let window = &frame.samples[start..start + m];
            out.extend(self.high_analysis.chunks_exact(m).map(|row| dot(row, window)));
        }
        Ok(out)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
