//! Inter-numerology interference (INI) model and transmitter pre-equalizer.
//!
//! Demodulating a composite frame on the active bins is a linear map of the
//! stacked transmit vector `X = [X_low; X_high[0]; ...; X_high[Q-1]]`:
//!
//! ```text
//! | I_P      W_low,0   ...  W_low,Q-1 |
//! | W_0,low  I_K       0    0         |
//! | ...      0         ...  0         |
//! | W_Q-1,low 0        0    I_K       |
//! ```
//!
//! Each off-diagonal block `W_victim,interferer` is the victim's demodulated
//! response to unit symbols on the interferer's active bins. Distinct
//! high-numerology slots never share a DFT window, so their coupling is zero.
//! Transmitting `W^-1 X` instead of `X` makes the demodulator return `X`.
//!
//! Blocks are built two ways: a closed-form overlap sum (geometric series
//! over the samples shared by the interferer's symbol and the victim's DFT
//! window) and an oracle that pushes unit tones through the actual chain.
//! The oracle is the definition; the closed form must agree with it.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::MixedConfig;
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::ofdm::{build_frame, demod_active, Stream, Twiddles};

/// Default ceiling on the 1-norm condition number of the coupling matrix.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

/// One coupling block: rows are victim bins, columns interferer bins.
#[derive(Debug, Clone, PartialEq)]
pub struct IniBlock {
    pub victim: Stream,
    pub interferer: Stream,
    pub matrix: DMatrix<Complex64>,
}

impl IniBlock {
    pub fn max_abs_diff(&self, other: &IniBlock) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `sum_{s=0}^{count-1} exp(j 2 pi d s / size)` in closed form.
fn geometric(tw: &Twiddles, d: i64, count: usize) -> Complex64 {
    let size = tw.size() as i64;
    if count == 0 {
        return Complex64::default();
    }
    if d.rem_euclid(size) == 0 {
        return Complex64::new(count as f64, 0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    (one - tw.inverse(d * count as i64)) / (one - tw.inverse(d))
}

/// Coupling block from the closed-form overlap sums.
pub fn w_block_closed_form(victim: Stream, interferer: Stream, cfg: &MixedConfig) -> Result<IniBlock> {
    victim.check(cfg)?;
    interferer.check(cfg)?;
    let n = cfg.n_fft();
    let tw = Twiddles::new(n);
    let q_ratio = cfg.q_ratio() as i64;
    let n_cp = cfg.n_cp() as i64;
    let m_cp = cfg.m_cp() as i64;
    let matrix = match (victim, interferer) {
        (Stream::High(q), Stream::Low) => {
            // Slot q's window [qS + M_cp, qS + M_cp + M) sees the low-numerology
            // tone at phase k (t - N_cp) / N; the M-point DFT correlates against Q l s / N.
            let start = cfg.high_window_start(q) as i64;
            let scale = 1.0 / n as f64;
            DMatrix::from_fn(cfg.k_edge(), cfg.p_edge(), |r, c| {
                let l = cfg.high_bin(r) as i64;
                let k = cfg.low_bin(c) as i64;
                tw.inverse(k * (start - n_cp)) * geometric(&tw, k - q_ratio * l, cfg.m_fft()) * scale
            })
        }
        (Stream::Low, Stream::High(q)) => {
            // Only the part of slot q inside the low-numerology window counts.
            let slot_start = cfg.slot_start(q) as i64;
            let first = (cfg.slot_start(q)).max(cfg.low_window_start());
            let end = (cfg.slot_start(q) + cfg.slot_len()).min(cfg.low_window_start() + n);
            let count = end.saturating_sub(first);
            let first = first as i64;
            let scale = 1.0 / cfg.m_fft() as f64;
            DMatrix::from_fn(cfg.p_edge(), cfg.k_edge(), |c, r| {
                let k = cfg.low_bin(c) as i64;
                let l = cfg.high_bin(r) as i64;
                let d = q_ratio * l - k;
                let phase = d * first - q_ratio * l * (slot_start + m_cp) + k * n_cp;
                tw.inverse(phase) * geometric(&tw, d, count) * scale
            })
        }
        _ => {
            return Err(Error::SameNumerology(format!(
                "victim {victim}, interferer {interferer}"
            )))
        }
    };
    Ok(IniBlock {
        victim,
        interferer,
        matrix,
    })
}

/// Coupling block measured by unit-tone excitation through the OFDM chain.
///
/// Any pair of streams is accepted; same-stream pairs give the identity and
/// distinct high-numerology slots give zeros.
pub fn w_block_oracle(victim: Stream, interferer: Stream, cfg: &MixedConfig) -> Result<IniBlock> {
    victim.check(cfg)?;
    interferer.check(cfg)?;
    let rows = victim.width(cfg);
    let cols = interferer.width(cfg);
    let mut matrix = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        let response = unit_response(cfg, interferer.offset(cfg) + j)?;
        let off = victim.offset(cfg);
        for i in 0..rows {
            matrix[(i, j)] = response[off + i];
        }
    }
    Ok(IniBlock {
        victim,
        interferer,
        matrix,
    })
}

/// Demodulated active bins when a single unit symbol is sent at stacked index `j`.
fn unit_response(cfg: &MixedConfig, j: usize) -> Result<Vec<Complex64>> {
    let grid = SymbolGrid::unit(cfg, j)?;
    let frame = build_frame(&grid, cfg, None)?;
    demod_active(&frame, cfg)
}

/// The full coupling matrix measured column by column through the chain.
pub fn w_matrix_oracle(cfg: &MixedConfig) -> Result<DMatrix<Complex64>> {
    let dim = cfg.stacked_len();
    let mut w = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let response = unit_response(cfg, j)?;
        w.set_column(j, &DVector::from_vec(response));
    }
    Ok(w)
}

/// The full coupling matrix assembled from closed-form blocks.
pub fn w_matrix_closed_form(cfg: &MixedConfig) -> Result<DMatrix<Complex64>> {
    let dim = cfg.stacked_len();
    let mut w = DMatrix::identity(dim, dim);
    let p = cfg.p_edge();
    let k = cfg.k_edge();
    for q in 0..cfg.q_ratio() {
        let slot = Stream::High(q).offset(cfg);
        let down = w_block_closed_form(Stream::High(q), Stream::Low, cfg)?;
        w.view_mut((slot, 0), (k, p)).copy_from(&down.matrix);
        let up = w_block_closed_form(Stream::Low, Stream::High(q), cfg)?;
        w.view_mut((0, slot), (p, k)).copy_from(&up.matrix);
    }
    Ok(w)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Assembled coupling matrix with its cached inverse (the pre-equalizer).
#[derive(Debug, Clone)]
pub struct IniModel {
    cfg: MixedConfig,
    w: Arc<DMatrix<Complex64>>,
    inverse: Arc<DMatrix<Complex64>>,
    condition: f64,
}

impl IniModel {
    /// Closed-form assembly with the default conditioning guard.
    pub fn assemble(cfg: &MixedConfig) -> Result<Self> {
        Self::assemble_with_limit(cfg, DEFAULT_CONDITION_LIMIT)
    }

    pub fn assemble_with_limit(cfg: &MixedConfig, condition_limit: f64) -> Result<Self> {
        Self::from_matrix(cfg, w_matrix_closed_form(cfg)?, condition_limit)
    }

    /// Model with every coupling block forced to zero: `W = I`.
    pub fn identity(cfg: &MixedConfig) -> Self {
        let dim = cfg.stacked_len();
        let eye = Arc::new(DMatrix::identity(dim, dim));
        IniModel {
            cfg: *cfg,
            w: eye.clone(),
            inverse: eye,
            condition: 1.0,
        }
    }

    /// Inverts `w` with LU and partial pivoting; rejects it when the
    /// 1-norm condition number exceeds `condition_limit`.
    pub fn from_matrix(cfg: &MixedConfig, w: DMatrix<Complex64>, condition_limit: f64) -> Result<Self> {
        let dim = cfg.stacked_len();
        if w.nrows() != dim || w.ncols() != dim {
            return Err(Error::dim("coupling matrix order", dim, w.nrows().max(w.ncols())));
        }
        let inverse = w.clone().lu().try_inverse().ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
            limit: condition_limit,
        })?;
        let condition = one_norm(&w) * one_norm(&inverse);
        if !condition.is_finite() || condition > condition_limit {
            return Err(Error::IllConditioned {
                condition,
                limit: condition_limit,
            });
        }
        Ok(IniModel {
            cfg: *cfg,
            w: Arc::new(w),
            inverse: Arc::new(inverse),
            condition,
        })
    }

    pub fn config(&self) -> &MixedConfig {
        &self.cfg
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    /// The pre-equalization matrix `W^-1`.
    pub fn inverse(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    /// 1-norm condition number `||W||_1 ||W^-1||_1`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Copy of the block coupling `interferer` into `victim`.
    pub fn block(&self, victim: Stream, interferer: Stream) -> Result<IniBlock> {
        victim.check(&self.cfg)?;
        interferer.check(&self.cfg)?;
        let matrix = self
            .w
            .view(
                (victim.offset(&self.cfg), interferer.offset(&self.cfg)),
                (victim.width(&self.cfg), interferer.width(&self.cfg)),
            )
            .into_owned();
        Ok(IniBlock {
            victim,
            interferer,
            matrix,
        })
    }

    /// `max |W W^-1 - I|`.
    pub fn inversion_residual(&self) -> f64 {
        let dim = self.cfg.stacked_len();
        max_abs(&(&*self.w * &*self.inverse - DMatrix::identity(dim, dim)))
    }

    fn check_len(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.cfg.stacked_len() {
            return Err(Error::dim("stacked symbol vector", self.cfg.stacked_len(), x.len()));
        }
        Ok(())
    }

    /// `W^-1 x` for a stacked vector.
    pub fn pre_equalize_stacked(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x)?;
        Ok((&*self.inverse * DVector::from_column_slice(x)).data.into())
    }

    /// `W x`: what the demodulator returns for a noiseless frame carrying `x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x)?;
        Ok((&*self.w * DVector::from_column_slice(x)).data.into())
    }

    pub fn pre_equalize(&self, grid: &SymbolGrid) -> Result<SymbolGrid> {
        grid.check(&self.cfg)?;
        SymbolGrid::from_stacked(&self.pre_equalize_stacked(&grid.stacked())?, &self.cfg)
    }
}

/// Closed-form assembly of the coupling matrix and its inverse.
pub fn assemble_w(cfg: &MixedConfig) -> Result<IniModel> {
    IniModel::assemble(cfg)
}

pub fn pre_equalize(grid: &SymbolGrid, model: &IniModel) -> Result<SymbolGrid> {
    model.pre_equalize(grid)
}

/// Demodulated minus intended symbols for a noiseless frame, stacked order.
///
/// The frame is pre-equalized when `model` is given; without it the result
/// equals `(W - I) X`.
pub fn residual_ini(grid: &SymbolGrid, cfg: &MixedConfig, model: Option<&IniModel>) -> Result<Vec<Complex64>> {
    if let Some(m) = model {
        if m.config() != cfg {
            return Err(Error::InvalidArgument(
                "pre-equalizer was built for a different configuration".into(),
            ));
        }
    }
    let frame = build_frame(grid, cfg, model)?;
    let got = demod_active(&frame, cfg)?;
    Ok(got.iter().zip(grid.stacked()).map(|(r, x)| r - x).collect())
}
