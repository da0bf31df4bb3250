//! Mixed-numerology OFDM link simulation with inter-numerology interference
//! (INI) modelling and transmit-side pre-equalization.
//!
//! Two numerologies share one composite frame: a low-spacing symbol of
//! `N` samples and `Q` high-spacing symbols of `M = N / Q` samples, each with
//! its own cyclic prefix. Only the subcarriers at the mutual band edge are
//! modelled. [`ini::IniModel`] captures how the receiver of each numerology
//! sees the other's edge symbols and pre-inverts that coupling at the
//! transmitter.
//!
//! ```
//! use mixnum::{MixedConfig, IniModel, SymbolGrid, residual_ini};
//!
//! let cfg = MixedConfig::nr_reference();
//! let model = IniModel::assemble(&cfg).unwrap();
//! let x = SymbolGrid::unit(&cfg, 5).unwrap();
//! let r = residual_ini(&x, &cfg, Some(&model)).unwrap();
//! assert!(r.iter().all(|z| z.norm() < 1e-9));
//! ```

pub mod channel;
pub mod config;
mod error;
pub mod experiment;
pub mod grid;
pub mod ini;
pub mod io;
pub mod metrics;
pub mod ofdm;
pub mod qam;

pub use channel::{ChannelModel, FadeRealization, Purpose, RngStream};
pub use config::{FrameSettings, MixedConfig};
pub use error::{Error, Result};
pub use experiment::{ExperimentSpec, PreEqMode, Session};
pub use grid::SymbolGrid;
pub use ini::{residual_ini, IniBlock, IniModel};
pub use metrics::{theoretical_ber, BerPoint, PaprCurve};
pub use ofdm::{EdgeTransceiver, Stream, TimeFrame};
pub use qam::{qam_demodulate_hard, qam_modulate, Constellation, QamOrder};
