//! Declarative Monte Carlo experiments: verification, BER sweeps, PAPR
//! statistics and pre-equalizer export.
//!
//! Every random draw comes from an [`RngStream`] keyed by the run seed, an
//! experiment id and the frame index, and per-frame results are integer
//! counts summed in batch order. Outputs are therefore identical for a given
//! configuration and seed regardless of the thread count.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, Purpose, RngStream};
use crate::config::{FrameSettings, MixedConfig};
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::ini::{
    max_abs, residual_ini, w_block_closed_form, w_block_oracle, w_matrix_oracle, IniModel,
    DEFAULT_CONDITION_LIMIT,
};
use crate::io;
use crate::metrics::{
    ccdf, evm_db, level_at_ccdf, noise_variance_for_ebn0, papr_db_samples, theoretical_ber,
    BerPoint, PaprCurve,
};
use crate::ofdm::{EdgeTransceiver, Stream, TimeFrame};
use crate::qam::{label_errors, Constellation, QamOrder};

/// Frames simulated between stopping-rule checks.
const BATCH_FRAMES: u64 = 64;

/// Which transmitter arms a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreEqMode {
    On,
    Off,
    Both,
}

impl PreEqMode {
    /// Arms in output order, `true` meaning pre-equalized.
    pub fn arms(self) -> Vec<bool> {
        match self {
            PreEqMode::On => vec![true],
            PreEqMode::Off => vec![false],
            PreEqMode::Both => vec![true, false],
        }
    }
}

fn default_channel() -> ChannelModel {
    ChannelModel::RayleighBlock
}
fn default_grid() -> Vec<f64> {
    (0..=8).map(|i| f64::from(i) * 5.0).collect()
}
fn default_min_bits() -> u64 {
    100_000
}
fn default_max_errors() -> u64 {
    200
}
fn default_budget() -> u64 {
    10_000_000
}
fn default_papr_frames() -> usize {
    10_000
}
fn default_seed() -> u64 {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}
fn default_preeq() -> PreEqMode {
    PreEqMode::Both
}

/// Everything a run needs, as read from a JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mu_low: u32,
    pub mu_high: u32,
    pub n_fft: usize,
    pub n_cp: usize,
    pub p_edge: usize,
    pub k_edge: usize,
    pub qam_order: u32,
    #[serde(default = "default_channel")]
    pub channel: ChannelModel,
    #[serde(default = "default_grid")]
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_min_bits")]
    pub min_bits: u64,
    #[serde(default = "default_max_errors")]
    pub max_bit_errors: u64,
    #[serde(default = "default_budget")]
    pub bit_budget: u64,
    #[serde(default = "default_papr_frames")]
    pub papr_frames: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default = "default_preeq")]
    pub preeq: PreEqMode,
    /// Replace the coupling matrix by the identity (diagnostic hook).
    #[serde(default)]
    pub zero_coupling: bool,
}

impl ExperimentSpec {
    /// 256/128-point transforms, 18/9 prefixes, P = 96, K = 48, 256-QAM, block Rayleigh.
    pub fn nr_reference() -> Self {
        ExperimentSpec {
            mu_low: 0,
            mu_high: 1,
            n_fft: 256,
            n_cp: 18,
            p_edge: 96,
            k_edge: 48,
            qam_order: 256,
            channel: default_channel(),
            ebn0_db: default_grid(),
            min_bits: default_min_bits(),
            max_bit_errors: default_max_errors(),
            bit_budget: default_budget(),
            papr_frames: default_papr_frames(),
            seed: default_seed(),
            out_dir: default_out(),
            preeq: default_preeq(),
            zero_coupling: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn frame_settings(&self) -> FrameSettings {
        FrameSettings {
            mu_low: self.mu_low,
            mu_high: self.mu_high,
            n_fft: self.n_fft,
            n_cp: self.n_cp,
            p_edge: self.p_edge,
            k_edge: self.k_edge,
            qam_order: self.qam_order,
        }
    }

    /// Checks the whole spec and resolves the frame configuration.
    pub fn validate(&self) -> Result<(MixedConfig, QamOrder)> {
        let resolved = self.frame_settings().resolve()?;
        if self.ebn0_db.is_empty() {
            return Err(Error::Config("ebn0_db grid is empty".into()));
        }
        if let Some(bad) = self.ebn0_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("ebn0_db contains non-finite value {bad}")));
        }
        if self.min_bits < 10_000 {
            return Err(Error::Config(format!(
                "min_bits = {} is below the 10000-bit floor",
                self.min_bits
            )));
        }
        if self.max_bit_errors == 0 {
            return Err(Error::Config("max_bit_errors must be positive".into()));
        }
        if self.bit_budget < self.min_bits {
            return Err(Error::Config(format!(
                "bit_budget = {} is below min_bits = {}",
                self.bit_budget, self.min_bits
            )));
        }
        if self.papr_frames == 0 {
            return Err(Error::Config("papr_frames must be positive".into()));
        }
        Ok(resolved)
    }
}

/// Validated spec plus the lazily built pre-equalizer and worker pool.
pub struct Session {
    spec: ExperimentSpec,
    cfg: MixedConfig,
    order: QamOrder,
    model: OnceLock<IniModel>,
    models_built: AtomicUsize,
    pool: rayon::ThreadPool,
}

impl Session {
    /// `threads = None` uses rayon's default; `Some(1)` runs single-threaded.
    pub fn new(spec: ExperimentSpec, threads: Option<usize>) -> Result<Self> {
        let (cfg, order) = spec.validate()?;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(Error::Config("thread count must be positive".into()));
            }
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(Session {
            spec,
            cfg,
            order,
            model: OnceLock::new(),
            models_built: AtomicUsize::new(0),
            pool,
        })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn config(&self) -> &MixedConfig {
        &self.cfg
    }

    pub fn order(&self) -> QamOrder {
        self.order
    }

    /// Pre-equalizer for this configuration, built on first use.
    pub fn model(&self) -> Result<&IniModel> {
        if let Some(m) = self.model.get() {
            return Ok(m);
        }
        let built = if self.spec.zero_coupling {
            IniModel::identity(&self.cfg)
        } else {
            IniModel::assemble(&self.cfg)?
        };
        self.models_built.fetch_add(1, Ordering::Relaxed);
        Ok(self.model.get_or_init(|| built))
    }

    /// How many times the pre-equalizer has been constructed.
    pub fn models_built(&self) -> usize {
        self.models_built.load(Ordering::Relaxed)
    }
}

// ---------------------------------------------------------------------------
// verify

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub limit: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported for information only.
    Info,
    Skipped,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, limit: f64) -> Self {
        let status = if measured <= limit {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Check {
            name,
            measured,
            limit,
            status,
        }
    }

    fn info(name: &'static str, measured: f64) -> Self {
        Check {
            name,
            measured,
            limit: f64::NAN,
            status: CheckStatus::Info,
        }
    }

    fn skipped(name: &'static str) -> Self {
        Check {
            name,
            measured: f64::NAN,
            limit: f64::NAN,
            status: CheckStatus::Skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Plain-text table, one check per line.
    pub fn render(&self, cfg: &MixedConfig) -> String {
        let mut s = format!(
            "verify: N={} M={} Q={} N_cp={} M_cp={} P={} K={}\n",
            cfg.n_fft(),
            cfg.m_fft(),
            cfg.q_ratio(),
            cfg.n_cp(),
            cfg.m_cp(),
            cfg.p_edge(),
            cfg.k_edge()
        );
        s.push_str(&format!("{:<34} {:>14} {:>12}  {}\n", "check", "measured", "limit", "status"));
        for c in &self.checks {
            let fmt = |v: f64| if v.is_nan() { "-".to_string() } else { format!("{v:.3e}") };
            let status = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Info => "info",
                CheckStatus::Skipped => "skipped",
            };
            s.push_str(&format!(
                "{:<34} {:>14} {:>12}  {}\n",
                c.name,
                fmt(c.measured),
                fmt(c.limit),
                status
            ));
        }
        s.push_str(if self.passed() { "result: PASS\n" } else { "result: FAIL\n" });
        s
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Runs the full invariant suite for the session's configuration.
pub fn run_verify(session: &Session) -> Result<VerifyReport> {
    let cfg = session.config();
    let model = session.model()?;
    let dim = cfg.stacked_len();
    let eye = DMatrix::<Complex64>::identity(dim, dim);
    let mut checks = vec![Check::info("max |W - I|", max_abs(&(model.matrix() - &eye)))];
    checks.push(Check::info("condition number (1-norm)", model.condition()));
    checks.push(Check::at_most(
        "condition below guard",
        model.condition(),
        DEFAULT_CONDITION_LIMIT,
    ));
    checks.push(Check::at_most("inversion residual", model.inversion_residual(), 1e-10));
    checks.push(Check::at_most("model block structure", model_structure_error(model), 1e-12));

    let chain_checks = [
        "closed form vs oracle",
        "oracle block structure",
        "assembled W vs oracle",
        "pre-equalized residual",
        "pre-equalized EVM (dB)",
        "plain residual vs (W - I) X",
        "residual linearity",
    ];
    if session.spec().zero_coupling {
        checks.extend(chain_checks.iter().map(|n| Check::skipped(n)));
        return Ok(VerifyReport { checks });
    }

    let mut worst = 0.0f64;
    for q in 0..cfg.q_ratio() {
        for (v, i) in [(Stream::High(q), Stream::Low), (Stream::Low, Stream::High(q))] {
            let a = w_block_closed_form(v, i, cfg)?;
            let b = w_block_oracle(v, i, cfg)?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    checks.push(Check::at_most(chain_checks[0], worst, 1e-9));

    let oracle = w_matrix_oracle(cfg)?;
    checks.push(Check::at_most(chain_checks[1], oracle_structure_error(&oracle, cfg), 1e-12));
    checks.push(Check::at_most(chain_checks[2], max_abs(&(&oracle - model.matrix())), 1e-9));

    let mut pre_res = 0.0f64;
    let mut worst_evm = f64::NEG_INFINITY;
    let mut plain_res = 0.0f64;
    let mut lin = 0.0f64;
    let constellation = Constellation::new(session.order());
    for trial in 0..16u64 {
        let x = random_grid(session, &constellation, u64::MAX, trial);
        let y = random_grid(session, &constellation, u64::MAX - 1, trial);
        let r = residual_ini(&x, cfg, Some(model))?;
        pre_res = pre_res.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let xs = x.stacked();
        let received: Vec<Complex64> = r.iter().zip(&xs).map(|(a, b)| a + b).collect();
        worst_evm = worst_evm.max(evm_db(&received, &xs)?);

        let plain = residual_ini(&x, cfg, None)?;
        let predicted: Vec<Complex64> =
            model.apply(&xs)?.iter().zip(&xs).map(|(a, b)| a - b).collect();
        plain_res = plain_res.max(max_diff(&plain, &predicted));

        let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-0.2, 0.4));
        let ys = y.stacked();
        let combo: Vec<Complex64> = xs.iter().zip(&ys).map(|(u, v)| a * u + b * v).collect();
        let lhs = residual_ini(&SymbolGrid::from_stacked(&combo, cfg)?, cfg, None)?;
        let ry = residual_ini(&y, cfg, None)?;
        let rhs: Vec<Complex64> = plain.iter().zip(&ry).map(|(u, v)| a * u + b * v).collect();
        lin = lin.max(max_diff(&lhs, &rhs));
    }
    checks.push(Check::at_most(chain_checks[3], pre_res, 1e-9));
    checks.push(Check::at_most(chain_checks[4], worst_evm, -180.0));
    checks.push(Check::at_most(chain_checks[5], plain_res, 1e-10));
    checks.push(Check::at_most(chain_checks[6], lin, 1e-10));
    Ok(VerifyReport { checks })
}

/// Deviation of the assembled matrix from identity diagonal blocks and zero
/// inter-slot blocks.
fn model_structure_error(model: &IniModel) -> f64 {
    block_structure_error(model.matrix(), model.config())
}

fn oracle_structure_error(w: &DMatrix<Complex64>, cfg: &MixedConfig) -> f64 {
    block_structure_error(w, cfg)
}

fn block_structure_error(w: &DMatrix<Complex64>, cfg: &MixedConfig) -> f64 {
    let mut worst = 0.0f64;
    let streams = Stream::all(cfg);
    for &v in &streams {
        for &i in &streams {
            let same = v == i;
            let both_high = !v.is_low() && !i.is_low();
            if !(same || both_high) {
                continue;
            }
            let block = w.view((v.offset(cfg), i.offset(cfg)), (v.width(cfg), i.width(cfg)));
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    let target = if same && r == c { 1.0 } else { 0.0 };
                    worst = worst.max((block[(r, c)] - Complex64::new(target, 0.0)).norm());
                }
            }
        }
    }
    worst
}

fn random_labels(session: &Session, experiment: u64, frame: u64) -> Vec<usize> {
    let mut rng = RngStream::new(session.spec().seed, experiment, frame, Purpose::Bits);
    let order = session.order().order() as usize;
    (0..session.config().stacked_len())
        .map(|_| rng.random_range(0..order))
        .collect()
}

fn random_grid(session: &Session, constellation: &Constellation, experiment: u64, frame: u64) -> SymbolGrid {
    let stacked: Vec<Complex64> = random_labels(session, experiment, frame)
        .into_iter()
        .map(|l| constellation.point(l))
        .collect();
    SymbolGrid::from_stacked(&stacked, session.config()).expect("stacked length")
}

// ---------------------------------------------------------------------------
// BER

/// One row of the BER result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub experiment: String,
    pub numerology: String,
    pub qam_order: u32,
    pub channel: String,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci95: f64,
}

impl BerRow {
    pub fn is_preeq(&self) -> bool {
        self.experiment == "ber_preeq"
    }
}

/// Which numerology a BER point measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measured {
    Low,
    /// All `Q` slots pooled.
    High,
}

impl Measured {
    fn stream(self) -> Stream {
        match self {
            Measured::Low => Stream::Low,
            Measured::High => Stream::High(0),
        }
    }

    fn range(self, cfg: &MixedConfig) -> std::ops::Range<usize> {
        match self {
            Measured::Low => 0..cfg.p_edge(),
            Measured::High => cfg.p_edge()..cfg.stacked_len(),
        }
    }

    pub fn label(self, cfg: &MixedConfig) -> String {
        match self {
            Measured::Low => format!("mu{}", cfg.mu_low()),
            Measured::High => format!("mu{}", cfg.mu_high()),
        }
    }
}

fn experiment_id(preeq: bool, measured: Measured, point: usize) -> u64 {
    let arm = u64::from(preeq);
    let num = match measured {
        Measured::Low => 0,
        Measured::High => 1,
    };
    (arm << 40) | (num << 32) | point as u64
}

/// Bits and bit errors of one simulated frame.
#[allow(clippy::too_many_arguments)]
fn simulate_frame(
    session: &Session,
    chain: &EdgeTransceiver,
    constellation: &Constellation,
    preeq: Option<&IniModel>,
    measured: Measured,
    noise_variance: f64,
    experiment: u64,
    frame: u64,
) -> Result<(u64, u64)> {
    let cfg = session.config();
    let order = session.order();
    let seed = session.spec().seed;
    let labels = random_labels(session, experiment, frame);
    let x: Vec<Complex64> = labels.iter().map(|&l| constellation.point(l)).collect();
    let tx = match preeq {
        Some(m) => m.pre_equalize_stacked(&x)?,
        None => x,
    };
    let mut signal = chain.synthesize(&tx)?;
    let mut gain = Complex64::new(1.0, 0.0);
    if session.spec().channel == ChannelModel::RayleighBlock {
        let mut fade_rng = RngStream::new(seed, experiment, frame, Purpose::Fade);
        let (faded, fade) = crate::channel::rayleigh_block(&signal, &mut fade_rng);
        signal = faded;
        gain = fade.gain;
    }
    let mut noise_rng = RngStream::new(seed, experiment, frame, Purpose::Noise);
    let received = crate::channel::awgn(&signal, noise_variance, &mut noise_rng)?;
    let demod = chain.analyze(&received)?;
    let eq = crate::channel::one_tap_equalize(&demod, crate::channel::FadeRealization { gain })?;
    let range = measured.range(cfg);
    let errors: u64 = range
        .clone()
        .map(|i| u64::from(label_errors(eq[i], labels[i], order)))
        .sum();
    Ok((range.len() as u64 * order.bits_per_symbol() as u64, errors))
}

/// A BER point together with its per-frame error spread.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub point: BerPoint,
    pub frames: u64,
    /// Sum over frames of the squared per-frame error count.
    pub error_sq_sum: u128,
}

impl PointStats {
    /// Standard error of the BER estimate from the spread of per-frame error
    /// counts. Unlike the binomial form it accounts for errors sharing a fade.
    pub fn cluster_sigma(&self) -> f64 {
        let n = self.frames as f64;
        if self.frames < 2 {
            return f64::INFINITY;
        }
        let bits_per_frame = self.point.bits as f64 / n;
        let mean = self.point.errors as f64 / n;
        let var = (self.error_sq_sum as f64 - n * mean * mean) / (n - 1.0);
        (var.max(0.0) / n).sqrt() / bits_per_frame
    }
}

/// Simulates one `(arm, numerology, Eb/N0)` point until the stopping rule fires.
///
/// Frames are processed in batches of 64; the run stops after the first batch
/// at which `bits >= min_bits` and `errors >= max_bit_errors`, or once
/// `bits >= bit_budget`.
pub fn simulate_point(
    session: &Session,
    chain: &EdgeTransceiver,
    preeq: bool,
    measured: Measured,
    point: usize,
    ebn0_db: f64,
) -> Result<BerPoint> {
    Ok(simulate_point_stats(session, chain, preeq, measured, point, ebn0_db)?.point)
}

/// [`simulate_point`] with per-frame statistics.
pub fn simulate_point_stats(
    session: &Session,
    chain: &EdgeTransceiver,
    preeq: bool,
    measured: Measured,
    point: usize,
    ebn0_db: f64,
) -> Result<PointStats> {
    let spec = session.spec();
    let cfg = session.config();
    let model = if preeq { Some(session.model()?) } else { None };
    let constellation = Constellation::new(session.order());
    let noise_variance = noise_variance_for_ebn0(cfg, measured.stream(), session.order(), ebn0_db);
    let experiment = experiment_id(preeq, measured, point);
    let (mut bits, mut errors, mut error_sq_sum) = (0u64, 0u64, 0u128);
    let mut next = 0u64;
    loop {
        let batch: Vec<u64> = (next..next + BATCH_FRAMES).collect();
        next += BATCH_FRAMES;
        let results = session.pool.install(|| {
            batch
                .par_iter()
                .map(|&f| {
                    simulate_frame(
                        session,
                        chain,
                        &constellation,
                        model,
                        measured,
                        noise_variance,
                        experiment,
                        f,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (b, e) in results {
            bits += b;
            errors += e;
            error_sq_sum += u128::from(e) * u128::from(e);
        }
        let enough = bits >= spec.min_bits && errors >= spec.max_bit_errors;
        if enough || bits >= spec.bit_budget {
            break;
        }
    }
    Ok(PointStats {
        point: BerPoint {
            stream: measured.stream(),
            ebn0_db,
            bits,
            errors,
        },
        frames: next,
        error_sq_sum,
    })
}

/// Runs every arm, numerology and Eb/N0 point; `sink` sees each row as soon
/// as it is measured.
pub fn run_ber_sweep(
    session: &Session,
    arms: &[bool],
    mut sink: impl FnMut(&BerRow) -> Result<()>,
) -> Result<Vec<BerRow>> {
    let cfg = session.config();
    let chain = EdgeTransceiver::new(cfg);
    let mut rows = Vec::new();
    for &preeq in arms {
        for measured in [Measured::Low, Measured::High] {
            for (i, &db) in session.spec().ebn0_db.iter().enumerate() {
                let p = simulate_point(session, &chain, preeq, measured, i, db)?;
                let row = BerRow {
                    experiment: if preeq { "ber_preeq" } else { "ber_plain" }.to_string(),
                    numerology: measured.label(cfg),
                    qam_order: session.order().order(),
                    channel: session.spec().channel.to_string(),
                    ebn0_db: db,
                    bits: p.bits,
                    errors: p.errors,
                    ber: p.ber(),
                    ci95: p.ci95(),
                };
                sink(&row)?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// PAPR

/// Paired PAPR samples of the pre-equalized and plain transmitters.
#[derive(Debug, Clone, PartialEq)]
pub struct PaprSamples {
    pub preeq_db: Vec<f64>,
    pub plain_db: Vec<f64>,
}

impl PaprSamples {
    /// `(pre-equalized, plain)` PAPR levels exceeded with probability `prob`.
    pub fn levels_at(&self, prob: f64) -> Result<(f64, f64)> {
        Ok((level_at_ccdf(&self.preeq_db, prob)?, level_at_ccdf(&self.plain_db, prob)?))
    }
}

/// PAPR of `frames` random frames, each sent both with and without pre-equalization.
pub fn papr_samples(session: &Session, frames: usize) -> Result<PaprSamples> {
    let cfg = session.config();
    let chain = EdgeTransceiver::new(cfg);
    let model = session.model()?;
    let constellation = Constellation::new(session.order());
    let experiment = 1 << 48;
    let pairs = session.pool.install(|| {
        (0..frames as u64)
            .into_par_iter()
            .map(|f| {
                let x: Vec<Complex64> = random_labels(session, experiment, f)
                    .into_iter()
                    .map(|l| constellation.point(l))
                    .collect();
                let plain = chain.synthesize(&x)?;
                let pre = chain.synthesize(&model.pre_equalize_stacked(&x)?)?;
                Ok((papr_db_samples(&pre.samples)?, papr_db_samples(&plain.samples)?))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (preeq_db, plain_db) = pairs.into_iter().unzip();
    Ok(PaprSamples { preeq_db, plain_db })
}

/// Default threshold grid: 0 to 16 dB in 0.1 dB steps.
pub fn papr_thresholds() -> Vec<f64> {
    (0..=160).map(|i| f64::from(i) / 10.0).collect()
}

/// CCDF curve of explicit frames (used to inject known frames).
pub fn papr_curve_from_frames(frames: &[TimeFrame], thresholds_db: &[f64]) -> Result<PaprCurve> {
    let values = frames
        .iter()
        .map(|f| papr_db_samples(&f.samples))
        .collect::<Result<Vec<_>>>()?;
    ccdf(&values, thresholds_db)
}

#[derive(Debug, Serialize)]
struct PaprRow {
    threshold_db: f64,
    ccdf_preeq: f64,
    ccdf_plain: f64,
    frames: usize,
}

pub fn write_papr_csv<W: Write>(samples: &PaprSamples, thresholds_db: &[f64], out: W) -> Result<()> {
    let pre = ccdf(&samples.preeq_db, thresholds_db)?;
    let plain = ccdf(&samples.plain_db, thresholds_db)?;
    let mut w = csv::Writer::from_writer(out);
    for (i, &t) in thresholds_db.iter().enumerate() {
        w.serialize(PaprRow {
            threshold_db: t,
            ccdf_preeq: pre.ccdf[i],
            ccdf_plain: plain.ccdf[i],
            frames: pre.frames,
        })?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// commands writing to the output directory

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `verify_report.txt`; returns the report.
pub fn cmd_verify(session: &Session, out_dir: &Path) -> Result<VerifyReport> {
    let report = run_verify(session)?;
    let mut f = create(&out_dir.join("verify_report.txt"))?;
    f.write_all(report.render(session.config()).as_bytes())?;
    f.flush()?;
    Ok(report)
}

/// Writes `ber.csv`, `ber_theory.csv` and `plot_ber.py`.
pub fn cmd_ber_sweep(session: &Session, arms: &[bool], out_dir: &Path) -> Result<Vec<BerRow>> {
    let mut theory = csv::Writer::from_writer(create(&out_dir.join("ber_theory.csv"))?);
    theory.write_record(["qam_order", "channel", "ebn0_db", "ber_theory"])?;
    for &db in &session.spec().ebn0_db {
        let p = theoretical_ber(session.order(), db, session.spec().channel);
        theory.serialize((session.order().order(), session.spec().channel.as_str(), db, p))?;
    }
    theory.flush()?;

    let mut writer = csv::Writer::from_writer(create(&out_dir.join("ber.csv"))?);
    let rows = run_ber_sweep(session, arms, |row| {
        writer.serialize(row)?;
        // rows reach disk as they are measured, so an interrupted sweep keeps them
        writer.flush()?;
        Ok(())
    })?;
    writer.flush()?;
    fs::write(out_dir.join("plot_ber.py"), PLOT_BER)?;
    Ok(rows)
}

/// Writes `papr.csv` and `plot_papr.py`; returns the paired samples.
pub fn cmd_papr(session: &Session, out_dir: &Path) -> Result<PaprSamples> {
    let frames = session.spec().papr_frames;
    if frames < 1000 {
        return Err(Error::Config(format!(
            "papr_frames = {frames} is below the 1000-frame minimum"
        )));
    }
    let samples = papr_samples(session, frames)?;
    write_papr_csv(&samples, &papr_thresholds(), create(&out_dir.join("papr.csv"))?)?;
    fs::write(out_dir.join("plot_papr.py"), PLOT_PAPR)?;
    Ok(samples)
}

/// Header lines recorded with exported matrices.
pub fn matrix_header(model: &IniModel) -> Vec<(String, String)> {
    let c = model.config();
    vec![
        ("mu_low".into(), c.mu_low().to_string()),
        ("mu_high".into(), c.mu_high().to_string()),
        ("n_fft".into(), c.n_fft().to_string()),
        ("m_fft".into(), c.m_fft().to_string()),
        ("n_cp".into(), c.n_cp().to_string()),
        ("m_cp".into(), c.m_cp().to_string()),
        ("p_edge".into(), c.p_edge().to_string()),
        ("k_edge".into(), c.k_edge().to_string()),
        ("order".into(), c.stacked_len().to_string()),
        ("condition_1norm".into(), format!("{:e}", model.condition())),
    ]
}

/// Paths written by [`cmd_export_matrix`].
#[derive(Debug, Clone)]
pub struct ExportedMatrices {
    pub w_csv: PathBuf,
    pub w_bin: PathBuf,
    pub inverse_csv: PathBuf,
    pub inverse_bin: PathBuf,
    pub header: PathBuf,
}

/// Writes `W` and `W^-1` as CSV and binary plus a JSON header.
pub fn cmd_export_matrix(session: &Session, out_dir: &Path) -> Result<ExportedMatrices> {
    let model = session.model()?;
    let header = matrix_header(model);
    let paths = ExportedMatrices {
        w_csv: out_dir.join("w_ini.csv"),
        w_bin: out_dir.join("w_ini.bin"),
        inverse_csv: out_dir.join("w_ini_inverse.csv"),
        inverse_bin: out_dir.join("w_ini_inverse.bin"),
        header: out_dir.join("w_ini_header.json"),
    };
    for (m, csv_path, bin_path) in [
        (model.matrix(), &paths.w_csv, &paths.w_bin),
        (model.inverse(), &paths.inverse_csv, &paths.inverse_bin),
    ] {
        let mut f = create(csv_path)?;
        io::write_matrix_csv(m, &header, &mut f)?;
        f.flush()?;
        let mut f = create(bin_path)?;
        io::write_matrix_bin(m, &mut f)?;
        f.flush()?;
    }
    let json: serde_json::Map<String, serde_json::Value> = header
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect();
    fs::write(&paths.header, serde_json::to_string_pretty(&json)? + "\n")?;
    Ok(paths)
}

const PLOT_BER: &str = r#"#!/usr/bin/env python3
# BER versus Eb/N0 per numerology, simulated arms against the closed-form curve.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

here = sys.argv[1] if len(sys.argv) > 1 else "."
series = defaultdict(lambda: ([], []))
with open(f"{here}/ber.csv") as f:
    for row in csv.DictReader(f):
        key = (row["experiment"], row["numerology"])
        if float(row["ber"]) > 0:
            series[key][0].append(float(row["ebn0_db"]))
            series[key][1].append(float(row["ber"]))
theory = ([], [])
with open(f"{here}/ber_theory.csv") as f:
    for row in csv.DictReader(f):
        theory[0].append(float(row["ebn0_db"]))
        theory[1].append(float(row["ber_theory"]))

markers = {"ber_preeq": "o", "ber_plain": "s"}
plt.semilogy(theory[0], theory[1], "k-", label="theory (no INI)")
for (exp, num), (x, y) in sorted(series.items()):
    plt.semilogy(x, y, markers.get(exp, "x") + "--", label=f"{num} {exp}")
plt.xlabel("Eb/N0 (dB)")
plt.ylabel("BER")
plt.grid(True, which="both")
plt.legend()
plt.savefig(f"{here}/ber.png", dpi=150)
"#;

const PLOT_PAPR: &str = r#"#!/usr/bin/env python3
# PAPR CCDF of the pre-equalized and plain composite signals.
import csv
import sys

import matplotlib.pyplot as plt

here = sys.argv[1] if len(sys.argv) > 1 else "."
t, pre, plain = [], [], []
with open(f"{here}/papr.csv") as f:
    for row in csv.DictReader(f):
        t.append(float(row["threshold_db"]))
        pre.append(float(row["ccdf_preeq"]))
        plain.append(float(row["ccdf_plain"]))
plt.semilogy(t, pre, "o-", markevery=5, label="pre-equalized")
plt.semilogy(t, plain, "^-", markevery=5, label="plain")
plt.xlabel("PAPR threshold (dB)")
plt.ylabel("CCDF")
plt.ylim(1e-4, 1)
plt.grid(True, which="both")
plt.legend()
plt.savefig(f"{here}/papr.png", dpi=150)
"#;
