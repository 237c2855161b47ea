//! Trade engine: level selection, path simulation, the imbalance-coupled
//! (crash) scenario, Q(I) estimation and multilevel effective prices.
//!
//! One step is one trade opportunity of duration `dt`:
//!
//! 1. draw `dz`, `ξ`, `κ` (in coupled mode κ's mean is `c_I·I`),
//! 2. build the operator around the last trade price and take its eigenprices,
//! 3. propagate the amplitudes over `dt`,
//! 4. record the imbalance, then pick the trade side from `|ψ|²`,
//! 5. scramble the relative phase or collapse onto the executed level.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{draw_elements_with_kappa_mean, step_operator, ElementDraw, ElementStreams, ModelParams};
use crate::operator::{eigenprices, PriceLevels};
use crate::rng::{substream, Purpose};
use crate::statistics::{BinCounts, Histogram, Moments};
use crate::wave::{imbalance, propagate, randomize_phase, StateVector, RENORM_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// κ ~ N(κ0, κ1).
    Balanced,
    /// κ = c_I·I + η with η ~ N(0, κ1).
    ImbalanceCoupled,
}

/// What happens to the amplitudes after a trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostTrade {
    PhaseScramble,
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_steps: usize,
    pub initial_price: f64,
    pub initial_state: StateVector,
    pub mode: SimMode,
    /// Imbalance coupling coefficient (price units); used in coupled mode only.
    pub c_i: f64,
    pub post_trade: PostTrade,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_steps: 1000,
            initial_price: 100.0,
            initial_state: StateVector::balanced(),
            mode: SimMode::Balanced,
            c_i: 0.0,
            post_trade: PostTrade::PhaseScramble,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(Error::validation("n_steps must be >= 1"));
        }
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(Error::validation(format!(
                "initial_price must be positive, got {}",
                self.initial_price
            )));
        }
        if !self.c_i.is_finite() {
            return Err(Error::validation("c_i must be finite"));
        }
        StateVector::new(self.initial_state.psi_ask(), self.initial_state.psi_bid())?;
        Ok(())
    }
}

/// One recorded step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: u64,
    pub s_bid: f64,
    pub s_ask: f64,
    pub s_trade: f64,
    pub side: Side,
    /// Execution imbalance after propagation, before the post-trade rule.
    #[serde(rename = "I")]
    pub imbalance: f64,
}

/// Time-ordered path together with the element draws that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSeries {
    pub points: Vec<PathPoint>,
    pub draws: Vec<ElementDraw>,
}

impl PathSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of trades executed at the bid.
    pub fn bid_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.side == Side::Bid).count() as f64 / self.points.len() as f64
    }

    pub fn imbalances(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.imbalance)
    }

    /// Largest `|(s_ask − s_bid) − √(ξ² + |κ|²)|` over the path.
    pub fn max_spread_residual(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.draws)
            .map(|(p, d)| ((p.s_ask - p.s_bid) - d.spread()).abs())
            .fold(0.0, f64::max)
    }
}

/// Ask with probability `|ψ_ask|²`, otherwise bid.
pub fn select_trade<R: Rng + ?Sized>(levels: &PriceLevels, state: &StateVector, rng: &mut R) -> (f64, Side) {
    let p_ask = state.psi_ask().norm_sqr() / state.norm_sqr();
    if rng.random::<f64>() < p_ask {
        (levels.s_ask, Side::Ask)
    } else {
        (levels.s_bid, Side::Bid)
    }
}

/// Simulates path number `path` of a run; path 0 is what [`simulate_path`] returns.
pub fn simulate_path_indexed(config: &SimConfig, params: &ModelParams, path: u64) -> Result<PathSeries> {
    config.validate()?;
    params.validate()?;
    let mut elements = ElementStreams::new(config.seed, path);
    let mut select: ChaCha8Rng = substream(config.seed, path, Purpose::Select);
    let mut phase: ChaCha8Rng = substream(config.seed, path, Purpose::Phase);

    let mut s_trade = config.initial_price;
    let mut state = config.initial_state;
    let mut points = Vec::with_capacity(config.n_steps);
    let mut draws = Vec::with_capacity(config.n_steps);
    for t in 0..config.n_steps {
        let kappa_mean = match config.mode {
            SimMode::Balanced => params.kappa0,
            SimMode::ImbalanceCoupled => config.c_i * imbalance(&state),
        };
        let draw = draw_elements_with_kappa_mean(params, kappa_mean, &mut elements);
        let levels = eigenprices(&step_operator(s_trade, params, &draw)?);
        state = propagate(&state, draw.xi, draw.kappa, levels.s_mid, params).renormalized(RENORM_THRESHOLD);
        let i_now = imbalance(&state);
        let (price, side) = select_trade(&levels, &state, &mut select);
        if !(price > 0.0) {
            return Err(Error::NonPositivePrice { step: t, price });
        }
        state = match config.post_trade {
            PostTrade::PhaseScramble => randomize_phase(&state, &mut phase),
            PostTrade::Collapse => match side {
                Side::Ask => StateVector::ask_basis(),
                Side::Bid => StateVector::bid_basis(),
            },
        };
        points.push(PathPoint {
            t: t as u64,
            s_bid: levels.s_bid,
            s_ask: levels.s_ask,
            s_trade: price,
            side,
            imbalance: i_now,
        });
        draws.push(draw);
        s_trade = price;
    }
    Ok(PathSeries { points, draws })
}

pub fn simulate_path(config: &SimConfig, params: &ModelParams) -> Result<PathSeries> {
    simulate_path_indexed(config, params, 0)
}

/// `n_paths` independent paths on disjoint streams, in path order.
pub fn simulate_ensemble(config: &SimConfig, params: &ModelParams, n_paths: usize) -> Result<Vec<PathSeries>> {
    if n_paths == 0 {
        return Err(Error::validation("ensemble needs at least one path"));
    }
    config.validate()?;
    params.validate()?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|k| simulate_path_indexed(config, params, k))
        .collect()
}

/// Summary of a crash-scenario path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashSummary {
    pub bid_fraction: f64,
    /// `ln(final trade / initial price)`.
    pub net_log_change: f64,
    pub mean_imbalance: f64,
    pub q: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashRun {
    pub path: PathSeries,
    pub summary: CrashSummary,
}

/// Number of Q(I) bins in [`CrashSummary::q`].
pub const CRASH_Q_BINS: usize = 40;

/// Imbalance-coupled path with crash statistics.
pub fn simulate_crash(config: &SimConfig, params: &ModelParams) -> Result<CrashRun> {
    if config.mode != SimMode::ImbalanceCoupled {
        return Err(Error::validation("crash scenario requires mode = imbalance-coupled"));
    }
    let path = simulate_path(config, params)?;
    let last = path.points.last().expect("n_steps >= 1").s_trade;
    let mean_imbalance = path.imbalances().sum::<f64>() / path.len() as f64;
    let summary = CrashSummary {
        bid_fraction: path.bid_fraction(),
        net_log_change: (last / config.initial_price).ln(),
        mean_imbalance,
        q: q_of_i(std::slice::from_ref(&path), CRASH_Q_BINS)?,
    };
    Ok(CrashRun { path, summary })
}

/// Normalized histogram of recorded imbalances over `[−1, 1]`.
pub fn q_of_i(ensemble: &[PathSeries], bins: usize) -> Result<Histogram> {
    if ensemble.is_empty() || ensemble.iter().all(|p| p.is_empty()) {
        return Err(Error::validation("Q(I) needs at least one non-empty path"));
    }
    let partial: Vec<BinCounts> = ensemble
        .par_iter()
        .map(|p| BinCounts::from_samples(p.imbalances(), -1.0, 1.0, bins))
        .collect::<Result<_>>()?;
    let mut total = BinCounts::new(-1.0, 1.0, bins)?;
    for c in &partial {
        total.merge(c)?;
    }
    total.normalized()
}

/// Moments of the pooled imbalance samples.
pub fn imbalance_moments(ensemble: &[PathSeries]) -> Result<Moments> {
    let all: Vec<f64> = ensemble.iter().flat_map(|p| p.imbalances()).collect();
    Moments::from_samples(&all)
}

/// Resting order at one book level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookLevel {
    pub price: f64,
    pub size: f64,
}

/// Size-weighted prices of the top `n` levels on each side (best level first).
pub fn effective_levels(asks: &[BookLevel], bids: &[BookLevel], n: usize) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::validation("N must be >= 1"));
    }
    if asks.is_empty() {
        return Err(Error::validation("no ask: the ask side of the book is empty"));
    }
    if bids.is_empty() {
        return Err(Error::validation("no bid: the bid side of the book is empty"));
    }
    Ok((weighted_top(asks, n, "ask")?, weighted_top(bids, n, "bid")?))
}

fn weighted_top(levels: &[BookLevel], n: usize, side: &str) -> Result<f64> {
    let mut value = 0.0;
    let mut size = 0.0;
    for l in levels.iter().take(n) {
        if !(l.size.is_finite() && l.size > 0.0 && l.price.is_finite()) {
            return Err(Error::validation(format!(
                "{side} level at {} has invalid size {}",
                l.price, l.size
            )));
        }
        value += l.price * l.size;
        size += l.size;
    }
    Ok(value / size)
}
