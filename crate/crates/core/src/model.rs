//! Stochastic price-operator elements.
//!
//! Each step the operator is rebuilt around the last trade price:
//!
//! ```text
//! s11 = s_trade + s_trade·σ·dz + ξ/2
//! s22 = s_trade + s_trade·σ·dz − ξ/2
//! s12 = κ/2
//! ```
//!
//! with `dz ~ N(0,1)`, `ξ ~ N(ξ0, ξ1)`, `κ ~ N(κ0, κ1)` drawn independently at
//! every step. The eigenprices then have mid `s_trade(1 + σ·dz)` and spread
//! `√(ξ² + |κ|²)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::PriceOperator2;
use crate::rng::{substream, Purpose};

/// Model parameters. `sigma` is a per-step relative volatility (the step
/// length is already folded into it); `tau`, `s0` and `dt` only enter the
/// amplitude dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub tau: f64,
    pub s0: f64,
    pub dt: f64,
    /// Apply a uniform random phase to κ.
    #[serde(default)]
    pub complex_kappa: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sigma: 0.0,
            xi0: 0.0,
            xi1: 0.0,
            kappa0: 0.0,
            kappa1: 0.0,
            tau: 1.0,
            s0: 1.0,
            dt: 1.0,
            complex_kappa: false,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("sigma", self.sigma),
            ("xi0", self.xi0),
            ("xi1", self.xi1),
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
            ("tau", self.tau),
            ("s0", self.s0),
            ("dt", self.dt),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("sigma", self.sigma), ("xi1", self.xi1), ("kappa1", self.kappa1)] {
            if v < 0.0 {
                return Err(Error::validation(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("tau", self.tau), ("s0", self.s0), ("dt", self.dt)] {
            if v <= 0.0 {
                return Err(Error::validation(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Random elements for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementDraw {
    pub dz: f64,
    pub xi: f64,
    pub kappa: Complex64,
}

impl ElementDraw {
    /// `√(ξ² + |κ|²)`.
    pub fn spread(&self) -> f64 {
        self.xi.hypot(self.kappa.norm())
    }
}

/// Independent streams for `dz`, `ξ` and `κ` belonging to one path.
#[derive(Debug, Clone)]
pub struct ElementStreams {
    dz: ChaCha8Rng,
    xi: ChaCha8Rng,
    kappa: ChaCha8Rng,
    kappa_phase: ChaCha8Rng,
}

impl ElementStreams {
    pub fn new(seed: u64, path: u64) -> Self {
        ElementStreams {
            dz: substream(seed, path, Purpose::Dz),
            xi: substream(seed, path, Purpose::Xi),
            kappa: substream(seed, path, Purpose::Kappa),
            kappa_phase: substream(seed, path, Purpose::KappaPhase),
        }
    }
}

/// Draws `dz`, `ξ ~ N(ξ0, ξ1)` and `κ ~ N(κ0, κ1)`.
pub fn draw_elements(params: &ModelParams, streams: &mut ElementStreams) -> ElementDraw {
    draw_elements_with_kappa_mean(params, params.kappa0, streams)
}

/// As [`draw_elements`] but with κ's mean replaced by `kappa_mean`
/// (imbalance coupling sets it to `c_I·I`).
pub fn draw_elements_with_kappa_mean(
    params: &ModelParams,
    kappa_mean: f64,
    streams: &mut ElementStreams,
) -> ElementDraw {
    let dz: f64 = streams.dz.sample(StandardNormal);
    let zx: f64 = streams.xi.sample(StandardNormal);
    let zk: f64 = streams.kappa.sample(StandardNormal);
    let kappa = kappa_mean + params.kappa1 * zk;
    let kappa = if params.complex_kappa {
        Complex64::from_polar(kappa, streams.kappa_phase.random::<f64>() * TAU)
    } else {
        Complex64::new(kappa, 0.0)
    };
    ElementDraw {
        dz,
        xi: params.xi0 + params.xi1 * zx,
        kappa,
    }
}

/// Operator for the next step, built around the last trade price.
pub fn step_operator(s_trade: f64, params: &ModelParams, draw: &ElementDraw) -> Result<PriceOperator2> {
    if !s_trade.is_finite() {
        return Err(Error::validation(format!("trade price must be finite, got {s_trade}")));
    }
    let common = s_trade + s_trade * params.sigma * draw.dz;
    let half_xi = 0.5 * draw.xi;
    PriceOperator2::new(common + half_xi, common - half_xi, draw.kappa * 0.5)
}
