//! Coupled-wave model of bid/ask price formation.
//!
//! Bid and ask prices are the two eigenvalues of a stochastic Hermitian 2×2
//! price operator. The execution side of each trade is chosen from the
//! amplitudes of a two-level state vector that is propagated exactly between
//! trades. The crate provides:
//!
//! * [`operator`]: the price operator and its eigen-decomposition,
//! * [`model`]: per-step random operator elements,
//! * [`wave`]: amplitude propagation, phase scrambling and execution imbalance,
//! * [`market`]: the trade engine, crash scenario, Q(I) and multilevel prices,
//! * [`statistics`]: the analytic spread law, Bessel I₀, KS measures,
//! * [`calibration`]: maximum-likelihood fitting and CSV/OHLC ingestion,
//! * [`io`] and [`cli`]: run configuration, file formats and the `qcw` driver.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod io;
pub mod market;
pub mod model;
pub mod operator;
pub mod optimize;
pub mod rng;
pub mod statistics;
pub mod wave;

pub use error::{Error, Result};
pub use market::{PathPoint, PathSeries, PostTrade, Side, SimConfig, SimMode};
pub use model::{ElementDraw, ModelParams};
pub use operator::{eigenprices, eigenvectors, PriceLevels, PriceOperator2};
pub use statistics::{Histogram, SpreadLaw};
pub use wave::StateVector;

/// Tool version embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
