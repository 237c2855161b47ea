//! Two-level amplitude state and its exact propagation between trades.
//!
//! For piecewise-constant operator elements the evolution
//! `iτs₀ ∂ψ/∂t = Ŝψ` has the closed form
//!
//! ```text
//! U(t) = e^{−i s_mid t/(τ s₀)} [ cos φ − i sin φ · (ξ σz + Re κ σx − Im κ σy)/Δ ],
//! φ = Δ t / (2 τ s₀),  Δ = √(ξ² + |κ|²)
//! ```
//!
//! which is unitary, so probabilities are conserved up to rounding.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Tolerance on `|ψ_ask|² + |ψ_bid|² − 1` accepted by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Drift beyond which the simulation renormalizes the state.
pub const RENORM_THRESHOLD: f64 = 1e-12;

/// Complex amplitude pair `(ψ_ask, ψ_bid)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    psi_ask: Complex64,
    psi_bid: Complex64,
}

impl StateVector {
    /// Builds a state that must already be normalized within [`NORM_TOLERANCE`].
    pub fn new(psi_ask: Complex64, psi_bid: Complex64) -> Result<Self> {
        let s = StateVector { psi_ask, psi_bid };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation(format!(
                "state vector must be normalized, |psi|^2 = {n}"
            )));
        }
        Ok(s)
    }

    /// Builds a state from any non-zero pair by rescaling it to unit norm.
    pub fn normalized(psi_ask: Complex64, psi_bid: Complex64) -> Result<Self> {
        let n = psi_ask.norm().hypot(psi_bid.norm());
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::validation("state vector must be non-zero and finite"));
        }
        Ok(StateVector {
            psi_ask: psi_ask / n,
            psi_bid: psi_bid / n,
        })
    }

    pub(crate) fn from_parts_unchecked(psi_ask: Complex64, psi_bid: Complex64) -> Self {
        StateVector { psi_ask, psi_bid }
    }

    /// Real-amplitude state with the given execution imbalance.
    pub fn from_imbalance(imbalance: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&imbalance) {
            return Err(Error::validation(format!(
                "imbalance must lie in [-1, 1], got {imbalance}"
            )));
        }
        Ok(StateVector {
            psi_ask: Complex64::new((0.5 * (1.0 + imbalance)).sqrt(), 0.0),
            psi_bid: Complex64::new((0.5 * (1.0 - imbalance)).sqrt(), 0.0),
        })
    }

    /// `(1/√2, 1/√2)`: equal execution probabilities.
    pub fn balanced() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        StateVector {
            psi_ask: Complex64::new(r, 0.0),
            psi_bid: Complex64::new(r, 0.0),
        }
    }

    pub fn ask_basis() -> Self {
        StateVector {
            psi_ask: Complex64::new(1.0, 0.0),
            psi_bid: Complex64::new(0.0, 0.0),
        }
    }

    pub fn bid_basis() -> Self {
        StateVector {
            psi_ask: Complex64::new(0.0, 0.0),
            psi_bid: Complex64::new(1.0, 0.0),
        }
    }

    pub fn psi_ask(&self) -> Complex64 {
        self.psi_ask
    }

    pub fn psi_bid(&self) -> Complex64 {
        self.psi_bid
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi_ask.norm_sqr() + self.psi_bid.norm_sqr()
    }

    /// Rescales to unit norm when the drift exceeds `threshold`.
    pub fn renormalized(self, threshold: f64) -> Self {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > threshold {
            let r = n.sqrt();
            StateVector {
                psi_ask: self.psi_ask / r,
                psi_bid: self.psi_bid / r,
            }
        } else {
            self
        }
    }
}

/// Execution probabilities `(|ψ_ask|², |ψ_bid|²)`.
pub fn probabilities(state: &StateVector) -> (f64, f64) {
    (state.psi_ask.norm_sqr(), state.psi_bid.norm_sqr())
}

/// Execution imbalance `I = |ψ_ask|² − |ψ_bid|²`, in `[−1, 1]`.
pub fn imbalance(state: &StateVector) -> f64 {
    let (p_ask, p_bid) = probabilities(state);
    (p_ask - p_bid).clamp(-1.0, 1.0)
}

/// Propagation matrix for one interval of constant operator elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    m: [[Complex64; 2]; 2],
}

impl Propagator {
    /// Propagator over `params.dt` for intrinsic element `xi`, coupling `kappa`
    /// (`s12 = κ/2`) and mid price `s_mid`.
    pub fn new(xi: f64, kappa: impl Into<Complex64>, s_mid: f64, params: &ModelParams) -> Self {
        Self::over(xi, kappa.into(), s_mid, params.tau * params.s0, params.dt)
    }

    /// Propagator over an arbitrary duration `t` with time scale `tau_s0 = τ·s₀`.
    pub fn over(xi: f64, kappa: Complex64, s_mid: f64, tau_s0: f64, t: f64) -> Self {
        let delta = xi.hypot(kappa.norm());
        let rate = t / (2.0 * tau_s0);
        let phi = delta * rate;
        // sin(φ)/Δ without dividing by Δ = 0
        let sin_over_delta = if phi.abs() < 1e-8 {
            rate * (1.0 - phi * phi / 6.0)
        } else {
            phi.sin() / delta
        };
        let cos = phi.cos();
        let i = Complex64::i();
        let global = Complex64::from_polar(1.0, -s_mid * t / tau_s0);
        let m = [
            [
                global * Complex64::new(cos, -xi * sin_over_delta),
                global * (-i * kappa * sin_over_delta),
            ],
            [
                global * (-i * kappa.conj() * sin_over_delta),
                global * Complex64::new(cos, xi * sin_over_delta),
            ],
        ];
        Propagator { m }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    /// Applies the propagator. No renormalization is performed.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        let m = &self.m;
        StateVector {
            psi_ask: m[0][0] * state.psi_ask + m[0][1] * state.psi_bid,
            psi_bid: m[1][0] * state.psi_ask + m[1][1] * state.psi_bid,
        }
    }
}

/// Exact evolution of `state` over one step of duration `params.dt`.
pub fn propagate(
    state: &StateVector,
    xi: f64,
    kappa: impl Into<Complex64>,
    s_mid: f64,
    params: &ModelParams,
) -> StateVector {
    Propagator::new(xi, kappa, s_mid, params).apply(state)
}

/// Shifts the relative phase of the amplitudes by a uniform draw on `[0, 2π)`.
pub fn randomize_phase<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> StateVector {
    let theta = rng.random::<f64>() * TAU;
    StateVector {
        psi_ask: state.psi_ask * Complex64::from_polar(1.0, theta),
        psi_bid: state.psi_bid,
    }
}

/// Angular frequency of the amplitude oscillation for a constant spread.
pub fn oscillation_frequency(delta: f64, params: &ModelParams) -> f64 {
    delta / (2.0 * params.tau * params.s0)
}
