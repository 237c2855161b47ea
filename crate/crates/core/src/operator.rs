//! The Hermitian 2×2 price operator and its eigen-decomposition.
//!
//! The operator acts on the amplitude pair `(ψ_ask, ψ_bid)`:
//!
//! ```text
//! | s11   s12 |
//! | s12*  s22 |
//! ```
//!
//! Its two real eigenvalues are the ask (larger) and bid (smaller) prices.
//! No positivity constraint is applied here; the simulation layer guards
//! against non-positive trade prices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave::StateVector;

/// Hermitian 2×2 operator. The (2,1) element is always `conj(s12)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceOperator2 {
    s11: f64,
    s22: f64,
    s12: Complex64,
}

impl PriceOperator2 {
    pub fn new(s11: f64, s22: f64, s12: Complex64) -> Result<Self> {
        if !(s11.is_finite() && s22.is_finite() && s12.re.is_finite() && s12.im.is_finite()) {
            return Err(Error::validation(format!(
                "price operator entries must be finite (s11={s11}, s22={s22}, s12={s12})"
            )));
        }
        Ok(PriceOperator2 { s11, s22, s12 })
    }

    /// Operator with a real coupling element.
    pub fn real(s11: f64, s22: f64, s12: f64) -> Result<Self> {
        Self::new(s11, s22, Complex64::new(s12, 0.0))
    }

    /// `s·1`: a single attainable price.
    pub fn trivial(price: f64) -> Result<Self> {
        Self::real(price, price, 0.0)
    }

    pub fn s11(&self) -> f64 {
        self.s11
    }

    pub fn s22(&self) -> f64 {
        self.s22
    }

    pub fn s12(&self) -> Complex64 {
        self.s12
    }

    pub fn s21(&self) -> Complex64 {
        self.s12.conj()
    }

    /// Matrix-vector product `Ŝ·v`, returned as raw components.
    pub fn apply(&self, v: &StateVector) -> (Complex64, Complex64) {
        let (a, b) = (v.psi_ask(), v.psi_bid());
        (a * self.s11 + b * self.s12, a * self.s21() + b * self.s22)
    }
}

/// Snapshot of the two attainable prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceLevels {
    pub s_ask: f64,
    pub s_bid: f64,
    pub s_mid: f64,
    pub delta: f64,
}

/// Eigenvalues of the price operator.
///
/// `delta = √((s11−s22)² + 4|s12|²)` and `s_mid = (s11+s22)/2`; the ask and
/// bid sit at `s_mid ± delta/2`.
pub fn eigenprices(op: &PriceOperator2) -> PriceLevels {
    let s_mid = 0.5 * (op.s11 + op.s22);
    let delta = (op.s11 - op.s22).hypot(2.0 * op.s12.norm());
    let half = 0.5 * delta;
    PriceLevels {
        s_ask: s_mid + half,
        s_bid: s_mid - half,
        s_mid,
        delta,
    }
}

/// Unit eigenvectors `(ask, bid)`.
///
/// Phase convention: the first component of each vector is real and
/// non-negative. When the spread is exactly zero every vector is an
/// eigenvector and the canonical basis `(1,0)`, `(0,1)` is returned.
pub fn eigenvectors(op: &PriceOperator2) -> (StateVector, StateVector) {
    let levels = eigenprices(op);
    if levels.delta == 0.0 {
        return (StateVector::ask_basis(), StateVector::bid_basis());
    }
    let half_gap = 0.5 * (op.s11 - op.s22);
    let half = 0.5 * levels.delta;
    // (λ − s22, s12*) and (s12, λ − s11) are both eigenvectors for λ = s_ask;
    // pick the one whose non-trivial component avoids cancellation.
    let (u, v) = if half_gap >= 0.0 {
        (Complex64::new(half + half_gap, 0.0), op.s21())
    } else {
        (op.s12, Complex64::new(half - half_gap, 0.0))
    };
    let ask = fix_phase(u, v);
    // Orthogonal complement of a unit vector with real first component.
    let bid = fix_phase(-ask.psi_bid().conj(), ask.psi_ask());
    (ask, bid)
}

fn fix_phase(u: Complex64, v: Complex64) -> StateVector {
    let norm = u.norm().hypot(v.norm());
    let rot = if u.norm() > 0.0 {
        u.conj() / u.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    StateVector::from_parts_unchecked(Complex64::new(u.norm() / norm, 0.0), v * rot / norm)
}
