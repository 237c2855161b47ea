//! Modified Bessel function of the first kind, order zero.
//!
//! Power series for `|x| ≤ 15`, large-argument asymptotic expansion beyond.
//! At the switch point the smallest asymptotic term is about 1.4e−14, so both
//! branches stay well inside a 1e−10 relative error budget.

/// Argument at which evaluation switches from the series to the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 15.0;

/// `I₀(x)`. Even in `x`; overflows to `+∞` for `|x|` above about 713.
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        let scaled = asymptotic_scaled(ax);
        // split the exponential so that results just below the overflow threshold survive
        scaled * (0.5 * ax).exp() * (0.5 * ax).exp()
    }
}

/// Exponentially scaled `e^{−|x|}·I₀(x)`; finite for every finite `x`.
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax) * (-ax).exp()
    } else {
        asymptotic_scaled(ax)
    }
}

/// `Σ_k (x²/4)^k / (k!)²`; every term is positive so no cancellation occurs.
fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// `e^{−x} I₀(x) ≈ (2πx)^{−1/2} Σ_k ((2k−1)!!)² / (k! (8x)^k)`, summed up to the
/// smallest term.
fn asymptotic_scaled(x: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if next >= term || next <= sum * 1e-17 {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum / (std::f64::consts::TAU * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert_eq!(bessel_i0e(0.0), 1.0);
    }

    #[test]
    fn value_at_one() {
        // Σ (1/2)^{2k}/(k!)² summed in extended precision
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn even_function() {
        for x in [0.3, 7.0, 15.0, 40.0] {
            assert_eq!(bessel_i0(-x), bessel_i0(x));
            assert_eq!(bessel_i0e(-x), bessel_i0e(x));
        }
    }

    #[test]
    fn branches_meet_at_switch_point() {
        let below = series(SERIES_LIMIT) * (-SERIES_LIMIT).exp();
        let above = asymptotic_scaled(SERIES_LIMIT);
        assert!(((below - above) / below).abs() < 1e-13);
    }

    #[test]
    fn large_arguments() {
        assert!(bessel_i0(700.0).is_finite());
        assert!(bessel_i0(720.0).is_infinite());
        assert!(bessel_i0e(1e6) > 0.0);
        // e^{−x} I₀(x) → 1/√(2πx)
        let x = 1e8;
        assert!((bessel_i0e(x) * (std::f64::consts::TAU * x).sqrt() - 1.0).abs() < 1e-8);
    }
}
