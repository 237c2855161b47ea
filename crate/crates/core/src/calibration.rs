//! Maximum-likelihood calibration of the spread law and data ingestion.
//!
//! The likelihood is symmetric under `ξ₁ ↔ κ₁`, so spread data alone cannot
//! tell the intrinsic component from the coupling. Fits are reported in the
//! canonical order `xi1_hat ≥ kappa1_hat`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::statistics::SpreadLaw;

/// Smallest sample accepted by [`fit_spread_params`].
pub const MIN_FIT_SAMPLES: usize = 50;

/// Observed spread (price units, or dimensionless for relative OHLC bars).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadSample {
    pub value: f64,
    pub timestamp: Option<String>,
}

/// One row of a `timestamp,bid,ask` quote file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteRow {
    pub timestamp: Option<String>,
    pub bid: f64,
    pub ask: f64,
}

/// One row of a `timestamp,open,high,low,close` bar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcRow {
    pub timestamp: Option<String>,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OhlcMode {
    /// `high − low`.
    Absolute,
    /// `(high − low) / close`.
    Relative,
}

/// Spread samples together with counts of discarded rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ingestion {
    #[serde(skip)]
    pub samples: Vec<SpreadSample>,
    pub rows: usize,
    pub dropped_zero: usize,
    pub dropped_crossed: usize,
    pub dropped_invalid: usize,
}

impl Ingestion {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

/// Quoted spreads `ask − bid`. Zero spreads, crossed quotes and rows with
/// non-positive or non-finite prices are dropped and counted.
pub fn spreads_from_quotes(rows: &[QuoteRow]) -> Ingestion {
    let mut out = Ingestion {
        rows: rows.len(),
        ..Ingestion::default()
    };
    for r in rows {
        if !(r.bid.is_finite() && r.ask.is_finite() && r.bid > 0.0 && r.ask > 0.0) {
            out.dropped_invalid += 1;
        } else if r.bid > r.ask {
            out.dropped_crossed += 1;
        } else if r.bid == r.ask {
            out.dropped_zero += 1;
        } else {
            out.samples.push(SpreadSample {
                value: r.ask - r.bid,
                timestamp: r.timestamp.clone(),
            });
        }
    }
    out
}

/// High-low ranges of OHLC bars, with the high playing the ask and the low the
/// bid. Bars with `high == low` are dropped and counted.
pub fn spreads_from_ohlc(rows: &[OhlcRow], mode: OhlcMode) -> Result<Ingestion> {
    let mut out = Ingestion {
        rows: rows.len(),
        ..Ingestion::default()
    };
    for (i, r) in rows.iter().enumerate() {
        if !(r.high.is_finite() && r.low.is_finite() && r.close.is_finite()) {
            return Err(Error::validation(format!("bar {}: non-finite price", i + 1)));
        }
        if r.high < r.low {
            return Err(Error::validation(format!(
                "bar {}: high {} is below low {}",
                i + 1,
                r.high,
                r.low
            )));
        }
        if r.low <= 0.0 {
            return Err(Error::validation(format!(
                "bar {}: low {} must be positive",
                i + 1,
                r.low
            )));
        }
        if r.high == r.low {
            out.dropped_zero += 1;
            continue;
        }
        let range = r.high - r.low;
        let value = match mode {
            OhlcMode::Absolute => range,
            OhlcMode::Relative => {
                if r.close <= 0.0 {
                    return Err(Error::validation(format!(
                        "bar {}: close {} must be positive",
                        i + 1,
                        r.close
                    )));
                }
                range / r.close
            }
        };
        out.samples.push(SpreadSample {
            value,
            timestamp: r.timestamp.clone(),
        });
    }
    Ok(out)
}

/// Outcome of a spread-law fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub xi1_hat: f64,
    pub kappa1_hat: f64,
    pub loglik: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn law(&self) -> Result<SpreadLaw> {
        SpreadLaw::new(self.xi1_hat, self.kappa1_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence tolerance on the mean per-sample log-likelihood.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            tolerance: 1e-8,
        }
    }
}

const CHUNK: usize = 4096;

/// `Σ ln P(Δᵢ)`. Summed per fixed-size chunk and then in order, so the result
/// does not depend on the number of worker threads.
pub fn log_likelihood(samples: &[f64], law: &SpreadLaw) -> f64 {
    let partial: Vec<f64> = samples
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&d| law.ln_pdf(d)).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Moment-matching starting point.
///
/// `ξ₁² + κ₁² = mean(Δ²)`; the ratio `κ₁/ξ₁` is interpolated from the
/// sample's coefficient of variation between the Rayleigh value (ratio 1) and
/// the half-normal value (ratio 0).
pub fn moment_init(samples: &[f64]) -> (f64, f64) {
    const CV_RAYLEIGH: f64 = 0.522_723_200_877_981_7; // √(4/π − 1)
    const CV_HALF_NORMAL: f64 = 0.755_928_946_018_454_5; // √(π/2 − 1)
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|d| d * d).sum::<f64>() / n;
    let var = (m2 - mean * mean).max(0.0);
    let cv = var.sqrt() / mean;
    let ratio = ((CV_HALF_NORMAL - cv) / (CV_HALF_NORMAL - CV_RAYLEIGH)).clamp(0.05, 1.0);
    let xi1 = (m2 / (1.0 + ratio * ratio)).sqrt();
    (xi1, ratio * xi1)
}

/// Maximum-likelihood `(ξ₁, κ₁)` by Nelder–Mead over `(ln ξ₁, ln κ₁)`.
pub fn fit_spread_params(samples: &[f64], init: Option<(f64, f64)>, opts: &FitOptions) -> Result<FitResult> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::validation(format!(
            "fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if let Some(i) = samples.iter().position(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::validation(format!(
            "spread sample {} is not a positive finite number: {}",
            i + 1,
            samples[i]
        )));
    }
    let (x0, k0) = match init {
        Some((x, k)) => {
            SpreadLaw::new(x, k)?;
            (x, k)
        }
        None => moment_init(samples),
    };
    let n = samples.len() as f64;
    let objective = |p: &[f64]| match SpreadLaw::new(p[0].exp(), p[1].exp()) {
        Ok(law) => -log_likelihood(samples, &law) / n,
        Err(_) => f64::INFINITY,
    };
    let nm = NelderMeadOptions {
        max_iterations: opts.max_iterations,
        f_tolerance: opts.tolerance,
        initial_step: 0.25,
    };
    let min = nelder_mead(objective, &[x0.ln(), k0.ln()], &nm);
    let (a, b) = (min.x[0].exp(), min.x[1].exp());
    let (xi1_hat, kappa1_hat) = if a >= b { (a, b) } else { (b, a) };
    Ok(FitResult {
        xi1_hat,
        kappa1_hat,
        loglik: -min.value * n,
        n: samples.len(),
        converged: min.converged,
        iterations: min.iterations,
    })
}

/// Convenience wrapper over [`fit_spread_params`] for ingested samples.
pub fn fit_samples(samples: &[SpreadSample], init: Option<(f64, f64)>, opts: &FitOptions) -> Result<FitResult> {
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    fit_spread_params(&values, init, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};
    use crate::statistics::sample_spread;

    fn quote(bid: f64, ask: f64) -> QuoteRow {
        QuoteRow {
            timestamp: None,
            bid,
            ask,
        }
    }

    fn bar(high: f64, low: f64, close: f64) -> OhlcRow {
        OhlcRow {
            timestamp: None,
            open: close,
            high,
            low,
            close,
        }
    }

    #[test]
    fn quote_spreads() {
        let ing = spreads_from_quotes(&[quote(27.83, 27.87)]);
        assert_eq!(ing.samples.len(), 1);
        assert!((ing.samples[0].value - 0.04).abs() < 1e-12);
    }

    #[test]
    fn quote_drops_are_counted() {
        let ing = spreads_from_quotes(&[quote(10.0, 10.0), quote(10.1, 10.0), quote(-1.0, 2.0), quote(1.0, 1.5)]);
        assert_eq!(ing.rows, 4);
        assert_eq!(ing.dropped_zero, 1);
        assert_eq!(ing.dropped_crossed, 1);
        assert_eq!(ing.dropped_invalid, 1);
        assert_eq!(ing.values(), vec![0.5]);
    }

    #[test]
    fn ohlc_modes() {
        let rel = spreads_from_ohlc(&[bar(102.0, 100.0, 101.0)], OhlcMode::Relative).unwrap();
        assert!((rel.samples[0].value - 0.019_801_980_198_019_8).abs() < 1e-15);
        let abs = spreads_from_ohlc(&[bar(102.0, 100.0, 101.0)], OhlcMode::Absolute).unwrap();
        assert_eq!(abs.samples[0].value, 2.0);
        let flat = spreads_from_ohlc(&[bar(100.0, 100.0, 100.0)], OhlcMode::Absolute).unwrap();
        assert!(flat.samples.is_empty());
        assert_eq!(flat.dropped_zero, 1);
        assert!(spreads_from_ohlc(&[bar(99.0, 100.0, 100.0)], OhlcMode::Absolute).is_err());
    }

    #[test]
    fn sample_size_gate() {
        let x = vec![0.1; 10];
        assert!(matches!(
            fit_spread_params(&x, None, &FitOptions::default()),
            Err(Error::Validation(_))
        ));
        let mut y = vec![0.1; 60];
        y[7] = 0.0;
        assert!(fit_spread_params(&y, None, &FitOptions::default()).is_err());
    }

    #[test]
    fn likelihood_swap_symmetry() {
        let law = SpreadLaw::new(0.1, 0.05).unwrap();
        let mut rng = substream(5, 0, Purpose::Sample);
        let x = sample_spread(&law, &mut rng, 1000);
        for (a, b) in [(0.1, 0.05), (0.3, 0.01), (0.07, 0.07)] {
            let l1 = log_likelihood(&x, &SpreadLaw::new(a, b).unwrap());
            let l2 = log_likelihood(&x, &SpreadLaw::new(b, a).unwrap());
            assert_eq!(l1, l2);
        }
    }

    #[test]
    fn rayleigh_recovery() {
        let s = 0.03;
        let law = SpreadLaw::new(s, s).unwrap();
        let mut rng = substream(17, 0, Purpose::Sample);
        let x = sample_spread(&law, &mut rng, 20_000);
        let fit = fit_spread_params(&x, None, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.xi1_hat >= fit.kappa1_hat);
        assert!((fit.xi1_hat / s - 1.0).abs() < 0.05, "{fit:?}");
        assert!((fit.kappa1_hat / s - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn non_convergence_is_flagged() {
        let law = SpreadLaw::new(0.1, 0.05).unwrap();
        let mut rng = substream(2, 0, Purpose::Sample);
        let x = sample_spread(&law, &mut rng, 500);
        let fit = fit_spread_params(
            &x,
            Some((5.0, 0.001)),
            &FitOptions {
                max_iterations: 3,
                tolerance: 1e-12,
            },
        )
        .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 3);
    }

    #[test]
    fn moment_init_limits() {
        let s = 0.2;
        let mut rng = substream(8, 0, Purpose::Sample);
        let x = sample_spread(&SpreadLaw::new(s, s).unwrap(), &mut rng, 50_000);
        let (a, b) = moment_init(&x);
        assert!((a / s - 1.0).abs() < 0.15 && (b / s - 1.0).abs() < 0.15);
    }
}
