//! Analytic spread law, sampling, histograms and goodness-of-fit measures.
//!
//! With zero-mean elements `ξ ~ N(0, ξ₁)` and `κ ~ N(0, κ₁)` the spread
//! `Δ = √(ξ² + κ²)` has density
//!
//! ```text
//! P(Δ) = Δ/(ξ₁κ₁) · e^{−aΔ²} · I₀(bΔ²)
//! a = (1/ξ₁² + 1/κ₁²)/4,   b = (1/ξ₁² − 1/κ₁²)/4
//! ```
//!
//! The law has no elementary CDF; [`SpreadCdf`] integrates it by adaptive
//! Simpson quadrature on a cached grid.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_i0e;
use crate::error::{Error, Result};

/// Spread distribution parameterized by the element standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadLaw {
    xi1: f64,
    kappa1: f64,
}

impl SpreadLaw {
    pub fn new(xi1: f64, kappa1: f64) -> Result<Self> {
        if !(xi1.is_finite() && xi1 > 0.0 && kappa1.is_finite() && kappa1 > 0.0) {
            return Err(Error::validation(format!(
                "spread law needs xi1 > 0 and kappa1 > 0, got ({xi1}, {kappa1})"
            )));
        }
        Ok(SpreadLaw { xi1, kappa1 })
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn a(&self) -> f64 {
        0.25 * (self.xi1.powi(-2) + self.kappa1.powi(-2))
    }

    pub fn b(&self) -> f64 {
        0.25 * (self.xi1.powi(-2) - self.kappa1.powi(-2))
    }

    /// `E[Δ²] = ξ₁² + κ₁²`.
    pub fn second_moment(&self) -> f64 {
        self.xi1 * self.xi1 + self.kappa1 * self.kappa1
    }

    /// Density at `delta`; zero for `delta ≤ 0`.
    ///
    /// Evaluated as `Δ/(ξ₁κ₁) · e^{−(a−|b|)Δ²} · [e^{−|b|Δ²} I₀(|b|Δ²)]`, which
    /// never overflows.
    pub fn pdf(&self, delta: f64) -> f64 {
        if !(delta > 0.0) {
            return 0.0;
        }
        let d2 = delta * delta;
        let abs_b = self.b().abs();
        delta / (self.xi1 * self.kappa1) * (-(self.a() - abs_b) * d2).exp() * bessel_i0e(abs_b * d2)
    }

    /// Log-density; `−∞` for `delta ≤ 0`.
    pub fn ln_pdf(&self, delta: f64) -> f64 {
        if !(delta > 0.0) {
            return f64::NEG_INFINITY;
        }
        let d2 = delta * delta;
        let abs_b = self.b().abs();
        delta.ln() - (self.xi1 * self.kappa1).ln() - (self.a() - abs_b) * d2 + bessel_i0e(abs_b * d2).ln()
    }

    /// Point beyond which the remaining probability is below `e^{−40}`.
    pub fn support_bound(&self) -> f64 {
        12.0 * self.xi1.max(self.kappa1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Tolerance of the CDF quadrature.
pub const CDF_TOLERANCE: f64 = 1e-9;

const CDF_GRID: usize = 256;

/// Quadrature CDF of a [`SpreadLaw`], cached on a uniform grid.
#[derive(Debug, Clone)]
pub struct SpreadCdf {
    law: SpreadLaw,
    step: f64,
    nodes: Vec<f64>,
}

impl SpreadCdf {
    pub fn new(law: SpreadLaw) -> Self {
        let step = law.support_bound() / CDF_GRID as f64;
        let pdf = |x| law.pdf(x);
        let cell_tol = CDF_TOLERANCE / CDF_GRID as f64;
        let mut nodes = Vec::with_capacity(CDF_GRID + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for k in 0..CDF_GRID {
            let lo = k as f64 * step;
            acc += adaptive_simpson(&pdf, lo, lo + step, cell_tol);
            nodes.push(acc);
        }
        SpreadCdf { law, step, nodes }
    }

    pub fn law(&self) -> &SpreadLaw {
        &self.law
    }

    /// Integral of the density over the tabulated support.
    pub fn total_mass(&self) -> f64 {
        *self.nodes.last().expect("grid is non-empty")
    }

    pub fn cdf(&self, delta: f64) -> f64 {
        if !(delta > 0.0) {
            return 0.0;
        }
        let k = (delta / self.step).floor() as usize;
        if k >= CDF_GRID {
            return self.total_mass().min(1.0);
        }
        let lo = k as f64 * self.step;
        let pdf = |x| self.law.pdf(x);
        (self.nodes[k] + adaptive_simpson(&pdf, lo, delta, CDF_TOLERANCE / CDF_GRID as f64)).clamp(0.0, 1.0)
    }
}

/// `n` independent draws of `√(ξ² + κ²)` with `ξ ~ N(0, ξ₁)`, `κ ~ N(0, κ₁)`.
pub fn sample_spread<R: Rng + ?Sized>(law: &SpreadLaw, rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            (law.xi1 * x).hypot(law.kappa1 * y)
        })
        .collect()
}

/// Sup-norm distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance_with<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::validation("KS distance needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// KS distance between `samples` and the quadrature CDF of `law`.
pub fn ks_distance(samples: &[f64], law: &SpreadLaw) -> Result<f64> {
    let cdf = SpreadCdf::new(*law);
    ks_distance_with(samples, |x| cdf.cdf(x))
}

/// Two-sample KS statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("two-sample KS needs non-empty samples"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let p = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    Ok((d, p))
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Binned distribution. `masses` sum to one when built by [`Histogram::from_samples`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub count: u64,
}

impl Histogram {
    /// Normalized histogram of `samples` over `[lo, hi]` with `bins` equal bins.
    /// Values equal to `hi` land in the last bin; values outside are ignored.
    pub fn from_samples(samples: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let counts = BinCounts::from_samples(samples, lo, hi, bins)?;
        counts.normalized()
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    /// Mass divided by bin width.
    pub fn density(&self, k: usize) -> f64 {
        self.masses[k] / self.width(k)
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    /// Checks ordering of edges and alignment with masses.
    pub fn validate(&self) -> Result<()> {
        if self.edges.len() != self.masses.len() + 1 || self.masses.is_empty() {
            return Err(Error::validation(
                "histogram edges must have one more entry than masses",
            ));
        }
        if self.edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("histogram edges must be strictly increasing"));
        }
        if self.masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::validation("histogram masses must be non-negative"));
        }
        Ok(())
    }
}

/// Raw bin counts; mergeable across independent workers.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCounts {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

impl BinCounts {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!(
                "histogram needs bins >= 1 and a finite range lo < hi, got {bins} bins on [{lo}, {hi}]"
            )));
        }
        Ok(BinCounts {
            lo,
            hi,
            counts: vec![0; bins],
        })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let mut c = Self::new(lo, hi, bins)?;
        for x in samples {
            c.add(x);
        }
        Ok(c)
    }

    pub fn add(&mut self, x: f64) {
        if !(x >= self.lo && x <= self.hi) {
            return;
        }
        let bins = self.counts.len();
        let k = (((x - self.lo) / (self.hi - self.lo)) * bins as f64) as usize;
        self.counts[k.min(bins - 1)] += 1;
    }

    pub fn merge(&mut self, other: &BinCounts) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(Error::validation("cannot merge histograms with different binning"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn normalized(&self) -> Result<Histogram> {
        let total = self.total();
        if total == 0 {
            return Err(Error::validation("histogram has no samples in range"));
        }
        let bins = self.counts.len();
        let span = self.hi - self.lo;
        let mut edges: Vec<f64> = (0..bins).map(|k| self.lo + span * k as f64 / bins as f64).collect();
        edges.push(self.hi);
        Ok(Histogram {
            edges,
            masses: self.counts.iter().map(|&c| c as f64 / total as f64).collect(),
            count: total,
        })
    }
}

/// Sample moments up to the third standardized moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

impl Moments {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("moments need at least one sample"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let (m2, m3) = samples.iter().fold((0.0, 0.0), |(m2, m3), &x| {
            let d = x - mean;
            (m2 + d * d, m3 + d * d * d)
        });
        let variance = m2 / n;
        let skewness = if variance > 0.0 {
            (m3 / n) / variance.powf(1.5)
        } else {
            0.0
        };
        Ok(Moments {
            n: samples.len() as u64,
            mean,
            variance,
            skewness,
        })
    }
}

/// One row of a tabulated spread law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawRow {
    pub delta: f64,
    pub pdf: f64,
    pub cdf: f64,
}

/// Density and CDF on `points` equally spaced spreads in `[0, delta_max]`.
pub fn tabulate_law(cdf: &SpreadCdf, delta_max: f64, points: usize) -> Vec<LawRow> {
    let points = points.max(2);
    (0..points)
        .map(|k| {
            let delta = delta_max * k as f64 / (points - 1) as f64;
            LawRow {
                delta,
                pdf: cdf.law().pdf(delta),
                cdf: cdf.cdf(delta),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn rayleigh_pdf(x: f64, s: f64) -> f64 {
        x / (s * s) * (-x * x / (2.0 * s * s)).exp()
    }

    #[test]
    fn law_rejects_non_positive_scales() {
        assert!(SpreadLaw::new(0.0, 1.0).is_err());
        assert!(SpreadLaw::new(1.0, -1.0).is_err());
        assert!(SpreadLaw::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn a_b_definitions() {
        let law = SpreadLaw::new(0.1, 0.05).unwrap();
        assert!((law.a() - 0.25 * (100.0 + 400.0)).abs() < 1e-12);
        assert!((law.b() - 0.25 * (100.0 - 400.0)).abs() < 1e-12);
        assert!(law.b().abs() < law.a());
    }

    #[test]
    fn density_vanishes_at_origin_and_below() {
        let law = SpreadLaw::new(0.1, 0.05).unwrap();
        assert_eq!(law.pdf(0.0), 0.0);
        assert_eq!(law.pdf(-1.0), 0.0);
        assert_eq!(law.ln_pdf(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn equal_scales_reduce_to_rayleigh() {
        let s = 0.07;
        let law = SpreadLaw::new(s, s).unwrap();
        assert_eq!(law.b(), 0.0);
        for k in 1..=100 {
            let x = k as f64 * 0.005;
            let r = rayleigh_pdf(x, s);
            assert!((law.pdf(x) - r).abs() <= 1e-12 * r.max(1.0), "x={x}");
        }
    }

    #[test]
    fn ln_pdf_matches_pdf() {
        let law = SpreadLaw::new(0.3, 0.02).unwrap();
        for k in 1..50 {
            let x = k as f64 * 0.02;
            assert!((law.ln_pdf(x) - law.pdf(x).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_symmetry() {
        let a = SpreadLaw::new(0.13, 0.04).unwrap();
        let b = SpreadLaw::new(0.04, 0.13).unwrap();
        for k in 0..200 {
            let x = k as f64 * 0.003;
            assert!((a.pdf(x) - b.pdf(x)).abs() <= 1e-14 * a.pdf(x).max(1e-300));
        }
    }

    #[test]
    fn cdf_is_monotone_and_normalized() {
        let law = SpreadLaw::new(0.10, 0.05).unwrap();
        let cdf = SpreadCdf::new(law);
        assert!((cdf.total_mass() - 1.0).abs() < 1e-8);
        let mut prev = 0.0;
        for k in 0..400 {
            let v = cdf.cdf(k as f64 * 0.002);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn rayleigh_cdf_matches_closed_form() {
        let s = 0.2;
        let cdf = SpreadCdf::new(SpreadLaw::new(s, s).unwrap());
        for k in 0..100 {
            let x = k as f64 * 0.015;
            let exact = 1.0 - (-x * x / (2.0 * s * s)).exp();
            assert!((cdf.cdf(x) - exact).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn ks_distance_of_single_point() {
        let law = SpreadLaw::new(0.1, 0.1).unwrap();
        let d = ks_distance(&[0.1], &law).unwrap();
        assert!(d > 0.0 && d <= 1.0);
        assert!(ks_distance(&[], &law).is_err());
    }

    #[test]
    fn ks_separates_scaled_law() {
        let law = SpreadLaw::new(0.1, 0.05).unwrap();
        let wide = SpreadLaw::new(0.2, 0.1).unwrap();
        let mut rng = substream(11, 0, Purpose::Sample);
        let x = sample_spread(&wide, &mut rng, 20_000);
        assert!(ks_distance(&x, &law).unwrap() > 0.1);
    }

    #[test]
    fn two_sample_ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|k| k as f64 / 500.0).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert!((d - 0.3).abs() <= 0.002 + 1e-12);
        assert!(p < 1e-6);
    }

    #[test]
    fn kolmogorov_survival_reference_values() {
        // standard critical values: P(K > 1.358) ≈ 0.05, P(K > 1.628) ≈ 0.01
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 2e-4);
    }

    #[test]
    fn histogram_mass_and_edges() {
        let h = Histogram::from_samples([0.0, 0.0, 0.5, 1.0, -1.0, 2.0], -1.0, 1.0, 4).unwrap();
        assert_eq!(h.count, 5);
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(h.masses, vec![0.2, 0.0, 0.4, 0.4]);
        h.validate().unwrap();
        assert!(Histogram::from_samples([5.0], 0.0, 1.0, 3).is_err());
        assert!(BinCounts::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn bin_count_merge_is_order_independent() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut a = BinCounts::from_samples(xs[..40].iter().copied(), -1.0, 1.0, 10).unwrap();
        let b = BinCounts::from_samples(xs[40..].iter().copied(), -1.0, 1.0, 10).unwrap();
        let mut c = b.clone();
        a.merge(&b).unwrap();
        c.merge(&BinCounts::from_samples(xs[..40].iter().copied(), -1.0, 1.0, 10).unwrap())
            .unwrap();
        assert_eq!(a, c);
        assert_eq!(a, BinCounts::from_samples(xs.iter().copied(), -1.0, 1.0, 10).unwrap());
    }

    #[test]
    fn moments_of_symmetric_set() {
        let m = Moments::from_samples(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert!((m.variance - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.skewness, 0.0);
        let m = Moments::from_samples(&[0.0, 0.0, 3.0]).unwrap();
        assert!(m.skewness > 0.0);
    }

    #[test]
    fn tabulated_law_shape() {
        let cdf = SpreadCdf::new(SpreadLaw::new(0.1, 0.05).unwrap());
        let rows = tabulate_law(&cdf, 0.5, 101);
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0].pdf, 0.0);
        assert!((rows[100].cdf - 1.0).abs() < 1e-4);
    }
}
