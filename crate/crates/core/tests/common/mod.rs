//! Independent oracles shared by the integration tests. Nothing here calls
//! into the routes it is used to check.

#![allow(dead_code)]

use num_complex::Complex64;

/// Double-double number `hi + lo`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        two_sum(s.hi, lo)
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        let lo = p.lo + (self.hi * o.lo + self.lo * o.hi);
        two_sum(p.hi, lo)
    }

    pub fn scale(self, k: f64) -> Dd {
        // exact for powers of two
        Dd {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let x = self.hi.sqrt();
        // one Newton step: x + (a − x²)/(2x)
        let r = self.sub(two_prod(x, x));
        two_sum(x, r.hi / (2.0 * x))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Roots of the characteristic polynomial `λ² − tr·λ + det` of the Hermitian
/// matrix `[[s11, s12], [s12*, s22]]`, by the quadratic formula in
/// double-double arithmetic. Returns `(larger, smaller)`.
pub fn eigen_oracle(s11: f64, s22: f64, s12: Complex64) -> (f64, f64) {
    let tr = two_sum(s11, s22);
    let mod2 = two_prod(s12.re, s12.re).add(two_prod(s12.im, s12.im));
    let det = two_prod(s11, s22).sub(mod2);
    let disc = tr.mul(tr).sub(det.scale(4.0));
    let root = disc.sqrt();
    let hi = tr.add(root).scale(0.5);
    let lo = tr.sub(root).scale(0.5);
    (hi.to_f64(), lo.to_f64())
}

pub type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `exp(A)` by scaling and squaring with a Taylor series.
pub fn expm(a: &Mat2) -> Mat2 {
    let norm = a.iter().flatten().map(|z| z.norm()).sum::<f64>();
    let mut k = 0;
    while norm / 2f64.powi(k) > 0.25 {
        k += 1;
    }
    let s = 1.0 / 2f64.powi(k);
    let a: Mat2 = [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]];
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut result: Mat2 = [[one, zero], [zero, one]];
    let mut term = result;
    for n in 1..30 {
        term = mat_mul(&term, &a);
        let inv = 1.0 / n as f64;
        term = [
            [term[0][0] * inv, term[0][1] * inv],
            [term[1][0] * inv, term[1][1] * inv],
        ];
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..k {
        result = mat_mul(&result, &result);
    }
    result
}

/// `exp(−i·t·Ŝ/(τ s₀))` for `Ŝ = [[m + ξ/2, κ/2], [κ*/2, m − ξ/2]]`.
pub fn propagator_oracle(xi: f64, kappa: Complex64, s_mid: f64, tau_s0: f64, t: f64) -> Mat2 {
    let c = Complex64::new(0.0, -t / tau_s0);
    let s: Mat2 = [
        [Complex64::new(s_mid + 0.5 * xi, 0.0), kappa * 0.5],
        [kappa.conj() * 0.5, Complex64::new(s_mid - 0.5 * xi, 0.0)],
    ];
    expm(&[[s[0][0] * c, s[0][1] * c], [s[1][0] * c, s[1][1] * c]])
}

/// `e^{−x} I₀(x)` from `(1/π)∫₀^π e^{x cos φ} dφ` by the trapezoid rule with
/// `n` intervals (spectrally accurate for this periodic integrand).
pub fn i0e_quadrature(x: f64, n: usize) -> f64 {
    let h = std::f64::consts::PI / n as f64;
    let f = |phi: f64| (x * (phi.cos() - 1.0)).exp();
    let mut sum = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for k in 1..n {
        sum += f(k as f64 * h);
    }
    sum * h / std::f64::consts::PI
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫ f` over `[a, b]` with composite Gauss–Legendre on the given panel breakpoints.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rule: &[(f64, f64)]) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            rule.iter().map(|(x, wt)| wt * f(c + h * x)).sum::<f64>() * h
        })
        .sum()
}

/// Panels graded geometrically from `fine` up to `coarse`, then uniform to `end`.
pub fn graded_breaks(fine: f64, coarse: f64, end: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut h = fine;
    let mut x = 0.0;
    while x < end {
        x = (x + h).min(end);
        b.push(x);
        if h < coarse {
            h *= 1.5;
        }
    }
    b
}

/// Peak angular frequency of a real signal sampled every `dt`, using a Hann
/// window and Gaussian interpolation between bins.
pub fn fft_peak_frequency(signal: &[f64], dt: f64) -> f64 {
    use rustfft::FftPlanner;
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = signal
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos();
            rustfft::num_complex::Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm()).collect();
    let k = (1..n / 2 - 1).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap();
    let (l, c, r) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
    let offset = 0.5 * (l - r) / (l - 2.0 * c + r);
    std::f64::consts::TAU * (k as f64 + offset) / (n as f64 * dt)
}
