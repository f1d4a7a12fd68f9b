//! Trigonometric series on the period-2 domain.
//!
//! A [`Series`] stores the complex coefficients `c_m` of
//! `f(x) = sum_m c_m exp(i pi m x)` for `|m| < n/2` (the Nyquist mode is
//! dropped).  Loops of a twisted class only carry one parity of `m`, which
//! lets most transforms run over the unit interval instead of the full
//! period-2 domain.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized FFT; `inverse` uses the `exp(+2 pi i jk/n)` kernel.
pub(crate) fn fft(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

#[inline]
fn slot(m: i64, len: usize) -> usize {
    m.rem_euclid(len as i64) as usize
}

/// Mode parity carried by a series: `Some(0)` even modes only (period 1),
/// `Some(1)` odd modes only (antiperiodic), `None` both.
pub type Parity = Option<u8>;

#[derive(Clone, Debug)]
pub struct Series {
    n: usize,
    parity: Parity,
    c: Vec<Complex64>,
}

impl Series {
    pub fn zeros(n: usize, parity: Parity) -> Self {
        Series { n, parity, c: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Coefficients of the trigonometric interpolant of `n` samples on the
    /// period-2 grid; modes of the wrong parity are discarded.
    pub fn from_values(values: &[f64], parity: Parity) -> Self {
        let n = values.len();
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft(&mut buf, false);
        let inv = 1.0 / n as f64;
        for b in buf.iter_mut() {
            *b *= inv;
        }
        buf[n / 2] = Complex64::new(0.0, 0.0);
        let mut s = Series { n, parity, c: buf };
        s.enforce_parity();
        s
    }

    fn enforce_parity(&mut self) {
        if let Some(p) = self.parity {
            for m in self.modes() {
                if (m.rem_euclid(2)) as u8 != p {
                    let k = slot(m, self.n);
                    self.c[k] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn max_mode(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -self.max_mode()..=self.max_mode()
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        if m.abs() > self.max_mode() {
            return Complex64::new(0.0, 0.0);
        }
        self.c[slot(m, self.n)]
    }

    pub fn set_coeff(&mut self, m: i64, v: Complex64) {
        assert!(m.abs() <= self.max_mode());
        let k = slot(m, self.n);
        self.c[k] = v;
    }

    pub fn mean(&self) -> f64 {
        self.c[0].re
    }

    /// Samples on the `n`-point period-2 grid.
    pub fn values(&self) -> Vec<f64> {
        let mut buf = self.c.clone();
        fft(&mut buf, true);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Series {
        let mut out = Series::zeros(self.n, self.parity);
        for m in self.modes() {
            let k = slot(m, self.n);
            out.c[k] = f(m, self.c[k]);
        }
        out
    }

    pub fn derivative(&self) -> Series {
        self.map_modes(|m, c| c * Complex64::new(0.0, PI * m as f64))
    }

    /// Zero-mean periodic antiderivative; the mean of `self` is returned
    /// separately (its antiderivative is the linear part `mean * x`).
    pub fn antiderivative(&self) -> (f64, Series) {
        let mean = self.mean();
        let s = self.map_modes(|m, c| {
            if m == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, PI * m as f64)
            }
        });
        (mean, s)
    }

    /// Same coefficients on a grid of a different size (zero padding or
    /// truncation).
    pub fn with_size(&self, n: usize) -> Series {
        let mut out = Series::zeros(n, self.parity);
        let mm = out.max_mode().min(self.max_mode());
        for m in -mm..=mm {
            out.c[slot(m, n)] = self.c[slot(m, self.n)];
        }
        out
    }

    /// Value at an arbitrary point by direct summation.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivs::<1>(x)[0]
    }

    /// Value and the first `K-1` derivatives at `x` by direct summation.
    pub fn eval_derivs<const K: usize>(&self, x: f64) -> [f64; K] {
        let mut out = [0.0; K];
        out[0] = self.c[0].re;
        let (step, start) = match self.parity {
            Some(0) => (2, 2),
            Some(_) => (2, 1),
            None => (1, 1),
        };
        let w_step = Complex64::from_polar(1.0, PI * x * step as f64);
        let mut wm = Complex64::from_polar(1.0, PI * x * start as f64);
        let mut m = start as i64;
        while m <= self.max_mode() {
            let term = self.c[slot(m, self.n)] * wm;
            let mut factor = Complex64::new(2.0, 0.0);
            let ik = Complex64::new(0.0, PI * m as f64);
            for o in out.iter_mut() {
                *o += (term * factor).re;
                factor *= ik;
            }
            wm *= w_step;
            m += step;
        }
        out
    }

    /// Samples at `count` uniform points over `[0, span)`, `span` in {1, 2}.
    pub fn sample(&self, count: usize, span: u8) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); count];
        match (span, self.parity) {
            (2, _) => {
                assert!(count >= self.n - 1, "sampling would alias");
                for m in self.modes() {
                    buf[slot(m, count)] += self.c[slot(m, self.n)];
                }
                fft(&mut buf, true);
                buf.into_iter().map(|z| z.re).collect()
            }
            (1, Some(p)) => {
                assert!(2 * count >= self.n - 1, "sampling would alias");
                for m in self.modes() {
                    if m.rem_euclid(2) as u8 == p {
                        let k = (m - p as i64) / 2;
                        buf[slot(k, count)] += self.c[slot(m, self.n)];
                    }
                }
                fft(&mut buf, true);
                buf.iter()
                    .enumerate()
                    .map(|(j, z)| {
                        if p == 0 {
                            z.re
                        } else {
                            (z * Complex64::from_polar(1.0, PI * j as f64 / count as f64)).re
                        }
                    })
                    .collect()
            }
            (1, None) => {
                let mut v = self.sample(2 * count, 2);
                v.truncate(count);
                v
            }
            _ => panic!("span must be 1 or 2"),
        }
    }

    /// Coefficients `scale * sum_j f_j exp(-i pi m x_j)` over `count` uniform
    /// points of `[0, span)`, for all modes `|m| < n/2` of the given parity.
    /// With `scale = 1/count` this is the trapezoid rule for the Fourier
    /// coefficients of `f`.
    pub fn from_samples(samples: &[f64], span: u8, parity: Parity, n: usize, scale: f64) -> Series {
        let count = samples.len();
        let mut out = Series::zeros(n, parity);
        match (span, parity) {
            (2, _) => {
                let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft(&mut buf, false);
                for m in out.modes() {
                    if parity.is_none_or(|p| m.rem_euclid(2) as u8 == p) {
                        out.c[slot(m, n)] = buf[slot(m, count)] * scale;
                    }
                }
            }
            (1, Some(p)) => {
                let mut buf: Vec<Complex64> = samples
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if p == 0 {
                            Complex64::new(v, 0.0)
                        } else {
                            Complex64::from_polar(v, -PI * j as f64 / count as f64)
                        }
                    })
                    .collect();
                fft(&mut buf, false);
                for m in out.modes() {
                    if m.rem_euclid(2) as u8 == p {
                        let k = (m - p as i64) / 2;
                        out.c[slot(m, n)] = buf[slot(k, count)] * scale;
                    }
                }
            }
            _ => panic!("unit-span analysis needs a definite parity"),
        }
        out
    }
}

impl std::ops::Add<&Series> for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        assert_eq!(self.n, rhs.n);
        let parity = if self.parity == rhs.parity { self.parity } else { None };
        Series {
            n: self.n,
            parity,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = nf * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| 2.0 * j as f64 / n as f64).collect()
    }

    #[test]
    fn roundtrip_and_eval() {
        let n = 32;
        let v: Vec<f64> = grid(n).iter().map(|&x| (PI * x).sin() + 0.3 * (3.0 * PI * x).cos()).collect();
        let s = Series::from_values(&v, Some(1));
        let back = s.values();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let x = 0.377;
        let d = s.eval_derivs::<3>(x);
        assert!((d[0] - ((PI * x).sin() + 0.3 * (3.0 * PI * x).cos())).abs() < 1e-13);
        assert!((d[1] - (PI * (PI * x).cos() - 0.9 * PI * (3.0 * PI * x).sin())).abs() < 1e-12);
        assert!((d[2] - (-PI * PI * (PI * x).sin() - 2.7 * PI * PI * (3.0 * PI * x).cos())).abs() < 1e-11);
    }

    #[test]
    fn unit_span_sampling_matches_direct() {
        let n = 64;
        let v: Vec<f64> = grid(n).iter().map(|&x| (PI * x).sin() * (1.0 + 0.2 * (2.0 * PI * x).cos())).collect();
        let s = Series::from_values(&v, Some(1));
        let m = 96;
        let u = s.sample(m, 1);
        for (j, val) in u.iter().enumerate() {
            let x = j as f64 / m as f64;
            assert!((val - s.eval(x)).abs() < 1e-13);
        }
        let back = Series::from_samples(&u, 1, Some(1), n, 1.0 / m as f64);
        for m in s.modes() {
            assert!((back.coeff(m) - s.coeff(m)).norm() < 1e-14);
        }
        let even: Vec<f64> = grid(n).iter().map(|&x| 1.5 + (2.0 * PI * x).cos()).collect();
        let e = Series::from_values(&even, Some(0));
        let u = e.sample(40, 1);
        for (j, val) in u.iter().enumerate() {
            assert!((val - e.eval(j as f64 / 40.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }
}
