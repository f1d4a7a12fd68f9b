//! Action functionals on loop pairs and their `L^2`-gradients.
//!
//! * `Q(z) = 2|z|^2 |z'|^2 + N/|z|^2` — regularized Kepler action;
//! * `A(z1, z2) = -|z1|^2 |z2|^2 / (|z1^2|^2 |z2|^2 - |z2^2|^2 |z1|^2)` —
//!   mean interaction `-1/(qbar1 - qbar2)`;
//! * `I(z1, z2) = -int_0^1 dt / (q1(t) - q2(t))` — instantaneous
//!   interaction, nonlocal through the two time changes;
//! * `B_r = Q(z1) + Q(z2) + r I + (1 - r) A`.
//!
//! All gradients are taken with respect to the grid inner product, so
//! `<grad F(z), v> = dF(z) v` for every band-limited direction `v`.

use crate::error::{Error, Result};
use crate::grid::{derivative, inner, project_symmetry, second_derivative, SymmetryClass, ZLoop, ZPair};
use crate::levi_civita::{square_series, time_change};
use crate::spectral::Series;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nuclear charge `N`.
    pub charge: f64,
    /// Weight of the instantaneous interaction.
    pub r: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { charge: 2.0, r: 0.0 }
    }
}

impl ModelParams {
    pub fn new(charge: f64, r: f64) -> Result<Self> {
        if !(charge > 0.0) || !charge.is_finite() {
            return Err(Error::InvalidParameter(format!("charge must be positive, got {charge}")));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("r must lie in [0, 1], got {r}")));
        }
        Ok(ModelParams { charge, r })
    }

    pub fn with_r(self, r: f64) -> Self {
        ModelParams { r, ..self }
    }
}

/// Momenta conjugate to `(z1, z2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Momentum {
    pub eta1: ZLoop,
    pub eta2: ZLoop,
}

fn norm2_checked(z: &ZLoop) -> Result<f64> {
    let n = z.norm2();
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(Error::DegenerateLoop)
    }
}

/// Restrict a gradient to the class of the loop it belongs to.
fn in_class(g: ZLoop, class: SymmetryClass) -> ZLoop {
    if class.is_symmetric() {
        project_symmetry(&g, class)
    } else {
        ZLoop { class, ..g }
    }
}

pub fn eval_q(z: &ZLoop, charge: f64) -> Result<f64> {
    let n = norm2_checked(z)?;
    Ok(2.0 * n * derivative(z).norm2() + charge / n)
}

/// `grad Q = -4|z|^2 z'' + 4|z'|^2 z - (2N/|z|^4) z`.
pub fn grad_q(z: &ZLoop, charge: f64) -> Result<ZLoop> {
    let n = norm2_checked(z)?;
    let dn = derivative(z).norm2();
    let zpp = second_derivative(z);
    let c = 4.0 * dn - 2.0 * charge / (n * n);
    let values = z.values.iter().zip(&zpp.values).map(|(v, a)| -4.0 * n * a + c * v).collect();
    Ok(in_class(ZLoop::new(z.grid, values, z.class), z.class))
}

/// `a(z) = |z'|^2/|z|^2 - N/(2|z|^6)`; critical points of `Q` solve
/// `z'' = a(z) z`.
pub fn kepler_a(z: &ZLoop, charge: f64) -> f64 {
    let n = z.norm2();
    derivative(z).norm2() / n - charge / (2.0 * n.powi(3))
}

/// Norms entering the mean interaction.
#[derive(Clone, Copy, Debug)]
struct MeanNorms {
    n1: f64,
    n2: f64,
    s1: f64,
    s2: f64,
    d: f64,
}

fn fourth_mean(z: &ZLoop) -> f64 {
    z.values.iter().map(|v| v.powi(4)).sum::<f64>() / z.n() as f64
}

fn mean_norms(z: &ZPair) -> Result<MeanNorms> {
    let n1 = norm2_checked(&z.z1)?;
    let n2 = norm2_checked(&z.z2)?;
    let s1 = fourth_mean(&z.z1);
    let s2 = fourth_mean(&z.z2);
    let d = s1 * n2 - s2 * n1;
    if !(d > 0.0) {
        return Err(Error::OutsideMean(d));
    }
    Ok(MeanNorms { n1, n2, s1, s2, d })
}

/// `qbar1 - qbar2`, positive on the mean-interaction domain.
pub fn mean_gap(z: &ZPair) -> Result<f64> {
    let m = mean_norms(z)?;
    Ok(m.d / (m.n1 * m.n2))
}

pub fn eval_a(z: &ZPair) -> Result<f64> {
    let m = mean_norms(z)?;
    Ok(-m.n1 * m.n2 / m.d)
}

pub fn grad_a(z: &ZPair) -> Result<(ZLoop, ZLoop)> {
    let MeanNorms { n1, n2, s1, s2, d } = mean_norms(z)?;
    let d2 = d * d;
    let (a1, b1) = (-2.0 * n2 * n2 * s1 / d2, 4.0 * n1 * n2 * n2 / d2);
    let (a2, b2) = (2.0 * n1 * n1 * s2 / d2, -4.0 * n1 * n1 * n2 / d2);
    let g1 = z.z1.map(|v| a1 * v + b1 * v.powi(3));
    let g2 = z.z2.map(|v| a2 * v + b2 * v.powi(3));
    Ok((in_class(g1, z.z1.class), in_class(g2, z.z2.class)))
}

/// Equispaced periodic table evaluated by local 12-point Lagrange
/// interpolation.
struct PeriodicTable {
    period: f64,
    step: f64,
    values: Vec<f64>,
}

const STENCIL: usize = 12;

fn stencil_weights() -> [f64; STENCIL] {
    let mut w = [0.0; STENCIL];
    let mut binom = 1.0;
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = if k % 2 == 0 { binom } else { -binom };
        binom = binom * (STENCIL - 1 - k) as f64 / (k + 1) as f64;
    }
    w
}

impl PeriodicTable {
    fn new(values: Vec<f64>, period: f64) -> Self {
        let step = period / values.len() as f64;
        PeriodicTable { period, step, values }
    }

    fn eval(&self, x: f64, w: &[f64; STENCIL]) -> f64 {
        let len = self.values.len() as i64;
        let x = x.rem_euclid(self.period);
        let base = (x / self.step).floor() as i64 - (STENCIL as i64 / 2 - 1);
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let idx = base + k as i64;
            let d = x - idx as f64 * self.step;
            let f = self.values[idx.rem_euclid(len) as usize];
            if d == 0.0 {
                return f;
            }
            num += wk / d * f;
            den += wk / d;
        }
        num / den
    }
}

/// Quantities of the instantaneous interaction sampled at the nodes of the
/// inner electron's own regularized time `sigma`.
///
/// With `phi = tau_1 o t_2`, the substitution `t = t_2(sigma)` turns
/// `I = -int dt/(q1 - q2)` into `-(1/|z2|^2) <z2^2 / D>` with
/// `D(sigma) = z1(phi(sigma))^2 - z2(sigma)^2`.  Every factor is a smooth
/// periodic function of `sigma`, so the trapezoid rule converges
/// spectrally even though `q2` has a collision.
struct Crossing {
    period: f64,
    span: u8,
    n1: f64,
    n2: f64,
    sigma: Vec<f64>,
    z2: Vec<f64>,
    dz2: Vec<f64>,
    p2: Vec<f64>,
    phi: Vec<f64>,
    z1p: Vec<f64>,
    dz1p: Vec<f64>,
    d: Vec<f64>,
}

/// Nodes per unit of regularized time for the interaction quadrature, as
/// a multiple of the loop grid's points per unit.
const NODE_FACTOR: usize = 4;
/// Oversampling of the tables used to evaluate `z1` and `t1` off-grid.
const TABLE_FACTOR: usize = 16;

fn crossing(z: &ZPair) -> Result<Crossing> {
    let n = z.grid().n();
    let n1 = norm2_checked(&z.z1)?;
    let n2 = norm2_checked(&z.z2)?;
    time_change(&z.z1)?;
    time_change(&z.z2)?;
    let span = z.q_period();
    let period = span as f64;
    let m = NODE_FACTOR * n / 2 * span as usize;
    let sigma: Vec<f64> = (0..m).map(|j| period * j as f64 / m as f64).collect();

    let s2 = z.z2.series();
    let z2 = s2.sample(m, span);
    let dz2 = s2.derivative().sample(m, span);
    let sq2 = square_series(&s2);
    let (_, drift2) = sq2.map_modes(|k, c| if k == 0 { c * 0.0 } else { c / n2 }).antiderivative();
    let p2raw = drift2.sample(m, span);
    let p2: Vec<f64> = p2raw.iter().map(|v| v - p2raw[0]).collect();

    // tables for z1, z1' and the periodic part of t1 over one period of z1
    let s1 = z.z1.series();
    let span1 = z.z1.class.square_period();
    let len = TABLE_FACTOR * n / 2 * span1 as usize;
    let sq1 = square_series(&s1);
    let (_, drift1) = sq1.map_modes(|k, c| if k == 0 { c * 0.0 } else { c / n1 }).antiderivative();
    let d0 = drift1.eval(0.0);
    let t_z1 = PeriodicTable::new(s1.sample(len, span1), span1 as f64);
    let t_dz1 = PeriodicTable::new(s1.derivative().sample(len, span1), span1 as f64);
    let t_p1 = PeriodicTable::new(drift1.sample(len, span1).into_iter().map(|v| v - d0).collect(), span1 as f64);
    let bound = t_p1.values.iter().fold(0.0f64, |b, v| b.max(v.abs())) + 2.0 * t_p1.step;
    let w = stencil_weights();

    let mut phi = Vec::with_capacity(m);
    let mut z1p = Vec::with_capacity(m);
    let mut dz1p = Vec::with_capacity(m);
    let mut d = Vec::with_capacity(m);
    for j in 0..m {
        let t = sigma[j] + p2[j];
        let f = |x: f64| {
            let zx = t_z1.eval(x, &w);
            (x + t_p1.eval(x, &w), zx * zx / n1)
        };
        let x0 = t - t_p1.eval(t, &w);
        let xi = newton_bracketed(f, t, t - bound, t + bound, x0);
        let a = t_z1.eval(xi, &w);
        let dj = a * a - z2[j] * z2[j];
        if !(dj > 0.0) {
            return Err(Error::OutsideInstantaneous(dj, sigma[j]));
        }
        phi.push(xi);
        z1p.push(a);
        dz1p.push(t_dz1.eval(xi, &w));
        d.push(dj);
    }
    Ok(Crossing { period, span, n1, n2, sigma, z2, dz2, p2, phi, z1p, dz1p, d })
}

/// Derivative at node 0 of samples over one period continued by
/// `v(-x) = sign v(P - x)`, eighth-order central differences.
fn central_derivative(v: &[f64], h: f64, sign: f64) -> f64 {
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let m = v.len();
    C.iter().enumerate().map(|(i, c)| c * (v[i + 1] - sign * v[m - 1 - i])).sum::<f64>() / h
}

/// Newton iteration for increasing `f` started at `x0`, kept inside the
/// bracket by bisection.
fn newton_bracketed(f: impl Fn(f64) -> (f64, f64), target: f64, mut lo: f64, mut hi: f64, x0: f64) -> f64 {
    let mut x = x0.clamp(lo, hi);
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut xn = x - r / dfx;
        if !xn.is_finite() || xn <= lo || xn >= hi {
            xn = 0.5 * (lo + hi);
        }
        if (xn - x).abs() <= 2e-16 * (1.0 + x.abs()) {
            return xn;
        }
        x = xn;
    }
    x
}

impl Crossing {
    fn value(&self) -> f64 {
        let m = self.sigma.len() as f64;
        let s: f64 = self.z2.iter().zip(&self.d).map(|(z, d)| z * z / d).sum();
        -s / (m * self.n2)
    }

    /// `J(sigma) = int_sigma^P k` and `C = (1/P) int_0^P k t2` for a smooth
    /// periodic `k`, both through the spectral antiderivative.  `J` jumps
    /// by the integral of `k` at `sigma = 0`; the node there takes the
    /// average of both sides.  Also returns the mean of `k`, the slope of the
    /// non-periodic part of `J`.
    fn cumulative(&self, k: &[f64]) -> (Vec<f64>, f64, f64) {
        let m = k.len();
        let p = self.period;
        let parity = if self.span == 1 { Some(0) } else { None };
        let s = Series::from_samples(k, self.span, parity, 2 * m / self.span as usize, 1.0 / m as f64);
        let (mean, prim) = s.antiderivative();
        let pv = prim.sample(m, self.span);
        let mut j: Vec<f64> = (0..m).map(|i| mean * (p - self.sigma[i]) + pv[0] - pv[i]).collect();
        j[0] = 0.5 * mean * p;
        let kp = k.iter().zip(&self.p2).map(|(a, b)| a * b).sum::<f64>() / m as f64;
        (j, 0.5 * mean * p + pv[0] + kp, mean)
    }

    /// Sign picked up by a loop of the given parity over one period of
    /// `sigma`.
    fn continuation(&self, parity: Option<u8>) -> f64 {
        if self.span == 1 && parity == Some(1) {
            -1.0
        } else {
            1.0
        }
    }

    fn gradient(&self, z: &ZPair) -> (ZLoop, ZLoop) {
        let m = self.sigma.len();
        let (n1, n2) = (self.n1, self.n2);
        let grid = z.grid();
        let n = grid.n();

        // z2 component, a function of sigma itself
        let k2: Vec<f64> = (0..m).map(|j| self.z2[j] * self.dz2[j] / self.d[j].powi(2)).collect();
        let (j2, c2, mean2) = self.cumulative(&k2);
        let g2: Vec<f64> = (0..m)
            .map(|j| {
                let z2 = self.z2[j];
                (-2.0 * z2.powi(3) / self.d[j].powi(2) + 4.0 * z2 * j2[j] - 4.0 * c2 * z2) / n2
            })
            .collect();
        let parity2 = z.z2.class.parity();
        let mut g2s = Series::from_samples(&g2, self.span, parity2, n, 1.0 / m as f64);
        // J2 = mean2 (P - sigma) + periodic: the FFT of the term 4 mean2 (P -
        // sigma) z2 / n2 is a trapezoid rule for a function with a kink at 0;
        // add the leading Euler-Maclaurin endpoint term (as for z1 below)
        let h = self.period / m as f64;
        let b2: Vec<f64> = self.z2.iter().map(|z2| 4.0 * mean2 * z2 / n2).collect();
        let db2 = central_derivative(&b2, h, self.continuation(parity2));
        for k in g2s.modes() {
            if parity2.is_none_or(|p| k.rem_euclid(2) as u8 == p) {
                let end = Complex64::new(db2, -PI * k as f64 * b2[0]) * (h * h / 12.0);
                g2s.set_coeff(k, g2s.coeff(k) + end);
            }
        }

        // z1 component lives at xi = phi(sigma); its Fourier coefficients are
        // sigma-integrals against exp(-i pi m phi(sigma))
        let k1: Vec<f64> = (0..m)
            .map(|j| (n1 / n2) * self.z2[j].powi(2) / self.d[j].powi(2) * self.dz1p[j] / self.z1p[j])
            .collect();
        let (j1, c1, mean1) = self.cumulative(&k1);
        let weights: Vec<f64> = (0..m)
            .map(|j| {
                let (z1, z2, d) = (self.z1p[j], self.z2[j], self.d[j]);
                let dphi = (n1 / n2) * z2 * z2 / (z1 * z1);
                (2.0 * z1.powi(3) / (d * d) - 4.0 * z1 * j1[j] + 4.0 * c1 * z1) / n1 * dphi
            })
            .collect();
        let parity1 = z.z1.class.parity();
        let mut g1s = Series::zeros(n, parity1);
        let (start, step) = match parity1 {
            Some(0) => (0, 2),
            Some(_) => (1, 2),
            None => (0, 1),
        };
        let mmax = g1s.max_mode();
        let mut acc = vec![Complex64::new(0.0, 0.0); (mmax + 1) as usize];
        for j in 0..m {
            let w0 = Complex64::from_polar(weights[j], -PI * self.phi[j] * start as f64);
            let ws = Complex64::from_polar(1.0, -PI * self.phi[j] * step as f64);
            let mut e = w0;
            let mut k = start;
            while k <= mmax {
                acc[k as usize] += e;
                e *= ws;
                k += step;
            }
        }
        // likewise for the term mean1 (P - sigma) B(sigma) of the weights
        let b: Vec<f64> = (0..m)
            .map(|j| -4.0 * self.z1p[j] * mean1 * (n1 / n2) * self.z2[j].powi(2) / self.z1p[j].powi(2) / n1)
            .collect();
        let db0 = central_derivative(&b, h, self.continuation(parity1));
        let dphi0 = (n1 / n2) * self.z2[0].powi(2) / self.z1p[0].powi(2);
        let scale = 1.0 / m as f64;
        let mut k = start;
        while k <= mmax {
            let end = Complex64::new(db0, -PI * k as f64 * dphi0 * b[0]) * (h * h / 12.0);
            let c = acc[k as usize] * scale + end;
            if k == 0 {
                g1s.set_coeff(0, Complex64::new(c.re, 0.0));
            } else {
                g1s.set_coeff(k, c);
                g1s.set_coeff(-k, c.conj());
            }
            k += step;
        }
        let g1 = ZLoop::from_series(grid, &g1s, z.z1.class);
        let g2 = ZLoop::from_series(grid, &g2s, z.z2.class);
        (in_class(g1, z.z1.class), in_class(g2, z.z2.class))
    }
}

/// Instantaneous interaction `-int_0^1 dt/(q1 - q2)`.
pub fn eval_i(z: &ZPair) -> Result<f64> {
    Ok(crossing(z)?.value())
}

pub fn grad_i(z: &ZPair) -> Result<(ZLoop, ZLoop)> {
    Ok(crossing(z)?.gradient(z))
}

/// Value and gradient of `I` from one shared set of time changes.
pub fn eval_grad_i(z: &ZPair) -> Result<(f64, (ZLoop, ZLoop))> {
    let c = crossing(z)?;
    Ok((c.value(), c.gradient(z)))
}

/// `min_sigma (q1 - q2)` along the inner electron's time; positive iff the
/// pair lies in the instantaneous domain.
pub fn min_gap(z: &ZPair) -> Result<f64> {
    match crossing(z) {
        Ok(c) => Ok(c.d.iter().cloned().fold(f64::INFINITY, f64::min)),
        Err(Error::OutsideInstantaneous(d, _)) => Ok(d),
        Err(e) => Err(e),
    }
}

pub fn eval_b(z: &ZPair, p: &ModelParams) -> Result<f64> {
    let mut b = eval_q(&z.z1, p.charge)? + eval_q(&z.z2, p.charge)?;
    if p.r < 1.0 {
        b += (1.0 - p.r) * eval_a(z)?;
    }
    if p.r > 0.0 {
        b += p.r * eval_i(z)?;
    }
    Ok(b)
}

pub fn grad_b(z: &ZPair, p: &ModelParams) -> Result<(ZLoop, ZLoop)> {
    let (i1, i2) = interaction_gradient(z, p.r)?;
    let g1 = grad_q(&z.z1, p.charge)?.axpy(1.0, &i1);
    let g2 = grad_q(&z.z2, p.charge)?.axpy(1.0, &i2);
    Ok((g1, g2))
}

/// `r grad I + (1 - r) grad A`.
fn interaction_gradient(z: &ZPair, r: f64) -> Result<(ZLoop, ZLoop)> {
    let mut g1 = ZLoop::constant(z.grid(), z.z1.class, 0.0);
    let mut g2 = ZLoop::constant(z.grid(), z.z2.class, 0.0);
    if r < 1.0 {
        let (a1, a2) = grad_a(z)?;
        g1 = g1.axpy(1.0 - r, &a1);
        g2 = g2.axpy(1.0 - r, &a2);
    }
    if r > 0.0 {
        let (i1, i2) = grad_i(z)?;
        g1 = g1.axpy(r, &i1);
        g2 = g2.axpy(r, &i2);
    }
    Ok((g1, g2))
}

fn interaction_value(z: &ZPair, r: f64) -> Result<f64> {
    let mut v = 0.0;
    if r < 1.0 {
        v += (1.0 - r) * eval_a(z)?;
    }
    if r > 0.0 {
        v += r * eval_i(z)?;
    }
    Ok(v)
}

/// The decoupled family `F^r = (F1, F2^r)`,
/// `F_i = -z_i'' + a_i z_i + b_i z_i^3`: the mean-interaction force acts on
/// the outer electron in full and on the inner one with weight `r`.  At
/// `r = 1`, `grad B_av = (4|z1|^2 F1, 4|z2|^2 F2)`; at `r = 0` the second
/// component is the bare Kepler problem.
pub fn decoupled_f(z: &ZPair, r: f64, charge: f64) -> Result<(ZLoop, ZLoop)> {
    let MeanNorms { n1, n2, s1, s2, d } = mean_norms(z)?;
    let d2 = d * d;
    let dn1 = derivative(&z.z1).norm2();
    let dn2 = derivative(&z.z2).norm2();
    let a1 = dn1 / n1 - charge / (2.0 * n1.powi(3)) - n2 * n2 * s1 / (2.0 * n1 * d2);
    let b1 = n2 * n2 / d2;
    let a2 = dn2 / n2 - charge / (2.0 * n2.powi(3)) + r * n1 * n1 * s2 / (2.0 * n2 * d2);
    let b2 = -r * n1 * n1 / d2;
    let f = |z: &ZLoop, a: f64, b: f64| {
        let zpp = second_derivative(z);
        let values = z.values.iter().zip(&zpp.values).map(|(v, w)| -w + a * v + b * v.powi(3)).collect();
        in_class(ZLoop::new(z.grid, values, z.class), z.class)
    };
    Ok((f(&z.z1, a1, b1), f(&z.z2, a2, b2)))
}

/// Momentum `eta = 4|z|^2 z'`.
pub fn legendre(z: &ZLoop) -> ZLoop {
    derivative(z).scale(4.0 * z.norm2())
}

pub fn legendre_pair(z: &ZPair) -> Momentum {
    Momentum { eta1: legendre(&z.z1), eta2: legendre(&z.z2) }
}

/// `H = sum_i (|eta_i|^2/(8|z_i|^2) - N/|z_i|^2) - (r I + (1-r) A)`.
pub fn eval_h(z: &ZPair, eta: &Momentum, p: &ModelParams) -> Result<f64> {
    let n1 = norm2_checked(&z.z1)?;
    let n2 = norm2_checked(&z.z2)?;
    let kin = eta.eta1.norm2() / (8.0 * n1) + eta.eta2.norm2() / (8.0 * n2);
    Ok(kin - p.charge / n1 - p.charge / n2 - interaction_value(z, p.r)?)
}

/// Residuals of the Hamilton equations
/// `(z1' - d_eta1 H, z2' - d_eta2 H, eta1' + d_z1 H, eta2' + d_z2 H)`.
pub fn hamilton_residual(z: &ZPair, eta: &Momentum, p: &ModelParams) -> Result<[ZLoop; 4]> {
    let (i1, i2) = interaction_gradient(z, p.r)?;
    let part = |z: &ZLoop, eta: &ZLoop, gi: &ZLoop| -> Result<(ZLoop, ZLoop)> {
        let n = norm2_checked(z)?;
        let e2 = eta.norm2();
        let dz = derivative(z);
        let q_res = dz.axpy(-1.0 / (4.0 * n), eta);
        let grad_z = z.scale(-e2 / (4.0 * n * n) + 2.0 * p.charge / (n * n)).axpy(-1.0, gi);
        let p_res = derivative(eta).axpy(1.0, &grad_z);
        Ok((q_res, p_res))
    };
    let (r1, s1) = part(&z.z1, &eta.eta1, &i1)?;
    let (r2, s2) = part(&z.z2, &eta.eta2, &i2)?;
    Ok([r1, r2, s1, s2])
}

/// `<eta, z'> - H`, equal to `B_r` at Legendre-consistent points.
pub fn hamiltonian_action(z: &ZPair, eta: &Momentum, p: &ModelParams) -> Result<f64> {
    let a = inner(&eta.eta1, &derivative(&z.z1))? + inner(&eta.eta2, &derivative(&z.z2))?;
    Ok(a - eval_h(z, eta, p)?)
}

/// Closed forms of the decoupled problem.
pub mod closed_form {
    use std::f64::consts::PI;

    /// Amplitude of the symmetric Kepler collision loop `zeta sin(pi tau)`.
    pub fn zeta(charge: f64) -> f64 {
        (2.0 * charge / (PI * PI)).powf(1.0 / 6.0)
    }

    /// Its constant Kepler energy `-N / zeta^2`.
    pub fn kepler_energy(charge: f64) -> f64 {
        -charge / zeta(charge).powi(2)
    }

    /// Mean position `a = qbar` of the Kepler collision orbit.
    pub fn kepler_mean(charge: f64) -> f64 {
        0.75 * zeta(charge).powi(2)
    }

    /// Constant outer loop balancing the mean repulsion:
    /// `zbar^2 = sqrt(N) a / (sqrt(N) - 1)`.
    pub fn zbar1(charge: f64) -> f64 {
        let s = charge.sqrt();
        (s * kepler_mean(charge) / (s - 1.0)).sqrt()
    }

    /// Derivative of `F1` at the constant solution in the constant
    /// direction, `lambda = -2a / (zbar^2 (zbar^2 - a)^3)` for `N = 2`.
    ///
    /// For general charge the same computation gives
    /// `g'(zbar)` with `g(x) = -N/(2x^5) + 1/(2x (x^2 - a)^2)`.
    pub fn lambda(charge: f64) -> f64 {
        let a = kepler_mean(charge);
        let z = zbar1(charge);
        let u = z * z - a;
        5.0 * charge / (2.0 * z.powi(6)) - 1.0 / (2.0 * z * z * u * u) - 2.0 / (u * u * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LoopGrid;

    fn consts(n: usize, class: SymmetryClass) -> ZPair {
        let g = LoopGrid::new(n).unwrap();
        ZPair::new(ZLoop::constant(g, class, 2.0), ZLoop::constant(g, class, 1.0)).unwrap()
    }

    #[test]
    fn q_closed_forms() {
        let g = LoopGrid::new(64).unwrap();
        let c = ZLoop::constant(g, SymmetryClass::Periodic1, 1.5);
        assert!((eval_q(&c, 2.0).unwrap() - 2.0 / 2.25).abs() < 1e-14);
        let gc = grad_q(&c, 2.0).unwrap();
        assert!(gc.values.iter().all(|v| (v + 4.0 / 1.5f64.powi(3)).abs() < 1e-13));
        let s = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).sin());
        assert!((eval_q(&s, 2.0).unwrap() - (PI * PI / 2.0 + 4.0)).abs() < 1e-12);
        let zeta = closed_form::zeta(2.0);
        let k = s.scale(zeta);
        // at the critical amplitude both terms of Q balance: Q = 6 (pi^2/4)^{1/3}
        assert!((eval_q(&k, 2.0).unwrap() - 6.0 * (PI * PI / 4.0).cbrt()).abs() < 1e-12);
        assert!((kepler_a(&k, 2.0) + PI * PI).abs() < 1e-12);
    }

    #[test]
    fn constant_pair_interactions() {
        for class in [SymmetryClass::Plain, SymmetryClass::Periodic1] {
            let z = consts(32, class);
            assert!((eval_a(&z).unwrap() + 1.0 / 3.0).abs() < 1e-15);
            assert!((eval_i(&z).unwrap() + 1.0 / 3.0).abs() < 1e-14);
            let (a1, a2) = grad_a(&z).unwrap();
            assert!(a1.values.iter().all(|v| (v - 4.0 / 9.0).abs() < 1e-14));
            assert!(a2.values.iter().all(|v| (v + 2.0 / 9.0).abs() < 1e-14));
            let (i1, i2) = grad_i(&z).unwrap();
            assert!(i1.values.iter().all(|v| (v - 4.0 / 9.0).abs() < 1e-12), "{:?}", &i1.values[..3]);
            assert!(i2.values.iter().all(|v| (v + 2.0 / 9.0).abs() < 1e-12));
        }
    }

    #[test]
    fn b_closed_form_at_constants() {
        let z = consts(32, SymmetryClass::Plain);
        let b = eval_b(&z, &ModelParams::new(2.0, 1.0).unwrap()).unwrap();
        assert!((b - 13.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn lambda_magnitude() {
        let l = closed_form::lambda(2.0);
        let a = closed_form::kepler_mean(2.0);
        let z = closed_form::zbar1(2.0);
        assert!((l + 2.0 * a / (z * z * (z * z - a).powi(3))).abs() < 1e-12);
        assert!(l < 0.0);
    }

    #[test]
    fn outside_domains_are_reported() {
        let g = LoopGrid::new(32).unwrap();
        let z = ZPair::new(ZLoop::constant(g, SymmetryClass::Plain, 1.0), ZLoop::constant(g, SymmetryClass::Plain, 2.0)).unwrap();
        assert!(matches!(eval_a(&z), Err(Error::OutsideMean(_))));
        assert!(matches!(eval_i(&z), Err(Error::OutsideInstantaneous(..))));
    }
}
