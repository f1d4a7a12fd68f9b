//! Levi-Civita layer: time changes `t_z`, `tau_z`, the maps `z <-> q`,
//! composed time changes and Kepler energies.
//!
//! The time change is `t_z(tau) = (1/|z|^2) int_0^tau z^2`.  For a
//! band-limited `z`, `z^2` is band-limited with twice the bandwidth, so `t_z`
//! is computed exactly as a linear term plus a trigonometric series; its
//! derivative `z^2/|z|^2` is nonnegative, so the interpolant is monotone by
//! construction.

use crate::error::{Error, Result};
use crate::grid::{derivative, LoopGrid, SymmetryClass, ZLoop, ZPair};
use crate::spectral::{gauss_legendre, Series};
use std::f64::consts::PI;

/// Solve `f(x) = target` for increasing `f` on a bracket, by Newton steps
/// that fall back to bisection whenever they leave the bracket.
pub(crate) fn invert_monotone(f: impl Fn(f64) -> (f64, f64), target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if target <= flo {
        return lo;
    }
    if target >= fhi {
        return hi;
    }
    let mut x = lo + (hi - lo) * (target - flo) / (fhi - flo);
    for _ in 0..200 {
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
        if (xn - x).abs() <= 4e-16 * (1.0 + x.abs()) || hi - lo <= 4e-16 * (1.0 + x.abs()) {
            return xn;
        }
        x = xn;
    }
    x
}

/// Exact square of a band-limited loop as a series on a doubled grid.
pub(crate) fn square_series(z: &Series) -> Series {
    let n = z.n();
    let parity = z.parity().map(|_| 0u8);
    let samples: Vec<f64> = z.with_size(2 * n).values().into_iter().map(|v| v * v).collect();
    Series::from_values(&samples, parity)
}

/// The sampled time change of a loop.
#[derive(Clone, Debug)]
pub struct TimeChange {
    pub grid: LoopGrid,
    /// `t_z(tau_j)` on the tau-grid.
    pub t_of_tau: Vec<f64>,
    /// `tau_z(t_j)` on the uniform t-grid.
    pub tau_of_t: Vec<f64>,
    z: Series,
    drift: Series,
    drift0: f64,
    norm2: f64,
}

impl TimeChange {
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    /// `t_z(tau)` for any real `tau`.
    pub fn t_at(&self, tau: f64) -> f64 {
        tau + self.drift.eval(tau) - self.drift0
    }

    fn t_and_rate(&self, tau: f64) -> (f64, f64) {
        let z = self.z.eval(tau);
        (self.t_at(tau), z * z / self.norm2)
    }

    /// `tau_z(t)` for any real `t`.
    pub fn tau_at(&self, t: f64) -> f64 {
        let k = (t / 2.0).floor();
        let r = t - 2.0 * k;
        let n = self.grid.n();
        let j = self.t_of_tau.partition_point(|&v| v <= r).saturating_sub(1);
        // near a zero t ~ tau^3, so a rounding-level mismatch between the
        // tabulated and the summed t_z would be amplified to ~1e-6 in tau
        if (r - self.t_of_tau[j]).abs() <= 4.0 * f64::EPSILON * (1.0 + r) {
            return 2.0 * k + self.grid.tau(j);
        }
        let lo = self.grid.tau(j);
        let hi = if j + 1 < n { self.grid.tau(j + 1) } else { 2.0 };
        2.0 * k + invert_monotone(|x| self.t_and_rate(x), r, lo, hi)
    }
}

/// Build `t_z` and its inverse.
pub fn time_change(z: &ZLoop) -> Result<TimeChange> {
    let norm2 = z.norm2();
    let scale = z.sup_norm();
    if norm2 <= 0.0 || !norm2.is_finite() {
        return Err(Error::DegenerateLoop);
    }
    // an interval of zeros shows up as a run of vanishing samples
    let n = z.n();
    let tiny = 1e-13 * scale;
    let mut run = 0;
    for j in 0..2 * n {
        if z.values[j % n].abs() <= tiny {
            run += 1;
            if run >= 3 {
                return Err(Error::DegenerateLoop);
            }
        } else {
            run = 0;
        }
    }
    let zs = z.series();
    let sq = square_series(&zs);
    let rate = sq.map_modes(|m, c| if m == 0 { c * 0.0 } else { c / norm2 });
    let (_, drift) = rate.antiderivative();
    let drift0 = drift.eval(0.0);
    let mut tc = TimeChange {
        grid: z.grid,
        t_of_tau: Vec::new(),
        tau_of_t: Vec::new(),
        z: zs,
        drift,
        drift0,
        norm2,
    };
    let drift_grid = tc.drift.sample(2 * n, 2);
    tc.t_of_tau = (0..n).map(|j| z.grid.tau(j) + drift_grid[2 * j] - drift_grid[0]).collect();
    tc.tau_of_t = (0..n).map(|j| tc.tau_at(z.grid.tau(j))).collect();
    Ok(tc)
}

/// `q(t_j) = z(tau_z(t_j))^2` on the uniform t-grid.
pub fn z_to_q(z: &ZLoop) -> Result<Vec<f64>> {
    let tc = time_change(z)?;
    let zs = z.series();
    Ok(tc.tau_of_t.iter().map(|&tau| zs.eval(tau).powi(2)).collect())
}

/// `q` at arbitrary physical times.
pub fn z_to_q_at(z: &ZLoop, ts: &[f64]) -> Result<Vec<f64>> {
    let tc = time_change(z)?;
    let zs = z.series();
    Ok(ts.iter().map(|&t| zs.eval(tc.tau_at(t)).powi(2)).collect())
}

/// Samples of `zb(tau_zb(t_za(tau_j)))` on the tau-grid.
pub fn cross_eval(za: &ZLoop, zb: &ZLoop) -> Result<Vec<f64>> {
    if za.grid != zb.grid {
        return Err(Error::IncompatibleGrids);
    }
    let ta = time_change(za)?;
    let tb = time_change(zb)?;
    let zs = zb.series();
    Ok(ta.t_of_tau.iter().map(|&t| zs.eval(tb.tau_at(t))).collect())
}

/// Mean of `q` over one period: `|z^2|^2 / |z|^2`.
pub fn mean_q(z: &ZLoop) -> f64 {
    let s4: f64 = z.values.iter().map(|v| v.powi(4)).sum::<f64>() / z.n() as f64;
    s4 / z.norm2()
}

/// `int dt / q = 1/|z|^2`.
pub fn mean_inv_q(z: &ZLoop) -> f64 {
    1.0 / z.norm2()
}

/// `|qdot|^2 = 4 |z|^2 |z'|^2`.
pub fn qdot_norm2(z: &ZLoop) -> f64 {
    4.0 * z.norm2() * derivative(z).norm2()
}

/// Relative size below which a sample counts as a zero of `z`.
const ZERO_TOL: f64 = 1e-10;

/// `(2 |z|^4 z'^2 / T^2 - N) / z^2` for a loop traversed in physical time `T`.
fn energy_from_derivs(d: [f64; 4], norm2: f64, charge: f64, sup: f64, tau: f64, period: f64) -> Result<f64> {
    let [z, z1, z2, z3] = d;
    let k = 2.0 * norm2 * norm2 / (period * period);
    if z.abs() > ZERO_TOL * sup {
        return Ok((k * z1 * z1 - charge) / (z * z));
    }
    if z1.abs() <= 1e-3 * sup {
        return Err(Error::NonTransverse(tau));
    }
    // second-order expansion of numerator and denominator at the zero
    Ok(k * (z2 * z2 + z1 * z3) / (z1 * z1))
}

pub(crate) fn energies(z: &ZLoop, charge: f64, taus: &[f64], period: f64) -> Result<Vec<f64>> {
    let zs = z.series();
    let norm2 = z.norm2();
    let sup = z.sup_norm();
    taus.iter()
        .map(|&tau| energy_from_derivs(zs.eval_derivs::<4>(tau), norm2, charge, sup, tau, period))
        .collect()
}

/// Kepler energy `E_z = (2|z|^4 z'^2 - N)/z^2` on the tau-grid, continued
/// through transverse zeros.
pub fn kepler_energy(z: &ZLoop, charge: f64) -> Result<Vec<f64>> {
    let zs = z.series();
    let d1 = zs.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let (v0, v1, v2, v3) = (zs.values(), d1.values(), d2.values(), d3.values());
    let norm2 = z.norm2();
    let sup = z.sup_norm();
    (0..z.n())
        .map(|j| energy_from_derivs([v0[j], v1[j], v2[j], v3[j]], norm2, charge, sup, z.grid.tau(j), 1.0))
        .collect()
}

/// Kepler energy at arbitrary regularized times.
pub fn kepler_energy_at(z: &ZLoop, charge: f64, taus: &[f64]) -> Result<Vec<f64>> {
    energies(z, charge, taus, 1.0)
}

/// Zeros of `z` in `[0, 2)`, located on the trigonometric interpolant.
pub fn loop_zeros(z: &ZLoop) -> Vec<f64> {
    let zs = z.series();
    let n = z.n();
    let h = z.grid.h();
    let tiny = ZERO_TOL * z.sup_norm();
    let mut out = Vec::new();
    for j in 0..n {
        let a = z.values[j];
        let b = z.values[(j + 1) % n];
        if a.abs() <= tiny {
            out.push(z.grid.tau(j));
        } else if b.abs() > tiny && a.signum() != b.signum() {
            let s = a.signum();
            let x = invert_monotone(
                |x| {
                    let d = zs.eval_derivs::<2>(x);
                    (-s * d[0], -s * d[1])
                },
                0.0,
                z.grid.tau(j),
                z.grid.tau(j) + h,
            );
            out.push(x);
        }
    }
    out
}

/// Inverse of the Levi-Civita map: recover `z` from samples of `q` on the
/// uniform t-grid of the period-2 domain.
///
/// Between consecutive collisions the segment `[a, b]` is reparametrized as
/// `t = a + (b - a) u(s)` with `u(s) = s - sin(2 pi s)/(2 pi)`, which behaves
/// like `s^3` at both ends; since `q ~ |t - a|^{2/3}` at a regular collision,
/// `sqrt(q)` is smooth in `s` and is interpolated there by local
/// polynomials.  Without collisions the whole map is spectral.
pub fn q_to_z(q: &[f64], odd_zero_count: bool, sign: f64) -> Result<ZLoop> {
    let n = q.len();
    let grid = LoopGrid::new(n)?;
    let qmax = q.iter().cloned().fold(0.0, f64::max);
    if !(qmax > 0.0) || q.iter().any(|v| !v.is_finite() || *v < -1e-12 * qmax) {
        return Err(Error::DegenerateLoop);
    }
    let q: Vec<f64> = q.iter().map(|v| v.max(0.0)).collect();
    let h = grid.h();
    let zeros = q_zeros(&q, h, qmax)?;
    let per_unit = zeros.iter().filter(|&&t| t < 1.0 - 0.5 * h).count();
    let expected = if odd_zero_count { "an odd number of" } else { "an even number of" };
    if zeros.len() % 2 != 0 || (per_unit % 2 == 1) != odd_zero_count {
        return Err(Error::ParityMismatch { expected, found: per_unit });
    }
    let class = if odd_zero_count { SymmetryClass::Antiperiodic } else { SymmetryClass::Periodic1 };
    let sign = if sign < 0.0 { -1.0 } else { 1.0 };
    if zeros.is_empty() {
        return q_to_z_smooth(grid, &q, sign, class);
    }
    let segs: Vec<Segment> = (0..zeros.len())
        .map(|i| {
            let a = zeros[i];
            let b = if i + 1 < zeros.len() { zeros[i + 1] } else { zeros[0] + 2.0 };
            Segment::new(a, b, &q, h)
        })
        .collect();
    let mut cum = vec![0.0];
    for s in &segs {
        cum.push(cum.last().unwrap() + s.total());
    }
    let total = *cum.last().unwrap();
    let norm2 = 2.0 / total;
    // position of physical time 0 (or 2) inside the segment chain
    let (i0, v0) = if zeros[0] <= 0.0 {
        (0, 0.0)
    } else {
        let i = segs.len() - 1;
        (i, cum[i] + segs[i].integral_to_time(2.0))
    };
    let values = (0..n)
        .map(|j| {
            let v = (v0 + grid.tau(j) / norm2).rem_euclid(total);
            let i = cum.partition_point(|&c| c <= v).saturating_sub(1).min(segs.len() - 1);
            let y = segs[i].value_at_integral(v - cum[i]);
            let flips = (i + segs.len() - i0) % segs.len();
            let s = if flips.is_multiple_of(2) { sign } else { -sign };
            s * y
        })
        .collect();
    Ok(ZLoop::new(grid, values, class))
}

fn q_zeros(q: &[f64], h: f64, qmax: f64) -> Result<Vec<f64>> {
    let n = q.len();
    let w: Vec<f64> = q.iter().map(|v| v.powf(1.5)).collect();
    let at = |j: isize| q[j.rem_euclid(n as isize) as usize];
    let wt = |j: isize| w[j.rem_euclid(n as isize) as usize];
    let mut zeros = Vec::new();
    for j in 0..n as isize {
        let (qm, q0, qp) = (at(j - 1), at(j), at(j + 1));
        if q0 > qm || q0 > qp {
            continue;
        }
        let t0 = if q0 <= 1e-14 * qmax {
            Some(j as f64 * h)
        } else if q0 < 1e-2 * qmax {
            // w = q^{3/2} is linear in |t - t0| near a regular collision
            let (l1, l0) = (wt(j - 2), wt(j - 1));
            let (r0, r1) = (wt(j + 1), wt(j + 2));
            let tl = (j - 1) as f64 * h + l0 / (l1 - l0) * h;
            let tr = (j + 1) as f64 * h - r0 / (r1 - r0) * h;
            let lo = (j - 1) as f64 * h;
            let hi = (j + 1) as f64 * h;
            if l1 > l0 && r1 > r0 && tl > lo && tr < hi && (tl - tr).abs() < 0.25 * h {
                Some(0.5 * (tl + tr))
            } else {
                None
            }
        } else {
            None
        };
        if let Some(t0) = t0 {
            // q ~ |t|^p with p < 1 keeps 1/q integrable; p = 2^{...}
            let k = (t0 / h).round() as isize;
            for dir in [-1isize, 1] {
                let (a, b) = (at(k + 2 * dir), at(k + 4 * dir));
                if a > 0.0 && b / a > 2.0f64.powf(0.9 * 2.0) {
                    return Err(Error::NotRegularizable);
                }
            }
            zeros.push(t0.rem_euclid(2.0));
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).abs() < 0.5 * h);
    Ok(zeros)
}

fn q_to_z_smooth(grid: LoopGrid, q: &[f64], sign: f64, class: SymmetryClass) -> Result<ZLoop> {
    let inv: Vec<f64> = q.iter().map(|v| 1.0 / v).collect();
    let s_inv = Series::from_values(&inv, None);
    let mu = s_inv.mean();
    let (_, prim) = s_inv.antiderivative();
    let p0 = prim.eval(0.0);
    let qs = Series::from_values(q, None);
    let tau_of = |t: f64| (t * mu + prim.eval(t) - p0) / mu;
    let values = grid
        .points()
        .into_iter()
        .map(|tau| {
            let t = invert_monotone(|t| (tau_of(t), 1.0 / (mu * qs.eval(t))), tau, tau - 1.0, tau + 1.0);
            sign * qs.eval(t).max(0.0).sqrt()
        })
        .collect();
    Ok(ZLoop::new(grid, values, class))
}

/// One collision-free stretch of a sampled `q`, reparametrized by `s`.
///
/// Since `u'(s) = 2 sin^2(pi s)`, writing `sqrt(q) = w(s) sin(pi s)` turns
/// `dt/q` into `2 L ds / w^2` with `w` smooth and positive up to both
/// ends; `w` is interpolated from the interior samples.
struct Segment {
    a: f64,
    len: f64,
    nodes: Vec<f64>,
    vals: Vec<f64>,
    panels: Vec<f64>,
    cum: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

const SEG_STENCIL: usize = 16;

fn u_map(s: f64) -> (f64, f64) {
    (s - (2.0 * PI * s).sin() / (2.0 * PI), 1.0 - (2.0 * PI * s).cos())
}

impl Segment {
    fn new(a: f64, b: f64, q: &[f64], h: f64) -> Segment {
        let n = q.len();
        let len = b - a;
        let mut nodes = Vec::new();
        let mut vals = Vec::new();
        // w continues analytically through both collisions (the signed
        // sqrt(q) is analytic in the signed cube root of the time), so the
        // first samples beyond each end serve as ghost nodes and the ends are
        // interpolated rather than extrapolated
        let ghosts = (SEG_STENCIL / 2) as isize;
        let first = (a / h).floor() as isize + 1 - ghosts;
        let last = (b / h).ceil() as isize - 1 + ghosts;
        for j in first..=last {
            let t = j as f64 * h;
            if (t - a).abs() <= 1e-9 * h || (t - b).abs() <= 1e-9 * h {
                continue;
            }
            let x = (t - a) / len;
            let s = if x < 0.0 {
                -invert_monotone(u_map, -x, 0.0, 1.0)
            } else if x > 1.0 {
                1.0 + invert_monotone(u_map, x - 1.0, 0.0, 1.0)
            } else {
                invert_monotone(u_map, x, 0.0, 1.0)
            };
            nodes.push(s);
            vals.push(q[(j.rem_euclid(n as isize)) as usize].sqrt() / (PI * s).sin().abs());
        }
        let panel_count = (nodes.len() / 2).max(4);
        let panels: Vec<f64> = (0..=panel_count).map(|k| k as f64 / panel_count as f64).collect();
        let gl = gauss_legendre(12);
        let mut seg = Segment { a, len, nodes, vals, panels, cum: vec![0.0], gl };
        for k in 0..panel_count {
            let v = seg.cum[k] + seg.integrate(seg.panels[k], seg.panels[k + 1]);
            seg.cum.push(v);
        }
        seg
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn y(&self, s: f64) -> f64 {
        self.w(s) * (PI * s).sin()
    }

    /// Local polynomial interpolant of `sqrt(q) / sin(pi s)`.
    fn w(&self, s: f64) -> f64 {
        let m = self.nodes.len();
        let p = SEG_STENCIL.min(m);
        let i = self.nodes.partition_point(|&x| x <= s);
        let start = i.saturating_sub(p / 2).min(m - p);
        let xs = &self.nodes[start..start + p];
        let ys = &self.vals[start..start + p];
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..p {
            let d = s - xs[k];
            if d == 0.0 {
                return ys[k];
            }
            let mut wk = 1.0;
            for l in 0..p {
                if l != k {
                    wk /= xs[k] - xs[l];
                }
            }
            num += wk / d * ys[k];
            den += wk / d;
        }
        num / den
    }

    fn density(&self, s: f64) -> f64 {
        let w = self.w(s);
        2.0 * self.len / (w * w)
    }

    fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let (x, w) = &self.gl;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        x.iter().zip(w).map(|(x, w)| w * half * self.density(mid + half * x)).sum()
    }

    fn integral_to_s(&self, s: f64) -> f64 {
        let k = self.panels.partition_point(|&p| p <= s).saturating_sub(1).min(self.panels.len() - 2);
        self.cum[k] + self.integrate(self.panels[k], s)
    }

    fn integral_to_time(&self, t: f64) -> f64 {
        let x = ((t - self.a) / self.len).clamp(0.0, 1.0);
        self.integral_to_s(invert_monotone(u_map, x, 0.0, 1.0))
    }

    fn value_at_integral(&self, v: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= v).saturating_sub(1).min(self.panels.len() - 2);
        let s = invert_monotone(
            |s| (self.cum[k] + self.integrate(self.panels[k], s), self.density(s)),
            v,
            self.panels[k],
            self.panels[k + 1],
        );
        self.y(s)
    }
}

/// Physical trajectories of both electrons on the uniform t-grid.
#[derive(Clone, Debug)]
pub struct QOrbit {
    pub grid: LoopGrid,
    /// Physical time of each sample.
    pub t: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    /// Collision times of the inner electron in `[0, 2 T)`.
    pub zeros2: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub r: f64,
    /// Physical length of one unit of normalized time.
    pub period: f64,
    pub charge: f64,
    pub pair: ZPair,
}

impl QOrbit {
    pub fn from_pair(pair: &ZPair, r: f64, charge: f64) -> Result<QOrbit> {
        Self::with_period(pair, r, charge, 1.0)
    }

    /// Orbit whose normalized period is stretched to `period` physical time
    /// units; the loops must already carry the matching amplitude
    /// (`q -> c^2 q` for `period = c^3`).
    pub fn with_period(pair: &ZPair, r: f64, charge: f64, period: f64) -> Result<QOrbit> {
        let grid = pair.grid();
        let tc1 = time_change(&pair.z1)?;
        let tc2 = time_change(&pair.z2)?;
        let tau1: Vec<f64> = tc1.tau_of_t.clone();
        let tau2: Vec<f64> = tc2.tau_of_t.clone();
        let s1 = pair.z1.series();
        let s2 = pair.z2.series();
        let q1 = tau1.iter().map(|&x| s1.eval(x).powi(2)).collect();
        let q2 = tau2.iter().map(|&x| s2.eval(x).powi(2)).collect();
        let e1 = energies(&pair.z1, charge, &tau1, period)?;
        let e2 = energies(&pair.z2, charge, &tau2, period)?;
        let zeros2 = loop_zeros(&pair.z2).into_iter().map(|tau| tc2.t_at(tau) * period).collect();
        Ok(QOrbit {
            grid,
            t: grid.points().into_iter().map(|t| t * period).collect(),
            q1,
            q2,
            zeros2,
            e1,
            e2,
            r,
            period,
            charge,
            pair: pair.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> LoopGrid {
        LoopGrid::new(n).unwrap()
    }

    #[test]
    fn constant_loop_has_identity_time() {
        let z = ZLoop::constant(grid(32), SymmetryClass::Periodic1, 1.7);
        let tc = time_change(&z).unwrap();
        for (j, t) in tc.t_of_tau.iter().enumerate() {
            assert!((t - grid(32).tau(j)).abs() < 1e-14);
        }
        let q = z_to_q(&z).unwrap();
        assert!(q.iter().all(|v| (v - 1.7 * 1.7).abs() < 1e-13));
    }

    #[test]
    fn sine_time_change_closed_form() {
        let g = grid(64);
        let z = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).sin());
        let tc = time_change(&z).unwrap();
        assert!((tc.t_at(0.25) - (0.25 - 1.0 / (2.0 * PI))).abs() < 1e-14);
        assert!((tc.t_at(0.5) - 0.5).abs() < 1e-14);
        for (j, &t) in tc.tau_of_t.iter().enumerate() {
            assert!((tc.t_at(t) - g.tau(j)).abs() < 1e-13);
        }
        let q = z_to_q(&z).unwrap();
        assert!(q[0].abs() < 1e-20);
        assert!((q[g.n() / 4] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn closed_form_means() {
        let g = grid(64);
        let z = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).sin());
        assert!((mean_q(&z) - 0.75).abs() < 1e-14);
        assert!((qdot_norm2(&z) - PI * PI).abs() < 1e-12);
        assert!((mean_inv_q(&z) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_inversion_brackets() {
        let x = invert_monotone(|x| (x.powi(3), 3.0 * x * x), 1e-9, -1.0, 1.0);
        assert!((x - 1e-3).abs() < 1e-15);
    }
}
