//! Dormand–Prince 5(4) integrator with step-size control and continuous output.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right-hand side of `dy/dt = f(t, y)`.
pub trait OdeSystem<T: Real> {
    fn rhs(&mut self, t: T, y: &[T], dy: &mut [T]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Upper bound on the step size.
    pub max_step: T,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl OdeStats {
    pub fn merge(&mut self, other: OdeStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

// Tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Work<T> {
    k: [Vec<T>; 7],
    tmp: Vec<T>,
    y_new: Vec<T>,
    cont: [Vec<T>; 5],
}

fn axpy_into<T: Real>(out: &mut [T], y: &[T], h: T, terms: &[(f64, &[T])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = T::zero();
        for (c, k) in terms {
            s += T::lit(*c) * k[i];
        }
        *o = y[i] + h * s;
    }
}

/// Integrates from `t0` to `t_end`, calling `sample(t, y)` at every entry of
/// `out_times` inside `(t0, t_end]` using the continuous extension.
///
/// `h` is the initial step; when it is `None` a step is estimated. The last
/// accepted step size is returned so that a following call can resume with it.
#[allow(clippy::too_many_arguments)]
pub fn integrate<T: Real, S: OdeSystem<T>>(
    sys: &mut S,
    t0: T,
    y: &mut [T],
    t_end: T,
    out_times: &[T],
    opts: &OdeOptions<T>,
    h: Option<T>,
    mut sample: impl FnMut(T, &[T]),
    stats: &mut OdeStats,
) -> Result<T> {
    let n = y.len();
    let mut w = Work {
        k: std::array::from_fn(|_| vec![T::zero(); n]),
        tmp: vec![T::zero(); n],
        y_new: vec![T::zero(); n],
        cont: std::array::from_fn(|_| vec![T::zero(); n]),
    };
    let span = t_end - t0;
    if span <= T::zero() {
        return Ok(h.unwrap_or(opts.max_step));
    }
    let mut t = t0;
    let mut next_out = out_times.partition_point(|&s| s <= t0);
    sys.rhs(t, y, &mut w.k[0]);
    stats.rhs_evals += 1;
    let mut h = match h {
        Some(h) => h,
        None => initial_step(sys, t, y, opts, &mut w, stats),
    }
    .min(opts.max_step)
    .min(span);
    let fifth = T::lit(0.2);
    let mut steps = 0usize;
    let mut last_rejected = false;
    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::ToleranceFailure { t: t.as_f64(), reason: format!("more than {} steps", opts.max_steps) });
        }
        let last = t + h >= t_end - span * T::lit(1e-14);
        if last {
            h = t_end - t;
        }
        if h <= T::machine_eps() * T::lit(16.0) * t.abs().max(T::one()) {
            return Err(Error::ToleranceFailure { t: t.as_f64(), reason: "step size underflow".into() });
        }
        let err = attempt(sys, t, y, h, opts, &mut w, stats);
        if !err.is_finite() {
            h *= T::lit(0.25);
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }
        if err <= T::one() {
            stats.accepted += 1;
            // Continuous-output coefficients.
            for i in 0..n {
                let ydiff = w.y_new[i] - y[i];
                let bspl = h * w.k[0][i] - ydiff;
                w.cont[0][i] = y[i];
                w.cont[1][i] = ydiff;
                w.cont[2][i] = bspl;
                w.cont[3][i] = ydiff - h * w.k[6][i] - bspl;
                w.cont[4][i] = h
                    * (T::lit(D1) * w.k[0][i]
                        + T::lit(D3) * w.k[2][i]
                        + T::lit(D4) * w.k[3][i]
                        + T::lit(D5) * w.k[4][i]
                        + T::lit(D6) * w.k[5][i]
                        + T::lit(D7) * w.k[6][i]);
            }
            let t_new = if last { t_end } else { t + h };
            while next_out < out_times.len() && out_times[next_out] <= t_new {
                let s = out_times[next_out];
                let th = (s - t) / h;
                let th1 = T::one() - th;
                for i in 0..n {
                    w.tmp[i] = w.cont[0][i]
                        + th * (w.cont[1][i] + th1 * (w.cont[2][i] + th * (w.cont[3][i] + th1 * w.cont[4][i])));
                }
                sample(s, &w.tmp);
                next_out += 1;
            }
            y.copy_from_slice(&w.y_new);
            // First-same-as-last.
            let k7 = std::mem::take(&mut w.k[6]);
            w.k[6] = std::mem::replace(&mut w.k[0], k7);
            t = t_new;
            if last {
                return Ok(h);
            }
            let mut fac = T::lit(0.9) * err.max(T::lit(1e-10)).powf(-fifth);
            fac = fac.min(if last_rejected { T::one() } else { T::lit(5.0) }).max(T::lit(0.2));
            h = (h * fac).min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (T::lit(0.9) * err.powf(-fifth)).max(T::lit(0.2));
            h *= fac;
            last_rejected = true;
        }
    }
}

fn error_norm<T: Real>(y: &[T], y_new: &[T], e: &[T], opts: &OdeOptions<T>) -> T {
    let mut s = T::zero();
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        let r = e[i] / sc;
        s += r * r;
    }
    (s / T::from_count(y.len().max(1))).sqrt()
}

/// One trial step of size `h`; leaves the 5th-order solution in `w.y_new` and
/// its derivative in `w.k[6]`. Returns the scaled error norm.
fn attempt<T: Real, S: OdeSystem<T>>(
    sys: &mut S,
    t: T,
    y: &[T],
    h: T,
    opts: &OdeOptions<T>,
    w: &mut Work<T>,
    stats: &mut OdeStats,
) -> T {
    let [k1, k2, k3, k4, k5, k6, k7] = &mut w.k;
    axpy_into(&mut w.tmp, y, h, &[(A21, k1)]);
    sys.rhs(t + T::lit(C2) * h, &w.tmp, k2);
    axpy_into(&mut w.tmp, y, h, &[(A31, k1), (A32, k2)]);
    sys.rhs(t + T::lit(C3) * h, &w.tmp, k3);
    axpy_into(&mut w.tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
    sys.rhs(t + T::lit(C4) * h, &w.tmp, k4);
    axpy_into(&mut w.tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    sys.rhs(t + T::lit(C5) * h, &w.tmp, k5);
    axpy_into(&mut w.tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
    sys.rhs(t + h, &w.tmp, k6);
    axpy_into(&mut w.y_new, y, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
    sys.rhs(t + h, &w.y_new, k7);
    stats.rhs_evals += 6;
    for i in 0..y.len() {
        w.tmp[i] = h
            * (T::lit(E1) * k1[i]
                + T::lit(E3) * k3[i]
                + T::lit(E4) * k4[i]
                + T::lit(E5) * k5[i]
                + T::lit(E6) * k6[i]
                + T::lit(E7) * k7[i]);
    }
    error_norm(y, &w.y_new, &w.tmp, opts)
}

fn initial_step<T: Real, S: OdeSystem<T>>(
    sys: &mut S,
    t: T,
    y: &[T],
    opts: &OdeOptions<T>,
    w: &mut Work<T>,
    stats: &mut OdeStats,
) -> T {
    let n = T::from_count(y.len().max(1));
    let (mut d0, mut d1) = (T::zero(), T::zero());
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (w.k[0][i] / sc) * (w.k[0][i] / sc);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + h0 * w.k[0][i];
    }
    sys.rhs(t + h0, &w.tmp, &mut w.k[1]);
    stats.rhs_evals += 1;
    let mut d2 = T::zero();
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].abs();
        let r = (w.k[1][i] - w.k[0][i]) / sc;
        d2 += r * r;
    }
    let d2 = (d2 / n).sqrt() / h0;
    let big = d1.max(d2);
    let h1 = if big <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / big).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl OdeSystem<f64> for Oscillator {
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Decay(f64);

    impl OdeSystem<f64> for Decay {
        fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0] + t.cos();
        }
    }

    fn opts() -> OdeOptions<f64> {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let mut y = [1.0, 0.0];
        let times: Vec<f64> = (1..=200).map(|i| i as f64 * 0.173).collect();
        let mut worst = 0.0f64;
        let mut stats = OdeStats::default();
        integrate(
            &mut Oscillator,
            0.0,
            &mut y,
            40.0,
            &times,
            &opts(),
            None,
            |t, s| worst = worst.max((s[0] - t.cos()).abs()).max((s[1] + t.sin()).abs()),
            &mut stats,
        )
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
        assert!((y[0] - 40f64.cos()).abs() < 1e-8);
        assert!(stats.rejected < stats.accepted);
    }

    #[test]
    fn forced_decay() {
        let k = 0.5;
        let mut y = [0.0];
        let mut stats = OdeStats::default();
        integrate(&mut Decay(k), 0.0, &mut y, 10.0, &[], &opts(), None, |_, _| {}, &mut stats).unwrap();
        let t = 10.0f64;
        let exact = (k * t.cos() + t.sin() - k * (-k * t).exp()) / (1.0 + k * k);
        assert!((y[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut y = [1.0, 0.0];
        let o = OdeOptions { max_steps: 5, ..opts() };
        let r = integrate(&mut Oscillator, 0.0, &mut y, 100.0, &[], &o, None, |_, _| {}, &mut OdeStats::default());
        assert!(matches!(r, Err(Error::ToleranceFailure { .. })));
    }
}
