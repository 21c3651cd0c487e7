//! Gauss-Legendre quadrature: fixed composite panels and an adaptive
//! globally-refining integrator, plus compensated summation.

use once_cell::sync::Lazy;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("quadrature failed to converge: error estimate {error:.3e} after {intervals} intervals (target {target:.3e})")]
    NoConvergence {
        error: f64,
        target: f64,
        intervals: usize,
    },
    #[error("invalid integration bounds [{a}, {b}]")]
    InvalidBounds { a: f64, b: f64 },
}

/// Neumaier compensated accumulator. Keeps the running error of a long
/// sum at a couple of ulps of the total instead of growing with length.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and P_n'(x) by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

pub static GL12: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(12));
pub static GL24: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(24));

/// Integral of `f` over [a, b] with the given rule.
#[inline]
pub fn integrate_rule<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Accumulator::new();
    for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
        acc.add(w * f(mid + half * x));
    }
    half * acc.value()
}

/// Composite fixed-panel Gauss-Legendre over the given panel edges.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    f: &mut F,
    edges: &[f64],
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let mut acc = Accumulator::new();
    for pair in edges.windows(2) {
        acc.add(integrate_rule(f, pair[0], pair[1], rule));
    }
    acc.value()
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Adaptive Gauss-Legendre on [a, b]: bisects the interval with the
/// largest GL12-vs-GL24 discrepancy until the summed error estimate is
/// below `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64), QuadratureError> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(QuadratureError::InvalidBounds { a, b });
    }
    let eval = |f: &mut F, a: f64, b: f64| {
        let coarse = integrate_rule(f, a, b, &GL12);
        let fine = integrate_rule(f, a, b, &GL24);
        let err = (fine - coarse).abs().max(1e-17 * fine.abs());
        (fine, err)
    };
    let (v, e) = eval(&mut f, a, b);
    let mut intervals = vec![Interval {
        a,
        b,
        value: v,
        error: e,
    }];
    const MAX_INTERVALS: usize = 4000;
    loop {
        let total: f64 = intervals.iter().map(|i| i.value).sum();
        let err: f64 = intervals.iter().map(|i| i.error).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok((total, err));
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadratureError::NoConvergence {
                error: err,
                target,
                intervals: intervals.len(),
            });
        }
        // split the worst interval
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Interval { a, b, .. } = intervals.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval at floating-point resolution; keep its value, drop its error
            let (v, _) = eval(&mut f, a, b);
            intervals.push(Interval {
                a,
                b,
                value: v,
                error: 0.0,
            });
            continue;
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = eval(&mut f, lo, hi);
            intervals.push(Interval {
                a: lo,
                b: hi,
                value: v,
                error: e,
            });
        }
    }
}

/// ln(1 - r2 * e^{-x}) for x > 0 and r2 = r^2 in [0, 1], written so that
/// both the near-cancellation regime (r -> 1, x -> 0) and the small-product
/// regime keep full relative accuracy. `one_minus_r2` must be the
/// cancellation-free form of 1 - r^2.
#[inline]
pub fn ln_one_minus_r2_exp(one_minus_r2: f64, x: f64) -> f64 {
    let ex = (-x).exp();
    let r2 = 1.0 - one_minus_r2;
    let prod = r2 * ex;
    if prod < 0.5 {
        (-prod).ln_1p()
    } else {
        ((-(-x).exp_m1()) + ex * one_minus_r2).ln()
    }
}
