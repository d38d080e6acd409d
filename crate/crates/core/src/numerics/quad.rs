//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBDIVISIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        error = f64::INFINITY;
    }
    // round-off floor so that the heap terminates on exactly integrable pieces
    error = error.max(50.0 * f64::EPSILON * value.abs());
    Segment { a, b, value, error }
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<QuadResult, NumericsError> {
    let mut heap = BinaryHeap::new();
    let first = gk15(f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    let mut evaluations = 15;
    while err > tol {
        if heap.len() >= MAX_SUBDIVISIONS {
            return Err(NumericsError::QuadNonConvergence {
                estimate: total,
                error: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(NumericsError::QuadNonConvergence {
                estimate: total,
                error: err,
            });
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // recompute sums occasionally to shed accumulated cancellation
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    total = heap.iter().map(|s| s.value).sum();
    err = heap.iter().map(|s| s.error).sum();
    if !total.is_finite() {
        return Err(NumericsError::QuadNonConvergence {
            estimate: total,
            error: err,
        });
    }
    Ok(QuadResult {
        value: total,
        error: err,
        evaluations,
    })
}

/// Integrates `f` over `(a, b)` to absolute tolerance `tol`.
///
/// `b` may be `f64::INFINITY`; the half-line is then mapped to `(0, 1)` via
/// `x = a + t / (1 - t)`.
pub fn quad_integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(NumericsError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() || b.is_nan() {
        return Err(NumericsError::Domain(format!("invalid interval ({a}, {b})")));
    }
    if b == a {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        return Err(NumericsError::Domain(format!("reversed interval ({a}, {b})")));
    }
    if b.is_infinite() {
        let g = |t: f64| {
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        adapt(&g, 0.0, 1.0, tol)
    } else {
        adapt(&f, a, b, tol)
    }
}
