//! Adaptive Gauss-Kronrod (G7, K15) quadrature on a finite interval.
//!
//! Globally adaptive: the interval starts uniformly subdivided, then the
//! segment with the largest error estimate is bisected until the summed
//! error estimate meets the tolerance or the segment budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae for the 15-point rule on [-1, 1] (positive half).
/// Entries 1, 3, 5 are the embedded 7-point Gauss abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

/// 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod weights.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_segments: usize,
    pub max_segments: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            initial_segments: 16,
            max_segments: 4096,
        }
    }
}

/// Tolerance was not met within the segment budget; the best estimate is
/// attached so callers can decide whether it is still usable.
#[derive(Debug, Clone, Copy, thiserror::Error)]
#[error("quadrature tolerance not met: estimate {estimate} +/- {abs_error}")]
pub struct ToleranceNotMet {
    pub estimate: f64,
    pub abs_error: f64,
}

/// One K15 evaluation over [a, b]: returns (integral, error estimate).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    let mut result_k = WGK[7] * fc;
    let mut result_g = WG[3] * fc;
    let mut result_abs = result_k.abs();

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        result_k += WGK[j] * (f1 + f2);
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }

    // Scaled error estimate following QUADPACK's resasc heuristic.
    let mean = 0.5 * result_k;
    let mut result_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    result_asc *= half.abs();

    let value = result_k * half;
    let mut err = ((result_k - result_g) * half).abs();
    if result_asc != 0.0 && err != 0.0 {
        err = result_asc * (200.0 * err / result_asc).powf(1.5).min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * result_abs * half.abs();
    if round_floor > f64::MIN_POSITIVE && round_floor > err {
        err = round_floor;
    }
    (value, err)
}

struct Segment {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
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
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Integrate `f` over [a, b]. The integrand must return finite values.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadSettings,
) -> Result<QuadResult, ToleranceNotMet> {
    let mut heap = BinaryHeap::with_capacity(settings.max_segments);
    let mut total = 0.0;
    let mut total_err = 0.0;

    let step = (b - a) / settings.initial_segments as f64;
    for i in 0..settings.initial_segments {
        let lo = a + step * i as f64;
        let hi = if i + 1 == settings.initial_segments {
            b
        } else {
            a + step * (i + 1) as f64
        };
        let (value, err) = kronrod15(&f, lo, hi);
        total += value;
        total_err += err;
        heap.push(Segment {
            err,
            a: lo,
            b: hi,
            value,
        });
    }

    let mut segments = settings.initial_segments;
    while total_err > settings.abs_tol.max(settings.rel_tol * total.abs()) {
        if segments >= settings.max_segments {
            return Err(ToleranceNotMet {
                estimate: total,
                abs_error: total_err,
            });
        }
        let worst = heap.pop().expect("segment heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable in f64; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment {
            err: e1,
            a: worst.a,
            b: mid,
            value: v1,
        });
        heap.push(Segment {
            err: e2,
            a: mid,
            b: worst.b,
            value: v2,
        });
        segments += 1;
    }

    Ok(QuadResult {
        value: total,
        abs_error: total_err,
    })
}
