//! Tiny fixed-size vector helpers shared by the integrators.

pub(crate) fn add(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// `y + c * x`.
pub(crate) fn axpy(c: f64, x: [f64; 4], y: [f64; 4]) -> [f64; 4] {
    [
        y[0] + c * x[0],
        y[1] + c * x[1],
        y[2] + c * x[2],
        y[3] + c * x[3],
    ]
}
