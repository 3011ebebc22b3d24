//! Numerically safe replacements for partial or overflow-prone operations.
//!
//! Every guard returns `(value, derivative)`. Derivatives at kinks and inside
//! clamp regions use the conventions documented on each function.

/// Smallest admissible magnitude of a denominator.
pub const DIV_FLOOR: f64 = 1e-5;
/// Smallest admissible magnitude of a logarithm argument.
pub const LOG_FLOOR: f64 = 1e-10;
/// Exponent at which the exponential switches to linear growth.
pub const EXP_KNEE: f64 = 10.0;

/// `sqrt(|q|)`; derivative `sign(q) / (2 sqrt|q|)`, 0 at `q = 0`.
#[inline]
pub fn guard_sqrt(q: f64) -> (f64, f64) {
    let v = q.abs().sqrt();
    if q == 0.0 {
        (0.0, 0.0)
    } else {
        (v, q.signum() / (2.0 * v))
    }
}

/// `min(e^q, e^10 + |q|)`; derivative follows the active branch.
#[inline]
pub fn guard_exp(q: f64) -> (f64, f64) {
    let e = q.exp();
    let lin = EXP_KNEE.exp() + q.abs();
    if e <= lin {
        (e, e)
    } else {
        let d = if q == 0.0 { 0.0 } else { q.signum() };
        (lin, d)
    }
}

/// Clamps `|den|` to at least `1e-5`, preserving sign (0 maps to `+1e-5`);
/// derivative 1 outside the clamp, 0 inside.
#[inline]
pub fn guard_div(den: f64) -> (f64, f64) {
    if den.abs() >= DIV_FLOOR {
        (den, 1.0)
    } else if den < 0.0 {
        (-DIV_FLOOR, 0.0)
    } else {
        (DIV_FLOOR, 0.0)
    }
}

/// `ln(max(|q|, 1e-10))`; derivative `1/q` above the floor, 0 below.
#[inline]
pub fn guard_log(q: f64) -> (f64, f64) {
    let a = q.abs();
    if a > LOG_FLOOR {
        (a.ln(), 1.0 / q)
    } else {
        (LOG_FLOOR.ln(), 0.0)
    }
}
