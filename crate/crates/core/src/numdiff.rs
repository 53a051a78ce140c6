//! Central finite-difference oracles.
//!
//! Used by validation code and tests to check analytic derivatives; the
//! production assemblies use exact derivatives, not these.

use crate::linalg::{Mat3, Vec3, ZERO_MAT};

pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn shifted(x: Vec3, i: usize, h: f64) -> Vec3 {
    let mut y = x;
    y[i] += h;
    y
}

/// Central first partial ∂_i f, error O(h²).
pub fn partial(f: &dyn Fn(Vec3) -> f64, x: Vec3, i: usize, h: f64) -> f64 {
    (f(shifted(x, i, h)) - f(shifted(x, i, -h))) / (2.0 * h)
}

/// Central gradient, error O(h²).
pub fn gradient(f: &dyn Fn(Vec3) -> f64, x: Vec3, h: f64) -> Vec3 {
    [
        partial(f, x, 0, h),
        partial(f, x, 1, h),
        partial(f, x, 2, h),
    ]
}

/// Central Hessian, error O(h²); symmetric by construction.
pub fn hessian(f: &dyn Fn(Vec3) -> f64, x: Vec3, h: f64) -> Mat3 {
    let mut m = ZERO_MAT;
    let f0 = f(x);
    for i in 0..3 {
        m[i][i] = (f(shifted(x, i, h)) - 2.0 * f0 + f(shifted(x, i, -h))) / (h * h);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let pp = f(shifted(shifted(x, i, h), j, h));
            let pm = f(shifted(shifted(x, i, h), j, -h));
            let mp = f(shifted(shifted(x, i, -h), j, h));
            let mm = f(shifted(shifted(x, i, -h), j, -h));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}
