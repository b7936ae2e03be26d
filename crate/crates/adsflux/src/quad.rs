//! Composite-Simpson quadrature with doubling refinement.

use crate::error::{GeomError, Result};

pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * k as f64);
    }
    sum * h / 3.0
}

/// Refine by doubling the node count until two consecutive estimates agree
/// within abs_tol + rel_tol·|value|.
pub fn simpson_adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    n0: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut n = n0.max(2);
    let mut prev = simpson(f, a, b, n);
    let mut gap = f64::INFINITY;
    for _ in 0..10 {
        n *= 2;
        let cur = simpson(f, a, b, n);
        gap = (cur - prev).abs();
        if gap <= abs_tol + rel_tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(GeomError::QuadratureDiverged { gap })
}

/// Composite Simpson over [0,1]² with n×n panels.
pub fn simpson2d(f: &dyn Fn(f64, f64) -> f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = 1.0 / n as f64;
    let w1 = |k: usize| {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut sum = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            sum += w1(i) * w1(j) * f(h * i as f64, h * j as f64);
        }
    }
    sum * h * h / 9.0
}

pub fn simpson2d_adaptive(
    f: &dyn Fn(f64, f64) -> f64,
    n0: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut n = n0.max(2);
    let mut prev = simpson2d(f, n);
    let mut gap = f64::INFINITY;
    for _ in 0..5 {
        n *= 2;
        let cur = simpson2d(f, n);
        gap = (cur - prev).abs();
        if gap <= abs_tol + rel_tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(GeomError::QuadratureDiverged { gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        assert!((simpson(&f, 0.0, 2.0, 8) - 6.0).abs() < 1e-13);
        let g = |x: f64, y: f64| x * y + y * y;
        assert!((simpson2d(&g, 4) - (0.25 + 1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_converges_on_smooth_integrands() {
        let f = |x: f64| (4.0 * x).sin().exp();
        let v = simpson_adaptive(&f, 0.0, 1.0, 4, 1e-12, 1e-12).unwrap();
        let dense = simpson(&f, 0.0, 1.0, 4096);
        assert!((v - dense).abs() < 1e-10);
    }
}
