//! Numerical integration utilities: adaptive Simpson quadrature for the
//! general-function hooks and Gauss-Hermite rules for expectations over
//! Gaussian jump sizes.

use crate::error::{Error, Result};
use crate::num::Real;

const MAX_DEPTH: usize = 40;

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate<R: Real, F: Fn(R) -> R>(f: &F, a: R, b: R, tol: R) -> Result<R> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("integration bounds".into()));
    }
    if a == b {
        return Ok(R::zero());
    }
    let (a, b, sign) = if a < b { (a, b, R::one()) } else { (b, a, -R::one()) };
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * R::half();
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut achieved = R::zero();
    let value = recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut achieved);
    if achieved > tol {
        return Err(Error::Quadrature {
            requested: tol.to_f64().unwrap_or(f64::NAN),
            achieved: achieved.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(sign * value)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::c(6.0) * (fa + R::c(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Real, F: Fn(R) -> R>(
    f: &F,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: usize,
    achieved: &mut R,
) -> R {
    let m = (a + b) * R::half();
    let lm = (a + m) * R::half();
    let rm = (m + b) * R::half();
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= R::c(15.0) * tol {
        let err = delta.abs() / R::c(15.0);
        if err > *achieved {
            *achieved = err;
        }
        return left + right + delta / R::c(15.0);
    }
    let half_tol = tol * R::half();
    recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1, achieved)
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1, achieved)
}

/// Gauss-Hermite nodes and weights for the physicists' weight `exp(-x^2)`.
///
/// Newton iteration on the normalized Hermite recurrence; accurate to
/// machine precision for the node counts used here (up to a few hundred).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // nodes come out descending on the first half; sort ascending
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Expectation `E[f(xi)]` for `xi ~ N(mean, std^2)` by Gauss-Hermite
/// quadrature with `n` nodes.
pub fn gauss_hermite_expectation<F: Fn(f64) -> f64>(f: F, mean: f64, std: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let scale = std::f64::consts::SQRT_2 * std;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mean + scale * x))
        .sum::<f64>()
        * inv_sqrt_pi
}
