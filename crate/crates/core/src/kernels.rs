//! Scalar exponential kernels shared by all closed-form expressions.
//!
//! Everything is written in a form that stays finite as `beta -> 0`
//! (removable singularities handled by truncated series).

use crate::num::Real;

/// Switch threshold for the `B` kernel series branch, on `|beta * tau|`.
pub const B_SERIES_THRESHOLD: f64 = 1e-4;

/// `B(tau) = (exp(beta*tau) - 1) / beta`, with `B(tau) = tau` at `beta = 0`.
pub fn b_kernel<R: Real>(beta: R, tau: R) -> R {
    let x = beta * tau;
    if x.abs() < R::c(B_SERIES_THRESHOLD) {
        // tau * (1 + x/2 + x^2/6 + x^3/24)
        tau * (R::one()
            + x * (R::half() + x * (R::c(1.0 / 6.0) + x * R::c(1.0 / 24.0))))
    } else {
        x.exp_m1() / beta
    }
}

/// `int_0^tau B(w) dw = (exp(beta*tau) - 1 - beta*tau) / beta^2`.
pub fn b_integral<R: Real>(beta: R, tau: R) -> R {
    let x = beta * tau;
    if x.abs() < R::c(0.3) {
        // tau^2 * sum_{k>=2} x^(k-2) / k!
        let mut term = R::half();
        let mut sum = term;
        let mut k = 2usize;
        loop {
            k += 1;
            term = term * x / R::c(k as f64);
            sum += term;
            if term.abs() <= sum.abs() * R::epsilon() || k > 40 {
                break;
            }
        }
        tau * tau * sum
    } else {
        (x.exp_m1() - x) / (beta * beta)
    }
}

/// `int_0^tau B(w)^2 dw = (B(tau; 2*beta) - 2*B(tau; beta) + tau) / beta^2`.
pub fn b_squared_integral<R: Real>(beta: R, tau: R) -> R {
    let x = beta * tau;
    if x.abs() < R::c(0.3) {
        // tau^3 * sum_{k>=3} (2^(k-1) - 2) x^(k-3) / k!
        let mut sum = R::zero();
        let mut pow = R::one(); // x^(k-3)
        let mut factorial = R::c(6.0); // k!
        let mut two_pow = R::c(4.0); // 2^(k-1)
        let mut k = 3usize;
        loop {
            let term = (two_pow - R::two()) * pow / factorial;
            sum += term;
            if term.abs() <= sum.abs() * R::epsilon() || k > 45 {
                break;
            }
            k += 1;
            pow = pow * x;
            factorial = factorial * R::c(k as f64);
            two_pow = two_pow * R::two();
        }
        tau * tau * tau * sum
    } else {
        let beta_sq = beta * beta;
        ((R::two() * x).exp_m1() / (R::two() * beta) - R::two() * x.exp_m1() / beta + tau)
            / beta_sq
    }
}

/// `(exp(beta*tau) + exp(-beta*tau) - 2) / (2 beta^2)`, i.e.
/// `(cosh(beta*tau) - 1) / beta^2`; equals
/// `int_0^tau exp(-beta*w) B(w; 2*beta) dw` and shows up in the
/// diffusion cross-covariance of the rate and its eta-integral.
pub fn cosh_kernel<R: Real>(beta: R, tau: R) -> R {
    let x = beta * tau;
    if x.abs() < R::c(0.3) {
        // tau^2 * sum_{k even >= 2} x^(k-2) / k!
        let x2 = x * x;
        let mut term = R::half();
        let mut sum = term;
        let mut k = 2usize;
        loop {
            term = term * x2 / R::c(((k + 1) * (k + 2)) as f64);
            sum += term;
            k += 2;
            if term.abs() <= sum.abs() * R::epsilon() || k > 40 {
                break;
            }
        }
        tau * tau * sum
    } else {
        (x.exp_m1() + (-x).exp_m1()) / (R::two() * beta * beta)
    }
}
