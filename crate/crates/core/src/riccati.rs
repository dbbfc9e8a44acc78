//! Generalized Riccati transform engine for affine semimartingales with
//! discontinuities at fixed dates.
//!
//! For a `d`-dimensional affine semimartingale `X` and its accrual
//! `R = int rho d(eta)` with `rho = ell(t) + <lambda, X>`, the joint
//! transform `E[exp(<u, X_T> + v R_T) | F_t]` equals
//! `exp(Phi + <Psi, X_t> + v R_t)` where `(Phi, Psi)` solve a backward ODE
//! system between event dates and take prescribed discontinuities at
//! roll-over dates and at the jump dates of `X`.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::GaussHwModel;

pub type C = Complex<f64>;

type FnF = Arc<dyn Fn(f64, &[C]) -> C + Send + Sync>;
type FnR = Arc<dyn Fn(f64, &[C], &mut [C]) + Send + Sync>;

/// Specification of an affine semimartingale `X` together with the rate
/// map `rho = ell(t) + <lambda, X>` and the atom dates of the accrual
/// measure.
///
/// `gamma0`/`gamma_bar` are the log conditional transforms of the fixed
/// date discontinuities of `X`; they are only evaluated at `jump_dates`.
#[derive(Clone)]
pub struct AffineSpec {
    pub dim: usize,
    /// `F(t, u)` of the Levy-Khintchine pair of `X`.
    pub f_x: FnF,
    /// `R_i(t, u)` written into the output slice.
    pub r_x: FnR,
    /// `gamma_0(t, u)`: constant part of the fixed-date jump transform.
    pub gamma0: FnF,
    /// `gamma_i(t, u)`: state-dependent parts, written into the slice.
    pub gamma_bar: FnR,
    /// Fixed discontinuity dates of `X`, strictly increasing.
    pub jump_dates: Vec<f64>,
    /// Atom dates of the accrual measure, strictly increasing.
    pub roll_over: Vec<f64>,
    pub ell: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lambda: Vec<f64>,
}

impl std::fmt::Debug for AffineSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AffineSpec")
            .field("dim", &self.dim)
            .field("jump_dates", &self.jump_dates)
            .field("roll_over", &self.roll_over)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

/// Transform value at the left edge and the right edge of an event date.
#[derive(Clone, Debug)]
pub struct EventValues {
    pub date: f64,
    pub phi_right: C,
    pub psi_right: Vec<C>,
    pub phi_left: C,
    pub psi_left: Vec<C>,
}

/// Solution of the backward system on `[t, T]`.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub phi: C,
    pub psi: Vec<C>,
    /// Left/right transform values at each event date in `(t, T]`, in
    /// decreasing date order (the sweep direction).
    pub events: Vec<EventValues>,
}

impl RiccatiSolution {
    /// `exp(phi + <psi, x> + v r)`.
    pub fn value(&self, x: &[f64], v: C, r: f64) -> C {
        let mut e = self.phi + v * r;
        for (p, &xi) in self.psi.iter().zip(x) {
            e += p * xi;
        }
        e.exp()
    }
}

fn check_finite(phi: C, psi: &[C], t: f64) -> Result<()> {
    let ok = phi.re.is_finite()
        && phi.im.is_finite()
        && psi.iter().all(|p| p.re.is_finite() && p.im.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::BlowUp { last_valid: t })
    }
}

/// Solves the backward system from the terminal condition
/// `(Phi, Psi)(T) = (0, u)` down to time `t`, for the joint argument
/// `(u, v)`. `max_step` bounds the RK4 step width.
pub fn solve_riccati(
    spec: &AffineSpec,
    t: f64,
    big_t: f64,
    u: &[C],
    v: C,
    max_step: f64,
) -> Result<RiccatiSolution> {
    if t > big_t {
        return Err(Error::Domain(format!("riccati needs t <= T, got ({t}, {big_t})")));
    }
    if u.len() != spec.dim || spec.lambda.len() != spec.dim {
        return Err(Error::Config("argument dimension does not match the spec".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::Config("max_step must be positive".into()));
    }

    // event dates in (t, T], swept from the right
    let mut events: Vec<f64> = spec
        .jump_dates
        .iter()
        .chain(&spec.roll_over)
        .copied()
        .filter(|&d| d > t && d <= big_t)
        .collect();
    events.sort_by(|a, b| b.partial_cmp(a).unwrap());
    events.dedup();

    let mut phi = C::from(0.0);
    let mut psi = u.to_vec();
    let mut event_values = Vec::with_capacity(events.len());
    let mut right = big_t;

    // derivative of (Phi, Psi) in calendar time
    let deriv = |s: f64, psi: &[C], d_phi: &mut C, d_psi: &mut [C]| {
        *d_phi = -((spec.f_x)(s, psi) + (spec.ell)(s) * v);
        (spec.r_x)(s, psi, d_psi);
        for (d, &l) in d_psi.iter_mut().zip(&spec.lambda) {
            *d = -(*d + l * v);
        }
    };

    let mut segment_targets = events.clone();
    segment_targets.push(t);

    let dim = spec.dim;
    let mut k1p = vec![C::from(0.0); dim];
    let mut k2p = vec![C::from(0.0); dim];
    let mut k3p = vec![C::from(0.0); dim];
    let mut k4p = vec![C::from(0.0); dim];
    let mut stage = vec![C::from(0.0); dim];

    // consume each event exactly once: an event at the terminal date gives
    // a zero-width first segment and must not be re-applied
    let mut next_event = 0;
    for &target in &segment_targets {
        // discontinuity at the right edge of this segment: the sweep
        // moves from the right value at `right` to the left value there
        if next_event < events.len() && events[next_event] == right {
            next_event += 1;
            let on_atom = spec.roll_over.contains(&right);
            let on_jump = spec.jump_dates.contains(&right);
            let phi_right = phi;
            let psi_right = psi.clone();
            if on_atom {
                // shifted argument psi + lambda v enters the jump
                // transform; the atom itself adds v lambda to psi and
                // v ell to phi
                let mut shifted = psi.clone();
                for (s, &l) in shifted.iter_mut().zip(&spec.lambda) {
                    *s += l * v;
                }
                if on_jump {
                    phi += (spec.gamma0)(right, &shifted);
                    (spec.gamma_bar)(right, &shifted, &mut stage);
                    for (p, g) in psi.iter_mut().zip(&stage) {
                        *p += *g;
                    }
                }
                phi += v * (spec.ell)(right);
                for (p, &l) in psi.iter_mut().zip(&spec.lambda) {
                    *p += l * v;
                }
            } else if on_jump {
                phi += (spec.gamma0)(right, &psi);
                (spec.gamma_bar)(right, &psi, &mut stage);
                for (p, g) in psi.iter_mut().zip(&stage) {
                    *p += *g;
                }
            }
            check_finite(phi, &psi, right)?;
            event_values.push(EventValues {
                date: right,
                phi_right,
                psi_right,
                phi_left: phi,
                psi_left: psi.clone(),
            });
        }

        let width = right - target;
        if width > 0.0 {
            let n_steps = (width / max_step).ceil() as usize;
            let h = width / n_steps as f64;
            let mut s = right;
            for _ in 0..n_steps {
                // RK4 going backward: step -h in calendar time
                let mut k1f = C::from(0.0);
                let mut k2f = C::from(0.0);
                let mut k3f = C::from(0.0);
                let mut k4f = C::from(0.0);
                deriv(s, &psi, &mut k1f, &mut k1p);
                for i in 0..dim {
                    stage[i] = psi[i] - 0.5 * h * k1p[i];
                }
                deriv(s - 0.5 * h, &stage, &mut k2f, &mut k2p);
                for i in 0..dim {
                    stage[i] = psi[i] - 0.5 * h * k2p[i];
                }
                deriv(s - 0.5 * h, &stage, &mut k3f, &mut k3p);
                for i in 0..dim {
                    stage[i] = psi[i] - h * k3p[i];
                }
                deriv(s - h, &stage, &mut k4f, &mut k4p);
                phi -= h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
                for i in 0..dim {
                    psi[i] -= h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
                }
                s -= h;
                check_finite(phi, &psi, s)?;
            }
        }
        right = target;
    }

    Ok(RiccatiSolution { phi, psi, events: event_values })
}

/// Joint transform `E[exp(<u, X_T> + v R_T) | X_t = x, R_t = r]`.
#[allow(clippy::too_many_arguments)]
pub fn transform(
    spec: &AffineSpec,
    t: f64,
    big_t: f64,
    u: &[C],
    v: C,
    x_t: &[f64],
    r_t: f64,
    max_step: f64,
) -> Result<C> {
    Ok(solve_riccati(spec, t, big_t, u, v, max_step)?.value(x_t, v, r_t))
}

/// The one-dimensional Gaussian model as an affine spec:
/// `F(t, u) = alpha(t) u + sigma^2 u^2 / 2`, `R(t, u) = beta u`, with
/// Gaussian fixed-date jump transforms `m_i u + gamma_i^2 u^2 / 2`.
pub fn gauss_hw_spec(model: &GaussHwModel<f64>) -> AffineSpec {
    let p = model.params().clone();
    let schedule = model.schedule();
    let jump_dates: Vec<f64> = p.jumps.iter().map(|j| j.date).collect();
    let jumps = p.jumps.clone();
    let alpha = p.alpha.clone();
    let sigma = p.sigma;
    let beta = p.beta;
    AffineSpec {
        dim: 1,
        f_x: Arc::new(move |t, u| alpha.value_at(t) * u[0] + 0.5 * sigma * sigma * u[0] * u[0]),
        r_x: Arc::new(move |_t, u, out| out[0] = beta * u[0]),
        gamma0: Arc::new(move |t, u| {
            match jumps.iter().find(|j| j.date == t) {
                Some(j) => j.mean * u[0] + 0.5 * j.std * j.std * u[0] * u[0],
                None => C::from(0.0),
            }
        }),
        gamma_bar: Arc::new(|_t, _u, out| out[0] = C::from(0.0)),
        jump_dates,
        roll_over: schedule.roll_over_dates().to_vec(),
        ell: Arc::new(|_t| 0.0),
        lambda: vec![1.0],
    }
}
